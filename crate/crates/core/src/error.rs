use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {residual:.3e})")]
    NonHermitianInput { residual: f64 },

    #[error("{what} = {value} is outside its domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("negative eigenvalue {0:.3e} in entropy input")]
    NegativeEigenvalue(f64),

    #[error("infeasible attack parameters: {0}")]
    InfeasibleParameters(String),

    #[error("overlap matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient statistics: {0}")]
    InsufficientStatistics(&'static str),

    #[error("refusing to derive a key rate from a lower bound on Eve's information")]
    LowerBoundRefused,

    #[error("no feasible candidate attack was produced")]
    NoFeasibleCandidate,

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("malformed attack description: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: "[0, 1]",
        })
    }
}
