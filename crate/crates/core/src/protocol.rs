//! Protocol descriptions and channel noise models.

use std::f64::consts::PI;

use serde::Serialize;

use crate::attack::BlochDirection;
use crate::error::{check_probability, Error, Result};
use crate::pauli::Pauli;

/// Number of equatorial preparation states used to sample the continuum of
/// the generalized LM05 protocol.
pub const DEFAULT_EQUATORIAL_STATES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Simple,
    Lm05Prime,
    Lm05PrimeModified,
    TwqkdSixState,
    Lm05Generalized,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Simple => "simple",
            ProtocolKind::Lm05Prime => "lm05-prime",
            ProtocolKind::Lm05PrimeModified => "lm05-prime-modified",
            ProtocolKind::TwqkdSixState => "twqkd-six-state",
            ProtocolKind::Lm05Generalized => "lm05-generalized",
        }
    }
}

/// Extra classical announcements made after the quantum transmission.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Disclosure {
    None,
    /// Alice names the two operations she did not use, so that each round is
    /// reduced to a two-element alphabet.
    ModifiedLm05Prime,
}

/// How Alice's bit relates to her encoding operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BitRule {
    /// The i-th encoding operation carries bit i (I for 0, Z for 1). Bob can
    /// decode only when the two operations act differently on his state.
    ByOperation,
    /// The bit is whether the operation flips the prepared eigenstate; Alice
    /// learns it once Bob discloses the preparation basis.
    ByFlip,
}

/// Action of an encoding operation on the eigenstates of a preparation axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FlipOutcome {
    Preserve,
    Flip,
    Indeterminate,
}

/// Numerically determines whether `op` maps `|0>_dir` to itself or to `|1>_dir`.
pub fn flip_outcome(op: Pauli, dir: BlochDirection) -> FlipOutcome {
    let basis = dir.eigenbasis();
    let m = op.matrix();
    let k0 = basis[0];
    let image = [
        m[0][0] * k0[0] + m[0][1] * k0[1],
        m[1][0] * k0[0] + m[1][1] * k0[1],
    ];
    let stay = (k0[0].conj() * image[0] + k0[1].conj() * image[1]).norm_sqr();
    if (stay - 1.0).abs() < 1e-12 {
        FlipOutcome::Preserve
    } else if stay < 1e-12 {
        FlipOutcome::Flip
    } else {
        FlipOutcome::Indeterminate
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolSpec {
    pub name: String,
    pub kind: ProtocolKind,
    pub prep_directions: Vec<BlochDirection>,
    pub encoding_ops: Vec<Pauli>,
    pub bit_rule: BitRule,
    pub p_encode: f64,
    pub p_control: f64,
    pub disclosure: Disclosure,
    pub deterministic: bool,
}

impl ProtocolSpec {
    fn build(
        kind: ProtocolKind,
        prep_directions: Vec<BlochDirection>,
        encoding_ops: Vec<Pauli>,
        bit_rule: BitRule,
        disclosure: Disclosure,
    ) -> Self {
        let mut spec = Self {
            name: kind.name().to_string(),
            kind,
            prep_directions,
            encoding_ops,
            bit_rule,
            p_encode: 0.5,
            p_control: 0.5,
            disclosure,
            deterministic: false,
        };
        spec.deterministic = spec.prep_directions.iter().all(|&d| spec.decodable(d));
        spec
    }

    pub fn simple() -> Self {
        Self::build(
            ProtocolKind::Simple,
            vec![BlochDirection::X, BlochDirection::Z],
            vec![Pauli::I, Pauli::Z],
            BitRule::ByOperation,
            Disclosure::None,
        )
    }

    pub fn lm05_prime() -> Self {
        Self::build(
            ProtocolKind::Lm05Prime,
            vec![BlochDirection::X, BlochDirection::Z],
            Pauli::ALL.to_vec(),
            BitRule::ByFlip,
            Disclosure::None,
        )
    }

    pub fn lm05_prime_modified() -> Self {
        Self::build(
            ProtocolKind::Lm05PrimeModified,
            vec![BlochDirection::X, BlochDirection::Z],
            Pauli::ALL.to_vec(),
            BitRule::ByFlip,
            Disclosure::ModifiedLm05Prime,
        )
    }

    pub fn twqkd_six_state() -> Self {
        Self::build(
            ProtocolKind::TwqkdSixState,
            vec![BlochDirection::X, BlochDirection::Y, BlochDirection::Z],
            Pauli::ALL.to_vec(),
            BitRule::ByFlip,
            Disclosure::None,
        )
    }

    /// Equatorial preparations at `n_phi` evenly spaced azimuths.
    pub fn lm05_generalized(n_phi: usize) -> Self {
        let dirs = (0..n_phi.max(1))
            .map(|k| BlochDirection::equatorial(2.0 * PI * k as f64 / n_phi.max(1) as f64))
            .collect();
        Self::build(
            ProtocolKind::Lm05Generalized,
            dirs,
            vec![Pauli::I, Pauli::Z],
            BitRule::ByFlip,
            Disclosure::None,
        )
    }

    pub fn by_name(name: &str) -> Option<Self> {
        builtin_protocols().into_iter().find(|p| p.name == name)
    }

    /// Returns a copy with control-mode probability `p_control`.
    pub fn with_control_probability(&self, p_control: f64) -> Result<Self> {
        check_probability("control-mode probability", p_control)?;
        let mut out = self.clone();
        out.p_control = p_control;
        out.p_encode = 1.0 - p_control;
        Ok(out)
    }

    pub fn check(&self) -> Result<()> {
        if self.prep_directions.is_empty() || self.encoding_ops.is_empty() {
            return Err(Error::Config(format!(
                "protocol {} needs preparation directions and encoding operations",
                self.name
            )));
        }
        if (self.p_encode + self.p_control - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "p_encode + p_control = {} must equal 1",
                self.p_encode + self.p_control
            )));
        }
        if self.bit_rule == BitRule::ByOperation && self.encoding_ops.len() != 2 {
            return Err(Error::Config(
                "operation-labelled bits need exactly two encoding operations".into(),
            ));
        }
        Ok(())
    }

    /// Encoded bit for operation index `op_index` on preparation `dir`, or
    /// `None` when Bob cannot decode such rounds.
    pub fn encoded_bit(&self, op_index: usize, dir: BlochDirection) -> Option<bool> {
        if !self.decodable(dir) {
            return None;
        }
        match self.bit_rule {
            BitRule::ByOperation => Some(op_index == 1),
            BitRule::ByFlip => {
                Some(flip_outcome(self.encoding_ops[op_index], dir) == FlipOutcome::Flip)
            }
        }
    }

    /// Whether every encoding operation acts on `dir` in a way that reveals the bit.
    pub fn decodable(&self, dir: BlochDirection) -> bool {
        let outcomes: Vec<FlipOutcome> = self
            .encoding_ops
            .iter()
            .map(|&op| flip_outcome(op, dir))
            .collect();
        if outcomes.contains(&FlipOutcome::Indeterminate) {
            return false;
        }
        match self.bit_rule {
            BitRule::ByFlip => true,
            BitRule::ByOperation => {
                outcomes.len() == 2
                    && outcomes[0] == FlipOutcome::Preserve
                    && outcomes[1] == FlipOutcome::Flip
            }
        }
    }
}

/// All protocols the workbench knows, with uniform choice probabilities.
pub fn builtin_protocols() -> Vec<ProtocolSpec> {
    vec![
        ProtocolSpec::simple(),
        ProtocolSpec::lm05_prime(),
        ProtocolSpec::lm05_prime_modified(),
        ProtocolSpec::twqkd_six_state(),
        ProtocolSpec::lm05_generalized(DEFAULT_EQUATORIAL_STATES),
    ]
}

/// Relation between the forward noise and the overall encoding-mode noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum NoiseModel {
    /// The overall noise equals the forward noise.
    EqualForward,
    /// An independent flip with probability `qb` on the way back.
    IndependentBackward { qb: f64 },
}

impl NoiseModel {
    pub fn independent_backward(qb: f64) -> Result<Self> {
        check_probability("backward noise", qb)?;
        Ok(NoiseModel::IndependentBackward { qb })
    }

    pub fn backward_flip(&self) -> f64 {
        match *self {
            NoiseModel::EqualForward => 0.0,
            NoiseModel::IndependentBackward { qb } => qb,
        }
    }

    /// Overall error probability `q` for forward noise `qf`.
    pub fn overall_noise(&self, qf: f64) -> f64 {
        match *self {
            NoiseModel::EqualForward => qf,
            NoiseModel::IndependentBackward { qb } => qf * (1.0 - qb) + qb * (1.0 - qf),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            NoiseModel::EqualForward => "equal-forward".into(),
            NoiseModel::IndependentBackward { qb } => format!("qb={qb}"),
        }
    }
}

impl std::str::FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "equal-forward" {
            return Ok(NoiseModel::EqualForward);
        }
        if let Some(v) = s.strip_prefix("qb=") {
            let qb: f64 = v
                .parse()
                .map_err(|_| Error::Parse(format!("bad backward noise value {v:?}")))?;
            return NoiseModel::independent_backward(qb);
        }
        Err(Error::Parse(format!(
            "noise model must be 'equal-forward' or 'qb=<value>', got {s:?}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinism_flags() {
        assert!(ProtocolSpec::lm05_prime().deterministic);
        assert!(ProtocolSpec::lm05_prime_modified().deterministic);
        assert!(ProtocolSpec::twqkd_six_state().deterministic);
        assert!(ProtocolSpec::lm05_generalized(16).deterministic);
        assert!(!ProtocolSpec::simple().deterministic);
    }

    #[test]
    fn builtin_shapes() {
        let all = builtin_protocols();
        assert_eq!(all.len(), 5);
        for p in &all {
            p.check().unwrap();
            assert_eq!(p.p_encode + p.p_control, 1.0);
        }
        assert_eq!(ProtocolSpec::twqkd_six_state().prep_directions.len(), 3);
        assert_eq!(
            ProtocolSpec::by_name("lm05-generalized")
                .unwrap()
                .prep_directions
                .len(),
            DEFAULT_EQUATORIAL_STATES
        );
        assert!(ProtocolSpec::by_name("bb84").is_none());
    }

    #[test]
    fn flip_rule_on_coordinate_axes() {
        for dir in [BlochDirection::X, BlochDirection::Y, BlochDirection::Z] {
            for op in Pauli::ALL {
                let analytic = op != Pauli::I && Some(op) != dir.pauli();
                let want = if analytic {
                    FlipOutcome::Flip
                } else {
                    FlipOutcome::Preserve
                };
                assert_eq!(flip_outcome(op, dir), want, "{op:?} on {dir:?}");
            }
        }
    }

    #[test]
    fn x_is_indeterminate_off_axis() {
        let d = BlochDirection::equatorial(PI / 8.0);
        assert_eq!(flip_outcome(Pauli::X, d), FlipOutcome::Indeterminate);
        assert_eq!(flip_outcome(Pauli::Z, d), FlipOutcome::Flip);
    }

    #[test]
    fn simple_protocol_sifting() {
        let p = ProtocolSpec::simple();
        assert_eq!(p.encoded_bit(0, BlochDirection::Z), None);
        assert_eq!(p.encoded_bit(1, BlochDirection::X), Some(true));
        assert_eq!(p.encoded_bit(0, BlochDirection::X), Some(false));
    }

    #[test]
    fn noise_models() {
        assert_eq!(NoiseModel::EqualForward.overall_noise(0.1), 0.1);
        let m: NoiseModel = "qb=0.05".parse().unwrap();
        assert!((m.overall_noise(0.1) - (0.1 * 0.95 + 0.05 * 0.9)).abs() < 1e-15);
        assert!("qb=2".parse::<NoiseModel>().is_err());
        assert!("loud".parse::<NoiseModel>().is_err());
    }

    #[test]
    fn control_probability_override() {
        let p = ProtocolSpec::lm05_prime()
            .with_control_probability(0.2)
            .unwrap();
        assert_eq!(p.p_encode, 0.8);
        assert!(ProtocolSpec::lm05_prime()
            .with_control_probability(1.5)
            .is_err());
    }
}
