//! Round-by-round Monte-Carlo simulation of the two-way protocol loop.
//!
//! Every round draws exactly [`DRAWS_PER_ROUND`] uniforms from a ChaCha
//! stream, whatever branch it takes, so a given seed always maps to the same
//! sequence of rounds.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attack::AncillaOverlaps;
use crate::bounds::{eve_info_for_kind, secret_fraction};
use crate::error::{check_probability, Error, Result};
use crate::pauli::Pauli;
use crate::protocol::{NoiseModel, ProtocolKind, ProtocolSpec};

/// Default fraction of encoding-mode rounds sacrificed to estimate `Q`.
pub const DEFAULT_EM_SAMPLE_FRACTION: f64 = 0.1;

pub const DRAWS_PER_ROUND: usize = 7;

#[derive(Clone, Debug)]
pub struct SimulationConfig {
    pub protocol: ProtocolSpec,
    pub attack: AncillaOverlaps,
    pub noise: NoiseModel,
    pub n_rounds: u64,
    pub seed: u64,
    pub em_sample_fraction: f64,
}

impl SimulationConfig {
    pub fn new(
        protocol: ProtocolSpec,
        attack: AncillaOverlaps,
        noise: NoiseModel,
        n_rounds: u64,
        seed: u64,
    ) -> Self {
        Self {
            protocol,
            attack,
            noise,
            n_rounds,
            seed,
            em_sample_fraction: DEFAULT_EM_SAMPLE_FRACTION,
        }
    }

    fn check(&self) -> Result<()> {
        self.protocol.check()?;
        if self.n_rounds == 0 {
            return Err(Error::Config("n_rounds must be at least 1".into()));
        }
        check_probability("EM sample fraction", self.em_sample_fraction)?;
        check_probability("backward noise", self.noise.backward_flip())?;
        let report = self.attack.validate();
        if !report.passed() {
            return Err(Error::Config(format!(
                "attack fails validation: {}",
                report.failures().join(", ")
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub protocol: String,
    pub kind: ProtocolKind,
    pub p_control: f64,
    pub noise: NoiseModel,
    pub n_rounds: u64,
    pub seed: u64,
    pub em_sample_fraction: f64,
    pub attack: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionStats {
    pub dir: String,
    pub n: u64,
    pub flips: u64,
    pub rate: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmStats {
    pub n: u64,
    pub errors: u64,
    pub q_hat: f64,
    pub stderr: f64,
}

/// Outcome counts of one run. Matched control rounds (`per_direction`),
/// control rounds measured in the wrong basis (`cm_unmatched`), sampled
/// encoding rounds (`em`), `sifted` and `discarded` partition `n_rounds`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationReport {
    pub config_echo: ConfigEcho,
    pub per_direction: Vec<DirectionStats>,
    pub em: EmStats,
    pub sifted: u64,
    pub discarded: u64,
    pub cm_unmatched: u64,
}

impl SimulationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Flip rate over all matched control rounds, or `None` without samples.
    pub fn pooled_forward_noise(&self) -> Option<f64> {
        let n: u64 = self.per_direction.iter().map(|d| d.n).sum();
        let flips: u64 = self.per_direction.iter().map(|d| d.flips).sum();
        (n > 0).then(|| flips as f64 / n as f64)
    }

    pub fn total_counted(&self) -> u64 {
        self.per_direction.iter().map(|d| d.n).sum::<u64>()
            + self.cm_unmatched
            + self.em.n
            + self.sifted
            + self.discarded
    }
}

fn rate_and_stderr(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let p = k as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

type Rho = [[Complex64; 2]; 2];

/// `<v| rho |v>` for a normalized qubit vector `v`.
fn expectation(rho: &Rho, v: [Complex64; 2]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            acc += v[i].conj() * rho[i][j] * v[j];
        }
    }
    acc.re.clamp(0.0, 1.0)
}

fn conjugate_by(op: Pauli, rho: &Rho) -> Rho {
    let m = op.matrix();
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (l, slot) in row.iter_mut().enumerate() {
            for j in 0..2 {
                for k in 0..2 {
                    *slot += m[i][j] * rho[j][k] * m[l][k].conj();
                }
            }
        }
    }
    out
}

/// Outcome probabilities for every (direction, bit) pair, computed once per
/// run from the reduced post-attack states.
struct RoundTables {
    /// Probability that Alice's matched control measurement disagrees with
    /// Bob's prepared bit.
    cm_flip: Vec<[f64; 2]>,
    /// Probability that Bob's outcome differs from his prepared bit after
    /// encoding operation `op`, before backward noise.
    em_flip: Vec<[Vec<f64>; 2]>,
    /// Encoded bit per (direction, operation), `None` if undecodable.
    encoded: Vec<Vec<Option<bool>>>,
}

impl RoundTables {
    fn build(cfg: &SimulationConfig) -> Result<Self> {
        let iso = cfg.attack.realize_isometry()?;
        let p = &cfg.protocol;
        let mut cm_flip = Vec::with_capacity(p.prep_directions.len());
        let mut em_flip = Vec::with_capacity(p.prep_directions.len());
        let mut encoded = Vec::with_capacity(p.prep_directions.len());
        for &dir in &p.prep_directions {
            let basis = dir.eigenbasis();
            let mut cm = [0.0; 2];
            let mut em: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
            for bit in 0..2 {
                let rho = iso.reduced_output(basis[bit]);
                cm[bit] = expectation(&rho, basis[1 - bit]);
                em[bit] = p
                    .encoding_ops
                    .iter()
                    .map(|&op| expectation(&conjugate_by(op, &rho), basis[1 - bit]))
                    .collect();
            }
            cm_flip.push(cm);
            em_flip.push(em);
            encoded.push(
                (0..p.encoding_ops.len())
                    .map(|i| p.encoded_bit(i, dir))
                    .collect(),
            );
        }
        Ok(Self {
            cm_flip,
            em_flip,
            encoded,
        })
    }
}

fn pick(u: f64, n: usize) -> usize {
    ((u * n as f64) as usize).min(n - 1)
}

/// Runs `cfg.n_rounds` protocol rounds.
pub fn run(cfg: &SimulationConfig) -> Result<SimulationReport> {
    cfg.check()?;
    let tables = RoundTables::build(cfg)?;
    let p = &cfg.protocol;
    let n_dirs = p.prep_directions.len();
    let n_ops = p.encoding_ops.len();
    let qb = cfg.noise.backward_flip();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cm_n = vec![0u64; n_dirs];
    let mut cm_flips = vec![0u64; n_dirs];
    let (mut cm_unmatched, mut em_n, mut em_errors, mut sifted, mut discarded) = (0, 0, 0, 0, 0);

    for _ in 0..cfg.n_rounds {
        let u: [f64; DRAWS_PER_ROUND] = std::array::from_fn(|_| rng.random::<f64>());
        let dir = pick(u[0], n_dirs);
        let bit = usize::from(u[1] >= 0.5);
        if u[2] < p.p_control {
            let alice_dir = pick(u[3], n_dirs);
            if alice_dir != dir {
                cm_unmatched += 1;
                continue;
            }
            cm_n[dir] += 1;
            if u[4] < tables.cm_flip[dir][bit] {
                cm_flips[dir] += 1;
            }
        } else {
            let op = pick(u[3], n_ops);
            let Some(encoded) = tables.encoded[dir][op] else {
                discarded += 1;
                continue;
            };
            let measured_flip = u[4] < tables.em_flip[dir][bit][op];
            let backward_flip = u[5] < qb;
            let decoded = measured_flip != backward_flip;
            let error = decoded != encoded;
            if u[6] < cfg.em_sample_fraction {
                em_n += 1;
                em_errors += u64::from(error);
            } else {
                sifted += 1;
            }
        }
    }

    let per_direction = p
        .prep_directions
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let (rate, stderr) = rate_and_stderr(cm_flips[i], cm_n[i]);
            DirectionStats {
                dir: d.label(),
                n: cm_n[i],
                flips: cm_flips[i],
                rate,
                stderr,
            }
        })
        .collect();
    let (q_hat, stderr) = rate_and_stderr(em_errors, em_n);
    Ok(SimulationReport {
        config_echo: ConfigEcho {
            protocol: p.name.clone(),
            kind: p.kind,
            p_control: p.p_control,
            noise: cfg.noise,
            n_rounds: cfg.n_rounds,
            seed: cfg.seed,
            em_sample_fraction: cfg.em_sample_fraction,
            attack: cfg.attack.to_json_value(),
        },
        per_direction,
        em: EmStats {
            n: em_n,
            errors: em_errors,
            q_hat,
            stderr,
        },
        sifted,
        discarded,
        cm_unmatched,
    })
}

/// How to treat protocols whose `I_E` is only known as a lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundPolicy {
    /// Refuse to report a key rate from a lower bound on `I_E`.
    RequireSafe,
    /// Report it anyway; the result is then an optimistic estimate.
    AllowLowerBound,
}

/// Secret fraction from the empirical noise rates of `report`.
///
/// Under equal-forward noise `Q` is taken to be the pooled `Q_f`; otherwise
/// the sampled encoding-mode error rate is used.
pub fn estimate_key_rate(report: &SimulationReport, policy: BoundPolicy) -> Result<f64> {
    let qf = report
        .pooled_forward_noise()
        .ok_or(Error::InsufficientStatistics(
            "no matched control-mode rounds",
        ))?;
    let q = match report.config_echo.noise {
        NoiseModel::EqualForward => qf,
        NoiseModel::IndependentBackward { .. } => {
            if report.em.n == 0 {
                return Err(Error::InsufficientStatistics(
                    "no sampled encoding-mode rounds",
                ));
            }
            report.em.q_hat
        }
    };
    let ie = eve_info_for_kind(report.config_echo.kind, qf)?;
    if !ie.kind.is_safe_for_key_rate() && policy == BoundPolicy::RequireSafe {
        return Err(Error::LowerBoundRefused);
    }
    secret_fraction(q, ie.value)
}
