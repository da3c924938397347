//! Randomized search over feasible attacks, used to probe how tight the
//! analytic bounds are. Nothing here is a certified optimizer.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::attack::{
    interference_attack, symmetric_attack, AncillaOverlaps, BlochChannel, BlochDirection,
};
use crate::bounds::six_state_closed_form;
use crate::error::{check_probability, Error, Result};
use crate::gram::{
    ensembles, holevo, lm05_prime_holevo, modified_lm05_prime_holevo, six_state_holevo, GramEngine,
};
use crate::math::{h, hermitian_eigen, CMatrix};

/// Real parameters of a lower-triangular 4x4 complex factor: four real
/// diagonal entries and six complex off-diagonal ones.
pub const FACTOR_PARAMS: usize = 16;

/// Largest directional disturbance spread accepted as isotropic.
pub const ISOTROPY_TOL: f64 = 1e-6;

/// Number of Bloch-sphere samples used for the isotropy test.
pub const ISOTROPY_SAMPLES: usize = 200;

/// Candidates refined by coordinate descent after the random phase.
const REFINED_CANDIDATES: usize = 4;

/// Maps a factor `L` to a candidate attack: `g0 = L L^dagger`, then
/// `g = (R x 1) g0 (R x 1)^dagger` with `R` chosen so that the normalization
/// and orthogonality constraints hold. Optionally the induced channel is
/// projected onto the depolarizing family with flip probability `target_qf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AttackParameterization {
    pub target_qf: Option<f64>,
}

impl AttackParameterization {
    /// Unconstrained physical attacks.
    pub fn unconstrained() -> Self {
        Self { target_qf: None }
    }

    /// Attacks inducing a depolarizing channel with flip probability `qf`.
    pub fn isotropic(qf: f64) -> Result<Self> {
        check_probability("forward noise", qf)?;
        if qf > 2.0 / 3.0 {
            return Err(Error::Domain {
                what: "isotropic forward noise",
                value: qf,
                domain: "[0, 2/3]",
            });
        }
        Ok(Self {
            target_qf: Some(qf),
        })
    }

    /// Builds the candidate for `params`; `None` when the factor is too
    /// degenerate to normalize.
    pub fn candidate(&self, params: &[f64; FACTOR_PARAMS]) -> Option<AncillaOverlaps> {
        let g = normalized_gram(params)?;
        let a = AncillaOverlaps::from_matrix(BlochDirection::Z, g).ok()?;
        Some(match self.target_qf {
            None => a,
            Some(qf) => {
                AncillaOverlaps::from_bloch_channel(&project_isotropic(&a.bloch_channel(), qf))
            }
        })
    }

    /// Whether `a` satisfies every constraint this parameterization promises.
    pub fn accepts(&self, a: &AncillaOverlaps) -> bool {
        if !a.validate().passed() {
            return false;
        }
        match self.target_qf {
            None => true,
            Some(qf) => {
                let (lo, hi) = a.disturbance_spread(ISOTROPY_SAMPLES);
                hi - lo < ISOTROPY_TOL && (0.5 * (lo + hi) - qf).abs() < ISOTROPY_TOL
            }
        }
    }
}

fn factor(params: &[f64; FACTOR_PARAMS]) -> CMatrix {
    let mut l = CMatrix::zeros(4);
    let mut k = 4;
    for i in 0..4 {
        l[(i, i)] = Complex64::new(params[i], 0.0);
        for j in 0..i {
            l[(i, j)] = Complex64::new(params[k], params[k + 1]);
            k += 2;
        }
    }
    l
}

fn normalized_gram(params: &[f64; FACTOR_PARAMS]) -> Option<CMatrix> {
    let l = factor(params);
    let g0 = &l * &l.adjoint();
    let b = CMatrix::from_fn(2, |i, k| (0..2).map(|j| g0[(2 * i + j, 2 * k + j)]).sum());
    let eig = hermitian_eigen(&b).ok()?;
    if eig.values.iter().any(|&v| v < 1e-9) {
        return None;
    }
    // R = B^{-1/2}
    let r = CMatrix::from_fn(2, |i, k| {
        (0..2)
            .map(|m| eig.vectors[(i, m)] * eig.vectors[(k, m)].conj() / eig.values[m].sqrt())
            .sum()
    });
    let rk = CMatrix::from_fn(4, |a, b| {
        if a % 2 == b % 2 {
            r[(a / 2, b / 2)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let g = &(&rk * &g0) * &rk.adjoint();
    // symmetrize away rounding so the Hermiticity check is exact
    Some(CMatrix::from_fn(4, |a, b| {
        0.5 * (g[(a, b)] + g[(b, a)].conj())
    }))
}

/// Closest depolarizing-family channel: no translation, symmetric part of `M`
/// set to `(1 - 2 qf) 1`, and the rotation generator clamped to the ball
/// `|a|^2 <= qf (2 - 3 qf)` on which the channel stays completely positive.
pub fn project_isotropic(ch: &BlochChannel, qf: f64) -> BlochChannel {
    let m = ch.m;
    let mut a = [
        0.5 * (m[2][1] - m[1][2]),
        0.5 * (m[0][2] - m[2][0]),
        0.5 * (m[1][0] - m[0][1]),
    ];
    let radius = (qf * (2.0 - 3.0 * qf)).max(0.0).sqrt();
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    if norm > radius {
        let s = radius / norm;
        a.iter_mut().for_each(|v| *v *= s);
    }
    let d = 1.0 - 2.0 * qf;
    BlochChannel {
        m: [[d, -a[2], a[1]], [a[2], d, -a[0]], [-a[1], a[0], d]],
        t: [0.0; 3],
    }
}

/// Draws a physical attack from the unconstrained factor distribution.
pub fn random_attack<R: Rng>(rng: &mut R) -> AncillaOverlaps {
    let p = AttackParameterization::unconstrained();
    loop {
        if let Some(a) = p.candidate(&random_params(rng)) {
            return a;
        }
    }
}

fn random_params<R: Rng>(rng: &mut R) -> [f64; FACTOR_PARAMS] {
    std::array::from_fn(|_| rng.random_range(-1.0..1.0))
}

/// The Holevo quantities the search can maximize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HolevoTarget {
    Simple,
    ModifiedLm05Prime,
    Lm05Prime,
    SixState,
}

impl HolevoTarget {
    pub fn evaluate(self, a: &AncillaOverlaps) -> Result<f64> {
        match self {
            HolevoTarget::Simple => holevo(a, &ensembles::simple_conditionals()),
            HolevoTarget::ModifiedLm05Prime => modified_lm05_prime_holevo(a),
            HolevoTarget::Lm05Prime => lm05_prime_holevo(a),
            HolevoTarget::SixState => six_state_holevo(a),
        }
    }

    /// Value the symmetric attack is expected to reach.
    pub fn symmetric_reference(self, qf: f64) -> Result<f64> {
        match self {
            HolevoTarget::SixState => six_state_closed_form(qf),
            _ => Ok(h(qf)),
        }
    }

    /// Whether `h(qf)` is claimed to bound this quantity from above.
    pub fn has_upper_bound(self) -> bool {
        !matches!(self, HolevoTarget::SixState)
    }
}

/// Entropy of the simple-protocol mixture along the interference family.
/// Fails if the entropy increases along the (ascending) grid.
pub fn sweep_interference(qf: f64, x_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let engine = GramEngine::default();
    let mixture = ensembles::simple_mixture();
    let mut out = Vec::with_capacity(x_grid.len());
    for &x in x_grid {
        let s = engine.entropy_of(&interference_attack(qf, x)?, &mixture)?;
        if let Some(&(px, ps)) = out.last() {
            if x >= px && s > ps + 1e-12 {
                return Err(Error::Inconsistent(format!(
                    "entropy rises from {ps} at x = {px} to {s} at x = {x}"
                )));
            }
        }
        out.push((x, s));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub target: HolevoTarget,
    pub qf: f64,
    pub n_candidates: usize,
    pub acceptance_rate: f64,
    /// Largest value over all accepted random candidates, before refinement.
    pub max_sampled_chi: f64,
    pub best_chi: f64,
    /// `h(qf)`: an upper bound for every target except the six-state one,
    /// where it is only the comparison value from above.
    pub bound: f64,
    pub gap: f64,
    pub symmetric_chi: f64,
    pub symmetric_is_best: bool,
    pub best_attack: serde_json::Value,
}

impl SearchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("search report serializes")
    }
}

struct Scored {
    params: Option<[f64; FACTOR_PARAMS]>,
    attack: AncillaOverlaps,
    chi: f64,
}

fn score(
    param: &AttackParameterization,
    target: HolevoTarget,
    params: &[f64; FACTOR_PARAMS],
) -> Option<Scored> {
    let attack = param.candidate(params)?;
    if !param.accepts(&attack) {
        return None;
    }
    let chi = target.evaluate(&attack).ok()?;
    Some(Scored {
        params: Some(*params),
        attack,
        chi,
    })
}

fn refine(param: &AttackParameterization, target: HolevoTarget, start: Scored) -> Scored {
    let Some(mut x) = start.params else {
        return start;
    };
    let mut best = start;
    let mut step = 0.1;
    while step > 1e-6 {
        let mut improved = false;
        for i in 0..FACTOR_PARAMS {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[i] += dir * step;
                if let Some(s) = score(param, target, &y) {
                    if s.chi > best.chi {
                        x = y;
                        best = s;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Maximizes `target` over `n_candidates` random depolarizing attacks at
/// forward noise `qf`, seeded with the symmetric attack, then refines the
/// best few by coordinate descent on the factor parameters.
pub fn search_max_holevo(
    target: HolevoTarget,
    qf: f64,
    n_candidates: usize,
    seed: u64,
) -> Result<SearchReport> {
    let param = AttackParameterization::isotropic(qf)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<[f64; FACTOR_PARAMS]> =
        (0..n_candidates).map(|_| random_params(&mut rng)).collect();
    let scored: Vec<Option<Scored>> = draws.par_iter().map(|p| score(&param, target, p)).collect();
    let accepted = scored.iter().filter(|s| s.is_some()).count();

    let symmetric = symmetric_attack(qf)?;
    let symmetric_chi = target.evaluate(&symmetric)?;

    let mut pool: Vec<Scored> = scored.into_iter().flatten().collect();
    let max_sampled_chi = pool.iter().map(|s| s.chi).fold(f64::NEG_INFINITY, f64::max);
    // stable sort keeps draw order among ties, so the result is reproducible
    pool.sort_by(|a, b| b.chi.total_cmp(&a.chi));
    pool.truncate(REFINED_CANDIDATES);
    let refined: Vec<Scored> = pool
        .into_par_iter()
        .map(|s| refine(&param, target, s))
        .collect();

    let mut best = Scored {
        params: None,
        attack: symmetric,
        chi: symmetric_chi,
    };
    for s in refined {
        if s.chi > best.chi {
            best = s;
        }
    }
    if accepted == 0 && n_candidates > 0 {
        return Err(Error::NoFeasibleCandidate);
    }

    let bound = h(qf);
    Ok(SearchReport {
        target,
        qf,
        n_candidates,
        acceptance_rate: if n_candidates == 0 {
            0.0
        } else {
            accepted as f64 / n_candidates as f64
        },
        max_sampled_chi,
        best_chi: best.chi,
        bound,
        gap: bound - best.chi,
        symmetric_chi,
        symmetric_is_best: best.chi - symmetric_chi <= 1e-6,
        best_attack: best.attack.to_json_value(),
    })
}
