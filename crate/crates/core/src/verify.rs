//! Self-checks of the analytic results against the numerical machinery.
//!
//! Every check goes through a [`GramEngine`] built from a caller-supplied
//! Pauli table, so a corrupted table shows up as failing checks.

use std::fmt;

use serde::Serialize;

use crate::attack::{
    interference_attack, interference_max_x, phase_covariant_attack, symmetric_attack,
    BlochDirection, PureQubit,
};
use crate::bounds::six_state_closed_form;
use crate::error::Result;
use crate::gram::{ensembles, GramEngine};
use crate::math::{h, Spectrum};
use crate::pauli::{Pauli, PauliTable};

pub const DEFAULT_QF_SWEEP: [f64; 4] = [0.05, 0.1, 0.15, 0.25];

const SPECTRUM_TOL: f64 = 1e-10;
const ENTROPY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub qf: Option<f64>,
    pub status: CheckStatus,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skipped => "SKIP",
        };
        let qf = self.qf.map(|q| format!("qf={q}")).unwrap_or_default();
        write!(f, "{status:<5}{:<52}{qf:<10}{}", self.name, self.detail)
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.status != CheckStatus::Fail)
}

/// Which checks need which forward-noise range.
fn out_of_domain(name: &'static str, qf: f64, hi: f64) -> Option<CheckResult> {
    (qf > hi).then(|| CheckResult {
        name,
        qf: Some(qf),
        status: CheckStatus::Skipped,
        detail: format!(
            "outside domain [0, {}]",
            if hi == 0.5 { "1/2" } else { "2/3" }
        ),
    })
}

/// Outcome of the numerical part of a check.
struct Measured {
    ok: bool,
    detail: String,
}

fn within(deviation: f64, tol: f64) -> Measured {
    Measured {
        ok: deviation <= tol,
        detail: format!("max deviation {deviation:.2e} (tol {tol:.0e})"),
    }
}

fn judged(name: &'static str, qf: Option<f64>, outcome: Result<Measured>) -> CheckResult {
    let (status, detail) = match outcome {
        Ok(m) if m.ok => (CheckStatus::Pass, m.detail),
        Ok(m) => (CheckStatus::Fail, m.detail),
        Err(e) => (CheckStatus::Fail, e.to_string()),
    };
    CheckResult {
        name,
        qf,
        status,
        detail,
    }
}

pub struct Verifier {
    engine: GramEngine,
}

impl Default for Verifier {
    fn default() -> Self {
        Self::new(PauliTable::standard())
    }
}

impl Verifier {
    pub fn new(table: PauliTable) -> Self {
        Self {
            engine: GramEngine::new(table),
        }
    }

    /// Runs every check at each forward-noise value, then the grid checks.
    pub fn run(&self, qf_values: &[f64]) -> Vec<CheckResult> {
        let mut out = Vec::new();
        for &qf in qf_values {
            out.push(self.interference_spectrum(qf));
            out.push(self.simple_information(qf));
            out.push(self.symmetric_isotropy(qf));
            out.push(self.six_state_block_spectra(qf));
            out.push(self.six_state_entropy_identities(qf));
            out.push(self.six_state_closed_form(qf));
            out.push(self.equatorial_attack(qf));
            out.push(self.interference_monotonicity(qf));
        }
        out.push(self.six_state_ordering());
        out
    }

    pub fn interference_spectrum(&self, qf: f64) -> CheckResult {
        const NAME: &str = "interference-family spectrum closed form";
        if let Some(skip) = out_of_domain(NAME, qf, 0.5) {
            return skip;
        }
        let outcome = (|| {
            let x_max = interference_max_x(qf)?;
            let mixture = ensembles::simple_mixture();
            let mut worst = 0.0f64;
            for k in 0..5 {
                let x = x_max * k as f64 / 4.0;
                let got = self
                    .engine
                    .spectrum_of(&interference_attack(qf, x)?, &mixture)?;
                let r = ((1.0 - 2.0 * qf).powi(2) + 4.0 * x * x).sqrt();
                let (lp, lm) = (0.25 * (1.0 + r), 0.25 * (1.0 - r));
                worst = worst.max(got.max_abs_diff(&Spectrum::new(vec![lp, lp, lm, lm])));
            }
            Ok(within(worst, SPECTRUM_TOL))
        })();
        judged(NAME, Some(qf), outcome)
    }

    pub fn simple_information(&self, qf: f64) -> CheckResult {
        const NAME: &str = "simple-protocol information equals h(qf)";
        if let Some(skip) = out_of_domain(NAME, qf, 0.5) {
            return skip;
        }
        let outcome = symmetric_attack(qf)
            .and_then(|a| self.engine.holevo(&a, &ensembles::simple_conditionals()))
            .map(|chi| within((chi - h(qf)).abs(), ENTROPY_TOL));
        judged(NAME, Some(qf), outcome)
    }

    pub fn symmetric_isotropy(&self, qf: f64) -> CheckResult {
        const NAME: &str = "symmetric attack disturbance is isotropic";
        if let Some(skip) = out_of_domain(NAME, qf, 2.0 / 3.0) {
            return skip;
        }
        let outcome = symmetric_attack(qf).map(|a| {
            let (lo, hi) = a.disturbance_spread(1000);
            within((hi - lo).max((lo - qf).abs()), SPECTRUM_TOL)
        });
        judged(NAME, Some(qf), outcome)
    }

    pub fn six_state_block_spectra(&self, qf: f64) -> CheckResult {
        const NAME: &str = "six-state block and axis spectra";
        if let Some(skip) = out_of_domain(NAME, qf, 2.0 / 3.0) {
            return skip;
        }
        let outcome = (|| {
            let a = symmetric_attack(qf)?;
            let block = Spectrum::new(vec![1.0 - 1.5 * qf, 0.5 * qf, 0.5 * qf, 0.5 * qf]);
            let axis = Spectrum::new(vec![0.5 * qf, 0.5 * qf, 0.5 * (1.0 - qf), 0.5 * (1.0 - qf)]);
            let mut worst = 0.0f64;
            for e in [ensembles::six_state_block1(), ensembles::six_state_block2()] {
                worst = worst.max(self.engine.spectrum_of(&a, &e)?.max_abs_diff(&block));
            }
            for w in [Pauli::X, Pauli::Y] {
                let e = ensembles::axis_conditional(w);
                worst = worst.max(self.engine.spectrum_of(&a, &e)?.max_abs_diff(&axis));
            }
            Ok(within(worst, SPECTRUM_TOL))
        })();
        judged(NAME, Some(qf), outcome)
    }

    pub fn six_state_entropy_identities(&self, qf: f64) -> CheckResult {
        const NAME: &str = "six-state mixture and conditional entropies";
        if let Some(skip) = out_of_domain(NAME, qf, 2.0 / 3.0) {
            return skip;
        }
        let outcome = (|| {
            let a = symmetric_attack(qf)?;
            let xlogx = |v: f64| if v > 0.0 { v * v.log2() } else { 0.0 };
            let mixture_want = 2.0 - 1.5 * xlogx(qf) - 0.5 * xlogx(2.0 - 3.0 * qf);
            let mixture = self.engine.entropy_of(&a, &ensembles::full_mixture())?;
            let mut worst = (mixture - mixture_want).abs();
            for w in [Pauli::X, Pauli::Y, Pauli::Z] {
                let s = self
                    .engine
                    .entropy_of(&a, &ensembles::axis_conditional(w))?;
                worst = worst.max((s - (1.0 + h(qf))).abs());
            }
            Ok(within(worst, ENTROPY_TOL))
        })();
        judged(NAME, Some(qf), outcome)
    }

    pub fn six_state_closed_form(&self, qf: f64) -> CheckResult {
        const NAME: &str = "six-state closed form matches Gram path";
        if let Some(skip) = out_of_domain(NAME, qf, 2.0 / 3.0) {
            return skip;
        }
        let outcome = (|| {
            let a = symmetric_attack(qf)?;
            let mut total = 0.0;
            for w in [Pauli::X, Pauli::Y, Pauli::Z] {
                total += self
                    .engine
                    .holevo(&a, &ensembles::deterministic_conditionals(w))?;
            }
            Ok(within(
                (total / 3.0 - six_state_closed_form(qf)?).abs(),
                ENTROPY_TOL,
            ))
        })();
        judged(NAME, Some(qf), outcome)
    }

    pub fn equatorial_attack(&self, qf: f64) -> CheckResult {
        const NAME: &str = "phase-covariant attack: qf on equator, info h(2qf)";
        if let Some(skip) = out_of_domain(NAME, qf, 0.5) {
            return skip;
        }
        let outcome = (|| {
            let a = phase_covariant_attack(2.0 * qf)?;
            let mut worst = 0.0f64;
            for k in 0..16 {
                let phi = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
                let BlochDirection::Angles { theta, phi } = BlochDirection::equatorial(phi) else {
                    unreachable!("equatorial directions carry angles")
                };
                worst = worst.max((a.disturbance(PureQubit::new(theta, phi)) - qf).abs());
            }
            let chi = self.engine.holevo(&a, &ensembles::simple_conditionals())?;
            let info = (chi - h(2.0 * qf)).abs();
            Ok(Measured {
                ok: worst <= SPECTRUM_TOL && info <= ENTROPY_TOL,
                detail: format!(
                    "disturbance deviation {worst:.2e} (tol {SPECTRUM_TOL:.0e}), \
                     information deviation {info:.2e} (tol {ENTROPY_TOL:.0e})"
                ),
            })
        })();
        judged(NAME, Some(qf), outcome)
    }

    pub fn interference_monotonicity(&self, qf: f64) -> CheckResult {
        const NAME: &str = "interference-family entropy decreasing in x";
        if let Some(skip) = out_of_domain(NAME, qf, 0.5) {
            return skip;
        }
        let outcome = (|| {
            let x_max = interference_max_x(qf)?;
            let mixture = ensembles::simple_mixture();
            let mut prev = f64::INFINITY;
            let mut largest_step = f64::NEG_INFINITY;
            for k in 0..20 {
                let x = x_max * k as f64 / 19.0;
                let s = self
                    .engine
                    .entropy_of(&interference_attack(qf, x)?, &mixture)?;
                largest_step = largest_step.max(s - prev);
                prev = s;
            }
            Ok(Measured {
                ok: largest_step < 0.0,
                detail: format!("largest step {largest_step:.2e} over 20 points"),
            })
        })();
        judged(NAME, Some(qf), outcome)
    }

    pub fn six_state_ordering(&self) -> CheckResult {
        const NAME: &str = "six-state lower bound below h(qf) on [0, 1/2]";
        let outcome = (|| {
            let mut worst = f64::NEG_INFINITY;
            for k in 0..100 {
                let qf = 0.5 * k as f64 / 99.0;
                worst = worst.max(six_state_closed_form(qf)? - h(qf));
            }
            Ok(Measured {
                ok: worst <= 0.0,
                detail: format!("largest excess {worst:.2e} over 100 points"),
            })
        })();
        judged(NAME, None, outcome)
    }
}
