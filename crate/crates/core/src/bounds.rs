//! Closed-form bounds on Eve's information, secret fractions and the
//! comparison curves built from them.

use serde::Serialize;

use crate::attack::symmetric_attack;
use crate::error::{check_probability, Error, Result};
use crate::gram::six_state_holevo;
use crate::math::{binary_entropy, h};
use crate::protocol::{NoiseModel, ProtocolKind, ProtocolSpec};

/// Which side of the true value a reported `I_E` lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Exact,
    Upper,
    Lower,
}

impl BoundKind {
    /// Exact values and upper bounds on `I_E` give conservative key rates.
    pub fn is_safe_for_key_rate(self) -> bool {
        !matches!(self, BoundKind::Lower)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EveInfo {
    pub value: f64,
    pub kind: BoundKind,
}

/// Tolerance between the closed-form and Gram-path six-state values.
pub const SIX_STATE_AGREEMENT_TOL: f64 = 1e-9;

fn domain(what: &'static str, value: f64, lo: f64, hi: f64, label: &'static str) -> Result<()> {
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            domain: label,
        })
    }
}

/// `Q + (1 - Q) h((2 - 3Q) / (2 (1 - Q)))`, defined on `[0, 2/3]`.
pub fn six_state_closed_form(qf: f64) -> Result<f64> {
    domain("six-state forward noise", qf, 0.0, 2.0 / 3.0, "[0, 2/3]")?;
    if qf == 0.0 {
        return Ok(0.0);
    }
    let arg = ((2.0 - 3.0 * qf) / (2.0 * (1.0 - qf))).clamp(0.0, 1.0);
    Ok(qf + (1.0 - qf) * h(arg))
}

/// Eve's information for the symmetric attack on the six-state protocol:
/// the closed form, cross-checked against the Gram-spectrum evaluation.
pub fn six_state_attack_info(qf: f64) -> Result<f64> {
    let closed = six_state_closed_form(qf)?;
    let numeric = six_state_holevo(&symmetric_attack(qf)?)?;
    if (closed - numeric).abs() > SIX_STATE_AGREEMENT_TOL {
        return Err(Error::Inconsistent(format!(
            "six-state information at qf = {qf}: closed form {closed}, Gram path {numeric}"
        )));
    }
    Ok(closed)
}

/// Closed-form information available to Eve for `p` at forward noise `qf`.
pub fn eve_info_bound(p: &ProtocolSpec, qf: f64) -> Result<EveInfo> {
    eve_info_for_kind(p.kind, qf)
}

pub fn eve_info_for_kind(kind: ProtocolKind, qf: f64) -> Result<EveInfo> {
    check_probability("forward noise", qf)?;
    let (value, kind) = match kind {
        ProtocolKind::Simple => {
            domain("forward noise", qf, 0.0, 0.5, "[0, 1/2]")?;
            (binary_entropy(qf)?, BoundKind::Exact)
        }
        ProtocolKind::Lm05Prime => {
            domain("forward noise", qf, 0.0, 0.5, "[0, 1/2]")?;
            (binary_entropy(qf)?, BoundKind::Upper)
        }
        // the extra announcement makes the h(Q_f) bound attained by the symmetric attack
        ProtocolKind::Lm05PrimeModified => {
            domain("forward noise", qf, 0.0, 0.5, "[0, 1/2]")?;
            (binary_entropy(qf)?, BoundKind::Exact)
        }
        ProtocolKind::TwqkdSixState => (six_state_closed_form(qf)?, BoundKind::Lower),
        ProtocolKind::Lm05Generalized => {
            domain("forward noise", qf, 0.0, 0.5, "[0, 1/2]")?;
            (binary_entropy(2.0 * qf)?, BoundKind::Exact)
        }
    };
    Ok(EveInfo { value, kind })
}

/// Asymptotic secret fraction `1 - h(q) - ie`; not clipped at zero.
pub fn secret_fraction(q: f64, ie: f64) -> Result<f64> {
    Ok(1.0 - binary_entropy(q)? - ie)
}

/// One row of the comparison curves. `None` marks a value outside its
/// formula's domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCurvePoint {
    pub qf: f64,
    pub q: f64,
    pub i_ab: Option<f64>,
    pub ie_simple: Option<f64>,
    pub ie_lm05prime_upper: Option<f64>,
    pub ie_sixstate_lower: Option<f64>,
    pub ie_lm05_generalized: Option<f64>,
    pub r_simple: Option<f64>,
    pub r_lm05prime: Option<f64>,
    pub r_sixstate: Option<f64>,
    pub r_lm05_generalized: Option<f64>,
}

/// The curves plotted against forward noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Curve {
    Simple,
    Lm05PrimeUpper,
    SixStateLower,
    Lm05Generalized,
}

impl Curve {
    pub const ALL: [Curve; 4] = [
        Curve::Simple,
        Curve::Lm05PrimeUpper,
        Curve::SixStateLower,
        Curve::Lm05Generalized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Curve::Simple => "r_simple",
            Curve::Lm05PrimeUpper => "r_lm05p",
            Curve::SixStateLower => "r_six",
            Curve::Lm05Generalized => "r_lm05gen",
        }
    }

    fn protocol(self) -> ProtocolKind {
        match self {
            Curve::Simple => ProtocolKind::Simple,
            Curve::Lm05PrimeUpper => ProtocolKind::Lm05Prime,
            Curve::SixStateLower => ProtocolKind::TwqkdSixState,
            Curve::Lm05Generalized => ProtocolKind::Lm05Generalized,
        }
    }

    pub fn eve_info(self, qf: f64) -> Result<f64> {
        Ok(eve_info_for_kind(self.protocol(), qf)?.value)
    }

    /// Secret fraction of this curve at forward noise `qf`.
    pub fn secret_fraction(self, qf: f64, noise: &NoiseModel) -> Result<f64> {
        secret_fraction(noise.overall_noise(qf), self.eve_info(qf)?)
    }
}

pub fn bound_point(qf: f64, noise: &NoiseModel) -> BoundCurvePoint {
    let q = noise.overall_noise(qf);
    let i_ab = binary_entropy(q).ok().map(|hq| 1.0 - hq);
    let ie = |c: Curve| c.eve_info(qf).ok();
    let r = |ie: Option<f64>| i_ab.zip(ie).map(|(i, e)| i - e);
    let ie_simple = ie(Curve::Simple);
    let ie_lm05prime_upper = ie(Curve::Lm05PrimeUpper);
    let ie_sixstate_lower = ie(Curve::SixStateLower);
    let ie_lm05_generalized = ie(Curve::Lm05Generalized);
    BoundCurvePoint {
        qf,
        q,
        i_ab,
        ie_simple,
        ie_lm05prime_upper,
        ie_sixstate_lower,
        ie_lm05_generalized,
        r_simple: r(ie_simple),
        r_lm05prime: r(ie_lm05prime_upper),
        r_sixstate: r(ie_sixstate_lower),
        r_lm05_generalized: r(ie_lm05_generalized),
    }
}

/// Evaluates every bound on a non-decreasing grid of forward-noise values.
pub fn bound_curve(qf_grid: &[f64], noise: &NoiseModel) -> Result<Vec<BoundCurvePoint>> {
    if qf_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Config(
            "forward-noise grid must be non-decreasing".into(),
        ));
    }
    Ok(qf_grid.iter().map(|&qf| bound_point(qf, noise)).collect())
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || hi < lo || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config(format!(
            "invalid grid: {steps} steps from {lo} to {hi}"
        )));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i == steps - 1 {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect())
}

pub const CSV_HEADER: &str =
    "qf,i_ab,ie_simple,ie_lm05p_upper,ie_six_lower,ie_lm05gen,r_simple,r_lm05p,r_six,r_lm05gen";

/// Formats like C's `%.12g`: twelve significant digits, trailing zeros dropped.
pub fn format_sig12(x: f64) -> String {
    const SIG: usize = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIG - 1, x);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIG as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (SIG as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(format_sig12).unwrap_or_default()
}

pub fn to_csv(points: &[BoundCurvePoint]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in points {
        let cells = [
            format_sig12(p.qf),
            cell(p.i_ab),
            cell(p.ie_simple),
            cell(p.ie_lm05prime_upper),
            cell(p.ie_sixstate_lower),
            cell(p.ie_lm05_generalized),
            cell(p.r_simple),
            cell(p.r_lm05prime),
            cell(p.r_sixstate),
            cell(p.r_lm05_generalized),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Grid used to bracket the first sign change before bisecting.
const BRACKET_STEPS: usize = 1000;

/// Smallest forward noise in `[0, 1/2]` at which `curve`'s secret fraction
/// drops to zero, or `None` if it stays positive there. The fraction is
/// bracketed on a fine grid first since some curves come back up to zero at
/// the end of the range.
pub fn zero_crossing(curve: Curve, noise: &NoiseModel) -> Option<f64> {
    let f = |qf: f64| curve.secret_fraction(qf, noise).ok();
    if f(0.0)? <= 0.0 {
        return None;
    }
    let step = 0.5 / BRACKET_STEPS as f64;
    let k = (1..=BRACKET_STEPS).find(|&k| f(step * k as f64).is_some_and(|v| v <= 0.0))?;
    let (mut lo, mut hi) = (step * (k - 1) as f64, step * k as f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Zero crossings of every curve, in [`Curve::ALL`] order.
pub fn thresholds(noise: &NoiseModel) -> Vec<(Curve, Option<f64>)> {
    Curve::ALL
        .iter()
        .map(|&c| (c, zero_crossing(c, noise)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::ProtocolSpec;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn eve_info_examples() {
        let e = eve_info_bound(&ProtocolSpec::simple(), 0.0).unwrap();
        assert_eq!((e.value, e.kind), (0.0, BoundKind::Exact));

        let e = eve_info_bound(&ProtocolSpec::twqkd_six_state(), 1.0 / 3.0).unwrap();
        let want = 1.0 / 3.0 + 2.0 / 3.0 * binary_entropy(0.75).unwrap();
        close(e.value, want, 1e-14);
        close(e.value, 0.874_185_416_306_088_6, 1e-14);
        assert_eq!(e.kind, BoundKind::Lower);

        let e = eve_info_bound(&ProtocolSpec::lm05_generalized(16), 0.1).unwrap();
        close(e.value, binary_entropy(0.2).unwrap(), 0.0);
        assert_eq!(e.kind, BoundKind::Exact);

        assert_eq!(
            eve_info_bound(&ProtocolSpec::lm05_prime(), 0.1)
                .unwrap()
                .kind,
            BoundKind::Upper
        );
    }

    #[test]
    fn eve_info_domains() {
        assert!(eve_info_bound(&ProtocolSpec::simple(), 0.6).is_err());
        assert!(eve_info_bound(&ProtocolSpec::lm05_generalized(16), 0.6).is_err());
        assert!(eve_info_bound(&ProtocolSpec::twqkd_six_state(), 0.6).is_ok());
        assert!(eve_info_bound(&ProtocolSpec::twqkd_six_state(), 0.7).is_err());
    }

    #[test]
    fn six_state_limits() {
        assert_eq!(six_state_attack_info(0.0).unwrap(), 0.0);
        close(six_state_attack_info(2.0 / 3.0).unwrap(), 2.0 / 3.0, 1e-15);
        close(
            six_state_attack_info(0.1).unwrap(),
            0.378_589_086_235_292_6,
            1e-14,
        );
        assert!(six_state_attack_info(0.7).is_err());
    }

    #[test]
    fn secret_fraction_examples() {
        assert_eq!(secret_fraction(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(secret_fraction(0.5, 0.3).unwrap(), -0.3);
        assert!(secret_fraction(1.2, 0.0).is_err());
    }

    #[test]
    fn curve_at_zero_noise() {
        let p = bound_point(0.0, &NoiseModel::EqualForward);
        assert_eq!(p.i_ab, Some(1.0));
        for v in [
            p.ie_simple,
            p.ie_lm05prime_upper,
            p.ie_sixstate_lower,
            p.ie_lm05_generalized,
        ] {
            assert_eq!(v, Some(0.0));
        }
    }

    #[test]
    fn out_of_domain_cells_are_empty() {
        let pts = bound_curve(&[0.6], &NoiseModel::EqualForward).unwrap();
        let csv = to_csv(&pts);
        let row = csv.lines().nth(1).unwrap();
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 10);
        assert_eq!(cells[2], "");
        assert_ne!(cells[4], "");
        assert_eq!(cells[5], "");
    }

    #[test]
    fn rejects_decreasing_grid() {
        assert!(bound_curve(&[0.2, 0.1], &NoiseModel::EqualForward).is_err());
    }

    #[test]
    fn sig12_formatting() {
        assert_eq!(format_sig12(0.0), "0");
        assert_eq!(format_sig12(0.05), "0.05");
        assert_eq!(format_sig12(0.1 + 0.2), "0.3");
        assert_eq!(format_sig12(1.0), "1");
        assert_eq!(format_sig12(-0.123456789012345), "-0.123456789012");
        assert_eq!(format_sig12(0.468995593589281), "0.468995593589");
        assert_eq!(format_sig12(1.5e-7), "1.5e-07");
        assert_eq!(format_sig12(9.9999999999999e-5), "0.0001");
        assert_eq!(format_sig12(123456789012345.0), "1.23456789012e+14");
    }

    #[test]
    fn thresholds_match_golden_values() {
        let t = thresholds(&NoiseModel::EqualForward);
        let get = |c| t.iter().find(|(k, _)| *k == c).unwrap().1.unwrap();
        // h(q) = 1/2 and h(q) + h(2q) = 1, solved to 40 digits offline
        close(get(Curve::Lm05PrimeUpper), 0.110_027_864_438_359_55, 1e-12);
        close(get(Curve::Simple), 0.110_027_864_438_359_55, 1e-12);
        close(get(Curve::Lm05Generalized), 0.075_679_456_010_992_42, 1e-12);
        close(get(Curve::SixStateLower), 0.126_193_083_276_821_2, 1e-12);
    }

    #[test]
    fn grid_arithmetic() {
        let g = linear_grid(0.0, 0.2, 21).unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[20], 0.2);
        assert_eq!(format_sig12(g[3]), "0.03");
        assert!(linear_grid(0.2, 0.1, 3).is_err());
    }
}
