//! Eve's forward-channel attack, described by the overlaps of her four
//! post-interaction ancilla states.
//!
//! An interaction `U|i>|e> = |0>|e_i0> + |1>|e_i1>` is fully characterised,
//! as far as any entropy or disturbance is concerned, by the 4x4 matrix
//! `g[(i,j),(k,l)] = <e_ij|e_kl>`. Rows and columns are indexed
//! `00, 01, 10, 11` in that order. A matrix is a physical attack iff it is
//! positive semidefinite and satisfies the unitarity conditions
//!
//! ```text
//! g[i0,i0] + g[i1,i1] = 1,      g[00,10] + g[01,11] = 0.
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::math::{c, hermitian_eigen, hermitian_eigenvalues, CMatrix, HERMITIAN_TOL, PSD_TOL};
use crate::pauli::Pauli;

pub const E00: usize = 0;
pub const E01: usize = 1;
pub const E10: usize = 2;
pub const E11: usize = 3;

/// Tolerance on the unitarity (normalization and orthogonality) residuals.
pub const UNITARITY_TOL: f64 = 1e-10;

/// A measurement/preparation axis on the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlochDirection {
    X,
    Y,
    Z,
    /// Axis whose `|0>` eigenstate is `PureQubit { theta, phi }`.
    Angles {
        theta: f64,
        phi: f64,
    },
}

impl BlochDirection {
    /// Equatorial direction at azimuth `phi`, i.e. `(|0> + e^{i phi}|1>)/sqrt 2`.
    pub fn equatorial(phi: f64) -> Self {
        BlochDirection::Angles {
            theta: PI / 2.0,
            phi,
        }
    }

    /// Rows are the `|0>_k` and `|1>_k` eigenstates expanded in the z basis.
    pub fn eigenbasis(&self) -> [[Complex64; 2]; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match *self {
            BlochDirection::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
            BlochDirection::X => [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]],
            BlochDirection::Y => [[c(r, 0.0), c(0.0, r)], [c(r, 0.0), c(0.0, -r)]],
            BlochDirection::Angles { theta, phi } => {
                let q = PureQubit::new(theta, phi);
                [q.amplitudes(), q.orthogonal().amplitudes()]
            }
        }
    }

    /// Unit Bloch vector of the `|0>_k` eigenstate.
    pub fn unit_vector(&self) -> [f64; 3] {
        match *self {
            BlochDirection::X => [1.0, 0.0, 0.0],
            BlochDirection::Y => [0.0, 1.0, 0.0],
            BlochDirection::Z => [0.0, 0.0, 1.0],
            BlochDirection::Angles { theta, phi } => PureQubit::new(theta, phi).bloch_vector(),
        }
    }

    /// The Pauli operator this axis belongs to, when it is a coordinate axis.
    pub fn pauli(&self) -> Option<Pauli> {
        match self {
            BlochDirection::X => Some(Pauli::X),
            BlochDirection::Y => Some(Pauli::Y),
            BlochDirection::Z => Some(Pauli::Z),
            BlochDirection::Angles { .. } => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            BlochDirection::X => "x".into(),
            BlochDirection::Y => "y".into(),
            BlochDirection::Z => "z".into(),
            BlochDirection::Angles { theta, phi } => format!("theta={theta:.6},phi={phi:.6}"),
        }
    }
}

/// `|Omega> = sin(theta/2)|0> + e^{i phi} cos(theta/2)|1>`.
///
/// Note the sine sits on `|0>`: `theta = pi` is `|0>` and `theta = 0` is `|1>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureQubit {
    pub theta: f64,
    pub phi: f64,
}

impl PureQubit {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        let (s, co) = (self.theta / 2.0).sin_cos();
        [c(s, 0.0), Complex64::from_polar(co, self.phi)]
    }

    /// `|Omega_perp> = cos(theta/2)|0> - e^{i phi} sin(theta/2)|1>`.
    pub fn orthogonal(&self) -> PureQubit {
        // cos(t/2) = sin((pi - t)/2) and -e^{i phi} sin(t/2) = e^{i(phi+pi)} cos((pi - t)/2)
        PureQubit::new(PI - self.theta, self.phi + PI)
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        [st * self.phi.cos(), st * self.phi.sin(), -ct]
    }
}

/// Constraint residuals of a candidate overlap matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub hermitian_residual: f64,
    pub min_eigenvalue: f64,
    pub normalization_residuals: [f64; 2],
    pub orthogonality_residual: f64,
    pub hermitian_ok: bool,
    pub psd_ok: bool,
    pub normalization_ok: bool,
    pub orthogonality_ok: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.hermitian_ok && self.psd_ok && self.normalization_ok && self.orthogonality_ok
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.hermitian_ok {
            out.push("hermiticity");
        }
        if !self.psd_ok {
            out.push("positive semidefiniteness");
        }
        if !self.normalization_ok {
            out.push("normalization");
        }
        if !self.orthogonality_ok {
            out.push("orthogonality");
        }
        out
    }
}

/// Affine Bloch-sphere action `r -> M r + t` of the qubit channel an attack induces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochChannel {
    pub m: [[f64; 3]; 3],
    pub t: [f64; 3],
}

/// Gram matrix of Eve's ancilla states, expressed in the eigenbasis of
/// `reference_basis`.
#[derive(Clone, Debug, PartialEq)]
pub struct AncillaOverlaps {
    reference_basis: BlochDirection,
    g: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct OverlapsJson {
    basis: BlochDirection,
    entries: Vec<[f64; 2]>,
}

impl AncillaOverlaps {
    /// Wraps a matrix without checking it; see [`AncillaOverlaps::validate`].
    pub fn from_matrix(reference_basis: BlochDirection, g: CMatrix) -> Result<Self> {
        if g.dim() != 4 {
            return Err(Error::Config(format!(
                "ancilla overlap matrix must be 4x4, got {}x{}",
                g.dim(),
                g.dim()
            )));
        }
        Ok(Self { reference_basis, g })
    }

    pub fn reference_basis(&self) -> BlochDirection {
        self.reference_basis
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.g
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.g[(a, b)]
    }

    pub fn validate(&self) -> ValidationReport {
        let g = &self.g;
        let hermitian_residual = g.hermitian_residual();
        let hermitian_ok = hermitian_residual <= HERMITIAN_TOL;
        let min_eigenvalue = if hermitian_ok {
            hermitian_eigenvalues(g)
                .map(|s| *s.eigenvalues().last().unwrap())
                .unwrap_or(f64::NEG_INFINITY)
        } else {
            f64::NEG_INFINITY
        };
        let normalization_residuals = [
            (g[(E00, E00)] + g[(E01, E01)] - 1.0).norm(),
            (g[(E10, E10)] + g[(E11, E11)] - 1.0).norm(),
        ];
        let orthogonality_residual = (g[(E00, E10)] + g[(E01, E11)]).norm();
        ValidationReport {
            hermitian_residual,
            min_eigenvalue,
            normalization_residuals,
            orthogonality_residual,
            hermitian_ok,
            psd_ok: min_eigenvalue >= -PSD_TOL,
            normalization_ok: normalization_residuals.iter().all(|&r| r <= UNITARITY_TOL),
            orthogonality_ok: orthogonality_residual <= UNITARITY_TOL,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().passed()
    }

    fn require_valid(self) -> Result<Self> {
        let report = self.validate();
        if report.passed() {
            Ok(self)
        } else {
            Err(Error::InfeasibleParameters(report.failures().join(", ")))
        }
    }

    /// Expresses the same attack in the eigenbasis of `k`.
    pub fn transform_basis(&self, k: BlochDirection) -> AncillaOverlaps {
        let gz = if self.reference_basis == BlochDirection::Z {
            self.g.clone()
        } else {
            // inverse congruence: g_z = T^T g_k conj(T)
            let t = change_of_basis(self.reference_basis);
            &(&t.transpose() * &self.g) * &t.conj()
        };
        let g = if k == BlochDirection::Z {
            gz
        } else {
            let t = change_of_basis(k);
            &(&t.conj() * &gz) * &t.transpose()
        };
        AncillaOverlaps {
            reference_basis: k,
            g,
        }
    }

    fn in_z(&self) -> AncillaOverlaps {
        if self.reference_basis == BlochDirection::Z {
            self.clone()
        } else {
            self.transform_basis(BlochDirection::Z)
        }
    }

    /// Probability that the attack flips `s` into its orthogonal state.
    pub fn disturbance(&self, s: PureQubit) -> f64 {
        let gz = self.in_z();
        // |e(Omega)> = sum_{m,j} a_m conj(a_j) |e_mj>, with a the amplitudes of s
        let a = s.amplitudes();
        let v: [Complex64; 4] = [
            a[0] * a[0].conj(),
            a[0] * a[1].conj(),
            a[1] * a[0].conj(),
            a[1] * a[1].conj(),
        ];
        let mut kept = c(0.0, 0.0);
        for (r, vr) in v.iter().enumerate() {
            for (s_, vs) in v.iter().enumerate() {
                kept += vr.conj() * vs * gz.g[(r, s_)];
            }
        }
        (1.0 - kept.re).clamp(0.0, 1.0)
    }

    /// `max - min` of the disturbance over `n_samples` quasi-uniform states.
    pub fn disturbance_spread(&self, n_samples: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in sphere_samples(n_samples) {
            let d = self.disturbance(s);
            lo = lo.min(d);
            hi = hi.max(d);
        }
        (lo, hi)
    }

    /// True when the disturbance is the same, within `tol`, on every sampled state.
    pub fn is_depolarizing(&self, n_samples: usize, tol: f64) -> bool {
        let (lo, hi) = self.disturbance_spread(n_samples.max(1));
        hi - lo < tol
    }

    /// Builds explicit ancilla vectors realizing the overlaps.
    pub fn realize_isometry(&self) -> Result<AttackIsometry> {
        let gz = self.in_z();
        let eig = hermitian_eigen(&gz.g)?;
        let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
        // g = V diag(l) V^dagger, so e_b[k] = sqrt(l_k) conj(V[b][k]) has <e_a|e_b> = g[a][b]
        let mut ancillas = [[c(0.0, 0.0); 4]; 4];
        for (b, anc) in ancillas.iter_mut().enumerate() {
            for (k, slot) in anc.iter_mut().enumerate() {
                *slot = eig.vectors[(b, k)].conj() * eig.values[k].max(0.0).sqrt();
            }
        }
        let mut columns = [[c(0.0, 0.0); 8]; 2];
        for (i, col) in columns.iter_mut().enumerate() {
            for j in 0..2 {
                for k in 0..4 {
                    col[j * 4 + k] = ancillas[2 * i + j][k];
                }
            }
        }
        Ok(AttackIsometry { ancillas, columns })
    }

    /// Bloch representation of the induced qubit channel.
    pub fn bloch_channel(&self) -> BlochChannel {
        let gz = self.in_z();
        let paulis = [Pauli::X, Pauli::Y, Pauli::Z];
        let mut m = [[0.0; 3]; 3];
        let mut t = [0.0; 3];
        let out_id = apply_channel(&gz.g, Pauli::I.matrix());
        for (l, pl) in paulis.iter().enumerate() {
            t[l] = 0.5 * trace_product(pl.matrix(), out_id).re;
            for (k, pk) in paulis.iter().enumerate() {
                let out = apply_channel(&gz.g, pk.matrix());
                m[l][k] = 0.5 * trace_product(pl.matrix(), out).re;
            }
        }
        BlochChannel { m, t }
    }

    /// Overlaps (in the z basis) of the attack whose induced channel is `ch`.
    /// The result is physical iff that channel is completely positive.
    pub fn from_bloch_channel(ch: &BlochChannel) -> AncillaOverlaps {
        let pauli_op = |coeffs: [f64; 3], id: f64| {
            let mut out = [[c(0.0, 0.0); 2]; 2];
            let mats = [Pauli::X.matrix(), Pauli::Y.matrix(), Pauli::Z.matrix()];
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = Pauli::I.matrix()[i][j] * id
                        + (0..3).map(|l| mats[l][i][j] * coeffs[l]).sum::<Complex64>();
                }
            }
            out
        };
        let col = |k: usize| [ch.m[0][k], ch.m[1][k], ch.m[2][k]];
        let e_id = pauli_op(ch.t, 1.0);
        let e_x = pauli_op(col(0), 0.0);
        let e_y = pauli_op(col(1), 0.0);
        let e_z = pauli_op(col(2), 0.0);
        let i = c(0.0, 1.0);
        // E(|i><k|) from |0><0| = (I+Z)/2, |1><1| = (I-Z)/2, |0><1| = (X+iY)/2, |1><0| = (X-iY)/2
        let mut images = [[[[c(0.0, 0.0); 2]; 2]; 2]; 2];
        for r in 0..2 {
            for s in 0..2 {
                images[0][0][r][s] = (e_id[r][s] + e_z[r][s]) * 0.5;
                images[1][1][r][s] = (e_id[r][s] - e_z[r][s]) * 0.5;
                images[0][1][r][s] = (e_x[r][s] + i * e_y[r][s]) * 0.5;
                images[1][0][r][s] = (e_x[r][s] - i * e_y[r][s]) * 0.5;
            }
        }
        // g[(k l),(i j)] = E(|i><k|)[j][l]
        let mut g = CMatrix::zeros(4);
        for ii in 0..2 {
            for kk in 0..2 {
                for j in 0..2 {
                    for l in 0..2 {
                        g[(2 * kk + l, 2 * ii + j)] = images[ii][kk][j][l];
                    }
                }
            }
        }
        AncillaOverlaps {
            reference_basis: BlochDirection::Z,
            g,
        }
    }

    pub fn to_json(&self) -> String {
        let entries = self.g.as_slice().iter().map(|z| [z.re, z.im]).collect();
        serde_json::to_string(&OverlapsJson {
            basis: self.reference_basis,
            entries,
        })
        .expect("overlap JSON is always serializable")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.to_json()).expect("round trip through own output")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: OverlapsJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.entries.len() != 16 {
            return Err(Error::Parse(format!(
                "expected 16 complex entries, found {}",
                raw.entries.len()
            )));
        }
        let g = CMatrix::from_fn(4, |i, j| {
            let [re, im] = raw.entries[4 * i + j];
            c(re, im)
        });
        AncillaOverlaps::from_matrix(raw.basis, g)
    }
}

/// `T[(i j'),(m j)] = C[i][m] conj(C[j'][j])` where rows of `C` are the
/// eigenstates of `k` in the z basis; overlaps transform as `conj(T) g T^T`.
fn change_of_basis(k: BlochDirection) -> CMatrix {
    let cb = k.eigenbasis();
    CMatrix::from_fn(4, |a, b| {
        let (i, jp) = (a / 2, a % 2);
        let (m, j) = (b / 2, b % 2);
        cb[i][m] * cb[jp][j].conj()
    })
}

/// `E(P)[j][l] = sum_{i,k} P[i][k] g[(k l),(i j)]`.
fn apply_channel(g: &CMatrix, p: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for (j, row) in out.iter_mut().enumerate() {
        for (l, slot) in row.iter_mut().enumerate() {
            for i in 0..2 {
                for k in 0..2 {
                    *slot += p[i][k] * g[(2 * k + l, 2 * i + j)];
                }
            }
        }
    }
    out
}

fn trace_product(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> Complex64 {
    (0..2)
        .flat_map(|i| (0..2).map(move |k| (i, k)))
        .map(|(i, k)| a[i][k] * b[k][i])
        .sum()
}

/// Deterministic quasi-uniform points on the Bloch sphere (golden-angle spiral).
pub fn sphere_samples(n: usize) -> impl Iterator<Item = PureQubit> {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    (0..n).map(move |i| {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = (2.0 * PI * (i as f64 / golden).fract()).rem_euclid(2.0 * PI);
        PureQubit::new(theta, phi)
    })
}

/// Explicit isometry `|i>|e> -> |0>|e_i0> + |1>|e_i1>` on qubit x C^4.
///
/// Column entries are indexed `qubit * 4 + ancilla`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackIsometry {
    pub ancillas: [[Complex64; 4]; 4],
    pub columns: [[Complex64; 8]; 2],
}

impl AttackIsometry {
    pub fn ancilla_gram(&self) -> CMatrix {
        CMatrix::from_fn(4, |a, b| inner(&self.ancillas[a], &self.ancillas[b]))
    }

    /// Largest deviation of the column Gram matrix from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((inner(&self.columns[a], &self.columns[b]) - want).norm());
            }
        }
        worst
    }

    /// Joint qubit-ancilla state for qubit input `psi` (z-basis amplitudes).
    pub fn apply(&self, psi: [Complex64; 2]) -> [Complex64; 8] {
        let mut out = [c(0.0, 0.0); 8];
        for (r, slot) in out.iter_mut().enumerate() {
            *slot = psi[0] * self.columns[0][r] + psi[1] * self.columns[1][r];
        }
        out
    }

    /// Qubit state after the attack with the ancilla traced out.
    pub fn reduced_output(&self, psi: [Complex64; 2]) -> [[Complex64; 2]; 2] {
        let joint = self.apply(psi);
        let mut rho = [[c(0.0, 0.0); 2]; 2];
        for (j, row) in rho.iter_mut().enumerate() {
            for (l, slot) in row.iter_mut().enumerate() {
                *slot = (0..4)
                    .map(|k| joint[j * 4 + k] * joint[l * 4 + k].conj())
                    .sum();
            }
        }
        rho
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn real_overlaps(entries: &[(usize, usize, f64)]) -> AncillaOverlaps {
    let mut g = CMatrix::zeros(4);
    for &(a, b, v) in entries {
        g[(a, b)] = c(v, 0.0);
        g[(b, a)] = c(v, 0.0);
    }
    AncillaOverlaps {
        reference_basis: BlochDirection::Z,
        g,
    }
}

/// The trivial interaction: the qubit passes untouched.
pub fn identity_attack() -> AncillaOverlaps {
    real_overlaps(&[(E00, E00, 1.0), (E11, E11, 1.0), (E00, E11, 1.0)])
}

/// Attack simulating a depolarizing channel with flip probability `qf`.
pub fn symmetric_attack(qf: f64) -> Result<AncillaOverlaps> {
    check_probability("forward noise", qf)?;
    real_overlaps(&[
        (E00, E00, 1.0 - qf),
        (E01, E01, qf),
        (E10, E10, qf),
        (E11, E11, 1.0 - qf),
        (E00, E11, 1.0 - 2.0 * qf),
    ])
    .require_valid()
    .map_err(|_| Error::Domain {
        what: "symmetric attack noise",
        value: qf,
        domain: "PSD-feasible range [0, 2/3]",
    })
}

/// Phase-covariant attack: flips z eigenstates with probability `d` and
/// equatorial states with probability `d/2`.
pub fn phase_covariant_attack(d: f64) -> Result<AncillaOverlaps> {
    check_probability("phase-covariant disturbance", d)?;
    real_overlaps(&[
        (E00, E00, 1.0 - d),
        (E01, E01, d),
        (E10, E10, d),
        (E11, E11, 1.0 - d),
        (E00, E11, 1.0 - d),
    ])
    .require_valid()
    .map_err(|_| Error::Domain {
        what: "phase-covariant disturbance",
        value: d,
        domain: "PSD-feasible range",
    })
}

/// One-parameter family with `<e00|e10> = x` (and `<e01|e11> = -x`) at fixed
/// z-basis disturbance `qf`.
pub fn interference_attack(qf: f64, x: f64) -> Result<AncillaOverlaps> {
    check_probability("forward noise", qf)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain {
            what: "interference overlap",
            value: x,
            domain: "[0, inf)",
        });
    }
    let mut a = real_overlaps(&[
        (E00, E00, 1.0 - qf),
        (E01, E01, qf),
        (E10, E10, qf),
        (E11, E11, 1.0 - qf),
        (E00, E11, 1.0 - 2.0 * qf),
        (E00, E10, x),
    ]);
    a.g[(E01, E11)] = c(-x, 0.0);
    a.g[(E11, E01)] = c(-x, 0.0);
    a.require_valid()
        .map_err(|e| Error::InfeasibleParameters(format!("qf = {qf}, x = {x}: {e}")))
}

/// Largest `x` for which [`interference_attack`] is feasible, by bisection.
pub fn interference_max_x(qf: f64) -> Result<f64> {
    interference_attack(qf, 0.0)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if interference_attack(qf, mid).is_ok() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
