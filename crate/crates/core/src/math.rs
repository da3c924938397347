//! Small dense complex matrices, a Hermitian eigensolver and entropy functions.
//!
//! Everything here works on matrices of dimension at most 8, which is all the
//! Gram and density matrices of a single qubit plus a four-dimensional
//! ancilla ever need.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};

/// Entry-wise tolerance on `m[i][j] - conj(m[j][i])` for Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues below this are treated as a numerical negative zero.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues with magnitude below this contribute nothing to an entropy.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

const MAX_SWEEPS: usize = 64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows; panics if the rows do not form a square.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                c(values[i], 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(i, j)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Largest `|m[i][j] - conj(m[j][i])|`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Principal submatrix on the given index set, in the given order.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self[(idx[i], idx[j])])
    }

    /// Rows of `[re, im]` pairs, convenient for JSON export.
    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| [self[(i, j)].re, self[(i, j)].im])
                    .collect()
            })
            .collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        CMatrix::from_fn(n, |i, j| (0..n).map(|k| self[(i, k)] * rhs[(k, j)]).sum())
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self.to_pairs();
        let mut seq = serializer.serialize_seq(Some(rows.len()))?;
        for row in &rows {
            seq.serialize_element(row)?;
        }
        seq.end()
    }
}

/// Real eigenvalues sorted in descending order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        Self { eigenvalues }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// Merges two spectra (multiset union).
    pub fn concat(&self, other: &Spectrum) -> Spectrum {
        let mut all = self.eigenvalues.clone();
        all.extend_from_slice(&other.eigenvalues);
        Spectrum::new(all)
    }

    /// Pads with zeros to `len` entries; spectra of a Gram matrix and of the
    /// corresponding density operator differ only by such zeros.
    pub fn padded(&self, len: usize) -> Spectrum {
        let mut all = self.eigenvalues.clone();
        while all.len() < len {
            all.push(0.0);
        }
        Spectrum::new(all)
    }

    /// Largest elementwise gap after zero-padding both to the same length.
    pub fn max_abs_diff(&self, other: &Spectrum) -> f64 {
        let n = self.len().max(other.len());
        let a = self.padded(n);
        let b = other.padded(n);
        a.eigenvalues
            .iter()
            .zip(&b.eigenvalues)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    pub fn entropy(&self) -> Result<f64> {
        von_neumann_entropy(self)
    }
}

/// Eigenvalues and orthonormal eigenvectors (as columns of `vectors`).
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Eigenpairs are returned in descending eigenvalue order.
pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    let residual = m.hermitian_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NonHermitianInput { residual });
    }
    let n = m.dim();
    // symmetrize so rounding in the input cannot bias the rotations
    let mut a = CMatrix::from_fn(n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);

    let scale = a
        .as_slice()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let threshold = f64::EPSILON * f64::EPSILON * scale.max(f64::MIN_POSITIVE).powi(2);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |r, k| v[(r, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / r;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;

    // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let jpp = c(cs, 0.0);
    let jpq = c(sn, 0.0);
    let jqp = -phase.conj() * sn;
    let jqq = phase.conj() * cs;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = c(0.0, 0.0);
    a[(q, p)] = c(0.0, 0.0);
    a[(p, p)] = c(app - t * r, 0.0);
    a[(q, q)] = c(aqq + t * r, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Spectrum> {
    Ok(Spectrum::new(hermitian_eigen(m)?.values))
}

fn xlog2x(x: f64) -> f64 {
    if x.abs() < ZERO_EIGENVALUE {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary Shannon entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            what: "binary entropy argument",
            value: x,
            domain: "[0, 1]",
        });
    }
    if x == 0.0 || x == 1.0 {
        return Ok(0.0);
    }
    Ok(-x * x.log2() - (1.0 - x) * (1.0 - x).log2())
}

/// `h(x)` for arguments already known to lie in `[0, 1]`.
pub(crate) fn h(x: f64) -> f64 {
    binary_entropy(x.clamp(0.0, 1.0)).unwrap_or(0.0)
}

/// Von Neumann entropy `-sum l log2 l` in bits of a spectrum.
pub fn von_neumann_entropy(s: &Spectrum) -> Result<f64> {
    let mut total = 0.0;
    for &l in s.eigenvalues() {
        if l < -PSD_TOL {
            return Err(Error::NegativeEigenvalue(l));
        }
        total -= xlog2x(l.clamp(0.0, 1.0));
    }
    Ok(total.max(0.0))
}
