//! Gram matrices of Alice-Eve joint-state ensembles.
//!
//! Every joint state Eve can hold after Alice's encoding is
//! `(sigma_w x 1) U |b>|e>` for a prepared z-eigenstate `b` and a Pauli `w`.
//! Inner products between two such states reduce, through the Pauli product
//! table, to contractions of the ancilla overlap matrix, so spectra of
//! mixtures are obtained from Gram matrices of dimension at most 8 without
//! ever materializing the density operator.

use num_complex::Complex64;
use serde::Serialize;

use crate::attack::{AncillaOverlaps, AttackIsometry, BlochDirection};
use crate::error::{Error, Result};
use crate::math::{c, hermitian_eigenvalues, CMatrix, Spectrum};
use crate::pauli::{Pauli, PauliTable};

/// Entries below this magnitude decouple two blocks of a Gram matrix.
pub const BLOCK_TOL: f64 = 1e-10;
const WEIGHT_TOL: f64 = 1e-12;

/// Pure joint state `(sigma_pauli x 1) U |prep_bit>_z |e>` with a mixing weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointStateLabel {
    pub prep_bit: u8,
    pub pauli: Pauli,
    pub weight: f64,
}

impl JointStateLabel {
    pub fn new(prep_bit: u8, pauli: Pauli, weight: f64) -> Self {
        assert!(prep_bit < 2, "prep bit must be 0 or 1");
        Self {
            prep_bit,
            pauli,
            weight,
        }
    }
}

/// A normalized mixture of labelled pure joint states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ensemble {
    labels: Vec<JointStateLabel>,
}

impl Ensemble {
    pub fn new(labels: Vec<JointStateLabel>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Config("ensemble must not be empty".into()));
        }
        let total: f64 = labels.iter().map(|l| l.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOL || labels.iter().any(|l| l.weight < 0.0) {
            return Err(Error::Config(format!(
                "ensemble weights must be nonnegative and sum to 1 (sum = {total})"
            )));
        }
        Ok(Self { labels })
    }

    /// Equal weights over `(pauli, prep_bit)` pairs.
    pub fn uniform(states: &[(Pauli, u8)]) -> Self {
        let w = 1.0 / states.len() as f64;
        Self {
            labels: states
                .iter()
                .map(|&(p, b)| JointStateLabel::new(b, p, w))
                .collect(),
        }
    }

    pub fn labels(&self) -> &[JointStateLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Weighted union of conditional ensembles.
    pub fn mixture(conditionals: &[(f64, Ensemble)]) -> Result<Ensemble> {
        let labels = conditionals
            .iter()
            .flat_map(|(p, e)| {
                e.labels
                    .iter()
                    .map(move |l| JointStateLabel::new(l.prep_bit, l.pauli, p * l.weight))
            })
            .collect();
        Ensemble::new(labels)
    }
}

/// Gram-matrix evaluation under a given Pauli multiplication table.
#[derive(Clone, Debug, Default)]
pub struct GramEngine {
    table: PauliTable,
}

impl GramEngine {
    pub fn new(table: PauliTable) -> Self {
        Self { table }
    }

    /// `<e|<b1| U^dagger (sigma_w1 sigma_w2 x 1) U |b2>|e>`.
    pub fn joint_overlap(
        &self,
        a: &AncillaOverlaps,
        s1: &JointStateLabel,
        s2: &JointStateLabel,
    ) -> Complex64 {
        let g = if a.reference_basis() == BlochDirection::Z {
            a.matrix().clone()
        } else {
            a.transform_basis(BlochDirection::Z).matrix().clone()
        };
        overlap_in_z(&self.table, &g, s1, s2)
    }

    pub fn gram_matrix(&self, a: &AncillaOverlaps, e: &Ensemble) -> CMatrix {
        let g = if a.reference_basis() == BlochDirection::Z {
            a.matrix().clone()
        } else {
            a.transform_basis(BlochDirection::Z).matrix().clone()
        };
        let labels = e.labels();
        let mut out = CMatrix::zeros(labels.len());
        for i in 0..labels.len() {
            for j in i..labels.len() {
                let w = (labels[i].weight * labels[j].weight).sqrt();
                let v = overlap_in_z(&self.table, &g, &labels[i], &labels[j]) * w;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
            out[(i, i)] = c(out[(i, i)].re, 0.0);
        }
        out
    }

    pub fn spectrum_of(&self, a: &AncillaOverlaps, e: &Ensemble) -> Result<Spectrum> {
        block_spectrum(&self.gram_matrix(a, e))
    }

    pub fn entropy_of(&self, a: &AncillaOverlaps, e: &Ensemble) -> Result<f64> {
        self.spectrum_of(a, e)?.entropy()
    }

    /// `S(sum_b p_b rho_b) - sum_b p_b S(rho_b)`, clipped at zero.
    pub fn holevo(&self, a: &AncillaOverlaps, conditionals: &[(f64, Ensemble)]) -> Result<f64> {
        let total: f64 = conditionals.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Config(format!(
                "conditional probabilities sum to {total}, not 1"
            )));
        }
        let mixed = self.entropy_of(a, &Ensemble::mixture(conditionals)?)?;
        let mut avg = 0.0;
        for (p, e) in conditionals {
            avg += p * self.entropy_of(a, e)?;
        }
        Ok((mixed - avg).max(0.0))
    }
}

fn overlap_in_z(
    table: &PauliTable,
    g: &CMatrix,
    s1: &JointStateLabel,
    s2: &JointStateLabel,
) -> Complex64 {
    let (phase, v) = table.product(s1.pauli, s2.pauli);
    let sigma = v.matrix();
    let (b1, b2) = (s1.prep_bit as usize, s2.prep_bit as usize);
    let mut acc = c(0.0, 0.0);
    for jp in 0..2 {
        for j in 0..2 {
            if sigma[jp][j] != c(0.0, 0.0) {
                acc += sigma[jp][j] * g[(2 * b1 + jp, 2 * b2 + j)];
            }
        }
    }
    phase * acc
}

/// Eigenvalues of a Hermitian matrix, computed block by block over the
/// connected components of its nonzero pattern.
pub fn block_spectrum(m: &CMatrix) -> Result<Spectrum> {
    let blocks = decoupled_blocks(m);
    let mut all = Vec::with_capacity(m.dim());
    for block in &blocks {
        all.extend_from_slice(hermitian_eigenvalues(&m.submatrix(block))?.eigenvalues());
    }
    Ok(Spectrum::new(all))
}

/// Index sets of the mutually orthogonal blocks (entries below [`BLOCK_TOL`]
/// count as zero), each sorted ascending and ordered by first index.
pub fn decoupled_blocks(m: &CMatrix) -> Vec<Vec<usize>> {
    let n = m.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut k = i;
        while p[k] != r {
            let next = p[k];
            p[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if m[(i, j)].norm() >= BLOCK_TOL {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut root_of_block: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of_block.iter().position(|&x| x == r) {
            Some(k) => blocks[k].push(i),
            None => {
                root_of_block.push(r);
                blocks.push(vec![i]);
            }
        }
    }
    blocks
}

pub fn joint_overlap(a: &AncillaOverlaps, s1: &JointStateLabel, s2: &JointStateLabel) -> Complex64 {
    GramEngine::default().joint_overlap(a, s1, s2)
}

pub fn gram_matrix(a: &AncillaOverlaps, e: &Ensemble) -> CMatrix {
    GramEngine::default().gram_matrix(a, e)
}

pub fn spectrum_of(a: &AncillaOverlaps, e: &Ensemble) -> Result<Spectrum> {
    GramEngine::default().spectrum_of(a, e)
}

pub fn holevo(a: &AncillaOverlaps, conditionals: &[(f64, Ensemble)]) -> Result<f64> {
    GramEngine::default().holevo(a, conditionals)
}

/// The 8x8 joint density operator of `e`, built from explicit vectors.
/// Serves as an independent check on the Gram route.
pub fn density_matrix(iso: &AttackIsometry, e: &Ensemble) -> CMatrix {
    let mut rho = CMatrix::zeros(8);
    for l in e.labels() {
        let col = &iso.columns[l.prep_bit as usize];
        let sigma = l.pauli.matrix();
        let mut phi = [c(0.0, 0.0); 8];
        for j in 0..2 {
            for k in 0..4 {
                phi[j * 4 + k] = sigma[j][0] * col[k] + sigma[j][1] * col[4 + k];
            }
        }
        for r in 0..8 {
            for s in 0..8 {
                rho[(r, s)] += phi[r] * phi[s].conj() * l.weight;
            }
        }
    }
    rho
}

/// Ensembles and conditional alphabets used by the protocols.
pub mod ensembles {
    use super::*;
    use Pauli::*;

    /// Conditional alphabets when bit 0 is encoded by the identity and bit 1 by `flip`.
    pub fn encoding_pair(flip: Pauli) -> Vec<(f64, Ensemble)> {
        vec![
            (0.5, Ensemble::uniform(&[(I, 0), (I, 1)])),
            (0.5, Ensemble::uniform(&[(flip, 0), (flip, 1)])),
        ]
    }

    /// Encoding `{I, Z}`: the alphabet of the simple non-deterministic protocol.
    pub fn simple_conditionals() -> Vec<(f64, Ensemble)> {
        encoding_pair(Z)
    }

    /// The four-state mixture `{(I,0),(I,1),(Z,0),(Z,1)}`.
    pub fn simple_mixture() -> Ensemble {
        Ensemble::uniform(&[(I, 0), (I, 1), (Z, 0), (Z, 1)])
    }

    /// Encodings `{I, X, Y, Z}` with preparation axis `axis`: operations that
    /// commute with the axis Pauli keep the bit, the others flip it.
    pub fn deterministic_conditionals(axis: Pauli) -> Vec<(f64, Ensemble)> {
        assert!(axis != I, "preparation axis must be x, y or z");
        let others: Vec<Pauli> = [X, Y, Z].into_iter().filter(|&p| p != axis).collect();
        vec![
            (
                0.5,
                Ensemble::uniform(&[(I, 0), (I, 1), (axis, 0), (axis, 1)]),
            ),
            (
                0.5,
                Ensemble::uniform(&[
                    (others[0], 0),
                    (others[0], 1),
                    (others[1], 0),
                    (others[1], 1),
                ]),
            ),
        ]
    }

    /// Bit-0 conditional state for preparation axis `axis` (`G_x`, `G_y`, ...).
    pub fn axis_conditional(axis: Pauli) -> Ensemble {
        deterministic_conditionals(axis).remove(0).1
    }

    /// Uniform mixture of all eight encoded states.
    pub fn full_mixture() -> Ensemble {
        Ensemble::uniform(&[
            (I, 0),
            (I, 1),
            (X, 0),
            (X, 1),
            (Y, 0),
            (Y, 1),
            (Z, 0),
            (Z, 1),
        ])
    }

    pub fn six_state_block1() -> Ensemble {
        Ensemble::uniform(&[(I, 0), (X, 1), (Y, 1), (Z, 0)])
    }

    pub fn six_state_block2() -> Ensemble {
        Ensemble::uniform(&[(I, 1), (X, 0), (Y, 0), (Z, 1)])
    }

    pub const NAMES: [&str; 9] = [
        "simple",
        "sixstate-block1",
        "sixstate-block2",
        "gx",
        "gy",
        "gz",
        "sixstate-mixture",
        "simple-bit0",
        "encoding-ix",
    ];

    pub fn by_name(name: &str) -> Option<Ensemble> {
        Some(match name {
            "simple" => simple_mixture(),
            "sixstate-block1" => six_state_block1(),
            "sixstate-block2" => six_state_block2(),
            "gx" => axis_conditional(X),
            "gy" => axis_conditional(Y),
            "gz" => axis_conditional(Z),
            "sixstate-mixture" => full_mixture(),
            "simple-bit0" => Ensemble::uniform(&[(I, 0), (I, 1)]),
            "encoding-ix" => Ensemble::uniform(&[(I, 0), (I, 1), (X, 0), (X, 1)]),
            _ => return None,
        })
    }

    /// All named ensembles, in [`NAMES`] order.
    pub fn all() -> Vec<(&'static str, Ensemble)> {
        NAMES
            .iter()
            .map(|&n| (n, by_name(n).expect("every listed name resolves")))
            .collect()
    }
}

/// `chi_w` for preparation axis `w` of a deterministic four-operation protocol.
pub fn axis_holevo(a: &AncillaOverlaps, axis: Pauli) -> Result<f64> {
    holevo(a, &ensembles::deterministic_conditionals(axis))
}

/// Average of `chi_w` over the x, y and z preparation axes.
pub fn six_state_holevo(a: &AncillaOverlaps) -> Result<f64> {
    let mut total = 0.0;
    for w in [Pauli::X, Pauli::Y, Pauli::Z] {
        total += axis_holevo(a, w)?;
    }
    Ok(total / 3.0)
}

/// Average of the x and z Holevo quantities under the extra announcement that
/// reduces each preparation axis to a two-operation alphabet.
pub fn modified_lm05_prime_holevo(a: &AncillaOverlaps) -> Result<f64> {
    // x preparation is left with {I} vs {Z}, z preparation with {I} vs {X}
    let chi_x = holevo(a, &ensembles::encoding_pair(Pauli::Z))?;
    let chi_z = holevo(a, &ensembles::encoding_pair(Pauli::X))?;
    Ok(0.5 * (chi_x + chi_z))
}

/// Average of `chi_x` and `chi_z` for the unmodified four-operation protocol.
pub fn lm05_prime_holevo(a: &AncillaOverlaps) -> Result<f64> {
    Ok(0.5 * (axis_holevo(a, Pauli::X)? + axis_holevo(a, Pauli::Z)?))
}

#[cfg(test)]
mod tests {
    use super::ensembles::*;
    use super::*;
    use crate::attack::{identity_attack, interference_attack, symmetric_attack};
    use crate::math::binary_entropy;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn lbl(p: Pauli, b: u8) -> JointStateLabel {
        JointStateLabel::new(b, p, 0.25)
    }

    #[test]
    fn overlap_examples() {
        let id = identity_attack();
        let o = joint_overlap(&id, &lbl(Pauli::I, 0), &lbl(Pauli::Z, 0));
        close((o - 1.0).norm(), 0.0, 1e-15);
        let sym = symmetric_attack(0.2).unwrap();
        let o = joint_overlap(&sym, &lbl(Pauli::I, 0), &lbl(Pauli::Z, 0));
        close((o - 0.6).norm(), 0.0, 1e-15);
        for p in Pauli::ALL {
            for b in 0..2 {
                let s = lbl(p, b);
                close((joint_overlap(&sym, &s, &s) - 1.0).norm(), 0.0, 1e-15);
            }
        }
    }

    #[test]
    fn simple_gram_matches_printed_matrix() {
        let (q, x) = (0.1, 0.05);
        let a = interference_attack(q, x).unwrap();
        let g = gram_matrix(&a, &simple_mixture());
        let s = 1.0 - 2.0 * q;
        let want = CMatrix::from_real_rows(&[
            vec![1.0, 0.0, s, 2.0 * x],
            vec![0.0, 1.0, 2.0 * x, -s],
            vec![s, 2.0 * x, 1.0, 0.0],
            vec![2.0 * x, -s, 0.0, 1.0],
        ])
        .scale(0.25);
        assert!(g.max_abs_diff(&want) < 1e-15, "{g:?}");
    }

    #[test]
    fn six_state_block1_matches_printed_matrix() {
        let q = 0.2;
        let s = 1.0 - 2.0 * q;
        let g = gram_matrix(&symmetric_attack(q).unwrap(), &six_state_block1());
        let r = |x: f64| c(x, 0.0);
        let i = |x: f64| c(0.0, x);
        let want = CMatrix::from_rows(&[
            vec![r(1.0), r(s), i(-s), r(s)],
            vec![r(s), r(1.0), i(-s), r(s)],
            vec![i(s), i(s), r(1.0), i(s)],
            vec![r(s), r(s), i(-s), r(1.0)],
        ])
        .scale(0.25);
        assert!(g.max_abs_diff(&want) < 1e-15, "{g:?}");
    }

    #[test]
    fn single_label_gram() {
        let e = Ensemble::uniform(&[(Pauli::Y, 1)]);
        let g = gram_matrix(&symmetric_attack(0.3).unwrap(), &e);
        assert_eq!(g.dim(), 1);
        close((g[(0, 0)] - 1.0).norm(), 0.0, 1e-15);
    }

    #[test]
    fn ensemble_weight_validation() {
        let bad = vec![JointStateLabel::new(0, Pauli::I, 0.6)];
        assert!(Ensemble::new(bad).is_err());
        assert!(Ensemble::new(vec![]).is_err());
    }

    #[test]
    fn holevo_examples() {
        let id = identity_attack();
        close(holevo(&id, &simple_conditionals()).unwrap(), 0.0, 1e-12);
        for q in [0.05, 0.1, 0.3] {
            let a = symmetric_attack(q).unwrap();
            close(
                holevo(&a, &simple_conditionals()).unwrap(),
                binary_entropy(q).unwrap(),
                1e-12,
            );
        }
    }

    #[test]
    fn full_mixture_splits_into_two_blocks() {
        let a = symmetric_attack(0.1).unwrap();
        let g = gram_matrix(&a, &full_mixture());
        let blocks = decoupled_blocks(&g);
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0], vec![0, 3, 5, 6]);
        assert_eq!(blocks[1], vec![1, 2, 4, 7]);
    }

    #[test]
    fn gram_of_transformed_attack_is_unchanged() {
        let a = interference_attack(0.2, 0.1).unwrap();
        let ax = a.transform_basis(BlochDirection::X);
        let e = full_mixture();
        assert!(gram_matrix(&a, &e).max_abs_diff(&gram_matrix(&ax, &e)) < 1e-13);
    }
}
