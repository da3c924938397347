use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::math::{c, CMatrix};

/// Single-qubit Pauli operators, used both as Alice's encodings and as
/// measurement axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Y => 2,
            Pauli::Z => 3,
        }
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    pub fn to_cmatrix(self) -> CMatrix {
        let m = self.matrix();
        CMatrix::from_fn(2, |i, j| m[i][j])
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Multiplication table `a * b = phase * v` of the Pauli group modulo phases.
///
/// The table is data rather than code so that a deliberately corrupted copy
/// can be fed to the verification suite.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTable {
    entries: [[(Complex64, Pauli); 4]; 4],
}

impl PauliTable {
    /// The standard convention `XY = iZ`, `YZ = iX`, `ZX = iY`.
    pub fn standard() -> Self {
        use Pauli::*;
        let one = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        let mut entries = [[(one, I); 4]; 4];
        for p in Pauli::ALL {
            entries[I.index()][p.index()] = (one, p);
            entries[p.index()][I.index()] = (one, p);
            entries[p.index()][p.index()] = (one, I);
        }
        let cyclic = [(X, Y, Z), (Y, Z, X), (Z, X, Y)];
        for (a, b, v) in cyclic {
            entries[a.index()][b.index()] = (i, v);
            entries[b.index()][a.index()] = (-i, v);
        }
        Self { entries }
    }

    pub fn product(&self, a: Pauli, b: Pauli) -> (Complex64, Pauli) {
        self.entries[a.index()][b.index()]
    }

    /// Overrides one entry; only useful for mutation testing.
    pub fn with_entry(mut self, a: Pauli, b: Pauli, phase: Complex64, v: Pauli) -> Self {
        self.entries[a.index()][b.index()] = (phase, v);
        self
    }
}

impl Default for PauliTable {
    fn default() -> Self {
        Self::standard()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let mut out = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    #[test]
    fn table_matches_matrix_products() {
        let table = PauliTable::standard();
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let (phase, v) = table.product(a, b);
                let want = mul(a.matrix(), b.matrix());
                let got = v.matrix();
                for i in 0..2 {
                    for j in 0..2 {
                        assert!(
                            (got[i][j] * phase - want[i][j]).norm() < 1e-15,
                            "{a:?}{b:?}"
                        );
                    }
                }
            }
        }
    }
}
