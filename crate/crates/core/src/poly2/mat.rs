//! 2x2 matrices of scalar polynomials and their Kronecker square.

use num_traits::One;

use super::Poly2;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMat2 {
    entries: [[Poly2; 2]; 2],
}

/// A 4x4 array of scalar polynomials, laid out as a Kronecker product of two
/// 2x2 factors: entry `(2i + j, 2k + l)` is `A[i][k] * B[j][l]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kron4 {
    pub entries: [[Poly2; 4]; 4],
}

impl PolyMat2 {
    pub fn new(entries: [[Poly2; 2]; 2]) -> Result<Self> {
        for e in entries.iter().flatten() {
            if e.dim() != 1 {
                return Err(Error::DimensionMismatch(1, e.dim()));
            }
        }
        Ok(PolyMat2 { entries })
    }

    pub fn identity() -> Self {
        let one = Poly2::constant(Rational::one());
        let zero = Poly2::zero(1);
        PolyMat2 {
            entries: [[one.clone(), zero.clone()], [zero, one]],
        }
    }

    pub fn diag(a: Poly2, b: Poly2) -> Result<Self> {
        Self::new([[a, Poly2::zero(1)], [Poly2::zero(1), b]])
    }

    /// Jacobian `[[d1 p0, d2 p0], [d1 p1, d2 p1]]` of an R^2-valued polynomial.
    pub fn jacobian(p: &Poly2) -> Result<Self> {
        if p.dim() != 2 {
            return Err(Error::DimensionMismatch(2, p.dim()));
        }
        let [a, b] = [p.component(0), p.component(1)];
        use super::Var::{U, V};
        Self::new([[a.diff(U), a.diff(V)], [b.diff(U), b.diff(V)]])
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly2 {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[[Poly2; 2]; 2] {
        &self.entries
    }

    pub fn det(&self) -> Poly2 {
        let e = &self.entries;
        &(&e[0][0] * &e[1][1]) - &(&e[0][1] * &e[1][0])
    }

    /// Cofactor transpose: `M * adj(M) = det(M) * I`.
    pub fn adjugate(&self) -> PolyMat2 {
        let e = &self.entries;
        PolyMat2 {
            entries: [[e[1][1].clone(), -&e[0][1]], [-&e[1][0], e[0][0].clone()]],
        }
    }

    pub fn matmul(&self, other: &PolyMat2) -> PolyMat2 {
        let (a, b) = (&self.entries, &other.entries);
        let entry = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
        PolyMat2 {
            entries: [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]],
        }
    }

    pub fn scale(&self, s: &Poly2) -> PolyMat2 {
        PolyMat2 {
            entries: self.entries.clone().map(|row| row.map(|e| s * &e)),
        }
    }

    pub fn truncate_total_degree(&self, max_total: u32) -> PolyMat2 {
        PolyMat2 {
            entries: self
                .entries
                .clone()
                .map(|row| row.map(|e| e.truncate_total_degree(max_total))),
        }
    }

    pub fn kron(&self, other: &PolyMat2) -> Kron4 {
        self.kron_truncated(other, None)
    }

    pub fn kron_truncated(&self, other: &PolyMat2, max_total: Option<u32>) -> Kron4 {
        let entries = std::array::from_fn(|r| {
            std::array::from_fn(|c| {
                let (i, j) = (r / 2, r % 2);
                let (k, l) = (c / 2, c % 2);
                self.entries[i][k]
                    .mul_truncated(&other.entries[j][l], max_total)
                    .expect("scalar entries")
            })
        });
        Kron4 { entries }
    }
}

/// Row vector of scalar polynomials times a matrix given by its entries.
pub(crate) fn row_times<const R: usize, const C: usize>(
    row: &[Poly2; R],
    m: &[[Poly2; C]; R],
    max_total: Option<u32>,
) -> [Poly2; C] {
    std::array::from_fn(|c| {
        let mut acc = Poly2::zero(1);
        for (r, x) in row.iter().enumerate() {
            let t = x
                .mul_truncated(&m[r][c], max_total)
                .expect("scalar entries");
            acc = &acc + &t;
        }
        acc
    })
}

impl Kron4 {
    pub fn identity() -> Self {
        PolyMat2::identity().kron(&PolyMat2::identity())
    }

    /// `row * self` for a 1x4 row of scalar polynomials.
    pub fn left_mul(&self, row: &[Poly2; 4], max_total: Option<u32>) -> [Poly2; 4] {
        row_times(row, &self.entries, max_total)
    }
}
