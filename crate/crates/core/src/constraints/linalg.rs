//! Exact row reduction.
//!
//! Rows are cleared to integers and eliminated fraction-free (Bareiss), so the
//! intermediate entries stay bounded by minors of the input. Pivoting is
//! deterministic: columns left to right, and within a column the first
//! remaining row with a nonzero entry.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::rational::Rational;

fn integer_row(row: &[Rational]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
}

/// Reduced row-echelon form of `rows`, with zero rows dropped, plus the pivot columns.
pub fn rref(rows: &[Vec<Rational>], ncols: usize) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|r| integer_row(r)).collect();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        let Some(p) = (top..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(top, p);
        for i in top + 1..m.len() {
            let a = m[i][col].clone();
            for c in 0..ncols {
                let v = &m[top][col] * &m[i][c] - &a * &m[top][c];
                // Bareiss: exact division by the previous pivot.
                m[i][c] = v / &prev;
            }
        }
        prev = m[top][col].clone();
        pivots.push(col);
        top += 1;
        if top == m.len() {
            break;
        }
    }
    m.truncate(top);

    let mut out: Vec<Vec<Rational>> = m
        .into_iter()
        .zip(&pivots)
        .map(|(row, &pc)| {
            let d = row[pc].clone();
            row.into_iter()
                .map(|x| Rational::new(x, d.clone()))
                .collect()
        })
        .collect();
    for (i, &pc) in pivots.iter().enumerate().rev() {
        let (above, rest) = out.split_at_mut(i);
        let pivot_row = &rest[0];
        for row in above.iter_mut() {
            let f = row[pc].clone();
            if f.is_zero() {
                continue;
            }
            for (x, p) in row[pc..ncols].iter_mut().zip(&pivot_row[pc..ncols]) {
                *x -= &f * p;
            }
        }
    }
    (out, pivots)
}

/// Basis of the nullspace of an RREF matrix: one vector per free column.
pub fn nullspace(reduced: &[Vec<Rational>], pivots: &[usize], ncols: usize) -> Vec<Vec<Rational>> {
    let free = (0..ncols).filter(|c| !pivots.contains(c));
    free.map(|f| {
        let mut v = vec![Rational::zero(); ncols];
        v[f] = Rational::one();
        for (row, &pc) in reduced.iter().zip(pivots) {
            v[pc] = -&row[f];
        }
        v
    })
    .collect()
}
