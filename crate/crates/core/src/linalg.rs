//! Exact Gaussian elimination over the rationals.

use num_traits::{One, Zero};

use crate::rational::{Rational, RationalVector};

/// Reduced row echelon form of `rows` (each of length `cols`).
///
/// Returns the nonzero rows of the reduced matrix and their pivot columns.
pub fn rref(rows: &[RationalVector], cols: usize) -> (Vec<RationalVector>, Vec<usize>) {
    let mut m: Vec<Vec<Rational>> = rows.iter().map(|r| r.0.clone()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m.into_iter().map(RationalVector).collect(), pivots)
}

pub fn rank(rows: &[RationalVector], cols: usize) -> usize {
    rref(rows, cols).1.len()
}

/// Basis of `{u : row · u = 0 for every row}`, one vector per free column.
pub fn null_space(rows: &[RationalVector], cols: usize) -> Vec<RationalVector> {
    let (reduced, pivots) = rref(rows, cols);
    let free = (0..cols).filter(|c| !pivots.contains(c));
    free.map(|f| {
        let mut u = RationalVector::zeros(cols);
        u.0[f] = Rational::one();
        for (row, &p) in reduced.iter().zip(&pivots) {
            u.0[p] = -row[f].clone();
        }
        u
    })
    .collect()
}

/// Exact Gram-Schmidt: mutually orthogonal vectors spanning the same space.
/// Linearly dependent inputs are dropped.
pub fn orthogonalize(vectors: &[RationalVector]) -> Vec<RationalVector> {
    let mut out: Vec<RationalVector> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for q in &out {
            let coeff = w.dot(q) / q.dot(q);
            w = &w - &q.scale(&coeff);
        }
        if !w.is_zero() {
            out.push(w);
        }
    }
    out
}

/// Orthogonal projection of `v` onto the span of mutually orthogonal `basis`.
pub fn project(v: &RationalVector, orthogonal_basis: &[RationalVector]) -> RationalVector {
    let mut acc = RationalVector::zeros(v.len());
    for q in orthogonal_basis {
        let coeff = v.dot(q) / q.dot(q);
        acc = RationalVector(
            acc.0
                .iter()
                .zip(q.iter())
                .map(|(a, b)| a + &coeff * b)
                .collect(),
        );
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn v(x: &[i64]) -> RationalVector {
        RationalVector::from_integers(x)
    }

    #[test]
    fn rank_and_null_space_of_dependent_rows() {
        let rows = vec![
            RationalVector(vec![int(0), int(1), ratio(2, 3)]),
            RationalVector(vec![int(0), int(2), ratio(4, 3)]),
            RationalVector(vec![int(1), int(3), int(2)]),
        ];
        assert_eq!(rank(&rows, 3), 2);
        let ns = null_space(&rows, 3);
        assert_eq!(ns.len(), 1);
        for r in &rows {
            assert!(r.dot(&ns[0]).is_zero());
        }
        assert_eq!(ns[0].primitive_integer(), v(&[0, 2, -3]));
    }

    #[test]
    fn empty_rows_give_full_null_space() {
        assert_eq!(rank(&[], 2), 0);
        assert_eq!(null_space(&[], 2), vec![v(&[1, 0]), v(&[0, 1])]);
    }

    #[test]
    fn orthogonalize_drops_dependent_vectors() {
        let q = orthogonalize(&[v(&[1, 1, 0]), v(&[2, 2, 0]), v(&[1, 0, 1])]);
        assert_eq!(q.len(), 2);
        assert!(q[0].dot(&q[1]).is_zero());
    }

    #[test]
    fn projection_is_idempotent() {
        let basis = orthogonalize(&[v(&[1, 2, 0]), v(&[0, 1, 1])]);
        let p = project(&v(&[3, -1, 4]), &basis);
        assert_eq!(project(&p, &basis), p);
    }
}
