//! Small dense exact linear algebra over the rationals.

use num_traits::{Signed, Zero};

use crate::rational::Rational;

pub type RatMatrix = Vec<Vec<Rational>>;

/// Basis of the right null space of `a`, via reduced row echelon form.
pub fn nullspace(a: &RatMatrix) -> Vec<Vec<Rational>> {
    let rows = a.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = a[0].len();
    let mut m = a.clone();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::from_integer(1.into());
            for (row, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -m[row][f].clone();
            }
            v
        })
        .collect()
}

/// True iff every leading principal minor of `a` is positive, checked through the pivots
/// of Gaussian elimination without row exchanges.
pub fn leading_minors_positive(a: &RatMatrix) -> bool {
    let n = a.len();
    let mut m = a.clone();
    for k in 0..n {
        if !m[k][k].is_positive() {
            return false;
        }
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let f = &m[i][k] / &m[k][k];
            for j in k..n {
                let d = &f * &m[k][j];
                m[i][j] -= d;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn mat(rows: &[&[i64]]) -> RatMatrix {
        rows.iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect()
    }

    #[test]
    fn nullspace_of_rank_one() {
        let ns = nullspace(&mat(&[&[1, -1], &[-1, 1]]));
        assert_eq!(ns, vec![vec![int(1), int(1)]]);
        assert!(nullspace(&mat(&[&[1, 0], &[0, 1]])).is_empty());
    }

    #[test]
    fn minors() {
        assert!(leading_minors_positive(&mat(&[&[2, -1], &[-1, 2]])));
        assert!(!leading_minors_positive(&mat(&[&[1, -1], &[-1, 1]])));
        assert!(!leading_minors_positive(&mat(&[&[0, 1], &[1, 0]])));
    }
}
