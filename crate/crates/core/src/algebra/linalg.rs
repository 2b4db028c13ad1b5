//! Small dense matrices over a [`Ring`]: determinants by cofactor expansion
//! and linear solves by Gaussian elimination with unit pivots.

use super::Ring;

pub type Matrix<R> = Vec<Vec<R>>;

/// Determinant by expansion along the first row. Exact over any ring;
/// intended for the small sizes used here (n <= 6 or so).
pub fn determinant<R: Ring>(m: &Matrix<R>, like: &R) -> R {
    let n = m.len();
    if n == 0 {
        return like.one_like();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    if n == 2 {
        return m[0][0].clone() * &m[1][1] - m[0][1].clone() * &m[1][0];
    }
    let mut acc = like.zero_like();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Matrix<R> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = m[0][j].clone() * &determinant(&minor, like);
        acc = if j % 2 == 0 { acc + &term } else { acc - &term };
    }
    acc
}

/// Solves `m x = b` by Gaussian elimination, choosing a unit pivot in each
/// column. Returns `None` when some column has no unit pivot.
pub fn solve<R: Ring>(m: &Matrix<R>, b: &[R]) -> Option<Vec<R>> {
    let n = m.len();
    let mut a: Matrix<R> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let (piv, inv) = (col..n).find_map(|r| a[r][col].inverse().map(|inv| (r, inv)))?;
        a.swap(col, piv);
        let row: Vec<R> = a[col].iter().map(|x| x.clone() * &inv).collect();
        a[col] = row;
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in col..=n {
                let t = f.clone() * &a[col][c];
                a[r][c] = a[r][c].clone() - &t;
            }
        }
    }
    Some(a.into_iter().map(|mut row| row.pop().unwrap()).collect())
}
