//! Dense linear algebra: exact elimination over Q and SVD-based numerical rank.

use nalgebra::DMatrix;

use crate::scalar::Q;

pub type QMatrix = Vec<Vec<Q>>;

pub fn identity(n: usize) -> QMatrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { Q::ONE } else { Q::ZERO }).collect()).collect()
}

pub fn transpose(m: &QMatrix) -> QMatrix {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    (0..cols).map(|j| m.iter().map(|row| row[j]).collect()).collect()
}

pub fn matmul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            assert_eq!(row.len(), inner, "matrix shapes do not chain");
            (0..cols).map(|j| (0..inner).map(|k| row[k] * b[k][j]).sum()).collect()
        })
        .collect()
}

pub fn matvec(a: &QMatrix, v: &[Q]) -> Vec<Q> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| *x * *y).sum()).collect()
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(m: &mut QMatrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for j in 0..cols {
                    let t = m[r][j];
                    m[i][j] -= f * t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &QMatrix) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

/// Basis of `{v : m v = 0}`.
pub fn nullspace(m: &QMatrix, cols: usize) -> QMatrix {
    let mut w = m.clone();
    let pivots = rref(&mut w);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::ZERO; cols];
            v[f] = Q::ONE;
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -w[r][f];
            }
            v
        })
        .collect()
}

/// Whether `v` lies in the row span of `m`.
pub fn in_row_span(m: &QMatrix, v: &[Q]) -> bool {
    let mut aug = m.clone();
    let base = rank(&aug);
    aug.push(v.to_vec());
    rank(&aug) == base
}

/// Coordinates `c` with `Σ c_i m_i = v` when `v` is in the row span.
pub fn row_span_coords(m: &QMatrix, v: &[Q]) -> Option<Vec<Q>> {
    // Solve mᵀ c = v by eliminating on the augmented system.
    let rows = m.len();
    let cols = v.len();
    let mut aug: QMatrix = (0..cols).map(|j| {
        let mut row: Vec<Q> = (0..rows).map(|i| m[i][j]).collect();
        row.push(v[j]);
        row
    }).collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&rows) {
        return None;
    }
    let mut c = vec![Q::ZERO; rows];
    for (r, &p) in pivots.iter().enumerate() {
        c[p] = aug[r][rows];
    }
    Some(c)
}

/// Inverse of a square rational matrix.
pub fn inverse(m: &QMatrix) -> Option<QMatrix> {
    let n = m.len();
    let mut aug: QMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::ONE } else { Q::ZERO }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn to_dmatrix(m: &[Vec<f64>]) -> DMatrix<f64> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    DMatrix::from_fn(rows, cols, |i, j| m[i][j])
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Numerical rank with threshold `rel · σ_max`; an all-zero matrix has rank 0.
pub fn numerical_rank(m: &DMatrix<f64>, rel: f64) -> usize {
    let s = singular_values(m);
    let Some(&top) = s.first() else { return 0 };
    if top <= f64::MIN_POSITIVE {
        return 0;
    }
    s.iter().filter(|&&x| x > rel * top).count()
}

pub fn q_to_f64_matrix(m: &QMatrix) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(Q::to_f64).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i128]) -> Vec<Q> {
        v.iter().map(|&x| Q::int(x)).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let m = vec![q(&[1, 2, 3]), q(&[2, 4, 6]), q(&[0, 1, 1])];
        assert_eq!(rank(&m), 2);
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 1);
        assert!(matvec(&m, &ns[0]).iter().all(Q::is_zero));
    }

    #[test]
    fn span_membership() {
        let b = vec![q(&[1, 0, 0]), q(&[0, 1, 0])];
        assert!(in_row_span(&b, &q(&[3, -1, 0])));
        assert!(!in_row_span(&b, &q(&[0, 0, 1])));
        assert_eq!(row_span_coords(&b, &q(&[3, -1, 0])), Some(q(&[3, -1])));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = vec![q(&[2, 1]), q(&[1, 1])];
        let inv = inverse(&m).unwrap();
        assert_eq!(matmul(&m, &inv), identity(2));
        assert!(inverse(&vec![q(&[1, 2]), q(&[2, 4])]).is_none());
    }

    #[test]
    fn svd_rank() {
        let m = to_dmatrix(&[vec![1.0, 0.0], vec![0.0, 1e-14]]);
        assert_eq!(numerical_rank(&m, 1e-10), 1);
        assert_eq!(numerical_rank(&to_dmatrix(&[vec![0.0, 0.0]]), 1e-10), 0);
    }
}
