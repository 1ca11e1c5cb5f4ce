//! Dense exact linear algebra over fields of the lattice.

use std::sync::Arc;

use crate::error::{AswError, Result};
use crate::field::{common_field_of, Fe, Field};

pub type Mat = Vec<Vec<Fe>>;

/// Embed every entry into one common field.
pub fn unify_matrix(m: &Mat) -> Option<(Arc<Field>, Mat)> {
    let refs: Vec<&Fe> = m.iter().flatten().collect();
    if refs.is_empty() {
        return None;
    }
    let field = common_field_of(&refs);
    let out = m
        .iter()
        .map(|row| row.iter().map(|e| e.embed(&field).unwrap()).collect())
        .collect();
    Some((field, out))
}

pub fn zeros(field: &Arc<Field>, rows: usize, cols: usize) -> Mat {
    vec![vec![Fe::zero(field); cols]; rows]
}

pub fn identity(field: &Arc<Field>, n: usize) -> Mat {
    let mut m = zeros(field, n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Fe::one(field);
    }
    m
}

pub fn transpose(m: &Mat) -> Mat {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let k = b.len();
    let cols = if k == 0 { 0 } else { b[0].len() };
    let mut out = Vec::with_capacity(n);
    for row in a {
        let mut r = Vec::with_capacity(cols);
        for j in 0..cols {
            let mut acc = row[0].zero_like();
            for t in 0..k {
                if !row[t].is_zero() && !b[t][j].is_zero() {
                    acc = acc.add(&row[t].mul(&b[t][j]));
                }
            }
            r.push(acc);
        }
        out.push(r);
    }
    out
}

pub fn mat_vec(a: &Mat, v: &[Fe]) -> Vec<Fe> {
    a.iter()
        .map(|row| {
            let mut acc = v[0].zero_like();
            for (x, y) in row.iter().zip(v) {
                if !x.is_zero() && !y.is_zero() {
                    acc = acc.add(&x.mul(y));
                }
            }
            acc
        })
        .collect()
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(m: &mut Mat) -> Vec<usize> {
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
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = m[r][c].inv().unwrap();
        for x in m[r].iter_mut() {
            if !x.is_zero() {
                *x = x.mul(&inv);
            }
        }
        let pivot_row = m[r].clone();
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x = x.sub(&factor.mul(y));
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Mat) -> usize {
    match unify_matrix(m) {
        None => 0,
        Some((_, mut u)) => rref(&mut u).len(),
    }
}

/// Basis of `{ v : m v = 0 }`, one vector per free column, in RREF-canonical form.
pub fn kernel(m: &Mat, field: &Arc<Field>, cols: usize) -> Vec<Vec<Fe>> {
    let mut u: Mat = m
        .iter()
        .map(|row| row.iter().map(|e| e.embed(field).unwrap()).collect())
        .collect();
    let pivots = rref(&mut u);
    let mut out = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![Fe::zero(field); cols];
        v[free] = Fe::one(field);
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = u[r][free].neg();
        }
        out.push(v);
    }
    out
}

/// One solution of `m x = b` (free variables set to zero), or `None`.
pub fn solve(m: &Mat, b: &[Fe], field: &Arc<Field>) -> Option<Vec<Fe>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut aug: Mat = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r: Vec<Fe> = row.iter().map(|e| e.embed(field).unwrap()).collect();
            r.push(bi.embed(field).unwrap());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Fe::zero(field); cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[r][cols].clone();
    }
    Some(x)
}

pub fn inverse(m: &Mat) -> Result<Mat> {
    let n = m.len();
    let (field, u) =
        unify_matrix(m).ok_or_else(|| AswError::Dimension("empty matrix".into()))?;
    let mut aug: Mat = u
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            for j in 0..n {
                row.push(if i == j { Fe::one(&field) } else { Fe::zero(&field) });
            }
            row
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return Err(AswError::Inconsistent("matrix is singular".into()));
    }
    Ok(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn determinant(m: &Mat) -> Fe {
    let n = m.len();
    let (field, mut u) = unify_matrix(m).expect("nonempty matrix");
    let mut det = Fe::one(&field);
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !u[i][c].is_zero()) else {
            return Fe::zero(&field);
        };
        if pr != c {
            u.swap(pr, c);
            det = det.neg();
        }
        det = det.mul(&u[c][c]);
        let inv = u[c][c].inv().unwrap();
        for i in c + 1..n {
            if u[i][c].is_zero() {
                continue;
            }
            let factor = u[i][c].mul(&inv);
            let pivot_row = u[c].clone();
            for (x, y) in u[i].iter_mut().zip(&pivot_row) {
                *x = x.sub(&factor.mul(y));
            }
        }
    }
    det
}

/// Kernel of an `F_p`-matrix given as rows of residues, as residue vectors.
pub fn fp_kernel(rows: &[Vec<u32>], cols: usize, p: u32) -> Vec<Vec<u32>> {
    let pm = p as u64;
    let mut m: Vec<Vec<u32>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(pr) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, pr);
        let inv = crate::field::inv_mod(m[r][c], p) as u64;
        for x in m[r].iter_mut() {
            *x = ((*x as u64 * inv) % pm) as u32;
        }
        let pivot_row = m[r].clone();
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let f = m[i][c] as u64;
                for (x, &y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = ((*x as u64 + pm - (f * y as u64) % pm) % pm) as u32;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut out = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![0u32; cols];
        v[free] = 1;
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = (p - m[ri][free]) % p;
        }
        out.push(v);
    }
    out
}

/// Solve `m x = b` over `F_p`; `m` given by rows.
pub fn fp_solve(rows: &[Vec<u32>], b: &[u32], cols: usize, p: u32) -> Option<Vec<u32>> {
    let pm = p as u64;
    let mut m: Vec<Vec<u32>> = rows
        .iter()
        .zip(b)
        .map(|(r, &bi)| {
            let mut v = r.clone();
            v.push(bi);
            v
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..=cols {
        if r == m.len() {
            break;
        }
        let Some(pr) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        if c == cols {
            return None;
        }
        m.swap(r, pr);
        let inv = crate::field::inv_mod(m[r][c], p) as u64;
        for x in m[r].iter_mut() {
            *x = ((*x as u64 * inv) % pm) as u32;
        }
        let pivot_row = m[r].clone();
        for i in 0..m.len() {
            if i != r && m[i][c] != 0 {
                let f = m[i][c] as u64;
                for (x, &y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = ((*x as u64 + pm - (f * y as u64) % pm) % pm) as u32;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut x = vec![0u32; cols];
    for (ri, &pc) in pivots.iter().enumerate() {
        x[pc] = m[ri][cols];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldLattice;

    #[test]
    fn inverse_times_matrix_is_identity() {
        let lat = FieldLattice::get(5).unwrap();
        let f = lat.field(1).unwrap();
        let e = |v: i64| Fe::from_i64(&f, v);
        let m = vec![
            vec![e(1), e(1), e(2)],
            vec![e(3), e(4), e(2)],
            vec![e(0), e(0), e(3)],
        ];
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(&f, 3));
        assert_eq!(determinant(&m).as_prime(), Some(3));
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let lat = FieldLattice::get(3).unwrap();
        let f = lat.field(1).unwrap();
        let e = |v: i64| Fe::from_i64(&f, v);
        let m = vec![vec![e(1), e(2), e(0)], vec![e(2), e(1), e(0)]];
        let ker = kernel(&m, &f, 3);
        assert_eq!(ker.len(), 2);
        for v in ker {
            assert!(mat_vec(&m, &v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn fp_kernel_dimension() {
        let rows = vec![vec![1, 1, 0], vec![0, 0, 0]];
        let ker = fp_kernel(&rows, 3, 2);
        assert_eq!(ker.len(), 2);
    }
}
