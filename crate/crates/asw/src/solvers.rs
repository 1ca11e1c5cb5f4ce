//! Field-level solvers: Artin-Schreier equations and roots of q-linearised polynomials.

use std::sync::Arc;

use num_integer::Integer;

use crate::error::{AswError, Result};
use crate::field::{Fe, Field};
use crate::linalg::{fp_kernel, fp_solve};
use crate::upoly::UPoly;

const MAX_ENUMERATION: usize = 1 << 22;

/// Every element of a (small) field, in ascending order.
pub fn field_elements(field: &Arc<Field>) -> Vec<Fe> {
    let p = field.characteristic() as usize;
    let m = field.degree();
    let total = p.pow(m as u32);
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0u32; m];
    for _ in 0..total {
        out.push(Fe::from_coeffs(field, digits.clone()));
        for d in digits.iter_mut() {
            *d += 1;
            if *d as usize == p {
                *d = 0;
            } else {
                break;
            }
        }
    }
    out.sort();
    out
}

/// Matrix (rows = output coordinates) of the `F_p`-linear map `x -> sum_l c_l x^{q^l}` on `field`.
fn linear_map_matrix(field: &Arc<Field>, coeffs: &[Fe], a: usize) -> Vec<Vec<u32>> {
    let n = field.degree();
    let coeffs: Vec<Fe> = coeffs.iter().map(|c| c.embed(field).unwrap()).collect();
    let mut cols: Vec<Vec<u32>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut basis = vec![0u32; n];
        basis[i] = 1;
        let mut x = Fe::from_coeffs(field, basis);
        let mut acc = Fe::zero(field);
        for c in &coeffs {
            if !c.is_zero() {
                acc = acc.add(&c.mul(&x));
            }
            x = x.frobenius(a);
        }
        cols.push(acc.coeffs().to_vec());
    }
    (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect()
}

/// A solution of `X^q - X = c` with `q = p^a`: the smallest element of the
/// solution coset `lambda + F_q`.
pub fn solve_artin_schreier_scalar(c: &Fe, a: usize) -> Result<Fe> {
    let lat = c.field().lattice();
    let p = c.characteristic() as usize;
    let fq = lat.field(a)?;
    if c.is_zero() {
        return Ok(Fe::zero(c.field()));
    }
    let base = c.degree().lcm(&a);
    for ext in [base, base * p] {
        let e = lat.field(ext)?;
        let one = Fe::one(&e);
        let mat = linear_map_matrix(&e, &[one.neg(), one], a);
        let rhs = c.embed(&e)?;
        if let Some(sol) = fp_solve(&mat, rhs.coeffs(), ext, p as u32) {
            let lambda = Fe::from_coeffs(&e, sol);
            let best = field_elements(&fq)
                .into_iter()
                .map(|t| lambda.add(&t.embed(&e).unwrap()))
                .min()
                .unwrap();
            return Ok(best);
        }
    }
    Err(AswError::Inconsistent(
        "Artin-Schreier equation has no solution in the expected extension".into(),
    ))
}

/// An `F_q`-basis (q = p^a) of the roots of `sum_i coeffs[i] X^{q^i}`.
///
/// The basis is built greedily from the sorted list of all roots, skipping roots
/// already in the span of those taken, so it is canonical for the chosen lattice.
pub fn linearized_roots(coeffs: &[Fe], a: usize) -> Result<Vec<Fe>> {
    if coeffs.is_empty() {
        return Err(AswError::Dimension("empty linearised polynomial".into()));
    }
    if coeffs[0].is_zero() {
        return Err(AswError::NonSeparable);
    }
    let top = coeffs.iter().rposition(|c| !c.is_zero()).unwrap();
    if top == 0 {
        return Ok(Vec::new());
    }
    let coeffs = crate::field::unify_all(&coeffs[..=top]);
    let field = coeffs[0].field().clone();
    let lat = field.lattice();
    let p = field.characteristic() as usize;
    let q = p.pow(a as u32);
    let degree = q.pow(top as u32);
    // explicit polynomial for the splitting degree
    let mut dense = vec![Fe::zero(&field); degree + 1];
    for (i, c) in coeffs.iter().enumerate() {
        dense[q.pow(i as u32)] = c.clone();
    }
    let poly = UPoly::new(&field, dense);
    let k = poly.splitting_degree();
    let ext = (field.degree() * k).lcm(&a);
    let e = lat.field(ext)?;
    let mat = linear_map_matrix(&e, &coeffs, a);
    let kernel = fp_kernel(&mat, ext, p as u32);
    if kernel.len() != a * top {
        return Err(AswError::Inconsistent(format!(
            "root space has F_p-dimension {} instead of {}",
            kernel.len(),
            a * top
        )));
    }
    let count = p.checked_pow(kernel.len() as u32).unwrap_or(usize::MAX);
    if count > MAX_ENUMERATION {
        return Err(AswError::Unsupported(format!(
            "root space of size {count} too large to enumerate"
        )));
    }
    let mut roots = Vec::with_capacity(count);
    let mut digits = vec![0u32; kernel.len()];
    for _ in 0..count {
        let mut v = vec![0u64; ext];
        for (d, kv) in digits.iter().zip(&kernel) {
            if *d != 0 {
                for (slot, &x) in v.iter_mut().zip(kv) {
                    *slot += *d as u64 * x as u64;
                }
            }
        }
        roots.push(Fe::from_coeffs(
            &e,
            v.into_iter().map(|x| (x % p as u64) as u32).collect(),
        ));
        for d in digits.iter_mut() {
            *d += 1;
            if *d as usize == p {
                *d = 0;
            } else {
                break;
            }
        }
    }
    roots.sort();
    Ok(greedy_fq_basis(&roots, a, &e))
}

/// Greedy `F_q`-independent subsequence of `candidates` (all in `field`).
pub fn greedy_fq_basis(candidates: &[Fe], a: usize, field: &Arc<Field>) -> Vec<Fe> {
    let lat = field.lattice();
    let fq = lat.field(a).unwrap();
    let p = field.characteristic();
    let fq_basis: Vec<Fe> = (0..a)
        .map(|i| {
            let mut c = vec![0u32; a];
            c[i] = 1;
            Fe::from_coeffs(&fq, c).embed(field).unwrap()
        })
        .collect();
    let mut echelon: Vec<(usize, Vec<u32>)> = Vec::new();
    let mut chosen = Vec::new();
    for r in candidates {
        if r.is_zero() {
            continue;
        }
        let r = r.embed(field).unwrap();
        if reduce_against(&echelon, r.coeffs(), p).iter().all(|&x| x == 0) {
            continue;
        }
        chosen.push(r.clone());
        for b in &fq_basis {
            let v = reduce_against(&echelon, b.mul(&r).coeffs(), p);
            if let Some(pc) = v.iter().position(|&x| x != 0) {
                let inv = crate::field::inv_mod(v[pc], p) as u64;
                let v: Vec<u32> = v.iter().map(|&x| ((x as u64 * inv) % p as u64) as u32).collect();
                echelon.push((pc, v));
            }
        }
    }
    chosen
}

fn reduce_against(echelon: &[(usize, Vec<u32>)], v: &[u32], p: u32) -> Vec<u32> {
    let pm = p as u64;
    let mut v = v.to_vec();
    for (pc, row) in echelon {
        let c = v[*pc];
        if c != 0 {
            for (x, &y) in v.iter_mut().zip(row) {
                *x = ((*x as u64 + pm - (c as u64 * y as u64) % pm) % pm) as u32;
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldLattice;

    #[test]
    fn zero_right_hand_side() {
        let lat = FieldLattice::get(3).unwrap();
        let f = lat.field(1).unwrap();
        assert!(solve_artin_schreier_scalar(&Fe::zero(&f), 1).unwrap().is_zero());
    }

    #[test]
    fn identity_polynomial_has_no_roots() {
        let lat = FieldLattice::get(3).unwrap();
        let f = lat.field(1).unwrap();
        assert!(linearized_roots(&[Fe::one(&f)], 1).unwrap().is_empty());
    }

    #[test]
    fn non_separable_rejected() {
        let lat = FieldLattice::get(3).unwrap();
        let f = lat.field(1).unwrap();
        let err = linearized_roots(&[Fe::zero(&f), Fe::one(&f)], 1).unwrap_err();
        assert_eq!(err, AswError::NonSeparable);
    }
}
