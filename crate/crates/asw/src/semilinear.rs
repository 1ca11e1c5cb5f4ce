//! `sigma`-semilinear operators on coordinate spaces, `sigma = x -> x^q` with `q = p^a`.
//!
//! Row convention: `F(b_i) = sum_j m[i][j] b_j`, so on coordinates
//! `F(v) = M^T v^sigma`.

use std::sync::Arc;

use crate::error::{AswError, Result};
use crate::field::{common_field_of, Fe, Field};
use crate::linalg::{self, Mat};
use crate::solvers::{linearized_roots, solve_artin_schreier_scalar};

#[derive(Clone, Debug)]
pub struct SemilinearOperator {
    /// `q = p^twist`.
    twist: usize,
    matrix: Mat,
    field: Arc<Field>,
}

fn unify_vec(v: &[Fe], field: &Arc<Field>) -> Vec<Fe> {
    v.iter().map(|x| x.embed(field).unwrap()).collect()
}

fn field_of(vectors: &[&[Fe]], base: &Arc<Field>) -> Arc<Field> {
    let zero = Fe::zero(base);
    let mut refs: Vec<&Fe> = vec![&zero];
    for v in vectors {
        refs.extend(v.iter());
    }
    common_field_of(&refs)
}

impl SemilinearOperator {
    pub fn new(matrix: Mat, twist: usize) -> Result<SemilinearOperator> {
        let d = matrix.len();
        if d == 0 {
            return Err(AswError::Dimension("empty matrix".into()));
        }
        if matrix.iter().any(|r| r.len() != d) {
            return Err(AswError::Dimension("matrix is not square".into()));
        }
        if twist == 0 {
            return Err(AswError::Dimension("twist exponent must be positive".into()));
        }
        let (field, matrix) = linalg::unify_matrix(&matrix).unwrap();
        Ok(SemilinearOperator {
            twist,
            matrix,
            field,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn twist(&self) -> usize {
        self.twist
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    fn sigma(&self, x: &Fe) -> Fe {
        x.frobenius(self.twist)
    }

    /// `M^T v^sigma`.
    pub fn apply(&self, v: &[Fe]) -> Result<Vec<Fe>> {
        let d = self.dim();
        if v.len() != d {
            return Err(AswError::Dimension(format!(
                "vector of length {} for an operator of dimension {d}",
                v.len()
            )));
        }
        let field = field_of(&[v], &self.field);
        let sv: Vec<Fe> = v.iter().map(|x| self.sigma(&x.embed(&field).unwrap())).collect();
        let mut out = vec![Fe::zero(&field); d];
        for (i, row) in self.matrix.iter().enumerate() {
            if sv[i].is_zero() {
                continue;
            }
            for (j, m) in row.iter().enumerate() {
                if !m.is_zero() {
                    out[j] = out[j].add(&m.mul(&sv[i]));
                }
            }
        }
        Ok(out)
    }

    /// Coordinate matrix `A_k` with `F^k(v) = A_k sigma^k(v)`.
    fn power_matrix(&self, k: usize) -> Mat {
        let mt = linalg::transpose(&self.matrix);
        let mut acc = linalg::identity(&self.field, self.dim());
        for _ in 0..k {
            let twisted: Mat = acc
                .iter()
                .map(|r| r.iter().map(|x| self.sigma(x)).collect())
                .collect();
            acc = linalg::mat_mul(&mt, &twisted);
        }
        acc
    }

    /// Stabilisation index of `im F^k`, the first `k` with `rank A_k = rank A_{k+1}`.
    pub fn stabilisation_index(&self) -> usize {
        let mut prev = self.dim();
        let mut k = 0;
        loop {
            let r = linalg::rank(&self.power_matrix(k + 1));
            if r == prev {
                return k;
            }
            prev = r;
            k += 1;
        }
    }

    /// Dimension of the invertible part.
    pub fn stable_rank(&self) -> usize {
        linalg::rank(&self.power_matrix(self.stabilisation_index()))
    }

    /// Bases of `N = ker F^j` and `S = im F^j`.
    pub fn split_nilpotent_invertible(&self) -> (Vec<Vec<Fe>>, Vec<Vec<Fe>>) {
        let d = self.dim();
        let j = self.stabilisation_index();
        let a = self.power_matrix(j);
        // image: column space of A_j, via RREF of A_j^T
        let mut at = linalg::transpose(&a);
        let pivots = linalg::rref(&mut at);
        let image: Vec<Vec<Fe>> = at.into_iter().take(pivots.len()).collect();
        // kernel of F^j: sigma^{-j} of ker A_j
        let ker = linalg::kernel(&a, &self.field, d);
        let nil = ker
            .into_iter()
            .map(|v| {
                v.into_iter()
                    .map(|x| x.inverse_frobenius(j * self.twist))
                    .collect()
            })
            .collect();
        (nil, image)
    }

    /// Express `v` in the span of `vectors`, if possible.
    fn coordinates(vectors: &[Vec<Fe>], v: &[Fe]) -> Option<Vec<Fe>> {
        let d = v.len();
        let mut all: Vec<&[Fe]> = vectors.iter().map(|x| x.as_slice()).collect();
        all.push(v);
        let field = field_of(&all, v.first().map(|x| x.field()).unwrap());
        let m: Mat = (0..d)
            .map(|r| vectors.iter().map(|c| c[r].embed(&field).unwrap()).collect())
            .collect();
        if vectors.is_empty() {
            return if v.iter().all(|x| x.is_zero()) {
                Some(Vec::new())
            } else {
                None
            };
        }
        linalg::solve(&m, &unify_vec(v, &field), &field)
    }

    /// Fixed-point basis of `F` grown from `starts`, which must span an
    /// `F`-stable subspace on which `F` is invertible.
    fn fixed_points_from(&self, starts: &[Vec<Fe>]) -> Result<Vec<Vec<Fe>>> {
        let a = self.twist;
        let mut fixed: Vec<Vec<Fe>> = Vec::new();
        for start in starts {
            if Self::coordinates(&fixed, start).is_some() {
                continue;
            }
            // orbit a, F(a), ..., until dependent on fixed + earlier orbit
            let mut orbit = vec![start.clone()];
            let relation = loop {
                let next = self.apply(orbit.last().unwrap())?;
                let mut span = fixed.clone();
                span.extend(orbit.iter().cloned());
                if let Some(c) = Self::coordinates(&span, &next) {
                    break c;
                }
                orbit.push(next);
                if orbit.len() > self.dim() {
                    return Err(AswError::Inconsistent("orbit exceeds dimension".into()));
                }
            };
            let nfix = fixed.len();
            let j = orbit.len();
            let lam_fixed = &relation[..nfix];
            let lam = &relation[nfix..];
            if lam[0].is_zero() {
                return Err(AswError::Inconsistent(
                    "operator is not invertible on the orbit".into(),
                ));
            }
            // X - sum_l lam_l^{q^{j-l-1}} X^{q^{j-l}}
            let mut coeffs = vec![Fe::zero(lam[0].field()); j + 1];
            coeffs[0] = Fe::one(lam[0].field());
            for (l, lam_l) in lam.iter().enumerate() {
                coeffs[j - l] = lam_l.frobenius(a * (j - l - 1)).neg();
            }
            let roots = linearized_roots(&coeffs, a)?;
            for r in roots {
                let rq = r.frobenius(a);
                let mut alpha = vec![Fe::zero(r.field()); j];
                alpha[j - 1] = r.clone();
                if j > 1 {
                    alpha[0] = rq.mul(&lam[0]);
                    for l in 1..j - 1 {
                        alpha[l] = alpha[l - 1].frobenius(a).add(&rq.mul(&lam[l]));
                    }
                }
                let mut vec = vec![Fe::zero(r.field()); self.dim()];
                for (l, al) in alpha.iter().enumerate() {
                    for (slot, x) in vec.iter_mut().zip(&orbit[l]) {
                        *slot = slot.add(&al.mul(x));
                    }
                }
                for (i, li) in lam_fixed.iter().enumerate() {
                    // X - X^q = rq * li, i.e. X^q - X = -rq * li
                    let ai = solve_artin_schreier_scalar(&rq.mul(li).neg(), a)?;
                    for (slot, x) in vec.iter_mut().zip(&fixed[i]) {
                        *slot = slot.add(&ai.mul(x));
                    }
                }
                fixed.push(descend(&vec));
            }
        }
        Ok(fixed)
    }

    /// `F_q`-basis of the fixed points; requires an invertible matrix.
    pub fn fixed_points(&self) -> Result<Vec<Vec<Fe>>> {
        if linalg::rank(&self.matrix) != self.dim() {
            return Err(AswError::Inconsistent(
                "fixed-point basis needs an invertible matrix".into(),
            ));
        }
        let starts = linalg::identity(&self.field, self.dim());
        self.fixed_points_from(&starts)
    }

    /// Fixed-point basis of the invertible part (the full fixed space).
    pub fn fixed_points_of_invertible_part(&self) -> Result<Vec<Vec<Fe>>> {
        let (_, s) = self.split_nilpotent_invertible();
        self.fixed_points_from(&s)
    }

    /// A solution of `F(x) - x = m`.
    pub fn inhom_solve(&self, m: &[Fe]) -> Result<Vec<Fe>> {
        let d = self.dim();
        if m.len() != d {
            return Err(AswError::Dimension(format!(
                "vector of length {} for an operator of dimension {d}",
                m.len()
            )));
        }
        let (nil, ss) = self.split_nilpotent_invertible();
        let mut basis = nil.clone();
        basis.extend(ss.iter().cloned());
        let c = Self::coordinates(&basis, m)
            .ok_or_else(|| AswError::Inconsistent("N + S does not span".into()))?;
        let field = c.first().map(|x| x.field().clone()).unwrap_or(self.field.clone());
        let combine = |vs: &[Vec<Fe>], cs: &[Fe]| -> Vec<Fe> {
            let mut out = vec![Fe::zero(&field); d];
            for (v, cv) in vs.iter().zip(cs) {
                if cv.is_zero() {
                    continue;
                }
                for (slot, x) in out.iter_mut().zip(v) {
                    *slot = slot.add(&cv.mul(x));
                }
            }
            out
        };
        let m_nil = combine(&nil, &c[..nil.len()]);
        let m_ss = combine(&ss, &c[nil.len()..]);
        let mut x = vec![Fe::zero(&field); d];
        let mut n = m_nil;
        while n.iter().any(|v| !v.is_zero()) {
            for (slot, v) in x.iter_mut().zip(&n) {
                *slot = slot.sub(v);
            }
            n = self.apply(&n)?;
        }
        if m_ss.iter().any(|v| !v.is_zero()) {
            let fixed = self.fixed_points_from(&ss)?;
            let mf = Self::coordinates(&fixed, &m_ss)
                .ok_or_else(|| AswError::Inconsistent("fixed points do not span S".into()))?;
            for (f, mfi) in fixed.iter().zip(&mf) {
                let lam = solve_artin_schreier_scalar(mfi, self.twist)?;
                if lam.is_zero() {
                    continue;
                }
                for (slot, v) in x.iter_mut().zip(f) {
                    *slot = slot.add(&lam.mul(v));
                }
            }
        }
        Ok(descend(&x))
    }
}

/// Move every coordinate into the smallest common field containing them.
pub fn descend(v: &[Fe]) -> Vec<Fe> {
    let small: Vec<Fe> = v.iter().map(|x| x.minimal()).collect();
    crate::field::unify_all(&small)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldLattice;

    fn fp_matrix(p: u32, rows: &[&[i64]]) -> Mat {
        let lat = FieldLattice::get(p).unwrap();
        let f = lat.prime_field();
        rows.iter()
            .map(|r| r.iter().map(|&x| Fe::from_i64(&f, x)).collect())
            .collect()
    }

    #[test]
    fn splitting_of_rank_one_projection() {
        let op = SemilinearOperator::new(fp_matrix(3, &[&[1, 0], &[0, 0]]), 1).unwrap();
        let (n, s) = op.split_nilpotent_invertible();
        assert_eq!((n.len(), s.len()), (1, 1));
        assert!(s[0][0].is_one() && s[0][1].is_zero());
        assert_eq!(op.stable_rank(), 1);
    }

    #[test]
    fn swap_matrix_fixed_points_are_frobenius_pairs() {
        let op = SemilinearOperator::new(fp_matrix(2, &[&[0, 1], &[1, 0]]), 1).unwrap();
        let b = op.fixed_points().unwrap();
        assert_eq!(b.len(), 2);
        for v in &b {
            assert_eq!(op.apply(v).unwrap(), *v);
            assert_eq!(v[1], v[0].square());
        }
    }

    #[test]
    fn nilpotent_inhom_is_minus_m() {
        let op = SemilinearOperator::new(fp_matrix(5, &[&[0, 0], &[0, 0]]), 1).unwrap();
        let f = FieldLattice::get(5).unwrap().prime_field();
        let m = vec![Fe::from_u32(&f, 2), Fe::from_u32(&f, 3)];
        let x = op.inhom_solve(&m).unwrap();
        assert_eq!(x, vec![Fe::from_u32(&f, 3), Fe::from_u32(&f, 2)]);
    }
}
