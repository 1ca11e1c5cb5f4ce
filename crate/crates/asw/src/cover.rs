//! Witt vectors of adeles, `H^1(X, W_n(O_X))` arithmetic, the étale `Z/p^n`
//! basis and the maximal abelian `p^n`-cover.
//!
//! Witt operations on adeles are carried out locally: every coordinate is
//! expanded at each support point, combined in `W_n(k((t)))`, and only the
//! principal parts of the result are kept. The working precision is raised until
//! the result is known to `O(t^0)`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::adele::{coordinates_in_basis, find_function, principal_parts, AdeleClass, H1Basis, LocalAdele};
use crate::curve::{Curve, CurveFunction, Point};
use crate::error::{AswError, Result};
use crate::field::Fe;
use crate::intpoly::IntPoly;
use crate::laurent::{Laurent, EXACT};
use crate::linalg::{self, Mat};
use crate::semilinear::SemilinearOperator;
use crate::witt::{structure, witt_fp_to_int, WittVector};

/// A Witt vector `(r_0, ..., r_{n-1})` of adele classes on one curve.
#[derive(Clone, Debug, PartialEq)]
pub struct WittAdele {
    coords: Vec<AdeleClass>,
}

impl fmt::Display for WittAdele {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl WittAdele {
    pub fn new(coords: Vec<AdeleClass>) -> Result<WittAdele> {
        if coords.is_empty() {
            return Err(AswError::Dimension("a Witt adele needs at least one coordinate".into()));
        }
        let curve = coords[0].curve().clone();
        if coords.iter().any(|c| !Arc::ptr_eq(c.curve(), &curve)) {
            return Err(AswError::Inconsistent("Witt adele coordinates live on different curves".into()));
        }
        Ok(WittAdele { coords })
    }

    /// Teichmüller-style embedding `(r, 0, ..., 0)`.
    pub fn from_first(r: &AdeleClass, n: usize) -> WittAdele {
        let mut coords = vec![r.clone()];
        coords.extend((1..n).map(|_| AdeleClass::zero(r.curve())));
        WittAdele { coords }
    }

    pub fn curve(&self) -> &Arc<Curve> {
        self.coords[0].curve()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[AdeleClass] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &AdeleClass {
        &self.coords[i]
    }

    pub fn truncate(&self, m: usize) -> WittAdele {
        WittAdele {
            coords: self.coords[..m.min(self.len())].to_vec(),
        }
    }

    pub fn support(&self) -> Vec<Arc<Point>> {
        let mut s: Vec<Arc<Point>> = self.coords.iter().flat_map(|c| c.support()).collect();
        s.sort();
        s.dedup();
        s
    }

    fn pointwise(&self, o: &WittAdele, op: impl Fn(&WittVector<CurveFunction>, &WittVector<CurveFunction>) -> WittVector<CurveFunction>) -> Result<WittAdele> {
        if self.len() != o.len() {
            return Err(AswError::Dimension(format!(
                "Witt adeles of lengths {} and {}",
                self.len(),
                o.len()
            )));
        }
        let mut pts = self.support();
        pts.extend(o.support());
        pts.sort();
        pts.dedup();
        let n = self.len();
        let p = self.curve().characteristic();
        let mut entries: Vec<Vec<(Arc<Point>, CurveFunction)>> = vec![Vec::new(); n];
        for pt in &pts {
            let a = self.at(pt, p);
            let b = o.at(pt, p);
            let c = op(&a, &b);
            for (k, f) in c.coords().iter().enumerate() {
                entries[k].push((pt.clone(), f.clone()));
            }
        }
        let curve = self.curve().clone();
        Ok(WittAdele {
            coords: entries.into_iter().map(|e| AdeleClass::from_entries(&curve, e)).collect(),
        })
    }

    fn at(&self, pt: &Point, p: u32) -> WittVector<CurveFunction> {
        let zero = CurveFunction::zero(self.curve());
        WittVector::new(
            p,
            self.coords.iter().map(|c| c.at(pt).cloned().unwrap_or_else(|| zero.clone())).collect(),
        )
    }

    /// Exact Witt sum, point by point on rational functions.
    pub fn add(&self, o: &WittAdele) -> Result<WittAdele> {
        self.pointwise(o, |a, b| a.add(b))
    }

    pub fn neg(&self) -> WittAdele {
        let zero = WittAdele {
            coords: (0..self.len()).map(|_| AdeleClass::zero(self.curve())).collect(),
        };
        zero.pointwise(self, |_, b| b.neg()).unwrap()
    }

    pub fn sub(&self, o: &WittAdele) -> Result<WittAdele> {
        self.pointwise(o, |a, b| a.sub(b))
    }

    /// Exact multiplication by an element of `W_n(F_p)` given by its coordinates.
    pub fn scale_fp(&self, alpha: &[u32]) -> WittAdele {
        let alpha = alpha.to_vec();
        let zero = WittAdele {
            coords: (0..self.len()).map(|_| AdeleClass::zero(self.curve())).collect(),
        };
        zero.pointwise(self, move |_, b| b.scale_fp(&alpha)).unwrap()
    }

    /// Coordinatewise `p`-th power.
    pub fn frobenius(&self) -> WittAdele {
        WittAdele {
            coords: self.coords.iter().map(|c| c.frobenius(1)).collect(),
        }
    }
}

/// One coordinate of a Witt vector fed into a local computation.
#[derive(Clone)]
pub(crate) enum Coord {
    Adele(AdeleClass),
    Function(CurveFunction),
    Zero,
}

impl Coord {
    fn pole_order(&self, pt: &Point) -> Result<i64> {
        let v = match self {
            Coord::Adele(a) => match a.at(pt) {
                Some(f) => f.valuation(pt)?,
                None => None,
            },
            Coord::Function(f) => f.valuation(pt)?,
            Coord::Zero => None,
        };
        Ok(v.map_or(0, |v| (-v).max(0)))
    }

    fn expand(&self, curve: &Curve, pt: &Point, prec: i64) -> Result<Laurent> {
        let f = match self {
            Coord::Adele(a) => a.at(pt),
            Coord::Function(f) => Some(f),
            Coord::Zero => None,
        };
        match f {
            Some(f) => Ok(f.expand(pt, prec)?.truncate(prec)),
            None => Ok(Laurent::zero(curve.base_field())),
        }
    }
}

/// Expand `inputs` at every point of `support`, apply `op`, and return the
/// principal parts of each output slot as local adeles.
///
/// The start precision is `growth * m + 1`, where `m` is the largest pole order
/// among the inputs at the point.
pub(crate) fn evaluate_locally(
    curve: &Curve,
    support: &[Arc<Point>],
    inputs: &[Coord],
    growth: i64,
    op: &dyn Fn(&[Laurent]) -> Vec<Laurent>,
) -> Result<Vec<LocalAdele>> {
    let mut out: Vec<LocalAdele> = Vec::new();
    for pt in support {
        let mut m = 0;
        for c in inputs {
            m = m.max(c.pole_order(pt)?);
        }
        let mut prec = growth * m + 1;
        let mut rounds = 0;
        loop {
            let vals = inputs
                .iter()
                .map(|c| c.expand(curve, pt, prec))
                .collect::<Result<Vec<_>>>()?;
            let res = op(&vals);
            let worst = res.iter().map(|s| s.precision()).min().unwrap_or(EXACT);
            if worst >= 0 {
                if out.is_empty() {
                    out = vec![LocalAdele::new(); res.len()];
                }
                for (slot, s) in out.iter_mut().zip(res) {
                    slot.insert(pt.clone(), s.truncate(0));
                }
                break;
            }
            rounds += 1;
            if rounds > 12 {
                return Err(AswError::Inconsistent(format!(
                    "local Witt evaluation at {} does not converge",
                    pt.label()
                )));
            }
            prec += -worst + rounds * (m + 1);
        }
    }
    Ok(out)
}

fn witt_op(p: u32, width: usize, op: impl Fn(&[WittVector<Laurent>]) -> WittVector<Laurent>) -> impl Fn(&[Laurent]) -> Vec<Laurent> {
    move |vals: &[Laurent]| {
        let ws: Vec<WittVector<Laurent>> = vals
            .chunks(width)
            .map(|c| WittVector::new(p, c.to_vec()))
            .collect();
        op(&ws).into_coords()
    }
}

fn growth(p: u32, n: usize) -> i64 {
    (p as i64).pow(n.saturating_sub(1) as u32)
}

fn local_sub(a: &LocalAdele, b: &LocalAdele) -> LocalAdele {
    let mut out = a.clone();
    for (pt, s) in b {
        let v = match out.remove(pt) {
            Some(t) => t.sub(s),
            None => s.neg(),
        };
        out.insert(pt.clone(), v);
    }
    out
}

fn local_is_zero(a: &LocalAdele) -> bool {
    a.values().all(|s| s.truncate(0).is_zero())
}

fn adele_coords(r: &WittAdele) -> Vec<Coord> {
    r.coords().iter().map(|c| Coord::Adele(c.clone())).collect()
}

fn function_coords(h: &[CurveFunction], n: usize) -> Vec<Coord> {
    (0..n)
        .map(|i| h.get(i).map_or(Coord::Zero, |f| Coord::Function(f.clone())))
        .collect()
}

/// `(h_0, ..., h_{n-1})` with `r - h` everywhere regular, or `None` when the
/// class of `r` in `H^1(X, W_n(O_X))` is nonzero.
pub fn find_function_witt(support: &[Arc<Point>], r: &WittAdele) -> Result<Option<Vec<CurveFunction>>> {
    let curve = r.curve().clone();
    let p = curve.characteristic();
    let mut h: Vec<CurveFunction> = Vec::new();
    for i in 0..r.len() {
        let u = if i == 0 {
            r.coord(0).local(0)?
        } else {
            let w = i + 1;
            let mut inputs = adele_coords(&r.truncate(w));
            inputs.extend(function_coords(&h, w));
            let op = witt_op(p, w, |v| v[0].sub(&v[1]));
            evaluate_locally(&curve, support, &inputs, growth(p, w), &op)?.swap_remove(i)
        };
        match find_function(&curve, support, &principal_parts(&u))? {
            Some(hi) => h.push(hi),
            None => return Ok(None),
        }
    }
    Ok(Some(h))
}

/// One pole-order observation made while lifting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoleRecord {
    pub branch: usize,
    pub level: usize,
    pub order: i64,
    pub bound: i64,
}

/// Representatives of a `Z/p^n`-basis of `H^1_et(X, Z/p^n)`.
#[derive(Clone, Debug)]
pub struct H1EtBasis {
    pub o_basis: H1Basis,
    /// Points where representatives and pulled-back adeles may have poles;
    /// contains the points of `o_basis`.
    pub support: Vec<Arc<Point>>,
    pub level: usize,
    pub reps: Vec<WittAdele>,
    /// `h[i]` with `F(reps[i]) - reps[i] - h[i]` everywhere regular.
    pub h: Vec<Vec<CurveFunction>>,
    /// `lifts[i][j]`: coordinates of `reps[i]_j` in the `O_X` basis.
    pub lifts: Vec<Vec<Vec<Fe>>>,
    pub poles: Vec<PoleRecord>,
}

impl H1EtBasis {
    pub fn curve(&self) -> &Arc<Curve> {
        &self.o_basis.curve
    }

    pub fn support(&self) -> &[Arc<Point>] {
        &self.support
    }

    /// Allow poles at `extra` points as well.
    pub fn enlarge_support(&mut self, extra: &[Arc<Point>]) {
        self.support.extend(extra.iter().cloned());
        self.support.sort();
        self.support.dedup();
    }

    pub fn rank(&self) -> usize {
        self.reps.len()
    }

    pub fn truncate(&self, m: usize) -> H1EtBasis {
        let m = m.min(self.level);
        H1EtBasis {
            o_basis: self.o_basis.clone(),
            support: self.support.clone(),
            level: m,
            reps: self.reps.iter().map(|r| r.truncate(m)).collect(),
            h: self.h.iter().map(|h| h[..m].to_vec()).collect(),
            lifts: self.lifts.iter().map(|l| l[..m].to_vec()).collect(),
            poles: self.poles.iter().filter(|r| r.level < m).cloned().collect(),
        }
    }

    /// Check `F(r) - r - h` is everywhere regular for every representative.
    pub fn certify(&self) -> Result<()> {
        for (i, (r, h)) in self.reps.iter().zip(&self.h).enumerate() {
            if !wp_certificate(self.support(), r, h)? {
                return Err(AswError::Inconsistent(format!(
                    "Artin-Schreier-Witt certificate fails for basis element {i}"
                )));
            }
        }
        Ok(())
    }
}

/// Whether `F(r) - r - h` has no principal part at any point of `support`.
pub fn wp_certificate(support: &[Arc<Point>], r: &WittAdele, h: &[CurveFunction]) -> Result<bool> {
    let curve = r.curve().clone();
    let p = curve.characteristic();
    let n = r.len();
    if h.len() != n {
        return Err(AswError::Dimension("certificate needs as many functions as coordinates".into()));
    }
    let mut inputs = adele_coords(r);
    inputs.extend(function_coords(h, n));
    let op = witt_op(p, n, |v| {
        v[0].frobenius_with(|x| x.frobenius_power()).sub(&v[0]).sub(&v[1])
    });
    let out = evaluate_locally(&curve, support, &inputs, p as i64 * growth(p, n), &op)?;
    Ok(out.iter().all(local_is_zero))
}

fn fp_coordinates(beta: &[Fe]) -> Result<Vec<u32>> {
    beta.iter()
        .map(|b| {
            b.minimal().as_prime().ok_or_else(|| {
                AswError::Inconsistent(format!("coordinate {b} is not in the prime field"))
            })
        })
        .collect()
}

/// `(h, alpha)` with `r - h - sum alpha_i * reps[i]` everywhere regular, the
/// `alpha_i` being Witt coordinates in `W_n(F_p)`.
pub fn coordinates_in_basis_witt(
    basis: &H1EtBasis,
    r: &WittAdele,
) -> Result<(Vec<CurveFunction>, Vec<Vec<u32>>)> {
    let n = r.len();
    if n > basis.level {
        return Err(AswError::Dimension(format!(
            "Witt adele of length {n} against a basis of level {}",
            basis.level
        )));
    }
    let curve = basis.curve().clone();
    let p = curve.characteristic();
    let support = basis.support();
    let s = basis.rank();
    let mut alpha: Vec<Vec<u32>> = vec![Vec::new(); s];
    let mut h: Vec<CurveFunction> = Vec::new();
    for j in 0..n {
        let u = if j == 0 {
            r.coord(0).local(0)?
        } else {
            let w = j + 1;
            let mut inputs = adele_coords(&r.truncate(w));
            inputs.extend(function_coords(&h, w));
            for rep in &basis.reps {
                inputs.extend(adele_coords(&rep.truncate(w)));
            }
            let alphas: Vec<Vec<u32>> = alpha
                .iter()
                .map(|a| {
                    let mut a = a.clone();
                    a.push(0);
                    a
                })
                .collect();
            let op = witt_op(p, w, move |v| {
                let mut acc = v[0].sub(&v[1]);
                for (a, b) in alphas.iter().zip(&v[2..]) {
                    acc = acc.sub(&b.scale_fp(a));
                }
                acc
            });
            evaluate_locally(&curve, support, &inputs, growth(p, w), &op)?.swap_remove(j)
        };
        let cols = basis
            .reps
            .iter()
            .map(|rep| rep.coord(0).frobenius(j).local(0))
            .collect::<Result<Vec<_>>>()?;
        let (beta, hj) = coordinates_in_basis(&curve, support, &principal_parts(&u), &cols)?;
        for (a, b) in alpha.iter_mut().zip(fp_coordinates(&beta)?) {
            a.push(b);
        }
        h.push(hj);
    }
    Ok((h, alpha))
}

/// Integer coordinates in `Z/p^n` of the Witt coordinates returned above.
pub fn alpha_to_int(p: u32, alpha: &[u32]) -> BigInt {
    witt_fp_to_int(p, alpha)
}

fn combine(basis: &H1Basis, c: &[Fe]) -> AdeleClass {
    let mut acc = AdeleClass::zero(&basis.curve);
    for (ck, bk) in c.iter().zip(&basis.classes) {
        if !ck.is_zero() {
            acc = acc.add(&bk.scale(ck));
        }
    }
    acc
}

fn max_pole(a: &LocalAdele) -> i64 {
    a.values()
        .filter_map(|s| s.valuation())
        .map(|v| (-v).max(0))
        .max()
        .unwrap_or(0)
}

fn function_pole(f: &CurveFunction, support: &[Arc<Point>]) -> Result<i64> {
    let mut m = 0;
    for pt in support {
        if let Some(v) = f.valuation(pt)? {
            m = m.max(-v);
        }
    }
    Ok(m)
}

/// Adele, correction functions, level coordinates and pole records of one branch.
type LiftedBranch = (WittAdele, Vec<CurveFunction>, Vec<Vec<Fe>>, Vec<PoleRecord>);

/// Lift one level-1 representative `sum c_k b_k` to level `n`.
fn lift_branch(
    basis: &H1Basis,
    op: &SemilinearOperator,
    branch: usize,
    level1: &[Fe],
    n: usize,
) -> Result<LiftedBranch> {
    let curve = basis.curve.clone();
    let p = curve.characteristic();
    let support = &basis.points;
    let wstruct = structure(p, n)?;
    let r0 = combine(basis, level1);
    let d0 = local_sub(&r0.frobenius(1).local(0)?, &r0.local(0)?);
    let h0 = find_function(&curve, support, &principal_parts(&d0))?.ok_or_else(|| {
        AswError::Inconsistent(format!("branch {branch}: F(r) - r is not a global function mod regular adeles"))
    })?;
    let m = max_pole(&r0.local(0)?).max(function_pole(&h0, support)?);
    let mut rs = vec![r0];
    let mut hs = vec![h0];
    let mut lifts = vec![level1.to_vec()];
    let mut poles = Vec::new();
    for j in 1..n {
        let pj = wstruct.lift()[j].reduce_mod(p as u64);
        let mut inputs = Vec::with_capacity(2 * j);
        for i in 0..j {
            inputs.push(Coord::Adele(rs[i].clone()));
            inputs.push(Coord::Function(hs[i].clone()));
        }
        let eval = move |vals: &[Laurent]| vec![pj.eval(vals).neg()];
        let v = evaluate_locally(&curve, support, &inputs, growth(p, j + 1), &eval)?.swap_remove(0);
        let order = max_pole(&v);
        let bound = (p as i64).pow((j * (j + 1) / 2) as u32) * m;
        poles.push(PoleRecord {
            branch,
            level: j,
            order,
            bound,
        });
        if order > bound {
            return Err(AswError::PoleGrowth { level: j, order, bound });
        }
        let (u, _) = basis.coordinates(&v)?;
        let c = op.inhom_solve(&u)?;
        let rj = combine(basis, &c);
        let w = local_sub(&local_sub(&rj.frobenius(1).local(0)?, &rj.local(0)?), &v);
        let hj = find_function(&curve, support, &principal_parts(&w))?.ok_or_else(|| {
            AswError::Inconsistent(format!("branch {branch}, level {j}: residual class is nonzero"))
        })?;
        rs.push(rj);
        hs.push(hj);
        lifts.push(c);
    }
    Ok((WittAdele::new(rs)?, hs, lifts, poles))
}

/// Lift an `F_p`-basis of `H^1_et(X, Z/p)` (as coordinate vectors in the
/// `O_X` basis) to level `n`.
pub fn compute_h1(
    basis: &H1Basis,
    op: &SemilinearOperator,
    level1: &[Vec<Fe>],
    n: usize,
) -> Result<H1EtBasis> {
    if n == 0 {
        return Err(AswError::Dimension("level must be at least 1".into()));
    }
    let mut out = H1EtBasis {
        o_basis: basis.clone(),
        support: basis.points.clone(),
        level: n,
        reps: Vec::new(),
        h: Vec::new(),
        lifts: Vec::new(),
        poles: Vec::new(),
    };
    for (i, a) in level1.iter().enumerate() {
        let (r, h, lifts, poles) = lift_branch(basis, op, i, a, n)?;
        out.reps.push(r);
        out.h.push(h);
        out.lifts.push(lifts);
        out.poles.extend(poles);
    }
    Ok(out)
}

/// The Frobenius operator on coordinates for a Hasse-Witt matrix whose
/// column `i` holds the coordinates of `F(b_i)`.
pub fn frobenius_operator(hw: &Mat) -> Result<SemilinearOperator> {
    SemilinearOperator::new(linalg::transpose(hw), 1)
}

/// Certify `hw`, split off its invertible part and lift the fixed points.
pub fn compute_h1_from_hw(basis: &H1Basis, hw: &Mat, n: usize) -> Result<H1EtBasis> {
    basis.certify_hasse_witt(hw)?;
    let op = frobenius_operator(hw)?;
    let level1 = op.fixed_points_of_invertible_part()?;
    if level1.len() != op.stable_rank() {
        return Err(AswError::Inconsistent(format!(
            "{} fixed points but stable rank {}",
            level1.len(),
            op.stable_rank()
        )));
    }
    compute_h1(basis, &op, &level1, n)
}

/// `t_j^p - t_j = universal(t_0..t_{j-1}) + rhs` in branch `branch`.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerEquation {
    pub branch: usize,
    pub index: usize,
    /// `-Q_j` over the integers, variable `i` standing for `t_i`.
    pub universal: IntPoly,
    pub rhs: CurveFunction,
}

fn names(j: usize) -> Vec<String> {
    (0..j.max(1)).map(|i| format!("t_{i}")).collect()
}

impl TowerEquation {
    pub fn universal_mod_p(&self) -> IntPoly {
        self.universal.reduce_mod(self.rhs.curve().characteristic() as u64)
    }

    /// Universal part with integer coefficients, as displayed before reduction.
    pub fn universal_integer_string(&self) -> String {
        self.universal.display(&names(self.index))
    }

    fn lhs(&self) -> String {
        let p = self.rhs.curve().characteristic();
        format!("t_{j}^{p} - t_{j}", j = self.index)
    }

    fn rhs_string(&self, universal: &str) -> String {
        let h = format!("({})", self.rhs);
        if universal == "0" {
            h
        } else {
            format!("{universal} + {h}")
        }
    }

    /// Deterministic equation string with coefficients reduced mod `p`.
    pub fn equation(&self) -> String {
        let u = self.universal_mod_p().display(&names(self.index));
        format!("{} = {}", self.lhs(), self.rhs_string(&u))
    }

    /// Display with the integer universal part.
    pub fn equation_integer(&self) -> String {
        format!("{} = {}", self.lhs(), self.rhs_string(&self.universal_integer_string()))
    }
}

/// Function field tower of the maximal abelian étale `p^n`-cover.
#[derive(Clone, Debug)]
pub struct CoverTower {
    pub rank: usize,
    pub level: usize,
    pub equations: Vec<TowerEquation>,
}

impl CoverTower {
    /// Degree `p^{n s}` of the cover.
    pub fn degree(&self, p: u32) -> BigInt {
        BigInt::from(p).pow((self.rank * self.level) as u32)
    }

    pub fn branch(&self, i: usize) -> Vec<&TowerEquation> {
        self.equations.iter().filter(|e| e.branch == i).collect()
    }
}

/// Equations `wp(t^{(i)}) = h^{(i)}` coordinate by coordinate.
pub fn tower_from_basis(basis: &H1EtBasis) -> Result<CoverTower> {
    let p = basis.curve().characteristic();
    let n = basis.level;
    let s = structure(p, n)?;
    let mut equations = Vec::new();
    for (i, h) in basis.h.iter().enumerate() {
        for (j, hj) in h.iter().enumerate() {
            equations.push(TowerEquation {
                branch: i,
                index: j,
                universal: s.universal()[j].neg(),
                rhs: hj.clone(),
            });
        }
    }
    Ok(CoverTower {
        rank: basis.rank(),
        level: n,
        equations,
    })
}

/// Algorithm 9: the basis and its tower.
pub fn compute_maximal_cover(basis: &H1Basis, hw: &Mat, n: usize) -> Result<(H1EtBasis, CoverTower)> {
    let et = compute_h1_from_hw(basis, hw, n)?;
    let tower = tower_from_basis(&et)?;
    Ok((et, tower))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipoly::parse_bipoly;
    use crate::curve::{parse_function, Family, PointKind, PointSpec};
    use crate::field::{parse_fe, FieldLattice};

    pub(crate) fn hyperelliptic_71() -> (Arc<Curve>, H1Basis) {
        let lat = FieldLattice::get(3).unwrap();
        let f = lat.prime_field();
        let eq = parse_bipoly(&lat, "y^2 = x^5 + x^2 + 1").unwrap();
        let pts: Vec<PointSpec> = [(0, 2), (2, 2)]
            .iter()
            .map(|&(a, b)| PointSpec {
                kind: PointKind::Affine {
                    x: Fe::from_u32(&f, a),
                    y: Fe::from_u32(&f, b),
                },
                uniformiser: None,
            })
            .collect();
        let curve = Curve::new(&lat, 1, Family::Hyperelliptic, &eq, &pts).unwrap();
        let basis = H1Basis::from_points(&curve, curve.points()).unwrap();
        (curve, basis)
    }

    fn hw71(curve: &Arc<Curve>) -> Mat {
        let lat = curve.lattice();
        vec![
            vec![parse_fe(lat, "1").unwrap(), parse_fe(lat, "0").unwrap()],
            vec![parse_fe(lat, "0").unwrap(), parse_fe(lat, "0").unwrap()],
        ]
    }

    #[test]
    fn level_one_representative() {
        let (curve, basis) = hyperelliptic_71();
        let et = compute_h1_from_hw(&basis, &hw71(&curve), 1).unwrap();
        assert_eq!(et.rank(), 1);
        let r0 = et.reps[0].coord(0);
        assert_eq!(r0.support(), vec![curve.points()[0].clone()]);
        let x = parse_function(&curve, "1/x").unwrap();
        let f = r0.at(&curve.points()[0]).unwrap();
        let ratio = f.div(&x).unwrap();
        assert!(ratio.is_constant());
        et.certify().unwrap();
    }

    #[test]
    fn level_two_tower() {
        let (curve, basis) = hyperelliptic_71();
        let (et, tower) = compute_maximal_cover(&basis, &hw71(&curve), 2).unwrap();
        et.certify().unwrap();
        assert_eq!(tower.equations.len(), 2);
        assert_eq!(tower.equations[1].universal_integer_string(), "-t_0^7 + t_0^5");
    }

    #[test]
    fn zero_witt_adele_has_zero_function() {
        let (curve, basis) = hyperelliptic_71();
        let r = WittAdele::new(vec![AdeleClass::zero(&curve), AdeleClass::zero(&curve)]).unwrap();
        let h = find_function_witt(&basis.points, &r).unwrap().unwrap();
        assert!(h.iter().all(|f| f.is_zero()));
    }

    #[test]
    fn level_three_universal_part() {
        let (curve, basis) = hyperelliptic_71();
        let (et, tower) = compute_maximal_cover(&basis, &hw71(&curve), 3).unwrap();
        et.certify().unwrap();
        let expected = "-t_0^25 + 4*t_0^23 - 9*t_0^21 + 13*t_0^19 - 13*t_0^17 + 9*t_0^15 - 4*t_0^13 + t_0^11";
        let third = &tower.equations[2];
        let pure = third.universal.kill_vars(&[1]);
        assert_eq!(pure.display(&["t_0".to_string()]), expected);
        let r1 = et.reps[0].coord(1);
        assert_eq!(r1.support().len(), 2);
        for r in &et.poles {
            assert!(r.order <= r.bound);
        }
    }

    fn fermat() -> (Arc<Curve>, H1Basis, Mat) {
        let lat = FieldLattice::get(5).unwrap();
        let f = lat.prime_field();
        let eq = parse_bipoly(&lat, "x^4 + y^4 - 1").unwrap();
        let pts: Vec<PointSpec> = [(0, 4), (0, 3), (4, 0)]
            .iter()
            .map(|&(a, b)| PointSpec {
                kind: PointKind::Affine {
                    x: Fe::from_u32(&f, a),
                    y: Fe::from_u32(&f, b),
                },
                uniformiser: None,
            })
            .collect();
        let curve = Curve::new(&lat, 1, Family::SmoothPlane, &eq, &pts).unwrap();
        let basis = H1Basis::from_points(&curve, curve.points()).unwrap();
        let m = |r: [u32; 3]| r.iter().map(|&v| Fe::from_u32(&f, v)).collect::<Vec<_>>();
        let hw = vec![m([1, 1, 2]), m([3, 4, 2]), m([0, 0, 3])];
        (curve, basis, hw)
    }

    #[test]
    fn fermat_level_two() {
        let (_, basis, hw) = fermat();
        let (et, tower) = compute_maximal_cover(&basis, &hw, 2).unwrap();
        assert_eq!(et.rank(), 3);
        assert_eq!(tower.equations.len(), 6);
        et.certify().unwrap();
    }
}
