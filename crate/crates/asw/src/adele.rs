//! Adele classes modulo everywhere-regular adeles, Riemann-Roch spaces and
//! the linear systems behind function finding and coordinates in `H^1(X, O_X)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::bipoly::{upoly_series, BiPoly};
use crate::curve::{Curve, CurveFunction, Family, Point, PointKind};
use crate::error::{AswError, Result};
use crate::field::{common_field_of, Fe, Field};
use crate::laurent::Laurent;
use crate::linalg;
use crate::upoly::UPoly;

pub type Divisor = BTreeMap<Arc<Point>, i64>;

/// Local data of an adele: at each point, a Laurent series known at least up
/// to `O(t^0)`, so that its principal part is determined.
pub type LocalAdele = BTreeMap<Arc<Point>, Laurent>;

/// A finite list of `(point, function)` pairs; the class modulo adeles that
/// are regular everywhere.
#[derive(Clone)]
pub struct AdeleClass {
    curve: Arc<Curve>,
    entries: Vec<(Arc<Point>, CurveFunction)>,
}

impl PartialEq for AdeleClass {
    fn eq(&self, o: &AdeleClass) -> bool {
        self.entries.len() == o.entries.len()
            && self
                .entries
                .iter()
                .zip(&o.entries)
                .all(|((p, f), (q, g))| p == q && f == g)
    }
}

impl fmt::Debug for AdeleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for AdeleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(p, g)| format!("({g}) delta{}", p.label()))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl AdeleClass {
    pub fn zero(curve: &Arc<Curve>) -> AdeleClass {
        AdeleClass {
            curve: curve.clone(),
            entries: Vec::new(),
        }
    }

    /// `f` at `pt`, zero elsewhere.
    pub fn delta(pt: &Arc<Point>, f: &CurveFunction) -> AdeleClass {
        AdeleClass::from_entries(f.curve(), vec![(pt.clone(), f.clone())])
    }

    pub fn from_entries(curve: &Arc<Curve>, entries: Vec<(Arc<Point>, CurveFunction)>) -> AdeleClass {
        let mut map: BTreeMap<Arc<Point>, CurveFunction> = BTreeMap::new();
        for (p, f) in entries {
            let v = match map.remove(&p) {
                Some(g) => g.add(&f),
                None => f,
            };
            map.insert(p, v);
        }
        AdeleClass {
            curve: curve.clone(),
            entries: map.into_iter().filter(|(_, f)| !f.is_zero()).collect(),
        }
    }

    pub fn curve(&self) -> &Arc<Curve> {
        &self.curve
    }

    pub fn entries(&self) -> &[(Arc<Point>, CurveFunction)] {
        &self.entries
    }

    pub fn support(&self) -> Vec<Arc<Point>> {
        self.entries.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn at(&self, pt: &Point) -> Option<&CurveFunction> {
        self.entries.iter().find(|(p, _)| **p == *pt).map(|(_, f)| f)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, o: &AdeleClass) -> AdeleClass {
        let mut all = self.entries.clone();
        all.extend(o.entries.iter().cloned());
        AdeleClass::from_entries(&self.curve, all)
    }

    pub fn neg(&self) -> AdeleClass {
        AdeleClass {
            curve: self.curve.clone(),
            entries: self.entries.iter().map(|(p, f)| (p.clone(), f.neg())).collect(),
        }
    }

    pub fn sub(&self, o: &AdeleClass) -> AdeleClass {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Fe) -> AdeleClass {
        AdeleClass::from_entries(
            &self.curve,
            self.entries.iter().map(|(p, f)| (p.clone(), f.scale(c))).collect(),
        )
    }

    /// Pointwise `p^k`-th power.
    pub fn frobenius(&self, k: usize) -> AdeleClass {
        let mut entries = self.entries.clone();
        for _ in 0..k {
            entries = entries.into_iter().map(|(p, f)| (p, f.frobenius())).collect();
        }
        AdeleClass::from_entries(&self.curve, entries)
    }

    /// Drop entries regular at their point.
    pub fn normalized(&self) -> Result<AdeleClass> {
        let mut out = Vec::new();
        for (p, f) in &self.entries {
            if f.valuation(p)?.is_some_and(|v| v < 0) {
                out.push((p.clone(), f.clone()));
            }
        }
        Ok(AdeleClass {
            curve: self.curve.clone(),
            entries: out,
        })
    }

    /// Expansions up to `O(t^prec)` at every support point.
    pub fn local(&self, prec: i64) -> Result<LocalAdele> {
        let mut out = LocalAdele::new();
        for (p, f) in &self.entries {
            out.insert(p.clone(), f.expand(p, prec)?.truncate(prec));
        }
        Ok(out)
    }

    /// Minimum valuation over the support (`0` when empty).
    pub fn min_valuation(&self) -> Result<i64> {
        let mut m = 0;
        for (p, f) in &self.entries {
            if let Some(v) = f.valuation(p)? {
                m = m.min(v);
            }
        }
        Ok(m)
    }
}

/// Principal parts only: drop nonnegative powers.
pub fn principal_parts(a: &LocalAdele) -> LocalAdele {
    a.iter()
        .map(|(p, s)| (p.clone(), s.truncate(0)))
        .filter(|(_, s)| s.valuation().is_some())
        .collect()
}

/// Pole order of a series (`0` if regular).
fn pole_order(s: &Laurent) -> i64 {
    match s.valuation() {
        Some(v) if v < 0 => -v,
        _ => 0,
    }
}

/// Functions `num / den` with poles bounded by a divisor supported on points
/// whose `x`-coordinates are listed, plus the point at infinity.
struct PoleSpace {
    den: UPoly,
    nums: Vec<BiPoly>,
    /// index of the candidate `x^{deg den}` (value at infinity) when available
    top_x: Option<usize>,
    lines: Vec<Fe>,
}

fn pole_space(curve: &Arc<Curve>, bound: &Divisor) -> PoleSpace {
    let base = curve.base_field().clone();
    let mut lines: Vec<(Fe, i64)> = Vec::new();
    let mut at_infinity = 0;
    for (p, &d) in bound {
        match p.kind() {
            PointKind::Infinity => at_infinity = at_infinity.max(d),
            PointKind::Affine { x, .. } => match lines.iter_mut().find(|(x0, _)| x0 == x) {
                Some(e) => e.1 = e.1.max(d),
                None => lines.push((x.clone(), d)),
            },
        }
    }
    let mut den = UPoly::one(&base);
    let mut e = 0usize;
    for (x0, d) in &lines {
        if *d > 0 {
            den = den.mul(&UPoly::linear(x0).pow(*d as usize));
            e += *d as usize;
        }
    }
    let one = Fe::one(&base);
    let mut nums = Vec::new();
    let mut top_x = None;
    match curve.family() {
        Family::Hyperelliptic => {
            let g = curve.genus();
            let b = at_infinity.max(0) as usize + 2 * e;
            for a in 0..=b / 2 {
                if a == e && at_infinity <= 0 {
                    top_x = Some(nums.len());
                }
                nums.push(BiPoly::monomial(&one, a, 0));
            }
            let mut a = 0;
            while 2 * a + 2 * g < b {
                nums.push(BiPoly::monomial(&one, a, 1));
                a += 1;
            }
        }
        Family::SmoothPlane => {
            let d = curve.y_degree();
            for b in 0..d.min(e + 1) {
                for a in 0..=(e - b) {
                    nums.push(BiPoly::monomial(&one, a, b));
                }
            }
        }
    }
    PoleSpace {
        den,
        nums,
        top_x,
        lines: lines.into_iter().map(|(x, _)| x).collect(),
    }
}

/// Series of every candidate at `pt`, each known at least up to `O(t^hi)`.
fn candidate_series(curve: &Curve, space: &PoleSpace, pt: &Point, hi: i64) -> Result<Vec<Laurent>> {
    let mut rel = (hi + 2 * space.den.deg_or_zero() as i64 + 8).max(8);
    for _ in 0..12 {
        let (xs, ys) = curve.local_param(pt, rel)?;
        let dser = upoly_series(&space.den, &xs);
        if dser.valuation().is_none() {
            rel *= 2;
            continue;
        }
        let dinv = dser.inv(rel as usize)?;
        let amax = space.nums.iter().map(|m| m.terms()[0].1).max().unwrap_or(0) as i64;
        let bmax = space.nums.iter().map(|m| m.terms()[0].2).max().unwrap_or(0) as i64;
        let vx = xs.valuation().unwrap_or(0).min(0);
        let vy = ys.valuation().unwrap_or(0).min(0);
        let keep = hi + 1 - vx * amax - vy * bmax;
        let mut out = Vec::with_capacity(space.nums.len());
        let mut ypows: Vec<Laurent> = vec![dinv.clone()];
        let mut xpows_by_b: Vec<Laurent> = Vec::new();
        let mut last_b = usize::MAX;
        for num in &space.nums {
            let (_, a, b) = num.terms()[0].clone();
            while ypows.len() <= b {
                let next = ypows.last().unwrap().mul(&ys).truncate(keep);
                ypows.push(next);
            }
            if b != last_b {
                xpows_by_b = vec![ypows[b].clone()];
                last_b = b;
            }
            while xpows_by_b.len() <= a {
                let next = xpows_by_b.last().unwrap().mul(&xs).truncate(keep);
                xpows_by_b.push(next);
            }
            out.push(xpows_by_b[a].clone());
        }
        if out.iter().all(|s| s.precision() >= hi) {
            return Ok(out);
        }
        rel *= 2;
    }
    Err(AswError::Inconsistent(format!(
        "local expansions at {} lose too much precision",
        pt.label()
    )))
}

/// Points where the linear conditions are imposed: every point above the
/// lines through the divisor's affine points, and infinity when present.
fn check_points(curve: &Arc<Curve>, space: &PoleSpace, extra: &[Arc<Point>]) -> Result<Vec<Arc<Point>>> {
    let mut pts: Vec<Arc<Point>> = Vec::new();
    for x0 in &space.lines {
        for p in curve.line_points(x0)? {
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
    }
    if let Some(inf) = curve.infinity() {
        if !pts.contains(inf) {
            pts.push(inf.clone());
        }
    }
    for p in extra {
        if !pts.contains(p) {
            pts.push(p.clone());
        }
    }
    Ok(pts)
}

fn assemble(space: &PoleSpace, coeffs: &[Fe], curve: &Arc<Curve>) -> Result<CurveFunction> {
    let field = common_field_of(&coeffs.iter().collect::<Vec<_>>());
    let mut num = BiPoly::zero(&field);
    for (c, m) in coeffs.iter().zip(&space.nums) {
        if !c.is_zero() {
            num = num.add(&m.embed(&field).scale(c));
        }
    }
    Ok(CurveFunction::from_parts(curve, &num, &space.den)?.descend())
}

/// Basis of `H^0(X, O(D))`, in reduced echelon form over the candidate monomials.
pub fn riemann_roch_basis(curve: &Arc<Curve>, divisor: &Divisor) -> Result<Vec<CurveFunction>> {
    let degree: i64 = divisor.values().sum();
    if degree < 0 {
        return Ok(Vec::new());
    }
    let bound: Divisor = divisor.iter().map(|(p, &d)| (p.clone(), d.max(0))).collect();
    let space = pole_space(curve, &bound);
    let pts = check_points(curve, &space, &divisor.keys().cloned().collect::<Vec<_>>())?;
    let ncols = space.nums.len();
    let mut rows: Vec<Vec<Fe>> = Vec::new();
    for pt in &pts {
        let d = divisor.get(pt).copied().unwrap_or(0);
        let hi = -d;
        let cols = candidate_series(curve, &space, pt, hi)?;
        let lo = cols.iter().map(|s| s.valuation_lower_bound()).min().unwrap_or(hi).min(hi);
        for k in lo..hi {
            rows.push(cols.iter().map(|s| s.coefficient(k)).collect());
        }
    }
    let field = match linalg::unify_matrix(&rows) {
        Some((f, _)) => f,
        None => curve.base_field().clone(),
    };
    let mut out = Vec::new();
    for v in linalg::kernel(&rows, &field, ncols) {
        let v: Vec<Fe> = v.into_iter().map(|c| c.minimal()).collect();
        out.push(assemble(&space, &v, curve)?);
    }
    Ok(out)
}

/// Whether `g` points form a non-special system (`h^0(P_1 + ... + P_g) = 1`).
pub fn is_nonspecial(curve: &Arc<Curve>, points: &[Arc<Point>]) -> Result<bool> {
    if points.len() != curve.genus() {
        return Err(AswError::Dimension(format!(
            "expected {} points, got {}",
            curve.genus(),
            points.len()
        )));
    }
    let mut d = Divisor::new();
    for p in points {
        *d.entry(p.clone()).or_insert(0) += 1;
    }
    Ok(riemann_roch_basis(curve, &d)?.len() == 1)
}

/// The core solve: find `beta` and `h` with
/// `pp(sum beta_j b_j + h) = pp(target)` at every point of `support`,
/// `h` having poles only at `support`.
fn solve_principal_parts(
    curve: &Arc<Curve>,
    support: &[Arc<Point>],
    target: &LocalAdele,
    basis: &[LocalAdele],
) -> Result<Option<(Vec<Fe>, CurveFunction)>> {
    for (p, s) in target.iter().chain(basis.iter().flatten()) {
        if !support.contains(p) && s.valuation().is_some_and(|v| v < 0) {
            return Err(AswError::Inconsistent(format!(
                "adele has a pole at {} outside the working support",
                p.label()
            )));
        }
        if s.precision() < 0 {
            return Err(AswError::Inconsistent(format!(
                "principal part at {} not determined",
                p.label()
            )));
        }
    }
    let mut bound = Divisor::new();
    for p in support {
        let mut d = target.get(p).map(pole_order).unwrap_or(0);
        for b in basis {
            d = d.max(b.get(p).map(pole_order).unwrap_or(0));
        }
        bound.insert(p.clone(), d);
    }
    let space = pole_space(curve, &bound);
    let pts = check_points(curve, &space, support)?;
    let g = basis.len();
    let ncols = g + space.nums.len();
    let mut rows: Vec<Vec<Fe>> = Vec::new();
    let mut rhs: Vec<Fe> = Vec::new();
    let zero = Fe::zero(curve.base_field());
    for pt in &pts {
        let cands = candidate_series(curve, &space, pt, 0)?;
        let mut lo = cands.iter().map(|s| s.valuation_lower_bound()).min().unwrap_or(0);
        let t = target.get(pt);
        if let Some(t) = t {
            lo = lo.min(t.valuation_lower_bound());
        }
        for b in basis {
            if let Some(s) = b.get(pt) {
                lo = lo.min(s.valuation_lower_bound());
            }
        }
        for k in lo.min(0)..0 {
            let mut row = Vec::with_capacity(ncols);
            for b in basis {
                row.push(b.get(pt).map(|s| s.coefficient(k)).unwrap_or_else(|| zero.clone()));
            }
            row.extend(cands.iter().map(|s| s.coefficient(k)));
            if row.iter().all(|c| c.is_zero()) && t.map(|s| s.coefficient(k).is_zero()).unwrap_or(true) {
                continue;
            }
            rows.push(row);
            rhs.push(t.map(|s| s.coefficient(k)).unwrap_or_else(|| zero.clone()));
        }
    }
    // pin the additive constant of h
    let mut norm = vec![zero.clone(); ncols];
    if let Some(i) = space.top_x {
        norm[g + i] = Fe::one(curve.base_field());
    } else {
        let aux = curve.auxiliary_point()?;
        let (xa, ya) = aux.coordinates().unwrap();
        let dval = space.den.eval(xa);
        let dinv = dval.inv().ok_or_else(|| AswError::Inconsistent("auxiliary point on a pole line".into()))?;
        for (i, m) in space.nums.iter().enumerate() {
            norm[g + i] = m.eval(xa, ya).mul(&dinv);
        }
    }
    rows.push(norm);
    rhs.push(zero.clone());
    let mut all: Vec<&Fe> = rows.iter().flatten().collect();
    all.extend(rhs.iter());
    let field: Arc<Field> = common_field_of(&all);
    let sol = match linalg::solve(&rows, &rhs, &field) {
        Some(s) => s,
        None => return Ok(None),
    };
    let beta: Vec<Fe> = sol[..g].iter().map(|c| c.minimal()).collect();
    let h = assemble(&space, &sol[g..], curve)?;
    Ok(Some((beta, h)))
}

/// A function with the given principal parts on `support` and no other
/// poles, or `None` when the adele's class in `H^1(X, O_X)` is nonzero.
pub fn find_function(curve: &Arc<Curve>, support: &[Arc<Point>], r: &LocalAdele) -> Result<Option<CurveFunction>> {
    Ok(solve_principal_parts(curve, support, r, &[])?.map(|(_, h)| h))
}

/// `(beta, h)` with `r - sum beta_j b_j - h` everywhere regular.
pub fn coordinates_in_basis(
    curve: &Arc<Curve>,
    support: &[Arc<Point>],
    r: &LocalAdele,
    basis: &[LocalAdele],
) -> Result<(Vec<Fe>, CurveFunction)> {
    solve_principal_parts(curve, support, r, basis)?.ok_or_else(|| {
        AswError::Inconsistent("adele is not in the span of the given classes".into())
    })
}

/// A basis of `H^1(X, O_X)` from a non-special system of points.
#[derive(Clone, Debug)]
pub struct H1Basis {
    pub curve: Arc<Curve>,
    pub points: Vec<Arc<Point>>,
    pub classes: Vec<AdeleClass>,
}

impl H1Basis {
    pub fn from_points(curve: &Arc<Curve>, points: &[Arc<Point>]) -> Result<H1Basis> {
        if !is_nonspecial(curve, points)? {
            return Err(AswError::Inconsistent("the system of points is special".into()));
        }
        let mut classes = Vec::new();
        for p in points {
            let t = curve.uniformiser_function(p)?;
            classes.push(AdeleClass::delta(p, &t.inv()?));
        }
        Ok(H1Basis {
            curve: curve.clone(),
            points: points.to_vec(),
            classes,
        })
    }

    pub fn dim(&self) -> usize {
        self.classes.len()
    }

    pub fn local(&self) -> Result<Vec<LocalAdele>> {
        self.classes.iter().map(|c| c.local(0)).collect()
    }

    /// Coordinates of an adele given by local data.
    pub fn coordinates(&self, r: &LocalAdele) -> Result<(Vec<Fe>, CurveFunction)> {
        coordinates_in_basis(&self.curve, &self.points, r, &self.local()?)
    }

    /// Check that `hw` is the matrix of the `p`-power Frobenius, column `i`
    /// holding the coordinates of `F(b_i)`.
    pub fn certify_hasse_witt(&self, hw: &linalg::Mat) -> Result<()> {
        let g = self.dim();
        if hw.len() != g || hw.iter().any(|r| r.len() != g) {
            return Err(AswError::Dimension(format!("Hasse-Witt matrix must be {g}x{g}")));
        }
        for (i, b) in self.classes.iter().enumerate() {
            let (beta, _) = self.coordinates(&b.frobenius(1).local(0)?)?;
            for j in 0..g {
                if beta[j] != hw[j][i] {
                    return Err(AswError::Inconsistent(format!(
                        "Hasse-Witt entry ({j}, {i}) is {} but the Frobenius gives {}",
                        hw[j][i], beta[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipoly::parse_bipoly;
    use crate::curve::{parse_function, PointSpec};
    use crate::field::FieldLattice;

    fn affine(f: &Arc<Field>, x: u32, y: u32) -> PointSpec {
        PointSpec {
            kind: PointKind::Affine {
                x: Fe::from_u32(f, x),
                y: Fe::from_u32(f, y),
            },
            uniformiser: None,
        }
    }

    fn genus_two() -> Arc<Curve> {
        let lat = FieldLattice::get(3).unwrap();
        let eq = parse_bipoly(&lat, "y^2 = x^5 + x^2 + 1").unwrap();
        let f = lat.prime_field();
        Curve::new(&lat, 1, Family::Hyperelliptic, &eq, &[affine(&f, 0, 2), affine(&f, 2, 2)]).unwrap()
    }

    #[test]
    fn riemann_roch_at_infinity() {
        let c = genus_two();
        let inf = c.infinity().unwrap().clone();
        for (k, dim) in [(0, 1), (1, 1), (2, 2), (4, 3), (5, 4), (6, 5)] {
            let d: Divisor = [(inf.clone(), k)].into_iter().collect();
            let basis = riemann_roch_basis(&c, &d).unwrap();
            assert_eq!(basis.len(), dim, "L({k} inf)");
            for f in &basis {
                assert!(f.valuation(&inf).unwrap().unwrap() >= -k);
                for p in c.points() {
                    assert!(f.valuation(p).unwrap().unwrap() >= 0);
                }
            }
        }
    }

    #[test]
    fn paper_divisor_is_nonspecial() {
        let c = genus_two();
        assert!(is_nonspecial(&c, c.points()).unwrap());
    }

    #[test]
    fn basis_class_is_nontrivial() {
        let c = genus_two();
        let p = c.points()[0].clone();
        let r = AdeleClass::delta(&p, &parse_function(&c, "1/x").unwrap());
        assert!(find_function(&c, c.points(), &r.local(0).unwrap()).unwrap().is_none());
        // 1/x is principal at both points above x = 0 together
        let q = c.line_points(&Fe::zero(c.base_field())).unwrap();
        let both = AdeleClass::from_entries(
            &c,
            q.iter().map(|pt| (pt.clone(), parse_function(&c, "1/x").unwrap())).collect(),
        );
        let h = find_function(&c, &q, &both.local(0).unwrap()).unwrap().unwrap();
        for pt in &q {
            let diff = parse_function(&c, "1/x").unwrap().sub(&h);
            assert!(diff.valuation(pt).unwrap().unwrap_or(0) >= 0);
        }
    }

    #[test]
    fn hasse_witt_certificate() {
        let c = genus_two();
        let b = H1Basis::from_points(&c, c.points()).unwrap();
        let f = c.base_field().clone();
        let hw = vec![
            vec![Fe::one(&f), Fe::zero(&f)],
            vec![Fe::zero(&f), Fe::zero(&f)],
        ];
        b.certify_hasse_witt(&hw).unwrap();
        let bad = vec![vec![Fe::one(&f), Fe::one(&f)], vec![Fe::zero(&f), Fe::zero(&f)]];
        assert!(b.certify_hasse_witt(&bad).is_err());
    }

    #[test]
    fn fermat_quartic_basis() {
        let lat = FieldLattice::get(5).unwrap();
        let eq = parse_bipoly(&lat, "x^4 + y^4 - 1").unwrap();
        let f = lat.prime_field();
        let pts = [affine(&f, 0, 4), affine(&f, 0, 3), affine(&f, 4, 0)];
        let c = Curve::new(&lat, 1, Family::SmoothPlane, &eq, &pts).unwrap();
        assert_eq!(c.genus(), 3);
        let b = H1Basis::from_points(&c, c.points()).unwrap();
        assert_eq!(b.classes[2].entries()[0].1, parse_function(&c, "1/y").unwrap());
        let m = |r: [u32; 3]| r.iter().map(|&v| Fe::from_u32(&f, v)).collect::<Vec<_>>();
        let hw = vec![m([1, 1, 2]), m([3, 4, 2]), m([0, 0, 3])];
        b.certify_hasse_witt(&hw).unwrap();
        let d: Divisor = c.points().iter().map(|p| (p.clone(), 2)).collect();
        assert_eq!(riemann_roch_basis(&c, &d).unwrap().len(), 6 - 3 + 1);
    }
}
