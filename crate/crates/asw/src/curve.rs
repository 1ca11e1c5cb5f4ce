//! Curve models, closed points with local parameters, and function-field arithmetic.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::bipoly::{upoly_series, BiPoly};
use crate::error::{AswError, Result};
use crate::field::{common_field_of, Fe, Field, FieldLattice};
use crate::laurent::Laurent;
use crate::ring::Ring;
use crate::upoly::UPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Hyperelliptic,
    SmoothPlane,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Hyperelliptic => "hyperelliptic",
            Family::SmoothPlane => "smooth_plane",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PointKind {
    Affine { x: Fe, y: Fe },
    Infinity,
}

/// Designated uniformiser at a point.
#[derive(Clone, Debug)]
pub enum Uniformiser {
    /// `x - x0`
    XShift,
    /// `y - y0`
    YShift,
    /// `x^g / y` at the hyperelliptic point at infinity
    Infinity,
    /// `num / den`, both polynomials in `x, y`
    Custom { num: BiPoly, den: BiPoly },
}

struct LocalParam {
    rel: i64,
    x: Laurent,
    y: Laurent,
}

pub struct Point {
    kind: PointKind,
    uniformiser: Uniformiser,
    label: String,
    param: Mutex<Option<LocalParam>>,
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

impl PartialEq for Point {
    fn eq(&self, o: &Point) -> bool {
        self.kind == o.kind
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, o: &Point) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Point {
    fn cmp(&self, o: &Point) -> std::cmp::Ordering {
        self.kind.cmp(&o.kind)
    }
}

impl Point {
    fn new(kind: PointKind, uniformiser: Uniformiser) -> Point {
        let label = match &kind {
            PointKind::Affine { x, y } => format!("({}, {})", x.minimal(), y.minimal()),
            PointKind::Infinity => "infinity".to_string(),
        };
        Point {
            kind,
            uniformiser,
            label,
            param: Mutex::new(None),
        }
    }

    pub fn kind(&self) -> &PointKind {
        &self.kind
    }

    pub fn uniformiser(&self) -> &Uniformiser {
        &self.uniformiser
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self.kind, PointKind::Infinity)
    }

    pub fn coordinates(&self) -> Option<(&Fe, &Fe)> {
        match &self.kind {
            PointKind::Affine { x, y } => Some((x, y)),
            PointKind::Infinity => None,
        }
    }
}

/// How a point is given in input data.
#[derive(Clone, Debug)]
pub struct PointSpec {
    pub kind: PointKind,
    pub uniformiser: Option<(BiPoly, BiPoly)>,
}

pub struct Curve {
    lattice: Arc<FieldLattice>,
    base_degree: usize,
    base: Arc<Field>,
    family: Family,
    equation: BiPoly,
    reduction: Vec<UPoly>,
    ydeg: usize,
    genus: usize,
    partial_x: BiPoly,
    partial_y: BiPoly,
    points: Vec<Arc<Point>>,
    infinity: Option<Arc<Point>>,
    residual: Mutex<HashMap<String, Vec<Arc<Point>>>>,
    auxiliary: OnceLock<Arc<Point>>,
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Curve({} = 0 over F_{}^{})", self.equation, self.lattice.characteristic(), self.base_degree)
    }
}

impl Curve {
    pub fn new(
        lattice: &Arc<FieldLattice>,
        base_degree: usize,
        family: Family,
        equation: &BiPoly,
        points: &[PointSpec],
    ) -> Result<Arc<Curve>> {
        let base = lattice.field(base_degree)?;
        let p = lattice.characteristic();
        let eq = equation.embed(&common_field_of(&[&Fe::zero(&base), &Fe::zero(equation.field())]));
        let ydeg = eq
            .y_degree()
            .ok_or_else(|| AswError::Parse("zero curve equation".into()))?;
        if ydeg == 0 {
            return Err(AswError::Unsupported("curve equation does not involve y".into()));
        }
        let top = eq.row(ydeg);
        if !top.is_constant() {
            return Err(AswError::Unsupported(
                "the coefficient of the highest power of y must be a nonzero constant".into(),
            ));
        }
        let lead_inv = top.coeff(0).inv().unwrap();
        let eq = eq.scale(&lead_inv);
        let reduction: Vec<UPoly> = (0..ydeg).map(|i| eq.row(i).neg()).collect();
        let genus = match family {
            Family::Hyperelliptic => {
                if p == 2 {
                    return Err(AswError::Unsupported(
                        "hyperelliptic models y^2 = f(x) need odd characteristic".into(),
                    ));
                }
                if ydeg != 2 || !eq.row(1).is_zero() {
                    return Err(AswError::Unsupported(
                        "hyperelliptic model must have the form y^2 = f(x)".into(),
                    ));
                }
                let f = &reduction[0];
                let d = f.deg_or_zero();
                if d.is_multiple_of(2) || d < 1 {
                    return Err(AswError::Unsupported(
                        "hyperelliptic model needs f of odd degree".into(),
                    ));
                }
                if !f.gcd(&f.derivative()).is_constant() {
                    return Err(AswError::Inconsistent("f(x) is not squarefree".into()));
                }
                (d - 1) / 2
            }
            Family::SmoothPlane => {
                let d = eq.total_degree().unwrap();
                if d != ydeg {
                    return Err(AswError::Unsupported(
                        "smooth plane model must contain y^d with d the total degree".into(),
                    ));
                }
                check_plane_smooth(&eq)?;
                (d - 1) * (d - 2) / 2
            }
        };
        let partial_x = eq.derivative_x();
        let partial_y = eq.derivative_y();
        let mut built: Vec<Arc<Point>> = Vec::new();
        let mut infinity = None;
        if family == Family::Hyperelliptic {
            infinity = Some(Arc::new(Point::new(PointKind::Infinity, Uniformiser::Infinity)));
        }
        for spec in points {
            let pt = match &spec.kind {
                PointKind::Infinity => {
                    if family != Family::Hyperelliptic {
                        return Err(AswError::Unsupported(
                            "a point at infinity is only available on hyperelliptic models".into(),
                        ));
                    }
                    match &spec.uniformiser {
                        None => infinity.clone().unwrap(),
                        Some((n, d)) => {
                            let pt = Arc::new(Point::new(
                                PointKind::Infinity,
                                Uniformiser::Custom {
                                    num: n.clone(),
                                    den: d.clone(),
                                },
                            ));
                            infinity = Some(pt.clone());
                            pt
                        }
                    }
                }
                PointKind::Affine { x, y } => {
                    if !eq.eval(x, y).is_zero() {
                        return Err(AswError::Inconsistent(format!(
                            "point ({x}, {y}) is not on the curve"
                        )));
                    }
                    let u = match &spec.uniformiser {
                        Some((n, d)) => Uniformiser::Custom {
                            num: n.clone(),
                            den: d.clone(),
                        },
                        None => default_uniformiser(&partial_x, &partial_y, x, y)?,
                    };
                    Arc::new(Point::new(spec.kind.clone(), u))
                }
            };
            if built.iter().any(|q| q.kind == pt.kind) {
                return Err(AswError::Inconsistent(format!("point {} listed twice", pt.label)));
            }
            built.push(pt);
        }
        let curve = Arc::new(Curve {
            lattice: lattice.clone(),
            base_degree,
            base,
            family,
            equation: eq,
            reduction,
            ydeg,
            genus,
            partial_x,
            partial_y,
            points: built,
            infinity,
            residual: Mutex::new(HashMap::new()),
            auxiliary: OnceLock::new(),
        });
        // uniformisers must have valuation one
        for pt in &curve.points {
            let t = curve.uniformiser_function(pt)?;
            let v = curve.default_valuation(&t, pt)?;
            if v != Some(1) {
                return Err(AswError::Inconsistent(format!(
                    "uniformiser at {} has valuation {v:?}",
                    pt.label
                )));
            }
        }
        Ok(curve)
    }

    pub fn lattice(&self) -> &Arc<FieldLattice> {
        &self.lattice
    }

    pub fn characteristic(&self) -> u32 {
        self.lattice.characteristic()
    }

    pub fn base_degree(&self) -> usize {
        self.base_degree
    }

    pub fn base_field(&self) -> &Arc<Field> {
        &self.base
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn equation(&self) -> &BiPoly {
        &self.equation
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn y_degree(&self) -> usize {
        self.ydeg
    }

    pub fn points(&self) -> &[Arc<Point>] {
        &self.points
    }

    /// The hyperelliptic point at infinity, when the model has one.
    pub fn infinity(&self) -> Option<&Arc<Point>> {
        self.infinity.as_ref()
    }

    /// Designated point with the given coordinates.
    pub fn point(&self, kind: &PointKind) -> Option<Arc<Point>> {
        self.points.iter().find(|p| p.kind == *kind).cloned()
    }

    pub fn hyperelliptic_f(&self) -> Option<&UPoly> {
        match self.family {
            Family::Hyperelliptic => Some(&self.reduction[0]),
            Family::SmoothPlane => None,
        }
    }

    /// Reduce the `y`-degree below the model's using the curve relation.
    pub fn reduce(&self, a: &BiPoly) -> BiPoly {
        let e = self.ydeg;
        let mut rows: Vec<UPoly> = a.rows().to_vec();
        if rows.len() <= e {
            return a.clone();
        }
        for k in (e..rows.len()).rev() {
            let c = std::mem::replace(&mut rows[k], UPoly::zero(a.field()));
            if c.is_zero() {
                continue;
            }
            for (i, r) in self.reduction.iter().enumerate() {
                if !r.is_zero() {
                    rows[k - e + i] = rows[k - e + i].add(&c.mul(r));
                }
            }
        }
        rows.truncate(e);
        if rows.iter().all(|r| r.is_zero()) {
            return BiPoly::zero(a.field());
        }
        BiPoly::from_rows(rows)
    }

    pub fn uniformiser_function(self: &Arc<Self>, pt: &Point) -> Result<CurveFunction> {
        let one = Fe::one(&self.base);
        Ok(match (&pt.uniformiser, &pt.kind) {
            (Uniformiser::XShift, PointKind::Affine { x, .. }) => CurveFunction::x(self).sub(&CurveFunction::constant(self, x)),
            (Uniformiser::YShift, PointKind::Affine { y, .. }) => CurveFunction::y(self).sub(&CurveFunction::constant(self, y)),
            (Uniformiser::Infinity, _) => {
                let xg = BiPoly::monomial(&one, self.genus, 0);
                CurveFunction::from_bipoly(self, &xg).div(&CurveFunction::y(self))?
            }
            (Uniformiser::Custom { num, den }, _) => {
                CurveFunction::from_bipoly(self, num).div(&CurveFunction::from_bipoly(self, den))?
            }
            _ => {
                return Err(AswError::Inconsistent("uniformiser does not match the point".into()))
            }
        })
    }

    /// Local parameterisation `(x(t), y(t))` with at least `rel` correct terms.
    pub(crate) fn local_param(&self, pt: &Point, rel: i64) -> Result<(Laurent, Laurent)> {
        {
            let guard = pt.param.lock().unwrap();
            if let Some(lp) = guard.as_ref() {
                if lp.rel >= rel {
                    return Ok((lp.x.clone(), lp.y.clone()));
                }
            }
        }
        let rel = rel.max(4);
        let (x, y) = match &pt.uniformiser {
            Uniformiser::Custom { num, den } => self.custom_param(pt, num, den, rel)?,
            _ => self.default_param(pt, rel)?,
        };
        let mut guard = pt.param.lock().unwrap();
        *guard = Some(LocalParam {
            rel,
            x: x.clone(),
            y: y.clone(),
        });
        Ok((x, y))
    }

    fn default_kind(&self, pt: &Point) -> Result<Uniformiser> {
        match &pt.kind {
            PointKind::Infinity => Ok(Uniformiser::Infinity),
            PointKind::Affine { x, y } => default_uniformiser(&self.partial_x, &self.partial_y, x, y),
        }
    }

    fn default_param(&self, pt: &Point, rel: i64) -> Result<(Laurent, Laurent)> {
        match (self.default_kind(pt)?, &pt.kind) {
            (Uniformiser::XShift, PointKind::Affine { x, y }) => {
                let field = common_field_of(&[x, y, &Fe::zero(self.equation.field())]);
                let xs = Laurent::from_terms(&field, 0, &[x.clone(), Fe::one(&field)], crate::laurent::EXACT);
                let ys = newton(y, rel, |ys| {
                    (self.equation.eval_series(&xs, ys), self.partial_y.eval_series(&xs, ys))
                })?;
                Ok((xs, ys))
            }
            (Uniformiser::YShift, PointKind::Affine { x, y }) => {
                let field = common_field_of(&[x, y, &Fe::zero(self.equation.field())]);
                let ys = Laurent::from_terms(&field, 0, &[y.clone(), Fe::one(&field)], crate::laurent::EXACT);
                let xs = newton(x, rel, |xs| {
                    (self.equation.eval_series(xs, &ys), self.partial_x.eval_series(xs, &ys))
                })?;
                Ok((xs, ys))
            }
            (Uniformiser::Infinity, _) => {
                // u = 1/x satisfies u = t^2 * u^{2g+1} f(1/u)
                let f = &self.reduction[0];
                let deg = f.deg_or_zero();
                let field = f.field().clone();
                let rev: Vec<Fe> = (0..=deg).map(|i| f.coeff(deg - i)).collect();
                let frev = UPoly::new(&field, rev);
                let dfrev = frev.derivative();
                let t2 = Laurent::monomial(&Fe::one(&field), 2);
                let u = newton(&Fe::zero(&field), rel + 2, |u| {
                    let val = u.sub(&t2.mul(&upoly_series(&frev, u)));
                    let der = Laurent::one(&field).sub(&t2.mul(&upoly_series(&dfrev, u)));
                    (val, der)
                })?;
                let xs = u.inv(0)?;
                let ys = pow_laurent(&xs, self.genus).shift(-1);
                Ok((xs, ys))
            }
            _ => Err(AswError::Inconsistent("no default parameterisation".into())),
        }
    }

    fn custom_param(&self, pt: &Point, num: &BiPoly, den: &BiPoly, rel: i64) -> Result<(Laurent, Laurent)> {
        // expand in the default parameter tau, then revert s(tau)
        let (xt, yt) = self.default_param(pt, rel + 8)?;
        let s = num
            .eval_series(&xt, &yt)
            .mul(&den.eval_series(&xt, &yt).inv(rel as usize + 8)?);
        if s.valuation() != Some(1) {
            return Err(AswError::Inconsistent(format!(
                "custom uniformiser at {} does not have valuation one",
                pt.label
            )));
        }
        let field = s.field().clone();
        let ds = s.derivative();
        let w = Laurent::monomial(&Fe::one(&field), 1);
        // tau(w) with s(tau(w)) = w; start from tau = w / s_1
        let c1 = s.coefficient(1);
        let mut tau = w.scale(&c1.inv().unwrap()).assume_precision(2);
        let mut k = 2;
        while k < rel + 2 {
            k = (2 * k).min(rel + 2);
            let te = tau.assume_precision(k);
            let g = s.compose(&te, k as usize)?.sub(&w);
            let gd = ds.compose(&te, k as usize)?;
            tau = te.sub(&g.mul(&gd.inv(k as usize)?)).truncate(k);
        }
        Ok((xt.compose(&tau, rel as usize)?, yt.compose(&tau, rel as usize)?))
    }

    fn default_valuation(self: &Arc<Self>, f: &CurveFunction, pt: &Point) -> Result<Option<i64>> {
        f.valuation(pt)
    }

    /// Points on the vertical line `x = x0`, designated ones reused.
    pub(crate) fn line_points(&self, x0: &Fe) -> Result<Vec<Arc<Point>>> {
        let key = x0.minimal().to_string();
        if let Some(v) = self.residual.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let poly = self.equation.eval_x(x0);
        let mut out = Vec::new();
        for (y, _) in poly.roots_with_multiplicity()? {
            let kind = PointKind::Affine {
                x: x0.clone(),
                y: y.clone(),
            };
            let pt = match self.point(&kind) {
                Some(p) => p,
                None => {
                    let field = common_field_of(&[x0, &y]);
                    let kind = PointKind::Affine {
                        x: x0.embed(&field)?,
                        y: y.embed(&field)?,
                    };
                    let u = default_uniformiser(&self.partial_x, &self.partial_y, x0, &y)?;
                    Arc::new(Point::new(kind, u))
                }
            };
            out.push(pt);
        }
        out.sort();
        self.residual.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    /// A rational point away from every designated vertical line, used to pin
    /// down additive constants.
    pub(crate) fn auxiliary_point(&self) -> Result<Arc<Point>> {
        if let Some(p) = self.auxiliary.get() {
            return Ok(p.clone());
        }
        let avoid: Vec<Fe> = self
            .points
            .iter()
            .filter_map(|p| p.coordinates().map(|(x, _)| x.clone()))
            .collect();
        let mut degree = self.base_degree;
        loop {
            let field = self.lattice.field(degree)?;
            let elems = crate::solvers::field_elements(&field);
            if elems.len() > 1 << 16 {
                return Err(AswError::Unsupported("no auxiliary point found".into()));
            }
            for x0 in elems {
                if avoid.contains(&x0) {
                    continue;
                }
                let poly = self.equation.eval_x(&x0);
                let mut ys: Vec<Fe> = poly
                    .roots()?
                    .into_iter()
                    .filter(|y| degree.is_multiple_of(y.minimal_degree()))
                    .collect();
                ys.sort();
                if let Some(y) = ys.into_iter().next() {
                    let y = y.embed(&field)?;
                    let u = default_uniformiser(&self.partial_x, &self.partial_y, &x0, &y)?;
                    let pt = Arc::new(Point::new(PointKind::Affine { x: x0, y }, u));
                    let _ = self.auxiliary.set(pt);
                    return Ok(self.auxiliary.get().unwrap().clone());
                }
            }
            degree *= 2;
        }
    }
}

fn default_uniformiser(fx: &BiPoly, fy: &BiPoly, x: &Fe, y: &Fe) -> Result<Uniformiser> {
    if !fy.eval(x, y).is_zero() {
        Ok(Uniformiser::XShift)
    } else if !fx.eval(x, y).is_zero() {
        Ok(Uniformiser::YShift)
    } else {
        Err(AswError::Inconsistent(format!("singular point ({x}, {y})")))
    }
}

fn pow_laurent(s: &Laurent, e: usize) -> Laurent {
    let mut acc = Laurent::one(s.field());
    for _ in 0..e {
        acc = acc.mul(s);
    }
    acc
}

/// Newton iteration for a power-series root with constant term `start`.
fn newton(start: &Fe, rel: i64, g: impl Fn(&Laurent) -> (Laurent, Laurent)) -> Result<Laurent> {
    let field = start.field().clone();
    let mut s = Laurent::from_terms(&field, 0, std::slice::from_ref(start), 1);
    let mut k = 1;
    while k < rel {
        k = (2 * k).min(rel);
        let se = s.assume_precision(k);
        let (val, der) = g(&se);
        let corr = val.mul(&der.inv(k as usize)?);
        s = se.sub(&corr).truncate(k);
        // unify the field once the equation forces an extension
        if !Arc::ptr_eq(s.field(), &field) {
            s = s.embed(s.field());
        }
    }
    if s.precision() < rel {
        return Err(AswError::Inconsistent(format!(
            "local expansion lost precision ({} < {rel})",
            s.precision()
        )));
    }
    Ok(s)
}

/// Smoothness of the projective closure of a plane curve whose `y^d` coefficient is 1.
fn check_plane_smooth(eq: &BiPoly) -> Result<()> {
    let fx = eq.derivative_x();
    let fy = eq.derivative_y();
    // affine: resultant in y of F and F_y, then check each root x0
    let res = resultant_y(eq, &fy);
    if res.is_zero() {
        return Err(AswError::Inconsistent("curve equation is not squarefree in y".into()));
    }
    for x0 in res.roots()? {
        let a = eq.eval_x(&x0);
        let b = fx.eval_x(&x0);
        let c = fy.eval_x(&x0);
        let g = a.gcd(&b).gcd(&c);
        if !g.is_constant() {
            return Err(AswError::Inconsistent(format!(
                "plane model is singular above x = {x0}"
            )));
        }
    }
    // at infinity: X = 1, points (1 : y : 0)
    let d = eq.total_degree().unwrap();
    let field = eq.field().clone();
    let top = UPoly::new(&field, eq.homogeneous_part(d));
    let next = UPoly::new(&field, eq.homogeneous_part(d - 1));
    let g = top.gcd(&top.derivative()).gcd(&next);
    if !g.is_constant() {
        return Err(AswError::Inconsistent("plane model is singular at infinity".into()));
    }
    Ok(())
}

fn det_upoly(m: &[Vec<UPoly>]) -> UPoly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let field = m[0][0].field().clone();
    let mut acc = UPoly::zero(&field);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<UPoly>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = m[0][j].mul(&det_upoly(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Resultant in `y` via the Sylvester determinant over `k[x]`.
fn resultant_y(a: &BiPoly, b: &BiPoly) -> UPoly {
    let field = a.field().clone();
    let da = a.y_degree().unwrap_or(0);
    let db = b.y_degree().unwrap_or(0);
    if db == 0 {
        return b.row(0).pow(da);
    }
    let n = da + db;
    let mut m = vec![vec![UPoly::zero(&field); n]; n];
    for i in 0..db {
        for k in 0..=da {
            m[i][i + k] = a.row(da - k);
        }
    }
    for i in 0..da {
        for k in 0..=db {
            m[db + i][i + k] = b.row(db - k);
        }
    }
    det_upoly(&m)
}

/// An element of the function field, `num(x, y) / den(x)` with `den` monic and
/// `num` reduced modulo the curve relation.
#[derive(Clone)]
pub struct CurveFunction {
    curve: Arc<Curve>,
    num: BiPoly,
    den: UPoly,
}

impl fmt::Debug for CurveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for CurveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.descend();
        let n = g.num.to_string();
        if g.den.is_one() {
            return write!(f, "{n}");
        }
        let d = g.den.to_string_var("x");
        let n = if g.num.terms().len() > 1 { format!("({n})") } else { n };
        let d = if g.den.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 {
            format!("({d})")
        } else {
            d
        };
        write!(f, "{n}/{d}")
    }
}

impl PartialEq for CurveFunction {
    fn eq(&self, o: &CurveFunction) -> bool {
        Arc::ptr_eq(&self.curve, &o.curve) && self.num == o.num && self.den == o.den
    }
}

impl CurveFunction {
    pub fn from_parts(curve: &Arc<Curve>, num: &BiPoly, den: &UPoly) -> Result<CurveFunction> {
        if den.is_zero() {
            return Err(AswError::Inconsistent("zero denominator".into()));
        }
        let mut f = CurveFunction {
            curve: curve.clone(),
            num: curve.reduce(num),
            den: den.clone(),
        };
        f.normalize();
        Ok(f)
    }

    pub fn from_bipoly(curve: &Arc<Curve>, num: &BiPoly) -> CurveFunction {
        let one = UPoly::one(num.field());
        CurveFunction::from_parts(curve, num, &one).unwrap()
    }

    pub fn zero(curve: &Arc<Curve>) -> CurveFunction {
        CurveFunction::from_bipoly(curve, &BiPoly::zero(curve.base_field()))
    }

    pub fn one(curve: &Arc<Curve>) -> CurveFunction {
        CurveFunction::constant(curve, &Fe::one(curve.base_field()))
    }

    pub fn constant(curve: &Arc<Curve>, c: &Fe) -> CurveFunction {
        CurveFunction::from_bipoly(curve, &BiPoly::constant(c))
    }

    pub fn x(curve: &Arc<Curve>) -> CurveFunction {
        CurveFunction::from_bipoly(curve, &BiPoly::monomial(&Fe::one(curve.base_field()), 1, 0))
    }

    pub fn y(curve: &Arc<Curve>) -> CurveFunction {
        CurveFunction::from_bipoly(curve, &BiPoly::monomial(&Fe::one(curve.base_field()), 0, 1))
    }

    pub fn curve(&self) -> &Arc<Curve> {
        &self.curve
    }

    pub fn numerator(&self) -> &BiPoly {
        &self.num
    }

    pub fn denominator(&self) -> &UPoly {
        &self.den
    }

    pub fn field(&self) -> Arc<Field> {
        common_field_of(&[&Fe::zero(self.num.field()), &Fe::zero(self.den.field())])
    }

    fn normalize(&mut self) {
        let field = self.field();
        self.num = self.num.embed(&field);
        self.den = self.den.embed(&field);
        if self.num.is_zero() {
            self.den = UPoly::one(&field);
            return;
        }
        let mut g = self.den.clone();
        for r in self.num.rows() {
            if g.is_constant() {
                break;
            }
            if !r.is_zero() {
                g = g.gcd(r);
            }
        }
        if !g.is_constant() {
            self.den = self.den.exact_div(&g);
            self.num = BiPoly::new(&field, self.num.rows().iter().map(|r| r.exact_div(&g)).collect());
        }
        let lc = self.den.lead();
        if !lc.is_one() {
            let inv = lc.inv().unwrap();
            self.den = self.den.scale(&inv);
            self.num = self.num.scale(&inv);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<Fe> {
        if self.is_constant() {
            Some(self.num.constant_term())
        } else {
            None
        }
    }

    pub fn add(&self, o: &CurveFunction) -> CurveFunction {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den == o.den {
            return CurveFunction::from_parts(&self.curve, &self.num.add(&o.num), &self.den).unwrap();
        }
        let g = self.den.gcd(&o.den);
        let a = o.den.exact_div(&g);
        let b = self.den.exact_div(&g);
        let num = self.num.mul_x(&a).add(&o.num.mul_x(&b));
        CurveFunction::from_parts(&self.curve, &num, &self.den.mul(&a)).unwrap()
    }

    pub fn neg(&self) -> CurveFunction {
        CurveFunction {
            curve: self.curve.clone(),
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &CurveFunction) -> CurveFunction {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &CurveFunction) -> CurveFunction {
        if self.is_zero() || o.is_zero() {
            return CurveFunction::zero(&self.curve);
        }
        let num = self.curve.reduce(&self.num.mul(&o.num));
        CurveFunction::from_parts(&self.curve, &num, &self.den.mul(&o.den)).unwrap()
    }

    pub fn scale(&self, c: &Fe) -> CurveFunction {
        if c.is_zero() {
            return CurveFunction::zero(&self.curve);
        }
        CurveFunction::from_parts(&self.curve, &self.num.scale(c), &self.den).unwrap()
    }

    pub fn inv(&self) -> Result<CurveFunction> {
        if self.is_zero() {
            return Err(AswError::Inconsistent("inverse of the zero function".into()));
        }
        let e = self.curve.ydeg;
        let field = self.field();
        // multiplication-by-num matrix over k[x]: column j holds num * y^j
        let mut cols: Vec<Vec<UPoly>> = Vec::with_capacity(e);
        let mut cur = self.num.clone();
        for _ in 0..e {
            cols.push((0..e).map(|i| cur.row(i).embed(&field)).collect());
            cur = self.curve.reduce(&cur.mul(&BiPoly::monomial(&Fe::one(&field), 0, 1)));
        }
        let m: Vec<Vec<UPoly>> = (0..e).map(|i| (0..e).map(|j| cols[j][i].clone()).collect()).collect();
        let det = det_upoly(&m);
        // first column of the adjugate
        let mut adj = Vec::with_capacity(e);
        for i in 0..e {
            if e == 1 {
                adj.push(UPoly::one(&field));
                continue;
            }
            let minor: Vec<Vec<UPoly>> = (0..e)
                .filter(|&r| r != 0)
                .map(|r| (0..e).filter(|&c| c != i).map(|c| m[r][c].clone()).collect())
                .collect();
            let c = det_upoly(&minor);
            adj.push(if i % 2 == 0 { c } else { c.neg() });
        }
        let num = BiPoly::new(&field, adj).mul_x(&self.den);
        CurveFunction::from_parts(&self.curve, &num, &det.embed(&field)).map(|mut f| {
            // det may have a non-monic leading coefficient; normalise handles it
            f.normalize();
            f
        })
    }

    pub fn div(&self, o: &CurveFunction) -> Result<CurveFunction> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: u64) -> CurveFunction {
        let mut acc = CurveFunction::one(&self.curve);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Apply `c -> c^{p^k}` to every coefficient; composing with `x -> x^p`,
    /// `y -> y^p` this gives the `p`-th power.
    pub fn map_coefficients(&self, k: usize) -> CurveFunction {
        CurveFunction::from_parts(&self.curve, &self.num.frobenius_coeffs(k), &self.den.frobenius_coeffs(k)).unwrap()
    }

    /// The `p`-th power, computed termwise.
    pub fn frobenius(&self) -> CurveFunction {
        let p = self.curve.characteristic() as usize;
        let field = self.field();
        let mut num = BiPoly::zero(&field);
        for (c, a, b) in self.num.terms() {
            num = num.add(&BiPoly::monomial(&c.frobenius(1), a * p, b * p));
        }
        let mut dc = vec![Fe::zero(&field); self.den.deg_or_zero() * p + 1];
        for (i, c) in self.den.coeffs().iter().enumerate() {
            dc[i * p] = c.frobenius(1);
        }
        CurveFunction::from_parts(&self.curve, &num, &UPoly::new(&field, dc)).unwrap()
    }

    /// Substitute functions (possibly on another curve) for `x` and `y`.
    pub fn substitute(&self, x: &CurveFunction, y: &CurveFunction) -> Result<CurveFunction> {
        let target = x.curve.clone();
        let mut acc = CurveFunction::zero(&target);
        let mut ypow = CurveFunction::one(&target);
        for r in self.num.rows() {
            acc = acc.add(&eval_upoly_fn(r, x).mul(&ypow));
            ypow = ypow.mul(y);
        }
        acc.div(&eval_upoly_fn(&self.den, x))
    }

    pub fn descend(&self) -> CurveFunction {
        let num = self.num.descend();
        let mut dc: Vec<Fe> = self.den.coeffs().iter().map(|c| c.minimal()).collect();
        let zero = Fe::zero(num.field());
        let mut refs: Vec<&Fe> = dc.iter().collect();
        refs.push(&zero);
        let field = common_field_of(&refs);
        dc = dc.iter().map(|c| c.embed(&field).unwrap()).collect();
        CurveFunction {
            curve: self.curve.clone(),
            num: num.embed(&field),
            den: UPoly::new(&field, dc),
        }
    }

    /// Laurent expansion at `pt` in its designated uniformiser, correct up to `O(t^target)`.
    pub fn expand(&self, pt: &Point, target: i64) -> Result<Laurent> {
        let mut rel = target.max(0) + 8;
        for _ in 0..40 {
            let (xs, ys) = self.curve.local_param(pt, rel)?;
            let nu = self.num.eval_series(&xs, &ys);
            let de = upoly_series(&self.den, &xs);
            if de.valuation().is_none() {
                rel *= 2;
                continue;
            }
            let r = nu.mul(&de.inv(rel as usize)?);
            if r.precision() >= target {
                return Ok(r);
            }
            rel += (target - r.precision()).max(4);
        }
        Err(AswError::Inconsistent(format!("cannot expand {self} at {}", pt.label)))
    }

    /// Valuation at `pt`; `None` for the zero function.
    pub fn valuation(&self, pt: &Point) -> Result<Option<i64>> {
        if self.is_zero() {
            return Ok(None);
        }
        let mut target = 8;
        loop {
            let s = self.expand(pt, target)?;
            if let Some(v) = s.valuation() {
                return Ok(Some(v));
            }
            target *= 2;
            if target > 1 << 20 {
                return Err(AswError::Inconsistent("valuation search diverged".into()));
            }
        }
    }

    /// Coefficients of `t^{-s} .. t^{-1}` at `pt`.
    pub fn principal_part(&self, pt: &Point, s: usize) -> Result<Vec<Fe>> {
        self.expand(pt, 0)?.principal_part(s)
    }

    /// Value at a point where the function is regular.
    pub fn value_at(&self, pt: &Point) -> Result<Fe> {
        let s = self.expand(pt, 1)?;
        if s.valuation().is_some_and(|v| v < 0) {
            return Err(AswError::Inconsistent(format!("{self} has a pole at {}", pt.label)));
        }
        Ok(s.coefficient(0))
    }
}

fn eval_upoly_fn(p: &UPoly, x: &CurveFunction) -> CurveFunction {
    let mut acc = CurveFunction::zero(&x.curve);
    for c in p.coeffs().iter().rev() {
        acc = acc.mul(x).add(&CurveFunction::constant(&x.curve, c));
    }
    acc
}

impl Ring for CurveFunction {
    fn zero_like(&self) -> Self {
        CurveFunction::zero(&self.curve)
    }
    fn one_like(&self) -> Self {
        CurveFunction::one(&self.curve)
    }
    fn from_int_like(&self, n: &BigInt) -> Self {
        let p = BigInt::from(self.curve.characteristic());
        let r = n.mod_floor(&p).to_u32().unwrap();
        CurveFunction::constant(&self.curve, &Fe::from_u32(self.curve.base_field(), r))
    }
    fn add(&self, o: &Self) -> Self {
        CurveFunction::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        CurveFunction::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        CurveFunction::mul(self, o)
    }
    fn neg(&self) -> Self {
        CurveFunction::neg(self)
    }
    fn is_zero(&self) -> bool {
        CurveFunction::is_zero(self)
    }
    fn characteristic(&self) -> u64 {
        self.curve.characteristic() as u64
    }
    fn pow(&self, e: u64) -> Self {
        CurveFunction::pow(self, e)
    }
}

/// Parse a rational function in `x`, `y` on the curve.
pub fn parse_function(curve: &Arc<Curve>, s: &str) -> Result<CurveFunction> {
    #[derive(Clone)]
    struct Ctx {
        curve: Arc<Curve>,
        v: Option<CurveFunction>,
    }
    impl Ctx {
        fn w(&self, v: CurveFunction) -> Ctx {
            Ctx {
                curve: self.curve.clone(),
                v: Some(v),
            }
        }
        fn g(&self) -> &CurveFunction {
            self.v.as_ref().unwrap()
        }
    }
    impl crate::expr::ExprTarget for Ctx {
        fn num(&self, n: &BigInt) -> Result<Self> {
            let z = CurveFunction::zero(&self.curve);
            Ok(self.w(z.from_int_like(n)))
        }
        fn var(&self, name: &str) -> Result<Self> {
            match name {
                "x" => Ok(self.w(CurveFunction::x(&self.curve))),
                "y" => Ok(self.w(CurveFunction::y(&self.curve))),
                _ => {
                    let m = crate::expr::generator_degree(name)
                        .ok_or_else(|| AswError::Parse(format!("unknown variable `{name}`")))?;
                    let g = Fe::generator(&self.curve.lattice.field(m)?);
                    Ok(self.w(CurveFunction::constant(&self.curve, &g)))
                }
            }
        }
        fn add(&self, a: &Self, b: &Self) -> Self {
            self.w(a.g().add(b.g()))
        }
        fn sub(&self, a: &Self, b: &Self) -> Self {
            self.w(a.g().sub(b.g()))
        }
        fn mul(&self, a: &Self, b: &Self) -> Self {
            self.w(a.g().mul(b.g()))
        }
        fn div(&self, a: &Self, b: &Self) -> Result<Self> {
            Ok(self.w(a.g().div(b.g())?))
        }
        fn neg(&self, a: &Self) -> Self {
            self.w(a.g().neg())
        }
        fn pow(&self, a: &Self, e: u32) -> Self {
            self.w(a.g().pow(e as u64))
        }
    }
    let ctx = Ctx {
        curve: curve.clone(),
        v: None,
    };
    Ok(crate::expr::eval(&crate::expr::parse(s)?, &ctx)?.v.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bipoly::parse_bipoly;

    fn genus_two() -> Arc<Curve> {
        let lat = FieldLattice::get(3).unwrap();
        let eq = parse_bipoly(&lat, "y^2 - (x^5 + x^2 + 1)").unwrap();
        let f = lat.prime_field();
        let pts = [(0, 2), (2, 2)]
            .iter()
            .map(|&(x, y)| PointSpec {
                kind: PointKind::Affine {
                    x: Fe::from_u32(&f, x),
                    y: Fe::from_u32(&f, y),
                },
                uniformiser: None,
            })
            .collect::<Vec<_>>();
        Curve::new(&lat, 1, Family::Hyperelliptic, &eq, &pts).unwrap()
    }

    #[test]
    fn x_is_a_uniformiser_at_zero_two() {
        let c = genus_two();
        let p = c.points()[0].clone();
        let x = CurveFunction::x(&c);
        assert_eq!(x.valuation(&p).unwrap(), Some(1));
        assert_eq!(x.inv().unwrap().valuation(&p).unwrap(), Some(-1));
    }

    #[test]
    fn inverse_round_trip() {
        let c = genus_two();
        let f = parse_function(&c, "(x + y)/(x^2 + 1)").unwrap();
        let g = f.inv().unwrap();
        assert!(f.mul(&g).sub(&CurveFunction::one(&c)).is_zero());
    }

    #[test]
    fn infinity_valuations() {
        let c = genus_two();
        let inf = c.infinity().unwrap().clone();
        let x = CurveFunction::x(&c);
        let y = CurveFunction::y(&c);
        assert_eq!(x.valuation(&inf).unwrap(), Some(-2));
        assert_eq!(y.valuation(&inf).unwrap(), Some(-5));
        let t = c.uniformiser_function(&inf).unwrap();
        assert_eq!(t.valuation(&inf).unwrap(), Some(1));
    }

    #[test]
    fn display_is_reparseable() {
        let c = genus_two();
        let f = parse_function(&c, "2/(x+1) + y/x").unwrap();
        let g = parse_function(&c, &f.to_string()).unwrap();
        assert_eq!(f, g);
    }
}
