//! Cohomology of locally constant `Z/p^n`-sheaves trivialised by a Galois
//! cover `Y -> X = Y/Gamma`: lifts of `Gamma` to the maximal abelian
//! `p^n`-cover of `Y`, the resulting group, and crossed homomorphisms.
//!
//! Automorphisms are field automorphisms and compose as maps: `(a * b)(f) =
//! a(b(f))`. Modules are left modules for that product.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::adele::{AdeleClass, H1Basis};
use crate::cover::{compute_h1_from_hw, coordinates_in_basis_witt, H1EtBasis, WittAdele};
use crate::curve::{Curve, CurveFunction, Point, PointKind};
use crate::error::{AswError, Result};
use crate::field::Fe;
use crate::linalg::Mat;
use crate::solvers::solve_artin_schreier_scalar;
use crate::witt::{int_to_witt_fp, structure, witt_fp_to_int, WittVector};
use crate::zmod::{ZMat, ZMod};

/// A field automorphism of `K`, `x -> x_image`, `y -> y_image`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveAutomorphism {
    pub x_image: CurveFunction,
    pub y_image: CurveFunction,
}

impl CurveAutomorphism {
    pub fn identity(curve: &Arc<Curve>) -> CurveAutomorphism {
        CurveAutomorphism {
            x_image: CurveFunction::x(curve),
            y_image: CurveFunction::y(curve),
        }
    }

    /// Checks that the images satisfy the curve equation.
    pub fn new(x_image: CurveFunction, y_image: CurveFunction) -> Result<CurveAutomorphism> {
        let curve = x_image.curve().clone();
        let mut acc = CurveFunction::zero(&curve);
        for (c, a, b) in curve.equation().terms() {
            acc = acc.add(&x_image.pow(a as u64).mul(&y_image.pow(b as u64)).scale(&c));
        }
        if !acc.is_zero() {
            return Err(AswError::Inconsistent(
                "automorphism images do not satisfy the curve equation".into(),
            ));
        }
        Ok(CurveAutomorphism { x_image, y_image })
    }

    pub fn curve(&self) -> &Arc<Curve> {
        self.x_image.curve()
    }

    pub fn apply(&self, f: &CurveFunction) -> Result<CurveFunction> {
        f.substitute(&self.x_image, &self.y_image)
    }

    /// `self * o`, i.e. apply `o` first.
    pub fn compose(&self, o: &CurveAutomorphism) -> Result<CurveAutomorphism> {
        Ok(CurveAutomorphism {
            x_image: self.apply(&o.x_image)?,
            y_image: self.apply(&o.y_image)?,
        })
    }

    /// The geometric point `Q` with `f(Q) = self(f)(P)` for all `f`.
    pub fn map_point(&self, pt: &Point) -> Result<Arc<Point>> {
        if pt.is_infinity() {
            return Err(AswError::Unsupported("automorphisms are only tracked on affine points".into()));
        }
        let x0 = self.x_image.value_at(pt)?.minimal();
        let y0 = self.y_image.value_at(pt)?.minimal();
        let curve = self.curve();
        for q in curve.line_points(&x0)? {
            if let PointKind::Affine { y, .. } = q.kind() {
                if *y == y0 {
                    return Ok(q);
                }
            }
        }
        Err(AswError::Inconsistent(format!("image of {} is not on the curve", pt.label())))
    }

    /// Pull back an adele: the entry at `Q` is `self(r_{self(Q)})`.
    pub fn pullback(&self, r: &AdeleClass, support: &[Arc<Point>]) -> Result<AdeleClass> {
        let mut entries = Vec::new();
        for q in support {
            let target = self.map_point(q)?;
            if let Some(f) = r.at(&target) {
                entries.push((q.clone(), self.apply(f)?));
            }
        }
        if entries.len() != r.entries().len() {
            return Err(AswError::Inconsistent(
                "support is not closed under the automorphism".into(),
            ));
        }
        Ok(AdeleClass::from_entries(self.curve(), entries))
    }
}

/// The finite group generated by some automorphisms of `K`.
#[derive(Clone, Debug)]
pub struct AutomorphismGroup {
    pub elements: Vec<CurveAutomorphism>,
    pub table: Vec<Vec<usize>>,
    /// Indices of the given generators.
    pub generators: Vec<usize>,
}

impl AutomorphismGroup {
    pub fn generate(curve: &Arc<Curve>, gens: &[CurveAutomorphism], max_order: usize) -> Result<AutomorphismGroup> {
        let mut elements = vec![CurveAutomorphism::identity(curve)];
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in gens {
                let e = elements[i].compose(g)?;
                if !elements.contains(&e) {
                    if elements.len() >= max_order {
                        return Err(AswError::Unsupported(format!(
                            "automorphism group exceeds {max_order} elements"
                        )));
                    }
                    elements.push(e);
                    queue.push_back(elements.len() - 1);
                }
            }
        }
        let index = |e: &CurveAutomorphism| elements.iter().position(|x| x == e);
        let mut table = Vec::with_capacity(elements.len());
        for a in &elements {
            let mut row = Vec::with_capacity(elements.len());
            for b in &elements {
                let c = a.compose(b)?;
                row.push(index(&c).ok_or_else(|| AswError::Inconsistent("automorphisms do not close".into()))?);
            }
            table.push(row);
        }
        let generators = gens
            .iter()
            .map(|g| index(g).unwrap())
            .collect();
        Ok(AutomorphismGroup {
            elements,
            table,
            generators,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Close `points` under every element.
    pub fn orbit(&self, points: &[Arc<Point>]) -> Result<Vec<Arc<Point>>> {
        let mut out: Vec<Arc<Point>> = points.to_vec();
        for g in &self.elements {
            for p in points {
                out.push(g.map_point(p)?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

/// A lift `sigma` of `gamma` to the cover: `sigma(t^(i)) = sum_j a[i][j] t^(j) + w[i]`.
#[derive(Clone, Debug)]
pub struct CoverAutomorphism {
    pub base: CurveAutomorphism,
    /// Entries in `Z/p^n`.
    pub matrix: ZMat,
    pub w: Vec<WittVector<CurveFunction>>,
}

fn wp(v: &WittVector<CurveFunction>) -> WittVector<CurveFunction> {
    v.frobenius().sub(v)
}

fn witt_apply(g: &CurveAutomorphism, v: &WittVector<CurveFunction>) -> Result<WittVector<CurveFunction>> {
    let c = v.coords().iter().map(|f| g.apply(f)).collect::<Result<Vec<_>>>()?;
    Ok(WittVector::new(v.prime(), c))
}

fn witt_combination(
    z: &ZMod,
    row: &[u64],
    vs: &[WittVector<CurveFunction>],
    like: &WittVector<CurveFunction>,
) -> WittVector<CurveFunction> {
    let p = like.prime();
    let n = like.len();
    let mut acc = WittVector::zero(p, n, like.coord(0));
    for (a, v) in row.iter().zip(vs) {
        if *a % z.q != 0 {
            acc = acc.add(&v.scale_fp(&int_to_witt_fp(p, n, &BigInt::from(*a))));
        }
    }
    acc
}

fn companion(et: &H1EtBasis, i: usize) -> WittVector<CurveFunction> {
    WittVector::new(et.curve().characteristic(), et.h[i].clone())
}

/// Solve `F(v) - v = u` in `W_n(k)` coordinate by coordinate.
fn solve_wp_constant(u: &[Fe]) -> Result<Vec<Fe>> {
    let p = u[0].characteristic();
    let s = structure(p, u.len())?;
    let mut v: Vec<Fe> = Vec::new();
    for (j, uj) in u.iter().enumerate() {
        let q = if j == 0 { uj.zero_like() } else { s.universal()[j].eval(&v) };
        v.push(solve_artin_schreier_scalar(&uj.sub(&q), 1)?);
    }
    Ok(v)
}

/// Lift `gamma` to the maximal abelian `p^n`-cover described by `et`.
pub fn lift_automorphism(et: &H1EtBasis, gamma: &CurveAutomorphism) -> Result<CoverAutomorphism> {
    let curve = et.curve().clone();
    let p = curve.characteristic();
    let n = et.level;
    let z = ZMod::new(p as u64, n as u32);
    let fs: Vec<WittVector<CurveFunction>> = (0..et.rank()).map(|i| companion(et, i)).collect();
    let mut matrix = Vec::new();
    let mut w = Vec::new();
    for (i, rep) in et.reps.iter().enumerate() {
        let pulled = rep
            .coords()
            .iter()
            .map(|c| gamma.pullback(c, et.support()))
            .collect::<Result<Vec<_>>>()?;
        let (h, alpha) = coordinates_in_basis_witt(et, &WittAdele::new(pulled)?)?;
        let row: Vec<u64> = alpha
            .iter()
            .map(|a| witt_fp_to_int(p, a).to_u64().unwrap() % z.q)
            .collect();
        let h = WittVector::new(p, h);
        let u = witt_apply(gamma, &fs[i])?
            .sub(&witt_combination(&z, &row, &fs, &fs[i]))
            .sub(&wp(&h));
        let consts = u
            .coords()
            .iter()
            .map(|f| {
                f.constant_value().ok_or_else(|| {
                    AswError::Inconsistent(format!("lift of branch {i}: {f} is not constant"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let v = solve_wp_constant(&consts)?;
        let vf = WittVector::new(p, v.iter().map(|c| CurveFunction::constant(&curve, c)).collect());
        w.push(h.add(&vf));
        matrix.push(row);
    }
    let lift = CoverAutomorphism {
        base: gamma.clone(),
        matrix,
        w,
    };
    lift.verify(et)?;
    Ok(lift)
}

impl CoverAutomorphism {
    /// Check `wp(sigma(t^(i))) = gamma(f^(i))` using `wp(t^(j)) = f^(j)`.
    pub fn verify(&self, et: &H1EtBasis) -> Result<()> {
        let p = et.curve().characteristic();
        let z = ZMod::new(p as u64, et.level as u32);
        let fs: Vec<WittVector<CurveFunction>> = (0..et.rank()).map(|i| companion(et, i)).collect();
        for i in 0..et.rank() {
            let lhs = witt_combination(&z, &self.matrix[i], &fs, &fs[i]).add(&wp(&self.w[i]));
            let rhs = witt_apply(&self.base, &fs[i])?;
            if lhs != rhs {
                return Err(AswError::Inconsistent(format!(
                    "lifted automorphism does not respect tower equation {i}"
                )));
            }
        }
        Ok(())
    }
}

/// An extension of a finite quotient `Gamma` by translations `(Z/p^n)^s`.
///
/// Element `(g, a)` stands for `L_g * T_a`, with `L_g` a chosen lift and
/// `T_a(t) = t + a`. Multiplication: `(g, a)(h, b) = (gh, c(g, h) + A_h a + b)`.
#[derive(Clone, Debug)]
pub struct ExtensionGroup {
    pub z: ZMod,
    pub s: usize,
    pub quotient_table: Vec<Vec<usize>>,
    pub quotient_generators: Vec<usize>,
    pub matrices: Vec<ZMat>,
    pub cocycle: Vec<Vec<Vec<u64>>>,
    size_t: usize,
}

impl ExtensionGroup {
    pub fn new(
        z: ZMod,
        s: usize,
        quotient_table: Vec<Vec<usize>>,
        quotient_generators: Vec<usize>,
        matrices: Vec<ZMat>,
        cocycle: Vec<Vec<Vec<u64>>>,
    ) -> Result<ExtensionGroup> {
        let size_t = (z.q as usize)
            .checked_pow(s as u32)
            .filter(|t| t.checked_mul(quotient_table.len()).is_some_and(|o| o <= 1 << 26))
            .ok_or_else(|| AswError::Unsupported("group too large".into()))?;
        let g = ExtensionGroup {
            z,
            s,
            quotient_table,
            quotient_generators,
            matrices,
            cocycle,
            size_t,
        };
        g.check_quotient()?;
        Ok(g)
    }

    /// A finite group given by its table, with no translation part.
    pub fn from_table(z: ZMod, table: Vec<Vec<usize>>, generators: Vec<usize>) -> Result<ExtensionGroup> {
        let k = table.len();
        ExtensionGroup::new(
            z,
            0,
            table,
            generators,
            vec![Vec::new(); k],
            vec![vec![Vec::new(); k]; k],
        )
    }

    /// `(Z/p^n)^s`.
    pub fn translations(z: ZMod, s: usize) -> Result<ExtensionGroup> {
        ExtensionGroup::new(z, s, vec![vec![0]], Vec::new(), vec![z.identity(s)], vec![vec![vec![0; s]]])
    }

    fn check_quotient(&self) -> Result<()> {
        let t = &self.quotient_table;
        let k = t.len();
        if k == 0 || t.iter().any(|r| r.len() != k) || (0..k).any(|i| t[0][i] != i || t[i][0] != i) {
            return Err(AswError::Inconsistent("quotient table must have identity at index 0".into()));
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if t[t[a][b]][c] != t[a][t[b][c]] {
                        return Err(AswError::Inconsistent("quotient table is not associative".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.quotient_table.len() * self.size_t
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn quotient(&self, g: usize) -> usize {
        g / self.size_t
    }

    pub fn translation(&self, g: usize) -> Vec<u64> {
        let mut r = g % self.size_t;
        let q = self.z.q as usize;
        (0..self.s)
            .map(|_| {
                let d = r % q;
                r /= q;
                d as u64
            })
            .collect()
    }

    pub fn element(&self, gamma: usize, a: &[u64]) -> usize {
        let q = self.z.q as usize;
        let mut idx = 0;
        for &d in a.iter().rev() {
            idx = idx * q + (d % self.z.q) as usize;
        }
        gamma * self.size_t + idx
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        let (gq, hq) = (self.quotient(g), self.quotient(h));
        let a = self.translation(g);
        let b = self.translation(h);
        let ah = self.z.mat_vec(&self.matrices[hq], &a);
        let c = &self.cocycle[gq][hq];
        let sum: Vec<u64> = (0..self.s)
            .map(|i| self.z.add(self.z.add(c[i], ah[i]), b[i]))
            .collect();
        self.element(self.quotient_table[gq][hq], &sum)
    }

    /// Lifts of the quotient generators, then the unit translations.
    pub fn generators(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .quotient_generators
            .iter()
            .map(|&g| self.element(g, &vec![0; self.s]))
            .collect();
        for i in 0..self.s {
            let mut e = vec![0; self.s];
            e[i] = 1;
            out.push(self.element(0, &e));
        }
        out
    }

    /// Identity and associativity on all triples drawn from `sample`, plus
    /// existence of inverses for the generators.
    pub fn check_axioms(&self, sample: &[usize]) -> Result<()> {
        for &a in sample {
            if self.mul(a, 0) != a || self.mul(0, a) != a {
                return Err(AswError::Inconsistent("identity law fails".into()));
            }
            for &b in sample {
                let ab = self.mul(a, b);
                for &c in sample {
                    if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                        return Err(AswError::Inconsistent("group law is not associative".into()));
                    }
                }
            }
        }
        for g in self.generators() {
            let mut x = g;
            let mut k = 1;
            while x != 0 {
                x = self.mul(x, g);
                k += 1;
                if k > self.order() {
                    return Err(AswError::Inconsistent("generator of infinite order".into()));
                }
            }
        }
        Ok(())
    }
}

/// `M = sum Z/p^{orders[i]}` with the action of each quotient generator.
#[derive(Clone, Debug, PartialEq)]
pub struct SheafModule {
    pub orders: Vec<u32>,
    pub actions: Vec<ZMat>,
}

impl SheafModule {
    pub fn trivial(n: u32, generators: usize) -> SheafModule {
        SheafModule {
            orders: vec![n],
            actions: vec![vec![vec![1]]; generators],
        }
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    fn scale_rows(&self, z: &ZMod, row: usize) -> u64 {
        z.pow_p(z.n - self.orders[row])
    }

    /// Action matrices for every quotient element, checked against the table.
    fn quotient_actions(&self, z: &ZMod, g: &ExtensionGroup) -> Result<Vec<ZMat>> {
        let m = self.rank();
        if self.orders.iter().any(|&e| e > z.n) {
            return Err(AswError::Dimension("module exponent exceeds n".into()));
        }
        if self.actions.len() != g.quotient_generators.len()
            || self.actions.iter().any(|a| a.len() != m || a.iter().any(|r| r.len() != m))
        {
            return Err(AswError::Dimension("one m x m action matrix per quotient generator".into()));
        }
        for a in &self.actions {
            for i in 0..m {
                for j in 0..m {
                    let lhs = z.mul(a[i][j], z.pow_p(self.orders[j]));
                    if z.mul(lhs, self.scale_rows(z, i)) != 0 {
                        return Err(AswError::Inconsistent("action does not respect the module relations".into()));
                    }
                }
            }
        }
        let k = g.quotient_table.len();
        let mut rho: Vec<Option<ZMat>> = vec![None; k];
        rho[0] = Some(z.identity(m));
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (gi, &gen) in g.quotient_generators.iter().enumerate() {
                let y = g.quotient_table[x][gen];
                let cand = z.mat_mul(rho[x].as_ref().unwrap(), &self.actions[gi]);
                match &rho[y] {
                    None => {
                        rho[y] = Some(cand);
                        queue.push_back(y);
                    }
                    Some(old) => {
                        if !self.same_map(z, old, &cand) {
                            return Err(AswError::Inconsistent(
                                "module action does not factor through the group".into(),
                            ));
                        }
                    }
                }
            }
        }
        rho.into_iter()
            .map(|r| r.ok_or_else(|| AswError::Inconsistent("quotient generators do not generate".into())))
            .collect()
    }

    fn same_map(&self, z: &ZMod, a: &ZMat, b: &ZMat) -> bool {
        (0..self.rank()).all(|i| {
            let s = self.scale_rows(z, i);
            (0..self.rank()).all(|j| z.mul(z.sub(a[i][j], b[i][j]), s) == 0)
        })
    }
}

/// The two-term complex `M -> Hom_cr(G, M)` and its cohomology.
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyComplex {
    pub p: u64,
    pub n: u32,
    pub group_order: usize,
    /// Group generators, as element indices.
    pub generators: Vec<usize>,
    /// Exponents of `M`.
    pub module: Vec<u32>,
    /// Generators of the crossed homomorphisms, by their values on the group generators.
    pub crossed_generators: Vec<Vec<u64>>,
    /// Exponents of `Hom_cr(G, M)`.
    pub crossed: Vec<u32>,
    /// Rows: generator-major blocks of `g m - m`.
    pub differential: ZMat,
    pub h0: Vec<u32>,
    pub h1: Vec<u32>,
}

impl CohomologyComplex {
    pub fn h0_order(&self) -> BigInt {
        order_of(self.p, &self.h0)
    }

    pub fn h1_order(&self) -> BigInt {
        order_of(self.p, &self.h1)
    }
}

fn order_of(p: u64, exps: &[u32]) -> BigInt {
    BigInt::from(p).pow(exps.iter().sum())
}

/// Values `f(g)` of a crossed homomorphism for every group element, as linear
/// maps of the unknown generator images.
struct CrossedSystem {
    /// `coeff[g]`: `m` rows of length `m K`.
    coeff: Vec<ZMat>,
    constraints: Vec<Vec<u64>>,
}

fn crossed_system(g: &ExtensionGroup, module: &SheafModule, rho: &[ZMat]) -> Result<CrossedSystem> {
    let z = g.z;
    let m = module.rank();
    let gens = g.generators();
    let k = gens.len();
    let width = m * k;
    let order = g.order();
    let mut coeff: Vec<Option<ZMat>> = vec![None; order];
    coeff[0] = Some(vec![vec![0; width]; m]);
    let mut seen_rows: HashSet<Vec<u64>> = HashSet::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        let cx = coeff[x].clone().unwrap();
        let r = &rho[g.quotient(x)];
        for (gi, &gen) in gens.iter().enumerate() {
            let y = g.mul(x, gen);
            let mut cand = cx.clone();
            for i in 0..m {
                for j in 0..m {
                    let slot = &mut cand[i][gi * m + j];
                    *slot = z.add(*slot, r[i][j]);
                }
            }
            match &coeff[y] {
                None => {
                    coeff[y] = Some(cand);
                    queue.push_back(y);
                }
                Some(old) => {
                    for i in 0..m {
                        let s = module.scale_rows(&z, i);
                        let row: Vec<u64> = (0..width).map(|c| z.mul(z.sub(old[i][c], cand[i][c]), s)).collect();
                        if row.iter().any(|&v| v != 0) {
                            seen_rows.insert(row);
                        }
                    }
                }
            }
        }
    }
    let coeff = coeff
        .into_iter()
        .map(|c| c.ok_or_else(|| AswError::Inconsistent("generators do not reach every element".into())))
        .collect::<Result<Vec<_>>>()?;
    let mut constraints: Vec<Vec<u64>> = seen_rows.into_iter().collect();
    constraints.sort();
    Ok(CrossedSystem { coeff, constraints })
}

fn relation_lattice(z: &ZMod, orders: &[u32], blocks: usize) -> Vec<Vec<u64>> {
    let m = orders.len();
    let mut out = Vec::new();
    for b in 0..blocks {
        for (j, &e) in orders.iter().enumerate() {
            if e < z.n {
                let mut v = vec![0; m * blocks];
                v[b * m + j] = z.pow_p(e);
                out.push(v);
            }
        }
    }
    out
}

/// Crossed homomorphisms `G -> M` and the cohomology of `M -> Hom_cr(G, M)`.
pub fn compute_cohomology_complex(g: &ExtensionGroup, module: &SheafModule) -> Result<CohomologyComplex> {
    let z = g.z;
    let m = module.rank();
    let rho = module.quotient_actions(&z, g)?;
    let gens = g.generators();
    let k = gens.len();
    let width = m * k;
    let lambda = relation_lattice(&z, &module.orders, k);
    let (crossed_generators, crossed) = if m == 0 {
        (Vec::new(), Vec::new())
    } else {
        let sys = crossed_system(g, module, &rho)?;
        let ker = z.kernel(&sys.constraints, width);
        let inv = z.quotient_invariants(&ker, &lambda, width);
        (ker, inv)
    };
    let mut differential = vec![vec![0u64; m]; width];
    for (gi, &gen) in gens.iter().enumerate() {
        let r = &rho[g.quotient(gen)];
        for i in 0..m {
            for j in 0..m {
                let v = z.sub(r[i][j], u64::from(i == j));
                differential[gi * m + i][j] = v;
            }
        }
    }
    let boundary: Vec<Vec<u64>> = (0..m)
        .map(|j| (0..width).map(|r| differential[r][j]).collect())
        .collect();
    let mut w = boundary;
    w.extend(lambda.iter().cloned());
    let h1 = if m == 0 { Vec::new() } else { z.quotient_invariants(&crossed_generators, &w, width) };
    let fixed_rows: Vec<Vec<u64>> = (0..width)
        .map(|r| {
            let s = module.scale_rows(&z, r % m);
            differential[r].iter().map(|&x| z.mul(x, s)).collect()
        })
        .collect();
    let h0 = if m == 0 {
        Vec::new()
    } else {
        let fixed = z.kernel(&fixed_rows, m);
        z.quotient_invariants(&fixed, &relation_lattice(&z, &module.orders, 1), m)
    };
    Ok(CohomologyComplex {
        p: z.p,
        n: z.n,
        group_order: g.order(),
        generators: gens,
        module: module.orders.clone(),
        crossed_generators,
        crossed,
        differential,
        h0,
        h1,
    })
}

/// Check `f(gh) = f(g) + g f(h)` for every crossed generator and every pair.
pub fn verify_crossed_law(g: &ExtensionGroup, module: &SheafModule, complex: &CohomologyComplex) -> Result<()> {
    let z = g.z;
    let m = module.rank();
    if m == 0 {
        return Ok(());
    }
    let rho = module.quotient_actions(&z, g)?;
    let sys = crossed_system(g, module, &rho)?;
    let mods: Vec<u64> = module.orders.iter().map(|&e| z.p.pow(e)).collect();
    let values: Vec<Vec<Vec<u64>>> = complex
        .crossed_generators
        .iter()
        .map(|x| {
            sys.coeff
                .iter()
                .map(|c| z.mat_vec(c, x).iter().zip(&mods).map(|(v, md)| v % md).collect())
                .collect()
        })
        .collect();
    let order = g.order();
    let table = Multiplier::new(g);
    let nq = g.quotient_table.len();
    // acted[f][gq][b] = rho(gq) f(b)
    let acted: Vec<Vec<Vec<Vec<u64>>>> = values
        .iter()
        .map(|f| {
            (0..nq)
                .map(|gq| {
                    f.iter()
                        .map(|fb| z.mat_vec(&rho[gq], fb).iter().zip(&mods).map(|(v, md)| v % md).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    for a in 0..order {
        let qa = g.quotient(a);
        for b in 0..order {
            let ab = table.mul(a, b);
            for (f, act) in values.iter().zip(&acted) {
                let gb = &act[qa][b];
                for i in 0..m {
                    if (f[a][i] + gb[i]) % mods[i] != f[ab][i] {
                        return Err(AswError::Inconsistent(format!(
                            "crossed homomorphism law fails at ({a}, {b})"
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Allocation-free multiplication for the all-pairs loops: the action of each
/// quotient element on translations and the cocycle, both index-encoded.
struct Multiplier<'a> {
    g: &'a ExtensionGroup,
    /// `acted[hq][t]` = index of `A_hq t`.
    acted: Vec<Vec<usize>>,
    /// `cocycle[gq][hq]` as an index.
    cocycle: Vec<Vec<usize>>,
}

impl<'a> Multiplier<'a> {
    fn new(g: &'a ExtensionGroup) -> Multiplier<'a> {
        let nq = g.quotient_table.len();
        let acted = (0..nq)
            .map(|hq| {
                (0..g.size_t)
                    .map(|t| g.element(0, &g.z.mat_vec(&g.matrices[hq], &g.translation(t))))
                    .collect()
            })
            .collect();
        let cocycle = (0..nq)
            .map(|gq| (0..nq).map(|hq| g.element(0, &g.cocycle[gq][hq])).collect())
            .collect();
        Multiplier { g, acted, cocycle }
    }

    fn add_translations(&self, mut x: usize, mut y: usize) -> usize {
        let q = self.g.z.q as usize;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.g.s {
            out += ((x % q + y % q) % q) * place;
            x /= q;
            y /= q;
            place *= q;
        }
        out
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        let g = self.g;
        let (qa, ta) = (a / g.size_t, a % g.size_t);
        let (qb, tb) = (b / g.size_t, b % g.size_t);
        let t = self.add_translations(self.add_translations(self.cocycle[qa][qb], self.acted[qb][ta]), tb);
        g.quotient_table[qa][qb] * g.size_t + t
    }
}

/// The automorphism group of `Y^<p^n>` over `Y / Gamma`.
#[derive(Clone, Debug)]
pub struct CoverGroup {
    pub et: H1EtBasis,
    pub gamma: AutomorphismGroup,
    pub lifts: Vec<CoverAutomorphism>,
    pub group: ExtensionGroup,
}

/// Build `Aut(Y^<p^n> | Y/Gamma)` from generators of `Gamma`.
pub fn cover_group(basis: &H1Basis, hw: &Mat, n: usize, gamma_gens: &[CurveAutomorphism]) -> Result<CoverGroup> {
    let curve = basis.curve.clone();
    let p = curve.characteristic() as u64;
    let z = ZMod::new(p, n as u32);
    let gamma = AutomorphismGroup::generate(&curve, gamma_gens, 4096)?;
    let mut et = compute_h1_from_hw(basis, hw, n)?;
    let orbit = gamma.orbit(&basis.points)?;
    et.enlarge_support(&orbit);
    let lifts = gamma
        .elements
        .iter()
        .map(|g| lift_automorphism(&et, g))
        .collect::<Result<Vec<_>>>()?;
    let s = et.rank();
    let k = gamma.order();
    let mut cocycle = vec![vec![Vec::new(); k]; k];
    let fs: Vec<WittVector<CurveFunction>> = (0..s).map(|i| companion(&et, i)).collect();
    let like = fs.first().cloned();
    for a in 0..k {
        for b in 0..k {
            let ab = gamma.table[a][b];
            let (la, lb, lab) = (&lifts[a], &lifts[b], &lifts[ab]);
            if z.mat_mul(&lb.matrix, &la.matrix) != lab.matrix {
                return Err(AswError::Inconsistent(
                    "lift matrices are not compatible with composition".into(),
                ));
            }
            let mut c = Vec::with_capacity(s);
            for i in 0..s {
                let like = like.as_ref().unwrap();
                let term = witt_combination(&z, &lb.matrix[i], &la.w, like)
                    .add(&witt_apply(&gamma.elements[a], &lb.w[i])?)
                    .sub(&lab.w[i]);
                let digits = term
                    .coords()
                    .iter()
                    .map(|f| f.constant_value().and_then(|v| v.minimal().as_prime()))
                    .collect::<Option<Vec<u32>>>()
                    .ok_or_else(|| AswError::Inconsistent("composite of lifts is not a translation".into()))?;
                c.push(witt_fp_to_int(p as u32, &digits).to_u64().unwrap() % z.q);
            }
            cocycle[a][b] = c;
        }
    }
    let matrices = lifts.iter().map(|l| l.matrix.clone()).collect();
    let group = ExtensionGroup::new(z, s, gamma.table.clone(), gamma.generators.clone(), matrices, cocycle)?;
    Ok(CoverGroup {
        et,
        gamma,
        lifts,
        group,
    })
}

/// Elements used for the sampled associativity check.
pub fn axiom_sample(g: &ExtensionGroup, limit: usize) -> Vec<usize> {
    if g.order() <= limit {
        return (0..g.order()).collect();
    }
    let mut out: Vec<usize> = vec![0];
    out.extend(g.generators());
    let mut x = 0;
    let gens = g.generators();
    let mut map: HashMap<usize, ()> = out.iter().map(|&v| (v, ())).collect();
    let mut i = 0;
    while out.len() < limit && !gens.is_empty() {
        x = g.mul(x, gens[i % gens.len()]);
        i += 1;
        if map.insert(x, ()).is_none() {
            out.push(x);
        }
        if i > 8 * limit {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_h1(g: &ExtensionGroup, module: &SheafModule) -> (usize, usize) {
        // all maps G -> M for cyclic M = Z/p^e; counts crossed and principal ones
        let z = g.z;
        let md = z.p.pow(module.orders[0]);
        let rho = module.quotient_actions(&z, g).unwrap();
        let order = g.order();
        let act = |x: usize, v: u64| (rho[g.quotient(x)][0][0] * v) % md;
        let mut crossed = 0;
        let total = (md as usize).pow(order as u32);
        for code in 0..total {
            let mut c = code;
            let f: Vec<u64> = (0..order)
                .map(|_| {
                    let d = c % md as usize;
                    c /= md as usize;
                    d as u64
                })
                .collect();
            if (0..order).all(|a| (0..order).all(|b| f[g.mul(a, b)] == (f[a] + act(a, f[b])) % md)) {
                crossed += 1;
            }
        }
        let principal: HashSet<Vec<u64>> = (0..md)
            .map(|m| (0..order).map(|x| (act(x, m) + md - m) % md).collect())
            .collect();
        (crossed, principal.len())
    }

    #[test]
    fn sign_action_of_order_two_on_z9() {
        let z = ZMod::new(3, 2);
        let g = ExtensionGroup::from_table(z, vec![vec![0, 1], vec![1, 0]], vec![1]).unwrap();
        let module = SheafModule {
            orders: vec![2],
            actions: vec![vec![vec![8]]],
        };
        let c = compute_cohomology_complex(&g, &module).unwrap();
        verify_crossed_law(&g, &module, &c).unwrap();
        assert_eq!(c.crossed, vec![2]);
        assert!(c.h1.is_empty());
        assert!(c.h0.is_empty());
        let (crossed, principal) = brute_force_h1(&g, &module);
        assert_eq!((crossed, principal), (9, 9));
    }

    #[test]
    fn translations_with_trivial_module() {
        let z = ZMod::new(5, 2);
        let g = ExtensionGroup::translations(z, 2).unwrap();
        let module = SheafModule::trivial(2, 0);
        let c = compute_cohomology_complex(&g, &module).unwrap();
        assert_eq!(c.h0, vec![2]);
        assert_eq!(c.h1, vec![2, 2]);
        verify_crossed_law(&g, &module, &c).unwrap();
    }

    #[test]
    fn zero_module_gives_zero_complex() {
        let z = ZMod::new(3, 1);
        let g = ExtensionGroup::translations(z, 1).unwrap();
        let module = SheafModule {
            orders: Vec::new(),
            actions: Vec::new(),
        };
        let c = compute_cohomology_complex(&g, &module).unwrap();
        assert!(c.h0.is_empty() && c.h1.is_empty() && c.crossed.is_empty());
    }

    #[test]
    fn symmetric_group_matches_enumeration() {
        // S_3 as Z/3 extended by Z/2 acting by -1
        let z = ZMod::new(3, 1);
        let table = vec![vec![0, 1], vec![1, 0]];
        let g = ExtensionGroup::new(z, 1, table, vec![1], vec![vec![vec![1]], vec![vec![2]]], vec![vec![vec![0]; 2]; 2]).unwrap();
        assert_eq!(g.order(), 6);
        g.check_axioms(&(0..6).collect::<Vec<_>>()).unwrap();
        for sign in [1u64, 2] {
            let module = SheafModule {
                orders: vec![1],
                actions: vec![vec![vec![sign]]],
            };
            let c = compute_cohomology_complex(&g, &module).unwrap();
            verify_crossed_law(&g, &module, &c).unwrap();
            let (crossed, principal) = brute_force_h1(&g, &module);
            assert_eq!(c.h1_order(), BigInt::from(crossed / principal));
        }
    }

    use crate::curve::parse_function;
    use crate::field::DEFAULT_SEED;
    use crate::fixtures;

    fn trivial_sheaf(fx: &fixtures::Fixture, n: usize) -> CohomologyComplex {
        let cg = cover_group(&fx.basis, &fx.hasse_witt, n, &[]).unwrap();
        let module = SheafModule::trivial(n as u32, 0);
        let c = compute_cohomology_complex(&cg.group, &module).unwrap();
        verify_crossed_law(&cg.group, &module, &c).unwrap();
        assert_eq!(c.h1, vec![n as u32; cg.et.rank()]);
        c
    }

    #[test]
    fn genus_two_trivial_sheaf() {
        let fx = fixtures::genus_two(DEFAULT_SEED).unwrap();
        for n in 1..=2 {
            let c = trivial_sheaf(&fx, n);
            assert_eq!(c.h0, vec![n as u32]);
            assert_eq!(c.group_order, 3usize.pow(n as u32));
        }
    }

    #[test]
    fn fermat_trivial_sheaf_level_one() {
        let fx = fixtures::fermat_quartic(DEFAULT_SEED).unwrap();
        let c = trivial_sheaf(&fx, 1);
        assert_eq!(c.h1, vec![1, 1, 1]);
    }

    #[test]
    fn hyperelliptic_involution_lift() {
        let fx = fixtures::genus_two(DEFAULT_SEED).unwrap();
        let c = &fx.curve;
        let iota = CurveAutomorphism::new(parse_function(c, "x").unwrap(), parse_function(c, "-y").unwrap()).unwrap();
        let cg = cover_group(&fx.basis, &fx.hasse_witt, 1, &[iota]).unwrap();
        assert_eq!(cg.group.order(), 6);
        assert_eq!(cg.lifts[1].matrix, vec![vec![2]]);
        for l in &cg.lifts {
            l.verify(&cg.et).unwrap();
        }
        cg.group.check_axioms(&(0..6).collect::<Vec<_>>()).unwrap();
        for sign in [1u64, 2] {
            let module = SheafModule {
                orders: vec![1],
                actions: vec![vec![vec![sign]]],
            };
            let cx = compute_cohomology_complex(&cg.group, &module).unwrap();
            verify_crossed_law(&cg.group, &module, &cx).unwrap();
            let (crossed, principal) = brute_force_h1(&cg.group, &module);
            assert_eq!(cx.h1_order(), BigInt::from(crossed / principal));
        }
        let fast = Multiplier::new(&cg.group);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(fast.mul(a, b), cg.group.mul(a, b));
            }
        }
    }

    #[test]
    fn multiplier_matches_group_law_on_level_two_translations() {
        let fx = fixtures::genus_two(DEFAULT_SEED).unwrap();
        let c = &fx.curve;
        let iota = CurveAutomorphism::new(parse_function(c, "x").unwrap(), parse_function(c, "-y").unwrap()).unwrap();
        let cg = cover_group(&fx.basis, &fx.hasse_witt, 2, &[iota]).unwrap();
        let fast = Multiplier::new(&cg.group);
        let order = cg.group.order();
        assert_eq!(order, 18);
        for a in 0..order {
            for b in 0..order {
                assert_eq!(fast.mul(a, b), cg.group.mul(a, b));
            }
        }
    }
}
