//! JSON formats: curve input, `H^1` and tower reports, sheaf input and the
//! cohomology report.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::adele::{AdeleClass, H1Basis};
use crate::bipoly::parse_bipoly;
use crate::cover::{CoverTower, H1EtBasis, WittAdele};
use crate::curve::{parse_function, Curve, CurveFunction, Family, Point, PointKind, PointSpec};
use crate::error::{AswError, Result};
use crate::field::{parse_fe, FieldLattice, DEFAULT_SEED};
use crate::linalg::Mat;
use crate::sheaf::{CohomologyComplex, CoverGroup, CurveAutomorphism, SheafModule};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformiserJson {
    pub num: String,
    pub den: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub infinity: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniformiser: Option<UniformiserJson>,
}

/// Curve input file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveJson {
    pub p: u32,
    #[serde(default = "one")]
    pub base_degree: usize,
    /// `hyperelliptic` or `smooth_plane`.
    pub family: String,
    pub equation: String,
    pub points: Vec<PointJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hasse_witt: Option<Vec<Vec<String>>>,
}

fn one() -> usize {
    1
}

fn parse_family(s: &str) -> Result<Family> {
    match s {
        "hyperelliptic" => Ok(Family::Hyperelliptic),
        "smooth_plane" | "smooth-plane" | "plane" => Ok(Family::SmoothPlane),
        _ => Err(AswError::Parse(format!("unknown curve family {s:?}"))),
    }
}

fn point_kind(lat: &Arc<FieldLattice>, pj: &PointJson) -> Result<PointKind> {
    if pj.infinity {
        return Ok(PointKind::Infinity);
    }
    match (&pj.x, &pj.y) {
        (Some(x), Some(y)) => Ok(PointKind::Affine {
            x: parse_fe(lat, x)?,
            y: parse_fe(lat, y)?,
        }),
        _ => Err(AswError::Parse("a point needs x and y, or infinity".into())),
    }
}

pub fn point_json(pt: &Point) -> PointJson {
    match pt.kind() {
        PointKind::Infinity => PointJson {
            x: None,
            y: None,
            infinity: true,
            uniformiser: None,
        },
        PointKind::Affine { x, y } => PointJson {
            x: Some(x.minimal().to_string()),
            y: Some(y.minimal().to_string()),
            infinity: false,
            uniformiser: None,
        },
    }
}

impl CurveJson {
    pub fn parse(text: &str) -> Result<CurveJson> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn build(&self, seed: u64) -> Result<Arc<Curve>> {
        let lat = FieldLattice::with_seed(self.p, seed)?;
        let family = parse_family(&self.family)?;
        let eq = parse_bipoly(&lat, &self.equation)?;
        let mut specs = Vec::new();
        for pj in &self.points {
            let uniformiser = match &pj.uniformiser {
                Some(u) => Some((parse_bipoly(&lat, &u.num)?, parse_bipoly(&lat, &u.den)?)),
                None => None,
            };
            specs.push(PointSpec {
                kind: point_kind(&lat, pj)?,
                uniformiser,
            });
        }
        Curve::new(&lat, self.base_degree, family, &eq, &specs)
    }

    pub fn hasse_witt(&self, curve: &Curve) -> Result<Option<Mat>> {
        self.hasse_witt
            .as_ref()
            .map(|rows| parse_matrix_rows(curve.lattice(), rows))
            .transpose()
    }
}

fn parse_matrix_rows(lat: &Arc<FieldLattice>, rows: &[Vec<String>]) -> Result<Mat> {
    rows.iter()
        .map(|r| r.iter().map(|e| parse_fe(lat, e)).collect())
        .collect()
}

/// `1,0;0,0` style inline matrices.
pub fn parse_inline_matrix(lat: &Arc<FieldLattice>, s: &str) -> Result<Mat> {
    let rows: Vec<Vec<String>> = s
        .split(';')
        .map(|r| r.split(',').map(|e| e.trim().to_string()).collect())
        .collect();
    if rows.iter().any(|r| r.iter().any(|e| e.is_empty())) {
        return Err(AswError::Parse(format!("malformed matrix {s:?}")));
    }
    parse_matrix_rows(lat, &rows)
}

/// A matrix given inline, as a JSON array of string rows, or as a path to either.
pub fn parse_matrix_arg(lat: &Arc<FieldLattice>, arg: &str) -> Result<Mat> {
    let text = if std::path::Path::new(arg).is_file() {
        std::fs::read_to_string(arg)?
    } else {
        arg.to_string()
    };
    let t = text.trim();
    if t.starts_with('[') {
        let v: serde_json::Value = serde_json::from_str(t)?;
        let rows = v
            .as_array()
            .ok_or_else(|| AswError::Parse("matrix must be an array of rows".into()))?
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| AswError::Parse("matrix row must be an array".into()))?
                    .iter()
                    .map(|e| match e {
                        serde_json::Value::String(s) => Ok(s.clone()),
                        serde_json::Value::Number(n) => Ok(n.to_string()),
                        _ => Err(AswError::Parse("matrix entries must be strings or integers".into())),
                    })
                    .collect::<Result<Vec<String>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        parse_matrix_rows(lat, &rows)
    } else {
        parse_inline_matrix(lat, t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdeleEntryJson {
    pub point: PointJson,
    pub function: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoleJson {
    pub branch: usize,
    pub level: usize,
    pub order: i64,
    pub bound: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationJson {
    pub branch: usize,
    pub index: usize,
    pub equation: String,
    pub universal_integer: String,
}

/// Report written by `h1` and `cover`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverReport {
    pub p: u32,
    pub seed: u64,
    pub rank: usize,
    pub level: usize,
    /// `basis[i][j]`: coordinate `j` of representative `i`.
    pub basis: Vec<Vec<Vec<AdeleEntryJson>>>,
    pub h: Vec<Vec<String>>,
    pub pole_growth: Vec<PoleJson>,
    pub certified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tower: Option<Vec<EquationJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<String>,
}

fn adele_json(a: &AdeleClass) -> Vec<AdeleEntryJson> {
    a.entries()
        .iter()
        .map(|(p, f)| AdeleEntryJson {
            point: point_json(p),
            function: f.descend().to_string(),
        })
        .collect()
}

impl CoverReport {
    pub fn from_basis(et: &H1EtBasis, seed: u64, certified: bool, tower: Option<&CoverTower>) -> CoverReport {
        let p = et.curve().characteristic();
        CoverReport {
            p,
            seed,
            rank: et.rank(),
            level: et.level,
            basis: et
                .reps
                .iter()
                .map(|r| r.coords().iter().map(adele_json).collect())
                .collect(),
            h: et
                .h
                .iter()
                .map(|h| h.iter().map(|f| f.descend().to_string()).collect())
                .collect(),
            pole_growth: et
                .poles
                .iter()
                .map(|r| PoleJson {
                    branch: r.branch,
                    level: r.level,
                    order: r.order,
                    bound: r.bound,
                })
                .collect(),
            certified,
            tower: tower.map(|t| {
                t.equations
                    .iter()
                    .map(|e| EquationJson {
                        branch: e.branch,
                        index: e.index,
                        equation: e.equation(),
                        universal_integer: e.universal_integer_string(),
                    })
                    .collect()
            }),
            degree: tower.map(|t| t.degree(p).to_string()),
        }
    }

    /// Representatives and companion functions as values on `curve`.
    pub fn decode(&self, curve: &Arc<Curve>) -> Result<(Vec<WittAdele>, Vec<Vec<CurveFunction>>)> {
        let mut reps = Vec::new();
        for r in &self.basis {
            let coords = r
                .iter()
                .map(|c| decode_adele(curve, c))
                .collect::<Result<Vec<_>>>()?;
            reps.push(WittAdele::new(coords)?);
        }
        let h = self
            .h
            .iter()
            .map(|v| v.iter().map(|s| parse_function(curve, s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok((reps, h))
    }
}

/// Find the point with the given description, designated or not.
pub fn lookup_point(curve: &Arc<Curve>, pj: &PointJson) -> Result<Arc<Point>> {
    let kind = point_kind(curve.lattice(), pj)?;
    if let Some(p) = curve.point(&kind) {
        return Ok(p);
    }
    if let PointKind::Affine { x, y } = &kind {
        for q in curve.line_points(x)? {
            if let PointKind::Affine { y: qy, .. } = q.kind() {
                if qy == y {
                    return Ok(q);
                }
            }
        }
    }
    Err(AswError::Parse("point is not on the curve".into()))
}

pub fn decode_adele(curve: &Arc<Curve>, entries: &[AdeleEntryJson]) -> Result<AdeleClass> {
    let mut out = Vec::new();
    for e in entries {
        out.push((lookup_point(curve, &e.point)?, parse_function(curve, &e.function)?));
    }
    Ok(AdeleClass::from_entries(curve, out))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismJson {
    pub x: String,
    pub y: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleJson {
    /// Invariant-factor exponents: `M = sum Z/p^{orders[i]}`.
    pub orders: Vec<u32>,
    /// One matrix per automorphism generator.
    pub actions: Vec<Vec<Vec<u64>>>,
}

/// Sheaf input: generators of `Aut(Y|X)` on `K_Y` and the module `H^0(Y, L)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheafJson {
    #[serde(default)]
    pub automorphisms: Vec<AutomorphismJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<ModuleJson>,
}

impl SheafJson {
    pub fn automorphisms(&self, curve: &Arc<Curve>) -> Result<Vec<CurveAutomorphism>> {
        self.automorphisms
            .iter()
            .map(|a| CurveAutomorphism::new(parse_function(curve, &a.x)?, parse_function(curve, &a.y)?))
            .collect()
    }

    /// The module, trivial `Z/p^n` when absent.
    pub fn module(&self, n: u32) -> SheafModule {
        match &self.module {
            Some(m) => SheafModule {
                orders: m.orders.clone(),
                actions: m.actions.clone(),
            },
            None => SheafModule::trivial(n, self.automorphisms.len()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupJson {
    pub order: usize,
    pub quotient_order: usize,
    pub translation_rank: usize,
    pub generators: Vec<usize>,
    pub quotient_table: Vec<Vec<usize>>,
    pub lift_matrices: Vec<Vec<Vec<u64>>>,
    pub cocycle: Vec<Vec<Vec<u64>>>,
}

/// Report written by `sheaf`; cyclic factors are listed by their orders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CohomologyReport {
    pub p: u64,
    pub n: u32,
    pub seed: u64,
    pub group: GroupJson,
    pub module: ModuleJson,
    pub crossed_generators: Vec<Vec<u64>>,
    pub crossed: Vec<String>,
    pub differential: Vec<Vec<u64>>,
    pub h0: Vec<String>,
    pub h1: Vec<String>,
}

fn factor_orders(p: u64, exps: &[u32]) -> Vec<String> {
    exps.iter()
        .map(|&e| num_bigint::BigInt::from(p).pow(e).to_string())
        .collect()
}

impl CohomologyReport {
    pub fn new(cg: &CoverGroup, module: &SheafModule, c: &CohomologyComplex, seed: u64) -> CohomologyReport {
        let g = &cg.group;
        CohomologyReport {
            p: c.p,
            n: c.n,
            seed,
            group: GroupJson {
                order: g.order(),
                quotient_order: g.quotient_table.len(),
                translation_rank: g.s,
                generators: c.generators.clone(),
                quotient_table: g.quotient_table.clone(),
                lift_matrices: g.matrices.clone(),
                cocycle: g.cocycle.clone(),
            },
            module: ModuleJson {
                orders: module.orders.clone(),
                actions: module.actions.clone(),
            },
            crossed_generators: c.crossed_generators.clone(),
            crossed: factor_orders(c.p, &c.crossed),
            differential: c.differential.clone(),
            h0: factor_orders(c.p, &c.h0),
            h1: factor_orders(c.p, &c.h1),
        }
    }
}

/// Curve and Hasse-Witt data for a job.
pub struct Loaded {
    pub curve: Arc<Curve>,
    pub basis: H1Basis,
    pub hasse_witt: Mat,
}

pub fn load(curve_text: &str, hw_arg: Option<&str>, seed: Option<u64>) -> Result<Loaded> {
    let cj = CurveJson::parse(curve_text)?;
    let curve = cj.build(seed.unwrap_or(DEFAULT_SEED))?;
    let hasse_witt = match hw_arg {
        Some(a) => parse_matrix_arg(curve.lattice(), a)?,
        None => cj
            .hasse_witt(&curve)?
            .ok_or_else(|| AswError::Parse("no Hasse-Witt matrix given".into()))?,
    };
    let basis = H1Basis::from_points(&curve, curve.points())?;
    Ok(Loaded {
        curve,
        basis,
        hasse_witt,
    })
}
