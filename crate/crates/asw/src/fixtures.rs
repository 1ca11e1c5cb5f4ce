//! The two worked examples: a genus-2 hyperelliptic curve over `F_3` and the
//! Fermat quartic over `F_5`, with their non-special points and Hasse-Witt matrices.

use std::sync::Arc;

use crate::adele::H1Basis;
use crate::bipoly::parse_bipoly;
use crate::curve::{Curve, Family, PointKind, PointSpec};
use crate::error::Result;
use crate::field::{Fe, FieldLattice};
use crate::linalg::Mat;

/// Curve, `H^1(X, O_X)` basis and Hasse-Witt matrix (column `i` = `F(b_i)`).
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub curve: Arc<Curve>,
    pub basis: H1Basis,
    pub hasse_witt: Mat,
}

fn affine_points(lat: &Arc<FieldLattice>, pts: &[(u32, u32)]) -> Vec<PointSpec> {
    let f = lat.prime_field();
    pts.iter()
        .map(|&(a, b)| PointSpec {
            kind: PointKind::Affine {
                x: Fe::from_u32(&f, a),
                y: Fe::from_u32(&f, b),
            },
            uniformiser: None,
        })
        .collect()
}

fn matrix(lat: &Arc<FieldLattice>, rows: &[&[u32]]) -> Mat {
    let f = lat.prime_field();
    rows.iter()
        .map(|r| r.iter().map(|&v| Fe::from_u32(&f, v)).collect())
        .collect()
}

fn build(
    name: &'static str,
    lat: Arc<FieldLattice>,
    family: Family,
    equation: &str,
    pts: &[(u32, u32)],
    hw: &[&[u32]],
) -> Result<Fixture> {
    let eq = parse_bipoly(&lat, equation)?;
    let curve = Curve::new(&lat, 1, family, &eq, &affine_points(&lat, pts))?;
    let basis = H1Basis::from_points(&curve, curve.points())?;
    Ok(Fixture {
        name,
        hasse_witt: matrix(&lat, hw),
        curve,
        basis,
    })
}

/// `y^2 = x^5 + x^2 + 1` over `F_3` at `(0,2), (2,2)`.
pub fn genus_two(seed: u64) -> Result<Fixture> {
    build(
        "genus-two",
        FieldLattice::with_seed(3, seed)?,
        Family::Hyperelliptic,
        "y^2 = x^5 + x^2 + 1",
        &[(0, 2), (2, 2)],
        &[&[1, 0], &[0, 0]],
    )
}

/// `x^4 + y^4 = 1` over `F_5` at `(0,4), (0,3), (4,0)`.
pub fn fermat_quartic(seed: u64) -> Result<Fixture> {
    build(
        "fermat-quartic",
        FieldLattice::with_seed(5, seed)?,
        Family::SmoothPlane,
        "x^4 + y^4 - 1",
        &[(0, 4), (0, 3), (4, 0)],
        &[&[1, 1, 2], &[3, 4, 2], &[0, 0, 3]],
    )
}
