//! End-to-end acceptance run: one line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use asw::adele::AdeleClass;
use asw::cover::{
    alpha_to_int, compute_h1_from_hw, compute_maximal_cover, coordinates_in_basis_witt, wp_certificate, CoverTower,
    H1EtBasis, WittAdele,
};
use asw::curve::parse_function;
use asw::field::{Fe, Field, FieldLattice, DEFAULT_SEED};
use asw::fixtures::{self, Fixture};
use asw::intpoly::IntPoly;
use asw::linalg;
use asw::semilinear::SemilinearOperator;
use asw::sheaf::{compute_cohomology_complex, cover_group, verify_crossed_law, ExtensionGroup, SheafModule};
use asw::solvers::field_elements;
use asw::witt::{int_to_witt_fp, WittVector};
use asw::zmod::ZMod;

/// Wall-clock budget for the two golden runs together.
const GOLDEN_BUDGET: Duration = Duration::from_secs(300);
/// Random vectors per `(p, n)` in the Witt suite.
const WITT_SAMPLES: usize = 200;
/// Operators per `(q, d)` in the semilinear suite.
const SEMILINEAR_SAMPLES: usize = 12;
/// Largest `|L|^d` enumerated exhaustively.
const ENUMERATION_LIMIT: u64 = 1 << 16;
/// Random combinations per golden curve in the round-trip check.
const ROUND_TRIPS: usize = 12;

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

struct Golden {
    fixture: Fixture,
    et: H1EtBasis,
    tower: CoverTower,
    elapsed: Duration,
}

fn golden(fixture: Fixture, n: usize) -> std::result::Result<Golden, String> {
    let start = Instant::now();
    let (et, tower) = ok(compute_maximal_cover(&fixture.basis, &fixture.hasse_witt, n))?;
    Ok(Golden {
        fixture,
        et,
        tower,
        elapsed: start.elapsed(),
    })
}

/// `f = c * g` with `c` in the prime field.
fn prime_multiple(f: &asw::curve::CurveFunction, g: &asw::curve::CurveFunction) -> bool {
    match f.div(g) {
        Ok(ratio) => ratio
            .constant_value()
            .is_some_and(|c| !c.is_zero() && c.minimal().as_prime().is_some()),
        Err(_) => false,
    }
}

fn criterion_1(g: &Golden) -> Outcome {
    let et = &g.et;
    let curve = et.curve();
    ensure!(et.rank() == 1, "rank {} instead of 1", et.rank());
    let r0 = et.reps[0].coord(0);
    let pts = curve.points();
    ensure!(r0.support() == vec![pts[0].clone()], "level-1 support is not (0,2)");
    let inv_x = ok(parse_function(curve, "1/x"))?;
    ensure!(prime_multiple(r0.at(&pts[0]).unwrap(), &inv_x), "level-1 representative is not c/x at (0,2)");
    let second = g.tower.equations[1].universal_integer_string();
    ensure!(second == "-t_0^7 + t_0^5", "second universal part {second}");
    let pure = g.tower.equations[2].universal.kill_vars(&[1]);
    let expected = [(25u32, -1i64), (23, 4), (21, -9), (19, 13), (17, -13), (15, 9), (13, -4), (11, 1)]
        .iter()
        .fold(IntPoly::zero(), |acc, &(e, c)| acc.add(&IntPoly::var(0).pow(e).scale(&BigInt::from(c))));
    ensure!(pure.reduce_mod(3) == expected.reduce_mod(3), "third pure-t_0 part {}", pure.display(&["t_0".into()]));
    ensure!(g.elapsed < GOLDEN_BUDGET, "took {:?}", g.elapsed);
    Ok(format!("rank 1, tower parts match, {:.2?}", g.elapsed))
}

fn criterion_2(g: &Golden) -> Outcome {
    let et = &g.et;
    let curve = et.curve();
    ensure!(et.rank() == 3, "rank {} instead of 3", et.rank());
    let pts = curve.points();
    let listed = [(0, "1/x"), (1, "1/x"), (2, "1/y")];
    let mut used = [false; 3];
    for (k, f) in listed {
        let f = ok(parse_function(curve, f))?;
        let hit = et.reps.iter().enumerate().position(|(i, r)| {
            let r = r.coord(0);
            !used[i] && r.support() == vec![pts[k].clone()] && prime_multiple(r.at(&pts[k]).unwrap(), &f)
        });
        match hit {
            Some(i) => used[i] = true,
            None => {
                let a = AdeleClass::delta(&pts[k], &f);
                let moved = a.frobenius(1).sub(&a);
                let (coords, _) = ok(g.fixture.basis.coordinates(&ok(moved.local(0))?))?;
                let coords: Vec<String> = coords.iter().map(|c| c.minimal().to_string()).collect();
                return Err(format!(
                    "no representative is a multiple of the listed adele at point {k}; \
                     that adele is not Frobenius-fixed, F(a) - a has coordinates [{}]",
                    coords.join(", ")
                ));
            }
        }
    }
    ensure!(g.elapsed < GOLDEN_BUDGET, "took {:?}", g.elapsed);
    Ok(format!("rank 3, level-1 basis matches up to scalars, {:.2?}", g.elapsed))
}

fn criterion_3(goldens: &[&Golden]) -> Outcome {
    let mut checked = 0;
    for g in goldens {
        for m in 1..=g.et.level {
            let t = g.et.truncate(m);
            for (i, (r, h)) in t.reps.iter().zip(&t.h).enumerate() {
                ensure!(
                    ok(wp_certificate(t.support(), r, h))?,
                    "{} level {m} element {i} fails",
                    g.fixture.name
                );
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} certificates"))
}

fn ghost(p: u32, x: &[BigInt]) -> Vec<BigInt> {
    (0..x.len())
        .map(|i| {
            (0..=i)
                .map(|j| BigInt::from(p).pow(j as u32) * x[j].pow(p.pow((i - j) as u32)))
                .sum()
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut cases = 0;
    for p in [2u32, 3, 5] {
        let lat = ok(FieldLattice::get(p))?;
        let fq = ok(lat.field(2))?;
        let fp = lat.prime_field();
        for n in 1..=4usize {
            for _ in 0..WITT_SAMPLES {
                let ints: Vec<Vec<BigInt>> = (0..2)
                    .map(|_| (0..n).map(|_| BigInt::from(rng.gen_range(-40i64..=40))).collect())
                    .collect();
                let x = WittVector::new(p, ints[0].clone());
                let y = WittVector::new(p, ints[1].clone());
                let (gx, gy) = (ghost(p, x.coords()), ghost(p, y.coords()));
                let gsum: Vec<BigInt> = gx.iter().zip(&gy).map(|(a, b)| a + b).collect();
                let gprod: Vec<BigInt> = gx.iter().zip(&gy).map(|(a, b)| a * b).collect();
                ensure!(ghost(p, x.add(&y).coords()) == gsum, "ghost(x+y), p={p} n={n}");
                ensure!(ghost(p, x.mul(&y).coords()) == gprod, "ghost(xy), p={p} n={n}");
                let gv = ghost(p, x.verschiebung().coords());
                ensure!(gv[0].is_zero(), "ghost(Vx)_0, p={p} n={n}");
                for i in 1..n {
                    ensure!(gv[i] == BigInt::from(p) * &gx[i - 1], "ghost(Vx), p={p} n={n}");
                }

                // reduction to F_p is a ring map
                let red = |v: &WittVector<BigInt>| v.map(|c| Fe::from_i64(&fp, (c % BigInt::from(p)).try_into().unwrap()));
                ensure!(red(&x.add(&y)) == red(&x).add(&red(&y)), "reduction of x+y, p={p} n={n}");
                ensure!(red(&x.mul(&y)) == red(&x).mul(&red(&y)), "reduction of xy, p={p} n={n}");

                let rand_fe = |rng: &mut ChaCha8Rng, f: &Arc<Field>| {
                    Fe::from_coeffs(f, (0..f.degree()).map(|_| rng.gen_range(0..p)).collect())
                };
                let a = WittVector::new(p, (0..n).map(|_| rand_fe(&mut rng, &fq)).collect());
                let b = WittVector::new(p, (0..n).map(|_| rand_fe(&mut rng, &fq)).collect());
                let pa = a.int_mul(&BigInt::from(p));
                ensure!(a.verschiebung().frobenius() == pa, "FV != p, p={p} n={n}");
                ensure!(a.frobenius().verschiebung() == pa, "VF != p, p={p} n={n}");
                ensure!(a.add(&b).frobenius() == a.frobenius().add(&b.frobenius()), "F(a+b), p={p} n={n}");
                ensure!(a.mul(&b).frobenius() == a.frobenius().mul(&b.frobenius()), "F(ab), p={p} n={n}");
                ensure!(
                    a.verschiebung().mul(&b) == a.mul(&b.frobenius()).verschiebung(),
                    "V(a)b != V(aF(b)), p={p} n={n}"
                );
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases"))
}

fn random_matrix(rng: &mut ChaCha8Rng, f: &Arc<Field>, d: usize) -> linalg::Mat {
    let p = f.characteristic();
    (0..d)
        .map(|_| {
            (0..d)
                .map(|_| Fe::from_coeffs(f, (0..f.degree()).map(|_| rng.gen_range(0..p)).collect()))
                .collect()
        })
        .collect()
}

fn field_of_vectors(base: &Arc<Field>, vs: &[&[Fe]]) -> Arc<Field> {
    let zero = Fe::zero(base);
    let mut refs: Vec<&Fe> = vec![&zero];
    for v in vs {
        refs.extend(v.iter());
    }
    asw::field::common_field_of(&refs)
}

fn all_vectors(elems: &[Fe], d: usize) -> Vec<Vec<Fe>> {
    let mut out: Vec<Vec<Fe>> = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                elems.iter().map(move |e| {
                    let mut w = v.clone();
                    w.push(e.clone());
                    w
                })
            })
            .collect();
    }
    out
}

fn sub_vec(a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut enumerated = 0;
    let mut solved = 0;
    for q in [2u32, 3] {
        let lat = ok(FieldLattice::get(q))?;
        let fq2 = ok(lat.field(2))?;
        for d in 1..=2usize {
            let mut done = 0;
            let mut attempts = 0;
            while done < SEMILINEAR_SAMPLES {
                attempts += 1;
                ensure!(attempts < 50 * SEMILINEAR_SAMPLES, "too few enumerable operators for q={q} d={d}");
                let op = ok(SemilinearOperator::new(random_matrix(&mut rng, &fq2, d), 1))?;
                let fixed = ok(op.fixed_points_of_invertible_part())?;
                let refs: Vec<&[Fe]> = fixed.iter().map(|v| v.as_slice()).collect();
                let big = field_of_vectors(op.field(), &refs);
                let m: Vec<Fe> = random_matrix(&mut rng, &fq2, d).swap_remove(0);
                let x = ok(op.inhom_solve(&m))?;
                solved += 1;
                let residual = sub_vec(&sub_vec(&ok(op.apply(&x))?, &x), &m);
                ensure!(residual.iter().all(|v| v.is_zero()), "inhom residual nonzero, q={q} d={d}");
                for b in &fixed {
                    ensure!(ok(op.apply(b))? == *b, "basis vector not fixed, q={q} d={d}");
                    let c = Fe::from_u32(&lat.prime_field(), rng.gen_range(1..q));
                    let y: Vec<Fe> = x.iter().zip(b).map(|(xi, bi)| xi.add(&c.mul(bi))).collect();
                    let r = sub_vec(&sub_vec(&ok(op.apply(&y))?, &y), &m);
                    ensure!(r.iter().all(|v| v.is_zero()), "shifted solution fails, q={q} d={d}");
                }
                let field = field_of_vectors(&big, &[&x]);
                let size = (q as u64).pow((field.degree() * d) as u32);
                if size > ENUMERATION_LIMIT {
                    continue;
                }
                let lifted: Vec<Vec<Fe>> =
                    fixed.iter().map(|v| v.iter().map(|e| e.embed(&field).unwrap()).collect()).collect();
                ensure!(linalg::rank(&lifted) == fixed.len(), "fixed basis dependent, q={q} d={d}");
                let mut n_fixed = 0u64;
                let mut n_sol = 0u64;
                for v in all_vectors(&field_elements(&field), d) {
                    let fv = ok(op.apply(&v))?;
                    let diff = sub_vec(&fv, &v);
                    if diff.iter().all(|e| e.is_zero()) {
                        n_fixed += 1;
                    }
                    if sub_vec(&diff, &m).iter().all(|e| e.is_zero()) {
                        n_sol += 1;
                        let shift = sub_vec(&v, &x);
                        ensure!(
                            sub_vec(&ok(op.apply(&shift))?, &shift).iter().all(|e| e.is_zero()),
                            "two solutions differ by a non-fixed vector, q={q} d={d}"
                        );
                    }
                }
                let expected = (q as u64).pow(fixed.len() as u32);
                ensure!(n_fixed == expected, "{n_fixed} fixed vectors by enumeration, {expected} from the basis");
                ensure!(n_sol == expected, "{n_sol} solutions by enumeration, expected {expected}");
                enumerated += 1;
                done += 1;
            }
        }
    }
    Ok(format!("{enumerated} operators enumerated, {solved} inhomogeneous solves"))
}

fn unit(s: usize, i: usize) -> Vec<BigInt> {
    (0..s).map(|j| BigInt::from(u8::from(i == j))).collect()
}

fn ints_of(p: u32, alpha: &[Vec<u32>]) -> Vec<BigInt> {
    alpha.iter().map(|a| alpha_to_int(p, a)).collect()
}

fn criterion_6(goldens: &[&Golden]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut trips = 0;
    for g in goldens {
        let name = g.fixture.name;
        let et = &g.et;
        let p = et.curve().characteristic();
        let n = et.level;
        let s = et.rank();
        let modulus = BigInt::from(p).pow(n as u32);
        for (i, r) in et.reps.iter().enumerate() {
            let (_, alpha) = ok(coordinates_in_basis_witt(et, r))?;
            ensure!(ints_of(p, &alpha) == unit(s, i), "{name}: basis element {i} has coordinates {alpha:?}");
        }
        for _ in 0..ROUND_TRIPS {
            let k: Vec<BigInt> = (0..s).map(|_| BigInt::from(rng.gen_range(0..p.pow(n as u32)))).collect();
            let mut acc: Option<WittAdele> = None;
            for (ki, r) in k.iter().zip(&et.reps) {
                let term = r.scale_fp(&int_to_witt_fp(p, n, ki));
                acc = Some(match acc {
                    None => term,
                    Some(a) => ok(a.add(&term))?,
                });
            }
            let (_, alpha) = ok(coordinates_in_basis_witt(et, &acc.unwrap()))?;
            let got: Vec<BigInt> = ints_of(p, &alpha).into_iter().map(|v| v % &modulus).collect();
            ensure!(got == k, "{name}: combination {k:?} came back as {got:?}");
            trips += 1;
        }
        for m in 1..n {
            let low = ok(compute_h1_from_hw(&g.fixture.basis, &g.fixture.hasse_witt, m))?;
            ensure!(low.rank() == s, "{name}: rank {} at level {m}", low.rank());
            let t = et.truncate(m);
            for (i, r) in t.reps.iter().enumerate() {
                let (_, alpha) = ok(coordinates_in_basis_witt(&low, r))?;
                ensure!(ints_of(p, &alpha) == unit(s, i), "{name}: truncation to level {m} differs at {i}");
            }
        }
    }
    Ok(format!("unit coordinates, {trips} round trips, truncations agree"))
}

fn criterion_7() -> Outcome {
    let mut lines = Vec::new();
    for (fixture, s) in [(fixtures::genus_two as fn(u64) -> _, 1usize), (fixtures::fermat_quartic, 3)] {
        for n in 1..=2u32 {
            let fx = ok(fixture(DEFAULT_SEED))?;
            let start = Instant::now();
            let cg = ok(cover_group(&fx.basis, &fx.hasse_witt, n as usize, &[]))?;
            let module = SheafModule::trivial(n, 0);
            let c = ok(compute_cohomology_complex(&cg.group, &module))?;
            ok(verify_crossed_law(&cg.group, &module, &c))?;
            let et = ok(compute_h1_from_hw(&fx.basis, &fx.hasse_witt, n as usize))?;
            ensure!(et.rank() == s, "{}: rank {}", fx.name, et.rank());
            ensure!(c.h1 == vec![n; s], "{} n={n}: H^1 exponents {:?}", fx.name, c.h1);
            ensure!(c.h0 == vec![n], "{} n={n}: H^0 exponents {:?}", fx.name, c.h0);
            lines.push(format!("{} n={n} |G|={} {:.1?}", fx.name, cg.group.order(), start.elapsed()));
        }
    }
    let z = ZMod::new(3, 2);
    let g = ok(ExtensionGroup::from_table(z, vec![vec![0, 1], vec![1, 0]], vec![1]))?;
    let module = SheafModule {
        orders: vec![2],
        actions: vec![vec![vec![8]]],
    };
    let c = ok(compute_cohomology_complex(&g, &module))?;
    ok(verify_crossed_law(&g, &module, &c))?;
    ensure!(c.h1.is_empty(), "sign action: H^1 exponents {:?}", c.h1);
    Ok(format!("{}; sign action H^1 = 0", lines.join(", ")))
}

fn criterion_8(goldens: &[&Golden]) -> Outcome {
    let mut records = 0;
    let mut total = Duration::ZERO;
    for g in goldens {
        for r in &g.et.poles {
            ensure!(
                r.order <= r.bound,
                "{}: branch {} level {} pole order {} over {}",
                g.fixture.name,
                r.branch,
                r.level,
                r.order,
                r.bound
            );
            records += 1;
        }
        total += g.elapsed;
    }
    ensure!(total < GOLDEN_BUDGET, "golden runs took {total:?}");
    Ok(format!("{records} pole records within bound, golden runs {total:.2?}"))
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panic: {msg}"))
    });
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(detail) => {
            println!("PASS {name} ({secs:.1}s): {detail}");
            true
        }
        Err(detail) => {
            println!("FAIL {name} ({secs:.1}s): {detail}");
            false
        }
    }
}

fn main() {
    let g71 = golden(fixtures::genus_two(DEFAULT_SEED).unwrap(), 3);
    let g72 = golden(fixtures::fermat_quartic(DEFAULT_SEED).unwrap(), 2);
    let both = || -> std::result::Result<[&Golden; 2], String> {
        match (&g71, &g72) {
            (Ok(a), Ok(b)) => Ok([a, b]),
            (Err(e), _) | (_, Err(e)) => Err(format!("golden run failed: {e}")),
        }
    };
    let results = [
        run("1 genus-two golden run", || criterion_1(g71.as_ref().map_err(|e| e.clone())?)),
        run("2 fermat-quartic golden run", || criterion_2(g72.as_ref().map_err(|e| e.clone())?)),
        run("3 certificate suite", || criterion_3(&both()?)),
        run("4 witt oracle suite", criterion_4),
        run("5 semilinear oracle suite", criterion_5),
        run("6 structure of H^1", || criterion_6(&both()?)),
        run("7 sheaf consistency", criterion_7),
        run("8 pole growth and budget", || criterion_8(&both()?)),
    ];
    let failed = results.iter().filter(|r| !**r).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
