use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use asw::field::{Fe, Field, FieldLattice};
use asw::semilinear::SemilinearOperator;
use asw::solvers::solve_artin_schreier_scalar;
use asw::witt::{int_to_witt_fp, witt_fp_to_int, WittVector};
use asw::zmod::ZMod;

fn ghost(p: u32, x: &[BigInt]) -> Vec<BigInt> {
    (0..x.len())
        .map(|i| {
            (0..=i)
                .map(|j| BigInt::from(p).pow(j as u32) * x[j].pow(p.pow((i - j) as u32)))
                .sum()
        })
        .collect()
}

fn prime() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(3), Just(5)]
}

/// `(p, n)` with `n <= 4`, `n <= 3` for `p = 5` to keep case counts up.
fn prime_and_length() -> impl Strategy<Value = (u32, usize)> {
    prime().prop_flat_map(|p| (Just(p), 1..=if p == 5 { 3usize } else { 4 }))
}

fn int_vec(n: usize) -> impl Strategy<Value = Vec<BigInt>> {
    prop::collection::vec((-60i64..=60).prop_map(BigInt::from), n)
}

fn fe(field: &Arc<Field>, digits: &[u32]) -> Fe {
    Fe::from_coeffs(field, digits.iter().map(|d| d % field.characteristic()).collect())
}

fn f_sq(p: u32) -> Arc<Field> {
    FieldLattice::get(p).unwrap().field(2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ghost_map_is_additive_and_multiplicative(
        (p, _n, x, y) in prime_and_length().prop_flat_map(|(p, n)| (Just(p), Just(n), int_vec(n), int_vec(n)))
    ) {
        let wx = WittVector::new(p, x.clone());
        let wy = WittVector::new(p, y.clone());
        let (gx, gy) = (ghost(p, &x), ghost(p, &y));
        let sum: Vec<BigInt> = gx.iter().zip(&gy).map(|(a, b)| a + b).collect();
        let prod: Vec<BigInt> = gx.iter().zip(&gy).map(|(a, b)| a * b).collect();
        let neg: Vec<BigInt> = gx.iter().map(|a| -a).collect();
        prop_assert_eq!(ghost(p, wx.add(&wy).coords()), sum);
        prop_assert_eq!(ghost(p, wx.mul(&wy).coords()), prod);
        prop_assert_eq!(ghost(p, wx.neg().coords()), neg);
    }

    #[test]
    fn frobenius_and_verschiebung_identities(
        (p, _n, a, b) in prime_and_length().prop_flat_map(|(p, n)| (
            Just(p),
            Just(n),
            prop::collection::vec(prop::collection::vec(0u32..5, 2), n),
            prop::collection::vec(prop::collection::vec(0u32..5, 2), n),
        ))
    ) {
        let k = f_sq(p);
        let a = WittVector::new(p, a.iter().map(|d| fe(&k, d)).collect());
        let b = WittVector::new(p, b.iter().map(|d| fe(&k, d)).collect());
        let pa = a.int_mul(&BigInt::from(p));
        prop_assert_eq!(a.verschiebung().frobenius(), pa.clone());
        prop_assert_eq!(a.frobenius().verschiebung(), pa);
        prop_assert_eq!(a.add(&b).frobenius(), a.frobenius().add(&b.frobenius()));
        prop_assert_eq!(a.mul(&b).frobenius(), a.frobenius().mul(&b.frobenius()));
        prop_assert_eq!(a.verschiebung().mul(&b), a.mul(&b.frobenius()).verschiebung());
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn prime_field_witt_vectors_are_integers_mod_pn(
        (p, n, k, l) in prime_and_length().prop_flat_map(|(p, n)| (Just(p), Just(n), 0i64..10_000, 0i64..10_000))
    ) {
        let fp = FieldLattice::get(p).unwrap().prime_field();
        let as_witt = |v: i64| WittVector::new(
            p,
            int_to_witt_fp(p, n, &BigInt::from(v)).iter().map(|&d| Fe::from_u32(&fp, d)).collect(),
        );
        let back = |w: &WittVector<Fe>| {
            witt_fp_to_int(p, &w.coords().iter().map(|c| c.as_prime().unwrap()).collect::<Vec<_>>())
        };
        let q = BigInt::from(p).pow(n as u32);
        let modq = |v: BigInt| ((v % &q) + &q) % &q;
        prop_assert_eq!(back(&as_witt(k).add(&as_witt(l))), modq(BigInt::from(k + l)));
        prop_assert_eq!(back(&as_witt(k).mul(&as_witt(l))), modq(BigInt::from(k * l)));
        prop_assert_eq!(back(&as_witt(k).neg()), modq(BigInt::from(-k)));
    }

    #[test]
    fn scale_fp_is_repeated_addition(
        (p, n, a, k) in prime_and_length().prop_flat_map(|(p, n)| (
            Just(p),
            Just(n),
            prop::collection::vec(prop::collection::vec(0u32..5, 2), n),
            0u32..30,
        ))
    ) {
        let field = f_sq(p);
        let a = WittVector::new(p, a.iter().map(|d| fe(&field, d)).collect());
        let alpha = int_to_witt_fp(p, n, &BigInt::from(k));
        let mut acc = WittVector::zero(p, n, &Fe::zero(&field));
        for _ in 0..k {
            acc = acc.add(&a);
        }
        prop_assert_eq!(a.scale_fp(&alpha), acc);
    }

    #[test]
    fn truncation_is_a_ring_map(
        (p, n, x, y) in prime_and_length().prop_flat_map(|(p, n)| (Just(p), Just(n), int_vec(n), int_vec(n)))
    ) {
        let wx = WittVector::new(p, x);
        let wy = WittVector::new(p, y);
        for m in 1..=n {
            prop_assert_eq!(wx.add(&wy).truncate(m), wx.truncate(m).add(&wy.truncate(m)));
            prop_assert_eq!(wx.mul(&wy).truncate(m), wx.truncate(m).mul(&wy.truncate(m)));
        }
    }
}

fn operator(q: u32, d: usize, entries: &[Vec<u32>]) -> SemilinearOperator {
    let k = f_sq(q);
    let m = (0..d).map(|i| (0..d).map(|j| fe(&k, &entries[i * d + j])).collect()).collect();
    SemilinearOperator::new(m, 1).unwrap()
}

fn is_zero_vec(v: &[Fe]) -> bool {
    v.iter().all(|x| x.is_zero())
}

fn residual(op: &SemilinearOperator, x: &[Fe], m: &[Fe]) -> Vec<Fe> {
    let fx = op.apply(x).unwrap();
    fx.iter().zip(x).zip(m).map(|((a, b), c)| a.sub(b).sub(c)).collect()
}

fn semilinear_case() -> impl Strategy<Value = (u32, usize, Vec<Vec<u32>>, Vec<Vec<u32>>)> {
    (prop_oneof![Just(2u32), Just(3)], 1usize..=3).prop_flat_map(|(q, d)| {
        (
            Just(q),
            Just(d),
            prop::collection::vec(prop::collection::vec(0u32..3, 2), d * d),
            prop::collection::vec(prop::collection::vec(0u32..3, 2), d),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fixed_points_are_fixed_and_independent((q, d, entries, _) in semilinear_case()) {
        let op = operator(q, d, &entries);
        let fixed = op.fixed_points_of_invertible_part().unwrap();
        prop_assert_eq!(fixed.len(), op.stable_rank());
        for v in &fixed {
            prop_assert_eq!(op.apply(v).unwrap(), v.clone());
        }
        let common = asw::field::unify_all(&fixed.concat());
        let rows: Vec<Vec<Fe>> = common.chunks(d.max(1)).map(|c| c.to_vec()).collect();
        prop_assert_eq!(asw::linalg::rank(&rows), fixed.len());
    }

    #[test]
    fn inhomogeneous_solutions_form_a_coset((q, d, entries, rhs) in semilinear_case()) {
        let op = operator(q, d, &entries);
        let k = f_sq(q);
        let m: Vec<Fe> = rhs.iter().map(|e| fe(&k, e)).collect();
        let x = op.inhom_solve(&m).unwrap();
        prop_assert!(is_zero_vec(&residual(&op, &x, &m)));
        let fp = FieldLattice::get(q).unwrap().prime_field();
        for (i, b) in op.fixed_points_of_invertible_part().unwrap().iter().enumerate() {
            let c = Fe::from_u32(&fp, (i as u32 + 1) % q);
            let y: Vec<Fe> = x.iter().zip(b).map(|(xi, bi)| xi.add(&c.mul(bi))).collect();
            prop_assert!(is_zero_vec(&residual(&op, &y, &m)));
        }
    }

    #[test]
    fn artin_schreier_scalar_solves((q, digits) in (prop_oneof![Just(2u32), Just(3), Just(5)], prop::collection::vec(0u32..5, 2))) {
        let k = f_sq(q);
        let c = fe(&k, &digits);
        let lam = solve_artin_schreier_scalar(&c, 1).unwrap();
        let (l, c2) = Fe::unify(&lam, &c);
        prop_assert_eq!(l.pow(q as u64).sub(&l), c2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn zmod_kernel_and_image_sizes(
        (p, n, rows, cols, entries) in (prop_oneof![Just(2u64), Just(3), Just(5)], 1u32..=3, 1usize..=3, 1usize..=3)
            .prop_flat_map(|(p, n, r, c)| (Just(p), Just(n), Just(r), Just(c), prop::collection::vec(0u64..125, r * c)))
    ) {
        let z = ZMod::new(p, n);
        let a: Vec<Vec<u64>> = (0..rows).map(|i| (0..cols).map(|j| entries[i * cols + j] % z.q).collect()).collect();
        let ker = z.kernel(&a, cols);
        for g in &ker {
            prop_assert!(z.mat_vec(&a, g).iter().all(|&x| x == 0));
        }
        let image: Vec<Vec<u64>> = (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect();
        prop_assert_eq!(z.span_log(&ker, cols) + z.span_log(&image, rows), n * cols as u32);

        // brute-force kernel size over (Z/p^n)^cols
        let total = (z.q as usize).pow(cols as u32);
        if total <= 4096 {
            let mut count = 0u32;
            for idx in 0..total {
                let mut v = Vec::with_capacity(cols);
                let mut r = idx;
                for _ in 0..cols {
                    v.push((r % z.q as usize) as u64);
                    r /= z.q as usize;
                }
                if z.mat_vec(&a, &v).iter().all(|&x| x == 0) {
                    count += 1;
                }
            }
            prop_assert_eq!(BigInt::from(count), BigInt::from(p).pow(z.span_log(&ker, cols)));
        }
    }
}

#[test]
fn witt_zero_is_neutral() {
    let w = WittVector::new(3, vec![BigInt::from(4), BigInt::from(-2), BigInt::from(7)]);
    let z = WittVector::zero(3, 3, &BigInt::zero());
    assert_eq!(w.add(&z), w);
    assert!(w.sub(&w).is_zero());
}
