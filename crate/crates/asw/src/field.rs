//! Finite fields `F_{p^m}` grown on demand inside a lattice with compatible embeddings.
//!
//! Every degree `m` gets a monic irreducible modulus drawn from a seeded generator.
//! When a degree is registered all its divisors are registered first, and the
//! embedding of each maximal proper subfield is the smallest root (in coefficient
//! order) of the subfield modulus that agrees with the embeddings already fixed on
//! the common subfields. Other embeddings are obtained by composition.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::{Arc, Mutex, OnceLock, RwLock, Weak};

use num_bigint::BigUint;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{AswError, Result};
use crate::upoly;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;
pub const DEFAULT_MAX_DEGREE: usize = 1_000_000;

/// One member `F_{p^m}` of a lattice. Elements are coefficient vectors in the
/// power basis of the generator `z<m>`.
pub struct Field {
    p: u32,
    m: usize,
    modulus: Vec<u32>,
    red: Vec<Vec<u32>>,
    frob: Vec<Vec<u32>>,
    lattice: Weak<FieldLattice>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.p, self.m)
    }
}

impl Field {
    fn new(p: u32, m: usize, modulus: Vec<u32>, lattice: Weak<FieldLattice>) -> Field {
        assert_eq!(modulus.len(), m + 1);
        let mut field = Field {
            p,
            m,
            modulus,
            red: Vec::new(),
            frob: Vec::new(),
            lattice,
        };
        // x^{m+i} mod modulus for i < m - 1
        let mut cur: Vec<u32> = field.modulus[..m].iter().map(|&c| (p - c) % p).collect();
        for _ in 0..m.saturating_sub(1) {
            field.red.push(cur.clone());
            cur = field.shift_reduce(&cur);
        }
        // frobenius images of the power basis
        let mut xp = vec![0u32; m];
        if m == 1 {
            xp[0] = 0;
        } else {
            let mut base = vec![0u32; m];
            base[1] = 1;
            xp = field.pow_raw(&base, &BigUint::from(p));
        }
        let mut one = vec![0u32; m];
        one[0] = 1 % p;
        let mut acc = one;
        for _ in 0..m {
            field.frob.push(acc.clone());
            acc = field.mul_raw(&acc, &xp);
        }
        field
    }

    fn shift_reduce(&self, a: &[u32]) -> Vec<u32> {
        let m = self.m;
        let top = a[m - 1];
        let mut out = vec![0u32; m];
        for i in (1..m).rev() {
            out[i] = a[i - 1];
        }
        if top != 0 {
            for i in 0..m {
                let sub = (top as u64 * self.modulus[i] as u64) % self.p as u64;
                out[i] = ((out[i] as u64 + self.p as u64 - sub) % self.p as u64) as u32;
            }
        }
        out
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn lattice(&self) -> Arc<FieldLattice> {
        self.lattice.upgrade().expect("field lattice dropped")
    }

    /// Order of the field as a big integer.
    pub fn order(&self) -> BigUint {
        BigUint::from(self.p).pow(self.m as u32)
    }

    pub(crate) fn reduce_wide(&self, acc: &mut [u64]) -> Vec<u32> {
        let m = self.m;
        let p = self.p as u64;
        if acc.len() > m {
            for i in (m..acc.len()).rev() {
                let c = acc[i] % p;
                if c != 0 {
                    let row = &self.red[i - m];
                    for j in 0..m {
                        acc[j] += c * row[j] as u64;
                    }
                }
            }
        }
        acc[..m].iter().map(|&v| (v % p) as u32).collect()
    }

    /// Accumulate the unreduced product of `a` and `b` into `acc` (length `2m - 1`).
    #[inline]
    pub(crate) fn mul_acc(&self, a: &[u32], b: &[u32], acc: &mut [u64]) {
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            let ai = ai as u64;
            let row = &mut acc[i..i + b.len()];
            for (slot, &bj) in row.iter_mut().zip(b.iter()) {
                *slot += ai * bj as u64;
            }
        }
    }

    pub(crate) fn mul_raw(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        if self.m == 1 {
            return vec![((a[0] as u64 * b[0] as u64) % self.p as u64) as u32];
        }
        let mut acc = vec![0u64; 2 * self.m - 1];
        self.mul_acc(a, b, &mut acc);
        self.reduce_wide(&mut acc)
    }

    pub(crate) fn add_raw(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = self.p;
        a.iter()
            .zip(b)
            .map(|(&x, &y)| {
                let s = x + y;
                if s >= p {
                    s - p
                } else {
                    s
                }
            })
            .collect()
    }

    pub(crate) fn sub_raw(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        let p = self.p;
        a.iter()
            .zip(b)
            .map(|(&x, &y)| if x >= y { x - y } else { x + p - y })
            .collect()
    }

    pub(crate) fn neg_raw(&self, a: &[u32]) -> Vec<u32> {
        let p = self.p;
        a.iter().map(|&x| if x == 0 { 0 } else { p - x }).collect()
    }

    pub(crate) fn scale_raw(&self, a: &[u32], s: u32) -> Vec<u32> {
        let p = self.p as u64;
        a.iter().map(|&x| ((x as u64 * s as u64) % p) as u32).collect()
    }

    pub(crate) fn frob_raw(&self, a: &[u32]) -> Vec<u32> {
        if self.m == 1 {
            return a.to_vec();
        }
        let mut acc = vec![0u64; self.m];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (slot, &v) in acc.iter_mut().zip(&self.frob[i]) {
                *slot += ai as u64 * v as u64;
            }
        }
        let p = self.p as u64;
        acc.iter().map(|&v| (v % p) as u32).collect()
    }

    pub(crate) fn pow_raw(&self, a: &[u32], e: &BigUint) -> Vec<u32> {
        let mut one = vec![0u32; self.m];
        one[0] = 1 % self.p;
        let mut result = one;
        let bits = e.bits();
        for i in (0..bits).rev() {
            result = self.mul_raw(&result, &result);
            if e.bit(i) {
                result = self.mul_raw(&result, a);
            }
        }
        result
    }

    pub(crate) fn inv_raw(&self, a: &[u32]) -> Option<Vec<u32>> {
        if a.iter().all(|&c| c == 0) {
            return None;
        }
        let p = self.p;
        if self.m == 1 {
            return Some(vec![inv_mod(a[0], p)]);
        }
        // extended Euclid on (modulus, a) over F_p
        let mut r0 = self.modulus.clone();
        let mut r1 = fp::trim(a.to_vec());
        let mut s0: Vec<u32> = vec![];
        let mut s1: Vec<u32> = vec![1];
        while !r1.is_empty() {
            let (q, r) = fp::divrem(&r0, &r1, p);
            let s2 = fp::sub(&s0, &fp::mul(&q, &s1, p), p);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
        }
        // r0 is a nonzero constant
        let c = inv_mod(r0[0], p);
        let mut out = vec![0u32; self.m];
        for (i, &v) in s0.iter().enumerate() {
            out[i] = ((v as u64 * c as u64) % p as u64) as u32;
        }
        Some(out)
    }
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut t, mut nt) = (0i64, 1i64);
    let (mut r, mut nr) = (p as i64, a as i64 % p as i64);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    assert_eq!(r, 1, "element not invertible mod p");
    (t.rem_euclid(p as i64)) as u32
}

/// Dense polynomial helpers over the prime field.
pub(crate) mod fp {
    pub fn trim(mut a: Vec<u32>) -> Vec<u32> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut out = vec![0u32; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            *slot = (x + p - y) % p;
        }
        trim(out)
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut acc = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                acc[i + j] = (acc[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        trim(acc.into_iter().map(|v| v as u32).collect())
    }

    pub fn divrem(a: &[u32], b: &[u32], p: u32) -> (Vec<u32>, Vec<u32>) {
        let b = trim(b.to_vec());
        assert!(!b.is_empty(), "division by zero polynomial");
        let mut r = trim(a.to_vec());
        if r.len() < b.len() {
            return (vec![], r);
        }
        let lead_inv = super::inv_mod(*b.last().unwrap(), p) as u64;
        let mut q = vec![0u32; r.len() - b.len() + 1];
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let c = (*r.last().unwrap() as u64 * lead_inv) % p as u64;
            q[shift] = c as u32;
            for (i, &bi) in b.iter().enumerate() {
                let sub = (c * bi as u64) % p as u64;
                r[shift + i] = ((r[shift + i] as u64 + p as u64 - sub) % p as u64) as u32;
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    pub fn rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        divrem(a, b, p).1
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut x = trim(a.to_vec());
        let mut y = trim(b.to_vec());
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        if let Some(&lead) = x.last() {
            let inv = super::inv_mod(lead, p) as u64;
            x = x.iter().map(|&c| ((c as u64 * inv) % p as u64) as u32).collect();
        }
        x
    }

    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        rem(&mul(a, b, p), m, p)
    }

    pub fn powmod(a: &[u32], e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let mut result = vec![1u32];
        let mut base = rem(a, m, p);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = mulmod(&result, &base, m, p);
            }
            base = mulmod(&base, &base, m, p);
            e >>= 1;
        }
        rem(&result, m, p)
    }

    /// Ben-Or irreducibility test.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let n = f.len() - 1;
        if n <= 1 {
            return n == 1;
        }
        let x = vec![0u32, 1];
        let mut xq = x.clone();
        for _ in 0..n / 2 {
            xq = powmod(&xq, p as u64, f, p);
            let diff = sub(&xq, &x, p);
            let g = gcd(f, &diff, p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

/// Data for the embedding `F_{p^from} -> F_{p^to}`.
pub struct Embedding {
    from: usize,
    to: usize,
    images: Vec<Vec<u32>>,
    section: OnceLock<Section>,
}

struct Section {
    pivots: Vec<usize>,
    inverse: Vec<Vec<u32>>,
}

impl Embedding {
    pub fn source_degree(&self) -> usize {
        self.from
    }

    pub fn target_degree(&self) -> usize {
        self.to
    }

    /// Image of the generator of the smaller field.
    pub fn generator_image(&self) -> &[u32] {
        if self.from == 1 {
            &self.images[0]
        } else {
            &self.images[1]
        }
    }

    fn apply(&self, a: &[u32], p: u32) -> Vec<u32> {
        let mut acc = vec![0u64; self.to];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (slot, &v) in acc.iter_mut().zip(&self.images[i]) {
                *slot += ai as u64 * v as u64;
            }
        }
        acc.iter().map(|&v| (v % p as u64) as u32).collect()
    }

    fn section(&self, p: u32) -> &Section {
        self.section.get_or_init(|| {
            // choose `from` independent coordinates of the image matrix and invert
            let rows = self.to;
            let cols = self.from;
            let mut mat: Vec<Vec<u32>> = (0..rows)
                .map(|r| (0..cols).map(|c| self.images[c][r]).collect())
                .collect();
            let mut pivots = Vec::new();
            let mut basis: Vec<(usize, Vec<u32>)> = Vec::new();
            // greedy row selection by incremental elimination
            let mut reduced: Vec<(usize, Vec<u32>)> = Vec::new();
            for (r, row) in mat.iter_mut().enumerate() {
                let mut v = row.clone();
                for (pc, prow) in &reduced {
                    let c = v[*pc];
                    if c != 0 {
                        for k in 0..cols {
                            let sub = (c as u64 * prow[k] as u64) % p as u64;
                            v[k] = ((v[k] as u64 + p as u64 - sub) % p as u64) as u32;
                        }
                    }
                }
                if let Some(pc) = v.iter().position(|&x| x != 0) {
                    let inv = inv_mod(v[pc], p) as u64;
                    for x in v.iter_mut() {
                        *x = ((*x as u64 * inv) % p as u64) as u32;
                    }
                    reduced.push((pc, v));
                    pivots.push(r);
                    basis.push((r, row.clone()));
                    if pivots.len() == cols {
                        break;
                    }
                }
            }
            // invert the square submatrix on the chosen rows
            let mut aug: Vec<Vec<u32>> = basis
                .iter()
                .enumerate()
                .map(|(i, (_, row))| {
                    let mut v = row.clone();
                    v.extend((0..cols).map(|j| u32::from(i == j)));
                    v
                })
                .collect();
            let n = cols;
            for col in 0..n {
                let piv = (col..n).find(|&r| aug[r][col] != 0).expect("singular section");
                aug.swap(col, piv);
                let inv = inv_mod(aug[col][col], p) as u64;
                for x in aug[col].iter_mut() {
                    *x = ((*x as u64 * inv) % p as u64) as u32;
                }
                for r in 0..n {
                    if r != col && aug[r][col] != 0 {
                        let c = aug[r][col] as u64;
                        let pivot_row = aug[col].clone();
                        for (x, &y) in aug[r].iter_mut().zip(&pivot_row) {
                            let sub = (c * y as u64) % p as u64;
                            *x = ((*x as u64 + p as u64 - sub) % p as u64) as u32;
                        }
                    }
                }
            }
            let inverse = aug.into_iter().map(|row| row[n..].to_vec()).collect();
            Section { pivots, inverse }
        })
    }

    /// Preimage of `b` if it lies in the image.
    fn preimage(&self, b: &[u32], p: u32) -> Option<Vec<u32>> {
        let sec = self.section(p);
        let rhs: Vec<u32> = sec.pivots.iter().map(|&r| b[r]).collect();
        // inverse is (B^{-1}) where B[i][j] = images[j][pivot_i]; solve B a = rhs
        let n = self.from;
        let mut a = vec![0u32; n];
        for (i, slot) in a.iter_mut().enumerate() {
            let mut acc = 0u64;
            for j in 0..n {
                acc += sec.inverse[i][j] as u64 * rhs[j] as u64;
            }
            *slot = (acc % p as u64) as u32;
        }
        if self.apply(&a, p) == b {
            Some(a)
        } else {
            None
        }
    }
}

struct LatticeState {
    fields: BTreeMap<usize, Arc<Field>>,
    embeds: HashMap<(usize, usize), Arc<Embedding>>,
}

/// The lazily grown lattice of extensions of `F_p`.
pub struct FieldLattice {
    p: u32,
    seed: u64,
    cap: AtomicUsize,
    state: RwLock<LatticeState>,
    registration: Mutex<()>,
    me: Weak<FieldLattice>,
}

impl fmt::Debug for FieldLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldLattice(p={}, seed={:#x})", self.p, self.seed)
    }
}

type Registry = Mutex<HashMap<(u32, u64), Arc<FieldLattice>>>;

fn registry() -> &'static Registry {
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

impl FieldLattice {
    /// Shared lattice for characteristic `p` with the default seed.
    pub fn get(p: u32) -> Result<Arc<FieldLattice>> {
        Self::with_seed(p, DEFAULT_SEED)
    }

    /// Shared lattice for `(p, seed)`; identical requests return the same lattice.
    pub fn with_seed(p: u32, seed: u64) -> Result<Arc<FieldLattice>> {
        if !is_prime(p) || p >= 1 << 16 {
            return Err(AswError::Unsupported(format!(
                "characteristic {p} must be a prime below 65536"
            )));
        }
        let mut reg = registry().lock().unwrap();
        if let Some(l) = reg.get(&(p, seed)) {
            return Ok(l.clone());
        }
        let lat = Arc::new_cyclic(|me| FieldLattice {
            p,
            seed,
            cap: AtomicUsize::new(DEFAULT_MAX_DEGREE),
            state: RwLock::new(LatticeState {
                fields: BTreeMap::new(),
                embeds: HashMap::new(),
            }),
            registration: Mutex::new(()),
            me: me.clone(),
        });
        reg.insert((p, seed), lat.clone());
        Ok(lat)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn max_degree(&self) -> usize {
        self.cap.load(AtomicOrdering::Relaxed)
    }

    pub fn set_max_degree(&self, cap: usize) {
        self.cap.store(cap.max(1), AtomicOrdering::Relaxed);
    }

    /// Degrees registered so far, ascending.
    pub fn registered_degrees(&self) -> Vec<usize> {
        self.state.read().unwrap().fields.keys().copied().collect()
    }

    /// The field of degree `m`, registering it (and its divisors) if needed.
    pub fn field(&self, m: usize) -> Result<Arc<Field>> {
        if m == 0 {
            return Err(AswError::Unsupported("field degree must be positive".into()));
        }
        if let Some(f) = self.state.read().unwrap().fields.get(&m) {
            return Ok(f.clone());
        }
        let cap = self.max_degree();
        if m > cap {
            return Err(AswError::DegreeCap { requested: m, cap });
        }
        let _guard = self.registration.lock().unwrap();
        self.register_locked(m)
    }

    pub fn prime_field(&self) -> Arc<Field> {
        self.field(1).expect("prime field")
    }

    /// Smallest registered field containing both degrees.
    pub fn common_field(&self, a: usize, b: usize) -> Result<Arc<Field>> {
        self.field(a.lcm(&b))
    }

    pub fn embedding(&self, from: usize, to: usize) -> Result<Arc<Embedding>> {
        if !to.is_multiple_of(from) {
            return Err(AswError::Dimension(format!(
                "no embedding of degree {from} into degree {to}"
            )));
        }
        self.field(to)?;
        let st = self.state.read().unwrap();
        Ok(st.embeds.get(&(from, to)).expect("embedding registered").clone())
    }

    fn register_locked(&self, m: usize) -> Result<Arc<Field>> {
        if let Some(f) = self.state.read().unwrap().fields.get(&m) {
            return Ok(f.clone());
        }
        for d in divisors(m) {
            if d < m {
                self.register_locked(d)?;
            }
        }
        let p = self.p;
        let modulus = if m == 1 {
            vec![0, 1]
        } else {
            self.seeded_modulus(m)
        };
        let field = Arc::new(Field::new(p, m, modulus, self.me.clone()));
        let mut new_embeds: HashMap<usize, Vec<Vec<u32>>> = HashMap::new();
        let mut one = vec![0u32; m];
        one[0] = 1;
        new_embeds.insert(1, vec![one.clone()]);
        new_embeds.insert(m, {
            (0..m)
                .map(|i| {
                    let mut v = vec![0u32; m];
                    v[i] = 1;
                    v
                })
                .collect()
        });
        if m > 1 {
            let maximal: Vec<usize> = prime_factors(m).into_iter().map(|l| m / l).collect();
            let mut chosen: Vec<(usize, Vec<u32>)> = Vec::new();
            for &d in &maximal {
                if d == 1 {
                    continue;
                }
                let sub = self.state.read().unwrap().fields.get(&d).unwrap().clone();
                let poly: Vec<Fe> = sub
                    .modulus
                    .iter()
                    .map(|&c| Fe::from_u32(&field, c))
                    .collect();
                let roots = upoly::roots_in_single_field(&field, &poly);
                let mut pick = None;
                for r in roots {
                    let mut ok = true;
                    for (d1, r1) in &chosen {
                        let g = d.gcd(d1);
                        if g == 1 {
                            continue;
                        }
                        let via_d = self.eval_image(&field, g, d, &r.c);
                        let via_d1 = self.eval_image(&field, g, *d1, r1);
                        if via_d != via_d1 {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        pick = Some(r.c.clone());
                        break;
                    }
                }
                let root = pick.ok_or_else(|| {
                    AswError::Inconsistent(format!("no compatible embedding of degree {d} into {m}"))
                })?;
                let mut imgs = Vec::with_capacity(d);
                let mut acc = one.clone();
                for _ in 0..d {
                    imgs.push(acc.clone());
                    acc = field.mul_raw(&acc, &root);
                }
                new_embeds.insert(d, imgs);
                chosen.push((d, root));
            }
            // remaining divisors through a maximal divisor
            for e in divisors(m) {
                if new_embeds.contains_key(&e) {
                    continue;
                }
                let d = *maximal.iter().find(|&&d| d % e == 0).unwrap();
                let inner = self.state.read().unwrap().embeds.get(&(e, d)).unwrap().clone();
                let outer = &new_embeds[&d];
                let imgs: Vec<Vec<u32>> = inner
                    .images
                    .iter()
                    .map(|v| {
                        let mut acc = vec![0u64; m];
                        for (k, &c) in v.iter().enumerate() {
                            if c == 0 {
                                continue;
                            }
                            for (slot, &w) in acc.iter_mut().zip(&outer[k]) {
                                *slot += c as u64 * w as u64;
                            }
                        }
                        acc.iter().map(|&x| (x % p as u64) as u32).collect()
                    })
                    .collect();
                new_embeds.insert(e, imgs);
            }
        }
        let mut st = self.state.write().unwrap();
        if let Some(f) = st.fields.get(&m) {
            return Ok(f.clone());
        }
        st.fields.insert(m, field.clone());
        for (d, images) in new_embeds {
            st.embeds.insert(
                (d, m),
                Arc::new(Embedding {
                    from: d,
                    to: m,
                    images,
                    section: OnceLock::new(),
                }),
            );
        }
        Ok(field)
    }

    /// Image in `target` of the generator of degree `g` through the embedding
    /// `g -> d` followed by `z_d -> root`.
    fn eval_image(&self, target: &Arc<Field>, g: usize, d: usize, root: &[u32]) -> Vec<u32> {
        let emb = self.state.read().unwrap().embeds.get(&(g, d)).unwrap().clone();
        let coeffs = emb.generator_image();
        let m = target.m;
        let mut acc = vec![0u32; m];
        let mut pw = vec![0u32; m];
        pw[0] = 1;
        for &c in coeffs {
            if c != 0 {
                let term = target.scale_raw(&pw, c);
                acc = target.add_raw(&acc, &term);
            }
            pw = target.mul_raw(&pw, root);
        }
        acc
    }

    fn seeded_modulus(&self, m: usize) -> Vec<u32> {
        let mixed = splitmix(self.seed ^ splitmix((self.p as u64) << 32 | m as u64));
        let mut rng = ChaCha8Rng::seed_from_u64(mixed);
        loop {
            let mut f: Vec<u32> = (0..m).map(|_| rng.gen_range(0..self.p)).collect();
            f.push(1);
            if f[0] != 0 && fp::is_irreducible(&f, self.p) {
                return f;
            }
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// An element of some member of a field lattice.
#[derive(Clone)]
pub struct Fe {
    f: Arc<Field>,
    c: Vec<u32>,
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Fe {
    pub fn zero(field: &Arc<Field>) -> Fe {
        Fe {
            f: field.clone(),
            c: vec![0; field.m],
        }
    }

    pub fn one(field: &Arc<Field>) -> Fe {
        Fe::from_u32(field, 1)
    }

    pub fn from_u32(field: &Arc<Field>, v: u32) -> Fe {
        let mut c = vec![0; field.m];
        c[0] = v % field.p;
        Fe { f: field.clone(), c }
    }

    pub fn from_i64(field: &Arc<Field>, v: i64) -> Fe {
        let p = field.p as i64;
        Fe::from_u32(field, v.rem_euclid(p) as u32)
    }

    pub fn from_coeffs(field: &Arc<Field>, mut c: Vec<u32>) -> Fe {
        c.resize(field.m, 0);
        for x in c.iter_mut() {
            *x %= field.p;
        }
        Fe { f: field.clone(), c }
    }

    /// The generator `z<m>` of the field.
    pub fn generator(field: &Arc<Field>) -> Fe {
        if field.m == 1 {
            return Fe::zero(field);
        }
        let mut c = vec![0; field.m];
        c[1] = 1;
        Fe { f: field.clone(), c }
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.f
    }

    pub fn degree(&self) -> usize {
        self.f.m
    }

    pub fn characteristic(&self) -> u32 {
        self.f.p
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&x| x == 0)
    }

    /// The prime-field value if the element lies in `F_p` (in the power basis).
    pub fn as_prime(&self) -> Option<u32> {
        if self.c[1..].iter().all(|&x| x == 0) {
            Some(self.c[0])
        } else {
            None
        }
    }

    pub fn zero_like(&self) -> Fe {
        Fe::zero(&self.f)
    }

    pub fn one_like(&self) -> Fe {
        Fe::one(&self.f)
    }

    /// Embed into a field whose degree is a multiple of ours.
    pub fn embed(&self, target: &Arc<Field>) -> Result<Fe> {
        if Arc::ptr_eq(&self.f, target) {
            return Ok(self.clone());
        }
        if let Some(v) = self.as_prime() {
            return Ok(Fe::from_u32(target, v));
        }
        let lat = self.f.lattice();
        let emb = lat.embedding(self.f.m, target.m)?;
        Ok(Fe {
            f: target.clone(),
            c: emb.apply(&self.c, self.f.p),
        })
    }

    /// Bring two elements into a common field.
    pub fn unify(a: &Fe, b: &Fe) -> (Fe, Fe) {
        if Arc::ptr_eq(&a.f, &b.f) {
            return (a.clone(), b.clone());
        }
        let field = common_field_of(&[a, b]);
        (a.embed(&field).unwrap(), b.embed(&field).unwrap())
    }

    pub fn add(&self, o: &Fe) -> Fe {
        if Arc::ptr_eq(&self.f, &o.f) {
            return Fe {
                f: self.f.clone(),
                c: self.f.add_raw(&self.c, &o.c),
            };
        }
        let (a, b) = Fe::unify(self, o);
        a.add(&b)
    }

    pub fn sub(&self, o: &Fe) -> Fe {
        if Arc::ptr_eq(&self.f, &o.f) {
            return Fe {
                f: self.f.clone(),
                c: self.f.sub_raw(&self.c, &o.c),
            };
        }
        let (a, b) = Fe::unify(self, o);
        a.sub(&b)
    }

    pub fn mul(&self, o: &Fe) -> Fe {
        if Arc::ptr_eq(&self.f, &o.f) {
            return Fe {
                f: self.f.clone(),
                c: self.f.mul_raw(&self.c, &o.c),
            };
        }
        if let Some(v) = o.as_prime() {
            return self.scale(v);
        }
        if let Some(v) = self.as_prime() {
            return o.scale(v);
        }
        let (a, b) = Fe::unify(self, o);
        a.mul(&b)
    }

    pub fn scale(&self, s: u32) -> Fe {
        Fe {
            f: self.f.clone(),
            c: self.f.scale_raw(&self.c, s % self.f.p),
        }
    }

    pub fn neg(&self) -> Fe {
        Fe {
            f: self.f.clone(),
            c: self.f.neg_raw(&self.c),
        }
    }

    pub fn inv(&self) -> Option<Fe> {
        self.f.inv_raw(&self.c).map(|c| Fe { f: self.f.clone(), c })
    }

    pub fn div(&self, o: &Fe) -> Option<Fe> {
        o.inv().map(|i| self.mul(&i))
    }

    pub fn square(&self) -> Fe {
        self.mul(self)
    }

    pub fn pow(&self, e: u64) -> Fe {
        Fe {
            f: self.f.clone(),
            c: self.f.pow_raw(&self.c, &BigUint::from(e)),
        }
    }

    pub fn pow_big(&self, e: &BigUint) -> Fe {
        Fe {
            f: self.f.clone(),
            c: self.f.pow_raw(&self.c, e),
        }
    }

    /// `x^{p^k}`.
    pub fn frobenius(&self, k: usize) -> Fe {
        let k = k % self.f.m.max(1);
        let mut c = self.c.clone();
        for _ in 0..k {
            c = self.f.frob_raw(&c);
        }
        Fe { f: self.f.clone(), c }
    }

    /// Inverse of `x -> x^{p^k}`.
    pub fn inverse_frobenius(&self, k: usize) -> Fe {
        let m = self.f.m;
        let k = k % m;
        self.frobenius((m - k) % m)
    }

    /// `x^{q^e}` for `q = p^a`.
    pub fn frobenius_q(&self, a: usize, e: usize) -> Fe {
        self.frobenius(a * e)
    }

    /// Absolute trace to `F_p`.
    pub fn trace(&self) -> u32 {
        let mut acc = self.clone();
        let mut cur = self.clone();
        for _ in 1..self.f.m {
            cur = cur.frobenius(1);
            acc = acc.add(&cur);
        }
        acc.c[0]
    }

    /// The same element represented in the smallest field of the lattice containing it.
    pub fn minimal(&self) -> Fe {
        let m = self.f.m;
        if m == 1 {
            return self.clone();
        }
        if let Some(v) = self.as_prime() {
            let lat = self.f.lattice();
            return Fe::from_u32(&lat.prime_field(), v);
        }
        let lat = self.f.lattice();
        for d in divisors(m) {
            if d == m {
                break;
            }
            if self.frobenius(d) == *self {
                let emb = lat.embedding(d, m).unwrap();
                if let Some(pre) = emb.preimage(&self.c, self.f.p) {
                    let sub = lat.field(d).unwrap();
                    return Fe { f: sub, c: pre };
                }
            }
        }
        self.clone()
    }

    /// Smallest `d` such that the element lies in `F_{p^d}`.
    pub fn minimal_degree(&self) -> usize {
        self.minimal().degree()
    }

    /// Canonical ordering key inside the element's own field: coefficients from the top.
    fn cmp_same(&self, o: &Fe) -> Ordering {
        for i in (0..self.c.len()).rev() {
            match self.c[i].cmp(&o.c[i]) {
                Ordering::Equal => continue,
                other => return other,
            }
        }
        Ordering::Equal
    }

    /// Render with generator name `z<m>`.
    pub fn to_string_named(&self) -> String {
        let m = self.f.m;
        if m == 1 {
            return self.c[0].to_string();
        }
        let mut terms = Vec::new();
        for i in (0..m).rev() {
            let c = self.c[i];
            if c == 0 {
                continue;
            }
            let term = match i {
                0 => c.to_string(),
                1 if c == 1 => format!("z{m}"),
                1 => format!("{c}*z{m}"),
                _ if c == 1 => format!("z{m}^{i}"),
                _ => format!("{c}*z{m}^{i}"),
            };
            terms.push(term);
        }
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_named())
    }
}

impl PartialEq for Fe {
    fn eq(&self, o: &Fe) -> bool {
        if Arc::ptr_eq(&self.f, &o.f) {
            return self.c == o.c;
        }
        if self.f.p != o.f.p {
            return false;
        }
        let (a, b) = Fe::unify(self, o);
        a.c == b.c
    }
}

impl Eq for Fe {}

impl PartialOrd for Fe {
    fn partial_cmp(&self, o: &Fe) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Fe {
    /// Lexicographic on coefficients (highest power first) after embedding both
    /// elements into a common field.
    fn cmp(&self, o: &Fe) -> Ordering {
        if Arc::ptr_eq(&self.f, &o.f) {
            return self.cmp_same(o);
        }
        let (a, b) = Fe::unify(self, o);
        a.cmp_same(&b)
    }
}

/// Smallest registered field containing all given elements.
pub fn common_field_of(elems: &[&Fe]) -> Arc<Field> {
    let first = elems[0].field().clone();
    let mut deg = first.m;
    let mut same = true;
    for e in elems {
        if !Arc::ptr_eq(e.field(), &first) {
            same = false;
        }
        deg = deg.lcm(&e.degree());
    }
    if same {
        return first;
    }
    first.lattice().field(deg).expect("common field within degree cap")
}

/// Bring a list of elements into one common field.
pub fn unify_all(elems: &[Fe]) -> Vec<Fe> {
    if elems.is_empty() {
        return Vec::new();
    }
    let refs: Vec<&Fe> = elems.iter().collect();
    let field = common_field_of(&refs);
    elems.iter().map(|e| e.embed(&field).unwrap()).collect()
}

/// Parse a field element written as a polynomial in `z<m>` with integer coefficients.
pub fn parse_fe(lattice: &Arc<FieldLattice>, s: &str) -> Result<Fe> {
    let expr = crate::expr::parse(s)?;
    crate::expr::eval_fe(&expr, lattice)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_arithmetic() {
        let lat = FieldLattice::get(7).unwrap();
        let f = lat.field(1).unwrap();
        let a = Fe::from_u32(&f, 3);
        let b = Fe::from_u32(&f, 5);
        assert_eq!(a.mul(&b).as_prime(), Some(1));
        assert_eq!(a.inv().unwrap().as_prime(), Some(5));
    }

    #[test]
    fn modulus_is_idempotent() {
        let lat = FieldLattice::get(3).unwrap();
        let a = lat.field(4).unwrap();
        let b = lat.field(4).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert!(fp::is_irreducible(a.modulus(), 3));
    }

    #[test]
    fn inverse_round_trip() {
        let lat = FieldLattice::get(5).unwrap();
        let f = lat.field(3).unwrap();
        let z = Fe::generator(&f);
        let x = z.mul(&z).add(&Fe::from_u32(&f, 2));
        assert!(x.mul(&x.inv().unwrap()).is_one());
    }

    #[test]
    fn display_format() {
        let lat = FieldLattice::get(3).unwrap();
        let f = lat.field(4).unwrap();
        let x = Fe::from_coeffs(&f, vec![1, 1, 0, 2]);
        assert_eq!(x.to_string(), "2*z4^3 + z4 + 1");
    }
}
