//! Finite fields `F_q`, `q = p^k <= 2^16`.
//!
//! Elements are identified with an index in `[0, q)`: the base-`p` digits of
//! the index are the coefficients (constant term first) of the element's
//! representative polynomial over `F_p`. Index 0 is zero and index 1 is one.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A field element, stored as its canonical index.
pub type Elem = u16;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// Default cap on the number of polynomials any single operation may materialize.
pub const DEFAULT_BUDGET: u64 = 1 << 30;

#[derive(Debug)]
enum Kind {
    Prime,
    /// `p = 2, k > 1`: addition is xor of the digit bits.
    Binary,
    /// `p > 2, k > 1`.
    Extension,
}

struct Inner {
    p: u32,
    k: u32,
    q: u32,
    kind: Kind,
    /// Defining polynomial over `F_p`, constant term first, `k + 1` entries.
    modulus: Option<Vec<u32>>,
    /// `exp[i] = g^i` for a fixed generator `g`, stored twice over for wrap-free lookup.
    exp: Vec<Elem>,
    log: Vec<u32>,
    inv: Vec<Elem>,
    neg: Vec<Elem>,
    /// Full addition table, only for small odd-characteristic extensions.
    add: Option<Vec<Elem>>,
}

/// A concrete finite field `F_q` together with its canonical element encoding.
///
/// Cheap to clone; all tables are shared.
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<Inner>,
    budget: u64,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.inner.p)
            .field("k", &self.inner.k)
            .field("q", &self.inner.q)
            .field("modulus", &self.inner.modulus)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.inner.q == other.inner.q
    }
}

impl Eq for FieldSpec {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^k` with `p` prime, if possible.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q && !q.is_multiple_of(p) {
        p += 1;
    }
    if !q.is_multiple_of(p) {
        p = q;
    }
    let mut rest = q;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

impl FieldSpec {
    /// Builds `F_{p^k}`. For `k > 1` the modulus is the least monic irreducible
    /// of degree `k` over `F_p` in the canonical prime order.
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if k == 0 {
            return Err(Error::ZeroExtensionDegree);
        }
        let q = p
            .checked_pow(k)
            .filter(|&q| q <= MAX_ORDER as u64)
            .ok_or(Error::FieldTooLarge { p, k })?;
        let (p, q) = (p as u32, q as u32);
        let modulus = (k > 1).then(|| least_irreducible(p, k as usize));
        let kind = match (k, p) {
            (1, _) => Kind::Prime,
            (_, 2) => Kind::Binary,
            _ => Kind::Extension,
        };
        let mut inner = Inner {
            p,
            k,
            q,
            kind,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            inv: Vec::new(),
            neg: Vec::new(),
            add: None,
        };
        inner.build_tables();
        Ok(Self {
            inner: Arc::new(inner),
            budget: DEFAULT_BUDGET,
        })
    }

    /// Builds the field of order `q`, which must be a prime power.
    pub fn with_order(q: u64) -> Result<Self> {
        let (p, k) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Self::new(p, k)
    }

    /// Returns a handle to the same field with a different enumeration budget.
    pub fn with_budget(&self, budget: u64) -> Self {
        Self {
            inner: Arc::clone(&self.inner),
            budget,
        }
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.inner.p
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.inner.k
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.inner.q
    }

    /// The defining polynomial over `F_p` (constant term first), absent for prime fields.
    pub fn modulus(&self) -> Option<&[u32]> {
        self.inner.modulus.as_deref()
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    /// Fails if materializing `count` polynomials would exceed the budget.
    pub fn check_budget(&self, count: u128) -> Result<()> {
        if count >= self.budget as u128 {
            Err(Error::BudgetExceeded {
                requested: count,
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    /// `q^n`, or an overflow error.
    pub fn pow_q(&self, n: u32) -> Result<u128> {
        (self.inner.q as u128)
            .checked_pow(n)
            .ok_or(Error::Overflow("q^n"))
    }

    /// `q^n` for an enumeration of size `q^n`, checked against the budget.
    pub fn enumeration_size(&self, n: u32) -> Result<u64> {
        let size = self.pow_q(n).map_err(|_| Error::BudgetExceeded {
            requested: u128::MAX,
            budget: self.budget,
        })?;
        self.check_budget(size)?;
        Ok(size as u64)
    }

    pub fn element(&self, index: u64) -> Result<Elem> {
        if index < self.inner.q as u64 {
            Ok(index as Elem)
        } else {
            Err(Error::BadCoefficient {
                value: index,
                q: self.inner.q,
            })
        }
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        let i = &*self.inner;
        match i.kind {
            Kind::Prime => {
                let s = a as u32 + b as u32;
                (if s >= i.p { s - i.p } else { s }) as Elem
            }
            Kind::Binary => a ^ b,
            Kind::Extension => match &i.add {
                Some(table) => table[a as usize * i.q as usize + b as usize],
                None => digitwise_add(i.p, i.k, a as u32, b as u32) as Elem,
            },
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.inner.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        let i = &*self.inner;
        match i.kind {
            Kind::Prime => ((a as u32 * b as u32) % i.p) as Elem,
            _ => {
                if a == 0 || b == 0 {
                    0
                } else {
                    i.exp[(i.log[a as usize] + i.log[b as usize]) as usize]
                }
            }
        }
    }

    /// Multiplicative inverse; `a` must be nonzero.
    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        debug_assert!(a != 0, "inverse of zero");
        self.inner.inv[a as usize]
    }
}

impl Inner {
    fn build_tables(&mut self) {
        let q = self.q as usize;
        let (p, k) = (self.p, self.k);
        self.neg = (0..q as u32)
            .map(|a| digitwise_neg(p, k, a) as Elem)
            .collect();
        if matches!(self.kind, Kind::Extension) && q <= 1024 {
            let mut add = vec![0; q * q];
            for a in 0..q {
                for b in 0..q {
                    add[a * q + b] = digitwise_add(p, k, a as u32, b as u32) as Elem;
                }
            }
            self.add = Some(add);
        }

        let mul_slow = |a: u32, b: u32| -> u32 {
            match &self.modulus {
                None => (a * b) % p,
                Some(m) => ext_mul(p, m, a, b),
            }
        };
        // Find a generator of the cyclic group F_q^*.
        let order = q - 1;
        let mut exp = Vec::with_capacity(2 * order.max(1));
        if order == 1 {
            exp.push(1);
        } else {
            for g in 2..q as u32 {
                exp.clear();
                let mut x = 1u32;
                loop {
                    exp.push(x as Elem);
                    x = mul_slow(x, g);
                    if x == 1 {
                        break;
                    }
                }
                if exp.len() == order {
                    break;
                }
            }
        }
        debug_assert_eq!(exp.len(), order);
        let mut log = vec![0u32; q];
        for (i, &e) in exp.iter().enumerate() {
            log[e as usize] = i as u32;
        }
        let mut inv = vec![0 as Elem; q];
        for a in 1..q {
            let l = log[a] as usize;
            inv[a] = exp[(order - l) % order];
        }
        let doubled: Vec<Elem> = exp.iter().chain(exp.iter()).copied().collect();
        self.exp = doubled;
        self.log = log;
        self.inv = inv;
    }
}

fn digits(p: u32, k: u32, mut a: u32) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = a % p;
            a /= p;
            d
        })
        .collect()
}

fn undigits(p: u32, ds: &[u32]) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn digitwise_add(p: u32, k: u32, a: u32, b: u32) -> u32 {
    let (mut a, mut b) = (a, b);
    let (mut out, mut scale) = (0, 1);
    for _ in 0..k {
        out += ((a % p + b % p) % p) * scale;
        a /= p;
        b /= p;
        scale *= p;
    }
    out
}

fn digitwise_neg(p: u32, k: u32, a: u32) -> u32 {
    let ds: Vec<u32> = digits(p, k, a).into_iter().map(|d| (p - d) % p).collect();
    undigits(p, &ds)
}

/// Multiplication in `F_p[x]/(m)` on digit-encoded operands.
fn ext_mul(p: u32, m: &[u32], a: u32, b: u32) -> u32 {
    let k = m.len() - 1;
    let da = digits(p, k as u32, a);
    let db = digits(p, k as u32, b);
    let mut prod = vec![0u32; 2 * k];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // m is monic of degree k.
    for top in (k..2 * k).rev() {
        let c = prod[top];
        if c == 0 {
            continue;
        }
        for (i, &mi) in m.iter().enumerate() {
            let pos = top - k + i;
            prod[pos] = (prod[pos] + (p - c) * mi) % p;
        }
    }
    undigits(p, &prod[..k])
}

/// Remainder of `a` modulo monic `b` over `F_p` (dense, constant term first).
fn fp_rem(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let c = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if c != 0 {
            for (i, &bi) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - c) * bi) % p;
            }
        }
        r.pop();
    }
    while r.last() == Some(&0) {
        r.pop();
    }
    r
}

/// Least monic irreducible of degree `k` over `F_p`, comparing the coefficient
/// tuple from the constant term upward.
fn least_irreducible(p: u32, k: usize) -> Vec<u32> {
    // The low coefficients (c_0, ..., c_{k-1}) enumerated lexicographically from c_0.
    let total = (p as u64).pow(k as u32);
    for n in 0..total {
        // Most significant digit first = c_0.
        let mut coeffs = vec![0u32; k + 1];
        let mut x = n;
        for i in (0..k).rev() {
            coeffs[i] = (x % p as u64) as u32;
            x /= p as u64;
        }
        coeffs[k] = 1;
        if fp_is_irreducible(p, &coeffs) {
            return coeffs;
        }
    }
    unreachable!("an irreducible of every degree exists over F_p")
}

fn fp_is_irreducible(p: u32, f: &[u32]) -> bool {
    let k = f.len() - 1;
    for d in 1..=k / 2 {
        let count = (p as u64).pow(d as u32);
        for n in 0..count {
            let mut g = digits(p, d as u32, n as u32);
            g.push(1);
            if fp_rem(p, f, &g).is_empty() {
                return false;
            }
        }
    }
    true
}
