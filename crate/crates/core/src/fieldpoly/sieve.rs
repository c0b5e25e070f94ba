//! Irreducible sieve, prime counting, and irreducibility testing.

use super::field::FieldSpec;
use super::poly::{decode_monic, divmod_slices, gcd_slices, monic_index_u128, mul_into, Poly};
use crate::error::{Error, Result};

/// Sentinel prime id for the polynomial 1, which has no prime factor.
pub const NO_PRIME: u32 = u32::MAX;

/// Every monic polynomial of degree `<= max_degree`, each tagged with its
/// `≺`-largest prime factor and the cofactor left after removing it.
///
/// Prime ids are ranks in the canonical order `≺`, so comparing ids compares primes.
#[derive(Debug, Clone)]
pub struct FactorTable {
    field: FieldSpec,
    max_degree: usize,
    primes: Vec<Poly>,
    /// `degree_start[n]` is the id of the first prime of degree `n`; length `max_degree + 2`.
    degree_start: Vec<u32>,
    /// Per degree `n`, indexed by monic index.
    largest: Vec<Vec<u32>>,
    cofactor: Vec<Vec<u64>>,
}

impl FactorTable {
    /// Sieves all monic polynomials of degree at most `max_degree`.
    pub fn build(field: &FieldSpec, max_degree: usize) -> Result<Self> {
        let q = field.q() as u64;
        let mut total: u128 = 0;
        for n in 0..=max_degree {
            total += field.pow_q(n as u32)?;
        }
        field.check_budget(total)?;

        let mut primes: Vec<Poly> = Vec::new();
        let mut degree_start = vec![0u32, 0u32];
        let mut largest: Vec<Vec<u32>> = vec![vec![NO_PRIME]];
        let mut cofactor: Vec<Vec<u64>> = vec![vec![0]];

        let mut prod = Vec::new();
        let mut cof = Vec::new();
        for n in 1..=max_degree {
            let size = field.pow_q(n as u32)? as usize;
            let mut lg = vec![NO_PRIME; size];
            let mut cf = vec![0u64; size];
            // Lower-degree primes in ascending id order, so the last writer is the ≺-largest.
            for (id, prime) in primes.iter().enumerate() {
                let dp = prime.coeffs().len() - 1;
                let m = n - dp;
                for c in 0..q.pow(m as u32) {
                    decode_monic(field.q(), m, c, &mut cof);
                    mul_into(field, prime.coeffs(), &cof, &mut prod);
                    let idx = monic_index_u128(field.q(), &prod).expect("fits") as usize;
                    lg[idx] = id as u32;
                    cf[idx] = c;
                }
            }
            let mut fresh: Vec<Poly> = (0..size)
                .filter(|&i| lg[i] == NO_PRIME)
                .map(|i| Poly::from_monic_index(field, n, i as u64))
                .collect();
            fresh.sort();
            let first = primes.len() as u32;
            for (offset, p) in fresh.iter().enumerate() {
                let idx = p.monic_index().expect("fits") as usize;
                lg[idx] = first + offset as u32;
                cf[idx] = 0;
            }
            primes.extend(fresh);
            degree_start.push(primes.len() as u32);
            largest.push(lg);
            cofactor.push(cf);
        }

        Ok(Self {
            field: field.clone(),
            max_degree,
            primes,
            degree_start,
            largest,
            cofactor,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// All monic irreducibles of degree `<= max_degree`, sorted by `≺`.
    pub fn primes(&self) -> &[Poly] {
        &self.primes
    }

    pub fn prime(&self, id: u32) -> &Poly {
        &self.primes[id as usize]
    }

    pub fn prime_degree(&self, id: u32) -> usize {
        self.primes[id as usize].coeffs().len() - 1
    }

    /// The primes of exactly degree `n` (empty beyond the table).
    pub fn primes_of_degree(&self, n: usize) -> &[Poly] {
        if n == 0 || n > self.max_degree {
            return &[];
        }
        let lo = self.degree_start[n] as usize;
        let hi = self.degree_start[n + 1] as usize;
        &self.primes[lo..hi]
    }

    /// The id of a monic irreducible covered by the table.
    pub fn prime_id(&self, p: &Poly) -> Option<u32> {
        let n = p.degree()?;
        if n == 0 || n > self.max_degree || p.field() != &self.field {
            return None;
        }
        let idx = p.monic_index()? as usize;
        (self.cofactor[n][idx] == 0 && self.prime_degree(self.largest[n][idx]) == n)
            .then_some(self.largest[n][idx])
    }

    /// `≺`-largest prime factor of the monic polynomial with the given degree and index.
    pub fn largest_prime(&self, n: usize, idx: u64) -> u32 {
        self.largest[n][idx as usize]
    }

    pub fn is_prime_index(&self, n: usize, idx: u64) -> bool {
        n >= 1 && self.cofactor[n][idx as usize] == 0 && self.prime_degree(self.largest[n][idx as usize]) == n
    }

    /// Prime factorization of a table entry as `(id, exponent)` pairs in ascending id order.
    pub fn factor_index(&self, n: usize, idx: u64) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        let (mut n, mut idx) = (n, idx);
        while n > 0 {
            let id = self.largest[n][idx as usize];
            match out.last_mut() {
                Some((last, e)) if *last == id => *e += 1,
                _ => out.push((id, 1)),
            }
            idx = self.cofactor[n][idx as usize];
            n -= self.prime_degree(id);
        }
        out.reverse();
        out
    }

    /// Arithmetic statistics of a table entry of degree `n >= 1`.
    pub fn stats_index(&self, n: usize, idx: u64) -> IndexStats {
        let mut s = IndexStats {
            big_omega: 0,
            omega: 0,
            p_plus: 0,
            p_minus: usize::MAX,
            max_prime: self.largest[n][idx as usize],
        };
        let (mut n, mut idx) = (n, idx);
        let mut last = NO_PRIME;
        while n > 0 {
            let id = self.largest[n][idx as usize];
            let d = self.prime_degree(id);
            s.big_omega += 1;
            if id != last {
                s.omega += 1;
                last = id;
            }
            s.p_plus = s.p_plus.max(d);
            s.p_minus = s.p_minus.min(d);
            idx = self.cofactor[n][idx as usize];
            n -= d;
        }
        if s.big_omega == 0 {
            s.p_minus = 0;
        }
        s
    }
}

/// Arithmetic statistics of a table entry, with the `≺`-largest prime as an id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexStats {
    pub big_omega: u32,
    pub omega: u32,
    pub p_plus: usize,
    pub p_minus: usize,
    pub max_prime: u32,
}

/// All monic irreducibles of degree `<= max_degree`, sorted by `≺`.
pub fn irreducibles_up_to(field: &FieldSpec, max_degree: usize) -> Result<Vec<Poly>> {
    Ok(FactorTable::build(field, max_degree)?.primes)
}

/// The Möbius function.
pub fn mobius(mut n: u32) -> i32 {
    assert!(n >= 1, "mobius(0) is undefined");
    let mut result = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            n /= d;
            if n.is_multiple_of(d) {
                return 0;
            }
            result = -result;
        }
        d += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of monic irreducibles of degree `n` over `F_q`, by the Möbius formula.
pub fn pi_q(q: u32, n: u32) -> Result<u128> {
    if n == 0 {
        return Err(Error::InvalidParameter("pi_q needs degree at least 1".into()));
    }
    let mut acc: i128 = 0;
    for d in (1..=n).filter(|d| n.is_multiple_of(*d)) {
        let mu = mobius(d);
        if mu == 0 {
            continue;
        }
        let term = (q as u128)
            .checked_pow(n / d)
            .and_then(|v| i128::try_from(v).ok())
            .ok_or(Error::Overflow("pi_q"))?;
        acc += mu as i128 * term;
    }
    Ok((acc / n as i128) as u128)
}

pub(crate) fn require_monic_nonconstant(f: &Poly) -> Result<usize> {
    match f.degree() {
        None | Some(0) => Err(Error::Constant),
        Some(d) if f.is_monic() => Ok(d),
        Some(_) => Err(Error::NotMonic),
    }
}

/// Irreducibility test: `f` has no monic divisor of degree in `[1, deg f / 2]`.
///
/// Uses `gcd(f, t^{q^i} - t) = 1` for `1 <= i <= deg f / 2`.
pub fn is_irreducible(f: &Poly) -> Result<bool> {
    let n = require_monic_nonconstant(f)?;
    let field = f.field();
    let modulus = f.coeffs();
    let t = vec![0, 1];
    let mut x = t.clone();
    for _ in 1..=n / 2 {
        x = pow_mod(field, &x, field.q() as u64, modulus);
        let mut diff = x.clone();
        diff.resize(diff.len().max(2), 0);
        diff[1] = field.sub(diff[1], 1);
        super::poly::trim(&mut diff);
        if gcd_slices(field, modulus, &diff).len() != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn pow_mod(field: &FieldSpec, base: &[u16], mut e: u64, modulus: &[u16]) -> Vec<u16> {
    let mut acc = vec![1u16];
    let mut b = base.to_vec();
    let mut scratch = Vec::new();
    while e > 0 {
        if e & 1 == 1 {
            mul_into(field, &acc, &b, &mut scratch);
            acc = divmod_slices(field, &scratch, modulus).1;
        }
        e >>= 1;
        if e > 0 {
            mul_into(field, &b, &b, &mut scratch);
            b = divmod_slices(field, &scratch, modulus).1;
        }
    }
    acc
}
