//! Unique factorization into monic irreducibles and the derived statistics.

use super::poly::{divides_monic, divmod_slices, Poly};
use super::sieve::{require_monic_nonconstant, FactorTable};
use crate::error::{Error, Result};

/// `F = P_1^{e_1} ... P_r^{e_r}` with distinct monic irreducibles sorted by `≺`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    factors: Vec<(Poly, u32)>,
}

/// Prime-factor statistics of a monic polynomial of degree at least 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithStats {
    /// `Ω`: prime factors counted with multiplicity.
    pub big_omega: u32,
    /// `ω`: distinct prime factors.
    pub omega: u32,
    /// Largest prime-factor degree.
    pub p_plus: usize,
    /// Smallest prime-factor degree.
    pub p_minus: usize,
    /// The `≺`-largest prime factor.
    pub max_prime: Poly,
}

impl Factorization {
    pub fn factors(&self) -> &[(Poly, u32)] {
        &self.factors
    }

    /// Multiplies the factorization back out.
    pub fn product(&self) -> Option<Poly> {
        let (first, _) = self.factors.first()?;
        let mut acc = Poly::one(first.field());
        for (p, e) in &self.factors {
            acc = &acc * &p.pow(*e);
        }
        Some(acc)
    }

    pub fn stats(&self) -> ArithStats {
        let degrees = self.factors.iter().map(|(p, _)| p.degree().unwrap_or(0));
        ArithStats {
            big_omega: self.factors.iter().map(|(_, e)| e).sum(),
            omega: self.factors.len() as u32,
            p_plus: degrees.clone().max().unwrap_or(0),
            p_minus: degrees.min().unwrap_or(0),
            max_prime: self.factors.last().expect("nonempty").0.clone(),
        }
    }
}

/// Factors a monic `f` by trial division against the table's primes.
///
/// Only primes of degree `<= deg f / 2` are needed: whatever survives the
/// division is itself irreducible.
pub fn factor(f: &Poly, table: &FactorTable) -> Result<Factorization> {
    let n = require_monic_nonconstant(f)?;
    if table.field() != f.field() {
        return Err(Error::FieldMismatch {
            left: table.field().q(),
            right: f.field().q(),
        });
    }
    if table.max_degree() < n / 2 {
        return Err(Error::TableTooShallow {
            have: table.max_degree(),
            need: n / 2,
        });
    }
    let field = f.field();
    let mut rest = f.coeffs().to_vec();
    let mut factors = Vec::new();
    let mut scratch = Vec::new();
    for prime in table.primes() {
        let dp = prime.coeffs().len() - 1;
        if 2 * dp > rest.len() - 1 {
            break;
        }
        let mut e = 0;
        while divides_monic(field, &rest, prime.coeffs(), &mut scratch) {
            rest = divmod_slices(field, &rest, prime.coeffs()).0;
            e += 1;
        }
        if e > 0 {
            factors.push((prime.clone(), e));
        }
    }
    if rest.len() > 1 {
        factors.push((Poly::from_elems(field, rest), 1));
    }
    factors.sort();
    Ok(Factorization { factors })
}

impl FactorTable {
    /// Factors via the sieve chain when `deg f` is covered, otherwise by trial division.
    pub fn factor(&self, f: &Poly) -> Result<Factorization> {
        let n = require_monic_nonconstant(f)?;
        if n > self.max_degree() || f.field() != self.field() {
            return factor(f, self);
        }
        let idx = f.monic_index().ok_or(Error::Overflow("monic index"))?;
        let factors = self
            .factor_index(n, idx)
            .into_iter()
            .map(|(id, e)| (self.prime(id).clone(), e))
            .collect();
        Ok(Factorization { factors })
    }
}

/// `(Ω, ω, P⁺, P⁻, ≺-largest prime)` of a monic `f` with `deg f >= 1`.
pub fn arith_stats(f: &Poly, table: &FactorTable) -> Result<ArithStats> {
    Ok(table.factor(f)?.stats())
}
