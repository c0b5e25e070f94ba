//! Finite sets of monic polynomials of a common degree, and the constructors
//! for the set families whose normalized sums are studied.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::fieldpoly::{FactorTable, FieldSpec, Poly};
use crate::intervals::Interval;

/// Which constructor produced a [`PolySet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Interval,
    /// `Ω(F) = k`.
    KPrimeP,
    /// `Ω(F) = ω(F) = k`.
    KPrimeS,
    /// `ω(F) = k`.
    KPrimeD,
    ShiftedPrime,
    Rough,
    Custom,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Interval,
        Family::KPrimeP,
        Family::KPrimeS,
        Family::KPrimeD,
        Family::ShiftedPrime,
        Family::Rough,
        Family::Custom,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Family::Interval => "interval",
            Family::KPrimeP => "kprime-P",
            Family::KPrimeS => "kprime-S",
            Family::KPrimeD => "kprime-D",
            Family::ShiftedPrime => "shifted-prime",
            Family::Rough => "rough",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family {s:?}")))
    }
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

/// The three prime-factor-count variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KPrimeVariant {
    /// `Ω = k`.
    P,
    /// `Ω = ω = k` (squarefree).
    S,
    /// `ω = k`.
    D,
}

impl KPrimeVariant {
    fn family(self) -> Family {
        match self {
            KPrimeVariant::P => Family::KPrimeP,
            KPrimeVariant::S => Family::KPrimeS,
            KPrimeVariant::D => Family::KPrimeD,
        }
    }
}

/// A deduplicated set of monic polynomials of degree `N`, sorted by `≺`.
#[derive(Debug, Clone)]
pub struct PolySet {
    field: FieldSpec,
    degree: usize,
    members: Vec<Poly>,
    family: Family,
    params: Map<String, Value>,
    warnings: Vec<String>,
}

impl PolySet {
    /// Validates and canonicalizes an arbitrary member list.
    pub fn custom(field: &FieldSpec, degree: usize, members: Vec<Poly>) -> Result<Self> {
        Self::assemble(field, degree, members, Family::Custom, Map::new(), Vec::new())
    }

    fn assemble(
        field: &FieldSpec,
        degree: usize,
        mut members: Vec<Poly>,
        family: Family,
        params: Map<String, Value>,
        warnings: Vec<String>,
    ) -> Result<Self> {
        for m in &members {
            if m.field() != field {
                return Err(Error::FieldMismatch {
                    left: field.q(),
                    right: m.field().q(),
                });
            }
            if !m.is_monic() {
                return Err(Error::NotMonic);
            }
            if m.degree() != Some(degree) {
                return Err(Error::InvalidParameter(format!(
                    "member {} does not have degree {degree}",
                    m.serialize()
                )));
            }
        }
        members.sort();
        members.dedup();
        Ok(Self {
            field: field.clone(),
            degree,
            members,
            family,
            params,
            warnings,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn members(&self) -> &[Poly] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Construction parameters, as recorded in reports.
    pub fn params(&self) -> &Map<String, Value> {
        &self.params
    }

    /// Non-empty when the parameters fall outside the range covered by the
    /// corresponding limit theorem.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn contains(&self, g: &Poly) -> bool {
        self.members.binary_search(g).is_ok()
    }

    /// Whether `self ⊆ other`.
    pub fn is_subset_of(&self, other: &PolySet) -> bool {
        self.field == other.field && self.members.iter().all(|m| other.contains(m))
    }

    /// `|S| >= q^N exp(-sqrt(N ln q) / 3)`.
    pub fn size_condition(&self) -> SizeCondition {
        size_condition(self.field.q(), self.degree, self.len())
    }
}

/// The minimum-size condition of the central limit criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SizeCondition {
    pub size: usize,
    pub floor: f64,
    /// `size / floor`.
    pub margin: f64,
    pub satisfied: bool,
}

pub fn size_condition(q: u32, n: usize, size: usize) -> SizeCondition {
    let (qf, nf) = (q as f64, n as f64);
    let floor = qf.powf(nf) * (-(nf * qf.ln()).sqrt() / 3.0).exp();
    SizeCondition {
        size,
        floor,
        margin: size as f64 / floor,
        satisfied: size as f64 >= floor,
    }
}

fn require_table(table: &FactorTable, n: usize) -> Result<()> {
    if table.max_degree() < n {
        Err(Error::TableTooShallow {
            have: table.max_degree(),
            need: n,
        })
    } else {
        Ok(())
    }
}

fn param(map: &mut Map<String, Value>, key: &str, value: impl Into<Value>) {
    map.insert(key.to_string(), value.into());
}

/// The interval `I(K, h)` as a set.
pub fn build_interval_set(interval: &Interval) -> Result<PolySet> {
    let n = interval.degree();
    let h = interval.radius();
    let mut params = Map::new();
    param(&mut params, "center", interval.center().serialize());
    param(&mut params, "h", h);
    let mut warnings = Vec::new();
    if n < 3 || h < 1 || h > n as i64 - 2 {
        warnings.push(format!("interval CLT needs N >= 3 and 1 <= h <= N - 2 (N = {n}, h = {h})"));
    }
    let members = interval.members()?.collect();
    PolySet::assemble(interval.field(), n, members, Family::Interval, params, warnings)
}

/// Monic degree-`N` polynomials with `k` prime factors, counted per `variant`.
pub fn build_kprime(table: &FactorTable, n: usize, k: u32, variant: KPrimeVariant) -> Result<PolySet> {
    require_table(table, n)?;
    let field = table.field();
    let size = field.enumeration_size(n as u32)?;
    let members = (0..size)
        .filter(|&idx| {
            let s = table.stats_index(n, idx);
            match variant {
                KPrimeVariant::P => s.big_omega == k,
                KPrimeVariant::S => s.big_omega == k && s.omega == k,
                KPrimeVariant::D => s.omega == k,
            }
        })
        .map(|idx| Poly::from_monic_index(field, n, idx))
        .collect();
    let mut params = Map::new();
    param(&mut params, "k", k);
    let mut warnings = Vec::new();
    if k == 0 || k as f64 >= (n as f64).ln().max(1.0) {
        warnings.push(format!("k-prime CLT needs k = o(log N); k = {k} is not below log N = {:.3}", (n as f64).ln()));
    }
    PolySet::assemble(field, n, members, variant.family(), params, warnings)
}

/// `{P + Z : P monic irreducible of degree N}` for a shift with `deg Z <= N - 1`.
pub fn build_shifted_primes(table: &FactorTable, n: usize, shift: &Poly) -> Result<PolySet> {
    require_table(table, n)?;
    let field = table.field();
    if shift.field() != field {
        return Err(Error::FieldMismatch {
            left: field.q(),
            right: shift.field().q(),
        });
    }
    if shift.degree().is_some_and(|d| d + 1 > n) {
        return Err(Error::InvalidParameter(format!(
            "shift degree {} must be at most N - 1 = {}",
            shift.degree().unwrap_or(0),
            n as i64 - 1
        )));
    }
    let mut warnings = Vec::new();
    if field.q() < 3 {
        warnings.push("shifted-prime CLT is only established for q >= 3".to_string());
    }
    if !shift.is_monic() {
        warnings.push(format!("shift {} is not monic", shift.serialize()));
    }
    let members = table.primes_of_degree(n).iter().map(|p| p + shift).collect();
    let mut params = Map::new();
    param(&mut params, "shift", shift.serialize());
    PolySet::assemble(field, n, members, Family::ShiftedPrime, params, warnings)
}

/// `{F ∈ ℳ_N : P⁻(F) > z}`.
pub fn build_rough(table: &FactorTable, n: usize, z: usize) -> Result<PolySet> {
    require_table(table, n)?;
    let field = table.field();
    let size = field.enumeration_size(n as u32)?;
    let members = (0..size)
        .filter(|&idx| table.stats_index(n, idx).p_minus > z)
        .map(|idx| Poly::from_monic_index(field, n, idx))
        .collect();
    let mut params = Map::new();
    param(&mut params, "z", z);
    let mut warnings = Vec::new();
    if (z as f64) < (n as f64).sqrt() || z + 1 > n {
        warnings.push(format!("rough CLT needs sqrt(N) <= z <= N - 1 (N = {n}, z = {z})"));
    }
    PolySet::assemble(field, n, members, Family::Rough, params, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::SmoothRoughTable;
    use crate::fieldpoly::pi_q;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::with_order(q).unwrap()
    }

    #[test]
    fn family_tags_round_trip() {
        for fam in Family::ALL {
            assert_eq!(fam.tag().parse::<Family>().unwrap(), fam);
        }
        assert!("prime".parse::<Family>().is_err());
    }

    #[test]
    fn kprime_one_is_the_primes() {
        for q in [2u64, 3] {
            let table = FactorTable::build(&f(q), 6).unwrap();
            for n in 1..=6 {
                let s = build_kprime(&table, n, 1, KPrimeVariant::P).unwrap();
                assert_eq!(s.len() as u128, pi_q(q as u32, n as u32).unwrap());
            }
        }
    }

    #[test]
    fn kprime_variants_nest() {
        let table = FactorTable::build(&f(2), 10).unwrap();
        let p = build_kprime(&table, 10, 2, KPrimeVariant::P).unwrap();
        let s = build_kprime(&table, 10, 2, KPrimeVariant::S).unwrap();
        let d = build_kprime(&table, 10, 2, KPrimeVariant::D).unwrap();
        assert!(s.is_subset_of(&p));
        assert!(s.is_subset_of(&d));
        assert!(s.len() < p.len() && s.len() < d.len());
        assert_eq!(s.family(), Family::KPrimeS);
    }

    #[test]
    fn shifted_primes_size_and_errors() {
        let field = f(3);
        let table = FactorTable::build(&field, 5).unwrap();
        let s = build_shifted_primes(&table, 5, &Poly::one(&field)).unwrap();
        assert_eq!(s.len() as u128, pi_q(3, 5).unwrap());
        assert!(s.warnings().is_empty());
        assert!(build_shifted_primes(&table, 5, &Poly::t_pow(&field, 5)).is_err());
        let f2 = f(2);
        let t2 = FactorTable::build(&f2, 4).unwrap();
        let s2 = build_shifted_primes(&t2, 4, &Poly::one(&f2)).unwrap();
        assert_eq!(s2.warnings().len(), 1);
    }

    #[test]
    fn rough_matches_counting() {
        let field = f(2);
        let srt = SmoothRoughTable::build(&field, 10).unwrap();
        for z in 0..=10 {
            let s = build_rough(srt.factors(), 10, z).unwrap();
            assert_eq!(s.len() as u128, srt.phi(10, z));
        }
    }

    #[test]
    fn interval_set_and_custom_validation() {
        let field = f(2);
        let s = build_interval_set(&Interval::new(Poly::t_pow(&field, 6), 2).unwrap()).unwrap();
        assert_eq!(s.len(), 8);
        assert!(s.warnings().is_empty());
        let long = build_interval_set(&Interval::full(&field, 4).unwrap()).unwrap();
        assert_eq!(long.warnings().len(), 1);
        let dup = vec![Poly::t(&field), Poly::t(&field)];
        assert_eq!(PolySet::custom(&field, 1, dup).unwrap().len(), 1);
        assert!(PolySet::custom(&field, 2, vec![Poly::t(&field)]).is_err());
    }

    #[test]
    fn size_condition_for_full_space() {
        let c = size_condition(2, 10, 1024);
        assert!(c.satisfied);
        assert!(c.margin > 1.0);
        assert!(!size_condition(2, 10, 1).satisfied);
    }
}
