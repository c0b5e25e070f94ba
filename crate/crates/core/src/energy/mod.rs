//! Multiplicative energy `E×(S) = #{(F1, F2, G1, G2) ∈ S^4 : F1 F2 = G1 G2}`.

mod sets;

use std::collections::HashMap;
use std::hash::Hash;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

pub use sets::{
    build_interval_set, build_kprime, build_rough, build_shifted_primes, size_condition, Family,
    KPrimeVariant, PolySet, SizeCondition,
};

use crate::counting::Verdict;
use crate::error::{Error, Result};
use crate::fieldpoly::{divmod_slices, gcd_slices, monic_index_u128, mul_into, Elem, FieldSpec};
use crate::intervals::Interval;

/// Energy split into the always-present diagonal solutions and the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnergyReport {
    pub set_size: u64,
    pub total: u128,
    /// `2|S|^2 - |S|`: quadruples with `{F1, F2} = {G1, G2}`.
    pub diagonal: u128,
    pub off_diagonal: u128,
}

impl EnergyReport {
    /// Checks `total >= 2|S|^2 - |S|` and splits off the diagonal.
    pub fn new(set_size: u64, total: u128) -> Result<Self> {
        let s = set_size as u128;
        let diagonal = 2 * s * s - s;
        let off_diagonal = total.checked_sub(diagonal).ok_or_else(|| {
            Error::Invariant(format!("energy {total} below the diagonal count {diagonal}"))
        })?;
        Ok(Self {
            set_size,
            total,
            diagonal,
            off_diagonal,
        })
    }

    /// `E× / |S|^2`, the fourth moment of the normalized sum.
    pub fn normalized_fourth_moment(&self) -> Ratio<u128> {
        let s = self.set_size as u128;
        Ratio::new(self.total, s * s)
    }

    /// `offDiagonal / |S|^2`.
    pub fn off_diagonal_ratio(&self) -> f64 {
        let s = self.set_size as f64;
        self.off_diagonal as f64 / (s * s)
    }
}

/// The per-set JSON document.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EnergyJson {
    pub tag: Family,
    pub q: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub params: Map<String, Value>,
    pub set_size: u64,
    pub total: u128,
    pub diagonal: u128,
    pub off_diagonal: u128,
    pub m4: f64,
    pub size_condition_satisfied: bool,
    pub warnings: Vec<String>,
}

impl EnergyJson {
    pub fn new(set: &PolySet, report: &EnergyReport) -> Self {
        let m4 = report.normalized_fourth_moment();
        Self {
            tag: set.family(),
            q: set.field().q(),
            n: set.degree(),
            params: set.params().clone(),
            set_size: report.set_size,
            total: report.total,
            diagonal: report.diagonal,
            off_diagonal: report.off_diagonal,
            m4: *m4.numer() as f64 / *m4.denom() as f64,
            size_condition_satisfied: set.size_condition().satisfied,
            warnings: set.warnings().to_vec(),
        }
    }
}

fn merge<K: Hash + Eq>(mut a: HashMap<K, u64>, mut b: HashMap<K, u64>) -> HashMap<K, u64> {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

/// Counts a key over unordered index pairs `i <= j`, with weight `w(i, j)`.
fn pair_histogram<K, F>(len: usize, key: F, weight: fn(usize, usize) -> u64) -> HashMap<K, u64>
where
    K: Hash + Eq + Send,
    F: Fn(usize, usize, &mut Vec<Elem>) -> Option<K> + Sync,
{
    (0..len)
        .into_par_iter()
        .fold(
            || (HashMap::new(), Vec::new()),
            |(mut map, mut scratch), i| {
                for j in i..len {
                    if let Some(k) = key(i, j, &mut scratch) {
                        *map.entry(k).or_insert(0) += weight(i, j);
                    }
                }
                (map, scratch)
            },
        )
        .map(|(map, _)| map)
        .reduce(HashMap::new, merge)
}

fn check_pair_budget(set: &PolySet) -> Result<()> {
    let s = set.len() as u128;
    set.field().check_budget(s * (s + 1) / 2)
}

/// Exact `E×(S) = Σ_v m(v)^2`, where `m(v)` counts ordered pairs with product `v`.
///
/// Products are keyed by their monic index (an exact encoding of the
/// degree-`2N` product); if that index overflows `u128` the coefficient
/// vector itself is the key.
pub fn mult_energy(set: &PolySet) -> Result<EnergyReport> {
    check_pair_budget(set)?;
    let members: Vec<&[Elem]> = set.members().iter().map(|m| m.coeffs()).collect();
    let field = set.field();
    let q = field.q();
    let ordered_weight = |i: usize, j: usize| if i == j { 1 } else { 2 };
    let fits = field.pow_q(2 * set.degree() as u32).is_ok();
    let total: u128 = if fits {
        let map = pair_histogram(
            members.len(),
            |i, j, scratch| {
                mul_into(field, members[i], members[j], scratch);
                monic_index_u128(q, scratch)
            },
            ordered_weight,
        );
        map.values().map(|&m| (m as u128) * (m as u128)).sum()
    } else {
        let map = pair_histogram(
            members.len(),
            |i, j, scratch| {
                mul_into(field, members[i], members[j], scratch);
                Some(scratch.clone())
            },
            ordered_weight,
        );
        map.values().map(|&m| (m as u128) * (m as u128)).sum()
    };
    EnergyReport::new(set.len() as u64, total)
}

/// Independent recount of the off-diagonal solutions.
///
/// Every off-diagonal solution has the shape `F1 = GA, G1 = GB, F2 = HB,
/// G2 = HA` with `A, B` coprime and distinct. Grouping the unordered pairs
/// `{X, Y} ⊂ S` by their reduced ratio `{A, B}`, a class with `c` pairs
/// contributes `2c(c - 1)` solutions.
pub fn gcd_parametrized_offdiag(set: &PolySet) -> Result<u128> {
    check_pair_budget(set)?;
    let members: Vec<&[Elem]> = set.members().iter().map(|m| m.coeffs()).collect();
    let field = set.field();
    let q = field.q();
    let reduced = |i: usize, j: usize, _: &mut Vec<Elem>| -> Option<(Vec<Elem>, Vec<Elem>)> {
        if i == j {
            return None;
        }
        let g = gcd_slices(field, members[i], members[j]);
        let a = exact_quotient(field, members[i], &g);
        let b = exact_quotient(field, members[j], &g);
        Some(if a <= b { (a, b) } else { (b, a) })
    };
    let fits = field.pow_q(set.degree() as u32).is_ok();
    let counts: Vec<u64> = if fits {
        pair_histogram(
            members.len(),
            |i, j, s| {
                let (a, b) = reduced(i, j, s)?;
                Some((monic_index_u128(q, &a)?, monic_index_u128(q, &b)?, a.len()))
            },
            |_, _| 1,
        )
        .into_values()
        .collect()
    } else {
        pair_histogram(members.len(), reduced, |_, _| 1).into_values().collect()
    };
    Ok(counts.iter().map(|&c| 2 * c as u128 * (c as u128 - 1)).sum())
}

fn exact_quotient(field: &FieldSpec, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    divmod_slices(field, a, b).0
}

/// Off-diagonal count for `S = ℳ_N`: `(N-1) q^{2N} - N q^{2N-1} + q^N`.
pub fn offdiag_mn_formula(q: u32, n: usize) -> Result<u128> {
    if n == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    let qq = q as i128;
    let pow = |e: usize| qq.checked_pow(e as u32).ok_or(Error::Overflow("q^k"));
    let nn = n as i128;
    let value = (nn - 1)
        .checked_mul(pow(2 * n)?)
        .and_then(|a| nn.checked_mul(pow(2 * n - 1).ok()?).map(|b| a - b))
        .and_then(|ab| ab.checked_add(pow(n).ok()?))
        .ok_or(Error::Overflow("off-diagonal formula"))?;
    Ok(value as u128)
}

/// `E×(ℳ_N) / q^{2N} = (N + 1) - N/q`.
pub fn m4_exact_full(q: u32, n: usize) -> Ratio<u128> {
    Ratio::new((n as u128 + 1) * q as u128 - n as u128, q as u128)
}

/// Off-diagonal energy of an interval against its bound: 0 when `2h < N`,
/// else `2(h - floor(N/2) + 1) q^{3h - N + 3}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ShortIntervalEnergy {
    pub off_diagonal: u128,
    pub bound: u128,
    pub verdict: Verdict,
}

pub fn short_interval_energy_bound(q: u32, n: usize, h: i64) -> Result<u128> {
    if 2 * h < n as i64 {
        return Ok(0);
    }
    let exp = (3 * h - n as i64 + 3) as u32;
    let power = (q as u128).checked_pow(exp).ok_or(Error::Overflow("interval energy bound"))?;
    Ok(2 * (h as u128 - (n / 2) as u128 + 1) * power)
}

/// Claimed for `1 <= h <= N - 1`; other radii are reported as not applicable.
pub fn check_short_interval_energy(interval: &Interval) -> Result<ShortIntervalEnergy> {
    let set = build_interval_set(interval)?;
    let report = mult_energy(&set)?;
    let h = interval.radius();
    let n = interval.degree();
    let bound = short_interval_energy_bound(interval.field().q(), n, h.max(0))?;
    let applicable = h >= 1 && h < n as i64;
    Ok(ShortIntervalEnergy {
        off_diagonal: report.off_diagonal,
        bound,
        verdict: match (applicable, report.off_diagonal <= bound) {
            (false, _) => Verdict::NotApplicable,
            (true, true) => Verdict::Holds,
            (true, false) => Verdict::Fails,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldpoly::{FactorTable, Poly};

    fn f(q: u64) -> FieldSpec {
        FieldSpec::with_order(q).unwrap()
    }

    fn full(q: u64, n: usize) -> PolySet {
        build_interval_set(&Interval::full(&f(q), n).unwrap()).unwrap()
    }

    /// Quadruples with `F1 F2 = G1 G2` and `F1 ∉ {G1, G2}`, by brute force.
    fn quadruples_excluding(set: &PolySet) -> (u128, u128) {
        let m = set.members();
        let mut total = 0;
        let mut off = 0;
        for a in m {
            for b in m {
                let ab = a * b;
                for c in m {
                    for d in m {
                        if ab == c * d {
                            total += 1;
                            if a != c && a != d {
                                off += 1;
                            }
                        }
                    }
                }
            }
        }
        (total, off)
    }

    #[test]
    fn singleton_and_primes() {
        let field = f(3);
        let one = PolySet::custom(&field, 2, vec![Poly::t_pow(&field, 2)]).unwrap();
        let r = mult_energy(&one).unwrap();
        assert_eq!((r.total, r.diagonal, r.off_diagonal), (1, 1, 0));
        let table = FactorTable::build(&field, 4).unwrap();
        let primes = build_kprime(&table, 4, 1, KPrimeVariant::P).unwrap();
        let r = mult_energy(&primes).unwrap();
        let s = primes.len() as u128;
        assert_eq!(r.total, 2 * s * s - s);
        assert_eq!(gcd_parametrized_offdiag(&primes).unwrap(), 0);
    }

    #[test]
    fn m2_over_f2() {
        let set = full(2, 2);
        let r = mult_energy(&set).unwrap();
        assert_eq!((r.total, r.diagonal, r.off_diagonal), (32, 28, 4));
        assert_eq!(gcd_parametrized_offdiag(&set).unwrap(), 4);
        assert_eq!(r.normalized_fourth_moment(), Ratio::from_integer(2));
    }

    #[test]
    fn formula_values() {
        assert_eq!(offdiag_mn_formula(2, 1).unwrap(), 0);
        assert_eq!(offdiag_mn_formula(2, 2).unwrap(), 4);
        assert_eq!(offdiag_mn_formula(2, 3).unwrap(), 40);
        assert_eq!(offdiag_mn_formula(3, 3).unwrap(), 756);
        assert!(offdiag_mn_formula(2, 0).is_err());
        assert_eq!(m4_exact_full(3, 4), Ratio::new(11, 3));
    }

    #[test]
    fn full_space_matches_formula() {
        for (q, n) in [(2u64, 1usize), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (4, 2)] {
            let set = full(q, n);
            let r = mult_energy(&set).unwrap();
            assert_eq!(r.off_diagonal, offdiag_mn_formula(q as u32, n).unwrap(), "q={q} N={n}");
            assert_eq!(gcd_parametrized_offdiag(&set).unwrap(), r.off_diagonal);
            assert_eq!(r.normalized_fourth_moment(), m4_exact_full(q as u32, n));
        }
    }

    #[test]
    fn off_diagonal_definitions_agree_on_tiny_sets() {
        for (q, n) in [(2u64, 2usize), (2, 3), (3, 2)] {
            let set = full(q, n);
            let r = mult_energy(&set).unwrap();
            let (total, off) = quadruples_excluding(&set);
            assert_eq!(total, r.total);
            assert_eq!(off, r.off_diagonal);
        }
        let field = f(2);
        let table = FactorTable::build(&field, 5).unwrap();
        let set = build_kprime(&table, 5, 2, KPrimeVariant::P).unwrap();
        let (total, off) = quadruples_excluding(&set);
        let r = mult_energy(&set).unwrap();
        assert_eq!((total, off), (r.total, r.off_diagonal));
    }

    #[test]
    fn short_interval_examples() {
        let field = f(2);
        for k in 0..2u64 {
            let center = Poly::from_monic_index(&field, 4, k * 8);
            let e = check_short_interval_energy(&Interval::new(center, 2).unwrap()).unwrap();
            assert_eq!(e.bound, 64);
            assert_eq!(e.verdict, Verdict::Holds);
        }
        let small = check_short_interval_energy(&Interval::new(Poly::t_pow(&field, 6), 2).unwrap()).unwrap();
        assert_eq!((small.off_diagonal, small.bound), (0, 0));
        let long = check_short_interval_energy(&Interval::full(&field, 4).unwrap()).unwrap();
        assert_eq!(long.off_diagonal, offdiag_mn_formula(2, 4).unwrap());
    }

    #[test]
    fn json_shape() {
        let set = full(2, 2);
        let r = mult_energy(&set).unwrap();
        let v = serde_json::to_value(EnergyJson::new(&set, &r)).unwrap();
        for key in ["tag", "q", "N", "params", "setSize", "total", "diagonal", "offDiagonal", "m4", "sizeConditionSatisfied"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["tag"], "interval");
        assert_eq!(v["m4"], 2.0);
    }
}
