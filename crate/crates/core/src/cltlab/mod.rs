//! Monte Carlo study of `Z = |S|^{-1/2} Σ_{F ∈ S} f(F)` for a Steinhaus
//! random multiplicative function `f`.

mod blocks;
mod rng;

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};
use statrs::function::erf::erf;

pub use blocks::{
    filtration_stat, martingale_blocks, theorem_conditions_report, ConditionsReport, FiltrationStat,
    MartingaleBlocks,
};
pub use rng::{eval_f, prime_key, value_from_key, PrimeKey, RmfAssignment};

use crate::energy::{EnergyReport, Family, PolySet};
use crate::error::{Error, Result};
use crate::fieldpoly::FactorTable;

pub const SCHEMA_VERSION: u32 = 1;

/// Points `(t1, t2)` at which the empirical characteristic function is reported.
pub const ECF_GRID: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 0.0)];

/// Fewest trials [`monte_carlo`] accepts.
pub const MIN_TRIALS: u64 = 100;

/// Multiplier on the asymptotic Kolmogorov–Smirnov critical value at the 1% level.
pub const KS_CRITICAL_99: f64 = 1.628;

/// `Z` for one assignment; `S` must be nonempty.
pub fn z_statistic(assignment: &RmfAssignment, table: &FactorTable, set: &PolySet) -> Result<Complex64> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for m in set.members() {
        sum += eval_f(assignment, table, m)?;
    }
    Ok(sum / (set.len() as f64).sqrt())
}

/// Member factorizations over a compact list of the primes that occur.
struct Prepared {
    keys: Vec<PrimeKey>,
    members: Vec<Vec<(usize, u32)>>,
    scale: f64,
}

impl Prepared {
    fn new(set: &PolySet, table: &FactorTable) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut local: HashMap<u32, usize> = HashMap::new();
        let mut keys = Vec::new();
        let mut members = Vec::with_capacity(set.len());
        for m in set.members() {
            let factors = match (m.degree(), m.monic_index()) {
                (Some(n), Some(idx)) if n >= 1 && n <= table.max_degree() => table.factor_index(n, idx),
                (Some(0), _) => Vec::new(),
                _ => {
                    return Err(Error::TableTooShallow {
                        have: table.max_degree(),
                        need: set.degree(),
                    })
                }
            };
            let row = factors
                .into_iter()
                .map(|(id, e)| {
                    let slot = *local.entry(id).or_insert_with(|| {
                        keys.push(prime_key(table.prime(id)));
                        keys.len() - 1
                    });
                    (slot, e)
                })
                .collect();
            members.push(row);
        }
        Ok(Self {
            keys,
            members,
            scale: (set.len() as f64).sqrt(),
        })
    }

    fn z(&self, stream: u64, values: &mut Vec<Complex64>) -> Complex64 {
        values.clear();
        values.extend(self.keys.iter().map(|k| value_from_key(k, stream)));
        let mut sum = Complex64::new(0.0, 0.0);
        for row in &self.members {
            let mut term = Complex64::new(1.0, 0.0);
            for &(slot, e) in row {
                term *= values[slot].powu(e);
            }
            sum += term;
        }
        sum / self.scale
    }
}

/// Samples `Z` once per trial, trial `i` using stream `seed + i`. The output is
/// in trial order and does not depend on the number of worker threads.
pub fn sample_z(set: &PolySet, table: &FactorTable, trials: u64, seed: u64) -> Result<Vec<Complex64>> {
    let prepared = Prepared::new(set, table)?;
    Ok((0..trials)
        .into_par_iter()
        .map_init(Vec::new, |values, trial| prepared.z(seed.wrapping_add(trial), values))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EcfPoint {
    pub t1: f64,
    pub t2: f64,
    pub re: f64,
    pub im: f64,
    /// `exp(-(t1^2 + t2^2) / 4)`, the characteristic function of the standard complex normal.
    pub target: f64,
    /// `|empirical - target|`.
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Gates {
    /// `|m2_hat - 1| <= 4 SE`.
    pub second_moment: bool,
    /// `|m4_hat - m4_exact| <= 4 SE`.
    pub fourth_moment: bool,
    /// Both KS distances below the 99% critical value.
    pub kolmogorov_smirnov: bool,
}

/// Exact and empirical moments and distributional statistics of `Z`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CltReport {
    pub schema_version: u32,
    pub tag: Family,
    pub q: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub params: Map<String, Value>,
    pub set_size: u64,
    pub trials: u64,
    pub seed: u64,
    pub m2_hat: f64,
    pub m2_se: f64,
    pub m4_hat: f64,
    pub m4_se: f64,
    /// `E× / |S|^2` as an exact fraction.
    pub m4_exact: String,
    pub m4_exact_value: f64,
    pub ecf: Vec<EcfPoint>,
    pub ks_re: f64,
    pub ks_im: f64,
    pub ks_critical: f64,
    pub block_second_moments: f64,
    pub gates: Gates,
}

impl CltReport {
    /// Moment gates only; the KS gate is a separate, distribution-level check.
    pub fn moments_pass(&self) -> bool {
        self.gates.second_moment && self.gates.fourth_moment
    }
}

/// The report together with the per-trial samples it was computed from.
#[derive(Debug, Clone)]
pub struct MonteCarlo {
    pub report: CltReport,
    pub samples: Vec<Complex64>,
}

/// Mean and standard error of the mean.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Kolmogorov–Smirnov distance of a sample from the standard normal.
pub fn ks_distance(sample: &[f64]) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = normal_cdf(x);
            ((i + 1) as f64 / n - c).max(c - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Runs `trials` independent assignments and compares `Z` with the standard complex normal.
///
/// `energy` must be the energy report of `set`; it supplies the exact fourth moment.
pub fn monte_carlo(
    set: &PolySet,
    table: &FactorTable,
    energy: &EnergyReport,
    trials: u64,
    seed: u64,
) -> Result<MonteCarlo> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!("at least {MIN_TRIALS} trials are required, got {trials}")));
    }
    if energy.set_size != set.len() as u64 {
        return Err(Error::InvalidParameter("energy report does not belong to this set".into()));
    }
    let samples = sample_z(set, table, trials, seed)?;

    let m2: Vec<f64> = samples.iter().map(|z| z.norm_sqr()).collect();
    let m4: Vec<f64> = m2.iter().map(|x| x * x).collect();
    let (m2_hat, m2_se) = mean_se(&m2);
    let (m4_hat, m4_se) = mean_se(&m4);
    let exact = energy.normalized_fourth_moment();
    let m4_exact_value = *exact.numer() as f64 / *exact.denom() as f64;

    let ecf = ECF_GRID
        .iter()
        .map(|&(t1, t2)| {
            let sum: Complex64 = samples
                .iter()
                .map(|z| Complex64::from_polar(1.0, t1 * z.re + t2 * z.im))
                .sum();
            let mean = sum / trials as f64;
            let target = (-(t1 * t1 + t2 * t2) / 4.0).exp();
            EcfPoint {
                t1,
                t2,
                re: mean.re,
                im: mean.im,
                target,
                error: (mean - target).norm(),
            }
        })
        .collect();

    let root2 = std::f64::consts::SQRT_2;
    let ks_re = ks_distance(&samples.iter().map(|z| z.re * root2).collect::<Vec<_>>());
    let ks_im = ks_distance(&samples.iter().map(|z| z.im * root2).collect::<Vec<_>>());
    let ks_critical = KS_CRITICAL_99 / (trials as f64).sqrt();
    let blocks = martingale_blocks(set, table)?;

    // Slack for sets whose |Z| is deterministic, where the standard error is exactly 0.
    let tiny = 1e-12;
    let gates = Gates {
        second_moment: (m2_hat - 1.0).abs() <= 4.0 * m2_se + tiny,
        fourth_moment: (m4_hat - m4_exact_value).abs() <= 4.0 * m4_se + tiny,
        kolmogorov_smirnov: ks_re < ks_critical && ks_im < ks_critical,
    };
    let report = CltReport {
        schema_version: SCHEMA_VERSION,
        tag: set.family(),
        q: set.field().q(),
        n: set.degree(),
        params: set.params().clone(),
        set_size: set.len() as u64,
        trials,
        seed,
        m2_hat,
        m2_se,
        m4_hat,
        m4_se,
        m4_exact: exact.to_string(),
        m4_exact_value,
        ecf,
        ks_re,
        ks_im,
        ks_critical,
        block_second_moments: blocks.coverage(),
        gates,
    };
    Ok(MonteCarlo { report, samples })
}

/// Per-trial samples as CSV with columns `trial,re,im`.
pub fn write_trials_csv<W: Write>(out: W, samples: &[Complex64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "re", "im"])?;
    for (i, z) in samples.iter().enumerate() {
        w.write_record([i.to_string(), z.re.to_string(), z.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{build_interval_set, build_kprime, mult_energy, KPrimeVariant};
    use crate::fieldpoly::{FieldSpec, Poly};
    use crate::intervals::Interval;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::with_order(q).unwrap()
    }

    #[test]
    fn values_are_unit_and_deterministic() {
        let field = f(3);
        let table = FactorTable::build(&field, 4).unwrap();
        let a = RmfAssignment::new(9);
        for p in table.primes() {
            let v = a.value_of(p);
            assert!((v.norm() - 1.0).abs() < 1e-15);
            assert_eq!(v, RmfAssignment::new(9).value_of(p));
            assert_ne!(v, RmfAssignment::new(10).value_of(p));
        }
    }

    #[test]
    fn eval_f_examples() {
        let field = f(2);
        let table = FactorTable::build(&field, 6).unwrap();
        let a = RmfAssignment::new(1);
        assert_eq!(eval_f(&a, &table, &Poly::one(&field)).unwrap(), Complex64::new(1.0, 0.0));
        let p = Poly::new(&field, vec![1, 1, 1]).unwrap();
        assert_eq!(eval_f(&a, &table, &p).unwrap(), a.value_of(&p));
        let p2 = &p * &p;
        let fp = eval_f(&a, &table, &p).unwrap();
        assert!((eval_f(&a, &table, &p2).unwrap() - fp * fp).norm() < 1e-15);
        for idx in 0..64 {
            let g = Poly::from_monic_index(&field, 6, idx);
            assert!((eval_f(&a, &table, &g).unwrap().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn z_matches_sampler_and_singleton_is_unit() {
        let field = f(2);
        let table = FactorTable::build(&field, 4).unwrap();
        let m4 = build_interval_set(&Interval::full(&field, 4).unwrap()).unwrap();
        let samples = sample_z(&m4, &table, 5, 100).unwrap();
        for (i, s) in samples.iter().enumerate() {
            let z = z_statistic(&RmfAssignment::new(100 + i as u64), &table, &m4).unwrap();
            assert!((z - s).norm() < 1e-12);
        }
        let single = PolySet::custom(&field, 3, vec![Poly::new(&field, vec![1, 1, 0, 1]).unwrap()]).unwrap();
        let z = z_statistic(&RmfAssignment::new(5), &table, &single).unwrap();
        assert!((z.norm() - 1.0).abs() < 1e-15);
        let empty = PolySet::custom(&field, 3, vec![]).unwrap();
        assert!(matches!(z_statistic(&RmfAssignment::new(5), &table, &empty), Err(Error::EmptySet)));
    }

    /// Golden value for seed 42 on `ℳ_2` over `F_2`, frozen from the generator.
    #[test]
    fn golden_z() {
        let field = f(2);
        let table = FactorTable::build(&field, 2).unwrap();
        let m2 = build_interval_set(&Interval::full(&field, 2).unwrap()).unwrap();
        let z = z_statistic(&RmfAssignment::new(42), &table, &m2).unwrap();
        let golden = Complex64::new(GOLDEN_RE, GOLDEN_IM);
        assert!((z - golden).norm() < 1e-12, "z = {z}");
    }

    const GOLDEN_RE: f64 = 0.5592273288675909;
    const GOLDEN_IM: f64 = 0.03578724273707856;

    #[test]
    fn moments_for_primes() {
        let field = f(2);
        let table = FactorTable::build(&field, 7).unwrap();
        let primes = build_kprime(&table, 7, 1, KPrimeVariant::P).unwrap();
        let energy = mult_energy(&primes).unwrap();
        let mc = monte_carlo(&primes, &table, &energy, 4000, 3).unwrap();
        assert!(mc.report.moments_pass(), "{:?}", mc.report);
        let s = primes.len() as f64;
        assert_eq!(mc.report.m4_exact_value, (2.0 * s * s - s) / (s * s));
        assert_eq!(mc.report.block_second_moments, 1.0);
        assert!(monte_carlo(&primes, &table, &energy, 99, 3).is_err());
    }

    #[test]
    fn report_is_reproducible_across_thread_counts() {
        let field = f(2);
        let table = FactorTable::build(&field, 6).unwrap();
        let set = build_interval_set(&Interval::full(&field, 6).unwrap()).unwrap();
        let energy = mult_energy(&set).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| monte_carlo(&set, &table, &energy, 500, 11).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(serde_json::to_string(&a.report).unwrap(), serde_json::to_string(&b.report).unwrap());
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn ks_of_normal_quantiles_is_small() {
        let n = 1000;
        // Midpoint quantiles of the normal via bisection on the CDF.
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) / n as f64;
                let (mut lo, mut hi) = (-10.0, 10.0);
                for _ in 0..100 {
                    let mid = (lo + hi) / 2.0;
                    if normal_cdf(mid) < p { lo = mid } else { hi = mid }
                }
                lo
            })
            .collect();
        assert!(ks_distance(&xs) <= 0.5 / n as f64 + 1e-9);
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.96) - 0.975002104851780).abs() < 1e-11);
    }

    #[test]
    fn trials_csv() {
        let mut buf = Vec::new();
        write_trials_csv(&mut buf, &[Complex64::new(0.5, -1.0)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "trial,re,im\n0,0.5,-1\n");
    }
}
