//! Sums of non-negative multiplicative functions over short intervals, the
//! constant-free Shiu-type bound they are measured against, and the count of
//! interval members with many prime factors.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fieldpoly::{FactorTable, Poly};
use crate::intervals::{partition, Interval};

/// `g(P^ℓ)` as a function of the prime and the exponent.
pub type PrimePowerFn = dyn Fn(&Poly, u32) -> f64 + Send + Sync;

#[derive(Clone)]
enum RuleKind {
    One,
    PowOmega(f64),
    Custom(Arc<PrimePowerFn>),
}

/// A non-negative multiplicative function, determined by its prime-power
/// values, with the constants it is declared to satisfy:
/// `g(P^ℓ) <= A1^ℓ` and `g(F) <= A2 2^{δ deg F}`.
#[derive(Clone)]
pub struct MultiplicativeRule {
    name: String,
    kind: RuleKind,
    declared_a1: f64,
    declared_delta: f64,
}

impl fmt::Debug for MultiplicativeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplicativeRule")
            .field("name", &self.name)
            .field("declared_a1", &self.declared_a1)
            .field("declared_delta", &self.declared_delta)
            .finish()
    }
}

impl MultiplicativeRule {
    /// `g ≡ 1`.
    pub fn one() -> Self {
        Self {
            name: "one".into(),
            kind: RuleKind::One,
            declared_a1: 1.0,
            declared_delta: 0.0,
        }
    }

    /// `g(F) = y^{Ω(F)}` for `y >= 0`.
    pub fn pow_omega(y: f64) -> Result<Self> {
        if !(y >= 0.0 && y.is_finite()) {
            return Err(Error::InvalidParameter(format!("y = {y} must be finite and non-negative")));
        }
        Ok(Self {
            name: format!("pow-omega({y})"),
            kind: RuleKind::PowOmega(y),
            declared_a1: y.max(f64::MIN_POSITIVE),
            declared_delta: y.max(1.0).log2(),
        })
    }

    /// A rule given by its prime-power values.
    pub fn custom(name: &str, declared_a1: f64, declared_delta: f64, value: Arc<PrimePowerFn>) -> Self {
        Self {
            name: name.to_string(),
            kind: RuleKind::Custom(value),
            declared_a1,
            declared_delta,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn declared_a1(&self) -> f64 {
        self.declared_a1
    }

    pub fn declared_delta(&self) -> f64 {
        self.declared_delta
    }

    /// `g(P^ℓ)`.
    pub fn prime_power_value(&self, prime: &Poly, exponent: u32) -> f64 {
        match &self.kind {
            RuleKind::One => 1.0,
            RuleKind::PowOmega(y) => y.powi(exponent as i32),
            RuleKind::Custom(value) => value(prime, exponent),
        }
    }

    /// `g` on a table entry, by multiplicativity.
    pub fn eval_index(&self, table: &FactorTable, n: usize, idx: u64) -> f64 {
        match &self.kind {
            RuleKind::One => 1.0,
            RuleKind::PowOmega(y) => y.powi(table.stats_index(n, idx).big_omega as i32),
            RuleKind::Custom(_) => table
                .factor_index(n, idx)
                .into_iter()
                .map(|(id, e)| self.prime_power_value(table.prime(id), e))
                .product(),
        }
    }

    /// `g(F)` for a monic `F`; `g(1) = 1`.
    pub fn eval(&self, table: &FactorTable, f: &Poly) -> Result<f64> {
        if f.degree() == Some(0) && f.is_monic() {
            return Ok(1.0);
        }
        Ok(table
            .factor(f)?
            .factors()
            .iter()
            .map(|(p, e)| self.prime_power_value(p, *e))
            .product())
    }

    /// Checks the declared constants on every prime power and every monic
    /// polynomial of degree `<= table.max_degree()`.
    pub fn class_check(&self, table: &FactorTable) -> Result<ClassCheck> {
        let max = table.max_degree();
        let mut a1_holds = true;
        let mut non_negative = true;
        for p in table.primes() {
            let d = p.degree().expect("prime");
            for ell in 1..=(max / d) as u32 {
                let v = self.prime_power_value(p, ell);
                non_negative &= v >= 0.0;
                a1_holds &= v <= self.declared_a1.powi(ell as i32) * (1.0 + 1e-12);
            }
        }
        let mut a2: f64 = 0.0;
        for n in 1..=max {
            let size = table.field().pow_q(n as u32)? as u64;
            let scale = 2f64.powf(self.declared_delta * n as f64);
            for idx in 0..size {
                let v = self.eval_index(table, n, idx);
                non_negative &= v >= 0.0;
                a2 = a2.max(v / scale);
            }
        }
        Ok(ClassCheck {
            non_negative,
            a1_holds,
            measured_a2: a2.max(1.0),
        })
    }
}

/// Result of checking class membership on an enumerated range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassCheck {
    pub non_negative: bool,
    pub a1_holds: bool,
    /// Smallest `A2` that works on the range (at least 1, covering `g(1) = 1`).
    pub measured_a2: f64,
}

fn require(table: &FactorTable, n: usize) -> Result<()> {
    if table.max_degree() < n {
        Err(Error::TableTooShallow {
            have: table.max_degree(),
            need: n,
        })
    } else {
        Ok(())
    }
}

const CHUNK: u64 = 1 << 12;

/// `Σ_{F ∈ I} g(F)`, summed in a fixed order so the result does not depend on threading.
pub fn interval_mult_sum(rule: &MultiplicativeRule, table: &FactorTable, interval: &Interval) -> Result<f64> {
    let n = interval.degree();
    require(table, n)?;
    interval.field().check_budget(interval.size()?)?;
    let range = interval.index_range()?;
    let chunks: Vec<f64> = (range.start..range.end)
        .step_by(CHUNK as usize)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            (start..(start + CHUNK).min(range.end))
                .map(|idx| rule.eval_index(table, n, idx))
                .sum::<f64>()
        })
        .collect();
    Ok(chunks.iter().sum())
}

/// The constant-free bound `(q^{h+1} / N) exp(Σ_{P, deg P <= N} g(P) / q^{deg P})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ShiuBound {
    pub value: f64,
    /// `β N < h <= N - 1` with `0 < β < 1/2`.
    pub applicable: bool,
}

pub fn shiu_bound(rule: &MultiplicativeRule, table: &FactorTable, n: usize, h: i64, beta: f64) -> Result<ShiuBound> {
    require(table, n)?;
    if n == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    let q = table.field().q() as f64;
    let mut exponent = 0.0;
    for d in 1..=n {
        let weight = q.powi(-(d as i32));
        exponent += table
            .primes_of_degree(d)
            .iter()
            .map(|p| rule.prime_power_value(p, 1) * weight)
            .sum::<f64>();
    }
    let value = q.powi((h + 1) as i32) / n as f64 * exponent.exp();
    let applicable = beta > 0.0 && beta < 0.5 && beta * (n as f64) < h as f64 && h < n as i64;
    Ok(ShiuBound { value, applicable })
}

/// One row of the Shiu ratio table; `exact_sum` is the maximum over all intervals of radius `h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ShiuRow {
    pub q: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub h: i64,
    pub rule: String,
    pub exact_sum: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// For every `h` with `β N < h <= N - 1`, the largest interval sum of `g` over all
/// centers, divided by the bound.
pub fn shiu_sweep(rule: &MultiplicativeRule, table: &FactorTable, n: usize, beta: f64) -> Result<Vec<ShiuRow>> {
    require(table, n)?;
    let mut rows = Vec::new();
    for h in 0..n as i64 {
        let bound = shiu_bound(rule, table, n, h, beta)?;
        if !bound.applicable {
            continue;
        }
        let sums = partition(table.field(), n, h)?
            .iter()
            .map(|i| interval_mult_sum(rule, table, i))
            .collect::<Result<Vec<f64>>>()?;
        let worst = sums.into_iter().fold(0.0, f64::max);
        rows.push(ShiuRow {
            q: table.field().q(),
            n,
            h,
            rule: rule.name().to_string(),
            exact_sum: worst,
            bound: bound.value,
            ratio: worst / bound.value,
        });
    }
    Ok(rows)
}

/// Writes Shiu rows as CSV with columns `q,N,h,rule,exactSum,bound,ratio`.
pub fn write_shiu_csv<W: Write>(out: W, rows: &[ShiuRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["q", "N", "h", "rule", "exactSum", "bound", "ratio"])?;
    for r in rows {
        w.write_record([
            r.q.to_string(),
            r.n.to_string(),
            r.h.to_string(),
            r.rule.clone(),
            r.exact_sum.to_string(),
            r.bound.to_string(),
            r.ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Members of an interval with `Ω(F) > (1 + ε) ln N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HardyRamanujanCount {
    pub count: u64,
    pub fraction: f64,
    pub threshold: f64,
    /// `exp(-ε ln N / (2 ln ln 4N))`, the decay rate the fraction is compared with.
    pub reference_rate: f64,
    /// `N / 4 <= h <= N - 1`.
    pub applicable: bool,
}

pub fn hardy_ramanujan_count(table: &FactorTable, interval: &Interval, epsilon: f64) -> Result<HardyRamanujanCount> {
    let n = interval.degree();
    require(table, n)?;
    let nf = n as f64;
    let threshold = (1.0 + epsilon) * nf.ln();
    let range = interval.index_range()?;
    let size = range.end - range.start;
    let count = range
        .filter(|&idx| table.stats_index(n, idx).big_omega as f64 > threshold)
        .count() as u64;
    let h = interval.radius();
    Ok(HardyRamanujanCount {
        count,
        fraction: count as f64 / size as f64,
        threshold,
        reference_rate: (-epsilon * nf.ln() / (2.0 * (4.0 * nf).ln().ln())).exp(),
        applicable: 4 * h >= n as i64 && h < n as i64,
    })
}
