//! Exact smooth and rough counts `Ψ`, `Φ` over `ℳ_N` and over intervals, the
//! inequalities they satisfy, and the polynomial totient.

use std::fmt;
use std::io::Write;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fieldpoly::{pi_q, FactorTable, FieldSpec, Poly};
use crate::intervals::{partition, Interval};

/// Outcome of one inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Parameters outside the range where the inequality is claimed.
    NotApplicable,
}

impl Verdict {
    fn from_bool(applicable: bool, holds: bool) -> Self {
        match (applicable, holds) {
            (false, _) => Verdict::NotApplicable,
            (true, true) => Verdict::Holds,
            (true, false) => Verdict::Fails,
        }
    }

    pub fn is_failure(self) -> bool {
        self == Verdict::Fails
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "true",
            Verdict::Fails => "false",
            Verdict::NotApplicable => "n/a",
        })
    }
}

/// Right-hand side of a check: exact where possible, binary64 for exp-based bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Exact(Ratio<i128>),
    Real(f64),
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Exact(r) => write!(f, "{r}"),
            Bound::Real(x) => write!(f, "{x:e}"),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Hildebrand,
    Chebyshev,
    Rough,
    Rankin,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Hildebrand => "hildebrand",
            CheckKind::Chebyshev => "chebyshev",
            CheckKind::Rough => "rough",
            CheckKind::Rankin => "rankin",
        }
    }
}

/// One row of a check table: `lhs` is compared against `rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub kind: CheckKind,
    pub q: u32,
    #[serde(rename = "N")]
    pub n: usize,
    pub h: i64,
    pub d_or_z: usize,
    pub lhs: u128,
    pub rhs: Bound,
    pub verdict: Verdict,
}

fn ratio(num: u128, den: u128) -> Result<Ratio<i128>> {
    let num = i128::try_from(num).map_err(|_| Error::Overflow("bound numerator"))?;
    let den = i128::try_from(den).map_err(|_| Error::Overflow("bound denominator"))?;
    Ok(Ratio::new(num, den))
}

fn le_ratio(lhs: u128, r: &Ratio<i128>) -> bool {
    // r has a positive denominator after normalization.
    (lhs as i128).checked_mul(*r.denom()).is_some_and(|l| l <= *r.numer())
}

/// Exact `Ψ(n, d)` and `Φ(n, z)` for every `n <= max_n`, by full enumeration.
#[derive(Debug, Clone)]
pub struct SmoothRoughTable {
    field: FieldSpec,
    factors: FactorTable,
    /// `psi[n][d]` for `0 <= d <= n`.
    psi: Vec<Vec<u128>>,
    /// `phi[n][z]` for `0 <= z <= n`.
    phi: Vec<Vec<u128>>,
}

impl SmoothRoughTable {
    pub fn build(field: &FieldSpec, max_n: usize) -> Result<Self> {
        Self::from_factors(FactorTable::build(field, max_n)?)
    }

    pub fn from_factors(factors: FactorTable) -> Result<Self> {
        let field = factors.field().clone();
        let max_n = factors.max_degree();
        let mut psi = vec![vec![1u128]];
        let mut phi = vec![vec![1u128]];
        for n in 1..=max_n {
            let size = field.pow_q(n as u32)? as u64;
            let (plus, minus) = (0..size)
                .into_par_iter()
                .fold(
                    || (vec![0u128; n + 1], vec![0u128; n + 1]),
                    |(mut plus, mut minus), idx| {
                        let s = factors.stats_index(n, idx);
                        plus[s.p_plus] += 1;
                        minus[s.p_minus] += 1;
                        (plus, minus)
                    },
                )
                .reduce(
                    || (vec![0u128; n + 1], vec![0u128; n + 1]),
                    |(mut a, mut b), (c, d)| {
                        a.iter_mut().zip(c).for_each(|(x, y)| *x += y);
                        b.iter_mut().zip(d).for_each(|(x, y)| *x += y);
                        (a, b)
                    },
                );
            psi.push(cumulative(&plus));
            phi.push(rough_tail(&minus));
        }
        Ok(Self {
            field,
            factors,
            psi,
            phi,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn factors(&self) -> &FactorTable {
        &self.factors
    }

    pub fn max_n(&self) -> usize {
        self.psi.len() - 1
    }

    /// `Ψ(n, d)`: monic degree-`n` polynomials whose prime factors all have degree `<= d`.
    pub fn psi(&self, n: usize, d: usize) -> u128 {
        let row = &self.psi[n];
        row[d.min(row.len() - 1)]
    }

    /// `Φ(n, z)`: monic degree-`n` polynomials whose prime factors all have degree `> z`.
    pub fn phi(&self, n: usize, z: usize) -> u128 {
        let row = &self.phi[n];
        if n == 0 {
            1
        } else if z < row.len() {
            row[z]
        } else {
            0
        }
    }

    fn require(&self, n: usize) -> Result<()> {
        if n > self.max_n() {
            Err(Error::TableTooShallow {
                have: self.max_n(),
                need: n,
            })
        } else {
            Ok(())
        }
    }

    /// Histograms of `P⁺` and `P⁻` over the interval's members.
    fn interval_histograms(&self, interval: &Interval) -> Result<(Vec<u128>, Vec<u128>)> {
        let n = interval.degree();
        self.require(n)?;
        let mut plus = vec![0u128; n + 1];
        let mut minus = vec![0u128; n + 1];
        for idx in interval.index_range()? {
            let s = self.factors.stats_index(n, idx);
            plus[s.p_plus] += 1;
            minus[s.p_minus] += 1;
        }
        Ok((plus, minus))
    }

    /// `Ψ(I, d)` by enumeration.
    pub fn psi_interval(&self, interval: &Interval, d: usize) -> Result<u128> {
        let (plus, _) = self.interval_histograms(interval)?;
        Ok(plus.iter().take(d + 1).sum())
    }

    /// `Φ(I, z)` by enumeration.
    pub fn phi_interval(&self, interval: &Interval, z: usize) -> Result<u128> {
        let (_, minus) = self.interval_histograms(interval)?;
        Ok(minus.iter().skip(z + 1).sum())
    }
}

fn cumulative(hist: &[u128]) -> Vec<u128> {
    hist.iter()
        .scan(0u128, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// `tail[z] = #{P⁻ > z}`.
fn rough_tail(hist: &[u128]) -> Vec<u128> {
    let mut tail = vec![0u128; hist.len()];
    let mut acc = 0;
    for z in (0..hist.len()).rev() {
        tail[z] = acc;
        acc += hist[z];
    }
    tail
}

/// `Ψ(S, d)` for an arbitrary set of monic polynomials. `F = 1` counts as smooth.
pub fn psi_set<'a>(set: impl IntoIterator<Item = &'a Poly>, d: usize, table: &FactorTable) -> Result<u128> {
    let mut count = 0;
    for g in set {
        if g.degree() == Some(0) || table.factor(g)?.stats().p_plus <= d {
            count += 1;
        }
    }
    Ok(count)
}

/// `Φ(S, z)` for an arbitrary set of monic polynomials. `F = 1` counts as rough.
pub fn phi_set<'a>(set: impl IntoIterator<Item = &'a Poly>, z: usize, table: &FactorTable) -> Result<u128> {
    let mut count = 0;
    for g in set {
        if g.degree() == Some(0) || table.factor(g)?.stats().p_minus > z {
            count += 1;
        }
    }
    Ok(count)
}

/// `Ψ(n, d)` for all `n <= max_n` by the recurrence
/// `n Ψ(n, d) = Σ_{k <= d} k π_q(k) Σ_{m >= 1, mk <= n} Ψ(n - mk, d)`.
pub fn psi_recurrence_table(q: u32, max_n: usize, d: usize) -> Result<Vec<u128>> {
    let weights: Vec<u128> = (1..=d.min(max_n))
        .map(|k| Ok(k as u128 * pi_q(q, k as u32)?))
        .collect::<Result<_>>()?;
    let mut psi = vec![1u128];
    for n in 1..=max_n {
        let mut acc: u128 = 0;
        for (k, w) in (1..).zip(&weights) {
            let inner: u128 = (1..=n / k).map(|m| psi[n - m * k]).sum();
            acc = w
                .checked_mul(inner)
                .and_then(|t| acc.checked_add(t))
                .ok_or(Error::Overflow("psi recurrence"))?;
        }
        if !acc.is_multiple_of(n as u128) {
            return Err(Error::Invariant(format!("recurrence sum {acc} not divisible by {n}")));
        }
        psi.push(acc / n as u128);
    }
    Ok(psi)
}

/// `Ψ(n, d)` by the recurrence.
pub fn psi_recurrence(q: u32, n: usize, d: usize) -> Result<u128> {
    Ok(psi_recurrence_table(q, n, d)?[n])
}

/// `Ψ(I(A, h), d) <= Ψ(h + 1, d)`, claimed for `0 <= h <= N - 1`.
pub fn check_hildebrand(table: &SmoothRoughTable, interval: &Interval, d: usize) -> Result<CheckRow> {
    let h = interval.radius();
    let lhs = table.psi_interval(interval, d)?;
    let rhs = table.psi((h + 1) as usize, d);
    Ok(CheckRow {
        kind: CheckKind::Hildebrand,
        q: table.field.q(),
        n: interval.degree(),
        h,
        d_or_z: d,
        lhs,
        rhs: Bound::Exact(ratio(rhs, 1)?),
        verdict: Verdict::from_bool(h >= 0, lhs <= rhs),
    })
}

fn chebyshev_bound(q: u32, h: i64, z: usize) -> Result<Ratio<i128>> {
    // q^{h+1} / (z (1 - 1/q)) = q^{h+2} / (z (q - 1))
    let num = (q as u128).checked_pow((h + 2) as u32).ok_or(Error::Overflow("chebyshev bound"))?;
    ratio(num, z.max(1) as u128 * (q as u128 - 1))
}

/// `Φ(I(A, h), z) <= q^{h+1} / (z (1 - 1/q))`, claimed for `1 <= z <= (h + 1) / 2`.
pub fn check_chebyshev(table: &SmoothRoughTable, interval: &Interval, z: usize) -> Result<CheckRow> {
    let h = interval.radius();
    let count = table.phi_interval(interval, z)?;
    let bound = chebyshev_bound(table.field.q(), h, z)?;
    let applicable = h >= 0 && z >= 1 && 2 * z as i64 <= h + 1;
    Ok(CheckRow {
        kind: CheckKind::Chebyshev,
        q: table.field.q(),
        n: interval.degree(),
        h,
        d_or_z: z,
        lhs: count,
        rhs: Bound::Exact(bound),
        verdict: Verdict::from_bool(applicable, le_ratio(count, &bound)),
    })
}

/// Result of the two-sided rough window check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoughWindow {
    pub count: u128,
    pub lower: Bound,
    pub upper: Bound,
    pub verdict: Verdict,
}

/// `q^N / (10 z + 5) <= Φ(N, z) <= q^N / (z (1 - 1/q))`, claimed for `1 <= z <= N / 2`.
pub fn rough_bounds_check(table: &SmoothRoughTable, n: usize, z: usize) -> Result<RoughWindow> {
    table.require(n)?;
    let q = table.field.q();
    let count = table.phi(n, z);
    let qn = table.field.pow_q(n as u32)?;
    let lower = ratio(qn, 10 * z as u128 + 5)?;
    let upper = chebyshev_bound(q, n as i64 - 1, z)?;
    let above = (count as i128)
        .checked_mul(*lower.denom())
        .is_some_and(|c| c >= *lower.numer());
    let applicable = z >= 1 && 2 * z <= n;
    Ok(RoughWindow {
        count,
        lower: Bound::Exact(lower),
        upper: Bound::Exact(upper),
        verdict: Verdict::from_bool(applicable, above && le_ratio(count, &upper)),
    })
}

impl RoughWindow {
    /// Flattens into a check row with `h = N - 1` and the upper bound as `rhs`.
    pub fn to_row(&self, q: u32, n: usize, z: usize) -> CheckRow {
        CheckRow {
            kind: CheckKind::Rough,
            q,
            n,
            h: n as i64 - 1,
            d_or_z: z,
            lhs: self.count,
            rhs: self.upper,
            verdict: self.verdict,
        }
    }
}

/// `Σ_{1<=n<=N} Ψ(n, d) <= q^N exp(-2N/(3d) + 4 ln d + 4)`, claimed for `1 <= d <= N`.
///
/// The bound is evaluated in binary64 and the comparison allows one ulp of slack.
pub fn rankin_bound_check(table: &SmoothRoughTable, n: usize, d: usize) -> Result<CheckRow> {
    table.require(n)?;
    let q = table.field.q();
    let lhs: u128 = (1..=n).map(|m| table.psi(m, d)).sum();
    let applicable = d >= 1 && d <= n;
    let rhs = if d == 0 {
        0.0
    } else {
        let (nf, df) = (n as f64, d as f64);
        (q as f64).powi(n as i32) * (-2.0 * nf / (3.0 * df) + 4.0 * df.ln() + 4.0).exp()
    };
    let slack = f64::from_bits(rhs.to_bits() + 1);
    Ok(CheckRow {
        kind: CheckKind::Rankin,
        q,
        n,
        h: n as i64 - 1,
        d_or_z: d,
        lhs,
        rhs: Bound::Real(rhs),
        verdict: Verdict::from_bool(applicable, (lhs as f64) <= slack),
    })
}

/// Exhaustive Hildebrand sweep: every radius `0 <= h <= N - 1` and every `0 <= d <= N`,
/// one row per `(h, d)` with `lhs` the maximum over all intervals (equivalently all centers `A`).
pub fn hildebrand_sweep(table: &SmoothRoughTable, n: usize) -> Result<Vec<CheckRow>> {
    interval_sweep(table, n, CheckKind::Hildebrand)
}

/// Exhaustive Chebyshev sweep over `0 <= h <= N - 1` and `1 <= z <= (h + 1) / 2`.
pub fn chebyshev_sweep(table: &SmoothRoughTable, n: usize) -> Result<Vec<CheckRow>> {
    interval_sweep(table, n, CheckKind::Chebyshev)
}

fn interval_sweep(table: &SmoothRoughTable, n: usize, kind: CheckKind) -> Result<Vec<CheckRow>> {
    table.require(n)?;
    let mut rows = Vec::new();
    for h in 0..n as i64 {
        let parts = partition(&table.field, n, h)?;
        let hists = parts
            .par_iter()
            .map(|i| table.interval_histograms(i))
            .collect::<Result<Vec<_>>>()?;
        let ds: Vec<usize> = match kind {
            CheckKind::Hildebrand => (0..=n).collect(),
            _ => (1..=((h + 1) / 2) as usize).collect(),
        };
        for d in ds {
            let worst = hists
                .iter()
                .map(|(plus, minus)| match kind {
                    CheckKind::Hildebrand => plus.iter().take(d + 1).sum::<u128>(),
                    _ => minus.iter().skip(d + 1).sum::<u128>(),
                })
                .max()
                .unwrap_or(0);
            let (rhs, holds) = match kind {
                CheckKind::Hildebrand => {
                    let r = table.psi((h + 1) as usize, d);
                    (ratio(r, 1)?, worst <= r)
                }
                _ => {
                    let r = chebyshev_bound(table.field.q(), h, d)?;
                    (r, le_ratio(worst, &r))
                }
            };
            rows.push(CheckRow {
                kind,
                q: table.field.q(),
                n,
                h,
                d_or_z: d,
                lhs: worst,
                rhs: Bound::Exact(rhs),
                verdict: Verdict::from_bool(true, holds),
            });
        }
    }
    Ok(rows)
}

/// `φ(F) = Π (|P|^e - |P|^{e-1})` over the factorization; `φ(1) = 1`.
pub fn totient(f: &Poly, table: &FactorTable) -> Result<u128> {
    match f.degree() {
        None => return Err(Error::InvalidParameter("totient of the zero polynomial".into())),
        Some(0) => return Ok(1),
        Some(_) => {}
    }
    let field = f.field();
    let mut acc: u128 = 1;
    for (p, e) in table.factor(f)?.factors() {
        let dp = p.degree().expect("prime") as u32;
        let full = field.pow_q(dp * e)?;
        let part = field.pow_q(dp * (e - 1))?;
        acc = acc.checked_mul(full - part).ok_or(Error::Overflow("totient"))?;
    }
    Ok(acc)
}

/// `φ(F)` by counting residues coprime to `F`; exponential in `deg F`.
pub fn totient_by_units(f: &Poly) -> Result<u128> {
    let field = f.field();
    let n = f.degree().ok_or(Error::InvalidParameter("zero modulus".into()))?;
    if n == 0 {
        return Ok(1);
    }
    let count = field.enumeration_size(n as u32)?;
    let q = field.q() as u64;
    let mut units = 0;
    for i in 0..count {
        let mut coeffs = Vec::with_capacity(n);
        let mut x = i;
        for _ in 0..n {
            coeffs.push((x % q) as u16);
            x /= q;
        }
        let a = Poly::from_elems(field, coeffs);
        if !a.is_zero() && a.gcd(f)?.degree() == Some(0) {
            units += 1;
        }
    }
    Ok(units)
}

/// The empirical constant `min_{F ∈ ℳ_N} φ(F) (ln N)^2 / q^N`, for `N >= 2`.
pub fn totient_floor_constant(table: &FactorTable, n: usize) -> Result<f64> {
    if n < 2 || n > table.max_degree() {
        return Err(Error::InvalidParameter(format!("totient constant needs 2 <= N <= {}", table.max_degree())));
    }
    let field = table.field();
    let size = field.pow_q(n as u32)?;
    let mut min = f64::INFINITY;
    for idx in 0..size as u64 {
        let mut phi: u128 = 1;
        for (id, e) in table.factor_index(n, idx) {
            let dp = table.prime_degree(id) as u32;
            phi *= field.pow_q(dp * e)? - field.pow_q(dp * (e - 1))?;
        }
        if phi > size {
            return Err(Error::Invariant(format!("totient {phi} exceeds q^N = {size}")));
        }
        min = min.min(phi as f64 / size as f64);
    }
    Ok(min * (n as f64).ln().powi(2))
}

/// Writes check rows as CSV with columns `q,N,h,d_or_z,lhs,rhs,holds`.
pub fn write_checks_csv<W: Write>(out: W, rows: &[CheckRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["q", "N", "h", "d_or_z", "lhs", "rhs", "holds"])?;
    for r in rows {
        w.write_record([
            r.q.to_string(),
            r.n.to_string(),
            r.h.to_string(),
            r.d_or_z.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.verdict.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
