//! The five subcommands. Each returns `Ok(true)` when every hard check passed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use steinhaus_core::cltlab::{monte_carlo, write_trials_csv, CltReport};
use steinhaus_core::counting::{
    chebyshev_sweep, hildebrand_sweep, psi_recurrence_table, rankin_bound_check, rough_bounds_check, write_checks_csv,
    CheckRow, SmoothRoughTable,
};
use steinhaus_core::energy::{
    build_interval_set, build_kprime, build_rough, build_shifted_primes, check_short_interval_energy,
    gcd_parametrized_offdiag, mult_energy, offdiag_mn_formula, EnergyJson, EnergyReport, KPrimeVariant,
};
use steinhaus_core::fieldpoly::pi_q;
use steinhaus_core::intervals::{divisor_count_by_enumeration, divisor_count_in_interval, partition};
use steinhaus_core::shiu::{shiu_sweep, write_shiu_csv, MultiplicativeRule};
use steinhaus_core::{FactorTable, Family, FieldSpec, Interval, PolySet, Poly};

use crate::params::{Format, Params};

const DEFAULT_TRIALS: u64 = 20_000;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Timing and environment go to a separate file so payloads stay byte-identical.
pub fn write_meta(params: &Params, command: &str, started: Instant) -> Result<()> {
    let meta = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "threads": rayon::current_num_threads(),
        "elapsedSeconds": started.elapsed().as_secs_f64(),
        "params": params,
    });
    write_json(&params.out_dir(), &format!("{command}.meta.json"), &meta)
}

/// The set named by `--family` together with a factor table deep enough to evaluate it.
pub fn build_set(params: &Params) -> Result<(PolySet, FactorTable)> {
    let field = params.field()?;
    let n = params.require_n()?;
    let family: Family = params.family.as_deref().context("--family is required")?.parse()?;
    let table = FactorTable::build(&field, n)?;
    let set = match family {
        Family::Interval => {
            let h = params.h.context("--h is required for the interval family")?;
            let center = match &params.center {
                Some(text) => params.poly(&field, text)?,
                None => Poly::t_pow(&field, n),
            };
            if center.degree() != Some(n) {
                bail!("center must have degree N = {n}");
            }
            build_interval_set(&Interval::new(center, h)?)?
        }
        Family::KPrimeP | Family::KPrimeS | Family::KPrimeD => {
            let k = params.k.context("--k is required for the kprime families")?;
            let variant = match family {
                Family::KPrimeP => KPrimeVariant::P,
                Family::KPrimeS => KPrimeVariant::S,
                _ => KPrimeVariant::D,
            };
            build_kprime(&table, n, k, variant)?
        }
        Family::ShiftedPrime => {
            let shift = match &params.shift {
                Some(text) => params.poly(&field, text)?,
                None => Poly::one(&field),
            };
            build_shifted_primes(&table, n, &shift)?
        }
        Family::Rough => build_rough(&table, n, params.z.context("--z is required for the rough family")?)?,
        Family::Custom => bail!("the custom family is only available through the library"),
    };
    if !set.warnings().is_empty() {
        let joined = set.warnings().join("; ");
        if !params.allow_out_of_range {
            bail!("parameters outside the proven range: {joined} (pass --allow-out-of-range to run anyway)");
        }
        eprintln!("warning: {joined}");
    }
    Ok((set, table))
}

#[derive(Debug, Serialize)]
struct Suite {
    name: &'static str,
    cases: u64,
    failures: u64,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct VerifyReport {
    schema_version: u32,
    q: u32,
    #[serde(rename = "N")]
    n: usize,
    suites: Vec<Suite>,
    passed: bool,
}

fn counting_rows(table: &SmoothRoughTable, n: usize) -> Result<Vec<CheckRow>> {
    let q = table.field().q();
    let mut rows = hildebrand_sweep(table, n)?;
    rows.extend(chebyshev_sweep(table, n)?);
    for z in 1..=n / 2 {
        rows.push(rough_bounds_check(table, n, z)?.to_row(q, n, z));
    }
    for d in 1..=n {
        rows.push(rankin_bound_check(table, n, d)?);
    }
    Ok(rows)
}

fn suite_from_rows(name: &'static str, rows: &[CheckRow], kind: &str) -> Suite {
    let mine = rows.iter().filter(|r| r.kind.name() == kind);
    Suite {
        name,
        cases: mine.clone().count() as u64,
        failures: mine.filter(|r| r.verdict.is_failure()).count() as u64,
    }
}

fn all_intervals(field: &FieldSpec, n: usize) -> Result<Vec<Interval>> {
    let mut out = Vec::new();
    for h in 0..n as i64 {
        out.extend(partition(field, n, h)?);
    }
    Ok(out)
}

fn write_rows(params: &Params, stem: &str, rows: &[CheckRow]) -> Result<()> {
    let dir = params.out_dir();
    match params.format() {
        Format::Csv => {
            let mut w = create(&dir, &format!("{stem}.csv"))?;
            write_checks_csv(&mut w, rows)?;
            w.flush()?;
        }
        Format::Json => write_json(&dir, &format!("{stem}.json"), &rows)?,
    }
    Ok(())
}

pub fn verify(params: &Params) -> Result<bool> {
    let field = params.field()?;
    let n = params.require_n()?;
    if n == 0 {
        bail!("--N must be at least 1");
    }
    let q = field.q();
    let qn = field.pow_q(n as u32)?;
    let table = SmoothRoughTable::build(&field, n)?;
    let rows = counting_rows(&table, n)?;
    let mut suites = vec![
        suite_from_rows("hildebrand", &rows, "hildebrand"),
        suite_from_rows("chebyshev", &rows, "chebyshev"),
        suite_from_rows("rough-window", &rows, "rough"),
        suite_from_rows("rankin", &rows, "rankin"),
    ];

    let mut recurrence = Suite { name: "recurrence", cases: 0, failures: 0 };
    for d in 0..=n {
        let rec = psi_recurrence_table(q, n, d)?;
        for (m, value) in rec.iter().enumerate() {
            recurrence.cases += 1;
            recurrence.failures += u64::from(*value != table.psi(m, d));
        }
    }
    suites.push(recurrence);

    let mut primes = Suite { name: "prime-count", cases: 0, failures: 0 };
    for m in 1..=n {
        let pi = pi_q(q, m as u32)?;
        let sieved = table.factors().primes_of_degree(m).len() as u128;
        let qm = field.pow_q(m as u32)? as i128;
        let gap = qm - m as i128 * pi as i128;
        primes.cases += 1;
        primes.failures += u64::from(pi != sieved || gap < 0 || gap * gap > 4 * qm);
    }
    suites.push(primes);

    let intervals = all_intervals(&field, n)?;
    let divisor_count = (qn - 1) / (q as u128 - 1);
    field.check_budget(n as u128 * qn * divisor_count)?;
    let divisors: Vec<Poly> = (0..n)
        .flat_map(|d| (0..field.pow_q(d as u32).unwrap() as u64).map(move |i| (d, i)))
        .map(|(d, i)| Poly::from_monic_index(&field, d, i))
        .collect();
    let mut divisor_suite = Suite { name: "interval-divisors", cases: 0, failures: 0 };
    for interval in &intervals {
        for g in &divisors {
            divisor_suite.cases += 1;
            let closed = divisor_count_in_interval(interval, g)?;
            divisor_suite.failures += u64::from(closed != divisor_count_by_enumeration(interval, g)?);
        }
    }
    suites.push(divisor_suite);

    field.check_budget(qn * qn * 2)?;
    let full = build_interval_set(&Interval::full(&field, n)?)?;
    let energy = mult_energy(&full)?;
    let formula_ok = energy.off_diagonal == offdiag_mn_formula(q, n)? && energy.off_diagonal == gcd_parametrized_offdiag(&full)?;
    suites.push(Suite { name: "energy-formula", cases: 1, failures: u64::from(!formula_ok) });

    let mut short = Suite { name: "short-interval-energy", cases: 0, failures: 0 };
    for interval in &intervals {
        short.cases += 1;
        short.failures += u64::from(check_short_interval_energy(interval)?.verdict.is_failure());
    }
    suites.push(short);

    let passed = suites.iter().all(|s| s.failures == 0);
    for s in &suites {
        println!("{:<22} {:>8} cases {:>4} failures", s.name, s.cases, s.failures);
    }
    let report = VerifyReport { schema_version: 1, q, n, suites, passed };
    write_json(&params.out_dir(), "verify.json", &report)?;
    write_rows(params, "verify-checks", &rows)?;
    println!("verify q={q} N={n}: {}", if passed { "all checks hold" } else { "FAILED" });
    Ok(passed)
}

fn parse_rule(text: &str) -> Result<MultiplicativeRule> {
    match text.split_once(':') {
        None if text == "one" => Ok(MultiplicativeRule::one()),
        Some(("pow-omega", y)) => {
            let y: f64 = y.parse().with_context(|| format!("bad exponent in rule {text:?}"))?;
            Ok(MultiplicativeRule::pow_omega(y)?)
        }
        _ => bail!("unknown rule {text:?}; expected \"one\" or \"pow-omega:<y>\""),
    }
}

pub fn count(params: &Params) -> Result<bool> {
    let field = params.field()?;
    let n = params.require_n()?;
    if n == 0 {
        bail!("--N must be at least 1");
    }
    let table = SmoothRoughTable::build(&field, n)?;
    let rows = counting_rows(&table, n)?;
    write_rows(params, "count", &rows)?;
    let failures = rows.iter().filter(|r| r.verdict.is_failure()).count();

    if let Some(beta) = params.beta {
        let rule = parse_rule(params.rule.as_deref().unwrap_or("one"))?;
        let shiu = shiu_sweep(&rule, table.factors(), n, beta)?;
        let dir = params.out_dir();
        match params.format() {
            Format::Csv => {
                let mut w = create(&dir, "shiu.csv")?;
                write_shiu_csv(&mut w, &shiu)?;
                w.flush()?;
            }
            Format::Json => write_json(&dir, "shiu.json", &shiu)?,
        }
        let worst = shiu.iter().map(|r| r.ratio).fold(0.0, f64::max);
        println!("shiu {}: {} radii, largest ratio {worst:.4}", rule.name(), shiu.len());
    }
    println!("count q={} N={n}: {} rows, {failures} failures", field.q(), rows.len());
    Ok(failures == 0)
}

fn energy_csv<W: Write>(out: W, e: &EnergyJson) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "tag", "q", "N", "params", "setSize", "total", "diagonal", "offDiagonal", "m4", "sizeConditionSatisfied", "warnings",
    ])?;
    w.write_record([
        e.tag.tag().to_string(),
        e.q.to_string(),
        e.n.to_string(),
        serde_json::to_string(&e.params)?,
        e.set_size.to_string(),
        e.total.to_string(),
        e.diagonal.to_string(),
        e.off_diagonal.to_string(),
        e.m4.to_string(),
        e.size_condition_satisfied.to_string(),
        e.warnings.join("; "),
    ])?;
    w.flush()?;
    Ok(())
}

fn checked_energy(set: &PolySet) -> Result<EnergyReport> {
    set.field().check_budget((set.len() as u128).pow(2))?;
    Ok(mult_energy(set)?)
}

pub fn energy(params: &Params) -> Result<bool> {
    let (set, _) = build_set(params)?;
    let report = checked_energy(&set)?;
    let payload = EnergyJson::new(&set, &report);
    let dir = params.out_dir();
    match params.format() {
        Format::Csv => {
            let mut w = create(&dir, "energy.csv")?;
            energy_csv(&mut w, &payload)?;
            w.flush()?;
        }
        Format::Json => write_json(&dir, "energy.json", &payload)?,
    }
    println!(
        "energy {} |S|={} total={} offDiagonal={} m4={:.6}",
        set.family().tag(),
        set.len(),
        report.total,
        report.off_diagonal,
        payload.m4
    );
    Ok(true)
}

fn run_simulation(
    params: &Params,
    set: &PolySet,
    table: &FactorTable,
    report: &EnergyReport,
) -> Result<(CltReport, Vec<Complex64>)> {
    let seed = params.seed.context("--seed is required for randomized commands")?;
    let trials = params.trials.unwrap_or(DEFAULT_TRIALS);
    let mc = monte_carlo(set, table, report, trials, seed)?;
    Ok((mc.report, mc.samples))
}

pub fn simulate(params: &Params) -> Result<bool> {
    if params.seed.is_none() {
        bail!("--seed is required for randomized commands");
    }
    let (set, table) = build_set(params)?;
    let energy = checked_energy(&set)?;
    let (clt, samples) = run_simulation(params, &set, &table, &energy)?;
    let dir = params.out_dir();
    write_json(&dir, "energy.json", &EnergyJson::new(&set, &energy))?;
    write_json(&dir, "clt.json", &clt)?;
    if params.format() == Format::Csv {
        let mut w = create(&dir, "trials.csv")?;
        write_trials_csv(&mut w, &samples)?;
        w.flush()?;
    }
    let pass = clt.moments_pass();
    println!(
        "simulate {} |S|={} trials={} m2={:.4}±{:.4} m4={:.4}±{:.4} (exact {}) KS re/im {:.4}/{:.4} < {:.4}: {}",
        set.family().tag(),
        clt.set_size,
        clt.trials,
        clt.m2_hat,
        clt.m2_se,
        clt.m4_hat,
        clt.m4_se,
        clt.m4_exact,
        clt.ks_re,
        clt.ks_im,
        clt.ks_critical,
        if pass { "moment gates pass" } else { "moment gates FAIL" }
    );
    Ok(pass)
}

/// One ladder point of a sweep.
#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct SweepRow {
    family: String,
    q: u32,
    #[serde(rename = "N")]
    n: usize,
    h: Option<i64>,
    k: Option<u32>,
    z: Option<usize>,
    shift: Option<String>,
    set_size: usize,
    off_diagonal: String,
    off_diag_ratio: f64,
    m4_exact: String,
    m4: f64,
    size_floor: f64,
    size_margin: f64,
    size_condition_satisfied: bool,
    m2_hat: Option<f64>,
    m4_hat: Option<f64>,
    moments_pass: Option<bool>,
    warnings: String,
}

pub fn sweep(base: &Params, ladder: &[Params]) -> Result<bool> {
    if ladder.is_empty() {
        bail!("sweep needs a non-empty \"ladder\" array in the --config file");
    }
    let mut rows = Vec::with_capacity(ladder.len());
    let mut pass = true;
    for point in ladder {
        let params = base.overlay(point);
        let (set, table) = build_set(&params)?;
        let energy = checked_energy(&set)?;
        let size = set.size_condition();
        let m4 = energy.normalized_fourth_moment();
        let (m2_hat, m4_hat, moments_pass) = if params.seed.is_some() && params.trials.is_some() {
            let (clt, _) = run_simulation(&params, &set, &table, &energy)?;
            pass &= clt.moments_pass();
            (Some(clt.m2_hat), Some(clt.m4_hat), Some(clt.moments_pass()))
        } else {
            (None, None, None)
        };
        let is = |f: Family| set.family() == f;
        rows.push(SweepRow {
            family: set.family().tag().to_string(),
            q: set.field().q(),
            n: set.degree(),
            h: params.h.filter(|_| is(Family::Interval)),
            k: params.k.filter(|_| matches!(set.family(), Family::KPrimeP | Family::KPrimeS | Family::KPrimeD)),
            z: params.z.filter(|_| is(Family::Rough)),
            shift: is(Family::ShiftedPrime)
                .then(|| params.shift.clone().unwrap_or_else(|| Poly::one(set.field()).serialize())),
            set_size: set.len(),
            off_diagonal: energy.off_diagonal.to_string(),
            off_diag_ratio: energy.off_diagonal_ratio(),
            m4_exact: m4.to_string(),
            m4: *m4.numer() as f64 / *m4.denom() as f64,
            size_floor: size.floor,
            size_margin: size.margin,
            size_condition_satisfied: size.satisfied,
            m2_hat,
            m4_hat,
            moments_pass,
            warnings: set.warnings().join("; "),
        });
    }
    rows.sort_by(|a, b| {
        (a.q, a.n, &a.family, a.h, a.k, a.z, &a.shift).cmp(&(b.q, b.n, &b.family, b.h, b.k, b.z, &b.shift))
    });
    let dir = base.out_dir();
    match base.format() {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(create(&dir, "sweep.csv")?);
            for row in &rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        Format::Json => write_json(&dir, "sweep.json", &rows)?,
    }
    for r in &rows {
        println!(
            "{:<14} q={:<3} N={:<3} |S|={:<8} offDiag/|S|^2={:.5} m4={:.5} size margin={:.3}",
            r.family, r.q, r.n, r.set_size, r.off_diag_ratio, r.m4, r.size_margin
        );
    }
    Ok(pass)
}
