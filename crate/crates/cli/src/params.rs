//! Run parameters from flags and an optional JSON config file.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use steinhaus_core::fieldpoly::DEFAULT_BUDGET;
use steinhaus_core::{FieldSpec, Poly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// Every run parameter. Config files use the same keys as the long flags.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    /// Field order, a prime power up to 65536.
    #[arg(long)]
    pub q: Option<u64>,
    /// Degree of the polynomials.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
    /// Interval radius.
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<i64>,
    /// Number of prime factors for the kprime families.
    #[arg(long)]
    pub k: Option<u32>,
    /// Roughness threshold: all prime factors have degree above z.
    #[arg(long)]
    pub z: Option<usize>,
    /// Shift Z for the shifted-prime family, e.g. "q=3;[1]".
    #[arg(long)]
    pub shift: Option<String>,
    /// Set family: interval, kprime-P, kprime-S, kprime-D, shifted-prime, rough.
    #[arg(long)]
    pub family: Option<String>,
    /// Interval center, e.g. "q=2;[0,0,0,1]"; defaults to t^N.
    #[arg(long)]
    pub center: Option<String>,
    /// Monte Carlo trials.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Base seed; trial i uses stream seed + i.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest number of polynomials any single step may materialize.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Shiu exponent β in (0, 1/2); enables the Shiu table in `count`.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Multiplicative rule for the Shiu table: "one" or "pow-omega:<y>".
    #[arg(long)]
    pub rule: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Accept parameters outside the proven ranges, with a warning.
    #[arg(long)]
    #[serde(default)]
    pub allow_out_of_range: bool,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($field:ident),*) => {
        Params {
            $($field: $top.$field.clone().or($base.$field.clone()),)*
            allow_out_of_range: $top.allow_out_of_range || $base.allow_out_of_range,
        }
    };
}

impl Params {
    /// Values set in `top` win over values in `self`.
    pub fn overlay(&self, top: &Params) -> Params {
        overlay!(self, top, q, n, h, k, z, shift, family, center, trials, seed, budget, beta, rule, out, format, threads)
    }

    pub fn require_q(&self) -> Result<u64> {
        self.q.context("--q is required")
    }

    pub fn require_n(&self) -> Result<usize> {
        self.n.context("--N is required")
    }

    pub fn field(&self) -> Result<FieldSpec> {
        let field = FieldSpec::with_order(self.require_q()?)?;
        Ok(field.with_budget(self.budget.unwrap_or(DEFAULT_BUDGET)))
    }

    pub fn poly(&self, field: &FieldSpec, text: &str) -> Result<Poly> {
        Poly::parse_in(field, text).with_context(|| format!("bad polynomial {text:?}"))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}

/// A config file: flat keys plus an optional ladder of parameter points.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub base: Params,
    pub ladder: Vec<Params>,
}

impl ConfigFile {
    pub fn load(path: &PathBuf) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut value: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let Some(object) = value.as_object_mut() else {
            bail!("config {} must be a JSON object", path.display());
        };
        let ladder = match object.remove("ladder") {
            None => Vec::new(),
            Some(v) => serde_json::from_value(v).context("parsing ladder")?,
        };
        let base = serde_json::from_value(value).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(Self { base, ladder })
    }
}
