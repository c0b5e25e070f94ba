//! The partition of a set by `≺`-largest prime factor, and the statistics
//! of the central limit criterion built on it.

use serde::Serialize;

use crate::energy::{mult_energy, PolySet, SizeCondition};
use crate::error::{Error, Result};
use crate::fieldpoly::{FactorTable, Poly};
use crate::intervals::Interval;

/// `S_P = {F ∈ S : P⁺_≺(F) = P}` for every prime `P` that occurs.
#[derive(Debug, Clone)]
pub struct MartingaleBlocks {
    set_size: usize,
    /// Sorted by `≺` on the prime.
    blocks: Vec<(Poly, Vec<Poly>)>,
}

impl MartingaleBlocks {
    pub fn blocks(&self) -> &[(Poly, Vec<Poly>)] {
        &self.blocks
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    pub fn block(&self, p: &Poly) -> Option<&[Poly]> {
        self.blocks
            .binary_search_by(|(q, _)| q.cmp(p))
            .ok()
            .map(|i| self.blocks[i].1.as_slice())
    }

    /// `Σ_P |S_P| / |S|`; equal to 1 for a partition.
    pub fn coverage(&self) -> f64 {
        let total: usize = self.blocks.iter().map(|(_, b)| b.len()).sum();
        total as f64 / self.set_size as f64
    }

    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(|(_, b)| b.len()).max().unwrap_or(0)
    }
}

fn require(table: &FactorTable, set: &PolySet) -> Result<()> {
    if table.max_degree() < set.degree() || table.field() != set.field() {
        Err(Error::TableTooShallow {
            have: table.max_degree(),
            need: set.degree(),
        })
    } else {
        Ok(())
    }
}

/// Groups the members (degree `>= 1`) by their `≺`-largest prime factor.
pub fn martingale_blocks(set: &PolySet, table: &FactorTable) -> Result<MartingaleBlocks> {
    require(table, set)?;
    if set.degree() == 0 {
        return Err(Error::InvalidParameter("blocks need members of degree at least 1".into()));
    }
    let n = set.degree();
    let mut tagged: Vec<(u32, &Poly)> = set
        .members()
        .iter()
        .map(|m| (table.largest_prime(n, m.monic_index().expect("covered by table")), m))
        .collect();
    tagged.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mut blocks: Vec<(Poly, Vec<Poly>)> = Vec::new();
    let mut last = None;
    for (id, m) in tagged {
        if last != Some(id) {
            blocks.push((table.prime(id).clone(), Vec::new()));
            last = Some(id);
        }
        blocks.last_mut().expect("pushed").1.push(m.clone());
    }
    Ok(MartingaleBlocks {
        set_size: set.len(),
        blocks,
    })
}

/// Largest block inside an interval against `q^{h+1} exp(-sqrt((h+1) ln q) / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FiltrationStat {
    pub max_block_in_interval: usize,
    pub reference_scale: f64,
    pub ratio: f64,
}

pub fn filtration_stat(set: &PolySet, interval: &Interval, table: &FactorTable) -> Result<FiltrationStat> {
    if interval.field() != set.field() || interval.degree() != set.degree() {
        return Err(Error::InvalidParameter("set and interval must share field and degree".into()));
    }
    let blocks = martingale_blocks(set, table)?;
    let max = blocks
        .blocks()
        .iter()
        .map(|(_, b)| b.iter().filter(|m| interval.contains(m)).count())
        .max()
        .unwrap_or(0);
    let q = set.field().q() as f64;
    let h1 = (interval.radius() + 1) as f64;
    let reference_scale = q.powf(h1) * (-0.5 * (h1 * q.ln()).sqrt()).exp();
    Ok(FiltrationStat {
        max_block_in_interval: max,
        reference_scale,
        ratio: max as f64 / reference_scale,
    })
}

/// The three quantities of the central limit criterion for `S ⊆ A`, plus the size floor.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConditionsReport {
    pub parent_size: usize,
    pub subset_size: usize,
    /// `|A \ S| / |A|`.
    pub complement_ratio: f64,
    /// Off-diagonal energy of `S` over `|A|^2`.
    pub off_diagonal_ratio: f64,
    pub off_diagonal: u128,
    /// `max_P |S_P| / |A|`.
    pub max_block_ratio: f64,
    pub size_condition: SizeCondition,
}

pub fn theorem_conditions_report(parent: &PolySet, subset: &PolySet, table: &FactorTable) -> Result<ConditionsReport> {
    if !subset.is_subset_of(parent) {
        return Err(Error::NotSubset);
    }
    if parent.is_empty() {
        return Err(Error::EmptySet);
    }
    let a = parent.len() as f64;
    let energy = mult_energy(subset)?;
    let blocks = martingale_blocks(subset, table)?;
    Ok(ConditionsReport {
        parent_size: parent.len(),
        subset_size: subset.len(),
        complement_ratio: (parent.len() - subset.len()) as f64 / a,
        off_diagonal_ratio: energy.off_diagonal as f64 / (a * a),
        off_diagonal: energy.off_diagonal,
        max_block_ratio: blocks.max_block() as f64 / a,
        size_condition: parent.size_condition(),
    })
}
