use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{run_shot, ProtocolError, RunConfig, RunContext, ShotOutcome, Transcript};

/// Pearson statistic of `counts` against the uniform distribution and its
/// upper-tail p-value. `None` for fewer than two categories.
pub fn chi_square_uniform(counts: &[u64]) -> Option<(f64, f64)> {
    if counts.len() < 2 {
        return None;
    }
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).ok()?;
    Some((stat, dist.sf(stat)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniformityTest {
    pub categories: usize,
    pub statistic: f64,
    pub p_value: f64,
}

impl UniformityTest {
    pub fn from_counts(counts: &[u64]) -> Option<Self> {
        chi_square_uniform(counts).map(|(statistic, p_value)| Self { categories: counts.len(), statistic, p_value })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShotStatistics {
    pub shots: usize,
    pub expected_key: u64,
    pub recovered_expected: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_message_fidelity: Option<f64>,
    /// Index marginal against uniform over `Ω` (superposed runs only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index_uniformity: Option<UniformityTest>,
}

/// Aggregate of a multi-shot run. Holds the first shot's transcript.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub transcript: Transcript,
    /// Raw first-measurement bitstrings and their counts.
    pub histogram: BTreeMap<String, u64>,
    pub recovered_keys: BTreeMap<u64, u64>,
    pub statistics: ShotStatistics,
}

impl RunReport {
    pub fn from_outcomes(ctx: &RunContext, mut outcomes: Vec<ShotOutcome>) -> Self {
        let expected_key = ctx.chain().sender_key();
        let mut histogram = BTreeMap::new();
        let mut recovered_keys = BTreeMap::new();
        let mut index_counts = vec![0u64; ctx.config().span];
        for o in &outcomes {
            *histogram.entry(o.raw.clone()).or_insert(0) += 1;
            *recovered_keys.entry(o.recovered_key).or_insert(0) += 1;
            if let Some(i) = o.index {
                if let Some(c) = index_counts.get_mut(i as usize) {
                    *c += 1;
                }
            }
        }
        let min_message_fidelity = outcomes.iter().filter_map(|o| o.message_fidelity).reduce(f64::min);
        let index_uniformity =
            outcomes.first().and_then(|o| o.index).and_then(|_| UniformityTest::from_counts(&index_counts));
        let statistics = ShotStatistics {
            shots: outcomes.len(),
            expected_key,
            recovered_expected: recovered_keys.get(&expected_key).copied().unwrap_or(0) as usize,
            min_message_fidelity,
            index_uniformity,
        };
        let transcript = if outcomes.is_empty() { Transcript::new() } else { outcomes.swap_remove(0).transcript };
        Self { config: ctx.config().clone(), transcript, histogram, recovered_keys, statistics }
    }

    /// Every shot recovered the sender's key.
    pub fn all_recovered(&self) -> bool {
        self.statistics.recovered_expected == self.statistics.shots
    }

    /// `outcome,count` rows in bitstring order.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("outcome,count\n");
        for (outcome, count) in &self.histogram {
            out.push_str(&format!("{outcome},{count}\n"));
        }
        out
    }
}

/// Runs all configured shots (in parallel) and aggregates them in shot order.
pub fn run(ctx: &RunContext) -> Result<RunReport, ProtocolError> {
    let outcomes = (0..ctx.config().shots as u64)
        .into_par_iter()
        .map(|shot| run_shot(ctx, shot, None))
        .collect::<Result<Vec<_>, _>>()?;
    for o in outcomes.iter().take(1) {
        o.transcript.validate()?;
    }
    Ok(RunReport::from_outcomes(ctx, outcomes))
}
