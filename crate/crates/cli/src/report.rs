//! Per-run metrics report, serialized as JSON (see `run_report.schema.json`)
//! and flattened into bench CSV rows.

use std::collections::BTreeMap;
use std::time::Duration;

use buchi_core::{GameGraph, SolveResult};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub delta: usize,
    pub iterations: usize,
    pub edge_examinations: u64,
    pub per_phase: BTreeMap<String, u64>,
    pub w2_size: usize,
    /// Informational only; excluded from determinism checks.
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub improved: Option<ImprovedReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dovetail: Option<DovetailReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImprovedReport {
    pub threshold_branch_count: usize,
    pub probe_success_count: usize,
    pub fallback_count: usize,
    pub min_states_removed_per_fallback: Option<usize>,
    pub realized_depths: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DovetailReport {
    pub classical_wins: usize,
    pub alternative_wins: usize,
}

impl RunReport {
    pub fn new(g: &GameGraph, r: &SolveResult, wall: Duration) -> Self {
        RunReport {
            algorithm: r.algorithm.name().to_string(),
            n: g.n(),
            m: g.m(),
            delta: g.max_outdegree(),
            iterations: r.iterations,
            edge_examinations: r.metrics.edge_examinations,
            per_phase: r
                .metrics
                .per_phase()
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            w2_size: r.w2.len(),
            wall_time_ms: wall.as_secs_f64() * 1e3,
            improved: r.improved.as_ref().map(|s| ImprovedReport {
                threshold_branch_count: s.threshold_branch_count,
                probe_success_count: s.probe_success_count,
                fallback_count: s.fallback_count,
                min_states_removed_per_fallback: s.min_states_removed_per_fallback(),
                realized_depths: s.realized_depths.clone(),
            }),
            dovetail: r.dovetail.map(|d| DovetailReport {
                classical_wins: d.classical_wins,
                alternative_wins: d.alternative_wins,
            }),
        }
    }

    /// `edge_examinations / (n·m·log2(δ+1) / log2 max(n,2))`.
    pub fn envelope_ratio(&self) -> f64 {
        let (n, m, d) = (self.n as f64, self.m as f64, self.delta as f64);
        self.edge_examinations as f64 / (n * m * (d + 1.0).log2() / n.max(2.0).log2())
    }

    pub fn is_consistent(&self) -> bool {
        self.per_phase.values().sum::<u64>() == self.edge_examinations && self.w2_size <= self.n
    }
}

pub const CSV_VERSION: u32 = 1;

/// One bench CSV row. Column order is part of format version 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub format_version: u32,
    pub family: String,
    pub size: usize,
    pub seed: u64,
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub delta: usize,
    pub iterations: usize,
    pub edge_examinations: u64,
    /// `phase=work` pairs joined by `;`, phases sorted by name.
    pub per_phase: String,
    pub w2_size: usize,
    pub threshold_branch_count: Option<usize>,
    pub probe_success_count: Option<usize>,
    pub fallback_count: Option<usize>,
    pub min_states_removed_per_fallback: Option<usize>,
    pub envelope_ratio: f64,
    pub wall_time_ms: f64,
}

impl BenchRow {
    pub fn new(family: &str, size: usize, seed: u64, r: &RunReport) -> Self {
        let imp = r.improved.as_ref();
        BenchRow {
            format_version: CSV_VERSION,
            family: family.to_string(),
            size,
            seed,
            algorithm: r.algorithm.clone(),
            n: r.n,
            m: r.m,
            delta: r.delta,
            iterations: r.iterations,
            edge_examinations: r.edge_examinations,
            per_phase: r
                .per_phase
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(";"),
            w2_size: r.w2_size,
            threshold_branch_count: imp.map(|i| i.threshold_branch_count),
            probe_success_count: imp.map(|i| i.probe_success_count),
            fallback_count: imp.map(|i| i.fallback_count),
            min_states_removed_per_fallback: imp.and_then(|i| i.min_states_removed_per_fallback),
            envelope_ratio: r.envelope_ratio(),
            wall_time_ms: r.wall_time_ms,
        }
    }
}
