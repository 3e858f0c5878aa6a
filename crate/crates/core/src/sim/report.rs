use std::collections::BTreeMap;

use serde::Serialize;

use super::{BatchResult, SimError};
use crate::algos::{pair_g, phase_budget_through, phase_duration, PhaseParams};
use crate::graph::PortGraph;
use crate::uxs::UxsProvider;

/// Measured meeting times for one `(n, delta)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    pub n: usize,
    pub delta: u64,
    pub instances: u64,
    pub feasible: u64,
    pub met: u64,
    pub max_meet_round_later: Option<u64>,
    pub mean_meet_round_later: Option<f64>,
    pub max_phase: Option<u64>,
    /// Rounds of phases `1..=g(n, 1, delta + 1)`.
    pub budget_through_phase: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseBudget {
    pub phase: u64,
    pub params: PhaseParams,
    pub duration: u64,
    pub cumulative: u64,
}

/// Meeting rounds of a batch against `(n, delta)` together with the phase
/// schedule that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub rows: Vec<ComplexityRow>,
    pub phases: Vec<PhaseBudget>,
    /// Cumulative phase budgets never decrease.
    pub cumulative_monotone: bool,
    /// `budget_through_phase` grows strictly in `delta` for each `n` and in
    /// `n` for each `delta`.
    pub row_budgets_increasing: bool,
}

impl ComplexityReport {
    pub fn build(
        graphs: &[PortGraph],
        results: &[BatchResult],
        provider: &UxsProvider,
    ) -> Result<Self, SimError> {
        let mut cells: BTreeMap<(usize, u64), Vec<&BatchResult>> = BTreeMap::new();
        for r in results {
            cells
                .entry((graphs[r.graph_id].node_count(), r.delta))
                .or_default()
                .push(r);
        }
        let mut rows = Vec::new();
        for ((n, delta), rs) in &cells {
            let meets: Vec<u64> = rs.iter().filter_map(|r| r.meet_round_later).collect();
            let p = pair_g(*n as u64, 1, delta + 1)?;
            rows.push(ComplexityRow {
                n: *n,
                delta: *delta,
                instances: rs.len() as u64,
                feasible: rs.iter().filter(|r| r.feasible).count() as u64,
                met: meets.len() as u64,
                max_meet_round_later: meets.iter().copied().max(),
                mean_meet_round_later: (!meets.is_empty())
                    .then(|| meets.iter().sum::<u64>() as f64 / meets.len() as f64),
                max_phase: rs.iter().filter_map(|r| r.phase).max(),
                budget_through_phase: phase_budget_through(p, provider)?,
            });
        }
        let last = rows
            .iter()
            .map(|r| pair_g(r.n as u64, 1, r.delta + 1))
            .chain(results.iter().filter_map(|r| r.phase).map(Ok))
            .try_fold(0u64, |m, p| p.map(|p| m.max(p)))?;
        let mut phases = Vec::new();
        let mut cumulative = 0u64;
        for phase in 1..=last {
            let params = PhaseParams::from_phase(phase)?;
            let duration = phase_duration(params, provider.sequence(params.n as usize).len() as u64);
            cumulative = cumulative.saturating_add(duration);
            phases.push(PhaseBudget {
                phase,
                params,
                duration,
                cumulative,
            });
        }
        let cumulative_monotone = phases.windows(2).all(|w| w[0].cumulative <= w[1].cumulative);
        let budget = |n: usize, d: u64| {
            rows.iter()
                .find(|r| r.n == n && r.delta == d)
                .map(|r| r.budget_through_phase)
        };
        let row_budgets_increasing = rows.iter().all(|r| {
            let next_delta = budget(r.n, r.delta + 1).is_none_or(|b| b > r.budget_through_phase);
            let next_n = budget(r.n + 1, r.delta).is_none_or(|b| b > r.budget_through_phase);
            next_delta && next_n
        });
        Ok(ComplexityReport {
            rows,
            phases,
            cumulative_monotone,
            row_budgets_increasing,
        })
    }
}
