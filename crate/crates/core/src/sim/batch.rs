use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::{run, RunConfig, SimError};
use crate::algos::{
    pair_g, phase_budget_through, symmrv_bound, symmrv_program, universal_program, Action, AgentProgram,
    MoveAlways, Observation, PhaseParams, Standalone, SymmRv, Universal, WaitForever,
};
use crate::graph::{shrink, view_classes, Node, PortGraph, Stic};
use crate::uxs::{UxsProvider, UxsSpec};

/// Round budget of a probe on an instance that is expected not to meet.
pub const INFEASIBLE_PROBE_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoChoice {
    Universal,
    /// SymmRV with the true size, Shrink value and delay.
    SymmRvKnown,
    MoveAlways,
    Wait,
}

#[derive(Debug, Clone)]
pub struct BatchConfig {
    pub algo: AlgoChoice,
    /// Fixed round budget. Without one, a feasible instance gets the
    /// algorithm's guaranteed bound and an infeasible one the probe budget.
    pub budget: Option<u64>,
    pub jobs: usize,
    /// Universal sequences by size; graph-specific sequences fill the gaps.
    pub verified: Vec<UxsSpec>,
}

impl BatchConfig {
    pub fn new(algo: AlgoChoice, verified: Vec<UxsSpec>) -> Self {
        BatchConfig {
            algo,
            budget: None,
            jobs: 1,
            verified,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instance {
    pub id: u64,
    pub graph_id: usize,
    pub u: Node,
    pub v: Node,
    pub delta: u64,
}

/// Every ordered pair of distinct nodes of every graph with every delay,
/// numbered in that order.
pub fn instances_for(graphs: &[PortGraph], deltas: RangeInclusive<u64>) -> Vec<Instance> {
    let mut out = Vec::new();
    for (graph_id, g) in graphs.iter().enumerate() {
        for u in g.nodes() {
            for v in g.nodes().filter(|&v| v != u) {
                for delta in deltas.clone() {
                    out.push(Instance {
                        id: out.len() as u64,
                        graph_id,
                        u,
                        v,
                        delta,
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BatchResult {
    pub instance_id: u64,
    pub graph_id: usize,
    pub u: Node,
    pub v: Node,
    pub delta: u64,
    pub feasible: bool,
    pub met: bool,
    pub meet_round_later: Option<u64>,
    pub phase: Option<u64>,
    pub rounds_executed: u64,
    #[serde(skip)]
    pub symmetric: bool,
    #[serde(skip)]
    pub shrink: usize,
    #[serde(skip)]
    pub budget: u64,
    /// Whether phase starts were `delta` apart and at home throughout.
    #[serde(skip)]
    pub phases_aligned: bool,
}

pub trait ResultSink {
    fn write(&mut self, r: &BatchResult) -> io::Result<()>;
}

impl ResultSink for Vec<BatchResult> {
    fn write(&mut self, r: &BatchResult) -> io::Result<()> {
        self.push(r.clone());
        Ok(())
    }
}

/// One JSON object per line.
pub struct JsonlSink<W>(pub W);

impl<W: Write> ResultSink for JsonlSink<W> {
    fn write(&mut self, r: &BatchResult) -> io::Result<()> {
        serde_json::to_writer(&mut self.0, r)?;
        self.0.write_all(b"\n")
    }
}

/// CSV with a header row.
pub struct CsvSink<W: Write>(csv::Writer<W>);

impl<W: Write> CsvSink<W> {
    pub fn new(w: W) -> Self {
        CsvSink(csv::Writer::from_writer(w))
    }
}

impl<W: Write> ResultSink for CsvSink<W> {
    fn write(&mut self, r: &BatchResult) -> io::Result<()> {
        self.0.serialize(r).map_err(io::Error::other)?;
        self.0.flush()
    }
}

/// Writes results as CSV in one go.
pub fn write_csv<W: Write>(results: &[BatchResult], w: W) -> io::Result<()> {
    let mut sink = CsvSink::new(w);
    results.iter().try_for_each(|r| sink.write(r))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BatchSummary {
    pub instances: u64,
    pub met: u64,
    /// Instances where meeting and feasibility disagree.
    pub mismatches: Vec<u64>,
    /// Instances whose phases were not aligned.
    pub misaligned: Vec<u64>,
    pub sink_errors: u64,
    pub first_sink_error: Option<String>,
}

enum AnyProgram {
    Universal(Universal),
    Symm(Standalone<SymmRv>),
    Move(MoveAlways),
    Wait(WaitForever),
}

impl AgentProgram for AnyProgram {
    fn step(&mut self, obs: &Observation) -> Action {
        match self {
            AnyProgram::Universal(p) => p.step(obs),
            AnyProgram::Symm(p) => p.step(obs),
            AnyProgram::Move(p) => p.step(obs),
            AnyProgram::Wait(p) => p.step(obs),
        }
    }

    fn idle_rounds(&self) -> u64 {
        match self {
            AnyProgram::Universal(p) => p.idle_rounds(),
            AnyProgram::Symm(p) => p.idle_rounds(),
            AnyProgram::Move(p) => p.idle_rounds(),
            AnyProgram::Wait(p) => p.idle_rounds(),
        }
    }

    fn skip_idle(&mut self, rounds: u64) {
        match self {
            AnyProgram::Universal(p) => p.skip_idle(rounds),
            AnyProgram::Symm(p) => p.skip_idle(rounds),
            AnyProgram::Move(p) => p.skip_idle(rounds),
            AnyProgram::Wait(p) => p.skip_idle(rounds),
        }
    }

    fn phase(&self) -> Option<u64> {
        match self {
            AnyProgram::Universal(p) => p.phase(),
            _ => None,
        }
    }
}

struct GraphContext {
    provider: Arc<UxsProvider>,
    class_of: Vec<usize>,
}

fn run_instance(
    g: &PortGraph,
    ctx: &GraphContext,
    inst: &Instance,
    cfg: &BatchConfig,
) -> Result<BatchResult, SimError> {
    let symmetric = ctx.class_of[inst.u] == ctx.class_of[inst.v];
    let sh = shrink(g, inst.u, inst.v);
    let feasible = !symmetric || inst.delta >= sh as u64;
    let n = g.node_count() as u64;
    let d = sh.max(1) as u64;
    let known = PhaseParams {
        n,
        d,
        delta: inst.delta,
    };
    let seq = ctx.provider.sequence(g.node_count());
    let budget = match (cfg.budget, cfg.algo) {
        (Some(b), _) => b,
        (None, _) if !feasible => INFEASIBLE_PROBE_BUDGET,
        (None, AlgoChoice::Universal) => {
            // nonsymmetric starts are handled in the phase with d = 1
            let d = if symmetric { d } else { 1 };
            phase_budget_through(pair_g(n, d, inst.delta + 1)?, &ctx.provider)?
        }
        (None, AlgoChoice::SymmRvKnown) => symmrv_bound(n, d, inst.delta, seq.len() as u64),
        (None, _) => INFEASIBLE_PROBE_BUDGET,
    };
    let make = || match cfg.algo {
        AlgoChoice::Universal => AnyProgram::Universal(universal_program(ctx.provider.clone())),
        AlgoChoice::SymmRvKnown => match symmrv_program(known, seq.clone()) {
            Ok(p) => AnyProgram::Symm(p),
            Err(_) => AnyProgram::Wait(WaitForever),
        },
        AlgoChoice::MoveAlways => AnyProgram::Move(MoveAlways),
        AlgoChoice::Wait => AnyProgram::Wait(WaitForever),
    };
    let report = run(g, &Stic::new(inst.u, inst.v, inst.delta), make, &RunConfig::new(budget.max(1)))?;
    let o = report.outcome;
    Ok(BatchResult {
        instance_id: inst.id,
        graph_id: inst.graph_id,
        u: inst.u,
        v: inst.v,
        delta: inst.delta,
        feasible,
        met: o.met,
        meet_round_later: o.meet_round_later,
        phase: o.phase,
        rounds_executed: o.rounds_executed,
        symmetric,
        shrink: sh,
        budget,
        phases_aligned: report.phases_aligned(),
    })
}

const BLOCK: usize = 512;

/// Runs every instance and hands the results to `sink` in instance order,
/// whatever the degree of parallelism. A failing sink write is counted and
/// the batch goes on.
pub fn batch(
    graphs: &[PortGraph],
    instances: &[Instance],
    cfg: &BatchConfig,
    sink: &mut dyn ResultSink,
) -> Result<BatchSummary, SimError> {
    let mut contexts: Vec<Option<GraphContext>> = (0..graphs.len()).map(|_| None).collect();
    for inst in instances {
        if contexts[inst.graph_id].is_none() {
            let g = &graphs[inst.graph_id];
            let provider = Arc::new(UxsProvider::new(
                cfg.verified.clone(),
                crate::uxs::instance_seq(g),
            ));
            provider.check_against(g)?;
            contexts[inst.graph_id] = Some(GraphContext {
                provider,
                class_of: view_classes(g).class_of,
            });
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| SimError::ThreadPool(e.to_string()))?;
    let mut order: Vec<&Instance> = instances.iter().collect();
    order.sort_by_key(|i| i.id);
    let mut summary = BatchSummary::default();
    for block in order.chunks(BLOCK) {
        let results: Vec<Result<BatchResult, SimError>> = pool.install(|| {
            block
                .par_iter()
                .map(|inst| {
                    let ctx = contexts[inst.graph_id].as_ref().expect("context built above");
                    run_instance(&graphs[inst.graph_id], ctx, inst, cfg)
                })
                .collect()
        });
        for r in results {
            let r = r?;
            summary.instances += 1;
            summary.met += r.met as u64;
            if r.met != r.feasible {
                summary.mismatches.push(r.instance_id);
            }
            if !r.phases_aligned {
                summary.misaligned.push(r.instance_id);
            }
            if let Err(e) = sink.write(&r) {
                summary.sink_errors += 1;
                summary.first_sink_error.get_or_insert_with(|| e.to_string());
            }
        }
    }
    Ok(summary)
}
