//! Synchronous two-agent simulation.
//!
//! Global time counts rounds since the earlier agent (agent 0) appeared at
//! `u`; agent 1 appears at `v` at time `delta`. At every time point from
//! `delta` on the positions are compared first, then every present agent
//! observes its node and acts, and all moves are applied together. Two
//! agents exchanging the endpoints of one edge do not meet.

mod batch;
mod report;

use std::io::{self, Write};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::algos::{universal_program, AlgoError, Action, AgentProgram, Observation};
use crate::graph::{GraphError, Node, Port, PortGraph, Stic};
use crate::uxs::{UxsError, UxsProvider};

pub use batch::{
    batch, instances_for, write_csv, AlgoChoice, BatchConfig, BatchResult, BatchSummary, CsvSink, Instance,
    JsonlSink, ResultSink, INFEASIBLE_PROBE_BUDGET,
};
pub use report::{ComplexityReport, ComplexityRow, PhaseBudget};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Uxs(#[from] UxsError),
    #[error(transparent)]
    Algo(#[from] AlgoError),
    #[error("cannot start worker threads: {0}")]
    ThreadPool(String),
    #[error("budget must be at least 1 round")]
    ZeroBudget,
    #[error("agent {agent} chose port {port} at a node of degree {degree} in round {round}")]
    BadMove {
        agent: usize,
        round: u64,
        port: Port,
        degree: usize,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    /// Rounds allowed after the later agent appears.
    pub budget: u64,
    pub record_trace: bool,
    /// Skip stretches in which both agents are certain to wait. Ignored
    /// while recording a trace.
    pub fast_forward: bool,
}

impl RunConfig {
    pub fn new(budget: u64) -> Self {
        RunConfig {
            budget,
            record_trace: false,
            fast_forward: true,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunOutcome {
    pub met: bool,
    pub meet_node: Option<Node>,
    pub meet_round_global: Option<u64>,
    pub meet_round_later: Option<u64>,
    /// Rounds run after the later agent appeared.
    pub rounds_executed: u64,
    /// Phase of the later agent at the meeting (of the earlier one if the
    /// later agent had not acted yet), for phased programs.
    pub phase: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceAction {
    Wait,
    Move(Port),
}

impl From<Action> for TraceAction {
    fn from(a: Action) -> Self {
        match a {
            Action::Wait => TraceAction::Wait,
            Action::Move(p) => TraceAction::Move(p),
        }
    }
}

/// One agent in one round: where it was, what it saw and what it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub global_round: u64,
    pub agent: usize,
    pub node: Node,
    pub action: TraceAction,
    pub arrival_port: Option<Port>,
}

/// First action of a phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhaseMark {
    pub phase: u64,
    pub global_round: u64,
    pub node: Node,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcome: RunOutcome,
    pub trace: Vec<TraceEvent>,
    /// Phase starts per agent.
    pub phases: [Vec<PhaseMark>; 2],
    pub start_nodes: [Node; 2],
    pub delta: u64,
}

impl RunReport {
    /// Whether every phase started by both agents did so `delta` rounds
    /// apart, and every phase started at the agent's initial node.
    pub fn phases_aligned(&self) -> bool {
        let [a, b] = &self.phases;
        let homed = a.iter().all(|m| m.node == self.start_nodes[0])
            && b.iter().all(|m| m.node == self.start_nodes[1]);
        homed
            && a.iter().zip(b).all(|(x, y)| {
                x.phase == y.phase && y.global_round == x.global_round + self.delta
            })
    }
}

struct Agent<P> {
    prog: P,
    start: u64,
    at: Node,
    arrival: Option<Port>,
    phase: Option<u64>,
}

impl<P: AgentProgram> Agent<P> {
    fn present(&self, t: u64) -> bool {
        t >= self.start
    }
}

/// Runs two copies of one program on `g`. Agent 0 starts at `s.u` at time
/// 0, agent 1 at `s.v` at time `s.delta`.
pub fn run<P: AgentProgram>(
    g: &PortGraph,
    s: &Stic,
    mut make: impl FnMut() -> P,
    cfg: &RunConfig,
) -> Result<RunReport, SimError> {
    s.check(g)?;
    if cfg.budget == 0 {
        return Err(SimError::ZeroBudget);
    }
    let fast = cfg.fast_forward && !cfg.record_trace;
    let mut agents = [
        Agent {
            prog: make(),
            start: 0,
            at: s.u,
            arrival: None,
            phase: None,
        },
        Agent {
            prog: make(),
            start: s.delta,
            at: s.v,
            arrival: None,
            phase: None,
        },
    ];
    let end = s.delta.saturating_add(cfg.budget);
    let mut trace = Vec::new();
    let mut phases: [Vec<PhaseMark>; 2] = Default::default();
    let mut t = 0u64;
    loop {
        if t >= s.delta && agents[0].at == agents[1].at {
            let phase = agents[1].phase.or(agents[0].phase);
            return Ok(RunReport {
                outcome: RunOutcome {
                    met: true,
                    meet_node: Some(agents[0].at),
                    meet_round_global: Some(t),
                    meet_round_later: Some(t - s.delta),
                    rounds_executed: t - s.delta,
                    phase,
                },
                trace,
                phases,
                start_nodes: [s.u, s.v],
                delta: s.delta,
            });
        }
        if t >= end {
            break;
        }
        if fast {
            let mut skip = end - t;
            for a in &agents {
                skip = skip.min(if a.present(t) {
                    a.prog.idle_rounds()
                } else {
                    a.start - t
                });
            }
            if skip > 1 {
                for a in agents.iter_mut().filter(|a| a.present(t)) {
                    a.prog.skip_idle(skip);
                    a.arrival = None;
                }
                t += skip;
                continue;
            }
        }
        let mut actions = [None, None];
        for (i, a) in agents.iter_mut().enumerate() {
            if !a.present(t) {
                continue;
            }
            let degree = g.degree(a.at);
            let obs = Observation {
                degree,
                arrival_port: a.arrival,
                local_clock: t - a.start,
            };
            let act = a.prog.step(&obs);
            if let Action::Move(p) = act {
                if p >= degree {
                    return Err(SimError::BadMove {
                        agent: i,
                        round: t,
                        port: p,
                        degree,
                    });
                }
            }
            let phase = a.prog.phase();
            if let Some(p) = phase.filter(|_| phase != a.phase) {
                phases[i].push(PhaseMark {
                    phase: p,
                    global_round: t,
                    node: a.at,
                });
            }
            a.phase = phase;
            if cfg.record_trace {
                trace.push(TraceEvent {
                    global_round: t,
                    agent: i,
                    node: a.at,
                    action: act.into(),
                    arrival_port: a.arrival,
                });
            }
            actions[i] = Some(act);
        }
        for (a, act) in agents.iter_mut().zip(actions) {
            match act {
                Some(Action::Move(p)) => {
                    let (w, q) = g.port_target(a.at, p);
                    a.at = w;
                    a.arrival = Some(q);
                }
                Some(Action::Wait) => a.arrival = None,
                None => {}
            }
        }
        t += 1;
    }
    Ok(RunReport {
        outcome: RunOutcome {
            met: false,
            meet_node: None,
            meet_round_global: None,
            meet_round_later: None,
            rounds_executed: cfg.budget,
            phase: agents[1].phase.or(agents[0].phase),
        },
        trace,
        phases,
        start_nodes: [s.u, s.v],
        delta: s.delta,
    })
}

/// [`run`] with the universal program over `provider`, after checking that
/// the provider's sequences cover `g`.
pub fn run_universal(
    g: &PortGraph,
    s: &Stic,
    provider: Arc<UxsProvider>,
    cfg: &RunConfig,
) -> Result<RunReport, SimError> {
    provider.check_against(g)?;
    run(g, s, || universal_program(provider.clone()), cfg)
}

/// Result of running one agent alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SoloOutcome {
    /// Local round at which the program reported completion.
    pub finished_at: Option<u64>,
    pub end_node: Node,
    pub moves: u64,
}

/// Runs a single agent from `start` until its program reports completion
/// or `max_rounds` pass.
pub fn solo_run<P: AgentProgram>(
    g: &PortGraph,
    start: Node,
    mut prog: P,
    max_rounds: u64,
) -> Result<SoloOutcome, SimError> {
    g.check_node(start)?;
    let (mut at, mut arrival, mut moves) = (start, None, 0);
    let mut t = 0;
    while t < max_rounds {
        let degree = g.degree(at);
        let act = prog.step(&Observation {
            degree,
            arrival_port: arrival,
            local_clock: t,
        });
        if prog.finished_at().is_some() {
            break;
        }
        match act {
            Action::Wait => arrival = None,
            Action::Move(p) if p < degree => {
                let (w, q) = g.port_target(at, p);
                at = w;
                arrival = Some(q);
                moves += 1;
            }
            Action::Move(port) => {
                return Err(SimError::BadMove {
                    agent: 0,
                    round: t,
                    port,
                    degree,
                })
            }
        }
        t += 1;
    }
    Ok(SoloOutcome {
        finished_at: prog.finished_at(),
        end_node: at,
        moves,
    })
}

/// Writes a trace as JSON lines.
pub fn write_trace<W: Write>(trace: &[TraceEvent], mut w: W) -> io::Result<()> {
    for e in trace {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
