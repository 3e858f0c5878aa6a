use std::sync::Arc;

use super::{symmrv_bound, Action, AlgoError, Explore, Observation, PhaseParams, Procedure};
use crate::graph::Port;
use crate::uxs::UxsSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    /// Exploring around the `i`-th node of the sequence walk.
    Explore(usize),
    /// Just moved to the `i`-th node.
    Arrive(usize),
    Return,
    Pad,
    Done,
}

/// Explore around every node of the sequence walk `u_0 .. u_{M+1}`, then
/// walk back to `u_0`.
///
/// Any observed degree above `n - 1` contradicts the size hypothesis; the
/// agent then heads home directly. When padded, the procedure waits at home
/// until exactly `T(n, d, delta)` rounds have passed, which is never less
/// than the unpadded duration under either outcome.
#[derive(Debug, Clone)]
pub struct SymmRv {
    params: PhaseParams,
    seq: Arc<UxsSpec>,
    max_degree: usize,
    explore: Explore,
    walk_in: Vec<Port>,
    stage: Stage,
    elapsed: u64,
    pad_to: Option<u64>,
    aborted: bool,
}

impl SymmRv {
    pub fn new(params: PhaseParams, seq: Arc<UxsSpec>, padded: bool) -> Result<Self, AlgoError> {
        if params.n == 0 {
            return Err(AlgoError::BadParameter("SymmRV needs n >= 1".into()));
        }
        let max_degree = usize::try_from(params.n - 1).unwrap_or(usize::MAX);
        let explore = Explore::new(params.d, params.delta, max_degree)?;
        let bound = symmrv_bound(params.n, params.d, params.delta, seq.len() as u64);
        Ok(SymmRv {
            params,
            seq,
            max_degree,
            explore,
            walk_in: Vec::new(),
            stage: Stage::Explore(0),
            elapsed: 0,
            pad_to: padded.then_some(bound),
            aborted: false,
        })
    }

    pub fn params(&self) -> PhaseParams {
        self.params
    }

    /// Whether a degree contradicted the size hypothesis.
    pub fn aborted(&self) -> bool {
        self.aborted
    }

    fn next(&mut self, obs: &Observation) -> Option<Action> {
        let last = self.seq.len() + 1;
        loop {
            match self.stage {
                Stage::Explore(i) => {
                    if let Some(a) = self.explore.poll(obs) {
                        return Some(a);
                    }
                    if self.explore.aborted() {
                        self.aborted = true;
                        self.stage = Stage::Return;
                    } else if i == last {
                        self.stage = Stage::Return;
                    } else if obs.degree == 0 {
                        self.stage = Stage::Pad;
                    } else {
                        let port = if i == 0 {
                            0
                        } else {
                            (self.walk_in[i - 1] + self.seq.sequence[i - 1] as usize) % obs.degree
                        };
                        self.stage = Stage::Arrive(i + 1);
                        return Some(Action::Move(port));
                    }
                }
                Stage::Arrive(i) => {
                    self.walk_in.push(obs.arrival_port.expect("arrived by a move"));
                    if obs.degree > self.max_degree {
                        self.aborted = true;
                        self.stage = Stage::Return;
                    } else {
                        self.explore = Explore::new(self.params.d, self.params.delta, self.max_degree)
                            .expect("parameters checked at construction");
                        self.stage = Stage::Explore(i);
                    }
                }
                Stage::Return => match self.walk_in.pop() {
                    Some(q) => return Some(Action::Move(q)),
                    None => self.stage = Stage::Pad,
                },
                Stage::Pad => match self.pad_to {
                    Some(t) if self.elapsed < t => return Some(Action::Wait),
                    Some(t) => {
                        debug_assert_eq!(self.elapsed, t, "SymmRV overran its bound");
                        self.stage = Stage::Done;
                    }
                    None => self.stage = Stage::Done,
                },
                Stage::Done => return None,
            }
        }
    }
}

impl Procedure for SymmRv {
    fn poll(&mut self, obs: &Observation) -> Option<Action> {
        let a = self.next(obs);
        if a.is_some() {
            self.elapsed += 1;
        }
        a
    }

    fn idle(&self) -> u64 {
        match (self.stage, self.pad_to) {
            (Stage::Explore(_), _) => self.explore.idle(),
            (Stage::Pad, Some(t)) => t.saturating_sub(self.elapsed),
            _ => 0,
        }
    }

    fn skip(&mut self, rounds: u64) {
        match self.stage {
            Stage::Explore(_) => self.explore.skip(rounds),
            Stage::Pad => assert!(rounds <= self.idle(), "skip past the pad"),
            _ => assert_eq!(rounds, 0, "SymmRV cannot skip here"),
        }
        self.elapsed += rounds;
    }
}
