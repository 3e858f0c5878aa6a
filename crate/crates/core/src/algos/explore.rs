use super::{Action, AlgoError, Observation, Procedure};
use crate::graph::Port;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Start,
    /// `k` steps of the current walk taken.
    Forward(usize),
    /// `k` steps left on the way back.
    Back(usize),
    Wait(u64),
    /// Returning after seeing a degree above the limit, `k` steps left.
    Abort(usize),
    Done,
}

/// Every walk of length `d` from the current node in lexicographic order of
/// its port sequence: walk it, walk it back, wait `delta - d` rounds. Each
/// iteration takes exactly `d + delta` rounds and the procedure ends where
/// it started.
///
/// Degrees are learned while walking. If a node of degree above
/// `max_degree` is seen the procedure returns home at once and reports
/// [`Explore::aborted`].
#[derive(Debug, Clone)]
pub struct Explore {
    d: usize,
    delta: u64,
    max_degree: usize,
    ports: Vec<Port>,
    degs: Vec<usize>,
    inports: Vec<Port>,
    stage: Stage,
    aborted: bool,
    iterations: u64,
}

impl Explore {
    pub fn new(d: u64, delta: u64, max_degree: usize) -> Result<Self, AlgoError> {
        if d == 0 || d > delta {
            return Err(AlgoError::BadParameter(format!(
                "Explore needs 1 <= d <= delta, got d = {d}, delta = {delta}"
            )));
        }
        let d = usize::try_from(d).map_err(|_| AlgoError::Overflow("walk length"))?;
        Ok(Explore {
            d,
            delta,
            max_degree,
            ports: vec![0; d],
            degs: vec![0; d + 1],
            inports: vec![0; d],
            stage: Stage::Start,
            aborted: false,
            iterations: 0,
        })
    }

    pub fn aborted(&self) -> bool {
        self.aborted
    }

    /// Completed walk iterations so far.
    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// Moves to the lexicographic successor of the current walk. The prefix
    /// up to the changed position is kept, so its degrees stay known.
    fn advance(&mut self) -> bool {
        for j in (0..self.d).rev() {
            if self.ports[j] + 1 < self.degs[j] {
                self.ports[j] += 1;
                self.ports[j + 1..].fill(0);
                return true;
            }
        }
        false
    }
}

impl Procedure for Explore {
    fn poll(&mut self, obs: &Observation) -> Option<Action> {
        loop {
            match self.stage {
                Stage::Start => {
                    if obs.degree > self.max_degree {
                        self.aborted = true;
                        self.stage = Stage::Done;
                    } else if obs.degree == 0 {
                        self.stage = Stage::Done;
                    } else {
                        self.degs[0] = obs.degree;
                        self.stage = Stage::Forward(0);
                    }
                }
                Stage::Forward(k) => {
                    if k > 0 {
                        self.inports[k - 1] = obs.arrival_port.expect("arrived by a move");
                        self.degs[k] = obs.degree;
                        if obs.degree > self.max_degree {
                            self.stage = Stage::Abort(k);
                            continue;
                        }
                    }
                    if k == self.d {
                        self.stage = Stage::Back(k);
                        continue;
                    }
                    self.stage = Stage::Forward(k + 1);
                    return Some(Action::Move(self.ports[k]));
                }
                Stage::Back(0) => {
                    self.iterations += 1;
                    self.stage = Stage::Wait(self.delta - self.d as u64);
                }
                Stage::Back(k) => {
                    self.stage = Stage::Back(k - 1);
                    return Some(Action::Move(self.inports[k - 1]));
                }
                Stage::Wait(0) => {
                    self.stage = if self.advance() {
                        Stage::Forward(0)
                    } else {
                        Stage::Done
                    };
                }
                Stage::Wait(r) => {
                    self.stage = Stage::Wait(r - 1);
                    return Some(Action::Wait);
                }
                Stage::Abort(0) => {
                    self.aborted = true;
                    self.stage = Stage::Done;
                }
                Stage::Abort(k) => {
                    self.stage = Stage::Abort(k - 1);
                    return Some(Action::Move(self.inports[k - 1]));
                }
                Stage::Done => return None,
            }
        }
    }

    fn idle(&self) -> u64 {
        match self.stage {
            Stage::Wait(r) => r,
            _ => 0,
        }
    }

    fn skip(&mut self, rounds: u64) {
        match &mut self.stage {
            Stage::Wait(r) if *r >= rounds => *r -= rounds,
            _ => assert_eq!(rounds, 0, "Explore cannot skip outside a wait"),
        }
    }
}
