use std::collections::HashMap;
use std::sync::Arc;

use super::{Action, AlgoError, Observation, Procedure};
use crate::graph::{Port, ViewTree};
use crate::uxs::UxsSpec;

/// Worst-case length of the view-learning walk for size `n`: a depth-first
/// traversal of the view to depth `2(n - 1)` with branching at most `n - 1`,
/// i.e. `2 * sum_{k=1}^{2(n-1)} (n-1)^k`. Saturating.
pub fn t_learn(n: u64) -> u64 {
    let b = n.saturating_sub(1);
    let depth = b.saturating_mul(2);
    let mut level = 1u64;
    let mut total = 0u64;
    for _ in 0..depth {
        level = level.saturating_mul(b);
        total = total.saturating_add(level);
        if total == u64::MAX {
            break;
        }
    }
    total.saturating_mul(2)
}

fn epoch_len(delta_hat: u64, m: u64) -> u64 {
    m.saturating_add(1).saturating_mul(2).saturating_add(delta_hat)
}

/// Total duration `B(n, delta_hat) = T_learn(n) + (n + 1) E` with epoch
/// length `E = 2(M + 1) + delta_hat`. Saturating.
pub fn asymm_duration(n: u64, delta_hat: u64, m: u64) -> u64 {
    n.saturating_add(1)
        .saturating_mul(epoch_len(delta_hat, m))
        .saturating_add(t_learn(n))
}

#[derive(Debug, Clone)]
struct LearnNode {
    degree: usize,
    depth: usize,
    /// Port by which this node was entered from its parent.
    entry: Port,
    /// `(incoming port, node)` per outgoing port, in port order.
    children: Vec<(Port, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Start,
    Learn,
    Arrive,
    Unwind,
    PadLearn,
    Epochs,
    /// `k` moves of the sweep taken.
    SweepOut(usize),
    SweepBack,
    Done,
}

/// Fixed-duration rendezvous for nonsymmetric starts under a size
/// hypothesis `n` and a delay hypothesis `delta_hat`.
///
/// The agent first learns its view to depth `2(n - 1)` by a depth-first
/// walk and waits at home until `T_learn(n)` rounds have passed. From the
/// learned tree it derives the sorted set of depth-`(n - 1)` views of all
/// nodes within distance `n - 1` and takes the position of its own view in
/// that set as its rank `r >= 1`. Then follow `n + 1` epochs of
/// `E = 2(M + 1) + delta_hat` rounds; in epoch `r` the agent applies the
/// sequence, walks back and waits, and in every other epoch it waits at
/// home. Epoch 0 is never anyone's, so an agent that starts up to
/// `delta_hat` rounds later is already home when the earlier one sweeps.
///
/// A degree above `n - 1` or more than `n` distinct views refute the size
/// hypothesis; the agent then never sweeps. Either way the procedure lasts
/// exactly [`asymm_duration`] rounds and ends at home.
#[derive(Debug, Clone)]
pub struct AsymmRvDs {
    n: u64,
    seq: Arc<UxsSpec>,
    max_degree: usize,
    depth_limit: usize,
    t_learn: u64,
    epoch: u64,
    total: u64,
    tree: Vec<LearnNode>,
    /// DFS stack of `(tree node, next port to try)`.
    stack: Vec<(usize, Port)>,
    sweep_in: Vec<Port>,
    stage: Stage,
    elapsed: u64,
    refuted: bool,
    rank: Option<u64>,
}

impl AsymmRvDs {
    pub fn new(n: u64, delta_hat: u64, seq: Arc<UxsSpec>) -> Result<Self, AlgoError> {
        if n < 2 {
            return Err(AlgoError::BadParameter(format!(
                "the nonsymmetric procedure needs n >= 2, got {n}"
            )));
        }
        let m = seq.len() as u64;
        let b = usize::try_from(n - 1).map_err(|_| AlgoError::Overflow("n"))?;
        Ok(AsymmRvDs {
            n,
            seq,
            max_degree: b,
            depth_limit: b.checked_mul(2).ok_or(AlgoError::Overflow("depth"))?,
            t_learn: t_learn(n),
            epoch: epoch_len(delta_hat, m),
            total: asymm_duration(n, delta_hat, m),
            tree: Vec::new(),
            stack: Vec::new(),
            sweep_in: Vec::new(),
            stage: Stage::Start,
            elapsed: 0,
            refuted: false,
            rank: None,
        })
    }

    /// Rank among the view classes, once learning is over; `None` if the
    /// size hypothesis was refuted.
    pub fn rank(&self) -> Option<u64> {
        self.rank
    }

    /// Total duration of this instance.
    pub fn duration(&self) -> u64 {
        self.total
    }

    fn sweep_start(&self) -> Option<u64> {
        self.rank
            .map(|r| self.t_learn.saturating_add(r.saturating_mul(self.epoch)))
    }

    fn truncated(&self, x: usize, depth: usize) -> ViewTree {
        let node = &self.tree[x];
        let children = if depth == 0 {
            Vec::new()
        } else {
            node.children
                .iter()
                .map(|&(q, c)| (q, self.truncated(c, depth - 1)))
                .collect()
        };
        ViewTree {
            degree: node.degree,
            children,
        }
    }

    fn compute_rank(&self) -> Option<u64> {
        if self.refuted || self.tree.is_empty() || self.tree[0].degree == 0 {
            return None;
        }
        let m = self.depth_limit / 2;
        // Intern truncated subtrees bottom-up: ids[x][j] names the depth-j
        // truncation of the subtree at x.
        let mut table: HashMap<(usize, Vec<(Port, u32)>), u32> = HashMap::new();
        let mut ids: Vec<Vec<u32>> = vec![Vec::new(); self.tree.len()];
        // children always come after their parent in the arena
        for x in (0..self.tree.len()).rev() {
            let node = &self.tree[x];
            let reach = (self.depth_limit - node.depth).min(m);
            let mut row = Vec::with_capacity(reach + 1);
            for j in 0..=reach {
                let kids = if j == 0 {
                    Vec::new()
                } else {
                    node.children
                        .iter()
                        .map(|&(q, c)| (q, ids[c][j - 1]))
                        .collect()
                };
                let next = table.len() as u32;
                row.push(*table.entry((node.degree, kids)).or_insert(next));
            }
            ids[x] = row;
        }
        let mut reps: HashMap<u32, usize> = HashMap::new();
        for (x, node) in self.tree.iter().enumerate() {
            if node.depth <= m {
                reps.entry(ids[x][m]).or_insert(x);
            }
        }
        if reps.len() as u64 > self.n {
            return None;
        }
        let own = ids[0][m];
        let mut views: Vec<(ViewTree, u32)> = reps
            .iter()
            .map(|(&id, &x)| (self.truncated(x, m), id))
            .collect();
        views.sort();
        let pos = views.iter().position(|&(_, id)| id == own).expect("own view is listed");
        Some(pos as u64 + 1)
    }

    fn next(&mut self, obs: &Observation) -> Option<Action> {
        loop {
            match self.stage {
                Stage::Start => {
                    self.tree.push(LearnNode {
                        degree: obs.degree,
                        depth: 0,
                        entry: 0,
                        children: Vec::new(),
                    });
                    if obs.degree > self.max_degree {
                        self.refuted = true;
                        self.stage = Stage::PadLearn;
                    } else {
                        self.stack.push((0, 0));
                        self.stage = Stage::Learn;
                    }
                }
                Stage::Learn => {
                    let top = self.stack.len() - 1;
                    let (x, next) = self.stack[top];
                    if top < self.depth_limit && next < self.tree[x].degree {
                        self.stack[top].1 += 1;
                        self.stage = Stage::Arrive;
                        return Some(Action::Move(next));
                    }
                    if top > 0 {
                        self.stack.pop();
                        return Some(Action::Move(self.tree[x].entry));
                    }
                    self.stage = Stage::PadLearn;
                }
                Stage::Arrive => {
                    let q = obs.arrival_port.expect("arrived by a move");
                    let parent = self.stack[self.stack.len() - 1].0;
                    let child = self.tree.len();
                    self.tree.push(LearnNode {
                        degree: obs.degree,
                        depth: self.stack.len(),
                        entry: q,
                        children: Vec::new(),
                    });
                    self.tree[parent].children.push((q, child));
                    self.stack.push((child, 0));
                    if obs.degree > self.max_degree {
                        self.refuted = true;
                        self.stage = Stage::Unwind;
                    } else {
                        self.stage = Stage::Learn;
                    }
                }
                Stage::Unwind => {
                    if self.stack.len() > 1 {
                        let (x, _) = self.stack.pop().unwrap();
                        return Some(Action::Move(self.tree[x].entry));
                    }
                    self.stage = Stage::PadLearn;
                }
                Stage::PadLearn => {
                    if self.elapsed < self.t_learn {
                        return Some(Action::Wait);
                    }
                    debug_assert_eq!(self.elapsed, self.t_learn, "learning overran its bound");
                    self.rank = self.compute_rank();
                    // the tree is no longer needed
                    self.tree = Vec::new();
                    self.stage = Stage::Epochs;
                }
                Stage::Epochs => {
                    if self.elapsed >= self.total {
                        self.stage = Stage::Done;
                    } else if self.sweep_start() == Some(self.elapsed) {
                        self.stage = Stage::SweepOut(0);
                    } else {
                        return Some(Action::Wait);
                    }
                }
                Stage::SweepOut(k) => {
                    if k > 0 {
                        self.sweep_in.push(obs.arrival_port.expect("arrived by a move"));
                    }
                    if k == self.seq.len() + 1 {
                        self.stage = Stage::SweepBack;
                        continue;
                    }
                    let port = if k == 0 {
                        0
                    } else {
                        (self.sweep_in[k - 1] + self.seq.sequence[k - 1] as usize) % obs.degree
                    };
                    self.stage = Stage::SweepOut(k + 1);
                    return Some(Action::Move(port));
                }
                Stage::SweepBack => match self.sweep_in.pop() {
                    Some(q) => return Some(Action::Move(q)),
                    None => self.stage = Stage::Epochs,
                },
                Stage::Done => return None,
            }
        }
    }
}

impl Procedure for AsymmRvDs {
    fn poll(&mut self, obs: &Observation) -> Option<Action> {
        let a = self.next(obs);
        if a.is_some() {
            self.elapsed += 1;
        }
        a
    }

    fn idle(&self) -> u64 {
        match self.stage {
            Stage::PadLearn => self.t_learn.saturating_sub(self.elapsed),
            Stage::Epochs => match self.sweep_start() {
                Some(s) if s > self.elapsed => s - self.elapsed,
                Some(s) if s == self.elapsed => 0,
                _ => self.total.saturating_sub(self.elapsed),
            },
            _ => 0,
        }
    }

    fn skip(&mut self, rounds: u64) {
        assert!(rounds <= self.idle(), "skip past a scheduled move");
        self.elapsed += rounds;
    }
}
