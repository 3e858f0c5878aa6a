//! Agent programs.
//!
//! A program is a deterministic state machine fed one [`Observation`] per
//! round. It folds the observation history into its own state and never
//! sees node identities or the graph. Two agents running the same program
//! therefore act identically for as long as their observation histories
//! coincide.
//!
//! Programs may report a run of guaranteed waits through
//! [`AgentProgram::idle_rounds`]; the simulator uses this to skip rounds in
//! which nothing can happen.

mod asymm;
mod explore;
mod symm;
mod universal;

use std::sync::Arc;

use thiserror::Error;

use crate::graph::Port;
use crate::uxs::UxsSpec;

pub use asymm::{asymm_duration, t_learn, AsymmRvDs};
pub use explore::Explore;
pub use symm::SymmRv;
pub use universal::{phase_duration, phase_budget_through, Universal};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgoError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("arithmetic overflow evaluating {0}")]
    Overflow(&'static str),
}

/// What an agent perceives at the start of a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub degree: usize,
    /// Port by which the current node was entered in the previous round;
    /// `None` if the agent waited or has just appeared.
    pub arrival_port: Option<Port>,
    /// Rounds since this agent appeared.
    pub local_clock: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Wait,
    Move(Port),
}

pub trait AgentProgram: Send {
    fn step(&mut self, obs: &Observation) -> Action;

    /// Number of upcoming rounds in which the program is certain to wait,
    /// provided it keeps being observed at the same node.
    fn idle_rounds(&self) -> u64 {
        0
    }

    /// Advances the state as if `rounds <= idle_rounds()` waiting rounds had
    /// been stepped.
    fn skip_idle(&mut self, rounds: u64) {
        assert_eq!(rounds, 0, "program reported no idle rounds");
    }

    /// Index of the phase the last action belonged to, for phased programs.
    fn phase(&self) -> Option<u64> {
        None
    }

    /// Local round at which a finite procedure completed.
    fn finished_at(&self) -> Option<u64> {
        None
    }
}

/// A resumable procedure inside a program. `poll` returns `None` once the
/// procedure is over; that call does not consume the round, so the caller
/// hands the same observation to whatever comes next.
pub trait Procedure {
    fn poll(&mut self, obs: &Observation) -> Option<Action>;

    fn idle(&self) -> u64;

    fn skip(&mut self, rounds: u64);
}

/// A finite procedure run as a whole program, waiting forever afterwards.
pub struct Standalone<P> {
    inner: P,
    clock: u64,
    finished: Option<u64>,
}

impl<P: Procedure> Standalone<P> {
    pub fn new(inner: P) -> Self {
        Standalone {
            inner,
            clock: 0,
            finished: None,
        }
    }
}

impl<P: Procedure + Send> AgentProgram for Standalone<P> {
    fn step(&mut self, obs: &Observation) -> Action {
        if self.finished.is_none() {
            if let Some(a) = self.inner.poll(obs) {
                self.clock += 1;
                return a;
            }
            self.finished = Some(self.clock);
        }
        self.clock += 1;
        Action::Wait
    }

    fn idle_rounds(&self) -> u64 {
        match self.finished {
            Some(_) => u64::MAX,
            None => self.inner.idle(),
        }
    }

    fn skip_idle(&mut self, rounds: u64) {
        if self.finished.is_none() {
            self.inner.skip(rounds);
        }
        self.clock += rounds;
    }

    fn finished_at(&self) -> Option<u64> {
        self.finished
    }
}

/// Moves through port 0 every round.
#[derive(Debug, Default, Clone)]
pub struct MoveAlways;

impl AgentProgram for MoveAlways {
    fn step(&mut self, obs: &Observation) -> Action {
        if obs.degree == 0 {
            Action::Wait
        } else {
            Action::Move(0)
        }
    }
}

/// Never moves.
#[derive(Debug, Default, Clone)]
pub struct WaitForever;

impl AgentProgram for WaitForever {
    fn step(&mut self, _obs: &Observation) -> Action {
        Action::Wait
    }

    fn idle_rounds(&self) -> u64 {
        u64::MAX
    }

    fn skip_idle(&mut self, _rounds: u64) {}
}

/// Hypotheses of one phase: graph size `n`, Shrink value `d` and delay `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct PhaseParams {
    pub n: u64,
    pub d: u64,
    pub delta: u64,
}

impl PhaseParams {
    /// Parameters of phase `p`; the third pairing coordinate carries `delta + 1`.
    pub fn from_phase(p: u64) -> Result<Self, AlgoError> {
        let (n, d, z) = pair_g_inv(p)?;
        Ok(PhaseParams { n, d, delta: z - 1 })
    }

    /// Inverse of [`PhaseParams::from_phase`].
    pub fn phase(&self) -> Result<u64, AlgoError> {
        let z = self
            .delta
            .checked_add(1)
            .ok_or(AlgoError::Overflow("delta + 1"))?;
        pair_g(self.n, self.d, z)
    }
}

fn positive(name: &str, x: u64) -> Result<(), AlgoError> {
    if x == 0 {
        Err(AlgoError::BadParameter(format!("{name} must be >= 1")))
    } else {
        Ok(())
    }
}

/// `f(x, y) = x + (x + y - 1)(x + y - 2) / 2`, a bijection from pairs of
/// positive integers onto the positive integers.
pub fn pair_f(x: u64, y: u64) -> Result<u64, AlgoError> {
    positive("x", x)?;
    positive("y", y)?;
    let s = x.checked_add(y).ok_or(AlgoError::Overflow("f"))?;
    let tri = ((s - 1) as u128 * (s - 2) as u128) / 2;
    u64::try_from(tri + x as u128).map_err(|_| AlgoError::Overflow("f"))
}

/// `g(x, y, z) = f(f(x, y), z)`.
pub fn pair_g(x: u64, y: u64, z: u64) -> Result<u64, AlgoError> {
    pair_f(pair_f(x, y)?, z)
}

/// Inverse of [`pair_f`].
pub fn pair_f_inv(p: u64) -> Result<(u64, u64), AlgoError> {
    positive("P", p)?;
    // diagonal s = x + y is the largest s with (s-1)(s-2)/2 < p
    let tri = |s: u128| (s - 1) * (s - 2) / 2;
    let p128 = p as u128;
    let mut s = ((2.0 * p as f64).sqrt() as u128).max(2);
    while tri(s) >= p128 {
        s -= 1;
    }
    while tri(s + 1) < p128 {
        s += 1;
    }
    let x = (p128 - tri(s)) as u64;
    Ok((x, s as u64 - x))
}

/// Inverse of [`pair_g`].
pub fn pair_g_inv(p: u64) -> Result<(u64, u64, u64), AlgoError> {
    let (xy, z) = pair_f_inv(p)?;
    let (x, y) = pair_f_inv(xy)?;
    Ok((x, y, z))
}

/// `T(n, d, delta) = (d + delta)(n - 1)^d (M + 2) + 2(M + 1)`, saturating.
pub fn symmrv_bound(n: u64, d: u64, delta: u64, m: u64) -> u64 {
    let walks = match u32::try_from(d) {
        Ok(d) => n.saturating_sub(1).saturating_pow(d),
        Err(_) if n <= 2 => n.saturating_sub(1),
        Err(_) => u64::MAX,
    };
    d.saturating_add(delta)
        .saturating_mul(walks)
        .saturating_mul(m.saturating_add(2))
        .saturating_add(m.saturating_add(1).saturating_mul(2))
}

/// Explore from the current node as a stand-alone program.
pub fn explore_program(d: u64, delta: u64) -> Result<Standalone<Explore>, AlgoError> {
    Ok(Standalone::new(Explore::new(d, delta, usize::MAX)?))
}

/// SymmRV with the given hypotheses, unpadded: it finishes as soon as it is
/// back home.
pub fn symmrv_program(params: PhaseParams, seq: Arc<UxsSpec>) -> Result<Standalone<SymmRv>, AlgoError> {
    Ok(Standalone::new(SymmRv::new(params, seq, false)?))
}

/// The fixed-duration procedure for nonsymmetric starts.
pub fn asymmrv_ds_program(n: u64, delta_hat: u64, seq: Arc<UxsSpec>) -> Result<Standalone<AsymmRvDs>, AlgoError> {
    Ok(Standalone::new(AsymmRvDs::new(n, delta_hat, seq)?))
}

/// The universal program: phases over all hypotheses, no prior knowledge
/// beyond the shared sequence provider.
pub fn universal_program(provider: Arc<crate::uxs::UxsProvider>) -> Universal {
    Universal::new(provider)
}
