use std::sync::Arc;

use super::{
    asymm_duration, symmrv_bound, Action, AgentProgram, AlgoError, AsymmRvDs, Observation, PhaseParams,
    Procedure, SymmRv,
};
use crate::uxs::UxsProvider;

/// Exact duration of phase `params` given the sequence length `m` for its
/// size hypothesis: the nonsymmetric procedure when `d < n`, then padded
/// SymmRV when `delta >= d`. Saturating.
pub fn phase_duration(params: PhaseParams, m: u64) -> u64 {
    let mut total = 0u64;
    if params.d < params.n {
        total = total.saturating_add(asymm_duration(params.n, params.delta, m));
    }
    if params.delta >= params.d {
        total = total.saturating_add(symmrv_bound(params.n, params.d, params.delta, m));
    }
    total
}

/// Sum of the durations of phases `1..=p` under `provider`.
pub fn phase_budget_through(p: u64, provider: &UxsProvider) -> Result<u64, AlgoError> {
    let mut total = 0u64;
    for q in 1..=p {
        let params = PhaseParams::from_phase(q)?;
        let m = provider.sequence(params.n as usize).len() as u64;
        total = total.saturating_add(phase_duration(params, m));
    }
    Ok(total)
}

#[derive(Debug)]
enum Stage {
    Begin,
    Asymm(AsymmRvDs),
    Symm(SymmRv),
}

/// Phases `P = 1, 2, ..` with `(n, d, delta + 1) = g^{-1}(P)`. Every phase
/// lasts exactly [`phase_duration`] rounds and ends at the start node, so
/// the offset between two agents is the same at every phase boundary.
#[derive(Debug)]
pub struct Universal {
    provider: Arc<UxsProvider>,
    phase: u64,
    params: Option<PhaseParams>,
    stage: Stage,
}

impl Universal {
    pub fn new(provider: Arc<UxsProvider>) -> Self {
        Universal {
            provider,
            phase: 0,
            params: None,
            stage: Stage::Begin,
        }
    }

    /// Hypotheses of the current phase.
    pub fn params(&self) -> Option<PhaseParams> {
        self.params
    }

    fn symm_stage(&self, params: PhaseParams) -> Stage {
        let seq = self.provider.sequence(params.n as usize);
        Stage::Symm(SymmRv::new(params, seq, true).expect("gated by delta >= d"))
    }

    fn next(&mut self, obs: &Observation) -> Action {
        loop {
            match &mut self.stage {
                Stage::Begin => {
                    self.phase += 1;
                    let params = PhaseParams::from_phase(self.phase).expect("phase index is positive");
                    self.params = Some(params);
                    if params.d < params.n {
                        let seq = self.provider.sequence(params.n as usize);
                        self.stage = Stage::Asymm(
                            AsymmRvDs::new(params.n, params.delta, seq).expect("d < n implies n >= 2"),
                        );
                    } else if params.delta >= params.d {
                        self.stage = self.symm_stage(params);
                    }
                }
                Stage::Asymm(a) => {
                    if let Some(act) = a.poll(obs) {
                        return act;
                    }
                    let params = self.params.expect("set at phase start");
                    self.stage = if params.delta >= params.d {
                        self.symm_stage(params)
                    } else {
                        Stage::Begin
                    };
                }
                Stage::Symm(s) => {
                    if let Some(act) = s.poll(obs) {
                        return act;
                    }
                    self.stage = Stage::Begin;
                }
            }
        }
    }
}

impl AgentProgram for Universal {
    fn step(&mut self, obs: &Observation) -> Action {
        self.next(obs)
    }

    fn idle_rounds(&self) -> u64 {
        match &self.stage {
            Stage::Begin => 0,
            Stage::Asymm(a) => a.idle(),
            Stage::Symm(s) => s.idle(),
        }
    }

    fn skip_idle(&mut self, rounds: u64) {
        match &mut self.stage {
            Stage::Begin => assert_eq!(rounds, 0),
            Stage::Asymm(a) => a.skip(rounds),
            Stage::Symm(s) => s.skip(rounds),
        }
    }

    fn phase(&self) -> Option<u64> {
        (self.phase > 0).then_some(self.phase)
    }
}
