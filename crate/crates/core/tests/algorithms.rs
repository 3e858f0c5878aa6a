use std::sync::{Arc, OnceLock};

use symrv::algos::{
    asymm_duration, asymmrv_ds_program, explore_program, symmrv_bound, symmrv_program, universal_program,
    AgentProgram, MoveAlways, PhaseParams, WaitForever,
};
use symrv::graph::{
    enumerate_graphs, gen_k2, gen_oriented_ring, gen_path, gen_qhat, shrink, symmetric, z_set, PortGraph, Stic,
};
use symrv::sim::{
    batch, run, run_universal, solo_run, AlgoChoice, BatchConfig, Instance, RunConfig, RunReport,
};
use symrv::uxs::{find_uxs, instance_seq, UxsProvider, UxsSpec};

fn verified() -> &'static [UxsSpec] {
    static V: OnceLock<Vec<UxsSpec>> = OnceLock::new();
    V.get_or_init(|| (1..=4).map(|n| find_uxs(n, 10_000_000).unwrap()).collect())
}

fn provider(g: &PortGraph) -> Arc<UxsProvider> {
    Arc::new(UxsProvider::new(verified().to_vec(), instance_seq(g)))
}

fn universal(g: &PortGraph, u: usize, v: usize, delta: u64, budget: u64) -> RunReport {
    run_universal(g, &Stic::new(u, v, delta), provider(g), &RunConfig::new(budget)).unwrap()
}

#[test]
fn explore_iterations_take_d_plus_delta_rounds() {
    let k2 = gen_k2();
    let out = solo_run(&k2, 0, explore_program(1, 3).unwrap(), 100).unwrap();
    assert_eq!((out.finished_at, out.end_node, out.moves), (Some(4), 0, 2));

    // the middle of a star with three leaves
    let star = PortGraph::from_edges(4, &[(0, 0, 1, 0), (0, 1, 2, 0), (0, 2, 3, 0)]).unwrap();
    let out = solo_run(&star, 0, explore_program(1, 1).unwrap(), 100).unwrap();
    assert_eq!((out.finished_at, out.end_node), (Some(6), 0));

    for g in (2..=4).flat_map(|n| enumerate_graphs(n).unwrap()) {
        for (d, delta) in [(1, 1), (1, 3), (2, 2), (2, 4)] {
            for u in g.nodes() {
                let out = solo_run(&g, u, explore_program(d, delta).unwrap(), 100_000).unwrap();
                let walks = count_walks(&g, u, d as usize);
                assert_eq!(out.finished_at, Some(walks * (d + delta)));
                assert_eq!(out.end_node, u);
            }
        }
    }
}

fn count_walks(g: &PortGraph, u: usize, len: usize) -> u64 {
    if len == 0 {
        return 1;
    }
    (0..g.degree(u)).map(|p| count_walks(g, g.succ(u, p).unwrap(), len - 1)).sum()
}

#[test]
fn asymm_duration_is_fixed_on_every_small_graph() {
    for g in (1..=4).flat_map(|n| enumerate_graphs(n).unwrap()) {
        let n = g.node_count() as u64;
        for hyp_n in n.max(2)..=4 {
            let seq = Arc::new(verified()[hyp_n as usize - 1].clone());
            for delta_hat in [0, 2] {
                let want = asymm_duration(hyp_n, delta_hat, seq.len() as u64);
                for u in g.nodes() {
                    let prog = asymmrv_ds_program(hyp_n, delta_hat, seq.clone()).unwrap();
                    let out = solo_run(&g, u, prog, want + 10).unwrap();
                    assert_eq!(out.finished_at, Some(want));
                    assert_eq!(out.end_node, u);
                }
            }
        }
    }
}

#[test]
fn asymm_meets_on_path_ends() {
    let g = gen_path(3).unwrap();
    let seq = Arc::new(verified()[2].clone());
    let report = run(
        &g,
        &Stic::new(0, 2, 0),
        || asymmrv_ds_program(3, 0, seq.clone()).unwrap(),
        &RunConfig::new(asymm_duration(3, 0, seq.len() as u64)),
    )
    .unwrap();
    assert!(report.outcome.met);
}

#[test]
fn asymm_on_k2_returns_both_agents_home() {
    let k2 = gen_k2();
    let seq = Arc::new(verified()[1].clone());
    let b = asymm_duration(2, 1, 0);
    let report = run(
        &k2,
        &Stic::new(0, 1, 0),
        || asymmrv_ds_program(2, 1, seq.clone()).unwrap(),
        &RunConfig::new(b).with_trace(),
    )
    .unwrap();
    assert!(!report.outcome.met);
    for agent in 0..2 {
        let last = report.trace.iter().rev().find(|e| e.agent == agent).unwrap();
        assert_eq!(last.node, [0, 1][agent]);
    }
}

#[test]
fn symmrv_examples() {
    let k2 = gen_k2();
    let seq = Arc::new(verified()[1].clone());
    let params = PhaseParams { n: 2, d: 1, delta: 1 };
    let rep = run(&k2, &Stic::new(0, 1, 1), || symmrv_program(params, seq.clone()).unwrap(), &RunConfig::new(100))
        .unwrap();
    assert!(rep.outcome.met);
    assert_eq!(symmrv_bound(2, 1, 1, 0), 6);
    assert_eq!(symmrv_bound(2, 1, 3, 0), 10);

    let ring = gen_oriented_ring(4).unwrap();
    assert_eq!(shrink(&ring, 0, 2), 2);
    let seq = Arc::new(verified()[3].clone());
    let params = PhaseParams { n: 4, d: 2, delta: 2 };
    let rep = run(&ring, &Stic::new(0, 2, 2), || symmrv_program(params, seq.clone()).unwrap(), &RunConfig::new(10_000))
        .unwrap();
    assert!(rep.outcome.met);

    // delay below Shrink: both agents always on distinct nodes
    let seq = Arc::new(verified()[1].clone());
    let params = PhaseParams { n: 2, d: 1, delta: 1 };
    let rep = run(&k2, &Stic::new(0, 1, 0), || symmrv_program(params, seq.clone()).unwrap(), &RunConfig::new(1000))
        .unwrap();
    assert!(!rep.outcome.met);
}

#[test]
fn universal_examples() {
    let k2 = gen_k2();
    let rep = universal(&k2, 0, 1, 1, 10_000);
    assert!(rep.outcome.met);
    let p = symrv::algos::pair_g(2, 1, 2).unwrap();
    assert!(rep.outcome.phase.unwrap() <= p);

    let path = gen_path(3).unwrap();
    let rep = universal(&path, 0, 2, 0, 1_000_000);
    assert!(rep.outcome.met);
    assert!(rep.outcome.phase.unwrap() <= symrv::algos::pair_g(3, 1, 1).unwrap());

    let ring = gen_oriented_ring(4).unwrap();
    assert!(universal(&ring, 0, 2, 2, 10_000_000).outcome.met);
    let rep = universal(&ring, 0, 2, 1, 100_000);
    assert!(!rep.outcome.met);
    assert_eq!(rep.outcome.rounds_executed, 100_000);

    assert!(!universal(&k2, 0, 1, 0, 100_000).outcome.met);
}

#[test]
fn identical_inputs_give_identical_traces() {
    let g = gen_path(4).unwrap();
    let a = run_universal(&g, &Stic::new(0, 3, 2), provider(&g), &RunConfig::new(50_000).with_trace()).unwrap();
    let b = run_universal(&g, &Stic::new(0, 3, 2), provider(&g), &RunConfig::new(50_000).with_trace()).unwrap();
    assert_eq!(a.outcome, b.outcome);
    assert_eq!(serde_json::to_string(&a.trace).unwrap(), serde_json::to_string(&b.trace).unwrap());
}

#[test]
fn phases_stay_aligned_on_symmetric_starts() {
    let ring = gen_oriented_ring(4).unwrap();
    for delta in 2..=3 {
        let rep = universal(&ring, 1, 3, delta, 10_000_000);
        assert!(rep.outcome.met);
        assert!(rep.phases_aligned());
        assert!(!rep.phases[1].is_empty());
        for (a, b) in rep.phases[0].iter().zip(&rep.phases[1]) {
            assert_eq!(b.global_round - a.global_round, delta);
        }
    }
}

#[test]
fn completed_phases_end_at_home() {
    let g = gen_path(4).unwrap();
    let rep = run_universal(&g, &Stic::new(1, 2, 0), provider(&g), &RunConfig::new(200_000).with_trace()).unwrap();
    for (agent, start) in [(0, 1), (1, 2)] {
        assert!(rep.phases[agent].iter().all(|m| m.node == start));
    }
}

#[test]
fn simple_programs_on_k2() {
    let k2 = gen_k2();
    let rep = run(&k2, &Stic::new(0, 1, 3), || MoveAlways, &RunConfig::new(10)).unwrap();
    assert_eq!(rep.outcome.meet_round_global, Some(3));
    assert!(!run(&k2, &Stic::new(0, 1, 0), || MoveAlways, &RunConfig::new(1000)).unwrap().outcome.met);
    assert!(!run(&k2, &Stic::new(0, 1, 0), || WaitForever, &RunConfig::new(1000)).unwrap().outcome.met);
}

#[test]
fn qhat_z_pairs_meet() {
    let q = gen_qhat(2).unwrap();
    let z = z_set(&q, 2).unwrap();
    assert_eq!(z.len(), 2);
    let instances: Vec<_> = z
        .iter()
        .enumerate()
        .map(|(i, &v)| Instance { id: i as u64, graph_id: 0, u: q.root, v, delta: 2 })
        .collect();
    let mut out = Vec::new();
    let summary = batch(
        std::slice::from_ref(&q.graph),
        &instances,
        &BatchConfig::new(AlgoChoice::SymmRvKnown, verified().to_vec()),
        &mut out,
    )
    .unwrap();
    assert_eq!(summary.met, 2);
    assert!(out.iter().all(|r| r.met && r.feasible));
    assert!(z.iter().all(|&v| symmetric(&q.graph, q.root, v)));
}

#[test]
fn exhaustive_agreement_on_three_nodes() {
    let graphs: Vec<_> = enumerate_graphs(3).unwrap().collect();
    let inst = symrv::sim::instances_for(&graphs, 0..=3);
    let mut out = Vec::new();
    let summary =
        batch(&graphs, &inst, &BatchConfig::new(AlgoChoice::Universal, verified().to_vec()), &mut out).unwrap();
    assert!(summary.mismatches.is_empty());
    assert!(summary.misaligned.is_empty());
    assert_eq!(out.len(), inst.len());
}

/// Steps two copies of a program along the walk the first copy chooses and
/// checks that they never disagree.
fn lockstep<P: AgentProgram>(g: &PortGraph, mut a: P, mut b: P, rounds: u64) {
    let mut at = 0;
    let mut arrival = None;
    for t in 0..rounds {
        let obs = symrv::algos::Observation { degree: g.degree(at), arrival_port: arrival, local_clock: t };
        let x = a.step(&obs);
        assert_eq!(x, b.step(&obs));
        match x {
            symrv::algos::Action::Move(p) => {
                let (w, q) = g.port_target(at, p);
                at = w;
                arrival = Some(q);
            }
            symrv::algos::Action::Wait => arrival = None,
        }
    }
}

#[test]
fn programs_are_deterministic_under_identical_observations() {
    let seq = Arc::new(verified()[3].clone());
    let g = gen_oriented_ring(4).unwrap();
    lockstep(&g, universal_program(provider(&g)), universal_program(provider(&g)), 5000);
    lockstep(
        &g,
        asymmrv_ds_program(4, 1, seq.clone()).unwrap(),
        asymmrv_ds_program(4, 1, seq.clone()).unwrap(),
        5000,
    );
    let params = PhaseParams { n: 4, d: 2, delta: 3 };
    lockstep(&g, symmrv_program(params, seq.clone()).unwrap(), symmrv_program(params, seq).unwrap(), 5000);
}
