//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use symrv::algos::{
    pair_f, pair_g, pair_g_inv, symmrv_bound, symmrv_program, universal_program, MoveAlways, PhaseParams,
};
use symrv::graph::{
    enumerate_graphs, gen_complete_tree, gen_oriented_torus, gen_qh, gen_qhat, gen_sym_tree, shrink,
    shrink_oracle, view_classes, z_set, Compass, PortGraph, RootedTree, Stic,
};
use symrv::sim::{
    batch, instances_for, run, solo_run, AlgoChoice, BatchConfig, BatchResult, ComplexityReport, RunConfig,
    INFEASIBLE_PROBE_BUDGET,
};
use symrv::uxs::{find_uxs, instance_seq, UxsProvider, UxsSpec};

const MAX_N: usize = 4;
const MAX_DELTA: u64 = 4;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

struct Ctx {
    graphs: Vec<PortGraph>,
    verified: Vec<UxsSpec>,
    sweep: Vec<BatchResult>,
}

fn corpus() -> Vec<PortGraph> {
    (2..=MAX_N).flat_map(|n| enumerate_graphs(n).unwrap()).collect()
}

/// Ordered pairs of distinct symmetric nodes with their Shrink.
fn symmetric_pairs(graphs: &[PortGraph]) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for (gi, g) in graphs.iter().enumerate() {
        let classes = view_classes(g);
        for u in g.nodes() {
            for v in g.nodes() {
                if u != v && classes.class_of[u] == classes.class_of[v] {
                    out.push((gi, u, v, shrink(g, u, v)));
                }
            }
        }
    }
    out
}

fn seq_for(ctx: &Ctx, n: usize) -> Arc<UxsSpec> {
    Arc::new(ctx.verified[n - 1].clone())
}

fn c1_feasibility(ctx: &Ctx) -> Verdict {
    let (mut feasible, mut met, mut wrong) = (0, 0, Vec::new());
    for r in &ctx.sweep {
        feasible += r.feasible as u64;
        met += r.met as u64;
        if r.met != r.feasible {
            wrong.push(r.instance_id);
        }
        // an unmet probe must have run its whole budget
        if !r.feasible && r.rounds_executed != INFEASIBLE_PROBE_BUDGET {
            wrong.push(r.instance_id);
        }
    }
    verdict(
        wrong.is_empty(),
        format!(
            "{} instances on {} graphs, {feasible} feasible, {met} met, {} disagreements",
            ctx.sweep.len(),
            ctx.graphs.len(),
            wrong.len()
        ),
    )
}

fn c2_intro_example() -> Verdict {
    let k2 = symrv::graph::gen_k2();
    let rep = run(&k2, &Stic::new(0, 1, 3), || MoveAlways, &RunConfig::new(100)).unwrap();
    let o = rep.outcome;
    verdict(
        o.met && o.meet_round_global == Some(3),
        format!("met={} meet_round_global={:?}", o.met, o.meet_round_global),
    )
}

fn c3_shrink_oracle(ctx: &Ctx) -> Verdict {
    let bad: usize = ctx
        .graphs
        .par_iter()
        .map(|g| {
            let n = g.node_count();
            let mut bad = 0;
            for u in g.nodes() {
                for v in g.nodes() {
                    if shrink(g, u, v) != shrink_oracle(g, u, v, n * n) {
                        bad += 1;
                    }
                }
            }
            bad
        })
        .sum();
    let pairs: usize = ctx.graphs.iter().map(|g| g.node_count().pow(2)).sum();
    verdict(bad == 0, format!("{pairs} node pairs, {bad} disagreements"))
}

fn c4_shrink_families() -> Verdict {
    let torus = gen_oriented_torus(4, 4).unwrap();
    let torus_bad = torus
        .nodes()
        .flat_map(|u| torus.nodes().map(move |v| (u, v)))
        .filter(|&(u, v)| shrink(&torus, u, v) != torus.bfs_dist(u, v))
        .count();

    let mut trees: Vec<RootedTree> = Vec::new();
    for height in 1..=4 {
        for branching in 1..=3 {
            trees.push(gen_complete_tree(branching, height).unwrap());
        }
    }
    // irregular shapes and port rotations
    trees.push(RootedTree::from_parents(&[0, 0, 0, 1, 1, 2, 3, 6], &[0, 1, 2, 1, 0, 0, 1]).unwrap());
    trees.push(RootedTree::from_parents(&[0, 0, 1, 2, 3], &[0, 1, 1, 0, 0]).unwrap());
    trees.push(RootedTree::from_parents(&[0, 0, 0, 0, 1, 2, 3, 4, 4], &[1, 2, 0, 1, 1, 0, 0, 0, 0]).unwrap());
    let (mut pairs, mut tree_bad, mut max_dist) = (0, 0, 0);
    for t in &trees {
        if t.height() > 4 {
            continue;
        }
        let st = gen_sym_tree(t).unwrap();
        let classes = view_classes(&st.graph);
        for u in st.graph.nodes() {
            for v in st.graph.nodes() {
                if u != v && classes.class_of[u] == classes.class_of[v] {
                    pairs += 1;
                    max_dist = max_dist.max(st.graph.bfs_dist(u, v));
                    if shrink(&st.graph, u, v) != 1 {
                        tree_bad += 1;
                    }
                }
            }
        }
    }
    verdict(
        torus_bad == 0 && tree_bad == 0 && pairs > 0,
        format!(
            "torus 4x4: {torus_bad} of 256 pairs differ from distance; \
             {} symmetric trees: {pairs} symmetric pairs (distance up to {max_dist}), {tree_bad} with Shrink != 1",
            trees.len()
        ),
    )
}

fn c5_symmrv(ctx: &Ctx, sym: &[(usize, usize, usize, usize)]) -> Verdict {
    let cases: Vec<_> = sym
        .iter()
        .flat_map(|&(gi, u, v, s)| (s as u64..=MAX_DELTA).map(move |d| (gi, u, v, s as u64, d)))
        .collect();
    let failures: Vec<String> = cases
        .par_iter()
        .filter_map(|&(gi, u, v, s, delta)| {
            let g = &ctx.graphs[gi];
            let n = g.node_count();
            let seq = seq_for(ctx, n);
            let params = PhaseParams { n: n as u64, d: s, delta };
            let bound = symmrv_bound(n as u64, s, delta, seq.len() as u64);
            let rep = run(
                g,
                &Stic::new(u, v, delta),
                || symmrv_program(params, seq.clone()).unwrap(),
                &RunConfig::new(bound),
            )
            .unwrap();
            let durations: Vec<Option<u64>> = [u, v]
                .iter()
                .map(|&x| {
                    solo_run(g, x, symmrv_program(params, seq.clone()).unwrap(), bound + 1)
                        .unwrap()
                        .finished_at
                })
                .collect();
            let within = durations.iter().all(|d| matches!(d, Some(t) if *t <= bound));
            (!rep.outcome.met || !within)
                .then(|| format!("graph {gi} ({u},{v}) delta {delta}: met={} durations={durations:?}", rep.outcome.met))
        })
        .collect();
    verdict(
        failures.is_empty(),
        match failures.first() {
            None => format!("{} symmetric configurations met within the bound", cases.len()),
            Some(f) => format!("{} of {} failed, first: {f}", failures.len(), cases.len()),
        },
    )
}

fn c6_infeasible(ctx: &Ctx, sym: &[(usize, usize, usize, usize)]) -> Verdict {
    let cases: Vec<_> = sym
        .iter()
        .flat_map(|&(gi, u, v, s)| (0..s as u64).map(move |d| (gi, u, v, d)))
        .collect();
    let runs: Vec<(bool, u64)> = cases
        .par_iter()
        .flat_map_iter(|&(gi, u, v, delta)| {
            let g = &ctx.graphs[gi];
            let n = g.node_count() as u64;
            let seq = seq_for(ctx, n as usize);
            let provider = Arc::new(UxsProvider::new(ctx.verified.clone(), instance_seq(g)));
            let stic = Stic::new(u, v, delta);
            let cfg = RunConfig::new(INFEASIBLE_PROBE_BUDGET);
            let mut out = Vec::new();
            for d in 1..n {
                for hyp in d..=MAX_DELTA {
                    let params = PhaseParams { n, d, delta: hyp };
                    let rep = run(g, &stic, || symmrv_program(params, seq.clone()).unwrap(), &cfg).unwrap();
                    out.push((rep.outcome.met, rep.outcome.rounds_executed));
                }
            }
            let rep = run(g, &stic, || universal_program(provider.clone()), &cfg).unwrap();
            out.push((rep.outcome.met, rep.outcome.rounds_executed));
            out
        })
        .collect();
    let met = runs.iter().filter(|r| r.0).count();
    let short = runs.iter().filter(|r| r.1 != INFEASIBLE_PROBE_BUDGET).count();
    verdict(
        met == 0 && short == 0 && !cases.is_empty(),
        format!(
            "{} configurations with delay below Shrink, {} probes of {INFEASIBLE_PROBE_BUDGET} rounds, {met} met, {short} cut short",
            cases.len(),
            runs.len()
        ),
    )
}

fn c7_qhat() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for h in 1..=3 {
        let q = gen_qhat(h).unwrap();
        let g = &q.graph;
        let regular = g.nodes().all(|v| g.degree(v) == 4);
        let ports_ok = g.edges().iter().all(|&(_, pu, _, pv)| {
            let (a, b) = (pu.min(pv), pu.max(pv));
            (a, b) == (Compass::N.port(), Compass::S.port()) || (a, b) == (Compass::E.port(), Compass::W.port())
        });
        let tree = gen_qh(h).unwrap();
        let leaves = tree.graph.nodes().filter(|&v| tree.graph.degree(v) == 1).count();
        let leaves_ok = leaves == 4 * 3usize.pow(h as u32 - 1);
        let one_class = view_classes(g).class_count == 1;
        let z_ok = match z_set(&q, 2) {
            Ok(z) => z.len() == 2 && z.iter().all(|&v| g.bfs_dist(q.root, v) == 2),
            Err(e) => {
                let ecc = g.nodes().map(|v| g.bfs_dist(q.root, v)).max().unwrap_or(0);
                notes.push(format!("h={h}: Z unavailable ({e}); root eccentricity is {ecc}"));
                false
            }
        };
        let ok = regular && ports_ok && leaves_ok && one_class && z_ok;
        pass &= ok;
        notes.push(format!(
            "h={h}: 4-regular={regular} ports={ports_ok} leaves={leaves} one-class={one_class} Z={z_ok}"
        ));
    }
    verdict(pass, notes.join("; "))
}

fn c8_pairing() -> Verdict {
    let mut round_trip = 0;
    let mut bad = 0;
    for x in 1..=20 {
        for y in 1..=20 {
            for z in 1..=20 {
                round_trip += 1;
                if pair_g_inv(pair_g(x, y, z).unwrap()).unwrap() != (x, y, z) {
                    bad += 1;
                }
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    let collisions = (1..=50u64)
        .flat_map(|x| (1..=50u64).map(move |y| pair_f(x, y).unwrap()))
        .filter(|&p| !seen.insert(p))
        .count();
    verdict(
        bad == 0 && collisions == 0,
        format!("{round_trip} triples, {bad} round-trip failures; f on [1..50]^2: {collisions} collisions"),
    )
}

fn c9_alignment(ctx: &Ctx) -> Verdict {
    let sym: Vec<_> = ctx.sweep.iter().filter(|r| r.symmetric).collect();
    let bad = sym.iter().filter(|r| !r.phases_aligned).count();
    verdict(
        bad == 0 && !sym.is_empty(),
        format!("{} symmetric configurations, {bad} with drifting phase boundaries", sym.len()),
    )
}

fn c10_report(ctx: &Ctx) -> Verdict {
    let provider = UxsProvider::new(ctx.verified.clone(), instance_seq(&ctx.graphs[0]));
    let rep = ComplexityReport::build(&ctx.graphs, &ctx.sweep, &provider).unwrap();
    let cells = (MAX_N - 1) * (MAX_DELTA as usize + 1);
    for r in &rep.rows {
        println!(
            "    n={} delta={} instances={} met={} max_meet={:?} mean_meet={:.1} budget={}",
            r.n,
            r.delta,
            r.instances,
            r.met,
            r.max_meet_round_later,
            r.mean_meet_round_later.unwrap_or(f64::NAN),
            r.budget_through_phase
        );
    }
    // phases whose hypotheses run neither procedure last zero rounds
    let empty = rep.phases.iter().filter(|p| p.duration == 0).count();
    verdict(
        rep.rows.len() == cells && rep.cumulative_monotone && rep.row_budgets_increasing,
        format!(
            "{} rows, {} phases ({empty} empty), cumulative budgets monotone={}, row budgets increasing={}",
            rep.rows.len(),
            rep.phases.len(),
            rep.cumulative_monotone,
            rep.row_budgets_increasing
        ),
    )
}

fn main() {
    let start = Instant::now();
    let graphs = corpus();
    let verified: Vec<UxsSpec> = (1..=MAX_N).map(|n| find_uxs(n, 10_000_000).unwrap()).collect();
    let instances = instances_for(&graphs, 0..=MAX_DELTA);
    let mut cfg = BatchConfig::new(AlgoChoice::Universal, verified.clone());
    cfg.jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut sweep = Vec::new();
    batch(&graphs, &instances, &cfg, &mut sweep).unwrap();
    let ctx = Ctx {
        graphs,
        verified,
        sweep,
    };
    let sym = symmetric_pairs(&ctx.graphs);

    type Check<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);
    let checks: Vec<Check> = vec![
        ("feasibility characterization", Box::new(|| c1_feasibility(&ctx))),
        ("K2 intro example", Box::new(c2_intro_example)),
        ("Shrink oracle equivalence", Box::new(|| c3_shrink_oracle(&ctx))),
        ("Shrink family claims", Box::new(c4_shrink_families)),
        ("SymmRV correctness and bound", Box::new(|| c5_symmrv(&ctx, &sym))),
        ("infeasibility below Shrink", Box::new(|| c6_infeasible(&ctx, &sym))),
        ("Q-hat structure", Box::new(c7_qhat)),
        ("pairing bijections", Box::new(c8_pairing)),
        ("phase alignment", Box::new(|| c9_alignment(&ctx))),
        ("complexity report", Box::new(|| c10_report(&ctx))),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in checks.iter().enumerate() {
        let v = check();
        println!(
            "criterion {:>2} {}: {} ({})",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            name,
            v.detail
        );
        if !v.pass {
            failed.push(i + 1);
        }
    }
    println!("acceptance finished in {:.1?}", start.elapsed());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
