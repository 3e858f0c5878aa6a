use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use serde_json::json;

use symrv::algos::{
    asymmrv_ds_program, symmrv_program, universal_program, Action, AgentProgram, MoveAlways, Observation,
    PhaseParams, WaitForever,
};
use symrv::graph::{
    feasibility_threshold, gen_complete_tree, gen_k2, gen_oriented_ring, gen_oriented_torus,
    gen_path, gen_qh, gen_qhat, gen_sym_tree, shrink, symmetric, to_dot, to_json_string, view_classes, z_set,
    Compass, GraphIter, PortGraph, QHat, DEFAULT_ENUMERATION_CAP,
};
use symrv::sim::{
    batch, instances_for, AlgoChoice, BatchConfig, BatchResult, ComplexityReport, CsvSink, Instance,
    JsonlSink, ResultSink, RunConfig,
};
use symrv::uxs::{covers, instance_seq, UxsCache, UxsProvider, UxsSpec};

use crate::{io, usage, AnalyzeArgs, BenchAlgo, BenchArgs, Failure, Family, FamilyParams, GenArgs, GraphFormat,
    OutFormat, RunAlgo, RunArgs, Stics, UxsArgs, UxsMode};

type CmdResult = Result<(), Failure>;

enum Generated {
    Plain(PortGraph),
    Q(QHat),
}

impl Generated {
    fn graph(&self) -> &PortGraph {
        match self {
            Generated::Plain(g) => g,
            Generated::Q(q) => &q.graph,
        }
    }
}

fn need(name: &str, v: Option<usize>) -> Result<usize, Failure> {
    v.ok_or_else(|| usage(anyhow!("this family needs --{name}")))
}

fn generate(family: Family, p: &FamilyParams) -> Result<Generated, Failure> {
    let g = match family {
        Family::K2 => gen_k2(),
        Family::Path => gen_path(need("m", p.m)?).map_err(usage)?,
        Family::Ring => gen_oriented_ring(need("m", p.m)?).map_err(usage)?,
        Family::Torus => gen_oriented_torus(need("a", p.a)?, need("b", p.b)?).map_err(usage)?,
        Family::Tree => gen_complete_tree(p.branching, p.height).map_err(usage)?.graph,
        Family::SymTree => {
            let t = gen_complete_tree(p.branching, p.height).map_err(usage)?;
            gen_sym_tree(&t).map_err(usage)?.graph
        }
        Family::Qh => return Ok(Generated::Q(gen_qh(need("h", p.h)?).map_err(usage)?)),
        Family::Qhat => {
            let q = gen_qhat(need("h", p.h)?).map_err(usage)?;
            if q.graph.validate().is_err() {
                return Err(usage(anyhow!(
                    "qhat with h = 1 has self-loops and parallel edges, which graph files cannot hold"
                )));
            }
            return Ok(Generated::Q(q));
        }
    };
    Ok(Generated::Plain(g))
}

fn qhat_meta(q: &QHat) -> serde_json::Value {
    let leaves: BTreeMap<String, &[usize]> = Compass::ALL
        .iter()
        .map(|&c| (format!("{c:?}"), q.leaves_of(c)))
        .collect();
    let z: BTreeMap<String, Vec<usize>> = (2..=q.h)
        .step_by(2)
        .filter_map(|d| z_set(q, d).ok().map(|z| (d.to_string(), z)))
        .collect();
    json!({ "h": q.h, "root": q.root, "leaves": leaves, "z": z })
}

fn write_out(path: Option<&Path>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())).map_err(io),
        None => io::stdout().write_all(text.as_bytes()).map_err(io),
    }
}

pub fn gen(a: GenArgs) -> CmdResult {
    let generated = generate(a.family, &a.params)?;
    let text = match a.format {
        GraphFormat::Json => to_json_string(generated.graph()) + "\n",
        GraphFormat::Dot => to_dot(generated.graph()),
    };
    write_out(a.out.as_deref(), &text)?;
    if let (Generated::Q(q), Family::Qhat) = (&generated, a.family) {
        let meta = a
            .meta
            .clone()
            .or_else(|| a.out.as_ref().map(|o| PathBuf::from(format!("{}.meta.json", o.display()))));
        if let Some(m) = meta {
            let text = serde_json::to_string_pretty(&qhat_meta(q)).map_err(io)? + "\n";
            write_out(Some(&m), &text)?;
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<PortGraph, Failure> {
    let f = File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(io)?;
    symrv::graph::from_json(io::BufReader::new(f))
        .with_context(|| format!("reading {}", path.display()))
        .map_err(io)
}

fn check_node(g: &PortGraph, v: usize) -> Result<(), Failure> {
    g.check_node(v).map_err(usage)
}

pub fn analyze(a: AnalyzeArgs) -> CmdResult {
    let g = load(&a.graph)?;
    let table = view_classes(&g);
    let mut report = json!({
        "nodes": g.node_count(),
        "classes": table.class_count,
        "class_of": table.class_of,
    });
    match (a.u, a.v) {
        (Some(u), Some(v)) => {
            check_node(&g, u)?;
            check_node(&g, v)?;
            report["u"] = json!(u);
            report["v"] = json!(v);
            report["symmetric"] = json!(symmetric(&g, u, v));
            report["distance"] = json!(g.bfs_dist(u, v));
            report["shrink"] = json!(shrink(&g, u, v));
            report["delta_min"] = json!(feasibility_threshold(&g, u, v));
        }
        (None, None) => {}
        _ => return Err(usage(anyhow!("give both nodes or neither"))),
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(io)?);
    } else {
        for (k, v) in report.as_object().expect("object") {
            println!("{k}: {v}");
        }
    }
    Ok(())
}

fn verified_specs(cache: &UxsCache, cap: usize) -> Result<Vec<UxsSpec>, Failure> {
    if cap > DEFAULT_ENUMERATION_CAP {
        return Err(usage(anyhow!("--verified-cap is at most {DEFAULT_ENUMERATION_CAP}")));
    }
    (1..=cap)
        .map(|n| cache.find_uxs(n, symrv::uxs::DEFAULT_SEARCH_BUDGET))
        .collect::<Result<_, _>>()
        .map_err(io)
}

/// The programs `run` can drive, behind one type.
enum Program {
    Universal(symrv::algos::Universal),
    Symm(symrv::algos::Standalone<symrv::algos::SymmRv>),
    Asymm(symrv::algos::Standalone<symrv::algos::AsymmRvDs>),
    Move(MoveAlways),
    Wait(WaitForever),
}

impl Program {
    fn inner(&self) -> &dyn AgentProgram {
        match self {
            Program::Universal(p) => p,
            Program::Symm(p) => p,
            Program::Asymm(p) => p,
            Program::Move(p) => p,
            Program::Wait(p) => p,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn AgentProgram {
        match self {
            Program::Universal(p) => p,
            Program::Symm(p) => p,
            Program::Asymm(p) => p,
            Program::Move(p) => p,
            Program::Wait(p) => p,
        }
    }
}

impl AgentProgram for Program {
    fn step(&mut self, obs: &Observation) -> Action {
        self.inner_mut().step(obs)
    }
    fn idle_rounds(&self) -> u64 {
        self.inner().idle_rounds()
    }
    fn skip_idle(&mut self, rounds: u64) {
        self.inner_mut().skip_idle(rounds)
    }
    fn phase(&self) -> Option<u64> {
        self.inner().phase()
    }
    fn finished_at(&self) -> Option<u64> {
        self.inner().finished_at()
    }
}

pub fn run(a: RunArgs, cache: &UxsCache) -> CmdResult {
    let g = load(&a.graph)?;
    check_node(&g, a.u)?;
    check_node(&g, a.v)?;
    if a.u == a.v {
        return Err(usage(anyhow!("the two start nodes must differ")));
    }
    let verified = match a.uxs {
        UxsMode::Verified => verified_specs(cache, a.verified_cap)?,
        UxsMode::Instance => Vec::new(),
    };
    let provider = Arc::new(UxsProvider::new(verified, instance_seq(&g)));
    provider.check_against(&g).map_err(usage)?;
    let n = a.n.unwrap_or(g.node_count() as u64);
    let hyp_delta = a.hyp_delta.unwrap_or(a.delta);
    let seq = provider.sequence(n as usize);
    let params = PhaseParams {
        n,
        d: a.d.unwrap_or(shrink(&g, a.u, a.v).max(1) as u64),
        delta: hyp_delta,
    };
    // surface parameter errors before simulating
    match a.algo {
        RunAlgo::Symmrv => {
            symmrv_program(params, seq.clone()).map_err(usage)?;
        }
        RunAlgo::Asymmrv => {
            asymmrv_ds_program(n, hyp_delta, seq.clone()).map_err(usage)?;
        }
        _ => {}
    }
    let make = || match a.algo {
        RunAlgo::Universal => Program::Universal(universal_program(provider.clone())),
        RunAlgo::Symmrv => Program::Symm(symmrv_program(params, seq.clone()).expect("checked")),
        RunAlgo::Asymmrv => Program::Asymm(asymmrv_ds_program(n, hyp_delta, seq.clone()).expect("checked")),
        RunAlgo::MoveAlways => Program::Move(MoveAlways),
        RunAlgo::Wait => Program::Wait(WaitForever),
    };
    let mut cfg = RunConfig::new(a.budget);
    cfg.record_trace = a.trace.is_some();
    let report = symrv::sim::run(&g, &symrv::graph::Stic::new(a.u, a.v, a.delta), make, &cfg).map_err(usage)?;
    if let Some(path) = &a.trace {
        let f = File::create(path)
            .with_context(|| format!("creating {}", path.display()))
            .map_err(io)?;
        let mut w = BufWriter::new(f);
        symrv::sim::write_trace(&report.trace, &mut w)
            .and_then(|_| w.flush())
            .map_err(io)?;
    }
    println!("{}", serde_json::to_string_pretty(&report.outcome).map_err(io)?);
    Ok(())
}

pub fn uxs(a: UxsArgs, cache: &UxsCache) -> CmdResult {
    let spec = match (&a.n, &a.instance) {
        (Some(n), None) => {
            if *n == 0 || *n > DEFAULT_ENUMERATION_CAP {
                return Err(usage(anyhow!("--n must be in 1..={DEFAULT_ENUMERATION_CAP}")));
            }
            cache.find_uxs(*n, a.budget).map_err(|e| match e {
                symrv::uxs::UxsError::BudgetExhausted { .. } => usage(e),
                other => io(other),
            })?
        }
        (None, Some(path)) => {
            let g = load(path)?;
            let spec = instance_seq(&g);
            if !g.nodes().all(|u| covers(&g, u, &spec.sequence)) {
                return Err(Failure::Mismatch(anyhow!("instance sequence does not cover the graph")));
            }
            spec
        }
        _ => return Err(usage(anyhow!("give exactly one of --n and --instance"))),
    };
    let text = serde_json::to_string_pretty(&spec).map_err(io)? + "\n";
    if let Some(out) = &a.out {
        write_out(Some(out), &text)?;
    }
    if a.json {
        print!("{text}");
    } else {
        println!("n: {}", spec.n);
        println!("mode: {}", serde_json::to_value(spec.mode).map_err(io)?.as_str().unwrap_or(""));
        println!("M: {}", spec.len());
        println!("sequence: {:?}", spec.sequence);
        if a.instance.is_some() {
            println!("coverage: confirmed from all {} starts", spec.n);
        }
    }
    Ok(())
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<u64>, Failure> {
    let bad = || usage(anyhow!("delay range must look like `a..b` or `a`, got `{s}`"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo.trim(), hi.trim_start_matches('=').trim()),
        None => (s.trim(), s.trim()),
    };
    let lo: u64 = lo.parse().map_err(|_| bad())?;
    let hi: u64 = hi.parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn corpus(a: &BenchArgs) -> Result<(Vec<PortGraph>, Option<QHat>), Failure> {
    if let Some(n) = a.enumerate {
        let it = GraphIter::with_cap(n, DEFAULT_ENUMERATION_CAP).map_err(usage)?;
        let graphs = if a.dedup { it.dedup_isomorphic().collect() } else { it.collect() };
        return Ok((graphs, None));
    }
    if let Some(f) = a.family {
        return Ok(match generate(f, &a.params)? {
            Generated::Plain(g) => (vec![g], None),
            Generated::Q(q) => (vec![q.graph.clone()], Some(q)),
        });
    }
    let graphs = a.graph.iter().map(|p| load(p)).collect::<Result<Vec<_>, _>>()?;
    Ok((graphs, None))
}

pub fn bench(a: BenchArgs, cache: &UxsCache) -> CmdResult {
    let (graphs, qhat) = corpus(&a)?;
    let range = parse_range(&a.delta)?;
    let instances: Vec<Instance> = match a.stics {
        Stics::All => instances_for(&graphs, range),
        Stics::ZPairs => {
            let q = qhat
                .as_ref()
                .ok_or_else(|| usage(anyhow!("z-pairs needs --family qhat")))?;
            let mut out = Vec::new();
            for d in (2..=q.h).step_by(2) {
                for z in z_set(q, d).map_err(usage)? {
                    out.push(Instance {
                        id: out.len() as u64,
                        graph_id: 0,
                        u: q.root,
                        v: z,
                        delta: d as u64,
                    });
                }
            }
            out
        }
    };
    let algo = match a.algo.unwrap_or(match a.stics {
        Stics::ZPairs => BenchAlgo::SymmrvKnown,
        Stics::All => BenchAlgo::Universal,
    }) {
        BenchAlgo::Universal => AlgoChoice::Universal,
        BenchAlgo::SymmrvKnown => AlgoChoice::SymmRvKnown,
        BenchAlgo::MoveAlways => AlgoChoice::MoveAlways,
        BenchAlgo::Wait => AlgoChoice::Wait,
    };
    let verified = verified_specs(cache, a.verified_cap)?;
    let mut cfg = BatchConfig::new(algo, verified.clone());
    cfg.budget = a.budget;
    cfg.jobs = a.jobs;

    let mut collected: Vec<BatchResult> = Vec::new();
    struct Tee<'a> {
        inner: Box<dyn ResultSink + 'a>,
        keep: &'a mut Vec<BatchResult>,
    }
    impl ResultSink for Tee<'_> {
        fn write(&mut self, r: &BatchResult) -> io::Result<()> {
            self.keep.push(r.clone());
            self.inner.write(r)
        }
    }
    let writer: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p)
                .with_context(|| format!("creating {}", p.display()))
                .map_err(io)?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    };
    let inner: Box<dyn ResultSink> = match a.format {
        OutFormat::Jsonl => Box::new(JsonlSink(writer)),
        OutFormat::Csv => Box::new(CsvSink::new(writer)),
    };
    let mut sink = Tee {
        inner,
        keep: &mut collected,
    };
    let summary = batch(&graphs, &instances, &cfg, &mut sink).map_err(usage)?;
    drop(sink);
    if let Some(e) = &summary.first_sink_error {
        return Err(io(anyhow!("{} result writes failed, first: {e}", summary.sink_errors)));
    }
    eprintln!(
        "instances: {}, met: {}, mismatches: {}",
        summary.instances,
        summary.met,
        summary.mismatches.len()
    );
    if let Some(path) = &a.report {
        let fallback = graphs.first().map(instance_seq).unwrap_or_else(|| instance_seq(&gen_k2()));
        let provider = UxsProvider::new(verified, fallback);
        let report = ComplexityReport::build(&graphs, &collected, &provider).map_err(usage)?;
        let text = serde_json::to_string_pretty(&report).map_err(io)? + "\n";
        write_out(Some(path), &text)?;
    }
    if a.check_feasibility && !summary.mismatches.is_empty() {
        let shown: Vec<String> = summary.mismatches.iter().take(50).map(u64::to_string).collect();
        return Err(Failure::Mismatch(anyhow!(
            "{} instances disagree with feasibility: {}{}",
            summary.mismatches.len(),
            shown.join(", "),
            if summary.mismatches.len() > 50 { ", ..." } else { "" }
        )));
    }
    Ok(())
}
