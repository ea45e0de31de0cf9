//! The subcommands. Each returns a report and an exit code; usage and build
//! problems surface as `Usage` errors and map to exit code 2.

use std::sync::Arc;
use std::time::Instant;

use laforge_core::catalog::{mutate, mutation, Example, FAMILIES, MUTATIONS};
use laforge_core::group::SmoothMap;
use laforge_core::lie::LieAlgebra;
use laforge_core::matched::{
    assemble_unchecked, check_matched_pair, compare_pairs, extract_matched_pair, shifted_splitting, splitting_independence,
    MatchedPair, SplitDeriv, Splitting,
};
use laforge_core::numkit::{unit, Mat, Vector};
use laforge_core::report::{Kind, SuiteReport};

use crate::json::{matrix, vector, Node};
use crate::runner::{all_passed, run_suites, selectivity};
use crate::scenario::{ExampleSource, Scenario};

/// Default mutation size when neither the flag nor the scenario gives one.
pub const DEFAULT_MAGNITUDE: f64 = 0.1;
/// Round-trip residual accepted by `extract`.
pub const ROUND_TRIP_TOL: f64 = 1e-8;

#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<E: std::fmt::Display>(e: E) -> Usage {
    Usage(e.to_string())
}

pub struct Outcome {
    pub report: Node,
    pub code: i32,
}

fn finish(mut report: Node, passed: bool, started: Option<Instant>) -> Outcome {
    report.push("passed", passed);
    report.push("timing", started.map(|t| Node::obj().with("elapsed_ms", t.elapsed().as_secs_f64() * 1e3)));
    Outcome { report, code: if passed { 0 } else { 1 } }
}

pub fn scenario_node(sc: &Scenario) -> Node {
    let example = match &sc.example {
        ExampleSource::Catalog(spec) => Node::obj().with("family", spec.family.as_str()).with(
            "params",
            Node::Obj(spec.params.iter().map(|(k, v)| (k.clone(), Node::Num(*v))).collect()),
        ),
        ExampleSource::Inline(v) => Node::obj().with("inline", Node::from(v)),
    };
    let node = Node::obj()
        .with("example", example)
        .with("suites", sc.suites.iter().map(|s| s.as_str()).collect::<Vec<_>>())
        .with("samples", sc.samples)
        .with("seed", sc.seed)
        .with("fd_step", sc.fd_step)
        .with("tol", sc.tol)
        .with("thresholds", Node::obj().with("exact", sc.thresholds.exact).with("fd", sc.thresholds.fd));
    match &sc.mutation {
        Some(m) => node.with("mutation", m.as_str()).with("magnitude", sc.magnitude.unwrap_or(DEFAULT_MAGNITUDE)),
        None => node,
    }
}

pub fn suite_node(r: &SuiteReport) -> Node {
    let entries = r
        .entries
        .iter()
        .map(|e| {
            Node::obj()
                .with("name", e.name.as_str())
                .with("law", e.law.as_str())
                .with("kind", if e.kind == Kind::Fd { "fd" } else { "exact" })
                .with("applicable", e.applicable)
                .with("residual", e.residual)
                .with("threshold", e.threshold)
                .with("passed", e.passed)
                .with("worst", e.worst.as_str())
        })
        .collect::<Vec<_>>();
    Node::obj().with("suite", r.suite.as_str()).with("passed", r.passed()).with("entries", entries)
}

fn header(command: &str, sc: &Scenario) -> Node {
    Node::obj().with("tool", "laforge").with("command", command).with("scenario", scenario_node(sc))
}

pub fn list_examples() -> Node {
    let families = FAMILIES
        .iter()
        .map(|f| {
            let params = f
                .params
                .iter()
                .map(|p| Node::obj().with("name", p.name).with("default", p.default).with("doc", p.doc))
                .collect::<Vec<_>>();
            Node::obj().with("name", f.name).with("doc", f.doc).with("params", params)
        })
        .collect::<Vec<_>>();
    let pairs = |l: &[(&str, &str)]| l.iter().map(|(s, e)| format!("{s}/{e}")).collect::<Vec<_>>();
    let mutations = MUTATIONS
        .iter()
        .map(|m| {
            Node::obj()
                .with("name", m.name)
                .with("doc", m.doc)
                .with(
                    "host",
                    Node::obj().with("family", m.host_family).with(
                        "params",
                        Node::Obj(m.host_params.iter().map(|(k, v)| (k.to_string(), Node::Num(*v))).collect()),
                    ),
                )
                .with("advertised", pairs(m.advertised))
                .with("collateral", pairs(m.collateral))
        })
        .collect::<Vec<_>>();
    Node::obj().with("tool", "laforge").with("command", "list-examples").with("families", families).with("mutations", mutations)
}

/// The scenario's pair, with its mutation applied when one is named.
fn checked_pair(sc: &Scenario, ex: &Example) -> Result<MatchedPair, Usage> {
    match sc.mutation.as_deref() {
        Some(name) => mutate(&ex.mp, name, sc.magnitude.unwrap_or(DEFAULT_MAGNITUDE)).map_err(usage),
        None => Ok(ex.mp.clone()),
    }
}

pub fn check(sc: &Scenario, timing: bool) -> Result<Outcome, Usage> {
    let started = timing.then(Instant::now);
    let ex = sc.build().map_err(Usage)?;
    let cfg = sc.config();
    let samples = ex.samples(sc.samples);
    let mp = checked_pair(sc, &ex)?;
    let reps = run_suites(&sc.suites, &ex, &mp, &samples, &cfg).map_err(usage)?;
    let report = header("check", sc).with("suites", reps.iter().map(suite_node).collect::<Vec<_>>());
    Ok(finish(report, all_passed(&reps), started))
}

fn bracket_node(h: &LieAlgebra) -> Node {
    let n = h.dim();
    Node::Arr((0..n).map(|i| Node::Arr((0..n).map(|j| vector(&h.basis_bracket(i, j))).collect())).collect())
}

pub fn assemble(sc: &Scenario, timing: bool) -> Result<Outcome, Usage> {
    let started = timing.then(Instant::now);
    let ex = sc.build().map_err(Usage)?;
    let cfg = sc.config();
    let samples = ex.samples(sc.samples);
    let mp = checked_pair(sc, &ex)?;
    let axioms = check_matched_pair(&mp, &samples, &cfg).map_err(usage)?;
    let mut report = header("assemble", sc);
    if !axioms.passed() {
        report.push("suites", vec![suite_node(&axioms)]);
        return Ok(finish(report, false, started));
    }
    let lg = assemble_unchecked(&mp).map_err(usage)?;
    let (k, h) = (lg.k(), lg.h());
    let n = k + h;
    let points = samples
        .iter()
        .map(|g| {
            let mut brackets = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    let (a, b) = (unit(n, i), unit(n, j));
                    let (z, y) = lg.const_bracket(g, &a.rows(0, k).into(), &a.rows(k, h).into(), &b.rows(0, k).into(), &b.rows(k, h).into());
                    let mut v = Vector::zeros(n);
                    v.rows_mut(0, k).copy_from(&z);
                    v.rows_mut(k, h).copy_from(&y);
                    brackets.push(Node::obj().with("i", i).with("j", j).with("value", vector(&v)));
                }
            }
            Node::obj().with("g", matrix(g)).with("anchor", matrix(&lg.anchor.at(g))).with("brackets", brackets)
        })
        .collect::<Vec<_>>();
    report.push(
        "la_group",
        Node::obj()
            .with("k", k)
            .with("h", h)
            .with("boundary", matrix(&lg.ruth.partial))
            .with("h_bracket", bracket_node(&lg.h_bracket))
            .with("samples", points),
    );
    let morph = run_suites(&["morphisms".to_string()], &ex, &mp, &samples, &cfg).map_err(usage)?;
    let passed = all_passed(&morph);
    let mut suites = vec![suite_node(&axioms)];
    suites.extend(morph.iter().map(suite_node));
    report.push("suites", suites);
    Ok(finish(report, passed, started))
}

/// `canonical`, `shifted:z0,z1,…` (φ_g(y) = s(g)(Σy)z, unit-extending) or
/// `constant:z0,…` (φ_g(y) = (Σy)z, which does not extend the unit).
pub fn parse_splitting(text: &str, mp: &MatchedPair) -> Result<Splitting, Usage> {
    let (k, h) = (mp.k(), mp.h());
    let parse_z = |s: &str| -> Result<Vector, Usage> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| Usage(format!("splitting vector entry {t:?}: {e}"))))
            .collect::<Result<_, _>>()?;
        if v.len() != k {
            return Err(Usage(format!("splitting vector needs {k} entries, got {}", v.len())));
        }
        Ok(Vector::from_vec(v))
    };
    if text == "canonical" {
        return Ok(Splitting::canonical(k, h));
    }
    if let Some(rest) = text.strip_prefix("shifted:") {
        return Ok(shifted_splitting(mp.chart(), &parse_z(rest)?, h));
    }
    if let Some(rest) = text.strip_prefix("constant:") {
        let m = laforge_core::numkit::as_mat(&parse_z(rest)?) * Mat::from_element(1, h, 1.0);
        let zero = Mat::zeros(k, h);
        let dphi: SplitDeriv = Arc::new(move |_, _| zero.clone());
        return Ok(Splitting { phi: SmoothMap::constant(1, m), dphi: Some(dphi) });
    }
    Err(Usage(format!("unknown splitting {text:?}; use canonical, shifted:<z> or constant:<z>")))
}

fn pair_node(mp: &MatchedPair, samples: &[Mat]) -> Node {
    let ell = laforge_core::matched::derive_ell(mp, laforge_core::matched::DATA_FD);
    let points = samples
        .iter()
        .map(|g| {
            Node::obj()
                .with("g", matrix(g))
                .with("delta_h", matrix(&mp.ruth.delta_h.at(g)))
                .with("delta_k", matrix(&mp.ruth.delta_k.at(g)))
                .with("alpha", matrix(&mp.alpha.at(g)))
                .with("omega", matrix(&mp.omega.at(g)))
                .with("ell", matrix(&ell.at(g)))
        })
        .collect::<Vec<_>>();
    Node::obj()
        .with("k", mp.k())
        .with("h", mp.h())
        .with("boundary", matrix(&mp.ruth.partial))
        .with("rho_e", matrix(&mp.rho_e))
        .with("ell_e", matrix(&mp.ell_e))
        .with("h_bracket", bracket_node(&mp.h_bracket))
        .with("samples", points)
}

pub fn extract(sc: &Scenario, splitting: &str, timing: bool) -> Result<Outcome, Usage> {
    let started = timing.then(Instant::now);
    let ex = sc.build().map_err(Usage)?;
    let cfg = sc.config();
    let samples = ex.samples(sc.samples);
    let mp = checked_pair(sc, &ex)?;
    let sigma = parse_splitting(splitting, &mp)?;
    let lg = assemble_unchecked(&mp).map_err(usage)?;
    let pair = extract_matched_pair(&lg, &sigma, &cfg).map_err(usage)?;
    let canonical = extract_matched_pair(&lg, &Splitting::canonical(mp.k(), mp.h()), &cfg).map_err(usage)?;
    // re-assemble the extracted pair and read it back in its own coordinates
    let again = assemble_unchecked(&pair)
        .and_then(|lg2| extract_matched_pair(&lg2, &Splitting::canonical(pair.k(), pair.h()), &cfg))
        .map_err(usage)?;
    let round = compare_pairs(&pair, &again, &samples);
    let round_ok = round.iter().all(|(_, r)| *r <= ROUND_TRIP_TOL);
    let indep = splitting_independence(&canonical, &pair, &samples, &cfg).map_err(usage)?;
    let mut report = header("extract", sc).with("splitting", splitting).with("pair", pair_node(&pair, &samples));
    report.push(
        "round_trip",
        Node::obj()
            .with("tolerance", ROUND_TRIP_TOL)
            .with("residuals", Node::Obj(round.iter().map(|(k, v)| (k.to_string(), Node::Num(*v))).collect()))
            .with("passed", round_ok),
    );
    report.push("suites", vec![suite_node(&indep)]);
    let passed = round_ok && indep.passed();
    Ok(finish(report, passed, started))
}

pub fn mutate_check(sc: &Scenario, timing: bool) -> Result<Outcome, Usage> {
    let started = timing.then(Instant::now);
    let name = sc.mutation.as_deref().ok_or_else(|| Usage("mutate-check needs --mutation".into()))?;
    let info = mutation(name).map_err(usage)?;
    let magnitude = sc.magnitude.unwrap_or(DEFAULT_MAGNITUDE);
    let ex = sc.build().map_err(Usage)?;
    let cfg = sc.config();
    let samples = ex.samples(sc.samples);
    let mutated = mutate(&ex.mp, name, magnitude).map_err(usage)?;
    let base = run_suites(&sc.suites, &ex, &ex.mp, &samples, &cfg).map_err(usage)?;
    let after = run_suites(&sc.suites, &ex, &mutated, &samples, &cfg).map_err(usage)?;
    let sel = selectivity(&base, &after, info);
    let pairs = |l: &[(&str, &str)]| l.iter().map(|(s, e)| format!("{s}/{e}")).collect::<Vec<_>>();
    let shifts = sel
        .shifts
        .iter()
        .map(|s| {
            Node::obj()
                .with("suite", s.suite.as_str())
                .with("entry", s.entry.as_str())
                .with("before", s.before)
                .with("after", s.after)
                .with("failed", s.failed)
                .with("advertised", s.advertised)
        })
        .collect::<Vec<_>>();
    let report = header("mutate-check", sc)
        .with(
            "mutation",
            Node::obj().with("name", name).with("magnitude", magnitude).with("doc", info.doc),
        )
        .with("base", base.iter().map(suite_node).collect::<Vec<_>>())
        .with("suites", after.iter().map(suite_node).collect::<Vec<_>>())
        .with(
            "selectivity",
            Node::obj()
                .with("advertised", pairs(info.advertised))
                .with("collateral", pairs(info.collateral))
                .with("failing", sel.failing())
                .with("missed", sel.missed.clone())
                .with("leaked", sel.leaked.clone())
                .with("isolated", sel.isolated())
                .with("shifts", shifts),
        );
    Ok(finish(report, all_passed(&after), started))
}
