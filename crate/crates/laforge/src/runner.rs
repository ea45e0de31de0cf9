//! Runs named suites on an example and compares runs before and after a
//! mutation.

use laforge_core::auth::{check_auth, test_sections};
use laforge_core::catalog::{Example, MutationInfo};
use laforge_core::error::Error;
use laforge_core::matched::{
    assemble_unchecked, check_matched_pair, derive_core_bracket, derived_structures, to_auth, verify_morphisms,
    MatchedPair, DATA_FD,
};
use laforge_core::numkit::{max_abs_vec, unit, Mat, Vector};
use laforge_core::report::{CheckConfig, Entry, Kind, MaxTracker, SuiteReport};
use laforge_core::ruth::{check_induced_actions, check_ruth, groupoid_axiom_suite, induced_actions, isotropy_check, orbit_membership};

/// Residual changes below this are treated as untouched by a mutation.
pub const ISOLATION: f64 = 1e-9;

/// Runs one suite. A violated precondition becomes a single failing entry so
/// that a defect which makes a suite inapplicable is still reported.
pub fn run_suite(name: &str, ex: &Example, mp: &MatchedPair, samples: &[Mat], cfg: &CheckConfig) -> Result<SuiteReport, Error> {
    let out = match name {
        "ruth" => check_ruth(&mp.ruth, samples, cfg),
        "groupoid" => groupoid_axiom_suite(&mp.ruth, samples, cfg),
        "auth" => derive_core_bracket(mp, DATA_FD).and_then(|core| {
            let a = to_auth(mp, core, DATA_FD);
            check_auth(&a, samples, &test_sections(mp.chart(), mp.k()), cfg)
        }),
        "matched" => check_matched_pair(mp, samples, cfg),
        "morphisms" => assemble_unchecked(mp).and_then(|lg| verify_morphisms(&lg, samples, cfg)),
        "derived" => derived_structures(mp, samples, cfg),
        "orbit" => orbit_suite(mp, samples, cfg),
        "isotropy" => match &ex.isotropy {
            Some(iso) => isotropy_check(&mp.ruth, &iso.y, &iso.z, samples, cfg),
            None => {
                let mut rep = SuiteReport::new("isotropy");
                rep.entries.push(Entry::not_applicable(
                    "isotropy",
                    "isotropy group of a point with a chosen section",
                    Kind::Exact,
                    "the example ships no isotropy data",
                    &cfg.thresholds,
                ));
                Ok(rep)
            }
        },
        other => return Err(Error::Unknown(format!("suite {other}"))),
    };
    match out {
        Err(Error::Precondition(msg)) => {
            let mut rep = SuiteReport::new(name);
            let mut e = Entry::boolean("precondition", "the suite's inputs satisfy its preconditions", false, msg);
            e.residual = f64::INFINITY;
            rep.entries.push(e);
            Ok(rep)
        }
        other => other,
    }
}

/// Induced actions on coker ∂ and ker ∂, and orbit membership of points
/// moved by a sampled group element and a core vector.
pub fn orbit_suite(mp: &MatchedPair, samples: &[Mat], cfg: &CheckConfig) -> Result<SuiteReport, Error> {
    let r = &mp.ruth;
    let ia = induced_actions(r, cfg.tol)?;
    let mut rep = check_induced_actions(r, &ia, samples, cfg);
    rep.suite = "orbit".into();
    let (h, k) = (r.h_dim, r.k_dim);
    let z = Vector::from_element(k, 1.0);
    let mut found = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        for yi in 0..h {
            let y = unit(h, yi);
            let target = r.delta_h.at(g) * &y + &r.partial * &z;
            let d = orbit_membership(r, &y, &target, samples, cfg.tol)?;
            let res = match d.witness {
                Some((_, w, c)) => max_abs_vec(&(r.delta_h.at(&w) * &y + &r.partial * c - &target)),
                None => f64::INFINITY,
            };
            found.update(res, || format!("g{gi},y{yi}"));
        }
    }
    rep.entries.push(Entry::from_max(
        "orbit-witness",
        "Δ^ℏ_g y + ∂z is found in the orbit of y with a witness (g', z')",
        Kind::Exact,
        &found,
        &cfg.thresholds,
    ));
    Ok(rep)
}

pub fn run_suites(names: &[String], ex: &Example, mp: &MatchedPair, samples: &[Mat], cfg: &CheckConfig) -> Result<Vec<SuiteReport>, Error> {
    names.iter().map(|n| run_suite(n, ex, mp, samples, cfg)).collect()
}

pub fn all_passed(reps: &[SuiteReport]) -> bool {
    reps.iter().all(SuiteReport::passed)
}

/// One entry's residual before and after a mutation.
#[derive(Debug, Clone, PartialEq)]
pub struct Shift {
    pub suite: String,
    pub entry: String,
    pub before: f64,
    pub after: f64,
    pub failed: bool,
    pub advertised: bool,
    pub collateral: bool,
}

impl Shift {
    pub fn delta(&self) -> f64 {
        let d = (self.after - self.before).abs();
        if d.is_nan() && self.after.to_bits() != self.before.to_bits() {
            f64::INFINITY
        } else if d.is_nan() {
            0.0
        } else {
            d
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selectivity {
    pub shifts: Vec<Shift>,
    /// Advertised entries among the suites run that did not fail.
    pub missed: Vec<String>,
    /// Entries outside the advertised set that failed or moved by ≥ ISOLATION.
    pub leaked: Vec<String>,
}

impl Selectivity {
    /// Every advertised entry fails and nothing else moves.
    pub fn isolated(&self) -> bool {
        self.missed.is_empty() && self.leaked.is_empty()
    }

    pub fn failing(&self) -> Vec<String> {
        self.shifts.iter().filter(|s| s.failed).map(|s| format!("{}/{}", s.suite, s.entry)).collect()
    }
}

pub fn selectivity(base: &[SuiteReport], mutated: &[SuiteReport], info: &MutationInfo) -> Selectivity {
    let is_in = |list: &[(&str, &str)], s: &str, e: &str| list.iter().any(|(a, b)| *a == s && *b == e);
    let mut shifts = Vec::new();
    for (b, m) in base.iter().zip(mutated) {
        for me in &m.entries {
            let before = b.get(&me.name).map_or(0.0, |e| e.residual);
            shifts.push(Shift {
                suite: m.suite.clone(),
                entry: me.name.clone(),
                before,
                after: me.residual,
                failed: !me.passed,
                advertised: is_in(info.advertised, &m.suite, &me.name),
                collateral: is_in(info.collateral, &m.suite, &me.name),
            });
        }
    }
    let missed = info
        .advertised
        .iter()
        .filter(|(s, e)| {
            mutated.iter().any(|r| r.suite == *s) && !shifts.iter().any(|x| x.suite == *s && x.entry == *e && x.failed)
        })
        .map(|(s, e)| format!("{s}/{e}"))
        .collect();
    let leaked = shifts
        .iter()
        .filter(|x| !x.advertised && (x.failed || x.delta() >= ISOLATION))
        .map(|x| format!("{}/{}", x.suite, x.entry))
        .collect();
    Selectivity { shifts, missed, leaked }
}
