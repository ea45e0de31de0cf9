//! Scenario files: which example to build, which suites to run, and the
//! numerical settings of the run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use laforge_core::catalog::{build_example, gauged, Example, ExampleSpec};
use laforge_core::group::{GroupChart, SmoothMap};
use laforge_core::lie::LieAlgebra;
use laforge_core::matched::MatchedPair;
use laforge_core::numkit::{Fd, Mat, Vector};
use laforge_core::report::{CheckConfig, Thresholds};
use laforge_core::ruth::Ruth;
use serde::Deserialize;
use serde_json::Value;

pub const SUITES: [&str; 8] = ["ruth", "groupoid", "auth", "matched", "morphisms", "derived", "orbit", "isotropy"];
pub const DEFAULT_SUITES: [&str; 5] = ["ruth", "groupoid", "matched", "morphisms", "derived"];
pub const DEFAULT_SAMPLES: usize = 5;

/// A scenario problem, located at a line of the file when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    example: RawExample,
    suites: Option<Vec<String>>,
    samples: Option<usize>,
    seed: Option<u64>,
    fd_step: Option<f64>,
    tol: Option<f64>,
    thresholds: Option<RawThresholds>,
    report_path: Option<PathBuf>,
    splitting: Option<String>,
    mutation: Option<String>,
    magnitude: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExample {
    family: Option<String>,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    inline: Option<Value>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    exact: Option<f64>,
    fd: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInline {
    group: String,
    h_bracket: Vec<Vec<Vec<f64>>>,
    k: usize,
    partial: Option<Vec<Vec<f64>>>,
    rho_e: Option<Vec<Vec<f64>>>,
    ell_e: Option<Vec<Vec<f64>>>,
    delta_h: Value,
    delta_k: Value,
    alpha: Value,
    #[serde(default)]
    curvature: Option<Value>,
    #[serde(default)]
    omega: Option<Value>,
    gauge: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub enum ExampleSource {
    Catalog(ExampleSpec),
    Inline(Value),
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub fd_step: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub report: Option<PathBuf>,
    pub mutation: Option<String>,
    pub magnitude: Option<f64>,
    pub splitting: Option<String>,
    /// LAFORGE_TOL, used only when neither the flag nor the file sets tol.
    pub env_tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub example: ExampleSource,
    pub suites: Vec<String>,
    pub samples: usize,
    pub seed: u64,
    pub fd_step: f64,
    pub tol: f64,
    pub thresholds: Thresholds,
    pub report_path: Option<PathBuf>,
    pub splitting: Option<String>,
    pub mutation: Option<String>,
    pub magnitude: Option<f64>,
}

/// 1-based line of the first occurrence of `"key"` in the text.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let quoted = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&quoted)).map(|i| i + 1)
}

fn err_at(text: &str, key: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError { line: line_of(text, key), message: message.into() }
}

impl Scenario {
    pub fn load(path: &Path, ov: &Overrides) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError { line: None, message: format!("cannot read {}: {e}", path.display()) })?;
        Scenario::parse(&text, ov)
    }

    pub fn parse(text: &str, ov: &Overrides) -> Result<Scenario, ScenarioError> {
        let raw: RawScenario = serde_json::from_str(text)
            .map_err(|e| ScenarioError { line: Some(e.line()), message: e.to_string() })?;

        let example = match (raw.example.family, raw.example.inline) {
            (Some(f), None) => {
                let mut spec = ExampleSpec::new(&f);
                spec.params = raw.example.params;
                ExampleSource::Catalog(spec)
            }
            (None, Some(v)) => {
                if !raw.example.params.is_empty() {
                    return Err(err_at(text, "params", "params only apply to catalog families"));
                }
                ExampleSource::Inline(v)
            }
            _ => return Err(err_at(text, "example", "example needs exactly one of \"family\" and \"inline\"")),
        };

        let suites = raw.suites.unwrap_or_else(|| DEFAULT_SUITES.iter().map(|s| s.to_string()).collect());
        for s in &suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(ScenarioError {
                    line: line_of(text, s).or_else(|| line_of(text, "suites")),
                    message: format!("unknown suite {s:?}; known suites are {}", SUITES.join(", ")),
                });
            }
        }
        let samples = ov.samples.or(raw.samples).unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(err_at(text, "samples", "samples must be at least 1"));
        }
        let fd_step = ov.fd_step.or(raw.fd_step).unwrap_or(1e-4);
        if !(fd_step > 0.0 && fd_step.is_finite()) {
            return Err(err_at(text, "fd_step", "fd_step must be positive"));
        }
        let tol = ov.tol.or(raw.tol).or(ov.env_tol).unwrap_or(1e-8);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(err_at(text, "tol", "tol must be positive"));
        }
        let mut thresholds = Thresholds::default();
        if let Some(t) = raw.thresholds {
            thresholds.exact = t.exact.unwrap_or(thresholds.exact);
            thresholds.fd = t.fd.unwrap_or(thresholds.fd);
            if !(thresholds.exact > 0.0 && thresholds.fd > 0.0) {
                return Err(err_at(text, "thresholds", "thresholds must be positive"));
            }
        }
        let magnitude = ov.magnitude.or(raw.magnitude);
        if magnitude.is_some_and(|m| !m.is_finite()) {
            return Err(err_at(text, "magnitude", "magnitude must be finite"));
        }
        Ok(Scenario {
            example,
            suites,
            samples,
            seed: ov.seed.or(raw.seed).unwrap_or(0),
            fd_step,
            tol,
            thresholds,
            report_path: ov.report.clone().or(raw.report_path),
            splitting: ov.splitting.clone().or(raw.splitting),
            mutation: ov.mutation.clone().or(raw.mutation),
            magnitude,
        })
    }

    pub fn config(&self) -> CheckConfig {
        CheckConfig { tol: self.tol, fd: Fd::central(self.fd_step), thresholds: self.thresholds, seed: self.seed }
    }

    /// Builds the example; the scenario seed drives the samples.
    pub fn build(&self) -> Result<Example, String> {
        let mut ex = match &self.example {
            ExampleSource::Catalog(spec) => build_example(spec).map_err(|e| e.to_string())?,
            ExampleSource::Inline(v) => Example::from_pair(inline_pair(v)?),
        };
        ex.seed = self.seed;
        Ok(ex)
    }
}

fn matrix(rows: &[Vec<f64>], shape: (usize, usize), what: &str) -> Result<Mat, String> {
    let (r, c) = shape;
    if rows.is_empty() && r * c == 0 {
        return Ok(Mat::zeros(r, c));
    }
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(format!("{what} must be {r}×{c}"));
    }
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

fn value_matrix(v: &Value, shape: (usize, usize), what: &str) -> Result<Mat, String> {
    let rows: Vec<Vec<f64>> = serde_json::from_value(v.clone()).map_err(|e| format!("{what}: {e}"))?;
    matrix(&rows, shape, what)
}

/// Unary map families: "zero", "identity", "adjoint", "adjoint-inverse",
/// {"constant": M}, {"det-power": [p…]} = diag(det(g)^p).
fn unary_map(v: &Value, chart: &GroupChart, shape: (usize, usize), what: &str) -> Result<SmoothMap, String> {
    let (r, c) = shape;
    let square = |name: &str| {
        if r == c {
            Ok(())
        } else {
            Err(format!("{what}: {name} needs a square shape, have {r}×{c}"))
        }
    };
    match v {
        Value::String(s) => match s.as_str() {
            "zero" => Ok(SmoothMap::zero(1, r, c)),
            "identity" => square("identity").map(|_| SmoothMap::identity(1, r)),
            "adjoint" | "adjoint-inverse" => {
                if r != chart.dim() || c != chart.dim() {
                    return Err(format!("{what}: {s} acts on the group's Lie algebra of dimension {}", chart.dim()));
                }
                let ch = chart.clone();
                let inverse = s == "adjoint-inverse";
                Ok(SmoothMap::unary(r, c, move |g| {
                    if inverse {
                        ch.ad_matrix(&ch.inverse(g).expect("group elements are invertible"))
                    } else {
                        ch.ad_matrix(g)
                    }
                }))
            }
            other => Err(format!("{what}: unknown map family {other:?}")),
        },
        Value::Object(o) if o.len() == 1 => {
            let (k, arg) = o.iter().next().expect("one key");
            match k.as_str() {
                "constant" => Ok(SmoothMap::constant(1, value_matrix(arg, shape, what)?)),
                "det-power" => {
                    square("det-power")?;
                    let p: Vec<f64> = serde_json::from_value(arg.clone()).map_err(|e| format!("{what}: {e}"))?;
                    if p.len() != r {
                        return Err(format!("{what}: det-power needs {r} exponents"));
                    }
                    Ok(SmoothMap::unary(r, r, move |g| {
                        let d = g.determinant();
                        Mat::from_diagonal(&Vector::from_iterator(r, p.iter().map(|e| d.powf(*e))))
                    }))
                }
                other => Err(format!("{what}: unknown map family {other:?}")),
            }
        }
        _ => Err(format!("{what}: expected a family name or a one-key object")),
    }
}

/// Binary map families: "zero" or {"constant": M}.
fn binary_map(v: &Value, shape: (usize, usize), what: &str) -> Result<SmoothMap, String> {
    match v {
        Value::String(s) if s == "zero" => Ok(SmoothMap::zero(2, shape.0, shape.1)),
        Value::Object(o) if o.len() == 1 && o.contains_key("constant") => {
            Ok(SmoothMap::constant(2, value_matrix(&o["constant"], shape, what)?))
        }
        _ => Err(format!("{what}: expected \"zero\" or {{\"constant\": M}}")),
    }
}

fn chart_named(name: &str) -> Result<GroupChart, String> {
    match name {
        "aff1" => Ok(GroupChart::aff1()),
        "so3" => Ok(GroupChart::so3()),
        "line" => Ok(GroupChart::line()),
        other => Err(format!("unknown group {other:?}; known groups are aff1, so3, line")),
    }
}

/// A matched pair from inline data.
pub fn inline_pair(v: &Value) -> Result<MatchedPair, String> {
    let raw: RawInline = serde_json::from_value(v.clone()).map_err(|e| format!("inline example: {e}"))?;
    let chart = chart_named(&raw.group)?;
    let h = raw.h_bracket.len();
    let mut c = Vec::with_capacity(h * h * h);
    for (i, a) in raw.h_bracket.iter().enumerate() {
        if a.len() != h || a.iter().any(|b| b.len() != h) {
            return Err(format!("h_bracket must be {h}×{h}×{h}; row {i} is not"));
        }
        c.extend(a.iter().flatten());
    }
    let h_bracket = LieAlgebra::new(h, c).map_err(|e| e.to_string())?;
    let (k, d) = (raw.k, chart.dim());
    let given = |m: &Option<Vec<Vec<f64>>>, shape: (usize, usize), what: &str| match m {
        Some(rows) => matrix(rows, shape, what),
        None => Ok(Mat::zeros(shape.0, shape.1)),
    };
    let partial = given(&raw.partial, (h, k), "partial")?;
    let rho_e = given(&raw.rho_e, (d, k), "rho_e")?;
    let ell_e = given(&raw.ell_e, (k, h * k), "ell_e")?;
    let curvature = match &raw.curvature {
        Some(v) => binary_map(v, (k, h), "curvature")?,
        None => SmoothMap::zero(2, k, h),
    };
    let omega = match &raw.omega {
        Some(v) => unary_map(v, &chart, (k, h * h), "omega")?,
        None => SmoothMap::zero(1, k, h * h),
    };
    let mp = MatchedPair {
        ruth: Ruth {
            chart: chart.clone(),
            h_dim: h,
            k_dim: k,
            partial,
            delta_h: unary_map(&raw.delta_h, &chart, (h, h), "delta_h")?,
            delta_k: unary_map(&raw.delta_k, &chart, (k, k), "delta_k")?,
            omega: curvature,
        },
        rho_e,
        alpha: unary_map(&raw.alpha, &chart, (d, h), "alpha")?,
        ell_e,
        omega,
        h_bracket,
    };
    mp.validate().map_err(|e| e.to_string())?;
    match raw.gauge {
        Some(z) => {
            if z.len() != k {
                return Err(format!("gauge must have {k} entries"));
            }
            gauged(mp, &Vector::from_vec(z)).map_err(|e| e.to_string())
        }
        None => Ok(mp),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syntax_errors_carry_the_line() {
        let text = "{\n  \"example\": {\"family\": \"trivial\"},\n  \"samples\": ,\n}";
        let e = Scenario::parse(text, &Overrides::default()).unwrap_err();
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn unknown_suite_is_located() {
        let text = "{\n  \"example\": {\"family\": \"trivial\"},\n  \"suites\": [\n    \"ruth\",\n    \"bogus\"\n  ]\n}";
        let e = Scenario::parse(text, &Overrides::default()).unwrap_err();
        assert_eq!(e.line, Some(5));
        assert!(e.message.contains("bogus"));
    }

    #[test]
    fn tol_precedence_flag_then_file_then_env() {
        let text = r#"{"example": {"family": "trivial"}, "tol": 1e-7}"#;
        let ov = Overrides { env_tol: Some(1e-6), ..Default::default() };
        assert_eq!(Scenario::parse(text, &ov).unwrap().tol, 1e-7);
        let ov = Overrides { env_tol: Some(1e-6), tol: Some(1e-5), ..Default::default() };
        assert_eq!(Scenario::parse(text, &ov).unwrap().tol, 1e-5);
        let bare = r#"{"example": {"family": "trivial"}}"#;
        let ov = Overrides { env_tol: Some(1e-6), ..Default::default() };
        assert_eq!(Scenario::parse(bare, &ov).unwrap().tol, 1e-6);
    }

    #[test]
    fn inline_trivial_pair_builds() {
        let text = r#"{"example": {"inline": {
            "group": "line", "h_bracket": [[[0]]], "k": 1, "partial": [[1]], "rho_e": [[0]], "ell_e": [[0]],
            "delta_h": "identity", "delta_k": "identity", "alpha": "zero"}}}"#;
        let sc = Scenario::parse(text, &Overrides::default()).unwrap();
        let ex = sc.build().unwrap();
        assert_eq!((ex.mp.h(), ex.mp.k()), (1, 1));
    }

    #[test]
    fn inline_shape_mismatch_is_reported() {
        let text = r#"{"example": {"inline": {
            "group": "line", "h_bracket": [[[0]]], "k": 1, "partial": [[1, 2]],
            "delta_h": "identity", "delta_k": "identity", "alpha": "zero"}}}"#;
        let sc = Scenario::parse(text, &Overrides::default()).unwrap();
        assert!(sc.build().unwrap_err().contains("partial"));
    }
}
