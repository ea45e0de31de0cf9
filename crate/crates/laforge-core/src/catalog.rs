//! Built-in example families with known ground truth, and the mutations used
//! as negative tests.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::auth::pack_ell;
use crate::error::{Error, Result};
use crate::group::{sample_elements, GroupChart, GroupSampler, SmoothMap};
use crate::lie::LieAlgebra;
use crate::matched::{
    assemble_unchecked, check_matched_pair, extract_matched_pair, shifted_splitting, MatchedPair, Splitting,
};
use crate::numkit::{as_mat, max_abs, unit, Mat, Vector};
use crate::report::{CheckConfig, Entry, Kind, MaxTracker, SuiteReport, Thresholds};
use crate::ruth::Ruth;

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleSpec {
    pub family: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

impl ExampleSpec {
    pub fn new(family: &str) -> Self {
        ExampleSpec { family: family.into(), params: BTreeMap::new(), seed: 0 }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.into(), value);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamInfo {
    pub name: &'static str,
    pub default: f64,
    pub doc: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyInfo {
    pub name: &'static str,
    pub doc: &'static str,
    pub params: &'static [ParamInfo],
}

const fn p(name: &'static str, default: f64, doc: &'static str) -> ParamInfo {
    ParamInfo { name, default, doc }
}

pub const FAMILIES: [FamilyInfo; 5] = [
    FamilyInfo {
        name: "trivial",
        doc: "line group, 𝕙 = 𝕜 = ℝ, all maps trivial",
        params: &[p("boundary", 1.0, "∂ as a 1×1 matrix, 0 or 1")],
    },
    FamilyInfo {
        name: "tangent",
        doc: "vacant pair of the adjoint action groupoid G⋉𝔤",
        params: &[p("group", 0.0, "0 for Aff(1), 1 for SO(3)")],
    },
    FamilyInfo {
        name: "crossed-module",
        doc: "line group acting on the crossed module id: aff(1) → aff(1) by exp(t·s·D)",
        params: &[
            p("q", 1.0, "𝕙 bracket [x1,x2] = q x2"),
            p("s", 1.0, "speed of the action, D = diag(0,1)"),
            p("gauge", 0.0, "size of the splitting change applied after assembly"),
        ],
    },
    FamilyInfo {
        name: "trivial-maps",
        doc: "∂ = 0, ρ_e = 0 over Aff(1), core ℝ",
        params: &[
            p("q", 1.0, "𝕙 bracket [x1,x2] = q x2"),
            p("mu", 1.0, "Δ⁰_(a,b) = diag(1, a^mu)"),
            p("kappa", 1.0, "Δ¹_(a,b) = a^kappa"),
            p("lambda", 1.0, "ℓ_e^{x1}"),
            p("nu", 0.0, "ℓ_e^{x2}; needs q·nu = 0 and mu·nu = 0"),
            p("gamma", 1.0, "α_(a,b)(y) = y¹(b + gamma(a − 1)) x2"),
            p("gauge", 0.0, "size of the splitting change applied after assembly"),
        ],
    },
    FamilyInfo {
        name: "transitive-core",
        doc: "Aff(1) with core 𝔤 ⊕ ℝ, ρ_e the projection, α = 0",
        params: &[
            p("q", 1.0, "𝕙 bracket [x1,x2] = q x2, also ℓ_e^{x1} on ℝ"),
            p("gauge", 0.0, "size of a 𝔨-valued splitting change applied after assembly"),
        ],
    },
];

pub fn family(name: &str) -> Result<&'static FamilyInfo> {
    FAMILIES.iter().find(|f| f.name == name).ok_or_else(|| Error::Unknown(format!("family {name}")))
}

/// Isotropy data: y with Z_g solving ∂Z_g = y − Δ^ℏ_g y on all of G.
#[derive(Debug, Clone)]
pub struct IsotropyData {
    pub y: Vector,
    pub z: SmoothMap,
}

pub type ActionFn = Arc<dyn Fn(&Mat, &Mat) -> Mat + Send + Sync>;

/// Integration of a vacant-type pair: H acting on G by h•g and G acting on
/// H by h^g.
#[derive(Clone)]
pub struct Integration {
    pub h_chart: GroupChart,
    /// (h, g) ↦ h^g.
    pub target_action: ActionFn,
    /// (h, g) ↦ h•g.
    pub base_action: ActionFn,
}

impl core::fmt::Debug for Integration {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Integration(H = {})", self.h_chart.name)
    }
}

#[derive(Debug, Clone)]
pub struct Example {
    pub family: &'static str,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub mp: MatchedPair,
    pub second_splitting: Option<Splitting>,
    pub isotropy: Option<IsotropyData>,
    pub integration: Option<Integration>,
    /// Thresholds every suite passes at on this example.
    pub thresholds: Thresholds,
    /// Radius of the exponential ball the samples are drawn from.
    pub radius: f64,
}

impl Example {
    pub fn samples(&self, n: usize) -> Vec<Mat> {
        sample_elements(&GroupSampler { seed: self.seed, radius: self.radius, chart: self.mp.chart().clone() }, n)
    }
}

fn resolve(info: &FamilyInfo, given: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    for (k, v) in given {
        if !info.params.iter().any(|p| p.name == k) {
            return Err(Error::InvalidInput(format!("family {} has no parameter {k}", info.name)));
        }
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("parameter {k} is not finite")));
        }
    }
    Ok(info.params.iter().map(|p| (p.name.to_string(), *given.get(p.name).unwrap_or(&p.default))).collect())
}

fn diag(v: &[f64]) -> Mat {
    Mat::from_diagonal(&Vector::from_column_slice(v))
}

pub fn build_example(spec: &ExampleSpec) -> Result<Example> {
    let info = family(&spec.family)?;
    let params = resolve(info, &spec.params)?;
    let pv = |n: &str| params[n];
    let mut ex = match info.name {
        "trivial" => trivial(pv("boundary"))?,
        "tangent" => tangent(pv("group"))?,
        "crossed-module" => crossed_module(pv("q"), pv("s"), pv("gauge"))?,
        "trivial-maps" => {
            trivial_maps(pv("q"), pv("mu"), pv("kappa"), pv("lambda"), pv("nu"), pv("gamma"), pv("gauge"))?
        }
        "transitive-core" => transitive_core(pv("q"), pv("gauge"))?,
        _ => unreachable!("registry and builders disagree"),
    };
    ex.family = info.name;
    ex.params = params;
    ex.seed = spec.seed;
    ex.mp.validate()?;
    Ok(ex)
}

fn example(mp: MatchedPair) -> Example {
    Example::from_pair(mp)
}

impl Example {
    /// A pair supplied from outside the catalog, with default thresholds and no
    /// auxiliary data.
    pub fn from_pair(mp: MatchedPair) -> Example {
        Example {
            family: "",
            params: BTreeMap::new(),
            seed: 0,
            mp,
            second_splitting: None,
            isotropy: None,
            integration: None,
            thresholds: Thresholds::default(),
            radius: 0.5,
        }
    }
}

/// Re-reads the pair in the splitting φ_g(y) = s(g)(Σy)z of its LA-group.
pub fn gauged(mp: MatchedPair, z: &Vector) -> Result<MatchedPair> {
    if max_abs(&as_mat(z)) == 0.0 {
        return Ok(mp);
    }
    let cfg = CheckConfig::default();
    let lg = assemble_unchecked(&mp)?;
    extract_matched_pair(&lg, &shifted_splitting(mp.chart(), z, mp.h()), &cfg)
}

fn trivial(boundary: f64) -> Result<Example> {
    if boundary != 0.0 && boundary != 1.0 {
        return Err(Error::Construction(format!("boundary must be 0 or 1, got {boundary}")));
    }
    let chart = GroupChart::line();
    let ruth = Ruth {
        chart,
        h_dim: 1,
        k_dim: 1,
        partial: Mat::from_element(1, 1, boundary),
        delta_h: SmoothMap::identity(1, 1),
        delta_k: SmoothMap::identity(1, 1),
        omega: SmoothMap::zero(2, 1, 1),
    };
    let mp = MatchedPair {
        ruth,
        rho_e: Mat::zeros(1, 1),
        alpha: SmoothMap::zero(1, 1, 1),
        ell_e: Mat::zeros(1, 1),
        omega: SmoothMap::zero(1, 1, 1),
        h_bracket: LieAlgebra::abelian(1),
    };
    let chart = mp.chart().clone();
    let mut ex = example(mp);
    ex.second_splitting = Some(shifted_splitting(&chart, &Vector::from_element(1, 0.7), 1));
    Ok(ex)
}

fn tangent(group: f64) -> Result<Example> {
    let chart = match group {
        g if g == 0.0 => GroupChart::aff1(),
        g if g == 1.0 => GroupChart::so3(),
        g => return Err(Error::Construction(format!("group must be 0 (Aff(1)) or 1 (SO(3)), got {g}"))),
    };
    let d = chart.dim();
    let ch = chart.clone();
    let delta_h = SmoothMap::unary(d, d, move |g| ch.ad_matrix(g));
    let ruth = Ruth {
        chart: chart.clone(),
        h_dim: d,
        k_dim: 0,
        partial: Mat::zeros(d, 0),
        delta_h,
        delta_k: SmoothMap::zero(1, 0, 0),
        omega: SmoothMap::zero(2, 0, d),
    };
    let mut mp = MatchedPair {
        ruth,
        rho_e: Mat::zeros(d, 0),
        alpha: SmoothMap::zero(1, d, d),
        ell_e: Mat::zeros(0, 0),
        omega: SmoothMap::zero(1, 0, d * d),
        h_bracket: chart.algebra.opposite(),
    };
    // ω is read from the assembled algebroid; it lives in 𝕜 = 0 here
    let lg = assemble_unchecked(&mp)?;
    mp.omega = extract_matched_pair(&lg, &Splitting::canonical(0, d), &CheckConfig::default())?.omega;
    let mut ex = example(mp);
    let c1 = chart.clone();
    ex.integration = Some(Integration {
        h_chart: chart,
        target_action: Arc::new(move |h, g| g * h * c1.inverse(g).expect("invertible")),
        base_action: Arc::new(|_, g| g.clone()),
    });
    Ok(ex)
}

fn crossed_module(q: f64, s: f64, gauge: f64) -> Result<Example> {
    let chart = GroupChart::line();
    let h_bracket = LieAlgebra::aff1(q);
    let act = SmoothMap::unary(2, 2, move |g| diag(&[1.0, libm::pow(g[(0, 0)], s)]));
    let ruth = Ruth {
        chart,
        h_dim: 2,
        k_dim: 2,
        partial: Mat::identity(2, 2),
        delta_h: act.clone(),
        delta_k: act,
        omega: SmoothMap::zero(2, 2, 2),
    };
    let ell_e = pack_ell(2, 2, |i| h_bracket.ad(&unit(2, i)));
    let mp = MatchedPair {
        ruth,
        rho_e: Mat::zeros(1, 2),
        alpha: SmoothMap::zero(1, 1, 2),
        ell_e,
        omega: SmoothMap::zero(1, 2, 4),
        h_bracket,
    };
    let mp = gauged(mp, &Vector::from_column_slice(&[gauge, gauge]))?;
    let chart = mp.chart().clone();
    let y = Vector::from_column_slice(&[1.0, -0.5]);
    let (dh, yc) = (mp.ruth.delta_h.clone(), y.clone());
    let z = SmoothMap::unary(2, 1, move |g| as_mat(&(&yc - dh.at(g) * &yc)));
    let mut ex = example(mp);
    ex.second_splitting = Some(shifted_splitting(&chart, &Vector::from_column_slice(&[0.4, -0.3]), 2));
    ex.isotropy = Some(IsotropyData { y, z });
    Ok(ex)
}

fn trivial_maps(q: f64, mu: f64, kappa: f64, lambda: f64, nu: f64, gamma: f64, gauge: f64) -> Result<Example> {
    if q * nu != 0.0 {
        return Err(Error::Construction(format!(
            "ℓ_e is not a representation of 𝕙: [ℓ^x1, ℓ^x2] = 0 but ℓ^[x1,x2] = {}",
            q * nu
        )));
    }
    if mu * nu != 0.0 {
        return Err(Error::Construction(
            "Δ¹ and ℓ are incompatible: ℓ_g^x2 = nu·a^mu does not commute past Δ¹ unless mu·nu = 0".into(),
        ));
    }
    let chart = GroupChart::aff1();
    let ruth = Ruth {
        chart: chart.clone(),
        h_dim: 2,
        k_dim: 1,
        partial: Mat::zeros(2, 1),
        delta_h: SmoothMap::unary(2, 2, move |g| diag(&[1.0, libm::pow(g[(0, 0)], mu)])),
        delta_k: SmoothMap::unary(1, 1, move |g| Mat::from_element(1, 1, libm::pow(g[(0, 0)], kappa))),
        omega: SmoothMap::zero(2, 1, 2),
    };
    let alpha = SmoothMap::unary(2, 2, move |g| {
        let (a, b) = (g[(0, 0)], g[(0, 1)]);
        Mat::from_row_slice(2, 2, &[0.0, 0.0, b + gamma * (a - 1.0), 0.0])
    });
    let mp = MatchedPair {
        ruth,
        rho_e: Mat::zeros(2, 1),
        alpha,
        ell_e: Mat::from_row_slice(1, 2, &[lambda, nu]),
        omega: SmoothMap::zero(1, 1, 4),
        h_bracket: LieAlgebra::aff1(q),
    };
    let mp = gauged(mp, &Vector::from_element(1, gauge))?;
    let mut ex = example(mp);
    ex.second_splitting = Some(shifted_splitting(&chart, &Vector::from_element(1, -0.6), 2));
    ex.isotropy = Some(IsotropyData { y: unit(2, 0), z: SmoothMap::zero(1, 1, 1) });
    let psi = move |g: &Mat| diag(&[libm::pow(g[(0, 0)], mu), 1.0]);
    ex.integration = Some(Integration {
        h_chart: chart,
        target_action: Arc::new(move |h, g| {
            let p = psi(g);
            let pinv = diag(&[1.0 / p[(0, 0)], 1.0]);
            p * h * pinv
        }),
        base_action: Arc::new(move |h, g| {
            let (a, b, c) = (g[(0, 0)], g[(0, 1)], h[(0, 0)]);
            Mat::from_row_slice(2, 2, &[a, c * b + gamma * (a - 1.0) * (c - 1.0), 0.0, 1.0])
        }),
    });
    Ok(ex)
}

fn transitive_core(q: f64, gauge: f64) -> Result<Example> {
    let chart = GroupChart::aff1();
    let ch = chart.clone();
    let delta_k = SmoothMap::unary(3, 3, move |g| {
        let mut m = Mat::identity(3, 3);
        m.view_mut((0, 0), (2, 2)).copy_from(&ch.ad_matrix(g));
        m
    });
    let ruth = Ruth {
        chart: chart.clone(),
        h_dim: 2,
        k_dim: 3,
        partial: Mat::from_row_slice(2, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        delta_h: SmoothMap::identity(1, 2),
        delta_k,
        omega: SmoothMap::zero(2, 3, 2),
    };
    let ell_e = pack_ell(3, 2, |i| {
        let mut m = Mat::zeros(3, 3);
        if i == 0 {
            m[(2, 2)] = q;
        }
        m
    });
    let mp = MatchedPair {
        ruth,
        rho_e: Mat::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
        alpha: SmoothMap::zero(1, 2, 2),
        ell_e,
        omega: SmoothMap::zero(1, 3, 4),
        h_bracket: LieAlgebra::aff1(q),
    };
    let mp = gauged(mp, &Vector::from_column_slice(&[0.0, 0.0, gauge]))?;
    let mut ex = example(mp);
    ex.second_splitting = Some(shifted_splitting(&chart, &Vector::from_column_slice(&[0.3, -0.2, 0.5]), 2));
    Ok(ex)
}

/// Group-level compatibility of the integration data and its derivative
/// against Δ^ℏ, α and the two axioms they feed.
pub fn integration_check(ex: &Example, samples: &[Mat], cfg: &CheckConfig) -> Result<SuiteReport> {
    let it = ex.integration.as_ref().ok_or_else(|| Error::Precondition(format!("{} ships no integration data", ex.family)))?;
    let th = &cfg.thresholds;
    let hs = sample_elements(&GroupSampler { seed: ex.seed ^ 0x5eed, radius: ex.radius, chart: it.h_chart.clone() }, samples.len());
    let (ta, ba) = (&it.target_action, &it.base_action);
    let mut c1 = MaxTracker::new();
    let mut c2 = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        for (i, h0) in hs.iter().enumerate() {
            for (j, h1) in hs.iter().enumerate() {
                let lhs = ta(&(h0 * h1), g);
                let rhs = ta(h0, &ba(h1, g)) * ta(h1, g);
                c1.update(max_abs(&(lhs - rhs)), || format!("h{i},h{j},g{gi}"));
            }
            for (g1i, g1) in samples.iter().enumerate() {
                let lhs = ba(h0, &(g * g1));
                let rhs = ba(&ta(h0, g1), g) * ba(h0, g1);
                c2.update(max_abs(&(lhs - rhs)), || format!("h{i},g{gi},g{g1i}"));
            }
        }
    }
    let mut rep = SuiteReport::new("integration");
    let strict = Thresholds { exact: 1e-12, fd: th.fd };
    rep.entries.push(Entry::from_max("target-action-compatible", "(h0h1)^g = h0^{h1•g} h1^g", Kind::Exact, &c1, &strict));
    rep.entries.push(Entry::from_max("base-action-compatible", "h•(g0g1) = (h^{g1}•g0)(h•g1)", Kind::Exact, &c2, &strict));

    // derivatives at h = e along exp(τy)
    let mp = &ex.mp;
    let (hc, gc) = (it.h_chart.clone(), mp.chart().clone());
    let (h, d) = (mp.h(), gc.dim());
    let fd = cfg.fd;
    let (ta2, ba2, hc2, gc2) = (ta.clone(), ba.clone(), hc.clone(), gc.clone());
    let dh = SmoothMap::unary(h, h, move |g| {
        let mut m = Mat::zeros(h, h);
        for i in 0..h {
            let c = hc2.deriv(&fd, &hc2.identity(), &unit(h, i), |p| Ok(as_mat(&hc2.coords(&ta2(p, g)))));
            m.set_column(i, &c.map(|c| c.column(0).into_owned()).unwrap_or_else(|_| Vector::from_element(h, f64::NAN)));
        }
        m
    });
    let hc3 = hc.clone();
    let alpha = SmoothMap::unary(d, h, move |g| {
        let ginv = gc2.inverse(g).expect("invertible");
        let mut m = Mat::zeros(d, h);
        for i in 0..h {
            let c = hc3.deriv(&fd, &hc3.identity(), &unit(h, i), |p| Ok(ba2(p, g) * &ginv));
            m.set_column(i, &c.map(|c| gc2.coords(&c)).unwrap_or_else(|_| Vector::from_element(d, f64::NAN)));
        }
        m
    });
    let mut dd = MaxTracker::new();
    let mut da = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        dd.update(max_abs(&(dh.at(g) - mp.ruth.delta_h.at(g))), || format!("g{gi}"));
        da.update(max_abs(&(alpha.at(g) - mp.alpha.at(g))), || format!("g{gi}"));
    }
    rep.entries.push(Entry::from_max("differentiates-to-target-map", "d/dτ exp(τy)^g = Δ^ℏ_g y", Kind::Fd, &dd, th));
    rep.entries.push(Entry::from_max("differentiates-to-anchor", "d/dτ exp(τy)•g = α_g y", Kind::Fd, &da, th));

    let mut fdd = mp.clone();
    fdd.ruth.delta_h = dh;
    fdd.alpha = alpha;
    let sub = check_matched_pair(&fdd, samples, cfg)?;
    for name in ["anchored-flatness", "quasi-representation"] {
        let mut en = sub.get(name).cloned().ok_or_else(|| Error::Unknown(name.into()))?;
        en.name = format!("differentiated-{name}");
        en.kind = Kind::Fd;
        en.threshold = th.fd;
        en.passed = en.residual.is_finite() && en.residual <= en.threshold;
        rep.entries.push(en);
    }
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationInfo {
    pub name: &'static str,
    pub doc: &'static str,
    pub host_family: &'static str,
    pub host_params: &'static [(&'static str, f64)],
    /// (suite, entry) pairs that fail for any nonzero magnitude.
    pub advertised: &'static [(&'static str, &'static str)],
    /// Entries outside the advertised law that the defect cannot avoid moving.
    /// A nonempty list means the mutation is not isolated.
    pub collateral: &'static [(&'static str, &'static str)],
}

pub const MUTATIONS: [MutationInfo; 7] = [
    MutationInfo {
        name: "break-ruth-Δ⁰",
        doc: "Δ^ℏ_g ← Δ^ℏ_g exp(ε s(g) ad_{y_last}); no longer an action",
        host_family: "tangent",
        host_params: &[("group", 1.0)],
        advertised: &[
            ("ruth", "quasi-action-on-base"),
            ("groupoid", "target-of-product"),
            ("groupoid", "inverse"),
            ("matched", "quasi-representation"),
        ],
        collateral: &[],
    },
    MutationInfo {
        name: "break-omega-units",
        doc: "Ω += ε E₀₀, a Δ-invariant constant that does not vanish on units",
        host_family: "trivial-maps",
        host_params: &[("kappa", 0.0)],
        advertised: &[
            ("ruth", "unit-normalization"),
            ("groupoid", "left-unit"),
            ("groupoid", "right-unit"),
        ],
        collateral: &[],
    },
    MutationInfo {
        name: "break-G-equiv",
        doc: "α_g += ε ln det(g) E₀₀; still a cocycle but not equivariant",
        host_family: "trivial",
        host_params: &[("boundary", 1.0)],
        advertised: &[
            ("matched", "anchor-equivariance"),
            ("morphisms", "anchor-ruth"),
            ("morphisms", "anchor-multiplicative"),
        ],
        collateral: &[],
    },
    MutationInfo {
        name: "break-h-equiv",
        doc: "ℓ_e^{y_0} gains ε on its last diagonal entry",
        host_family: "transitive-core",
        host_params: &[],
        advertised: &[
            ("matched", "boundary-equivariance"),
            ("morphisms", "target-rels-ell"),
            ("derived", "lie2-equivariance"),
        ],
        collateral: &[],
    },
    MutationInfo {
        name: "break-MC",
        doc: "Ω += ε δ^Δβ with β_g = s(g)²E_{0,last}; the RUTH stays valid",
        host_family: "trivial-maps",
        host_params: &[],
        advertised: &[("matched", "maurer-cartan"), ("morphisms", "mult-maurer-cartan")],
        collateral: &[],
    },
    MutationInfo {
        name: "break-jacobi-k",
        doc: "ℓ_e += ε on an injective ∂; the derived core bracket loses antisymmetry",
        host_family: "trivial",
        host_params: &[("boundary", 1.0)],
        advertised: &[("matched", "core-bracket-lie"), ("derived", "lie2-derivation"), ("derived", "isotropy-jacobi")],
        collateral: &[
            ("matched", "auth-connection-derivation"),
            ("matched", "boundary-equivariance"),
            ("morphisms", "target-core-homomorphism"),
            ("morphisms", "target-rels-ell"),
            ("derived", "lie2-equivariance"),
        ],
    },
    MutationInfo {
        name: "break-auth-curvature",
        doc: "ℓ_e^{y_1} gains ε; ℓ_e stops representing 𝕙",
        host_family: "trivial-maps",
        host_params: &[("mu", 0.0)],
        advertised: &[("matched", "auth-curvature-inner"), ("derived", "isotropy-jacobi")],
        collateral: &[],
    },
];

pub fn mutation(name: &str) -> Result<&'static MutationInfo> {
    MUTATIONS.iter().find(|m| m.name == name).ok_or_else(|| Error::Unknown(format!("mutation {name}")))
}

pub fn mutation_host(name: &str) -> Result<ExampleSpec> {
    let m = mutation(name)?;
    let mut spec = ExampleSpec::new(m.host_family);
    for (k, v) in m.host_params {
        spec.params.insert((*k).into(), *v);
    }
    Ok(spec)
}

fn group_scalar(g: &Mat) -> f64 {
    g.iter().sum::<f64>() - g.nrows() as f64
}

/// The pair with the named defect of size `eps`; `eps = 0` returns it
/// unchanged.
pub fn mutate(mp: &MatchedPair, name: &str, eps: f64) -> Result<MatchedPair> {
    mutation(name)?;
    let mut out = mp.clone();
    if eps == 0.0 {
        return Ok(out);
    }
    let (h, k) = (mp.h(), mp.k());
    let need_core = |what: &str| {
        if k == 0 || h == 0 {
            Err(Error::Precondition(format!("{name} needs nonzero 𝕜 and 𝕙 to perturb {what}")))
        } else {
            Ok(())
        }
    };
    match name {
        "break-ruth-Δ⁰" => {
            if h == 0 {
                return Err(Error::Precondition(format!("{name} needs nonzero 𝕙")));
            }
            let mut dm = mp.h_bracket.ad(&unit(h, h - 1));
            if max_abs(&dm) == 0.0 {
                dm = Mat::identity(h, h);
            }
            let dh = mp.ruth.delta_h.clone();
            out.ruth.delta_h = SmoothMap::unary(h, h, move |g| {
                dh.at(g) * crate::numkit::mat_exp(&(&dm * (eps * group_scalar(g)))).expect("square")
            });
        }
        "break-omega-units" => {
            need_core("Ω")?;
            let mut c = Mat::zeros(k, h);
            c[(0, 0)] = eps;
            out.ruth.omega = mp.ruth.omega.plus(&SmoothMap::constant(2, c));
        }
        "break-G-equiv" => {
            let d = mp.chart().dim();
            if h == 0 || d == 0 {
                return Err(Error::Precondition(format!("{name} needs nonzero 𝕙 and 𝔤")));
            }
            let a = mp.alpha.clone();
            out.alpha = SmoothMap::unary(d, h, move |g| {
                let mut m = a.at(g);
                m[(0, 0)] += eps * libm::log(g.determinant());
                m
            });
        }
        "break-h-equiv" => {
            need_core("ℓ_e")?;
            out.ell_e[(k - 1, k - 1)] += eps;
        }
        "break-MC" => {
            need_core("Ω")?;
            let mut e = Mat::zeros(k, h);
            e[(0, h - 1)] = 1.0;
            let (dk, dh, om) = (mp.ruth.delta_k.clone(), mp.ruth.delta_h.clone(), mp.ruth.omega.clone());
            out.ruth.omega = SmoothMap::binary(k, h, move |g, hh| {
                let beta = |x: &Mat| {
                    let s = group_scalar(x);
                    &e * (s * s)
                };
                let d = dk.at(g) * beta(hh) - beta(&(g * hh)) + beta(g) * dh.at(hh);
                om.at2(g, hh) + d * eps
            });
        }
        "break-jacobi-k" => {
            need_core("ℓ_e")?;
            out.ell_e.add_scalar_mut(eps);
        }
        "break-auth-curvature" => {
            need_core("ℓ_e")?;
            out.ell_e[(0, (h - 1) * k)] += eps;
        }
        _ => unreachable!(),
    }
    Ok(out)
}
