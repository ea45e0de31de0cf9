//! LA-matched pairs: the eight compatibility axioms, assembly of the LA-group
//! they define, the morphism conditions of its structure maps, extraction of
//! a matched pair from LA-group data, and the Lie algebras built from it.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::auth::{
    build_extension, check_auth, ell_block, omega_apply, pack_bilinear, pack_ell, test_sections, vf_bracket,
    AlgebroidData, Auth, Section, TrivialAlgebroid,
};
use crate::error::{Error, Result};
use crate::group::{ball_point, rng, GroupChart, SmoothMap};
use crate::lie::{check_butterfly, check_crossed_module, check_lie_algebra, semidirect_twisted, Butterfly, CrossedModule, LieAlgebra};
use crate::numkit::{max_abs, max_abs_vec, pinv, svd_subspaces, unit, Fd, Mat, SubspaceBasis, Vector};
use crate::report::{CheckConfig, Entry, Kind, MaxTracker, SuiteReport};
use crate::ruth::{induced_actions, Ruth, VbArrow};

/// A RUTH together with (ρ_e, α, ℓ_e, ω) and the bracket of 𝕙.
#[derive(Debug, Clone)]
pub struct MatchedPair {
    pub ruth: Ruth,
    /// dim 𝔤 × k.
    pub rho_e: Mat,
    /// dim 𝔤 × h.
    pub alpha: SmoothMap,
    /// k × (h·k), block i is ℓ_e^{e_i}.
    pub ell_e: Mat,
    /// k × (h·h), column i·h + j is ω(e_i, e_j).
    pub omega: SmoothMap,
    pub h_bracket: LieAlgebra,
}

fn nan_mat(r: usize, c: usize) -> Mat {
    Mat::from_element(r, c, f64::NAN)
}

fn stack(z: &Vector, y: &Vector) -> Vector {
    let mut v = Vector::zeros(z.len() + y.len());
    v.rows_mut(0, z.len()).copy_from(z);
    v.rows_mut(z.len(), y.len()).copy_from(y);
    v
}

fn split(v: &Vector, k: usize) -> (Vector, Vector) {
    (v.rows(0, k).into_owned(), v.rows(k, v.len() - k).into_owned())
}

impl MatchedPair {
    pub fn h(&self) -> usize {
        self.ruth.h_dim
    }

    pub fn k(&self) -> usize {
        self.ruth.k_dim
    }

    pub fn chart(&self) -> &GroupChart {
        &self.ruth.chart
    }

    pub fn validate(&self) -> Result<()> {
        self.ruth.validate_shapes()?;
        let (h, k, d) = (self.h(), self.k(), self.chart().dim());
        let ok = self.rho_e.shape() == (d, k)
            && (self.alpha.arity, self.alpha.rows, self.alpha.cols) == (1, d, h)
            && self.ell_e.shape() == (k, h * k)
            && (self.omega.arity, self.omega.rows, self.omega.cols) == (1, k, h * h)
            && self.h_bracket.dim() == h;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("matched pair components have inconsistent shapes".into()))
        }
    }

    pub fn ell_e_of(&self, y: &Vector) -> Mat {
        ell_block(&self.ell_e, y, self.k())
    }
}

/// Step used for the derived tensors ℓ_g and the core bracket. These are part of
/// the data rather than of a check, so they are computed once at an accurate step
/// and do not move with the checker's own finite-difference step.
pub const DATA_FD: Fd = Fd { step: 5e-3, scheme: crate::numkit::Scheme::Richardson };

/// [z0,z1] = ℓ_e^{∂z0}(z1) + (d_eΔ^𝕜)_{ρ_e z1}(z0) on basis pairs.
pub fn derive_core_bracket(mp: &MatchedPair, fd: Fd) -> Result<LieAlgebra> {
    let k = mp.k();
    let chart = mp.chart();
    let e = chart.identity();
    let mut d_delta = Vec::with_capacity(k);
    for j in 0..k {
        let x = &mp.rho_e * unit(k, j);
        d_delta.push(chart.deriv(&fd, &e, &x, |p| mp.ruth.delta_k.try_eval(core::slice::from_ref(p)))?);
    }
    Ok(LieAlgebra::from_bracket(k, |i, j| {
        mp.ell_e_of(&(&mp.ruth.partial * unit(k, i))) * unit(k, j) + d_delta[j].column(i)
    }))
}

/// ℓ_g^y(z) = ℓ_e^{Δ^ℏ_g y}(z) − (d_{(e,g)}Ω)_{(ρ_e z, 0)}(y).
/// Only the first slot of Ω is differentiated.
pub fn derive_ell(mp: &MatchedPair, fd: Fd) -> SmoothMap {
    let (h, k) = (mp.h(), mp.k());
    let (ell_e, dh, om, rho) = (mp.ell_e.clone(), mp.ruth.delta_h.clone(), mp.ruth.omega.clone(), mp.rho_e.clone());
    let chart = mp.chart().clone();
    let gd = chart.dim();
    SmoothMap::unary(k, h * k, move |g| {
        let e = chart.identity();
        let dhg = dh.at(g);
        let dom: Vec<Mat> = (0..k)
            .map(|j| {
                let x = &rho * unit(k, j);
                chart
                    .deriv_multi(&fd, &[e.clone(), g.clone()], &[x, Vector::zeros(gd)], |p| om.try_eval(p))
                    .unwrap_or_else(|_| nan_mat(k, h))
            })
            .collect();
        pack_ell(k, h, |i| {
            let mut m = ell_block(&ell_e, &dhg.column(i).into_owned(), k);
            for (j, d) in dom.iter().enumerate() {
                let c = d.column(i).into_owned();
                let mut col = m.column_mut(j);
                col -= c;
            }
            m
        })
    })
}

/// (α, ∇, ω) on G×𝕜 with ∇ from ℓ of `derive_ell`.
pub fn to_auth(mp: &MatchedPair, core: LieAlgebra, fd: Fd) -> Auth {
    Auth {
        algebra: mp.h_bracket.clone(),
        target: TrivialAlgebroid { chart: mp.chart().clone(), fiber: core, rho_e: mp.rho_e.clone() },
        alpha: mp.alpha.clone(),
        ell: derive_ell(mp, fd),
        omega: mp.omega.clone(),
    }
}

fn d_vec<F>(chart: &GroupChart, fd: &Fd, g: &Mat, x: &Vector, f: F) -> Result<Vector>
where
    F: Fn(&Mat) -> Vector,
{
    let m = chart.deriv(fd, g, x, |p| Ok(crate::numkit::as_mat(&f(p))))?;
    Ok(crate::numkit::as_vec(&m))
}

fn d_mat<F>(chart: &GroupChart, fd: &Fd, g: &Mat, x: &Vector, f: F) -> Result<Mat>
where
    F: Fn(&Mat) -> Mat,
{
    chart.deriv(fd, g, x, |p| Ok(f(p)))
}

/// Derivative of a two-point function along (x at g, y at h).
fn d2_mat<F>(chart: &GroupChart, fd: &Fd, g: &Mat, h: &Mat, x: &Vector, y: &Vector, f: F) -> Result<Mat>
where
    F: Fn(&Mat, &Mat) -> Mat,
{
    chart.deriv_multi(fd, &[g.clone(), h.clone()], &[x.clone(), y.clone()], |p| Ok(f(&p[0], &p[1])))
}

/// Names of the matched-pair entries, in report order.
pub const AXIOM_ENTRIES: [&str; 12] = [
    "core-bracket-lie",
    "auth-connection-leibniz",
    "auth-connection-derivation",
    "auth-anchor-equivariance",
    "auth-curvature-inner",
    "auth-omega-closed",
    "boundary-equivariance",
    "anchor-equivariance",
    "anchored-flatness",
    "quasi-representation",
    "core-commutation",
    "maurer-cartan",
];

/// The eight compatibility axioms on the sample set; pair-indexed axioms run
/// over all ordered sample pairs.
pub fn check_matched_pair(mp: &MatchedPair, samples: &[Mat], cfg: &CheckConfig) -> Result<SuiteReport> {
    mp.validate()?;
    if samples.is_empty() {
        return Err(Error::Precondition("no samples".into()));
    }
    let (h, k) = (mp.h(), mp.k());
    let chart = mp.chart().clone();
    let gd = chart.dim();
    let fd = cfg.fd;
    let th = &cfg.thresholds;
    let e = chart.identity();
    let r = &mp.ruth;
    let mut rep = SuiteReport::new("matched");

    // core bracket
    let core = derive_core_bracket(mp, DATA_FD)?;
    let lr = check_lie_algebra(&core);
    let mut t = lr.antisymmetry.clone();
    t.merge(&lr.jacobi);
    rep.entries.push(Entry::from_max("core-bracket-lie", "[·,·] from ℓ_e and d_eΔ^𝕜 is antisymmetric and satisfies Jacobi", Kind::Fd, &t, th));

    // action up to homotopy on G×𝕜
    let auth = to_auth(mp, core.clone(), DATA_FD);
    let sub = check_auth(&auth, samples, &test_sections(&chart, k), cfg)?;
    for en in sub.entries {
        let mut en = en;
        en.name = format!("auth-{}", en.name);
        rep.entries.push(en);
    }
    let ell = &auth.ell;

    // boundary equivariance at e
    let mut heq = MaxTracker::new();
    for yi in 0..h {
        let y = unit(h, yi);
        for zi in 0..k {
            let z = unit(k, zi);
            let dd = d_mat(&chart, &fd, &e, &(&mp.rho_e * &z), |p| r.delta_h.at(p))?;
            let v = mp.h_bracket.bracket(&y, &(&r.partial * &z)) - &r.partial * (mp.ell_e_of(&y) * &z) - dd * &y;
            heq.update(max_abs_vec(&v), || format!("y{yi},z{zi}"));
        }
    }
    rep.entries.push(Entry::from_max("boundary-equivariance", "[y,∂z] − ∂ℓ_e^y z = (d_eΔ^ℏ)_{ρ_e z}(y)", Kind::Fd, &heq, th));

    // anchor equivariance along G
    let mut geq = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        let v = &mp.rho_e * r.delta_k.at(g) - chart.ad_matrix(g) * &mp.rho_e - mp.alpha.at(g) * &r.partial;
        geq.update(max_abs(&v), || format!("g{gi}"));
    }
    rep.entries.push(Entry::from_max("anchor-equivariance", "ρ_e Δ^𝕜_g − Ad_g ρ_e = α_g ∂", Kind::Exact, &geq, th));

    // flatness of y ↦ [(α(y), Δ^ℏ y), ·] up to (ρ_e ω, ∂ω)
    let mut flat = MaxTracker::new();
    let alpha_sec = |y: Vector| {
        let a = mp.alpha.clone();
        Section::new(gd, move |g| a.at(g) * &y)
    };
    for (gi, g) in samples.iter().enumerate() {
        let ag = mp.alpha.at(g);
        let dhg = r.delta_h.at(g);
        let om = mp.omega.at(g);
        for i in 0..h {
            for j in (i + 1)..h {
                let (y0, y1) = (unit(h, i), unit(h, j));
                let yb = mp.h_bracket.bracket(&y0, &y1);
                let w = omega_apply(&om, &y0, &y1);
                let top = vf_bracket(&chart, &alpha_sec(y0.clone()), &alpha_sec(y1.clone()), g, &fd)? - &ag * &yb - &mp.rho_e * &w;
                let d1 = d_vec(&chart, &fd, g, &(&ag * &y0), |p| r.delta_h.at(p) * &y1)?;
                let d0 = d_vec(&chart, &fd, g, &(&ag * &y1), |p| r.delta_h.at(p) * &y0)?;
                let bottom = d1 - d0 + mp.h_bracket.bracket(&(&dhg * &y0), &(&dhg * &y1)) - &dhg * &yb - &r.partial * &w;
                flat.update(max_abs_vec(&top).max(max_abs_vec(&bottom)), || format!("g{gi},y{i},y{j}"));
            }
        }
    }
    rep.entries.push(Entry::from_max(
        "anchored-flatness",
        "[(α(y0),Δy0),(α(y1),Δy1)] − (α,Δ)[y0,y1] = (ρ_e ω, ∂ω)(y0,y1)",
        Kind::Fd,
        &flat,
        th,
    ));

    // Ξ_g = [[Ad_g, α_g], [0, Δ^ℏ_g]] is a representation up to Ω
    let xi = |g: &Mat| {
        let mut m = Mat::zeros(gd + h, gd + h);
        m.view_mut((0, 0), (gd, gd)).copy_from(&chart.ad_matrix(g));
        m.view_mut((0, gd), (gd, h)).copy_from(&mp.alpha.at(g));
        m.view_mut((gd, gd), (h, h)).copy_from(&r.delta_h.at(g));
        m
    };
    let mut qrep = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        let xg = xi(g);
        for (hi, hh) in samples.iter().enumerate() {
            let om = r.omega.at2(g, hh);
            let mut want = Mat::zeros(gd + h, gd + h);
            want.view_mut((0, gd), (gd, h)).copy_from(&(&mp.rho_e * &om));
            want.view_mut((gd, gd), (h, h)).copy_from(&(&r.partial * &om));
            let v = xi(&(g * hh)) - &xg * xi(hh) - want;
            qrep.update(max_abs(&v), || format!("g{gi},g{hi}"));
        }
    }
    rep.entries.push(Entry::from_max(
        "quasi-representation",
        "Ξ_{gh} − Ξ_g Ξ_h = (ρ_e Ω(g,h), ∂Ω(g,h)) with Ξ = (Ad ⊕ α, Δ^ℏ)",
        Kind::Exact,
        &qrep,
        th,
    ));

    // Δ^𝕜 and ∇ commute up to the curvatures
    let mut comm = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        let (ag, dkg, lg, om) = (mp.alpha.at(g), r.delta_k.at(g), ell.at(g), mp.omega.at(g));
        for yi in 0..h {
            let y = unit(h, yi);
            for zi in 0..k {
                let z = unit(k, zi);
                let nab = ell_block(&lg, &y, k) * (&dkg * &z) + d_vec(&chart, &fd, g, &(&ag * &y), |p| r.delta_k.at(p) * &z)?;
                let dom = d2_mat(&chart, &fd, g, &e, &Vector::zeros(gd), &(&mp.rho_e * &z), |a, b| r.omega.at2(a, b))?;
                let v = nab - &dkg * (mp.ell_e_of(&y) * &z) - omega_apply(&om, &y, &(&r.partial * &z)) + dom * &y;
                comm.update(max_abs_vec(&v), || format!("g{gi},y{yi},z{zi}"));
            }
        }
    }
    rep.entries.push(Entry::from_max(
        "core-commutation",
        "(∇_y Δ^𝕜 z)_g − Δ^𝕜_g ℓ_e^y z = ω_g(y,∂z) − (d_{(g,e)}Ω)_{(0,ρ_e z)}(y)",
        Kind::Fd,
        &comm,
        th,
    ));

    // Maurer-Cartan equation for Ω
    let mut mc = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        for (hi, hh) in samples.iter().enumerate() {
            let res = maurer_cartan_at(mp, &core, ell, g, hh, &fd)?;
            mc.update(res.0, || format!("g{gi},g{hi},{}", res.1));
        }
    }
    rep.entries.push(Entry::from_max(
        "maurer-cartan",
        "δ^Δω = [Ω,Ω] − d_∇Ω with the connection on G² from ℓ_{gh} and α",
        Kind::Fd,
        &mc,
        th,
    ));
    Ok(rep)
}

/// Max over basis pairs of d_∇Ω(y0,y1) − [Ωy0,Ωy1] + (δ^Δω)(y0,y1) at (g,h).
fn maurer_cartan_at(mp: &MatchedPair, core: &LieAlgebra, ell: &SmoothMap, g: &Mat, hh: &Mat, fd: &Fd) -> Result<(f64, String)> {
    let (h, k) = (mp.h(), mp.k());
    let r = &mp.ruth;
    let chart = mp.chart();
    let gh = g * hh;
    let (om, lgh, dhh) = (r.omega.at2(g, hh), ell.at(&gh), r.delta_h.at(hh));
    let (ag, ah) = (mp.alpha.at(g), mp.alpha.at(hh));
    let nabla = |y: &Vector, y2: &Vector| -> Result<Vector> {
        let d = d2_mat(chart, fd, g, hh, &(&ag * (&dhh * y)), &(&ah * y), |a, b| r.omega.at2(a, b))?;
        Ok(ell_block(&lgh, y, k) * (&om * y2) + d * y2)
    };
    let delta_omega = |y0: &Vector, y1: &Vector| {
        r.delta_k.at(g) * omega_apply(&mp.omega.at(hh), y0, y1) - omega_apply(&mp.omega.at(&gh), y0, y1)
            + omega_apply(&mp.omega.at(g), &(&dhh * y0), &(&dhh * y1))
    };
    let mut worst = (0.0, String::from("-"));
    for i in 0..h {
        for j in (i + 1)..h {
            let (y0, y1) = (unit(h, i), unit(h, j));
            let d_nabla = nabla(&y0, &y1)? - nabla(&y1, &y0)? - &om * mp.h_bracket.bracket(&y0, &y1);
            // δ^Δω = [Ω,Ω] − d_∇Ω, the sign forced by multiplicativity of the bracket
            let v = d_nabla - core.bracket(&(&om * &y0), &(&om * &y1)) + delta_omega(&y0, &y1);
            let res = max_abs_vec(&v);
            if res > worst.0 || res.is_nan() {
                worst = (res, format!("y{i},y{j}"));
            }
        }
    }
    Ok(worst)
}

/// The LA-group G×(𝕜⊕𝕙) ⇉ 𝕙: its groupoid structure, anchor and bracket of
/// constant sections, all in the coordinates of one splitting.
#[derive(Debug, Clone)]
pub struct LaGroup {
    pub ruth: Ruth,
    /// dim 𝔤 × (k + h); anchor(g; z, y) = A_g (z, y).
    pub anchor: SmoothMap,
    pub bracket: AlgebroidData,
    pub h_bracket: LieAlgebra,
}

impl LaGroup {
    pub fn h(&self) -> usize {
        self.ruth.h_dim
    }

    pub fn k(&self) -> usize {
        self.ruth.k_dim
    }

    pub fn anchor_of(&self, a: &VbArrow) -> Vector {
        self.anchor.at(&a.g) * stack(&a.z, &a.y)
    }

    /// Bracket of the constant sections (z0,y0), (z1,y1) at g.
    pub fn const_bracket(&self, g: &Mat, z0: &Vector, y0: &Vector, z1: &Vector, y1: &Vector) -> (Vector, Vector) {
        split(&self.bracket.const_bracket(g, &stack(z0, y0), &stack(z1, y1)), self.k())
    }
}

/// LA-group data of a matched pair without checking the axioms.
pub fn assemble_unchecked(mp: &MatchedPair) -> Result<LaGroup> {
    mp.validate()?;
    let core = derive_core_bracket(mp, DATA_FD)?;
    let ext = build_extension(&to_auth(mp, core, DATA_FD));
    Ok(LaGroup { ruth: mp.ruth.clone(), anchor: ext.anchor.clone(), bracket: ext, h_bracket: mp.h_bracket.clone() })
}

/// Assembles the LA-group, refusing when any axiom fails on the samples.
pub fn assemble_la_group(mp: &MatchedPair, samples: &[Mat], cfg: &CheckConfig) -> Result<LaGroup> {
    let rep = check_matched_pair(mp, samples, cfg)?;
    let failing: Vec<String> = rep.failing().iter().map(|e| format!("{} ({:.3e})", e.name, e.residual)).collect();
    if !failing.is_empty() {
        return Err(Error::Precondition(format!("matched pair fails: {}", failing.join(", "))));
    }
    assemble_unchecked(mp)
}

/// Tensors read off an LA-group's bracket and anchor at one point.
struct Readout {
    alpha: Mat,
    ell: Mat,
    omega: Mat,
    core: LieAlgebra,
}

fn readout(lg: &LaGroup, g: &Mat) -> Readout {
    let (h, k) = (lg.h(), lg.k());
    let an = lg.anchor.at(g);
    let zk = Vector::zeros(k);
    let zh = Vector::zeros(h);
    let ell = pack_ell(k, h, |i| {
        let mut m = Mat::zeros(k, k);
        for j in 0..k {
            m.set_column(j, &lg.const_bracket(g, &zk, &unit(h, i), &unit(k, j), &zh).0);
        }
        m
    });
    let omega = pack_bilinear(k, h, |i, j| lg.const_bracket(g, &zk, &unit(h, i), &zk, &unit(h, j)).0);
    let core = LieAlgebra::from_bracket(k, |i, j| lg.const_bracket(g, &unit(k, i), &zh, &unit(k, j), &zh).0);
    Readout { alpha: an.columns(k, h).into_owned(), ell, omega, core }
}

/// Names of the morphism entries, in report order.
pub const MORPHISM_ENTRIES: [&str; 17] = [
    "source-bracket",
    "unit-vanishing",
    "target-core-homomorphism",
    "target-rels-ell",
    "target-rels-omega",
    "anchor-ruth",
    "anchor-ruth-curvature",
    "anchor-multiplicative",
    "anchor-core-homomorphism",
    "anchor-rels-ell",
    "anchor-rels-omega",
    "right-invariant-core",
    "mult-boundary-action",
    "mult-ell-cocycle",
    "mult-core-twist",
    "mult-core-commutation",
    "mult-maurer-cartan",
];

/// Morphism conditions for source, unit, target, anchor and multiplication.
pub fn verify_morphisms(lg: &LaGroup, samples: &[Mat], cfg: &CheckConfig) -> Result<SuiteReport> {
    if samples.is_empty() {
        return Err(Error::Precondition("no samples".into()));
    }
    let (h, k) = (lg.h(), lg.k());
    let r = &lg.ruth;
    let chart = r.chart.clone();
    let gd = chart.dim();
    let fd = cfg.fd;
    let th = &cfg.thresholds;
    let e = chart.identity();
    let zk = Vector::zeros(k);
    let zh = Vector::zeros(h);
    let at_e = readout(lg, &e);
    let rho_e = lg.anchor.at(&e).columns(0, k).into_owned();
    let reads: Vec<Readout> = samples.iter().map(|g| readout(lg, g)).collect();
    let ell_at = |g: &Mat| readout(lg, g).ell;
    let omega_at = |g: &Mat| readout(lg, g).omega;
    let alpha_at = |g: &Mat| lg.anchor.at(g).columns(k, h).into_owned();
    let core = &at_e.core;

    let mut rep = SuiteReport::new("morphisms");

    // source
    let mut src = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        for i in 0..h {
            for j in 0..h {
                let (_, yb) = lg.const_bracket(g, &zk, &unit(h, i), &zk, &unit(h, j));
                let want = lg.h_bracket.bracket(&unit(h, i), &unit(h, j));
                src.update(max_abs_vec(&(yb - want)), || format!("g{gi},y{i},y{j}"));
            }
            for j in 0..k {
                let (_, yb) = lg.const_bracket(g, &zk, &unit(h, i), &unit(k, j), &zh);
                src.update(max_abs_vec(&yb), || format!("g{gi},y{i},z{j}"));
            }
        }
        for i in 0..k {
            for j in 0..k {
                let (_, yb) = lg.const_bracket(g, &unit(k, i), &zh, &unit(k, j), &zh);
                src.update(max_abs_vec(&yb), || format!("g{gi},z{i},z{j}"));
            }
        }
    }
    rep.entries.push(Entry::from_max("source-bracket", "s[y0^σ,y1^σ] = [y0,y1], s[y^σ,z^R] = s[z0^R,z1^R] = 0", Kind::Exact, &src, th));

    // unit
    let mut unit_t = MaxTracker::new();
    unit_t.update(max_abs(&at_e.alpha), || "alpha".into());
    unit_t.update(max_abs(&at_e.omega), || "omega".into());
    rep.entries.push(Entry::from_max("unit-vanishing", "α_e = 0, ω_e = 0", Kind::Exact, &unit_t, th));

    // target
    let mut thom = MaxTracker::new();
    for i in 0..k {
        for j in 0..k {
            let (a, b) = (unit(k, i), unit(k, j));
            let v = &r.partial * core.bracket(&a, &b) - lg.h_bracket.bracket(&(&r.partial * &a), &(&r.partial * &b));
            thom.update(max_abs_vec(&v), || format!("z{i},z{j}"));
        }
    }
    rep.entries.push(Entry::from_max("target-core-homomorphism", "∂[z0,z1] = [∂z0,∂z1]", Kind::Fd, &thom, th));

    let mut trel1 = MaxTracker::new();
    let mut trel2 = MaxTracker::new();
    let mut arel1 = MaxTracker::new();
    let mut arel2 = MaxTracker::new();
    let alpha_sec = |y: Vector| {
        let a = lg.anchor.clone();
        Section::new(gd, move |g| a.at(g).columns(k, h) * &y)
    };
    for (gi, g) in samples.iter().enumerate() {
        let rd = &reads[gi];
        let dhg = r.delta_h.at(g);
        for yi in 0..h {
            let y = unit(h, yi);
            let lgy = ell_block(&rd.ell, &y, k);
            for zi in 0..k {
                let z = unit(k, zi);
                let x = &rho_e * &z;
                let dd = d_vec(&chart, &fd, g, &x, |p| r.delta_h.at(p) * &y)?;
                let v = &r.partial * (&lgy * &z) - lg.h_bracket.bracket(&(&dhg * &y), &(&r.partial * &z)) + dd;
                trel1.update(max_abs_vec(&v), || format!("g{gi},y{yi},z{zi}"));
                let da = d_vec(&chart, &fd, g, &x, |p| alpha_at(p) * &y)?;
                let v = &rho_e * (&lgy * &z) - chart.rinv_bracket(&(&rd.alpha * &y), &x) + da;
                arel1.update(max_abs_vec(&v), || format!("g{gi},y{yi},z{zi}"));
            }
            for y2i in (yi + 1)..h {
                let y2 = unit(h, y2i);
                let yb = lg.h_bracket.bracket(&y, &y2);
                let w = omega_apply(&rd.omega, &y, &y2);
                let (a0, a1) = (&rd.alpha * &y, &rd.alpha * &y2);
                let d10 = d_vec(&chart, &fd, g, &a1, |p| r.delta_h.at(p) * &y)?;
                let d01 = d_vec(&chart, &fd, g, &a0, |p| r.delta_h.at(p) * &y2)?;
                let v = lg.h_bracket.bracket(&(&dhg * &y), &(&dhg * &y2)) - &dhg * &yb - &r.partial * &w - d10 + d01;
                trel2.update(max_abs_vec(&v), || format!("g{gi},y{yi},y{y2i}"));
                let v = vf_bracket(&chart, &alpha_sec(y.clone()), &alpha_sec(y2.clone()), g, &fd)? - &rd.alpha * &yb - &rho_e * &w;
                arel2.update(max_abs_vec(&v), || format!("g{gi},y{yi},y{y2i}"));
            }
        }
    }
    rep.entries.push(Entry::from_max("target-rels-ell", "∂ℓ_g^y z = [Δ^ℏ_g y, ∂z] − (d_gΔ^ℏ)_{ρ_e z}(y)", Kind::Fd, &trel1, th));
    rep.entries.push(Entry::from_max(
        "target-rels-omega",
        "[Δy0,Δy1] − Δ[y0,y1] = ∂ω(y0,y1) + (dΔ)_{α(y1)}(y0) − (dΔ)_{α(y0)}(y1)",
        Kind::Fd,
        &trel2,
        th,
    ));

    // anchor as a groupoid morphism
    let mut aruth = MaxTracker::new();
    let mut aruth2 = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        let ag = &reads[gi].alpha;
        let v = &rho_e * r.delta_k.at(g) - chart.ad_matrix(g) * &rho_e - ag * &r.partial;
        aruth.update(max_abs(&v), || format!("g{gi}"));
        for (hi, hh) in samples.iter().enumerate() {
            let v = ag * r.delta_h.at(hh) - alpha_at(&(g * hh)) + chart.ad_matrix(g) * &reads[hi].alpha + &rho_e * r.omega.at2(g, hh);
            aruth2.update(max_abs(&v), || format!("g{gi},g{hi}"));
        }
    }
    rep.entries.push(Entry::from_max("anchor-ruth", "ρ_e Δ^𝕜_g = Ad_g ρ_e + α_g ∂", Kind::Exact, &aruth, th));
    rep.entries.push(Entry::from_max(
        "anchor-ruth-curvature",
        "α_g Δ^ℏ_h = α_{gh} − Ad_g α_h − ρ_e Ω(g,h)",
        Kind::Exact,
        &aruth2,
        th,
    ));

    let mut amult = MaxTracker::new();
    let mut gen = rng(cfg.seed ^ 0xa11c_4e5d);
    for (gi, g) in samples.iter().enumerate() {
        for (hi, hh) in samples.iter().enumerate() {
            let a1 = VbArrow::new(hh.clone(), ball_point(&mut gen, k, 1.0), ball_point(&mut gen, h, 1.0));
            let a0 = VbArrow::new(g.clone(), ball_point(&mut gen, k, 1.0), r.target(&a1));
            let m = r.mul_unchecked(&a0, &a1);
            let v = lg.anchor_of(&m) - lg.anchor_of(&a0) - chart.ad_matrix(g) * lg.anchor_of(&a1);
            amult.update(max_abs_vec(&v), || format!("g{gi},g{hi}"));
        }
    }
    rep.entries.push(Entry::from_max("anchor-multiplicative", "ρ(a0·a1) = ρ(a0) + Ad_g ρ(a1)", Kind::Exact, &amult, th));

    let mut ahom = MaxTracker::new();
    for i in 0..k {
        for j in 0..k {
            let (a, b) = (unit(k, i), unit(k, j));
            let v = &rho_e * core.bracket(&a, &b) - chart.rinv_bracket(&(&rho_e * &a), &(&rho_e * &b));
            ahom.update(max_abs_vec(&v), || format!("z{i},z{j}"));
        }
    }
    rep.entries.push(Entry::from_max("anchor-core-homomorphism", "ρ_e[z0,z1] = [ρ_e z0, ρ_e z1] of right-invariant fields", Kind::Fd, &ahom, th));
    rep.entries.push(Entry::from_max(
        "anchor-rels-ell",
        "ρ_e ℓ_g^y z = [α_g y, ρ_e z] − (d_gα)_{ρ_e z}(y)",
        Kind::Fd,
        &arel1,
        th,
    ));
    rep.entries.push(Entry::from_max(
        "anchor-rels-omega",
        "[α y0, α y1] − α[y0,y1] = ρ_e ω(y0,y1) + (dα)_{α y1}(y0) − (dα)_{α y0}(y1)",
        Kind::Fd,
        &arel2,
        th,
    ));

    // multiplication
    let mut rinv = MaxTracker::new();
    for (gi, rd) in reads.iter().enumerate() {
        rinv.update(rd.core.max_abs_diff(core), || format!("g{gi}"));
    }
    rep.entries.push(Entry::from_max("right-invariant-core", "[z0^R,z1^R] is right-invariant", Kind::Exact, &rinv, th));

    let dk_dir = |g: &Mat, x: &Vector, z: &Vector| d_vec(&chart, &fd, g, x, |p| r.delta_k.at(p) * z);
    let om_dir = |g: &Mat, hh: &Mat, x: &Vector, x2: &Vector, y: &Vector| -> Result<Vector> {
        Ok(d2_mat(&chart, &fd, g, hh, x, x2, |a, b| r.omega.at2(a, b))? * y)
    };
    let zg = Vector::zeros(gd);
    let mut m01 = MaxTracker::new();
    let mut m11 = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        let rd = &reads[gi];
        let dkg = r.delta_k.at(g);
        for i in 0..k {
            let z0 = unit(k, i);
            for j in 0..k {
                let z1 = unit(k, j);
                let v = ell_block(&rd.ell, &(&r.partial * &z0), k) * &z1 - core.bracket(&(&dkg * &z0), &z1)
                    + dk_dir(g, &(&rho_e * &z1), &z0)?;
                m01.update(max_abs_vec(&v), || format!("g{gi},z{i},z{j}"));
                let v = omega_apply(&rd.omega, &(&r.partial * &z0), &(&r.partial * &z1))
                    - core.bracket(&(&dkg * &z0), &(&dkg * &z1))
                    + &dkg * core.bracket(&z0, &z1)
                    - dk_dir(g, &(&rd.alpha * (&r.partial * &z0)), &z1)?
                    + dk_dir(g, &(&rd.alpha * (&r.partial * &z1)), &z0)?;
                m11.update(max_abs_vec(&v), || format!("g{gi},z{i},z{j}"));
            }
        }
    }

    let mut m02 = MaxTracker::new();
    let mut m12 = MaxTracker::new();
    let mut m22 = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        let rd = &reads[gi];
        let dkg = r.delta_k.at(g);
        for (hi, hh) in samples.iter().enumerate() {
            let gh = g * hh;
            let (lgh, lh, om) = (ell_at(&gh), &reads[hi].ell, r.omega.at2(g, hh));
            let dhh = r.delta_h.at(hh);
            let ah = &reads[hi].alpha;
            for yi in 0..h {
                let y = unit(h, yi);
                for zi in 0..k {
                    let z = unit(k, zi);
                    let x = &rho_e * &z;
                    let v = ell_block(&lgh, &y, k) * &z - ell_block(&rd.ell, &(&dhh * &y), k) * &z
                        - core.bracket(&(&om * &y), &z)
                        + om_dir(g, hh, &x, &zg, &y)?;
                    m02.update(max_abs_vec(&v), || format!("g{gi},g{hi},y{yi},z{zi}"));
                    let dz = &dkg * &z;
                    let v = &dkg * (ell_block(lh, &y, k) * &z) - ell_block(&lgh, &y, k) * &dz
                        + omega_apply(&rd.omega, &(&dhh * &y), &(&r.partial * &z))
                        + core.bracket(&(&om * &y), &dz)
                        - dk_dir(g, &(&rd.alpha * (&dhh * &y)), &z)?
                        - om_dir(g, hh, &(&rd.alpha * (&r.partial * &z)), &x, &y)?;
                    m12.update(max_abs_vec(&v), || format!("g{gi},g{hi},y{yi},z{zi}"));
                }
                for y2i in (yi + 1)..h {
                    let y2 = unit(h, y2i);
                    let (w0, w1) = (&om * &y, &om * &y2);
                    let v = &dkg * omega_apply(&reads[hi].omega, &y, &y2) - omega_apply(&omega_at(&gh), &y, &y2)
                        + omega_apply(&rd.omega, &(&dhh * &y), &(&dhh * &y2))
                        + ell_block(&lgh, &y, k) * &w1
                        - ell_block(&lgh, &y2, k) * &w0
                        - &om * lg.h_bracket.bracket(&y, &y2)
                        - core.bracket(&w0, &w1)
                        - om_dir(g, hh, &(&rd.alpha * (&dhh * &y2)), &(ah * &y2), &y)?
                        + om_dir(g, hh, &(&rd.alpha * (&dhh * &y)), &(ah * &y), &y2)?;
                    m22.update(max_abs_vec(&v), || format!("g{gi},g{hi},y{yi},y{y2i}"));
                }
            }
        }
    }
    rep.entries.push(Entry::from_max(
        "mult-boundary-action",
        "ℓ_g^{∂z0} z1 = [Δ^𝕜_g z0, z1] − (d_gΔ^𝕜)_{ρ_e z1}(z0)",
        Kind::Fd,
        &m01,
        th,
    ));
    rep.entries.push(Entry::from_max(
        "mult-ell-cocycle",
        "ℓ_{gh}^y z − ℓ_g^{Δ_h y} z = [Ω(g,h)y, z] − (d_{(g,h)}Ω)_{(ρ_e z,0)}(y)",
        Kind::Fd,
        &m02,
        th,
    ));
    rep.entries.push(Entry::from_max(
        "mult-core-twist",
        "ω_g(∂z0,∂z1) = [Δz0,Δz1] − Δ[z0,z1] + (dΔ)_{α(∂z0)}(z1) − (dΔ)_{α(∂z1)}(z0)",
        Kind::Fd,
        &m11,
        th,
    ));
    rep.entries.push(Entry::from_max(
        "mult-core-commutation",
        "Δ_g ℓ_h^y z − ℓ_{gh}^y Δ_g z + ω_g(Δ_h y,∂z) = [Δ_g z, Ω y] + (dΔ)_{α_g Δ_h y}(z) + (dΩ)_{(α_g ∂z, ρ_e z)}(y)",
        Kind::Fd,
        &m12,
        th,
    ));
    rep.entries.push(Entry::from_max(
        "mult-maurer-cartan",
        "Δ_gω_h − ω_{gh} + ω_g(Δ_h·,Δ_h·) + ℓ_{gh}^{y0}Ωy1 − ℓ_{gh}^{y1}Ωy0 = Ω[y0,y1] + [Ωy0,Ωy1] + dΩ terms",
        Kind::Fd,
        &m22,
        th,
    ));
    Ok(rep)
}

pub type SplitDeriv = Arc<dyn Fn(&Mat, &Vector) -> Mat + Send + Sync>;

/// A splitting σ_g(y) = (φ_g y, y) in the coordinates of an LA-group;
/// `dphi(g, x)` is the derivative of φ along the right-invariant field of x.
#[derive(Clone)]
pub struct Splitting {
    /// k × h.
    pub phi: SmoothMap,
    pub dphi: Option<SplitDeriv>,
}

impl core::fmt::Debug for Splitting {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Splitting({}×{}, exact derivative: {})", self.phi.rows, self.phi.cols, self.dphi.is_some())
    }
}

impl Splitting {
    pub fn canonical(k: usize, h: usize) -> Self {
        let zero = Mat::zeros(k, h);
        Splitting { phi: SmoothMap::constant(1, zero.clone()), dphi: Some(Arc::new(move |_, _| zero.clone())) }
    }

    fn d(&self, chart: &GroupChart, fd: &Fd, g: &Mat, x: &Vector) -> Result<Mat> {
        match &self.dphi {
            Some(d) => Ok(d(g, x)),
            None => chart.deriv(fd, g, x, |p| self.phi.try_eval(core::slice::from_ref(p))),
        }
    }
}

/// φ_g(y) = s(g)(Σy)z with its exact derivative on `chart`.
pub fn shifted_splitting(chart: &GroupChart, z: &Vector, h: usize) -> Splitting {
    let k = z.len();
    let base = crate::numkit::as_mat(z) * Mat::from_element(1, h, 1.0);
    let (b1, b2) = (base.clone(), base);
    let ch = chart.clone();
    let phi = SmoothMap::unary(k, h, move |g| &b1 * (g.iter().sum::<f64>() - g.nrows() as f64));
    let dphi: SplitDeriv = Arc::new(move |g, x| &b2 * (ch.embed(x) * g).iter().sum::<f64>());
    Splitting { phi, dphi: Some(dphi) }
}

/// Matched pair induced by a unit-extending splitting of an LA-group.
pub fn extract_matched_pair(lg: &LaGroup, sigma: &Splitting, cfg: &CheckConfig) -> Result<MatchedPair> {
    let (h, k) = (lg.h(), lg.k());
    let r = lg.ruth.clone();
    let chart = r.chart.clone();
    let e = chart.identity();
    if (sigma.phi.arity, sigma.phi.rows, sigma.phi.cols) != (1, k, h) {
        return Err(Error::InvalidInput(format!("splitting must be {k}×{h}")));
    }
    let at_e = max_abs(&sigma.phi.try_eval(core::slice::from_ref(&e))?);
    if at_e > cfg.tol.max(cfg.thresholds.exact) {
        return Err(Error::Precondition(format!("splitting does not extend the unit: |φ_e| = {at_e:.3e}")));
    }
    let fd = cfg.fd;

    // groupoid structure transported along T_g(z', y) = (z' + φ_g y, y)
    let phi = sigma.phi.clone();
    let to = {
        let phi = phi.clone();
        move |a: &VbArrow| VbArrow::new(a.g.clone(), &a.z + phi.at(&a.g) * &a.y, a.y.clone())
    };
    let from = {
        let phi = phi.clone();
        move |a: &VbArrow| VbArrow::new(a.g.clone(), &a.z - phi.at(&a.g) * &a.y, a.y.clone())
    };
    let (rr, t1) = (r.clone(), to.clone());
    let delta_h = SmoothMap::unary(h, h, move |g| {
        let mut m = Mat::zeros(h, h);
        for i in 0..h {
            m.set_column(i, &rr.target(&t1(&VbArrow::new(g.clone(), Vector::zeros(k), unit(h, i)))));
        }
        m
    });
    let (rr, t2, f2) = (r.clone(), to.clone(), from.clone());
    let delta_k = SmoothMap::unary(k, k, move |g| {
        let e = rr.chart.identity();
        let mut m = Mat::zeros(k, k);
        for j in 0..k {
            let z = unit(k, j);
            let a0 = t2(&VbArrow::new(g.clone(), Vector::zeros(k), &rr.partial * &z));
            let a1 = t2(&VbArrow::new(e.clone(), z, Vector::zeros(h)));
            m.set_column(j, &f2(&rr.mul_unchecked(&a0, &a1)).z);
        }
        m
    });
    let (rr, t3, f3, dh3) = (r.clone(), to.clone(), from.clone(), delta_h.clone());
    let omega2 = SmoothMap::binary(k, h, move |g, hh| {
        let dhh = dh3.at(hh);
        let mut m = Mat::zeros(k, h);
        for i in 0..h {
            let y = unit(h, i);
            let a0 = t3(&VbArrow::new(g.clone(), Vector::zeros(k), &dhh * &y));
            let a1 = t3(&VbArrow::new(hh.clone(), Vector::zeros(k), y));
            m.set_column(i, &(-f3(&rr.mul_unchecked(&a0, &a1)).z));
        }
        m
    });
    let ruth = Ruth { chart: chart.clone(), h_dim: h, k_dim: k, partial: r.partial.clone(), delta_h, delta_k, omega: omega2 };

    let rho_e = lg.anchor.at(&e).columns(0, k).into_owned();
    let sigma_mat = {
        let phi = phi.clone();
        move |g: &Mat| {
            let mut s = Mat::zeros(k + h, h);
            s.view_mut((0, 0), (k, h)).copy_from(&phi.at(g));
            s.view_mut((k, 0), (h, h)).copy_from(&Mat::identity(h, h));
            s
        }
    };
    let (an, sm) = (lg.anchor.clone(), sigma_mat.clone());
    let alpha = SmoothMap::unary(chart.dim(), h, move |g| an.at(g) * sm(g));

    let zk = Vector::zeros(k);
    let mut ell_e = Mat::zeros(k, h * k);
    for i in 0..h {
        for j in 0..k {
            let z = unit(k, j);
            let (bz, _) = lg.const_bracket(&e, &zk, &unit(h, i), &z, &Vector::zeros(h));
            let d = sigma.d(&chart, &fd, &e, &(&rho_e * &z))? * unit(h, i);
            ell_e.set_column(i * k + j, &(bz - d));
        }
    }

    let (lg2, sm2, sg, ch2, al2, hb) = (lg.clone(), sigma_mat, sigma.clone(), chart.clone(), alpha.clone(), lg.h_bracket.clone());
    let omega = SmoothMap::unary(k, h * h, move |g| {
        let s = sm2(g);
        let ag = al2.at(g);
        pack_bilinear(k, h, |i, j| {
            let (y0, y1) = (unit(h, i), unit(h, j));
            let mut v = lg2.bracket.const_bracket(g, &(&s * &y0), &(&s * &y1)) - &s * hb.bracket(&y0, &y1);
            let d1 = sg.d(&ch2, &fd, g, &(&ag * &y0)).map(|m| m * &y1);
            let d0 = sg.d(&ch2, &fd, g, &(&ag * &y1)).map(|m| m * &y0);
            match (d1, d0) {
                (Ok(d1), Ok(d0)) => {
                    let mut top = v.rows_mut(0, k);
                    top += d1 - d0;
                }
                _ => v.fill(f64::NAN),
            }
            v.rows(0, k).into_owned()
        })
    });
    let mp = MatchedPair { ruth, rho_e, alpha, ell_e, omega, h_bracket: lg.h_bracket.clone() };
    mp.validate()?;
    Ok(mp)
}

/// Largest difference of every tensor of two matched pairs over the samples.
pub fn compare_pairs(a: &MatchedPair, b: &MatchedPair, samples: &[Mat]) -> Vec<(&'static str, f64)> {
    let mut dh = 0.0f64;
    let mut dk = 0.0f64;
    let mut om = 0.0f64;
    let mut al = 0.0f64;
    let mut w = 0.0f64;
    for g in samples {
        dh = dh.max(max_abs(&(a.ruth.delta_h.at(g) - b.ruth.delta_h.at(g))));
        dk = dk.max(max_abs(&(a.ruth.delta_k.at(g) - b.ruth.delta_k.at(g))));
        al = al.max(max_abs(&(a.alpha.at(g) - b.alpha.at(g))));
        w = w.max(max_abs(&(a.omega.at(g) - b.omega.at(g))));
        for hh in samples {
            om = om.max(max_abs(&(a.ruth.omega.at2(g, hh) - b.ruth.omega.at2(g, hh))));
        }
    }
    alloc::vec![
        ("boundary", max_abs(&(&a.ruth.partial - &b.ruth.partial))),
        ("delta-h", dh),
        ("delta-k", dk),
        ("curvature", om),
        ("rho-e", max_abs(&(&a.rho_e - &b.rho_e))),
        ("alpha", al),
        ("ell-e", max_abs(&(&a.ell_e - &b.ell_e))),
        ("omega", w),
        ("h-bracket", a.h_bracket.max_abs_diff(&b.h_bracket)),
    ]
}

/// Orthonormal basis of the column space, empty-safe.
fn image_basis(m: &Mat, tol: f64) -> Result<SubspaceBasis> {
    if m.nrows() == 0 {
        return Ok(SubspaceBasis::zero(0, tol));
    }
    if m.ncols() == 0 {
        return Ok(SubspaceBasis::zero(m.nrows(), tol));
    }
    SubspaceBasis::span(m, tol)
}

fn kernel_basis(m: &Mat, tol: f64) -> Result<SubspaceBasis> {
    if m.ncols() == 0 {
        return Ok(SubspaceBasis::zero(0, tol));
    }
    if m.nrows() == 0 {
        return Ok(SubspaceBasis::full(m.ncols(), tol));
    }
    Ok(svd_subspaces(m, tol)?.kernel)
}

/// ᾱ_g: α_g followed by the projection onto the complement of 𝔩 = ρ_e(𝕜).
pub fn alpha_bar(mp: &MatchedPair, g: &Mat, tol: f64) -> Result<Mat> {
    let l = image_basis(&mp.rho_e, tol)?;
    let d = mp.chart().dim();
    Ok((Mat::identity(d, d) - l.projector()) * mp.alpha.at(g))
}

/// Δ⁰, Δ¹ and ᾱ of two splittings of the same LA-group.
pub fn splitting_independence(a: &MatchedPair, b: &MatchedPair, samples: &[Mat], cfg: &CheckConfig) -> Result<SuiteReport> {
    let (ia, ib) = (induced_actions(&a.ruth, cfg.tol)?, induced_actions(&b.ruth, cfg.tol)?);
    let mut d0 = MaxTracker::new();
    let mut d1 = MaxTracker::new();
    let mut ab = MaxTracker::new();
    let mut raw = 0.0f64;
    for (gi, g) in samples.iter().enumerate() {
        d0.update(max_abs(&(ia.delta0.at(g) - ib.delta0.at(g))), || format!("g{gi}"));
        d1.update(max_abs(&(ia.delta1.at(g) - ib.delta1.at(g))), || format!("g{gi}"));
        ab.update(max_abs(&(alpha_bar(a, g, cfg.tol)? - alpha_bar(b, g, cfg.tol)?)), || format!("g{gi}"));
        raw = raw.max(max_abs(&(a.alpha.at(g) - b.alpha.at(g))));
    }
    let th = &cfg.thresholds;
    let mut rep = SuiteReport::new("splitting");
    rep.entries.push(Entry::from_max("coker-action-agrees", "Δ⁰ is the same for both splittings", Kind::Exact, &d0, th));
    rep.entries.push(Entry::from_max("ker-action-agrees", "Δ¹ is the same for both splittings", Kind::Exact, &d1, th));
    let mut en = Entry::from_max("alpha-bar-agrees", "α mod 𝔩 is the same for both splittings", Kind::Exact, &ab, th);
    en.threshold = en.threshold.max(1e-8);
    en.passed = ab.value.is_finite() && ab.value <= en.threshold;
    rep.entries.push(en);
    rep.entries.push(Entry {
        name: "alpha-differs".into(),
        law: "max |α − α'| (informational)".into(),
        residual: raw,
        threshold: f64::INFINITY,
        kind: Kind::Exact,
        passed: true,
        worst: "-".into(),
        applicable: true,
    });
    Ok(rep)
}

/// Restriction of an endomorphism to an orthonormal basis, and its leak.
fn restrict_map(m: &Mat, b: &SubspaceBasis) -> (Mat, f64) {
    let img = m * &b.vectors;
    let coords = b.vectors.transpose() * &img;
    let leak = if img.ncols() == 0 { 0.0 } else { max_abs(&(img - &b.vectors * &coords)) };
    (coords, leak)
}

/// Crossed modules, butterfly and isotropy algebras of a matched pair.
#[derive(Debug, Clone)]
pub struct Derived {
    pub core: LieAlgebra,
    pub lie2_at_e: CrossedModule,
    pub ker_boundary: CrossedModule,
    pub butterfly: Butterfly,
}

pub fn build_derived(mp: &MatchedPair, cfg: &CheckConfig) -> Result<(Derived, f64)> {
    let (h, k) = (mp.h(), mp.k());
    let chart = mp.chart();
    let gd = chart.dim();
    let tol = cfg.tol;
    let fd = Fd::richardson(cfg.fd.step);
    let core = derive_core_bracket(mp, DATA_FD)?;
    let e = chart.identity();
    let mut leak = 0.0f64;

    // ∂: 𝔨 → 𝕙 with 𝔨 = ker ρ_e and the action ℓ_e
    let kk = kernel_basis(&mp.rho_e, tol)?;
    let (ktop, l1) = core.restrict(&kk);
    leak = leak.max(l1);
    let mut act = Vec::with_capacity(h);
    for i in 0..h {
        let (m, l) = restrict_map(&mp.ell_e_of(&unit(h, i)), &kk);
        leak = leak.max(l);
        act.push(m);
    }
    let lie2_at_e = CrossedModule { base: mp.h_bracket.clone(), top: ktop, structural: &mp.ruth.partial * &kk.vectors, action: act };

    // ρ_e: ker ∂ → 𝔤 with the action −d_eΔ^𝕜
    let kd = kernel_basis(&mp.ruth.partial, tol)?;
    let (dtop, l2) = core.restrict(&kd);
    leak = leak.max(l2);
    let mut act = Vec::with_capacity(gd);
    for i in 0..gd {
        let d = chart.deriv(&fd, &e, &unit(gd, i), |p| mp.ruth.delta_k.try_eval(core::slice::from_ref(p)))?;
        let (m, l) = restrict_map(&(-d), &kd);
        leak = leak.max(l);
        act.push(m);
    }
    let ker_boundary =
        CrossedModule { base: chart.algebra.opposite(), top: dtop, structural: &mp.rho_e * &kd.vectors, action: act };

    let lb = image_basis(&mp.rho_e, tol)?;
    let ib = image_basis(&mp.ruth.partial, tol)?;
    let butterfly = Butterfly {
        center: core.clone(),
        nw_incl: kk.vectors.clone(),
        ne_incl: kd.vectors.clone(),
        to_sw: ib.vectors.transpose() * &mp.ruth.partial,
        to_se: lb.vectors.transpose() * &mp.rho_e,
    };
    let _ = k;
    Ok((Derived { core, lie2_at_e, ker_boundary, butterfly }, leak))
}

/// Isotropy algebra at g as the twisted semidirect product of ker ᾱ_g and 𝔨,
/// split by Z = ρ_e⁺ α_g. Returns the Jacobi residual and the leak of the
/// data out of 𝔨, or None when ρ_e Z ≠ α_g on ker ᾱ_g.
pub fn isotropy_algebra(mp: &MatchedPair, core: &LieAlgebra, ell_g: &Mat, g: &Mat, tol: f64) -> Result<Option<(LieAlgebra, f64)>> {
    let (h, k) = (mp.h(), mp.k());
    let ag = mp.alpha.at(g);
    let base_b = kernel_basis(&alpha_bar(mp, g, tol)?, tol)?;
    let kk = kernel_basis(&mp.rho_e, tol)?;
    let zmap = if k == 0 { Mat::zeros(0, h) } else { pinv(&mp.rho_e, tol) * &ag };
    let splits = &mp.rho_e * &zmap * &base_b.vectors - &ag * &base_b.vectors;
    if base_b.dim() > 0 && max_abs(&splits) > tol.max(1e-9) * 10.0 {
        return Ok(None);
    }
    let (base, mut leak) = mp.h_bracket.restrict(&base_b);
    let (fiber, l) = core.restrict(&kk);
    leak = leak.max(l);
    let d = base_b.dim();
    let zb: Vec<Vector> = (0..d).map(|i| &zmap * base_b.vector(i)).collect();
    let mut rep = Vec::with_capacity(d);
    for i in 0..d {
        let m = ell_block(ell_g, &base_b.vector(i), k) - core.ad(&zb[i]);
        let (c, l) = restrict_map(&m, &kk);
        leak = leak.max(l);
        rep.push(c);
    }
    let om = mp.omega.at(g);
    let mut cocycle = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let (y0, y1) = (base_b.vector(i), base_b.vector(j));
            let yb = mp.h_bracket.bracket(&y0, &y1);
            let mu = omega_apply(&om, &y0, &y1) - ell_block(ell_g, &y0, k) * &zb[j] + ell_block(ell_g, &y1, k) * &zb[i]
                + &zmap * &yb
                + core.bracket(&zb[i], &zb[j]);
            let c = kk.coords(&mu);
            if kk.ambient_dim > 0 {
                leak = leak.max(max_abs_vec(&(&mu - &kk.vectors * &c)));
            }
            cocycle.push(c);
        }
    }
    let l = semidirect_twisted(&base, &fiber, &rep, &cocycle, f64::INFINITY)?;
    Ok(Some((l, leak)))
}

/// Names of the derived-structure entries, in report order.
pub const DERIVED_ENTRIES: [&str; 14] = [
    "lie2-derivation",
    "lie2-equivariance",
    "lie2-peiffer",
    "kerd-derivation",
    "kerd-equivariance",
    "kerd-peiffer",
    "restriction-leak",
    "butterfly-isotropy-diagonal",
    "butterfly-kernel-diagonal",
    "v-abelian",
    "quotient-dimensions",
    "ker-action-automorphism",
    "image-subalgebras",
    "isotropy-jacobi",
];

/// Validates every derived structure on the samples.
pub fn derived_structures(mp: &MatchedPair, samples: &[Mat], cfg: &CheckConfig) -> Result<SuiteReport> {
    mp.validate()?;
    let (der, leak) = build_derived(mp, cfg)?;
    let th = &cfg.thresholds;
    let tol = cfg.tol;
    let mut rep = SuiteReport::new("derived");
    let c1 = check_crossed_module(&der.lie2_at_e)?;
    let c2 = check_crossed_module(&der.ker_boundary)?;
    rep.entries.push(Entry::from_max("lie2-derivation", "𝕙 acts on 𝔨 by derivations", Kind::Exact, &c1.derivation, th));
    rep.entries.push(Entry::from_max("lie2-equivariance", "∂(ℓ_e^y z) = [y, ∂z] on 𝔨", Kind::Exact, &c1.equivariance, th));
    rep.entries.push(Entry::from_max("lie2-peiffer", "ℓ_e^{∂z0} z1 = [z0, z1] on 𝔨", Kind::Exact, &c1.peiffer, th));
    rep.entries.push(Entry::from_max("kerd-derivation", "𝔤 acts on ker ∂ by derivations", Kind::Exact, &c2.derivation, th));
    rep.entries.push(Entry::from_max("kerd-equivariance", "ρ_e is 𝔤-equivariant on ker ∂", Kind::Exact, &c2.equivariance, th));
    rep.entries.push(Entry::from_max("kerd-peiffer", "ρ_e(z0) acts on z1 as [z0, z1] on ker ∂", Kind::Exact, &c2.peiffer, th));
    let mut lk = MaxTracker::new();
    lk.update(leak, || "subspaces".into());
    rep.entries.push(Entry::from_max("restriction-leak", "𝔨, ker ∂ are subalgebras preserved by their actions", Kind::Exact, &lk, th));

    let b = check_butterfly(&der.butterfly, tol)?;
    let diag = |d: &crate::lie::DiagonalReport| {
        format!("injective {}, surjective {}, exact {}, composite {:.3e}", d.injective, d.surjective, d.exact_middle, d.composite)
    };
    rep.entries.push(Entry::boolean("butterfly-isotropy-diagonal", "𝔨 → 𝕜 → 𝔩 is short exact", b.nw_se.exact(), diag(&b.nw_se)));
    rep.entries.push(Entry::boolean("butterfly-kernel-diagonal", "ker ∂ → 𝕜 → ∂𝕜 is short exact", b.ne_sw.exact(), diag(&b.ne_sw)));
    let mut vb = MaxTracker::new();
    vb.update(b.v_bracket, || format!("dim V = {}", b.v_dim));
    rep.entries.push(Entry::from_max("v-abelian", "V = ker ∂ ∩ ker ρ_e is abelian", Kind::Exact, &vb, th));
    rep.entries.push(Entry::boolean(
        "quotient-dimensions",
        "dim ∂𝕜/∂𝔨 = dim 𝔩/ρ_e(ker ∂)",
        b.quotient_dims.0 == b.quotient_dims.1,
        format!("{} vs {}", b.quotient_dims.0, b.quotient_dims.1),
    ));

    let kd = kernel_basis(&mp.ruth.partial, tol)?;
    let mut auto = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        let dk = mp.ruth.delta_k.at(g);
        for i in 0..kd.dim() {
            for j in 0..kd.dim() {
                let (a, bb) = (kd.vector(i), kd.vector(j));
                let v = &dk * der.core.bracket(&a, &bb) - der.core.bracket(&(&dk * &a), &(&dk * &bb));
                auto.update(max_abs_vec(&v), || format!("g{gi},v{i},v{j}"));
            }
        }
    }
    rep.entries.push(Entry::from_max("ker-action-automorphism", "Δ¹_g preserves the bracket of ker ∂", Kind::Exact, &auto, th));

    let mut sub = MaxTracker::new();
    let lb = image_basis(&mp.rho_e, tol)?;
    let (_, l1) = mp.chart().algebra.opposite().restrict(&lb);
    sub.update(l1, || "l".into());
    let ib = image_basis(&mp.ruth.partial, tol)?;
    let (_, l2) = mp.h_bracket.restrict(&ib);
    sub.update(l2, || "image".into());
    rep.entries.push(Entry::from_max("image-subalgebras", "𝔩 ≤ 𝔤 and ∂𝕜 ≤ 𝕙 are subalgebras", Kind::Exact, &sub, th));

    let ell = derive_ell(mp, DATA_FD);
    let mut jac = MaxTracker::new();
    let mut skipped = 0usize;
    for (gi, g) in samples.iter().enumerate() {
        match isotropy_algebra(mp, &der.core, &ell.at(g), g, tol)? {
            Some((l, lk)) => {
                let lr = check_lie_algebra(&l);
                jac.update(lr.max().max(lk), || format!("g{gi}"));
            }
            None => skipped += 1,
        }
    }
    if skipped == samples.len() {
        rep.entries.push(Entry::not_applicable("isotropy-jacobi", "twisted semidirect product satisfies Jacobi", Kind::Exact, "no splitting Z", th));
    } else {
        rep.entries.push(Entry::from_max("isotropy-jacobi", "twisted semidirect product satisfies Jacobi", Kind::Exact, &jac, th));
    }
    Ok(rep)
}
