//! Actions up to homotopy of a Lie algebra 𝕙 on the trivial algebroid G×𝕜,
//! and the extension algebroid (G×𝕜)×𝕙 they define.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::group::{GroupChart, SmoothMap};
use crate::lie::{ce_formula, LieAlgebra};
use crate::numkit::{as_mat, as_vec, max_abs, max_abs_vec, pinv, unit, Fd, Mat, Vector};
use crate::report::{CheckConfig, Entry, Kind, MaxTracker, SuiteReport};

/// ℓ^y as a k×k matrix from the packed k × (h·k) value of ℓ.
pub fn ell_block(ell: &Mat, y: &Vector, k: usize) -> Mat {
    let mut m = Mat::zeros(k, k);
    for (i, yi) in y.iter().enumerate() {
        if *yi != 0.0 {
            m += ell.columns(i * k, k) * *yi;
        }
    }
    m
}

/// ω(y0, y1) from the packed k × (h·h) value of ω.
pub fn omega_apply(omega: &Mat, y0: &Vector, y1: &Vector) -> Vector {
    let h = y0.len();
    let mut v = Vector::zeros(omega.nrows());
    for i in 0..h {
        for j in 0..h {
            let w = y0[i] * y1[j];
            if w != 0.0 {
                v += omega.column(i * h + j) * w;
            }
        }
    }
    v
}

/// Packs a bilinear map given on basis pairs into k × (h·h).
pub fn pack_bilinear<F: FnMut(usize, usize) -> Vector>(k: usize, h: usize, mut f: F) -> Mat {
    let mut m = Mat::zeros(k, h * h);
    for i in 0..h {
        for j in 0..h {
            m.set_column(i * h + j, &f(i, j));
        }
    }
    m
}

/// Packs y ↦ ℓ^y given on basis vectors into k × (h·k).
pub fn pack_ell<F: FnMut(usize) -> Mat>(k: usize, h: usize, mut f: F) -> Mat {
    let mut m = Mat::zeros(k, h * k);
    for i in 0..h {
        m.columns_mut(i * k, k).copy_from(&f(i));
    }
    m
}

type VecFn = Arc<dyn Fn(&Mat) -> Vector + Send + Sync>;
type DerivFn = Arc<dyn Fn(&Mat, &Vector) -> Vector + Send + Sync>;

/// Vector-valued function on G; its derivative along the right-invariant
/// field of x is closed-form when `deriv` is present and by FD otherwise.
#[derive(Clone)]
pub struct Section {
    pub value: VecFn,
    pub deriv: Option<DerivFn>,
    pub dim: usize,
}

impl Section {
    pub fn new<F: Fn(&Mat) -> Vector + Send + Sync + 'static>(dim: usize, f: F) -> Self {
        Section { value: Arc::new(f), deriv: None, dim }
    }

    pub fn with_deriv<F, D>(dim: usize, f: F, d: D) -> Self
    where
        F: Fn(&Mat) -> Vector + Send + Sync + 'static,
        D: Fn(&Mat, &Vector) -> Vector + Send + Sync + 'static,
    {
        Section { value: Arc::new(f), deriv: Some(Arc::new(d)), dim }
    }

    pub fn constant(v: Vector) -> Self {
        let n = v.len();
        let w = v.clone();
        Section::with_deriv(n, move |_| w.clone(), move |_, _| Vector::zeros(n))
    }

    pub fn at(&self, g: &Mat) -> Vector {
        (self.value)(g)
    }

    pub fn d(&self, chart: &GroupChart, fd: &Fd, g: &Mat, x: &Vector) -> Result<Vector> {
        if let Some(d) = &self.deriv {
            return Ok(d(g, x));
        }
        if x.iter().all(|v| *v == 0.0) {
            return Ok(Vector::zeros(self.dim));
        }
        Ok(as_vec(&chart.deriv(fd, g, x, |p| Ok(as_mat(&self.at(p))))?))
    }
}

/// Scalar test function φ(g) = tr(A g) · tr(B g) with its exact derivative.
pub fn scalar_test_function(chart: &GroupChart, seed: f64) -> (VecFn, DerivFn) {
    let n = chart.matrix_size;
    let a = Mat::from_fn(n, n, |i, j| 0.3 + 0.1 * (i as f64) - 0.2 * (j as f64) + seed);
    let b = Mat::from_fn(n, n, |i, j| if i == j { 0.5 } else { 0.1 * (i + 2 * j) as f64 - seed });
    let (a2, b2) = (a.clone(), b.clone());
    let ch = chart.clone();
    let f: VecFn = Arc::new(move |g| Vector::from_element(1, (&a * g).trace() * (&b * g).trace()));
    let d: DerivFn = Arc::new(move |g, x| {
        let xg = ch.embed(x) * g;
        Vector::from_element(1, (&a2 * &xg).trace() * (&b2 * g).trace() + (&a2 * g).trace() * (&b2 * &xg).trace())
    });
    (f, d)
}

/// Test sections of G×𝕜: constants, and a polynomial multiple of each basis
/// vector with closed-form derivative.
pub fn test_sections(chart: &GroupChart, k: usize) -> Vec<Section> {
    let mut out = Vec::new();
    for j in 0..k {
        out.push(Section::constant(unit(k, j)));
    }
    for j in 0..k {
        let (f, d) = scalar_test_function(chart, 0.05 * j as f64);
        let v = unit(k, j);
        let v2 = v.clone();
        out.push(Section::with_deriv(k, move |g| &v * f(g)[0], move |g, x| &v2 * d(g, x)[0]));
    }
    out
}

/// G×𝕜 with anchor z ↦ ρ_e(z) in right-trivialized coordinates.
#[derive(Debug, Clone)]
pub struct TrivialAlgebroid {
    pub chart: GroupChart,
    pub fiber: LieAlgebra,
    pub rho_e: Mat,
}

impl TrivialAlgebroid {
    /// [S0,S1] = [S0,S1]_𝕜 + (dS1)_{ρS0} − (dS0)_{ρS1}.
    pub fn bracket(&self, s0: &Section, s1: &Section, g: &Mat, fd: &Fd) -> Result<Vector> {
        let (v0, v1) = (s0.at(g), s1.at(g));
        Ok(self.fiber.bracket(&v0, &v1) + s1.d(&self.chart, fd, g, &(&self.rho_e * &v0))?
            - s0.d(&self.chart, fd, g, &(&self.rho_e * &v1))?)
    }

    pub fn bracket_section(&self, s0: &Section, s1: &Section, fd: Fd) -> Section {
        let (me, a, b) = (self.clone(), s0.clone(), s1.clone());
        Section::new(self.fiber.dim(), move |g| me.bracket(&a, &b, g, &fd).unwrap_or_else(|_| nan(me.fiber.dim())))
    }
}

fn nan(n: usize) -> Vector {
    Vector::from_element(n, f64::NAN)
}

/// (α, ℓ, ω): the connection is (∇_y Z)_g = ℓ_g^y(Z_g) + (dZ)_{α_g(y)}.
#[derive(Debug, Clone)]
pub struct Auth {
    pub algebra: LieAlgebra,
    pub target: TrivialAlgebroid,
    /// dim 𝔤 × h.
    pub alpha: SmoothMap,
    /// k × (h·k), block i is ℓ^{e_i}.
    pub ell: SmoothMap,
    /// k × (h·h), column i·h + j is ω(e_i, e_j).
    pub omega: SmoothMap,
}

/// Right-trivialized vector fields on G.
pub fn vf_bracket(chart: &GroupChart, x: &Section, y: &Section, g: &Mat, fd: &Fd) -> Result<Vector> {
    let (xv, yv) = (x.at(g), y.at(g));
    Ok(y.d(chart, fd, g, &xv)? - x.d(chart, fd, g, &yv)? + chart.rinv_bracket(&xv, &yv))
}

impl Auth {
    pub fn h(&self) -> usize {
        self.algebra.dim()
    }

    pub fn k(&self) -> usize {
        self.target.fiber.dim()
    }

    pub fn chart(&self) -> &GroupChart {
        &self.target.chart
    }

    pub fn alpha_field(&self, y: &Vector) -> Section {
        let (a, y) = (self.alpha.clone(), y.clone());
        Section::new(self.chart().dim(), move |g| a.at(g) * &y)
    }

    pub fn nabla(&self, y: &Vector, s: &Section, g: &Mat, fd: &Fd) -> Result<Vector> {
        let l = ell_block(&self.ell.at(g), y, self.k());
        Ok(l * s.at(g) + s.d(self.chart(), fd, g, &(self.alpha.at(g) * y))?)
    }

    pub fn nabla_section(&self, y: &Vector, s: &Section, fd: Fd) -> Section {
        let (me, y, s) = (self.clone(), y.clone(), s.clone());
        let k = self.k();
        Section::new(k, move |g| me.nabla(&y, &s, g, &fd).unwrap_or_else(|_| nan(k)))
    }

    pub fn omega_section(&self, y0: &Vector, y1: &Vector) -> Section {
        let (om, y0, y1) = (self.omega.clone(), y0.clone(), y1.clone());
        Section::new(self.k(), move |g| omega_apply(&om.at(g), &y0, &y1))
    }

    fn rho_field(&self, s: &Section) -> Section {
        let (r, s) = (self.target.rho_e.clone(), s.clone());
        Section::new(self.chart().dim(), move |g| &r * s.at(g))
    }
}

/// Items (i)-(iv) of an action up to homotopy on sampled points and sections.
pub fn check_auth(a: &Auth, samples: &[Mat], sections: &[Section], cfg: &CheckConfig) -> Result<SuiteReport> {
    let (h, k) = (a.h(), a.k());
    let fd = cfg.fd;
    let th = &cfg.thresholds;
    let chart = a.chart().clone();
    let (phi, dphi) = scalar_test_function(&chart, 0.17);

    let mut leibniz = MaxTracker::new();
    let mut derivation = MaxTracker::new();
    let mut anchor = MaxTracker::new();
    let mut curvature = MaxTracker::new();
    let mut cocycle = MaxTracker::new();

    let nab: Vec<Vec<Section>> =
        (0..h).map(|i| sections.iter().map(|s| a.nabla_section(&unit(h, i), s, fd)).collect()).collect();

    for (gi, g) in samples.iter().enumerate() {
        let alpha_g = a.alpha.at(g);
        for yi in 0..h {
            let y = unit(h, yi);
            let xa = &alpha_g * &y;
            for (si, s) in sections.iter().enumerate() {
                // Leibniz over scalar functions
                let (p, s2) = (phi.clone(), s.clone());
                let (p2, dp2, s3, ch) = (phi.clone(), dphi.clone(), s.clone(), chart.clone());
                let prod = Section::with_deriv(
                    k,
                    move |g| s2.at(g) * p(g)[0],
                    move |g, x| {
                        s3.d(&ch, &fd, g, x).map(|d| d * p2(g)[0]).unwrap_or_else(|_| nan(k)) + s3.at(g) * dp2(g, x)[0]
                    },
                );
                let lhs = a.nabla(&y, &prod, g, &fd)?;
                let rhs = a.nabla(&y, s, g, &fd)? * phi(g)[0] + s.at(g) * dphi(g, &xa)[0];
                leibniz.update(max_abs_vec(&(lhs - rhs)), || format!("g{gi},y{yi},s{si}"));

                // ρ(∇_y S) = [α(y), ρ(S)]
                let lhs = &a.target.rho_e * nab[yi][si].at(g);
                let rhs = vf_bracket(&chart, &a.alpha_field(&y), &a.rho_field(s), g, &fd)?;
                anchor.update(max_abs_vec(&(lhs - rhs)), || format!("g{gi},y{yi},s{si}"));

                for (ti, t) in sections.iter().enumerate() {
                    // ∇_y [S,T] = [∇_y S, T] + [S, ∇_y T]
                    let br = a.target.bracket_section(s, t, fd);
                    let lhs = a.nabla(&y, &br, g, &fd)?;
                    let rhs = a.target.bracket(&nab[yi][si], t, g, &fd)? + a.target.bracket(s, &nab[yi][ti], g, &fd)?;
                    derivation.update(max_abs_vec(&(lhs - rhs)), || format!("g{gi},y{yi},s{si},s{ti}"));
                }
            }
            for y2i in 0..h {
                let y2 = unit(h, y2i);
                let yb = a.algebra.bracket(&y, &y2);
                let om = a.omega_section(&y, &y2);
                for (si, s) in sections.iter().enumerate() {
                    let lhs = a.nabla(&y, &nab[y2i][si], g, &fd)? - a.nabla(&y2, &nab[yi][si], g, &fd)?
                        - a.nabla(&yb, s, g, &fd)?;
                    let rhs = a.target.bracket(&om, s, g, &fd)?;
                    curvature.update(max_abs_vec(&(lhs - rhs)), || format!("g{gi},y{yi},y{y2i},s{si}"));
                }
            }
        }
        // d_∇ ω = 0 on basis triples
        if k > 0 {
            let om_g = a.omega.at(g);
            for i in 0..h {
                for j in 0..h {
                    for l in 0..h {
                        let v = ce_formula(
                            &a.algebra,
                            &[i, j, l],
                            |b, rest| a.nabla(&unit(h, b), &a.omega_section(&unit(h, rest[0]), &unit(h, rest[1])), g, &fd),
                            |args| Ok(omega_apply(&om_g, &unit(h, args[0]), &unit(h, args[1]))),
                        )?;
                        cocycle.update(max_abs_vec(&v), || format!("g{gi},y{i},y{j},y{l}"));
                    }
                }
            }
        }
    }
    let mut rep = SuiteReport::new("auth");
    let entries = [
        ("connection-leibniz", "∇_y(φZ) = φ∇_yZ + (α(y)φ)Z", &leibniz),
        ("connection-derivation", "∇_y[Z0,Z1] = [∇_yZ0,Z1] + [Z0,∇_yZ1]", &derivation),
        ("anchor-equivariance", "ρ(∇_yZ) = [α(y), ρ(Z)]", &anchor),
        ("curvature-inner", "R^∇(y0,y1)Z = [ω(y0,y1), Z]", &curvature),
        ("omega-closed", "d_∇ω = 0", &cocycle),
    ];
    for (name, law, t) in entries {
        rep.entries.push(Entry::from_max(name, law, Kind::Fd, t, th));
    }
    Ok(rep)
}

pub type BasisBracket = Arc<dyn Fn(&Mat, usize, usize) -> Vector + Send + Sync>;

/// A Lie algebroid on the trivial bundle G×ℝⁿ given by its anchor and the
/// bracket of constant basis sections at each point.
#[derive(Clone)]
pub struct AlgebroidData {
    pub chart: GroupChart,
    pub rank: usize,
    /// dim 𝔤 × rank.
    pub anchor: SmoothMap,
    pub basis_bracket: BasisBracket,
}

impl core::fmt::Debug for AlgebroidData {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "AlgebroidData(rank {})", self.rank)
    }
}

impl AlgebroidData {
    pub fn const_bracket(&self, g: &Mat, u: &Vector, v: &Vector) -> Vector {
        let mut out = Vector::zeros(self.rank);
        for a in 0..self.rank {
            for b in 0..self.rank {
                let w = u[a] * v[b];
                if w != 0.0 {
                    out += (self.basis_bracket)(g, a, b) * w;
                }
            }
        }
        out
    }

    /// Bracket of arbitrary sections by the Leibniz rule.
    pub fn bracket(&self, s0: &Section, s1: &Section, g: &Mat, fd: &Fd) -> Result<Vector> {
        let (v0, v1) = (s0.at(g), s1.at(g));
        let an = self.anchor.at(g);
        Ok(self.const_bracket(g, &v0, &v1) + s1.d(&self.chart, fd, g, &(&an * &v0))?
            - s0.d(&self.chart, fd, g, &(&an * &v1))?)
    }

    pub fn bracket_section(&self, s0: &Section, s1: &Section, fd: Fd) -> Section {
        let (me, a, b) = (self.clone(), s0.clone(), s1.clone());
        Section::new(self.rank, move |g| me.bracket(&a, &b, g, &fd).unwrap_or_else(|_| nan(me.rank)))
    }
}

/// The extension (G×𝕜)×𝕙 with fiber coordinates (z, y).
pub fn build_extension(a: &Auth) -> AlgebroidData {
    let (h, k) = (a.h(), a.k());
    let n = h + k;
    let (rho, alpha) = (a.target.rho_e.clone(), a.alpha.clone());
    let gd = a.chart().dim();
    let anchor = SmoothMap::unary(gd, n, move |g| {
        let mut m = Mat::zeros(gd, n);
        m.columns_mut(0, k).copy_from(&rho);
        m.columns_mut(k, h).copy_from(&alpha.at(g));
        m
    });
    let me = a.clone();
    let basis_bracket: BasisBracket = Arc::new(move |g, i, j| {
        let (ui, uj) = (unit(n, i), unit(n, j));
        let (z0, y0) = (ui.rows(0, k).into_owned(), ui.rows(k, h).into_owned());
        let (z1, y1) = (uj.rows(0, k).into_owned(), uj.rows(k, h).into_owned());
        let ell = me.ell.at(g);
        let top = me.target.fiber.bracket(&z0, &z1) + ell_block(&ell, &y0, k) * &z1 - ell_block(&ell, &y1, k) * &z0
            + omega_apply(&me.omega.at(g), &y0, &y1);
        let mut out = Vector::zeros(n);
        out.rows_mut(0, k).copy_from(&top);
        out.rows_mut(k, h).copy_from(&me.algebra.bracket(&y0, &y1));
        out
    });
    AlgebroidData { chart: a.chart().clone(), rank: n, anchor, basis_bracket }
}

/// Jacobi on constant and function-scaled basis sections, and the projection
/// to 𝕙 being a bracket morphism.
pub fn check_extension(ext: &AlgebroidData, h: LieAlgebra, samples: &[Mat], cfg: &CheckConfig) -> Result<SuiteReport> {
    let n = ext.rank;
    let hd = h.dim();
    let k = n - hd;
    let fd = cfg.fd;
    let mut secs: Vec<Section> = (0..n).map(|i| Section::constant(unit(n, i))).collect();
    let (f, d) = scalar_test_function(&ext.chart, 0.11);
    for i in 0..n {
        let (f, d, v) = (f.clone(), d.clone(), unit(n, i));
        let v2 = v.clone();
        secs.push(Section::with_deriv(n, move |g| &v * f(g)[0], move |g, x| &v2 * d(g, x)[0]));
    }
    let mut jac = MaxTracker::new();
    let mut proj = MaxTracker::new();
    for (gi, g) in samples.iter().enumerate() {
        for a in 0..n {
            for b in 0..n {
                let br = ext.const_bracket(g, &unit(n, a), &unit(n, b));
                let ya = unit(n, a).rows(k, hd).into_owned();
                let yb = unit(n, b).rows(k, hd).into_owned();
                proj.update(max_abs_vec(&(br.rows(k, hd) - h.bracket(&ya, &yb))), || format!("g{gi},e{a},e{b}"));
            }
        }
        // triples with one function-scaled entry keep the cost small
        for a in 0..n {
            for b in a..n {
                for c in 0..n {
                    let (s0, s1, s2) = (&secs[a], &secs[b], &secs[n + c]);
                    let j = ext.bracket(&ext.bracket_section(s0, s1, fd), s2, g, &fd)?
                        + ext.bracket(&ext.bracket_section(s1, s2, fd), s0, g, &fd)?
                        + ext.bracket(&ext.bracket_section(s2, s0, fd), s1, g, &fd)?;
                    jac.update(max_abs_vec(&j), || format!("g{gi},e{a},e{b},fe{c}"));
                }
            }
        }
    }
    let mut rep = SuiteReport::new("extension");
    rep.entries.push(Entry::from_max("jacobi", "[[S0,S1],S2] + cyclic = 0", Kind::Fd, &jac, &cfg.thresholds));
    rep.entries.push(Entry::from_max(
        "projection-morphism",
        "pr_𝕙[(z0,y0),(z1,y1)] = [y0,y1]",
        Kind::Exact,
        &proj,
        &cfg.thresholds,
    ));
    Ok(rep)
}

/// AUTH induced by a splitting σ of 0 → G×𝕜 → 𝒜 → G×𝕙 → 0.
/// `core_incl` (rank × k) embeds 𝕜 as ker F; `f` (h × rank) is the projection.
pub fn extract_auth(
    ambient: &AlgebroidData,
    core_incl: &Mat,
    f: &Mat,
    h_bracket: &LieAlgebra,
    sigma: &SmoothMap,
    samples: &[Mat],
    cfg: &CheckConfig,
) -> Result<Auth> {
    let n = ambient.rank;
    let hd = h_bracket.dim();
    let k = core_incl.ncols();
    let e = ambient.chart.identity();
    for g in samples.iter().chain(core::iter::once(&e)) {
        let r = max_abs(&(f * sigma.at(g) - Mat::identity(hd, hd)));
        if r > cfg.tol.max(1e-9) {
            return Err(Error::Precondition(format!("F∘σ differs from the identity by {r:.3e}")));
        }
    }
    let fd = cfg.fd;
    let core_coords = pinv(core_incl, cfg.tol);
    let amb = ambient.clone();
    let rho_e = ambient.anchor.at(&e) * core_incl;
    // 𝕜 bracket of constant core sections, read at the identity
    let fiber = LieAlgebra::from_bracket(k, |i, j| {
        &core_coords * amb.const_bracket(&e, &(core_incl * unit(k, i)), &(core_incl * unit(k, j)))
    });
    let gd = ambient.chart.dim();
    let (an, sg) = (ambient.anchor.clone(), sigma.clone());
    let alpha = SmoothMap::unary(gd, hd, move |g| an.at(g) * sg.at(g));

    let sigma_section = |y: Vector| {
        let s = sigma.clone();
        Section::new(n, move |g| s.at(g) * &y)
    };
    let (amb2, cc, ci) = (ambient.clone(), core_coords.clone(), core_incl.clone());
    let sig_secs: Vec<Section> = (0..hd).map(|i| sigma_section(unit(hd, i))).collect();
    let ss = sig_secs.clone();
    let ell = SmoothMap::unary(k, hd * k, move |g| {
        pack_ell(k, hd, |i| {
            let mut m = Mat::zeros(k, k);
            for j in 0..k {
                let eps = Section::constant(&ci * unit(k, j));
                let v = amb2.bracket(&ss[i], &eps, g, &fd).unwrap_or_else(|_| nan(n));
                m.set_column(j, &(&cc * v));
            }
            m
        })
    });
    let (amb3, cc3, sg3, hb) = (ambient.clone(), core_coords.clone(), sigma.clone(), h_bracket.clone());
    let ss3 = sig_secs;
    let omega = SmoothMap::unary(k, hd * hd, move |g| {
        pack_bilinear(k, hd, |i, j| {
            let v = amb3.bracket(&ss3[i], &ss3[j], g, &fd).unwrap_or_else(|_| nan(n))
                - sg3.at(g) * hb.bracket(&unit(hd, i), &unit(hd, j));
            &cc3 * v
        })
    });
    Ok(Auth {
        algebra: h_bracket.clone(),
        target: TrivialAlgebroid { chart: ambient.chart.clone(), fiber, rho_e },
        alpha,
        ell,
        omega,
    })
}
