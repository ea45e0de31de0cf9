//! Representations up to homotopy of a group, the VB-groupoid they define,
//! the induced honest actions, isotropy groups and orbits.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::group::{ball_point, group_quasi_diff, group_quasi_diff_map, rng, GroupChart, SmoothMap};
use crate::numkit::{as_mat, as_vec, max_abs, max_abs_vec, pinv, svd_subspaces, Mat, SubspaceBasis, Vector};
use crate::report::{CheckConfig, Entry, Kind, MaxTracker, SuiteReport};

/// (∂, Δ^ℏ, Δ^𝕜, Ω) over a matrix group.
#[derive(Debug, Clone)]
pub struct Ruth {
    pub chart: GroupChart,
    pub h_dim: usize,
    pub k_dim: usize,
    /// 𝕜 → 𝕙, an h_dim × k_dim matrix.
    pub partial: Mat,
    pub delta_h: SmoothMap,
    pub delta_k: SmoothMap,
    /// Arity 2, values in Hom(𝕙, 𝕜).
    pub omega: SmoothMap,
}

/// An arrow (g; z, y) of G×(𝕜⊕𝕙).
#[derive(Debug, Clone, PartialEq)]
pub struct VbArrow {
    pub g: Mat,
    pub z: Vector,
    pub y: Vector,
}

impl VbArrow {
    pub fn new(g: Mat, z: Vector, y: Vector) -> Self {
        VbArrow { g, z, y }
    }

    /// Largest entrywise difference over all three components.
    pub fn distance(&self, other: &VbArrow) -> f64 {
        max_abs(&(&self.g - &other.g)).max(max_abs_vec(&(&self.z - &other.z))).max(max_abs_vec(&(&self.y - &other.y)))
    }

    pub fn fiber_combination(&self, other: &VbArrow, s: f64) -> VbArrow {
        VbArrow { g: self.g.clone(), z: &self.z + &other.z * s, y: &self.y + &other.y * s }
    }
}

impl Ruth {
    pub fn validate_shapes(&self) -> Result<()> {
        let (h, k) = (self.h_dim, self.k_dim);
        let ok = self.partial.shape() == (h, k)
            && (self.delta_h.arity, self.delta_h.rows, self.delta_h.cols) == (1, h, h)
            && (self.delta_k.arity, self.delta_k.rows, self.delta_k.cols) == (1, k, k)
            && (self.omega.arity, self.omega.rows, self.omega.cols) == (2, k, h);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("RUTH components have inconsistent shapes".into()))
        }
    }

    pub fn source(&self, a: &VbArrow) -> Vector {
        a.y.clone()
    }

    pub fn target(&self, a: &VbArrow) -> Vector {
        &self.partial * &a.z + self.delta_h.at(&a.g) * &a.y
    }

    pub fn unit(&self, y: &Vector) -> VbArrow {
        VbArrow { g: self.chart.identity(), z: Vector::zeros(self.k_dim), y: y.clone() }
    }

    /// Product without the composability test; only the source of `a1` enters.
    pub fn mul_unchecked(&self, a0: &VbArrow, a1: &VbArrow) -> VbArrow {
        let z = &a0.z + self.delta_k.at(&a0.g) * &a1.z - self.omega.at2(&a0.g, &a1.g) * &a1.y;
        VbArrow { g: &a0.g * &a1.g, z, y: a1.y.clone() }
    }

    /// m(a0, a1), defined when s(a0) = t(a1) within `tol` (relative).
    pub fn mul(&self, a0: &VbArrow, a1: &VbArrow, tol: f64) -> Result<VbArrow> {
        let t1 = self.target(a1);
        let residual = max_abs_vec(&(&a0.y - &t1));
        if residual > tol * max_abs_vec(&t1).max(1.0) {
            return Err(Error::Composability { residual });
        }
        Ok(self.mul_unchecked(a0, a1))
    }

    pub fn inv(&self, a: &VbArrow) -> Result<VbArrow> {
        let gi = self.chart.inverse(&a.g)?;
        let z = -(self.delta_k.at(&gi) * &a.z) + self.omega.at2(&gi, &a.g) * &a.y;
        Ok(VbArrow { y: self.target(a), g: gi, z })
    }
}

fn pair_label(i: usize, j: usize) -> alloc::string::String {
    format!("g{i},g{j}")
}

/// The coherence relations of a RUTH and its unit normalization.
pub fn check_ruth(r: &Ruth, samples: &[Mat], cfg: &CheckConfig) -> Result<SuiteReport> {
    r.validate_shapes()?;
    if samples.is_empty() {
        return Err(Error::Precondition("no samples".into()));
    }
    let th = &cfg.thresholds;
    let e = r.chart.identity();
    let mut intertwine = MaxTracker::new();
    let mut units = MaxTracker::new();
    for (i, g) in samples.iter().enumerate() {
        let res = max_abs(&(&r.partial * r.delta_k.at(g) - r.delta_h.at(g) * &r.partial));
        intertwine.update(res, || format!("g{i}"));
        let res = max_abs(&r.omega.at2(g, &e)).max(max_abs(&r.omega.at2(&e, g)));
        units.update(res, || format!("g{i}"));
    }
    let res = max_abs(&(r.delta_h.at(&e) - Mat::identity(r.h_dim, r.h_dim)))
        .max(max_abs(&(r.delta_k.at(&e) - Mat::identity(r.k_dim, r.k_dim))));
    units.update(res, || "e".into());

    let mut quasi_h = MaxTracker::new();
    let mut quasi_k = MaxTracker::new();
    for (i, g) in samples.iter().enumerate() {
        for (j, h) in samples.iter().enumerate() {
            let om = r.omega.at2(g, h);
            let gh = g * h;
            let res = max_abs(&(r.delta_h.at(&gh) - r.delta_h.at(g) * r.delta_h.at(h) - &r.partial * &om));
            quasi_h.update(res, || pair_label(i, j));
            let res = max_abs(&(r.delta_k.at(&gh) - r.delta_k.at(g) * r.delta_k.at(h) - &om * &r.partial));
            quasi_k.update(res, || pair_label(i, j));
        }
    }
    let cocycle = omega_cocycle(r, samples)?;

    let mut rep = SuiteReport::new("ruth");
    rep.entries.push(Entry::from_max("boundary-intertwines", "∂Δ^𝕜_g = Δ^ℏ_g ∂", Kind::Exact, &intertwine, th));
    rep.entries.push(Entry::from_max(
        "quasi-action-on-base",
        "Δ^ℏ_{gh} − Δ^ℏ_g Δ^ℏ_h = ∂Ω(g,h)",
        Kind::Exact,
        &quasi_h,
        th,
    ));
    rep.entries.push(Entry::from_max(
        "quasi-action-on-core",
        "Δ^𝕜_{gh} − Δ^𝕜_g Δ^𝕜_h = Ω(g,h)∂",
        Kind::Exact,
        &quasi_k,
        th,
    ));
    rep.entries.push(Entry::from_max(
        "curvature-cocycle",
        "Δ^𝕜_g Ω(h,k) − Ω(gh,k) + Ω(g,hk) − Ω(g,h)Δ^ℏ_k = 0",
        Kind::Exact,
        &cocycle,
        th,
    ));
    rep.entries.push(Entry::from_max(
        "unit-normalization",
        "Δ^ℏ_e = Id, Δ^𝕜_e = Id, Ω(g,e) = Ω(e,g) = 0",
        Kind::Exact,
        &units,
        th,
    ));
    Ok(rep)
}

/// max |δ^Δ Ω| over all sample triples.
pub fn omega_cocycle(r: &Ruth, samples: &[Mat]) -> Result<MaxTracker> {
    let mut t = MaxTracker::new();
    for (i, g) in samples.iter().enumerate() {
        for (j, h) in samples.iter().enumerate() {
            for (k, l) in samples.iter().enumerate() {
                let d = group_quasi_diff(&r.delta_k, &r.delta_h, &r.omega, &[g.clone(), h.clone(), l.clone()])?;
                t.update(max_abs(&d), || format!("g{i},g{j},g{k}"));
            }
        }
    }
    Ok(t)
}

/// Deterministic fiber vectors for the groupoid suite.
fn fiber_vectors(n: usize, dim: usize, seed: u64) -> Vec<Vector> {
    let mut g = rng(seed ^ 0x5eed_f1be);
    (0..n).map(|_| ball_point(&mut g, dim, 1.0)).collect()
}

/// Groupoid laws of G×(𝕜⊕𝕙) ⇉ 𝕙 with the structure maps of `r`.
pub fn groupoid_axiom_suite(r: &Ruth, samples: &[Mat], cfg: &CheckConfig) -> Result<SuiteReport> {
    r.validate_shapes()?;
    let th = &cfg.thresholds;
    let n = samples.len();
    let zs = fiber_vectors(3 * n + 3, r.k_dim, cfg.seed);
    let ys = fiber_vectors(3 * n + 3, r.h_dim, cfg.seed.wrapping_add(1));

    let mut src = MaxTracker::new();
    let mut tgt = MaxTracker::new();
    let mut assoc = MaxTracker::new();
    let mut left_unit = MaxTracker::new();
    let mut right_unit = MaxTracker::new();
    let mut inverse = MaxTracker::new();
    let mut linear = MaxTracker::new();

    for (i, g) in samples.iter().enumerate() {
        let a = VbArrow::new(g.clone(), zs[i].clone(), ys[i].clone());
        let res = r.mul_unchecked(&r.unit(&r.target(&a)), &a).distance(&a);
        left_unit.update(res, || format!("g{i}"));
        let res = r.mul_unchecked(&a, &r.unit(&r.source(&a))).distance(&a);
        right_unit.update(res, || format!("g{i}"));
        let ia = r.inv(&a)?;
        let res = r
            .mul_unchecked(&ia, &a)
            .distance(&r.unit(&r.source(&a)))
            .max(r.mul_unchecked(&a, &ia).distance(&r.unit(&r.target(&a))))
            .max(max_abs_vec(&(r.source(&ia) - r.target(&a))))
            .max(max_abs_vec(&(r.target(&ia) - r.source(&a))));
        inverse.update(res, || format!("g{i}"));
        // the inverse is fiberwise linear
        let b = VbArrow::new(g.clone(), zs[i + n].clone(), ys[i + n].clone());
        let res = r.inv(&a.fiber_combination(&b, 0.7))?.distance(&r.inv(&a)?.fiber_combination(&r.inv(&b)?, 0.7));
        linear.update(res, || format!("inverse g{i}"));

        for (j, h) in samples.iter().enumerate() {
            let a1 = VbArrow::new(h.clone(), zs[j].clone(), ys[j].clone());
            let a0 = VbArrow::new(g.clone(), zs[i + n].clone(), r.target(&a1));
            let p = r.mul_unchecked(&a0, &a1);
            src.update(max_abs_vec(&(r.source(&p) - r.source(&a1))), || pair_label(i, j));
            tgt.update(max_abs_vec(&(r.target(&p) - r.target(&a0))), || pair_label(i, j));

            let b1 = VbArrow::new(h.clone(), zs[j + 2 * n].clone(), ys[j + n].clone());
            let b0 = VbArrow::new(g.clone(), zs[i + 2 * n].clone(), r.target(&b1));
            let lhs = r.mul_unchecked(&a0.fiber_combination(&b0, -1.3), &a1.fiber_combination(&b1, -1.3));
            let rhs = p.fiber_combination(&r.mul_unchecked(&b0, &b1), -1.3);
            linear.update(lhs.distance(&rhs), || format!("product {}", pair_label(i, j)));
            let res = max_abs_vec(
                &(r.target(&a0.fiber_combination(&b0, 2.0)) - r.target(&a0) - r.target(&b0) * 2.0),
            );
            linear.update(res, || format!("target {}", pair_label(i, j)));

            for (k, l) in samples.iter().enumerate() {
                let c2 = VbArrow::new(l.clone(), zs[k + 2 * n].clone(), ys[k + 2 * n].clone());
                let c1 = VbArrow::new(h.clone(), zs[j + n].clone(), r.target(&c2));
                let c0 = VbArrow::new(g.clone(), zs[i].clone(), r.target(&c1));
                let lhs = r.mul_unchecked(&r.mul_unchecked(&c0, &c1), &c2);
                let rhs = r.mul_unchecked(&c0, &r.mul_unchecked(&c1, &c2));
                assoc.update(lhs.distance(&rhs), || format!("g{i},g{j},g{k}"));
            }
        }
    }
    let mut rep = SuiteReport::new("groupoid");
    let entries = [
        ("source-of-product", "s(m(a0,a1)) = s(a1)", &src),
        ("target-of-product", "t(m(a0,a1)) = t(a0)", &tgt),
        ("associativity", "m(m(a0,a1),a2) = m(a0,m(a1,a2))", &assoc),
        ("left-unit", "m(u(t(a)),a) = a", &left_unit),
        ("right-unit", "m(a,u(s(a))) = a", &right_unit),
        ("inverse", "m(inv a,a) = u(s a), m(a,inv a) = u(t a)", &inverse),
        ("fiberwise-linearity", "t, m and inv are linear on the fibers", &linear),
    ];
    for (name, law, t) in entries {
        rep.entries.push(Entry::from_max(name, law, Kind::Exact, t, th));
    }
    Ok(rep)
}

/// The honest actions on coker ∂ and ker ∂.
#[derive(Debug, Clone)]
pub struct InducedActions {
    /// Orthogonal complement of Img ∂ in 𝕙, representing coker ∂.
    pub coker: SubspaceBasis,
    pub image: SubspaceBasis,
    pub ker: SubspaceBasis,
    pub delta0: SmoothMap,
    pub delta1: SmoothMap,
}

pub fn induced_actions(r: &Ruth, tol: f64) -> Result<InducedActions> {
    r.validate_shapes()?;
    let (coker, image, ker) = if r.h_dim == 0 || r.k_dim == 0 {
        (SubspaceBasis::full(r.h_dim, tol), SubspaceBasis::zero(r.h_dim, tol), SubspaceBasis::full(r.k_dim, tol))
    } else {
        let s = svd_subspaces(&r.partial, tol)?;
        (s.coimage_complement, s.image, s.kernel)
    };
    let (c, dh) = (coker.vectors.clone(), r.delta_h.clone());
    let cd = coker.dim();
    let delta0 = SmoothMap::unary(cd, cd, move |g| c.transpose() * dh.at(g) * &c);
    let (kv, dk) = (ker.vectors.clone(), r.delta_k.clone());
    let kd = ker.dim();
    let delta1 = SmoothMap::unary(kd, kd, move |g| kv.transpose() * dk.at(g) * &kv);
    Ok(InducedActions { coker, image, ker, delta0, delta1 })
}

/// Action axioms of Δ⁰ and Δ¹ plus the invariance of Img ∂ and ker ∂.
pub fn check_induced_actions(r: &Ruth, ia: &InducedActions, samples: &[Mat], cfg: &CheckConfig) -> SuiteReport {
    let th = &cfg.thresholds;
    let e = r.chart.identity();
    let mut act0 = MaxTracker::new();
    let mut act1 = MaxTracker::new();
    let mut preserve = MaxTracker::new();
    let unit0 = max_abs(&(ia.delta0.at(&e) - Mat::identity(ia.coker.dim(), ia.coker.dim())));
    let unit1 = max_abs(&(ia.delta1.at(&e) - Mat::identity(ia.ker.dim(), ia.ker.dim())));
    act0.update(unit0, || "e".into());
    act1.update(unit1, || "e".into());
    let cproj = ia.coker.vectors.transpose();
    for (i, g) in samples.iter().enumerate() {
        // Δ^ℏ_g maps Img ∂ into itself and Δ^𝕜_g maps ker ∂ into itself
        let leak_img = max_abs(&(&cproj * r.delta_h.at(g) * &ia.image.vectors));
        let leak_ker = max_abs(&(&r.partial * r.delta_k.at(g) * &ia.ker.vectors));
        preserve.update(leak_img.max(leak_ker), || format!("g{i}"));
        for (j, h) in samples.iter().enumerate() {
            let gh = g * h;
            act0.update(max_abs(&(ia.delta0.at(&gh) - ia.delta0.at(g) * ia.delta0.at(h))), || pair_label(i, j));
            act1.update(max_abs(&(ia.delta1.at(&gh) - ia.delta1.at(g) * ia.delta1.at(h))), || pair_label(i, j));
        }
    }
    let mut rep = SuiteReport::new("induced");
    rep.entries.push(Entry::from_max("coker-action", "Δ⁰_{gh} = Δ⁰_g Δ⁰_h, Δ⁰_e = Id", Kind::Exact, &act0, th));
    rep.entries.push(Entry::from_max("ker-action", "Δ¹_{gh} = Δ¹_g Δ¹_h, Δ¹_e = Id", Kind::Exact, &act1, th));
    rep.entries.push(Entry::from_max(
        "invariant-subspaces",
        "Δ^ℏ_g(Img ∂) ⊆ Img ∂, Δ^𝕜_g(ker ∂) ⊆ ker ∂",
        Kind::Exact,
        &preserve,
        th,
    ));
    rep
}

/// Isotropy group of y with the splitting g ↦ (g; Z_g, y) on stabilizer samples.
pub fn isotropy_check(r: &Ruth, y: &Vector, z: &SmoothMap, samples: &[Mat], cfg: &CheckConfig) -> Result<SuiteReport> {
    r.validate_shapes()?;
    if (z.arity, z.rows, z.cols) != (1, r.k_dim, 1) || y.len() != r.h_dim {
        return Err(Error::InvalidInput("isotropy data has the wrong shape".into()));
    }
    for (i, g) in samples.iter().enumerate() {
        let res = max_abs_vec(&(&r.partial * as_vec(&z.at(g)) - (y - r.delta_h.at(g) * y)));
        if res > cfg.tol.max(cfg.thresholds.exact) {
            return Err(Error::Precondition(format!("∂Z_g = y − Δ^ℏ_g y fails at sample g{i} by {res:.3e}")));
        }
    }
    let th = &cfg.thresholds;
    let ia = induced_actions(r, cfg.tol)?;
    let one = SmoothMap::identity(1, 1);
    let dz = group_quasi_diff_map(&r.delta_k, &one, z);
    let ddz = group_quasi_diff_map(&r.delta_k, &one, &dz);
    let ym = as_mat(y);

    let mut stab = MaxTracker::new();
    let mut conj = MaxTracker::new();
    let mut twist = MaxTracker::new();
    let mut twist_ker = MaxTracker::new();
    let mut why = MaxTracker::new();
    let mut nodiff = MaxTracker::new();
    let section = |g: &Mat| VbArrow::new(g.clone(), as_vec(&z.at(g)), y.clone());
    for (i, g) in samples.iter().enumerate() {
        stab.update(max_abs_vec(&(ia.coker.vectors.transpose() * (r.delta_h.at(g) * y - y))), || format!("g{i}"));
        let s = section(g);
        let si = r.inv(&s)?;
        for c in 0..ia.ker.dim() {
            let v = ia.ker.vector(c);
            let iso = VbArrow::new(r.chart.identity(), v.clone(), y.clone());
            let conjugated = r.mul_unchecked(&r.mul_unchecked(&s, &iso), &si);
            let want = VbArrow::new(r.chart.identity(), r.delta_k.at(g) * &v, y.clone());
            conj.update(conjugated.distance(&want), || format!("g{i},v{c}"));
        }
        for (j, h) in samples.iter().enumerate() {
            let prod = r.mul_unchecked(&s, &section(h));
            let mu = &prod.z - as_vec(&z.at(&(g * h)));
            let om_y = as_vec(&(r.omega.at2(g, h) * &ym));
            let dzv = as_vec(&dz.at2(g, h));
            twist.update(max_abs_vec(&(&mu - (&dzv - &om_y))), || pair_label(i, j));
            twist_ker.update(max_abs_vec(&(&r.partial * &mu)), || pair_label(i, j));
            why.update(max_abs_vec(&(&r.partial * (&dzv - &om_y))), || pair_label(i, j));
            for (k, l) in samples.iter().enumerate() {
                let lhs = ddz.eval(&[g.clone(), h.clone(), l.clone()]);
                let rhs = -(r.omega.at2(g, h) * &r.partial * z.at(l));
                nodiff.update(max_abs(&(lhs - rhs)), || format!("g{i},g{j},g{k}"));
            }
        }
    }
    let mut rep = SuiteReport::new("isotropy");
    rep.entries.push(Entry::from_max("stabilizer", "Δ⁰_g fixes the class of y", Kind::Exact, &stab, th));
    rep.entries.push(Entry::from_max(
        "conjugation-is-ker-action",
        "(g;Z_g,y)(e;v,y)(g;Z_g,y)⁻¹ = (e;Δ¹_g v,y)",
        Kind::Exact,
        &conj,
        th,
    ));
    rep.entries.push(Entry::from_max("twist-formula", "μ^Z(g,h) = δZ(g,h) − Ω(g,h)y", Kind::Exact, &twist, th));
    rep.entries.push(Entry::from_max("twist-in-ker", "∂μ^Z(g,h) = 0", Kind::Exact, &twist_ker, th));
    rep.entries.push(Entry::from_max("boundary-of-twist", "∂δZ(g,h) = ∂Ω(g,h)y", Kind::Exact, &why, th));
    rep.entries.push(Entry::from_max(
        "second-differential",
        "δ²Z(g,h,k) = −Ω(g,h)∂Z_k",
        Kind::Exact,
        &nodiff,
        th,
    ));
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDecision {
    /// Sample index, group element and core vector with y' = Δ^ℏ_g y + ∂z.
    pub witness: Option<(usize, Mat, Vector)>,
    /// Smallest coker distance seen over the samples.
    pub residual: f64,
}

pub fn orbit_membership(r: &Ruth, y: &Vector, y2: &Vector, samples: &[Mat], tol: f64) -> Result<OrbitDecision> {
    let ia = induced_actions(r, tol)?;
    let p = pinv(&r.partial, tol);
    let mut best = f64::INFINITY;
    for (i, g) in samples.iter().enumerate() {
        let diff = y2 - r.delta_h.at(g) * y;
        let res = max_abs_vec(&(ia.coker.vectors.transpose() * &diff));
        best = best.min(res);
        if res <= tol {
            let z = &p * &diff;
            return Ok(OrbitDecision { witness: Some((i, g.clone(), z)), residual: res });
        }
    }
    Ok(OrbitDecision { witness: None, residual: best })
}
