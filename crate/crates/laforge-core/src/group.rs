//! Matrix Lie group charts, right-trivialized calculus, smooth maps on G^n
//! and the simplicial quasi-differential.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::numkit::{ensure_finite, mat_exp, Fd, Mat, Vector};

/// A matrix group near the identity. `basis[i]` is the matrix of e_i and the
/// structure constants of `algebra` are those of the matrix commutator.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupChart {
    pub name: String,
    pub matrix_size: usize,
    pub algebra: LieAlgebra,
    pub basis: Vec<Mat>,
    coords_map: Mat,
}

impl GroupChart {
    pub fn new(name: &str, matrix_size: usize, basis: Vec<Mat>) -> Result<Self> {
        let d = basis.len();
        let n2 = matrix_size * matrix_size;
        if basis.iter().any(|b| b.shape() != (matrix_size, matrix_size)) {
            return Err(Error::InvalidInput("basis matrices have the wrong size".into()));
        }
        let mut flat = Mat::zeros(n2, d);
        for (i, b) in basis.iter().enumerate() {
            for (k, v) in b.iter().enumerate() {
                flat[(k, i)] = *v;
            }
        }
        // Gram-matrix solve keeps coordinates exact for Frobenius-orthogonal bases
        let gram = flat.transpose() * &flat;
        let coords_map = match gram.clone().try_inverse() {
            Some(gi) => gi * flat.transpose(),
            None => return Err(Error::InvalidInput("basis matrices are linearly dependent".into())),
        };
        let mut chart =
            GroupChart { name: name.into(), matrix_size, algebra: LieAlgebra::abelian(d), basis, coords_map };
        let mut leak: f64 = 0.0;
        let algebra = LieAlgebra::from_bracket(d, |i, j| {
            let c = &chart.basis[i] * &chart.basis[j] - &chart.basis[j] * &chart.basis[i];
            let x = chart.coords(&c);
            leak = leak.max(crate::numkit::max_abs(&(chart.embed(&x) - c)));
            x
        });
        if leak > 1e-12 {
            return Err(Error::InvalidInput(format!("basis of {name} does not close under the commutator")));
        }
        chart.algebra = algebra;
        Ok(chart)
    }

    /// Aff(1) = {(a, b)} as matrices [[a, b], [0, 1]]; basis x1 = E11, x2 = E12.
    pub fn aff1() -> Self {
        let e11 = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let e12 = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        GroupChart::new("aff1", 2, alloc::vec![e11, e12]).expect("aff(1) basis")
    }

    /// SO(3) with the standard infinitesimal rotations.
    pub fn so3() -> Self {
        let lx = Mat::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
        let ly = Mat::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
        let lz = Mat::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        GroupChart::new("so3", 3, alloc::vec![lx, ly, lz]).expect("so(3) basis")
    }

    /// The multiplicative group of positive reals, 1×1 matrices e^t.
    pub fn line() -> Self {
        GroupChart::new("line", 1, alloc::vec![Mat::identity(1, 1)]).expect("line basis")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn identity(&self) -> Mat {
        Mat::identity(self.matrix_size, self.matrix_size)
    }

    pub fn embed(&self, x: &Vector) -> Mat {
        let mut m = Mat::zeros(self.matrix_size, self.matrix_size);
        for (i, b) in self.basis.iter().enumerate() {
            m += b * x[i];
        }
        m
    }

    /// Algebra coordinates of a matrix in the span of the basis.
    pub fn coords(&self, m: &Mat) -> Vector {
        let flat = Vector::from_iterator(m.len(), m.iter().copied());
        &self.coords_map * flat
    }

    pub fn exp(&self, x: &Vector) -> Mat {
        mat_exp(&self.embed(x)).expect("square embedding")
    }

    pub fn inverse(&self, g: &Mat) -> Result<Mat> {
        g.clone().try_inverse().ok_or_else(|| Error::Domain("singular group element".into()))
    }

    /// Matrix of Ad_g in algebra coordinates.
    pub fn ad_matrix(&self, g: &Mat) -> Mat {
        let ginv = g.clone().try_inverse().expect("group elements are invertible");
        let d = self.dim();
        let mut m = Mat::zeros(d, d);
        for i in 0..d {
            m.set_column(i, &self.coords(&(g * &self.basis[i] * &ginv)));
        }
        m
    }

    /// Bracket of right-invariant vector fields: the negated commutator.
    pub fn rinv_bracket(&self, x: &Vector, y: &Vector) -> Vector {
        self.algebra.bracket(y, x)
    }

    /// The curve exp(t x)·g through g.
    pub fn curve(&self, x: &Vector, g: &Mat, t: f64) -> Mat {
        self.exp(&(x * t)) * g
    }

    /// Derivative of a matrix-valued function along the right-invariant
    /// field of x at g.
    pub fn deriv<F>(&self, fd: &Fd, g: &Mat, x: &Vector, mut f: F) -> Result<Mat>
    where
        F: FnMut(&Mat) -> Result<Mat>,
    {
        if x.iter().all(|v| *v == 0.0) {
            let v = f(g)?;
            return Ok(Mat::zeros(v.nrows(), v.ncols()));
        }
        fd.diff(|t| f(&self.curve(x, g, t)))
    }

    /// Derivative of a function of several group elements along independent
    /// right-invariant curves in each slot. Zero directions are skipped.
    pub fn deriv_multi<F>(&self, fd: &Fd, pts: &[Mat], dirs: &[Vector], mut f: F) -> Result<Mat>
    where
        F: FnMut(&[Mat]) -> Result<Mat>,
    {
        if pts.len() != dirs.len() {
            return Err(Error::InvalidInput("one direction per slot is required".into()));
        }
        let mut out: Option<Mat> = None;
        for slot in 0..pts.len() {
            if dirs[slot].iter().all(|v| *v == 0.0) {
                continue;
            }
            let mut moved = pts.to_vec();
            let d = fd.diff(|t| {
                moved[slot] = self.curve(&dirs[slot], &pts[slot], t);
                f(&moved)
            })?;
            out = Some(match out {
                Some(o) => o + d,
                None => d,
            });
        }
        match out {
            Some(o) => Ok(o),
            None => {
                let v = f(pts)?;
                Ok(Mat::zeros(v.nrows(), v.ncols()))
            }
        }
    }
}

/// Right-trivialized X∗Y for X = x at g and Y = y at h: the coefficient at gh.
pub fn tangent_group_mult(chart: &GroupChart, x: &Vector, g: &Mat, y: &Vector, _h: &Mat) -> Vector {
    x + chart.ad_matrix(g) * y
}

pub type Evaluator = Arc<dyn Fn(&[Mat]) -> Mat + Send + Sync>;

/// Matrix-valued smooth map on G^arity.
#[derive(Clone)]
pub struct SmoothMap {
    pub arity: usize,
    pub rows: usize,
    pub cols: usize,
    f: Evaluator,
}

impl core::fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "SmoothMap(arity {}, {}x{})", self.arity, self.rows, self.cols)
    }
}

impl SmoothMap {
    pub fn new<F>(arity: usize, rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(&[Mat]) -> Mat + Send + Sync + 'static,
    {
        SmoothMap { arity, rows, cols, f: Arc::new(f) }
    }

    pub fn unary<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(&Mat) -> Mat + Send + Sync + 'static,
    {
        SmoothMap::new(1, rows, cols, move |p| f(&p[0]))
    }

    pub fn binary<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(&Mat, &Mat) -> Mat + Send + Sync + 'static,
    {
        SmoothMap::new(2, rows, cols, move |p| f(&p[0], &p[1]))
    }

    pub fn constant(arity: usize, m: Mat) -> Self {
        let (r, c) = m.shape();
        SmoothMap::new(arity, r, c, move |_| m.clone())
    }

    pub fn zero(arity: usize, rows: usize, cols: usize) -> Self {
        SmoothMap::constant(arity, Mat::zeros(rows, cols))
    }

    pub fn identity(arity: usize, n: usize) -> Self {
        SmoothMap::constant(arity, Mat::identity(n, n))
    }

    pub fn eval(&self, pts: &[Mat]) -> Mat {
        debug_assert_eq!(pts.len(), self.arity);
        (self.f)(pts)
    }

    /// Evaluation that reports non-finite values as a domain error.
    pub fn try_eval(&self, pts: &[Mat]) -> Result<Mat> {
        let m = self.eval(pts);
        ensure_finite(&m, "map value").map_err(|_| Error::Domain("map evaluated outside its domain".into()))?;
        Ok(m)
    }

    pub fn at(&self, g: &Mat) -> Mat {
        self.eval(core::slice::from_ref(g))
    }

    pub fn at2(&self, g: &Mat, h: &Mat) -> Mat {
        self.eval(&[g.clone(), h.clone()])
    }

    /// Pointwise sum with another map of the same shape.
    pub fn plus(&self, other: &SmoothMap) -> SmoothMap {
        let (a, b) = (self.clone(), other.clone());
        SmoothMap::new(self.arity, self.rows, self.cols, move |p| a.eval(p) + b.eval(p))
    }

    pub fn scaled(&self, s: f64) -> SmoothMap {
        let a = self.clone();
        SmoothMap::new(self.arity, self.rows, self.cols, move |p| a.eval(p) * s)
    }
}

/// d/dτ F(.., exp(τx)·g_slot, ..) at τ = 0.
pub fn right_directional_derivative(
    chart: &GroupChart,
    f: &SmoothMap,
    slot: usize,
    pts: &[Mat],
    x: &Vector,
    fd: &Fd,
) -> Result<Mat> {
    if slot >= f.arity || pts.len() != f.arity {
        return Err(Error::InvalidInput("slot out of range".into()));
    }
    let mut moved = pts.to_vec();
    fd.diff(|t| {
        moved[slot] = chart.curve(x, &pts[slot], t);
        f.try_eval(&moved)
    })
}

/// (δθ)(g0..gn) = Δᵏ_{g0} θ(g1..gn) + Σ_{k=1}^{n} (−1)^k θ(.., g_{k−1}g_k, ..)
///              + (−1)^{n+1} θ(g0..g_{n−1}) Δᵂ_{gn}.
/// `theta` is Hom(W, 𝕜)-valued of arity n; `delta_w` acts on W.
pub fn group_quasi_diff(delta_k: &SmoothMap, delta_w: &SmoothMap, theta: &SmoothMap, pts: &[Mat]) -> Result<Mat> {
    let n = theta.arity;
    if pts.len() != n + 1 {
        return Err(Error::InvalidInput(format!("a degree-{n} cochain needs {} points", n + 1)));
    }
    let mut out = delta_k.at(&pts[0]) * theta.eval(&pts[1..]);
    for k in 1..=n {
        let mut face: Vec<Mat> = Vec::with_capacity(n);
        face.extend_from_slice(&pts[..k - 1]);
        face.push(&pts[k - 1] * &pts[k]);
        face.extend_from_slice(&pts[k + 1..]);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out += theta.eval(&face) * sign;
    }
    let sign = if (n + 1) % 2 == 0 { 1.0 } else { -1.0 };
    out += theta.eval(&pts[..n]) * delta_w.at(&pts[n]) * sign;
    Ok(out)
}

/// δθ as a smooth map of arity n+1.
pub fn group_quasi_diff_map(delta_k: &SmoothMap, delta_w: &SmoothMap, theta: &SmoothMap) -> SmoothMap {
    let (dk, dw, th) = (delta_k.clone(), delta_w.clone(), theta.clone());
    SmoothMap::new(theta.arity + 1, theta.rows, theta.cols, move |p| {
        group_quasi_diff(&dk, &dw, &th, p).expect("arity checked at construction")
    })
}

/// Deterministic samples exp(x) with ‖x‖ ≤ radius; the identity comes first.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSampler {
    pub seed: u64,
    pub radius: f64,
    pub chart: GroupChart,
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform point of the closed ball of the given radius, by rejection.
pub fn ball_point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vector {
    if dim == 0 {
        return Vector::zeros(0);
    }
    loop {
        let v = Vector::from_iterator(dim, (0..dim).map(|_| 2.0 * uniform(rng) - 1.0));
        if v.norm() <= 1.0 {
            return v * radius;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sample_elements(s: &GroupSampler, n: usize) -> Vec<Mat> {
    sample_with_logs(s, n).into_iter().map(|(g, _)| g).collect()
}

/// Samples together with the algebra elements they exponentiate.
pub fn sample_with_logs(s: &GroupSampler, n: usize) -> Vec<(Mat, Vector)> {
    let mut r = rng(s.seed);
    let d = s.chart.dim();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push((s.chart.identity(), Vector::zeros(d)));
    while out.len() < n {
        let x = ball_point(&mut r, d, s.radius);
        out.push((s.chart.exp(&x), x));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{max_abs, max_abs_vec, unit, vector};

    fn fd() -> Fd {
        Fd::central(1e-4)
    }

    fn aff(a: f64, b: f64) -> Mat {
        Mat::from_row_slice(2, 2, &[a, b, 0.0, 1.0])
    }

    #[test]
    fn charts_have_expected_constants() {
        assert_eq!(GroupChart::aff1().algebra, LieAlgebra::aff1(1.0));
        assert_eq!(GroupChart::so3().algebra, LieAlgebra::so3());
        assert_eq!(GroupChart::line().algebra, LieAlgebra::abelian(1));
    }

    #[test]
    fn constant_map_has_zero_derivative() {
        let c = GroupChart::aff1();
        let f = SmoothMap::constant(1, Mat::identity(2, 2));
        let d = right_directional_derivative(&c, &f, 0, &[aff(2.0, 1.0)], &vector(&[0.3, 0.7]), &fd()).unwrap();
        assert_eq!(max_abs(&d), 0.0);
    }

    #[test]
    fn derivative_of_adjoint_is_ad() {
        let c = GroupChart::aff1();
        let chart = c.clone();
        let f = SmoothMap::unary(2, 2, move |g| chart.ad_matrix(g));
        let x2 = unit(2, 1);
        let d = right_directional_derivative(&c, &f, 0, &[c.identity()], &x2, &fd()).unwrap();
        // ad_{x2} as commutator: [x2, x1] = -x2, [x2, x2] = 0
        let want = c.algebra.ad(&x2);
        assert!(max_abs(&(d - want)) < 1e-8);
    }

    #[test]
    fn derivative_of_chart_embedding_is_x() {
        let c = GroupChart::so3();
        let f = SmoothMap::unary(3, 3, |g| g.clone());
        let x = vector(&[0.2, -0.4, 1.1]);
        let d = right_directional_derivative(&c, &f, 0, &[c.identity()], &x, &fd()).unwrap();
        assert!(max_abs(&(d - c.embed(&x))) < 1e-8);
    }

    #[test]
    fn tangent_mult_examples() {
        let c = GroupChart::aff1();
        let e = c.identity();
        let (x, y) = (vector(&[1.0, 2.0]), vector(&[-0.5, 3.0]));
        assert_eq!(tangent_group_mult(&c, &x, &e, &y, &e), &x + &y);
        let r = tangent_group_mult(&c, &Vector::zeros(2), &aff(2.0, 3.0), &unit(2, 1), &e);
        assert!(max_abs_vec(&(r - vector(&[0.0, 2.0]))) < 1e-14);
        let r = tangent_group_mult(&c, &x, &aff(2.0, 3.0), &Vector::zeros(2), &aff(0.5, 1.0));
        assert!(max_abs_vec(&(r - x)) < 1e-15);
    }

    #[test]
    fn sampler_starts_at_identity_and_is_deterministic() {
        let s = GroupSampler { seed: 7, radius: 0.5, chart: GroupChart::aff1() };
        assert_eq!(sample_elements(&s, 1), alloc::vec![Mat::identity(2, 2)]);
        assert_eq!(sample_elements(&s, 6), sample_elements(&s, 6));
    }

    fn aff_log(g: &Mat) -> Vector {
        let (a, b) = (g[(0, 0)], g[(0, 1)]);
        let la = libm::log(a);
        if (a - 1.0).abs() < 1e-12 {
            vector(&[0.0, b])
        } else {
            vector(&[la, b * la / (a - 1.0)])
        }
    }

    #[test]
    fn aff1_samples_stay_in_the_ball() {
        let s = GroupSampler { seed: 7, radius: 0.5, chart: GroupChart::aff1() };
        let g = sample_elements(&s, 5);
        assert_eq!(g.len(), 5);
        for m in &g {
            assert!(aff_log(m).norm() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn quasi_diff_of_constant_with_trivial_actions_vanishes() {
        let id = SmoothMap::identity(1, 2);
        let theta = SmoothMap::constant(1, Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        let c = GroupChart::aff1();
        let pts = [aff(2.0, 1.0), aff(0.5, -1.0)];
        let r = group_quasi_diff(&id, &id, &theta, &pts).unwrap();
        // n = 1: θ − θ + θ = θ; n = 2: θ − θ + θ − θ = 0
        assert!(max_abs(&(r - theta.at(&c.identity()))) < 1e-15);
        let pair = SmoothMap::constant(2, Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        let r2 = group_quasi_diff(&id, &id, &pair, &[aff(2.0, 1.0), aff(0.5, -1.0), aff(1.5, 0.0)]).unwrap();
        assert_eq!(max_abs(&r2), 0.0);
    }

    #[test]
    fn quasi_diff_squares_to_zero_for_actions() {
        // Δ = Ad on aff(1), a true action: δ² = 0 on a 1-cochain
        let c = GroupChart::aff1();
        let (c1, c2) = (c.clone(), c.clone());
        let ad = SmoothMap::unary(2, 2, move |g| c1.ad_matrix(g));
        let z = SmoothMap::unary(2, 1, move |g| crate::numkit::as_mat(&c2.coords(&(g - Mat::identity(2, 2)))));
        let one = SmoothMap::identity(1, 1);
        let dz = group_quasi_diff_map(&ad, &one, &z);
        let pts = [aff(2.0, 1.0), aff(0.5, -1.0), aff(1.5, 0.3)];
        let ddz = group_quasi_diff(&ad, &one, &dz, &pts).unwrap();
        assert!(max_abs(&ddz) < 1e-13);
    }
}
