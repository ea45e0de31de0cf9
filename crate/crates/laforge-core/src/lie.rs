//! Lie algebras by structure constants, crossed modules, twisted semidirect
//! products, the Chevalley-Eilenberg formula and butterflies.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numkit::{max_abs, max_abs_vec, svd_subspaces, unit, Mat, SubspaceBasis, Vector};
use crate::report::MaxTracker;

/// Linear maps are plain matrices acting on coordinate columns.
pub type LinearMap = Mat;

/// Finite-dimensional real Lie algebra; `c[(i*d + j)*d + k]` is the
/// coefficient of e_k in [e_i, e_j].
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    c: Vec<f64>,
}

impl LieAlgebra {
    pub fn new(dim: usize, c: Vec<f64>) -> Result<Self> {
        if c.len() != dim * dim * dim {
            return Err(Error::InvalidInput(format!(
                "structure constants of a {dim}-dimensional algebra need {} entries, got {}",
                dim * dim * dim,
                c.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite structure constant".into()));
        }
        Ok(LieAlgebra { dim, c })
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebra { dim, c: vec![0.0; dim * dim * dim] }
    }

    /// Builds the constants from a bracket on basis vectors.
    pub fn from_bracket<F: FnMut(usize, usize) -> Vector>(dim: usize, mut f: F) -> Self {
        let mut c = vec![0.0; dim * dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let v = f(i, j);
                for k in 0..dim {
                    c[(i * dim + j) * dim + k] = v[k];
                }
            }
        }
        LieAlgebra { dim, c }
    }

    /// aff(1) with [x1, x2] = q x2.
    pub fn aff1(q: f64) -> Self {
        let mut l = Self::abelian(2);
        l.set(0, 1, 1, q);
        l.set(1, 0, 1, -q);
        l
    }

    /// so(3) with [e_i, e_j] = ε_ijk e_k.
    pub fn so3() -> Self {
        let mut l = Self::abelian(3);
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            l.set(i, j, k, 1.0);
            l.set(j, i, k, -1.0);
        }
        l
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constants(&self) -> &[f64] {
        &self.c
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let d = self.dim;
        self.c[(i * d + j) * d + k] = v;
    }

    pub fn bracket(&self, x: &Vector, y: &Vector) -> Vector {
        let d = self.dim;
        let mut out = Vector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..d {
                    out[k] += w * self.get(i, j, k);
                }
            }
        }
        out
    }

    pub fn basis_bracket(&self, i: usize, j: usize) -> Vector {
        Vector::from_iterator(self.dim, (0..self.dim).map(|k| self.get(i, j, k)))
    }

    /// Matrix of y ↦ [x, y].
    pub fn ad(&self, x: &Vector) -> Mat {
        let d = self.dim;
        let mut m = Mat::zeros(d, d);
        for j in 0..d {
            m.set_column(j, &self.bracket(x, &unit(d, j)));
        }
        m
    }

    /// The opposite bracket [x, y]' = [y, x].
    pub fn opposite(&self) -> Self {
        LieAlgebra { dim: self.dim, c: self.c.iter().map(|x| -x).collect() }
    }

    /// Bracket restricted to the subspace spanned by the orthonormal basis,
    /// together with how far the bracket leaves the subspace.
    pub fn restrict(&self, basis: &SubspaceBasis) -> (LieAlgebra, f64) {
        let m = basis.dim();
        let mut leak: f64 = 0.0;
        let sub = LieAlgebra::from_bracket(m, |a, b| {
            let v = self.bracket(&basis.vector(a), &basis.vector(b));
            let coords = basis.coords(&v);
            leak = leak.max(max_abs_vec(&(&v - &basis.vectors * &coords)));
            coords
        });
        (sub, leak)
    }

    pub fn max_abs_diff(&self, other: &LieAlgebra) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.c.iter().zip(&other.c).fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    pub fn is_abelian(&self, tol: f64) -> bool {
        self.c.iter().all(|x| x.abs() <= tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieReport {
    pub antisymmetry: MaxTracker,
    pub jacobi: MaxTracker,
}

impl LieReport {
    pub fn max(&self) -> f64 {
        self.antisymmetry.value.max(self.jacobi.value)
    }
}

/// Max antisymmetry and Jacobi residuals over all basis pairs and triples.
pub fn check_lie_algebra(l: &LieAlgebra) -> LieReport {
    let d = l.dim();
    let mut antisymmetry = MaxTracker::new();
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let r = (l.get(i, j, k) + l.get(j, i, k)).abs();
                antisymmetry.update(r, || format!("e{i},e{j}"));
            }
        }
    }
    let mut jacobi = MaxTracker::new();
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let r = jacobiator(l, i, j, k);
                jacobi.update(r, || format!("e{i},e{j},e{k}"));
            }
        }
    }
    LieReport { antisymmetry, jacobi }
}

fn jacobiator(l: &LieAlgebra, i: usize, j: usize, k: usize) -> f64 {
    let d = l.dim();
    let (a, b, c) = (unit(d, i), unit(d, j), unit(d, k));
    let s = l.bracket(&a, &l.bracket(&b, &c)) + l.bracket(&b, &l.bracket(&c, &a)) + l.bracket(&c, &l.bracket(&a, &b));
    max_abs_vec(&s)
}

/// The Chevalley-Eilenberg formula on basis tuples:
/// (dθ)(e_{i0},..,e_{in}) = Σ_a (-1)^a act(i_a, θ(..î_a..))
///                        + Σ_{a<b} (-1)^{a+b} θ([e_{ia}, e_{ib}], ..î_a..î_b..).
/// `act(i, rest)` must return the action of e_i on θ(rest); `theta` evaluates
/// the cochain on basis tuples and is extended linearly in its first slot.
pub fn ce_formula<A, T>(l: &LieAlgebra, idx: &[usize], mut act: A, mut theta: T) -> Result<Vector>
where
    A: FnMut(usize, &[usize]) -> Result<Vector>,
    T: FnMut(&[usize]) -> Result<Vector>,
{
    let n1 = idx.len();
    let mut out: Option<Vector> = None;
    let add = |v: Vector, s: f64, out: &mut Option<Vector>| match out {
        Some(o) => *o += v * s,
        None => *out = Some(v * s),
    };
    for a in 0..n1 {
        let rest: Vec<usize> = idx.iter().enumerate().filter(|(p, _)| *p != a).map(|(_, &x)| x).collect();
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        add(act(idx[a], &rest)?, sign, &mut out);
    }
    for a in 0..n1 {
        for b in (a + 1)..n1 {
            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
            let others: Vec<usize> =
                idx.iter().enumerate().filter(|(p, _)| *p != a && *p != b).map(|(_, &x)| x).collect();
            for k in 0..l.dim() {
                let coeff = l.get(idx[a], idx[b], k);
                if coeff == 0.0 {
                    continue;
                }
                let mut args = Vec::with_capacity(n1 - 1);
                args.push(k);
                args.extend_from_slice(&others);
                add(theta(&args)?, sign * coeff, &mut out);
            }
        }
    }
    out.ok_or_else(|| Error::InvalidInput("empty cochain argument".into()))
}

/// W-valued alternating n-cochain on a d-dimensional algebra, stored on all
/// basis multi-indices (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    pub degree: usize,
    pub dim: usize,
    pub w: usize,
    pub values: Vec<Vector>,
}

impl Cochain {
    pub fn from_fn<F: FnMut(&[usize]) -> Vector>(degree: usize, dim: usize, w: usize, mut f: F) -> Self {
        let count = dim.pow(degree as u32);
        let mut values = Vec::with_capacity(count);
        let mut idx = vec![0usize; degree];
        for flat in 0..count {
            let mut r = flat;
            for p in (0..degree).rev() {
                idx[p] = r % dim;
                r /= dim;
            }
            values.push(f(&idx));
        }
        Cochain { degree, dim, w, values }
    }

    pub fn eval(&self, idx: &[usize]) -> &Vector {
        let flat = idx.iter().fold(0, |acc, &i| acc * self.dim + i);
        &self.values[flat]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(max_abs_vec(v)))
    }
}

/// CE quasi-differential with respect to `rep` (one W×W matrix per basis
/// vector). No d² = 0 is assumed: `rep` may fail to be a representation.
pub fn ce_quasi_diff(l: &LieAlgebra, rep: &[Mat], cochain: &Cochain) -> Result<Cochain> {
    let d = l.dim();
    if rep.len() != d || cochain.dim != d || rep.iter().any(|m| m.shape() != (cochain.w, cochain.w)) {
        return Err(Error::InvalidInput("representation and cochain shapes disagree".into()));
    }
    let mut err = None;
    let out = Cochain::from_fn(cochain.degree + 1, d, cochain.w, |idx| {
        match ce_formula(l, idx, |i, rest| Ok(&rep[i] * cochain.eval(rest)), |args| Ok(cochain.eval(args).clone())) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                Vector::zeros(cochain.w)
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// ∂: top → base with base acting on top by `action[i]` (matrix of e_i).
#[derive(Debug, Clone, PartialEq)]
pub struct CrossedModule {
    pub base: LieAlgebra,
    pub top: LieAlgebra,
    pub structural: LinearMap,
    pub action: Vec<Mat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossedModuleReport {
    pub derivation: MaxTracker,
    pub equivariance: MaxTracker,
    pub peiffer: MaxTracker,
}

impl CrossedModuleReport {
    pub fn max(&self) -> f64 {
        self.derivation.value.max(self.equivariance.value).max(self.peiffer.value)
    }
}

impl CrossedModule {
    fn act(&self, x: &Vector) -> Mat {
        let m = self.top.dim();
        let mut out = Mat::zeros(m, m);
        for (i, a) in self.action.iter().enumerate() {
            out += a * x[i];
        }
        out
    }
}

pub fn check_crossed_module(cm: &CrossedModule) -> Result<CrossedModuleReport> {
    let (b, t) = (cm.base.dim(), cm.top.dim());
    if cm.structural.shape() != (b, t) || cm.action.len() != b || cm.action.iter().any(|a| a.shape() != (t, t)) {
        return Err(Error::InvalidInput("crossed module shapes disagree".into()));
    }
    let mut derivation = MaxTracker::new();
    let mut equivariance = MaxTracker::new();
    let mut peiffer = MaxTracker::new();
    for i in 0..b {
        let a = &cm.action[i];
        for m0 in 0..t {
            let v0 = unit(t, m0);
            // ∂(x·m) = [x, ∂m]
            let r = max_abs_vec(&(&cm.structural * (a * &v0) - cm.base.bracket(&unit(b, i), &(&cm.structural * &v0))));
            equivariance.update(r, || format!("x{i},m{m0}"));
            for m1 in 0..t {
                let v1 = unit(t, m1);
                let r = max_abs_vec(
                    &(a * cm.top.bracket(&v0, &v1) - cm.top.bracket(&(a * &v0), &v1) - cm.top.bracket(&v0, &(a * &v1))),
                );
                derivation.update(r, || format!("x{i},m{m0},m{m1}"));
            }
        }
    }
    for m0 in 0..t {
        let v0 = unit(t, m0);
        let act = cm.act(&(&cm.structural * &v0));
        for m1 in 0..t {
            let v1 = unit(t, m1);
            let r = max_abs_vec(&(&act * &v1 - cm.top.bracket(&v0, &v1)));
            peiffer.update(r, || format!("m{m0},m{m1}"));
        }
    }
    Ok(CrossedModuleReport { derivation, equivariance, peiffer })
}

/// Bracket on fiber ⊕ base (fiber coordinates first):
/// [(v0,y0),(v1,y1)] = ([v0,v1] + rep(y0)v1 − rep(y1)v0 + cocycle(y0,y1), [y0,y1]).
/// `cocycle[i*d + j]` is the value on (e_i, e_j). Fails with the first basis
/// triple whose Jacobiator exceeds `tol`.
pub fn semidirect_twisted(
    base: &LieAlgebra,
    fiber: &LieAlgebra,
    rep: &[Mat],
    cocycle: &[Vector],
    tol: f64,
) -> Result<LieAlgebra> {
    let (d, f) = (base.dim(), fiber.dim());
    if rep.len() != d || rep.iter().any(|m| m.shape() != (f, f)) || cocycle.len() != d * d {
        return Err(Error::InvalidInput("semidirect product data shapes disagree".into()));
    }
    let n = f + d;
    let split = |x: &Vector| (x.rows(0, f).into_owned(), x.rows(f, d).into_owned());
    let rep_of = |y: &Vector| {
        let mut m = Mat::zeros(f, f);
        for i in 0..d {
            m += &rep[i] * y[i];
        }
        m
    };
    let cocycle_of = |y0: &Vector, y1: &Vector| {
        let mut v = Vector::zeros(f);
        for i in 0..d {
            for j in 0..d {
                let w = y0[i] * y1[j];
                if w != 0.0 {
                    v += &cocycle[i * d + j] * w;
                }
            }
        }
        v
    };
    let l = LieAlgebra::from_bracket(n, |a, b| {
        let (v0, y0) = split(&unit(n, a));
        let (v1, y1) = split(&unit(n, b));
        let top = fiber.bracket(&v0, &v1) + rep_of(&y0) * &v1 - rep_of(&y1) * &v0 + cocycle_of(&y0, &y1);
        let bottom = base.bracket(&y0, &y1);
        let mut out = Vector::zeros(n);
        out.rows_mut(0, f).copy_from(&top);
        out.rows_mut(f, d).copy_from(&bottom);
        out
    });
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let r = jacobiator(&l, i, j, k);
                if !(r <= tol) {
                    return Err(Error::Jacobi { triple: (i, j, k), residual: r });
                }
            }
        }
    }
    Ok(l)
}

/// Diagram of two short sequences through the centre 𝕜:
/// 𝔨 → 𝕜 → 𝔩 (north-west to south-east) and ker∂ → 𝕜 → ∂𝕜 (north-east to
/// south-west). Subspaces are stored as inclusions into 𝕜 and the maps out of
/// 𝕜 as coordinates in orthonormal bases of the targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Butterfly {
    pub center: LieAlgebra,
    pub nw_incl: Mat,
    pub ne_incl: Mat,
    pub to_sw: Mat,
    pub to_se: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalReport {
    pub injective: bool,
    pub surjective: bool,
    pub exact_middle: bool,
    pub composite: f64,
}

impl DiagonalReport {
    pub fn exact(&self) -> bool {
        self.injective && self.surjective && self.exact_middle
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ButterflyReport {
    pub nw_se: DiagonalReport,
    pub ne_sw: DiagonalReport,
    /// Max |c| of the bracket restricted to ker∂ ∩ kerρ.
    pub v_bracket: f64,
    pub v_dim: usize,
    /// dim ∂𝕜/∂𝔨 and dim 𝔩/ρ(ker∂).
    pub quotient_dims: (usize, usize),
}

impl ButterflyReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.nw_se.exact() && self.ne_sw.exact() && self.v_bracket <= tol && self.quotient_dims.0 == self.quotient_dims.1
    }
}

fn diagonal(incl: &Mat, out: &Mat, tol: f64) -> Result<DiagonalReport> {
    let n = incl.nrows();
    let sub_dim = incl.ncols();
    let target_dim = out.nrows();
    let incl_rank = svd_subspaces(incl, tol)?.rank;
    let out_sub = svd_subspaces(out, tol)?;
    let composite = if sub_dim == 0 || target_dim == 0 { 0.0 } else { max_abs(&(out * incl)) };
    Ok(DiagonalReport {
        injective: incl_rank == sub_dim,
        surjective: out_sub.rank == target_dim,
        exact_middle: composite <= tol && sub_dim + out_sub.rank == n,
        composite,
    })
}

fn rank(m: &Mat, tol: f64) -> Result<usize> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    Ok(svd_subspaces(m, tol)?.rank)
}

pub fn check_butterfly(b: &Butterfly, tol: f64) -> Result<ButterflyReport> {
    let n = b.center.dim();
    if b.nw_incl.nrows() != n || b.ne_incl.nrows() != n || b.to_sw.ncols() != n || b.to_se.ncols() != n {
        return Err(Error::InvalidInput("butterfly maps do not meet in the centre".into()));
    }
    let nw_se = diagonal(&b.nw_incl, &b.to_se, tol)?;
    let ne_sw = diagonal(&b.ne_incl, &b.to_sw, tol)?;
    let v = if n == 0 {
        SubspaceBasis::zero(0, tol)
    } else {
        let k = SubspaceBasis::span(&b.nw_incl, tol)?;
        let kd = SubspaceBasis::span(&b.ne_incl, tol)?;
        k.intersection(&kd)?
    };
    let (vl, leak) = b.center.restrict(&v);
    let v_bracket = vl.constants().iter().fold(leak, |a, x| a.max(x.abs()));
    let sw_dim = b.to_sw.nrows();
    let se_dim = b.to_se.nrows();
    let q0 = sw_dim - rank(&(&b.to_sw * &b.nw_incl), tol)?.min(sw_dim);
    let q1 = se_dim - rank(&(&b.to_se * &b.ne_incl), tol)?.min(se_dim);
    Ok(ButterflyReport { nw_se, ne_sw, v_bracket, v_dim: v.dim(), quotient_dims: (q0, q1) })
}

/// Short human-readable label for a basis tuple.
pub fn label(prefix: &str, idx: &[usize]) -> String {
    let mut s = String::from(prefix);
    for (p, i) in idx.iter().enumerate() {
        if p > 0 {
            s.push(',');
        }
        s.push_str(&format!("{i}"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::vector;

    #[test]
    fn abelian_algebra_is_valid() {
        let r = check_lie_algebra(&LieAlgebra::abelian(3));
        assert_eq!(r.max(), 0.0);
    }

    #[test]
    fn aff1_is_valid() {
        let r = check_lie_algebra(&LieAlgebra::aff1(1.0));
        assert_eq!(r.max(), 0.0);
        assert_eq!(LieAlgebra::aff1(1.0).bracket(&unit(2, 0), &unit(2, 1)), unit(2, 1));
    }

    #[test]
    fn perturbed_aff1_antisymmetry_residual() {
        let mut l = LieAlgebra::aff1(1.0);
        l.set(1, 0, 1, -0.9);
        let r = check_lie_algebra(&l);
        assert!((r.antisymmetry.value - 0.1).abs() < 1e-15);
    }

    #[test]
    fn so3_jacobi_holds() {
        assert_eq!(check_lie_algebra(&LieAlgebra::so3()).max(), 0.0);
    }

    #[test]
    fn new_rejects_wrong_length() {
        assert!(LieAlgebra::new(2, vec![0.0; 7]).is_err());
    }

    #[test]
    fn ce_of_coboundary_squares_to_zero_for_representation() {
        // adjoint representation of so(3); θ = d(v) for a 0-cochain v
        let l = LieAlgebra::so3();
        let rep: Vec<Mat> = (0..3).map(|i| l.ad(&unit(3, i))).collect();
        let v = Cochain::from_fn(0, 3, 3, |_| vector(&[0.3, -1.0, 2.0]));
        let dv = ce_quasi_diff(&l, &rep, &v).unwrap();
        let ddv = ce_quasi_diff(&l, &rep, &dv).unwrap();
        assert!(ddv.max_abs() < 1e-12);
        assert!(dv.max_abs() > 0.1);
    }

    #[test]
    fn ce_one_cochain_matches_hand_expansion() {
        let l = LieAlgebra::aff1(1.0);
        let rep = vec![Mat::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 2.0]), Mat::from_row_slice(2, 2, &[0.0, -1.0, 3.0, 0.0])];
        let z = Cochain::from_fn(1, 2, 2, |i| if i[0] == 0 { vector(&[1.0, 2.0]) } else { vector(&[-1.0, 0.5]) });
        let dz = ce_quasi_diff(&l, &rep, &z).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let hand = &rep[a] * z.eval(&[b]) - &rep[b] * z.eval(&[a])
                    - (z.eval(&[0]) * l.get(a, b, 0) + z.eval(&[1]) * l.get(a, b, 1));
                assert!(max_abs_vec(&(dz.eval(&[a, b]) - hand)) < 1e-15);
            }
        }
    }

    #[test]
    fn ce_trivial_rep_on_abelian_kills_one_cochains() {
        let l = LieAlgebra::abelian(2);
        let rep = vec![Mat::zeros(1, 1); 2];
        let z = Cochain::from_fn(1, 2, 1, |i| vector(&[i[0] as f64 + 1.0]));
        assert_eq!(ce_quasi_diff(&l, &rep, &z).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn ce_rejects_bad_shapes() {
        let l = LieAlgebra::abelian(2);
        let z = Cochain::from_fn(1, 2, 1, |_| vector(&[1.0]));
        assert!(ce_quasi_diff(&l, &[Mat::zeros(1, 1)], &z).is_err());
    }

    fn identity_crossed_module(scale: f64) -> CrossedModule {
        let l = LieAlgebra::aff1(1.0);
        CrossedModule {
            base: l.clone(),
            top: l.clone(),
            structural: Mat::identity(2, 2),
            action: (0..2).map(|i| l.ad(&unit(2, i)) * scale).collect(),
        }
    }

    #[test]
    fn trivial_crossed_module_passes() {
        let cm = CrossedModule {
            base: LieAlgebra::aff1(1.0),
            top: LieAlgebra::abelian(2),
            structural: Mat::zeros(2, 2),
            action: vec![Mat::zeros(2, 2); 2],
        };
        assert_eq!(check_crossed_module(&cm).unwrap().max(), 0.0);
    }

    #[test]
    fn identity_crossed_module_passes() {
        assert_eq!(check_crossed_module(&identity_crossed_module(1.0)).unwrap().max(), 0.0);
    }

    #[test]
    fn doubled_action_breaks_peiffer() {
        let r = check_crossed_module(&identity_crossed_module(2.0)).unwrap();
        assert!(r.peiffer.value > 0.1);
    }

    #[test]
    fn untwisted_semidirect_with_representation_is_lie() {
        let base = LieAlgebra::so3();
        let rep: Vec<Mat> = (0..3).map(|i| base.ad(&unit(3, i))).collect();
        let l = semidirect_twisted(&base, &LieAlgebra::abelian(3), &rep, &vec![Vector::zeros(3); 9], 1e-12).unwrap();
        assert_eq!(l.dim(), 6);
        assert_eq!(check_lie_algebra(&l).max(), 0.0);
    }

    #[test]
    fn non_closed_cocycle_names_a_triple() {
        // so(3) acting on ℝ³ by ad; (e0,e1) ↦ e0 has d-value [e2,e0] = e1 ≠ 0
        let base = LieAlgebra::so3();
        let rep: Vec<Mat> = (0..3).map(|i| base.ad(&unit(3, i))).collect();
        let mut coc = vec![Vector::zeros(3); 9];
        coc[1] = unit(3, 0);
        coc[3] = -unit(3, 0);
        let err = semidirect_twisted(&base, &LieAlgebra::abelian(3), &rep, &coc, 1e-12).unwrap_err();
        assert!(matches!(err, Error::Jacobi { .. }));
    }

    #[test]
    fn empty_butterfly_is_exact() {
        let b = Butterfly {
            center: LieAlgebra::abelian(0),
            nw_incl: Mat::zeros(0, 0),
            ne_incl: Mat::zeros(0, 0),
            to_sw: Mat::zeros(0, 0),
            to_se: Mat::zeros(0, 0),
        };
        let r = check_butterfly(&b, 1e-9).unwrap();
        assert!(r.passed(1e-9));
    }

    #[test]
    fn restriction_to_ideal_has_no_leak() {
        let l = LieAlgebra::aff1(1.0);
        let ideal = SubspaceBasis::span(&Mat::from_column_slice(2, 1, &[0.0, 1.0]), 1e-12).unwrap();
        let (sub, leak) = l.restrict(&ideal);
        assert_eq!(leak, 0.0);
        assert!(sub.is_abelian(0.0));
    }
}
