//! Dense linear algebra and finite-difference kernels.

use alloc::format;
use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Fails with `InvalidInput` when any entry is NaN or infinite.
pub fn ensure_finite(m: &Mat, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

/// Largest absolute entry, 0 for empty matrices.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn max_abs_vec(v: &Vector) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Orthonormal basis of a subspace, stored as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub ambient_dim: usize,
    pub vectors: Mat,
    pub tol: f64,
}

impl SubspaceBasis {
    pub fn zero(ambient_dim: usize, tol: f64) -> Self {
        SubspaceBasis { ambient_dim, vectors: Mat::zeros(ambient_dim, 0), tol }
    }

    pub fn full(ambient_dim: usize, tol: f64) -> Self {
        SubspaceBasis { ambient_dim, vectors: Mat::identity(ambient_dim, ambient_dim), tol }
    }

    /// Canonical orthonormal basis of the column span of `m`.
    pub fn span(m: &Mat, tol: f64) -> Result<Self> {
        Ok(svd_subspaces(m, tol)?.image)
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vector(&self, i: usize) -> Vector {
        self.vectors.column(i).into_owned()
    }

    /// Coordinates of the orthogonal projection of `v`.
    pub fn coords(&self, v: &Vector) -> Vector {
        self.vectors.transpose() * v
    }

    pub fn projector(&self) -> Mat {
        &self.vectors * self.vectors.transpose()
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &Vector) -> f64 {
        (v - self.projector() * v).norm()
    }

    pub fn contains(&self, v: &Vector) -> bool {
        self.distance(v) <= self.tol * v.norm().max(1.0)
    }

    /// Orthogonal complement inside the ambient space.
    pub fn complement(&self) -> Result<Self> {
        let n = self.ambient_dim;
        let q = Mat::identity(n, n) - self.projector();
        SubspaceBasis::span(&q, self.tol)
    }

    /// Intersection with another subspace of the same ambient space.
    pub fn intersection(&self, other: &SubspaceBasis) -> Result<Self> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::InvalidInput("ambient dimensions differ".into()));
        }
        // v lies in both iff (I - P1) v = 0 and (I - P2) v = 0
        let n = self.ambient_dim;
        let id = Mat::identity(n, n);
        let mut stacked = Mat::zeros(2 * n, n);
        stacked.rows_mut(0, n).copy_from(&(&id - self.projector()));
        stacked.rows_mut(n, n).copy_from(&(&id - other.projector()));
        Ok(svd_subspaces(&stacked, self.tol)?.kernel)
    }
}

/// Kernel, image and cokernel representative of a linear map.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspaces {
    pub kernel: SubspaceBasis,
    pub image: SubspaceBasis,
    pub coimage_complement: SubspaceBasis,
    pub rank: usize,
}

/// Right singular vectors of `m` (full set) together with the singular values,
/// sorted in decreasing order. Pads with zero rows so the basis is complete.
fn full_right_singular(m: &Mat) -> (Vec<f64>, Mat) {
    let (r, c) = m.shape();
    if c == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let padded = if r < c {
        let mut p = Mat::zeros(c, c);
        p.rows_mut(0, r).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut v = Mat::zeros(c, order.len());
    for (j, &i) in order.iter().enumerate() {
        v.set_column(j, &vt.row(i).transpose());
    }
    (sv, v)
}

/// Deterministic orthonormal basis for the range of an orthogonal projector.
/// Columns are picked greedily by largest residual norm, so the result depends
/// only on the subspace and not on how it was computed.
fn canonical_basis(proj: &Mat, dim: usize, tol: f64) -> Mat {
    let n = proj.nrows();
    let mut residual = proj.clone();
    let mut out = Mat::zeros(n, dim);
    for k in 0..dim {
        let mut best = 0;
        let mut best_norm = -1.0;
        for j in 0..n {
            let nj = residual.column(j).norm();
            if nj > best_norm + 1e-12 {
                best = j;
                best_norm = nj;
            }
        }
        let mut v: Vector = residual.column(best).into_owned();
        v /= v.norm();
        fix_sign(&mut v);
        // deflate: residual <- (I - v v^T) residual
        let vt_r = v.transpose() * &residual;
        residual -= &v * vt_r;
        out.set_column(k, &v);
    }
    let _ = tol;
    out
}

/// Makes the largest-magnitude entry positive; ties go to the lowest index.
pub fn fix_sign(v: &mut Vector) {
    let mut idx = 0;
    let mut best = -1.0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best + 1e-12 {
            best = x.abs();
            idx = i;
        }
    }
    if !v.is_empty() && v[idx] < 0.0 {
        v.neg_mut();
    }
}

fn basis_from_columns(cols: &Mat, tol: f64) -> SubspaceBasis {
    let n = cols.nrows();
    let dim = cols.ncols();
    let proj = cols * cols.transpose();
    SubspaceBasis { ambient_dim: n, vectors: canonical_basis(&proj, dim, tol), tol }
}

/// Kernel, image and orthogonal complement of the image, with ranks decided by
/// singular values above `tol`.
pub fn svd_subspaces(m: &Mat, tol: f64) -> Result<Subspaces> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("rank tolerance must be positive".into()));
    }
    ensure_finite(m, "matrix")?;
    let (r, c) = m.shape();
    let (sv, v) = full_right_singular(m);
    let rank_r = sv.iter().filter(|&&s| s > tol).count();
    let (svt, u) = full_right_singular(&m.transpose());
    let rank_c = svt.iter().filter(|&&s| s > tol).count();
    let rank = rank_r.min(rank_c);
    let kernel = if c == 0 {
        SubspaceBasis::zero(0, tol)
    } else {
        basis_from_columns(&v.columns(rank, c - rank).into_owned(), tol)
    };
    let (image, coimage_complement) = if r == 0 {
        (SubspaceBasis::zero(0, tol), SubspaceBasis::zero(0, tol))
    } else {
        (
            basis_from_columns(&u.columns(0, rank).into_owned(), tol),
            basis_from_columns(&u.columns(rank, r - rank).into_owned(), tol),
        )
    };
    Ok(Subspaces { kernel, image, coimage_complement, rank })
}

/// Moore-Penrose pseudo-inverse with singular values below `tol` dropped.
pub fn pinv(m: &Mat, tol: f64) -> Mat {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Mat::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u");
    let vt = svd.v_t.expect("v_t");
    let mut out = Mat::zeros(c, r);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            out += vt.row(i).transpose() * u.column(i).transpose() / s;
        }
    }
    out
}

/// Matrix exponential by scaling and squaring around a degree-18 Taylor core.
pub fn mat_exp(x: &Mat) -> Result<Mat> {
    if !x.is_square() {
        return Err(Error::InvalidInput("exponential of a non-square matrix".into()));
    }
    ensure_finite(x, "exponent")?;
    let n = x.nrows();
    let norm1 = (0..n)
        .map(|j| x.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0i32;
    if norm1 > 0.5 {
        s = libm::ceil(libm::log2(norm1 / 0.5)) as i32;
    }
    let y = x / libm::pow(2.0, s as f64);
    let mut acc = Mat::identity(n, n);
    for k in (1..=18).rev() {
        acc = Mat::identity(n, n) + &y * acc / (k as f64);
    }
    for _ in 0..s {
        acc = &acc * &acc;
    }
    Ok(acc)
}

/// Finite-difference scheme used for every derivative in the engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    Central,
    /// Two central differences at h and h/2 combined to cancel the h² term.
    Richardson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fd {
    pub step: f64,
    pub scheme: Scheme,
}

impl Fd {
    pub fn central(step: f64) -> Self {
        Fd { step, scheme: Scheme::Central }
    }

    pub fn richardson(step: f64) -> Self {
        Fd { step, scheme: Scheme::Richardson }
    }

    pub fn diff<F>(&self, mut f: F) -> Result<Mat>
    where
        F: FnMut(f64) -> Result<Mat>,
    {
        match self.scheme {
            Scheme::Central => central_diff(&mut f, self.step),
            Scheme::Richardson => richardson_diff(&mut f, self.step),
        }
    }
}

impl Default for Fd {
    fn default() -> Self {
        Fd::central(1e-4)
    }
}

/// (f(h) - f(-h)) / 2h
pub fn central_diff<F>(mut f: F, h: f64) -> Result<Mat>
where
    F: FnMut(f64) -> Result<Mat>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    let plus = f(h)?;
    let minus = f(-h)?;
    if plus.shape() != minus.shape() {
        return Err(Error::InvalidInput("map changed shape along the curve".into()));
    }
    let d = (plus - minus) / (2.0 * h);
    ensure_finite(&d, "derivative").map_err(|_| Error::Domain("non-finite value along the curve".into()))?;
    Ok(d)
}

pub fn richardson_diff<F>(mut f: F, h: f64) -> Result<Mat>
where
    F: FnMut(f64) -> Result<Mat>,
{
    let coarse = central_diff(&mut f, h)?;
    let fine = central_diff(&mut f, h / 2.0)?;
    Ok((fine * 4.0 - coarse) / 3.0)
}

/// Column vector from a slice.
pub fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

/// Standard basis vector.
pub fn unit(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}

/// Column vector viewed as an n×1 matrix.
pub fn as_mat(v: &Vector) -> Mat {
    Mat::from_column_slice(v.len(), 1, v.as_slice())
}

/// First column of a matrix as a vector.
pub fn as_vec(m: &Mat) -> Vector {
    m.column(0).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_full_image() {
        let s = svd_subspaces(&Mat::identity(2, 2), 1e-10).unwrap();
        assert_eq!(s.kernel.dim(), 0);
        assert_eq!(s.image.dim(), 2);
        assert_eq!(s.coimage_complement.dim(), 0);
    }

    #[test]
    fn zero_matrix_has_full_kernel() {
        let s = svd_subspaces(&Mat::zeros(2, 2), 1e-10).unwrap();
        assert_eq!(s.kernel.dim(), 2);
        assert_eq!(s.image.dim(), 0);
        assert_eq!(s.kernel.vectors, Mat::identity(2, 2));
    }

    #[test]
    fn rank_one_projection_subspaces() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let s = svd_subspaces(&m, 1e-10).unwrap();
        assert_eq!(s.kernel.vectors, Mat::from_column_slice(2, 1, &[0.0, 1.0]));
        assert_eq!(s.image.vectors, Mat::from_column_slice(2, 1, &[1.0, 0.0]));
        assert_eq!(s.coimage_complement.vectors, Mat::from_column_slice(2, 1, &[0.0, 1.0]));
    }

    #[test]
    fn rectangular_kernel_is_complete() {
        // 1×3 map (1,1,0): kernel is 2-dimensional
        let m = Mat::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let s = svd_subspaces(&m, 1e-10).unwrap();
        assert_eq!(s.kernel.dim(), 2);
        assert!(max_abs(&(&m * &s.kernel.vectors)) < 1e-14);
        assert_eq!(s.image.dim(), 1);
    }

    #[test]
    fn signs_make_largest_entry_positive() {
        let m = Mat::from_row_slice(2, 1, &[-3.0, 1.0]);
        let s = svd_subspaces(&m, 1e-10).unwrap();
        let v = s.image.vector(0);
        assert!(v[0] > 0.0);
    }

    #[test]
    fn non_finite_input_rejected() {
        let m = Mat::from_row_slice(1, 1, &[f64::NAN]);
        assert!(matches!(svd_subspaces(&m, 1e-8), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(mat_exp(&Mat::zeros(3, 3)).unwrap(), Mat::identity(3, 3));
    }

    #[test]
    fn exp_scalar_matches_e() {
        let e = mat_exp(&Mat::from_element(1, 1, 1.0)).unwrap()[(0, 0)];
        assert!((e - core::f64::consts::E).abs() < 1e-15 * core::f64::consts::E * 4.0);
    }

    #[test]
    fn exp_nilpotent_truncates() {
        let n = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = mat_exp(&n).unwrap();
        assert_eq!(e, Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
    }

    #[test]
    fn exp_rotation_matches_trig() {
        let t = 4.0;
        let x = Mat::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = mat_exp(&x).unwrap();
        let want = Mat::from_row_slice(2, 2, &[libm::cos(t), -libm::sin(t), libm::sin(t), libm::cos(t)]);
        assert!(max_abs(&(e - want)) < 1e-13);
    }

    #[test]
    fn exp_rejects_non_square() {
        assert!(mat_exp(&Mat::zeros(2, 3)).is_err());
    }

    #[test]
    fn central_diff_linear_is_exact() {
        let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let d = central_diff(|t| Ok(&m * t), 0.3).unwrap();
        assert!(max_abs(&(d - &m)) < 1e-15);
    }

    #[test]
    fn central_diff_even_function_vanishes() {
        let d = central_diff(|t| Ok(Mat::from_element(1, 1, t * t)), 1e-4).unwrap();
        assert!(d[(0, 0)].abs() < 1e-8);
    }

    #[test]
    fn central_diff_exp_at_zero() {
        let d = central_diff(|t| Ok(Mat::from_element(1, 1, libm::exp(t))), 1e-4).unwrap();
        assert!((d[(0, 0)] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn richardson_beats_central() {
        let f = |t: f64| Ok(Mat::from_element(1, 1, libm::exp(t)));
        let c = (central_diff(f, 1e-2).unwrap()[(0, 0)] - 1.0).abs();
        let r = (richardson_diff(f, 1e-2).unwrap()[(0, 0)] - 1.0).abs();
        assert!(r < c / 100.0);
    }

    #[test]
    fn pinv_solves_consistent_systems() {
        let m = Mat::from_row_slice(2, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, 0.0]);
        let p = pinv(&m, 1e-10);
        assert!(max_abs(&(&m * &p * &m - &m)) < 1e-14);
    }

    #[test]
    fn intersection_and_complement() {
        let a = SubspaceBasis::span(&Mat::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]), 1e-10).unwrap();
        let b = SubspaceBasis::span(&Mat::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]), 1e-10).unwrap();
        let i = a.intersection(&b).unwrap();
        assert_eq!(i.dim(), 1);
        assert!((i.vector(0) - unit(3, 1)).norm() < 1e-14);
        assert_eq!(a.complement().unwrap().vectors, Mat::from_column_slice(3, 1, &[0.0, 0.0, 1.0]));
    }
}
