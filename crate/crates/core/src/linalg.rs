//! Dense complex linear-algebra helpers shared by the estimators and bounds.
//!
//! Everything that needs a pseudo-inverse, a numerical rank or a subspace
//! basis goes through the SVD here, with the usual rank threshold
//! `max(rows, cols) * eps * sigma_max`.

use nalgebra::DMatrix;

use crate::{CMat, CVec, C64};

/// Singular values below this are treated as zero.
pub fn rank_tolerance(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols).max(1) as f64 * f64::EPSILON * sigma_max
}

/// Column-wise Kronecker product: column `k` is `a[:,k] ⊗ b[:,k]`.
pub fn khatri_rao(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.ncols(), "khatri-rao needs equal column counts");
    let (ra, rb) = (a.nrows(), b.nrows());
    let mut out = CMat::zeros(ra * rb, a.ncols());
    for k in 0..a.ncols() {
        for i in 0..ra {
            let aik = a[(i, k)];
            for j in 0..rb {
                out[(i * rb + j, k)] = aik * b[(j, k)];
            }
        }
    }
    out
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Column-major vectorisation.
pub fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `diag(v)` as a dense matrix.
pub fn diag(v: &[C64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(v))
}

/// Thin SVD with singular triplets sorted by decreasing singular value.
pub struct SortedSvd {
    pub u: CMat,
    pub sigma: Vec<f64>,
    /// Right singular vectors as columns.
    pub v: CMat,
}

impl SortedSvd {
    pub fn new(m: &CMat) -> Self {
        if m.nrows() == 0 || m.ncols() == 0 {
            return SortedSvd { u: CMat::zeros(m.nrows(), 0), sigma: Vec::new(), v: CMat::zeros(m.ncols(), 0) };
        }
        // faer rather than nalgebra: the latter's complex SVD can lose
        // accuracy (relative reconstruction error ~1e-4) on rank-deficient
        // inputs, which breaks projector identities downstream.
        let a = faer::Mat::<faer::c64>::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)]);
        let svd = a.thin_svd().expect("SVD did not converge");
        let (fu, fs, fv) = (svd.U(), svd.S().column_vector(), svd.V());
        let mut order: Vec<usize> = (0..fs.nrows()).collect();
        order.sort_by(|&a, &b| fs[b].re.total_cmp(&fs[a].re));
        let sigma = order.iter().map(|&k| fs[k].re).collect();
        let u = DMatrix::from_fn(fu.nrows(), order.len(), |r, c| fu[(r, order[c])]);
        let v = DMatrix::from_fn(fv.nrows(), order.len(), |r, c| fv[(r, order[c])]);
        SortedSvd { u, sigma, v }
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self, rows: usize, cols: usize) -> usize {
        let tol = rank_tolerance(rows, cols, self.sigma_max());
        self.sigma.iter().filter(|&&s| s > tol).count()
    }
}

/// Numerical rank.
pub fn rank(m: &CMat) -> usize {
    SortedSvd::new(m).rank(m.nrows(), m.ncols())
}

/// Moore-Penrose pseudo-inverse.
pub fn pinv(m: &CMat) -> CMat {
    let svd = SortedSvd::new(m);
    let r = svd.rank(m.nrows(), m.ncols());
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for k in 0..r {
        let inv = 1.0 / svd.sigma[k];
        out += svd.v.column(k) * svd.u.column(k).adjoint() * C64::new(inv, 0.0);
    }
    out
}

/// Orthonormal basis of the column space.
pub fn column_space(m: &CMat) -> CMat {
    let svd = SortedSvd::new(m);
    let r = svd.rank(m.nrows(), m.ncols());
    svd.u.columns(0, r).into_owned()
}

/// Right singular vectors of `m` for all `ncols` directions, i.e. the full
/// `V` even when `m` has fewer rows than columns. Returns `(sigma, V)` with
/// `sigma` padded by zeros.
pub fn full_right_svd(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.ncols();
    let padded;
    let src = if m.nrows() < n {
        let mut p = CMat::zeros(n, n);
        p.rows_mut(0, m.nrows()).copy_from(m);
        padded = p;
        &padded
    } else {
        m
    };
    let svd = SortedSvd::new(src);
    (svd.sigma, svd.v)
}

/// Orthonormal basis of the right null space.
pub fn null_space(m: &CMat) -> CMat {
    let n = m.ncols();
    let (sigma, v) = full_right_svd(m);
    let tol = rank_tolerance(m.nrows(), n, sigma.first().copied().unwrap_or(0.0));
    let r = sigma.iter().filter(|&&s| s > tol).count();
    v.columns(r, n - r).into_owned()
}

/// Orthonormal basis of the orthogonal complement of `span{v}` in `C^n`.
pub fn orthogonal_complement(v: &CVec) -> CMat {
    let row = v.adjoint();
    null_space(&CMat::from_row_slice(1, v.len(), row.as_slice()))
}

/// Orthogonal projector onto the complement of the column space of `m`,
/// built from an orthonormal basis.
pub fn complement_projector(m: &CMat) -> CMat {
    let q = column_space(m);
    identity(m.nrows()) - &q * q.adjoint()
}

/// Minimum-norm least-squares solution of `a x = b`.
pub fn lstsq(a: &CMat, b: &CVec) -> CVec {
    pinv(a) * b
}

/// Frobenius norm.
pub fn fro(m: &CMat) -> f64 {
    m.norm()
}

/// `x^H y`.
pub fn inner(x: &CVec, y: &CVec) -> C64 {
    x.dotc(y)
}

/// Relative Frobenius distance `‖a − b‖ / ‖b‖` (absolute when `b` is zero).
pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    let d = (a - b).norm();
    let n = b.norm();
    if n > 0.0 {
        d / n
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> CMat {
        CMat::from_fn(rows, cols, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn khatri_rao_matches_vec_identity() {
        // vec(A diag(x) B) = (Bᵀ * A) x
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(3, 4, &mut rng);
        let b = random(4, 5, &mut rng);
        let x = CVec::from_fn(4, |i, _| C64::new(i as f64 + 1.0, -0.5));
        let lhs = vec_of(&(&a * diag(x.as_slice()) * &b));
        let rhs = khatri_rao(&b.transpose(), &a) * &x;
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn kron_matches_vec_identity() {
        // vec(A X B) = (Bᵀ ⊗ A) vec(X)
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random(2, 3, &mut rng);
        let x = random(3, 4, &mut rng);
        let b = random(4, 2, &mut rng);
        let lhs = vec_of(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vec_of(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn pinv_penrose_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // rank-2 5x4 matrix
        let a = random(5, 2, &mut rng) * random(2, 4, &mut rng);
        let p = pinv(&a);
        assert_eq!(rank(&a), 2);
        assert!(rel_diff(&(&a * &p * &a), &a) < 1e-12);
        assert!(rel_diff(&(&p * &a * &p), &p) < 1e-12);
        let ap = &a * &p;
        assert!(rel_diff(&ap.adjoint(), &ap) < 1e-12);
    }

    #[test]
    fn null_space_and_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random(2, 5, &mut rng);
        let n = null_space(&a);
        assert_eq!(n.ncols(), 3);
        assert!((&a * &n).norm() < 1e-12);
        assert!(rel_diff(&(n.adjoint() * &n), &identity(3)) < 1e-12);

        let v = CVec::from_fn(4, |i, _| C64::new(1.0, i as f64));
        let q = orthogonal_complement(&v);
        assert_eq!(q.shape(), (4, 3));
        assert!((q.adjoint() * &v).norm() < 1e-12);
    }

    #[test]
    fn projector_annihilates_column_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(6, 3, &mut rng);
        let p = complement_projector(&a);
        assert!((&p * &a).norm() < 1e-12);
        assert!(rel_diff(&(&p * &p), &p) < 1e-12);
    }
}
