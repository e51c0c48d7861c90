use nalgebra::SymmetricEigen;

use super::{Constraint, EstimationReport};
use crate::linalg::{self, full_right_svd, orthogonal_complement, rank_tolerance, SortedSvd};
use crate::stacking::StackedSystem;
use crate::{CMat, CVec, CalError, Result, C64};

/// Relative gap under which the two smallest singular values are treated as
/// one repeated value.
const TIE_TOLERANCE: f64 = 1e-10;

/// `argmin ‖Y f‖²` under a scale-fixing constraint.
///
/// Linear constraints (FCC included) are solved in the affine set
/// `{f : f^H g = c}` parametrised as `f = f_p + Q z` with `Q` an orthonormal
/// basis of `g^⊥`; this is the closed form `c A⁻¹g / (g^H A⁻¹ g)` whenever
/// `A = Y^H Y` is invertible, and stays well defined in the noiseless case
/// where `A` is singular. Norm constraints take the right singular vector of
/// the smallest singular value.
pub fn ls_estimate(sys: &StackedSystem, constraint: &Constraint) -> Result<EstimationReport> {
    let m = sys.m;
    constraint.check_len(m)?;
    let y = &sys.y_matrix;
    let identifiable = sys.rows() + 1 >= m;
    match constraint {
        Constraint::UnitNorm | Constraint::Npc { .. } => {
            let (sigma, v) = full_right_svd(y);
            let n = sigma.len();
            let f_unit: CVec = v.column(n - 1).into_owned();
            let tie = n >= 2 && (sigma[n - 2] - sigma[n - 1]) <= TIE_TOLERANCE * sigma[0].max(f64::MIN_POSITIVE);
            let f_hat = constraint.normalize(&f_unit)?;
            let cost = (y * &f_hat.f).norm_squared();
            Ok(EstimationReport {
                f_hat,
                iterations: 1,
                final_cost: cost,
                converged: identifiable && !tie,
                degenerate_min_eigenspace: tie,
                cost_history: Vec::new(),
            })
        }
        Constraint::Fcc | Constraint::Linear { .. } => {
            let (particular, basis) = affine_parametrisation(constraint, m);
            let b = y * &basis;
            let svd = SortedSvd::new(&b);
            let rank_b = svd.rank(b.nrows(), b.ncols());
            let full = rank_b == m - 1;
            if !full && identifiable && linalg::rank(y) >= m - 1 {
                return Err(CalError::DegenerateConstraint(
                    "the data determine a direction orthogonal to the constraint vector".into(),
                ));
            }
            let z = -(linalg::pinv(&b) * (y * &particular));
            let mut f = particular + basis * z;
            if matches!(constraint, Constraint::Fcc) {
                f[0] = C64::new(1.0, 0.0);
            }
            let cost = (y * &f).norm_squared();
            let f_hat = crate::model::CalibrationVector::new(f, constraint.tag());
            Ok(EstimationReport::direct(f_hat, cost, full && identifiable))
        }
    }
}

/// Particular solution and orthonormal null-space basis of a linear
/// constraint `f^H g = c`.
fn affine_parametrisation(constraint: &Constraint, m: usize) -> (CVec, CMat) {
    match constraint {
        Constraint::Fcc => {
            let mut e1 = CVec::zeros(m);
            e1[0] = C64::new(1.0, 0.0);
            let mut q = CMat::zeros(m, m - 1);
            for k in 0..m - 1 {
                q[(k + 1, k)] = C64::new(1.0, 0.0);
            }
            (e1, q)
        }
        Constraint::Linear { g, c } => {
            let fp = g * (c.conj() / g.norm_squared());
            (fp, orthogonal_complement(g))
        }
        _ => unreachable!("norm constraints are not affine"),
    }
}

/// `argmin f^H A f` under a constraint, working on the Hermitian normal
/// matrix `A` directly (eigendecomposition and linear solves instead of an
/// SVD of the data).
pub fn solve_gram(a: &CMat, constraint: &Constraint) -> Result<EstimationReport> {
    let m = a.nrows();
    constraint.check_len(m)?;
    let quad = |f: &CVec| (f.adjoint() * a * f)[(0, 0)].re;
    match constraint {
        Constraint::UnitNorm | Constraint::Npc { .. } => {
            let eig = SymmetricEigen::new(a.clone());
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
            let v: CVec = eig.eigenvectors.column(order[0]).into_owned();
            let top = eig.eigenvalues[order[m - 1]].abs().max(f64::MIN_POSITIVE);
            let tie = m >= 2 && eig.eigenvalues[order[1]] - eig.eigenvalues[order[0]] <= TIE_TOLERANCE * top;
            let f_hat = constraint.normalize(&v)?;
            let cost = quad(&f_hat.f);
            Ok(EstimationReport {
                f_hat,
                iterations: 1,
                final_cost: cost,
                converged: !tie,
                degenerate_min_eigenspace: tie,
                cost_history: Vec::new(),
            })
        }
        Constraint::Fcc | Constraint::Linear { .. } => {
            let (particular, basis) = affine_parametrisation(constraint, m);
            let reduced = basis.adjoint() * a * &basis;
            let rhs = -(basis.adjoint() * a * &particular);
            let (z, ok) = match reduced.clone().lu().solve(&rhs) {
                Some(z) if z.iter().all(|v| v.is_finite()) => {
                    let svd = SortedSvd::new(&reduced);
                    let tol = rank_tolerance(m - 1, m - 1, svd.sigma_max());
                    (z, svd.sigma.last().is_none_or(|&s| s > tol))
                }
                _ => (linalg::pinv(&reduced) * &rhs, false),
            };
            let mut f = particular + basis * z;
            if matches!(constraint, Constraint::Fcc) {
                f[0] = C64::new(1.0, 0.0);
            }
            let cost = quad(&f);
            Ok(EstimationReport::direct(crate::model::CalibrationVector::new(f, constraint.tag()), cost, ok))
        }
    }
}
