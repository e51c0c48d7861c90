//! Calibration estimators.
//!
//! All of them return coefficients in the global (group-contiguous) antenna
//! order. The scale ambiguity is resolved by a [`Constraint`]; estimators
//! that fix the first coefficient natively (Argos, daisy chain, Avalanche)
//! can be rescaled afterwards with [`Constraint::normalize`].

mod aml;
mod avalanche;
mod ls;
mod ratio;
mod rogalin;

pub use aml::{aml_estimate, AmlInit, AmlOptions};
pub use avalanche::avalanche_estimate;
pub use ls::{ls_estimate, solve_gram};
pub use ratio::{antenna_link, argos_estimate, daisy_chain_estimate};
pub use rogalin::{rogalin_estimate, rogalin_gram};

use crate::model::{CalibrationVector, ConstraintTag};
use crate::{CVec, CalError, Result, C64};

/// How the complex scale of `f̂` is fixed.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    /// First coefficient constraint, `f̂[0] = 1`.
    Fcc,
    /// `‖f̂‖ = 1`.
    UnitNorm,
    /// `‖f̂‖² = norm_sq` and `Im{f̂^H reference} = 0`.
    Npc { reference: CVec, norm_sq: f64 },
    /// `f̂^H g = c`.
    Linear { g: CVec, c: C64 },
}

impl Constraint {
    /// Norm-plus-phase constraint against a reference, with `c = ‖reference‖²`.
    pub fn npc(reference: &CVec) -> Self {
        Constraint::Npc { reference: reference.clone(), norm_sq: reference.norm_squared() }
    }

    pub fn tag(&self) -> ConstraintTag {
        match self {
            Constraint::Fcc => ConstraintTag::Fcc,
            Constraint::UnitNorm => ConstraintTag::UnitNorm,
            Constraint::Npc { .. } => ConstraintTag::Npc,
            Constraint::Linear { .. } => ConstraintTag::None,
        }
    }

    pub(crate) fn check_len(&self, m: usize) -> Result<()> {
        let n = match self {
            Constraint::Npc { reference, .. } => reference.len(),
            Constraint::Linear { g, .. } => g.len(),
            _ => return Ok(()),
        };
        if n != m {
            return Err(CalError::invalid(format!("constraint vector has length {n}, expected {m}")));
        }
        Ok(())
    }

    /// Rescale a nonzero vector (by a complex scalar only) so it satisfies
    /// the constraint.
    pub fn normalize(&self, f: &CVec) -> Result<CalibrationVector> {
        self.check_len(f.len())?;
        let degenerate = |what: &str| CalError::DegenerateConstraint(format!("cannot normalise: {what}"));
        let out = match self {
            Constraint::Fcc => {
                if f[0].norm() == 0.0 {
                    return Err(degenerate("first coefficient is zero"));
                }
                let mut v = f / f[0];
                v[0] = C64::new(1.0, 0.0);
                v
            }
            Constraint::UnitNorm => {
                let n = f.norm();
                if n == 0.0 {
                    return Err(degenerate("zero vector"));
                }
                f.unscale(n)
            }
            Constraint::Npc { reference, norm_sq } => {
                let n = f.norm();
                if n == 0.0 {
                    return Err(degenerate("zero vector"));
                }
                let unit = f.unscale(n);
                let phase = unit.dotc(reference).arg();
                unit * C64::from_polar(norm_sq.sqrt(), phase)
            }
            Constraint::Linear { g, c } => {
                let fg = f.dotc(g);
                if fg.norm() == 0.0 {
                    return Err(degenerate("f is orthogonal to g"));
                }
                f * (c / fg).conj()
            }
        };
        Ok(CalibrationVector::new(out, self.tag()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    pub f_hat: CalibrationVector,
    pub iterations: usize,
    /// Value of the estimator's own criterion at `f_hat`.
    pub final_cost: f64,
    pub converged: bool,
    /// The minimum eigenvalue of the normal matrix was not simple, so the
    /// returned direction is one arbitrary choice in that eigenspace.
    pub degenerate_min_eigenspace: bool,
    /// Per-iteration criterion for iterative estimators.
    pub cost_history: Vec<f64>,
}

impl EstimationReport {
    pub(crate) fn direct(f_hat: CalibrationVector, final_cost: f64, converged: bool) -> Self {
        EstimationReport {
            f_hat,
            iterations: 1,
            final_cost,
            converged,
            degenerate_min_eigenspace: false,
            cost_history: Vec::new(),
        }
    }
}

/// Squared error `‖f̂ − f‖²`. Averaging over trials gives the MSE.
pub fn mse(f_hat: &CVec, f_true: &CVec) -> Result<f64> {
    if f_hat.len() != f_true.len() {
        return Err(CalError::invalid(format!("length mismatch: {} vs {}", f_hat.len(), f_true.len())));
    }
    Ok((f_hat - f_true).norm_squared())
}
