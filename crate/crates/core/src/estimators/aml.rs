//! Alternating maximum likelihood on the bilinear model
//! `y = 𝓗(h,P) f + n = 𝓕(f,P) h + n`.

use super::{ls_estimate, Constraint, EstimationReport};
use crate::airlink::{MeasurementSet, PilotSet};
use crate::crb::{f_pair, h_pair, pair_layout, stack_observations, PairLayout};
use crate::linalg::lstsq;
use crate::model::AntennaPartition;
use crate::stacking::build_stacked;
use crate::{CMat, CVec, CalError, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub enum AmlInit {
    /// All-ones calibration vector.
    Ones,
    /// Unit-norm LS solution of the stacked system.
    LsWarmStart,
    Given(CVec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmlOptions {
    /// Relative change of `f̂` between iterations that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    pub init: AmlInit,
}

/// Defaults start from the LS solution: from all-ones the alternation can
/// creep along a flat valley and meet the step tolerance far from the
/// optimum.
impl Default for AmlOptions {
    fn default() -> Self {
        AmlOptions { tol: 1e-6, max_iter: 100, init: AmlInit::LsWarmStart }
    }
}

/// Scale so that `f[0] = 1` when possible; the cost is scale invariant.
fn rescale(f: CVec) -> Result<CVec> {
    let n = f.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(CalError::invalid("AML iterate collapsed to zero"));
    }
    if f[0].norm() > 1e-12 * n {
        let f0 = f[0];
        Ok(f / f0)
    } else {
        Ok(f.unscale(n))
    }
}

struct Problem<'a> {
    y: CVec,
    pilots: &'a PilotSet,
    partition: &'a AntennaPartition,
    layout: Vec<PairLayout>,
}

impl Problem<'_> {
    fn group(&self, f: &CVec, g: usize) -> CVec {
        f.rows(self.partition.offset(g), self.partition.size(g)).into_owned()
    }

    /// `ĥ = 𝓕† y`, pair by pair. Each entry is `ℋ_{i→j}`.
    fn h_step(&self, f: &CVec) -> Vec<CMat> {
        self.layout
            .iter()
            .map(|p| {
                let fb = f_pair(&self.group(f, p.i), &self.group(f, p.j), self.pilots.get(p.i), self.pilots.get(p.j));
                let yb = self.y.rows(p.forward.start, p.rows().len()).into_owned();
                let h = lstsq(&fb, &yb);
                CMat::from_column_slice(self.partition.size(p.j), self.partition.size(p.i), h.as_slice())
            })
            .collect()
    }

    /// `f̂ = 𝓗† y`. `𝓗` couples each observation to a single group, so the
    /// solve splits per group. Returns the new `f` and its residual.
    fn f_step(&self, h: &[CMat]) -> (CVec, f64) {
        let part = self.partition;
        let mut rows: Vec<Vec<(CMat, CVec)>> = vec![Vec::new(); part.g()];
        for (p, hij) in self.layout.iter().zip(h) {
            let (top, bottom) = h_pair(hij, self.pilots.get(p.i), self.pilots.get(p.j));
            rows[p.i].push((top, self.y.rows(p.forward.start, p.forward.len()).into_owned()));
            rows[p.j].push((bottom, self.y.rows(p.backward.start, p.backward.len()).into_owned()));
        }
        let mut f = CVec::zeros(part.m());
        let mut cost = 0.0;
        for (g, blocks) in rows.into_iter().enumerate() {
            let n: usize = blocks.iter().map(|b| b.0.nrows()).sum();
            let mut a = CMat::zeros(n, part.size(g));
            let mut b = CVec::zeros(n);
            let mut at = 0;
            for (hb, yb) in blocks {
                a.rows_mut(at, hb.nrows()).copy_from(&hb);
                b.rows_mut(at, yb.len()).copy_from(&yb);
                at += hb.nrows();
            }
            let fg = lstsq(&a, &b);
            cost += (&b - &a * &fg).norm_squared();
            f.rows_mut(part.offset(g), part.size(g)).copy_from(&fg);
        }
        (f, cost)
    }
}

/// Alternate the two exact least-squares solves of `‖y − 𝓗 f‖²` until
/// `‖f̂ₖ − f̂ₖ₋₁‖ / ‖f̂ₖ₋₁‖ < tol`. Pseudo-inverses are used throughout, so
/// a singular `𝓕^H 𝓕` is not an error. Not converging within `max_iter`
/// is reported, not raised.
pub fn aml_estimate(
    ms: &MeasurementSet,
    pilots: &PilotSet,
    partition: &AntennaPartition,
    opts: &AmlOptions,
    constraint: &Constraint,
) -> Result<EstimationReport> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(CalError::invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    pilots.validate(partition)?;
    constraint.check_len(partition.m())?;
    let init = match &opts.init {
        AmlInit::Ones => CVec::from_element(partition.m(), C64::new(1.0, 0.0)),
        AmlInit::LsWarmStart => ls_estimate(&build_stacked(ms, pilots, partition)?, &Constraint::UnitNorm)?.f_hat.f,
        AmlInit::Given(f) => {
            if f.len() != partition.m() {
                return Err(CalError::invalid(format!("init has length {}, expected {}", f.len(), partition.m())));
            }
            f.clone()
        }
    };
    let problem = Problem { y: stack_observations(ms, partition)?, pilots, partition, layout: pair_layout(partition) };

    let mut f = rescale(init)?;
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let h = problem.h_step(&f);
        let (next, cost) = problem.f_step(&h);
        history.push(cost);
        let next = rescale(next)?;
        let delta = (&next - &f).norm() / f.norm();
        f = next;
        if delta < opts.tol {
            converged = true;
            break;
        }
    }
    let f_hat = constraint.normalize(&f)?;
    Ok(EstimationReport {
        f_hat,
        iterations,
        final_cost: history.last().copied().unwrap_or(0.0),
        converged,
        degenerate_min_eigenspace: false,
        cost_history: history,
    })
}

/// Residual `‖y − 𝓕(f) ĥ(f)‖²` after the channel solve, i.e. the compressed
/// cost evaluated directly; used to cross-check the alternation.
#[cfg(test)]
fn concentrated_cost(ms: &MeasurementSet, pilots: &PilotSet, partition: &AntennaPartition, f: &CVec) -> Result<f64> {
    let problem = Problem { y: stack_observations(ms, partition)?, pilots, partition, layout: pair_layout(partition) };
    let h = problem.h_step(f);
    let mut cost = 0.0;
    for (p, hij) in problem.layout.iter().zip(&h) {
        let fb = f_pair(&problem.group(f, p.i), &problem.group(f, p.j), pilots.get(p.i), pilots.get(p.j));
        let yb = problem.y.rows(p.forward.start, p.rows().len()).into_owned();
        cost += (yb - fb * crate::linalg::vec_of(hij)).norm_squared();
    }
    Ok(cost)
}
