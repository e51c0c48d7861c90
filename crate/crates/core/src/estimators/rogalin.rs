//! Rogalin's normal-equation form for single-antenna groups.

use super::{solve_gram, Constraint, EstimationReport};
use crate::airlink::{MeasurementSet, PilotSet};
use crate::model::AntennaPartition;
use crate::{CMat, CalError, Result, C64};

/// The `M x M` matrix with `A[i,i] = Σ_{k≠i} |y_{k→i}|²` and
/// `A[i,j] = −y*_{j→i} y_{i→j}`, built from pilot-normalised scalar links.
pub fn rogalin_gram(ms: &MeasurementSet, pilots: &PilotSet, partition: &AntennaPartition) -> Result<CMat> {
    if partition.group_sizes().iter().any(|&s| s != 1) || partition.pilot_lengths().iter().any(|&l| l != 1) {
        return Err(CalError::invalid("Rogalin needs single-antenna groups with one pilot each"));
    }
    let m = partition.m();
    let weight = |g: usize| {
        let w = pilots.get(g)[(0, 0)];
        if w.norm() == 0.0 {
            Err(CalError::DivisionDomain(format!("zero pilot for antenna {g}")))
        } else {
            Ok(w)
        }
    };
    // y[(i, j)] = y_{i→j} divided by the transmitted pilot
    let mut y = CMat::zeros(m, m);
    for (i, j) in partition.pairs() {
        y[(i, j)] = ms.require(i, j)?[(0, 0)] / weight(i)?;
        y[(j, i)] = ms.require(j, i)?[(0, 0)] / weight(j)?;
    }
    let mut a = CMat::zeros(m, m);
    for i in 0..m {
        for k in 0..m {
            if k != i {
                a[(i, i)] += C64::new(y[(k, i)].norm_sqr(), 0.0);
                a[(i, k)] = -y[(k, i)].conj() * y[(i, k)];
            }
        }
    }
    Ok(a)
}

pub fn rogalin_estimate(
    ms: &MeasurementSet,
    pilots: &PilotSet,
    partition: &AntennaPartition,
    constraint: &Constraint,
) -> Result<EstimationReport> {
    solve_gram(&rogalin_gram(ms, pilots, partition)?, constraint)
}
