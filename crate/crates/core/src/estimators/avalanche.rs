//! Avalanche: groups are calibrated one after another from the groups that
//! are already calibrated.

use crate::airlink::{MeasurementSet, PilotSet};
use crate::linalg::{lstsq, SortedSvd};
use crate::model::{AntennaPartition, CalibrationVector, ConstraintTag};
use crate::{CMat, CVec, CalError, Result, C64};

/// Recursive back substitution under `f̂[0] = 1`.
///
/// Group `k` (0-based) is solved from its `k` equations against groups
/// `0..k`, so it may hold at most `k` antennas. Every group sends one pilot.
pub fn avalanche_estimate(
    ms: &MeasurementSet,
    pilots: &PilotSet,
    partition: &AntennaPartition,
) -> Result<CalibrationVector> {
    pilots.validate(partition)?;
    if partition.pilot_lengths().iter().any(|&l| l != 1) {
        return Err(CalError::invalid("Avalanche needs one pilot per group"));
    }
    if partition.size(0) != 1 {
        return Err(CalError::invalid("the seed group must be a single antenna"));
    }
    if let Some(k) = (1..partition.g()).find(|&k| partition.size(k) > k) {
        return Err(CalError::invalid(format!(
            "group {k} has {} antennas but only {k} calibrated groups precede it",
            partition.size(k)
        )));
    }
    let mut f = CVec::zeros(partition.m());
    f[0] = C64::new(1.0, 0.0);
    for k in 1..partition.g() {
        let mk = partition.size(k);
        let pk = pilots.get(k);
        let mut yk = CMat::zeros(k, mk);
        let mut ak = CVec::zeros(k);
        for j in 0..k {
            let y_jk = ms.require(j, k)?;
            let y_kj = ms.require(k, j)?;
            for l in 0..mk {
                yk[(j, l)] = pk[(l, 0)] * y_jk[(l, 0)];
            }
            let pj = pilots.get(j);
            let fj = f.rows(partition.offset(j), partition.size(j));
            ak[j] = (0..partition.size(j)).map(|l| y_kj[(l, 0)] * pj[(l, 0)] * fj[l]).sum();
        }
        if SortedSvd::new(&yk).rank(k, mk) < mk {
            return Err(CalError::RankDeficient { group: k });
        }
        let fk = lstsq(&yk, &ak);
        f.rows_mut(partition.offset(k), mk).copy_from(&fk);
    }
    Ok(CalibrationVector::new(f, ConstraintTag::Fcc))
}
