//! The stacked homogeneous system `Y(P) f = ñ`.
//!
//! Eliminating the reciprocal propagation block between groups `i < j`
//! leaves `L_i L_j` linear equations in the calibration coefficients:
//!
//! ```text
//! (Y_{j→i}ᵀ * P_iᵀ) f_i − (P_jᵀ * Y_{i→j}ᵀ) f_j = ñ_ij
//! ```
//!
//! where `*` is the Khatri-Rao product. Row blocks are stacked in
//! lexicographic `(slot, i, j)` order; the columns follow the global antenna
//! order so group `i` occupies the columns of its antenna range.

use std::fmt;
use std::ops::Range;

use crate::airlink::{MeasurementSet, NoncoherentSchedule, PilotSet};
use crate::linalg::khatri_rao;
use crate::model::AntennaPartition;
use crate::{CMat, CalError, Result};

/// Where a pair's equations sit in the stacked matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowBlock {
    pub slot: usize,
    pub i: usize,
    pub j: usize,
    pub rows: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackedSystem {
    pub y_matrix: CMat,
    pub pair_index: Vec<RowBlock>,
    pub m: usize,
}

impl StackedSystem {
    pub fn rows(&self) -> usize {
        self.y_matrix.nrows()
    }

    /// `Y^H Y`.
    pub fn gram(&self) -> CMat {
        self.y_matrix.adjoint() * &self.y_matrix
    }
}

/// Equations of one pair, as a `L_i L_j x M` block.
fn pair_rows(ms: &MeasurementSet, pilots: &PilotSet, partition: &AntennaPartition, i: usize, j: usize) -> Result<CMat> {
    let y_ij = ms.require(i, j)?;
    let y_ji = ms.require(j, i)?;
    let (mi, mj) = (partition.size(i), partition.size(j));
    let (li, lj) = (partition.pilot_len(i), partition.pilot_len(j));
    if y_ij.shape() != (mj, li) || y_ji.shape() != (mi, lj) {
        return Err(CalError::invalid(format!(
            "pair ({i},{j}): blocks are {:?} and {:?}, expected {:?} and {:?}",
            y_ij.shape(),
            y_ji.shape(),
            (mj, li),
            (mi, lj)
        )));
    }
    let left = khatri_rao(&y_ji.transpose(), &pilots.get(i).transpose());
    let right = khatri_rao(&pilots.get(j).transpose(), &y_ij.transpose());
    let mut block = CMat::zeros(li * lj, partition.m());
    block.columns_mut(partition.offset(i), mi).copy_from(&left);
    block.columns_mut(partition.offset(j), mj).copy_from(&(-right));
    Ok(block)
}

fn assemble(blocks: Vec<(usize, usize, usize, CMat)>, m: usize) -> StackedSystem {
    let rows: usize = blocks.iter().map(|b| b.3.nrows()).sum();
    let mut y_matrix = CMat::zeros(rows, m);
    let mut pair_index = Vec::with_capacity(blocks.len());
    let mut at = 0;
    for (slot, i, j, b) in blocks {
        let n = b.nrows();
        y_matrix.rows_mut(at, n).copy_from(&b);
        pair_index.push(RowBlock { slot, i, j, rows: at..at + n });
        at += n;
    }
    StackedSystem { y_matrix, pair_index, m }
}

/// Stack every pair `i < j` of a coherent exchange.
pub fn build_stacked(ms: &MeasurementSet, pilots: &PilotSet, partition: &AntennaPartition) -> Result<StackedSystem> {
    pilots.validate(partition)?;
    let mut blocks = Vec::new();
    for (i, j) in partition.pairs() {
        blocks.push((ms.slot, i, j, pair_rows(ms, pilots, partition, i, j)?));
    }
    Ok(assemble(blocks, partition.m()))
}

/// Concatenate the per-slot systems of a non-coherent run, keeping in each
/// slot only the pairs among its active groups. `pilots` holds one set
/// shared by all slots or one set per slot.
pub fn build_stacked_noncoherent(
    slots: &[MeasurementSet],
    pilots: &[PilotSet],
    partition: &AntennaPartition,
    schedule: &NoncoherentSchedule,
) -> Result<StackedSystem> {
    if slots.is_empty() {
        return Err(CalError::invalid("no slots to stack"));
    }
    if slots.len() != schedule.len() {
        return Err(CalError::invalid(format!(
            "{} measurement slots for a {}-slot schedule",
            slots.len(),
            schedule.len()
        )));
    }
    if pilots.len() != 1 && pilots.len() != slots.len() {
        return Err(CalError::invalid(format!("{} pilot sets for {} slots", pilots.len(), slots.len())));
    }
    let mut blocks = Vec::new();
    for (t, (ms, groups)) in slots.iter().zip(schedule.slots()).enumerate() {
        let p = if pilots.len() == 1 { &pilots[0] } else { &pilots[t] };
        p.validate(partition)?;
        for (a, &i) in groups.iter().enumerate() {
            for &j in &groups[a + 1..] {
                blocks.push((t, i, j, pair_rows(ms, p, partition, i, j)?));
            }
        }
    }
    Ok(assemble(blocks, partition.m()))
}

/// Equation count against the `M − 1` unknowns left after fixing the scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identifiability {
    pub rows: usize,
    pub needed: usize,
    pub ok: bool,
}

impl fmt::Display for Identifiability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rows={} needed={} {}", self.rows, self.needed, if self.ok { "ok" } else { "insufficient" })
    }
}

/// `Σ_{i<j} L_i L_j ≥ M − 1`, summed over slots when a schedule is given.
pub fn check_identifiability(partition: &AntennaPartition, schedule: Option<&NoncoherentSchedule>) -> Identifiability {
    let l = partition.pilot_lengths();
    let pair_sum = |groups: &[usize]| -> usize {
        groups.iter().enumerate().flat_map(|(a, &i)| groups[a + 1..].iter().map(move |&j| l[i] * l[j])).sum()
    };
    let rows = match schedule {
        Some(s) => s.slots().iter().map(|g| pair_sum(g)).sum(),
        None => pair_sum(&(0..partition.g()).collect::<Vec<_>>()),
    };
    let needed = partition.m().saturating_sub(1);
    Identifiability { rows, needed, ok: rows >= needed }
}
