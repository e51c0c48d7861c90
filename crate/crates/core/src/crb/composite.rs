//! Bilinear composites `y = 𝓗(h,P) f = 𝓕(f,P) h`.
//!
//! Observations are stacked pair by pair (`i < j`, lexicographic) as
//! `[vec(Y_{i→j}); vec(Y_{j→i}ᵀ)]`, and `h` stacks `vec(ℋ_{i→j})` in the
//! same pair order, with `ℋ_{i→j} = R_j C_{i→j} R_iᵀ`.

use std::ops::Range;

use crate::airlink::{MeasurementSet, PilotSet};
use crate::linalg::{diag, identity, khatri_rao, kron, vec_of};
use crate::model::{AntennaPartition, ChannelRealization, RfImpairments};
use crate::{CMat, CVec, CalError, Result};

/// Position of one pair inside `y` and `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairLayout {
    pub i: usize,
    pub j: usize,
    /// `vec(Y_{i→j})` rows, length `L_i M_j`.
    pub forward: Range<usize>,
    /// `vec(Y_{j→i}ᵀ)` rows, length `M_i L_j`.
    pub backward: Range<usize>,
    /// `vec(ℋ_{i→j})` entries, length `M_i M_j`.
    pub h: Range<usize>,
}

impl PairLayout {
    pub fn rows(&self) -> Range<usize> {
        self.forward.start..self.backward.end
    }
}

/// Layout of every pair; the last entry ends at the full `y` / `h` length.
pub fn pair_layout(partition: &AntennaPartition) -> Vec<PairLayout> {
    let (mut y, mut h) = (0, 0);
    partition
        .pairs()
        .map(|(i, j)| {
            let (mi, mj, li, lj) =
                (partition.size(i), partition.size(j), partition.pilot_len(i), partition.pilot_len(j));
            let forward = y..y + li * mj;
            let backward = forward.end..forward.end + mi * lj;
            y = backward.end;
            let hr = h..h + mi * mj;
            h = hr.end;
            PairLayout { i, j, forward, backward, h: hr }
        })
        .collect()
}

fn totals(layout: &[PairLayout]) -> (usize, usize) {
    layout.last().map_or((0, 0), |p| (p.backward.end, p.h.end))
}

/// Observation vector `y` from one coherent exchange.
pub fn stack_observations(ms: &MeasurementSet, partition: &AntennaPartition) -> Result<CVec> {
    let layout = pair_layout(partition);
    let mut y = CVec::zeros(totals(&layout).0);
    for p in &layout {
        let fwd = ms.require(p.i, p.j)?;
        let bwd = ms.require(p.j, p.i)?;
        let want = (partition.size(p.j), partition.pilot_len(p.i));
        if fwd.shape() != want || bwd.shape() != (partition.size(p.i), partition.pilot_len(p.j)) {
            return Err(CalError::invalid(format!("pair ({},{}) has mis-shaped blocks", p.i, p.j)));
        }
        y.rows_mut(p.forward.start, p.forward.len()).copy_from(&vec_of(fwd));
        y.rows_mut(p.backward.start, p.backward.len()).copy_from(&vec_of(&bwd.transpose()));
    }
    Ok(y)
}

/// Stacked auxiliary channel `h` from front-ends and the propagation matrix.
pub fn aux_channel(imp: &RfImpairments, chan: &ChannelRealization, partition: &AntennaPartition) -> Result<CVec> {
    let m = partition.m();
    if imp.m() != m || chan.m() != m {
        return Err(CalError::invalid(format!(
            "impairments/channel sized {}/{}, partition has {m}",
            imp.m(),
            chan.m()
        )));
    }
    let layout = pair_layout(partition);
    let mut h = CVec::zeros(totals(&layout).1);
    for p in &layout {
        let (ri, rj) = (partition.range(p.i), partition.range(p.j));
        let c = chan.block(ri.clone(), rj.clone());
        let aux = diag(&imp.rx_gains[rj]) * c * diag(&imp.rx_gains[ri]);
        h.rows_mut(p.h.start, p.h.len()).copy_from(&vec_of(&aux));
    }
    Ok(h)
}

/// `ℋ_{i→j}` (`M_j x M_i`) of one pair.
pub(crate) fn aux_block(h: &CVec, p: &PairLayout, partition: &AntennaPartition) -> CMat {
    CMat::from_column_slice(partition.size(p.j), partition.size(p.i), h.rows(p.h.start, p.h.len()).as_slice())
}

/// Rows of `𝓗` for one pair, restricted to the columns of groups `i` and
/// `j`: `(P_iᵀ * ℋ_{i→j}, ℋ_{i→j}ᵀ * P_jᵀ)`.
pub(crate) fn h_pair(hij: &CMat, pi: &CMat, pj: &CMat) -> (CMat, CMat) {
    (khatri_rao(&pi.transpose(), hij), khatri_rao(&hij.transpose(), &pj.transpose()))
}

/// Rows of `𝓕` for one pair: `[P_iᵀF_i ⊗ I_{M_j}; I_{M_i} ⊗ P_jᵀF_j]`.
pub(crate) fn f_pair(fi: &CVec, fj: &CVec, pi: &CMat, pj: &CMat) -> CMat {
    let ai = pi.transpose() * diag(fi.as_slice());
    let aj = pj.transpose() * diag(fj.as_slice());
    let top = kron(&ai, &identity(fj.len()));
    let bottom = kron(&identity(fi.len()), &aj);
    let mut out = CMat::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.rows_mut(0, top.nrows()).copy_from(&top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(&bottom);
    out
}

/// Where the auxiliary channel comes from.
#[derive(Debug, Clone, Copy)]
pub enum AuxSource<'a> {
    Given(&'a CVec),
    Physical { imp: &'a RfImpairments, chan: &'a ChannelRealization },
}

/// Everything the bounds need for one configuration. The dense composites
/// are assembled on demand; the bounds themselves work pair by pair.
#[derive(Debug, Clone)]
pub struct CrbContext {
    pub partition: AntennaPartition,
    pub pilots: PilotSet,
    pub f: CVec,
    pub h: CVec,
    pub noise_variance: f64,
    pub layout: Vec<PairLayout>,
}

pub fn build_composites(
    f: &CVec,
    aux: AuxSource<'_>,
    pilots: &PilotSet,
    partition: &AntennaPartition,
    noise_variance: f64,
) -> Result<CrbContext> {
    pilots.validate(partition)?;
    if f.len() != partition.m() {
        return Err(CalError::invalid(format!("f has length {}, partition has {} antennas", f.len(), partition.m())));
    }
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(CalError::invalid(format!("noise variance must be finite and non-negative, got {noise_variance}")));
    }
    let layout = pair_layout(partition);
    let h = match aux {
        AuxSource::Given(h) => {
            let want = totals(&layout).1;
            if h.len() != want {
                return Err(CalError::invalid(format!("h has length {}, expected {want}", h.len())));
            }
            h.clone()
        }
        AuxSource::Physical { imp, chan } => aux_channel(imp, chan, partition)?,
    };
    Ok(CrbContext { partition: partition.clone(), pilots: pilots.clone(), f: f.clone(), h, noise_variance, layout })
}

impl CrbContext {
    pub fn y_len(&self) -> usize {
        totals(&self.layout).0
    }

    pub fn h_len(&self) -> usize {
        totals(&self.layout).1
    }

    fn f_of(&self, g: usize) -> CVec {
        self.f.rows(self.partition.offset(g), self.partition.size(g)).into_owned()
    }

    /// Rows of `𝓗` belonging to one pair, over all `M` columns.
    pub(crate) fn h_rows(&self, p: &PairLayout) -> CMat {
        let hij = aux_block(&self.h, p, &self.partition);
        let (top, bottom) = h_pair(&hij, self.pilots.get(p.i), self.pilots.get(p.j));
        let mut out = CMat::zeros(p.rows().len(), self.partition.m());
        out.view_mut((0, self.partition.offset(p.i)), top.shape()).copy_from(&top);
        out.view_mut((p.forward.len(), self.partition.offset(p.j)), bottom.shape()).copy_from(&bottom);
        out
    }

    /// Diagonal block of `𝓕` belonging to one pair.
    pub(crate) fn f_block(&self, p: &PairLayout) -> CMat {
        f_pair(&self.f_of(p.i), &self.f_of(p.j), self.pilots.get(p.i), self.pilots.get(p.j))
    }

    /// Dense `𝓗(h,P)`.
    pub fn composite_h(&self) -> CMat {
        let mut out = CMat::zeros(self.y_len(), self.partition.m());
        for p in &self.layout {
            out.rows_mut(p.forward.start, p.rows().len()).copy_from(&self.h_rows(p));
        }
        out
    }

    /// Dense (block-diagonal) `𝓕(f,P)`.
    pub fn composite_f(&self) -> CMat {
        let mut out = CMat::zeros(self.y_len(), self.h_len());
        for p in &self.layout {
            let b = self.f_block(p);
            out.view_mut((p.forward.start, p.h.start), b.shape()).copy_from(&b);
        }
        out
    }

    /// Noiseless observation `𝓗 f`.
    pub fn signal(&self) -> CVec {
        self.composite_h() * &self.f
    }
}

/// Joint Fisher information over `(f, h)`:
/// `J = (1/σ²) [𝓗 𝓕]^H [𝓗 𝓕]`.
pub fn fim(ctx: &CrbContext) -> Result<CMat> {
    if ctx.noise_variance <= 0.0 {
        return Err(CalError::invalid("the FIM needs a positive noise variance"));
    }
    let (hm, fm) = (ctx.composite_h(), ctx.composite_f());
    let m = hm.ncols();
    let mut both = CMat::zeros(hm.nrows(), m + fm.ncols());
    both.columns_mut(0, m).copy_from(&hm);
    both.columns_mut(m, fm.ncols()).copy_from(&fm);
    Ok(both.adjoint() * both / crate::C64::new(ctx.noise_variance, 0.0))
}
