use super::composite::{f_pair, pair_layout, PairLayout};
use crate::airlink::PilotSet;
use crate::linalg::{column_space, diag, identity, kron, pinv};
use crate::model::AntennaPartition;
use crate::{CMat, CVec, CalError, Result};

/// Relative tolerance on the agreement of the two compressed-cost routes.
const ROUTE_TOLERANCE: f64 = 1e-8;

fn group_f(f: &CVec, partition: &AntennaPartition, g: usize) -> CVec {
    f.rows(partition.offset(g), partition.size(g)).into_owned()
}

/// `F⊥^H` block of one pair (`L_i L_j` rows), laid out so that
/// `F⊥^H y` reproduces the pair's rows of the stacked system `Y(P) f`.
fn f_perp_h_pair(f: &CVec, pilots: &PilotSet, partition: &AntennaPartition, p: &PairLayout) -> CMat {
    let (li, lj) = (partition.pilot_len(p.i), partition.pilot_len(p.j));
    let ai = pilots.get(p.i).transpose() * diag(group_f(f, partition, p.i).as_slice());
    let aj = pilots.get(p.j).transpose() * diag(group_f(f, partition, p.j).as_slice());
    // rows give vec(Zᵀ) with Z the pair's L_i x L_j residual
    let fwd = -kron(&identity(li), &aj);
    let bwd = kron(&ai, &identity(lj));
    let mut zt = CMat::zeros(li * lj, fwd.ncols() + bwd.ncols());
    zt.columns_mut(0, fwd.ncols()).copy_from(&fwd);
    zt.columns_mut(fwd.ncols(), bwd.ncols()).copy_from(&bwd);
    // reorder vec(Zᵀ) into vec(Z)
    CMat::from_fn(li * lj, zt.ncols(), |k, c| zt[((k % li) * lj + k / li, c)])
}

/// `F⊥`, block diagonal with one `(L_i M_j + M_i L_j) x L_i L_j` block per
/// pair. Its columns span the orthogonal complement of the columns of `𝓕`.
pub fn build_f_perp(f: &CVec, pilots: &PilotSet, partition: &AntennaPartition) -> Result<CMat> {
    pilots.validate(partition)?;
    check_f(f, partition)?;
    let layout = pair_layout(partition);
    let rows = layout.last().map_or(0, |p| p.backward.end);
    let cols: usize = partition.pairs().map(|(i, j)| partition.pilot_len(i) * partition.pilot_len(j)).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for p in &layout {
        let b = f_perp_h_pair(f, pilots, partition, p).adjoint();
        out.view_mut((p.forward.start, at), b.shape()).copy_from(&b);
        at += b.ncols();
    }
    Ok(out)
}

fn check_f(f: &CVec, partition: &AntennaPartition) -> Result<()> {
    if f.len() != partition.m() {
        return Err(CalError::invalid(format!("f has length {}, partition has {} antennas", f.len(), partition.m())));
    }
    Ok(())
}

/// Whether `F⊥` spans the whole orthogonal complement of `𝓕`. It does unless
/// some pair mixes a group with more pilots than antennas and one with
/// fewer: the pair's complement then exceeds its `L_i L_j` columns by
/// `(L_i − M_i)(M_j − L_j)`.
pub fn f_perp_is_complete(partition: &AntennaPartition) -> bool {
    let excess = |g: usize| partition.pilot_len(g) as i64 - partition.size(g) as i64;
    partition.pairs().all(|(i, j)| excess(i) * excess(j) >= 0)
}

/// `F⊥^H F⊥`, the weighting that turns the LS residual into the
/// compressed ML cost.
pub fn weighting_matrix(f: &CVec, pilots: &PilotSet, partition: &AntennaPartition) -> Result<CMat> {
    let fp = build_f_perp(f, pilots, partition)?;
    Ok(fp.adjoint() * fp)
}

/// `y^H P⊥_𝓕 y` evaluated through the projector and through the weighted
/// residual `(F⊥^H y)^H (F⊥^H F⊥)† (F⊥^H y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressedCost {
    pub projector: f64,
    pub weighted: f64,
}

/// Compressed ML cost of `f` (the channel concentrated out). Both routes
/// are computed and must agree, otherwise [`CalError::RouteMismatch`].
/// Needs a partition where [`f_perp_is_complete`] holds.
pub fn ml_compressed_cost(
    y: &CVec,
    f: &CVec,
    pilots: &PilotSet,
    partition: &AntennaPartition,
) -> Result<CompressedCost> {
    pilots.validate(partition)?;
    check_f(f, partition)?;
    if !f_perp_is_complete(partition) {
        return Err(CalError::invalid(
            "F⊥ does not span the complement of 𝓕 when groups with L > M and L < M are paired",
        ));
    }
    let layout = pair_layout(partition);
    let want = layout.last().map_or(0, |p| p.backward.end);
    if y.len() != want {
        return Err(CalError::invalid(format!("y has length {}, expected {want}", y.len())));
    }
    let (mut projector, mut weighted) = (0.0, 0.0);
    for p in &layout {
        let yb = y.rows(p.forward.start, p.rows().len()).into_owned();
        let fb = f_pair(&group_f(f, partition, p.i), &group_f(f, partition, p.j), pilots.get(p.i), pilots.get(p.j));
        let u = column_space(&fb);
        projector += (&yb - &u * (u.adjoint() * &yb)).norm_squared();

        let fph = f_perp_h_pair(f, pilots, partition, p);
        let z = &fph * &yb;
        let w = &fph * fph.adjoint();
        weighted += (z.adjoint() * pinv(&w) * &z)[(0, 0)].re;
    }
    let scale = projector.abs().max(weighted.abs()).max(f64::EPSILON * y.norm_squared());
    if (projector - weighted).abs() > ROUTE_TOLERANCE * scale {
        return Err(CalError::RouteMismatch(format!("projector {projector:e} vs weighted {weighted:e}")));
    }
    Ok(CompressedCost { projector, weighted })
}
