use super::CrbContext;
use crate::linalg::{column_space, orthogonal_complement, pinv, SortedSvd};
use crate::{CMat, CalError, Result, C64};

/// Which scale-fixing constraint the bound assumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrbKind {
    /// `f[0] = 1`: the constraint subspace drops the first coordinate.
    Fcc,
    /// Norm plus phase (or any constraint whose gradient spans `f`): the
    /// subspace is the orthogonal complement of `f`.
    Npc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrbResult {
    pub crb_matrix: CMat,
    pub trace: f64,
    pub kind: CrbKind,
}

impl CrbResult {
    fn new(crb_matrix: CMat, kind: CrbKind) -> Self {
        let trace = crb_matrix.diagonal().iter().map(|v| v.re).sum();
        CrbResult { crb_matrix, trace, kind }
    }

    /// The bound at a different noise variance (it is linear in `σ²`).
    pub fn scaled(&self, factor: f64) -> CrbResult {
        CrbResult::new(&self.crb_matrix * C64::new(factor, 0.0), self.kind)
    }
}

/// `𝓗^H P⊥_𝓕 𝓗`, accumulated pair by pair since `𝓕` is block diagonal.
/// Without the projection this is `𝓗^H 𝓗` (channel treated as known).
fn accumulate(ctx: &CrbContext, project: bool) -> CMat {
    let m = ctx.partition.m();
    let mut q = CMat::zeros(m, m);
    for p in &ctx.layout {
        let hb = ctx.h_rows(p);
        q += hb.adjoint() * &hb;
        if project {
            let u = column_space(&ctx.f_block(p));
            let uh = u.adjoint() * &hb;
            q -= uh.adjoint() * uh;
        }
    }
    // symmetrise away rounding
    (&q + q.adjoint()) * C64::new(0.5, 0.0)
}

/// `𝓗^H P⊥_𝓕 𝓗`, the information left about `f` once `h` is estimated.
pub fn information_matrix(ctx: &CrbContext) -> CMat {
    accumulate(ctx, true)
}

fn basis_for(ctx: &CrbContext, kind: CrbKind) -> CMat {
    let m = ctx.partition.m();
    match kind {
        CrbKind::Fcc => identity_without_first(m),
        CrbKind::Npc => orthogonal_complement(&ctx.f),
    }
}

fn identity_without_first(m: usize) -> CMat {
    CMat::from_fn(m, m - 1, |r, c| if r == c + 1 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

fn sandwich(ctx: &CrbContext, q: &CMat, v: &CMat, kind: CrbKind) -> Result<CrbResult> {
    let inner = v.adjoint() * q * v;
    let n = inner.nrows();
    let svd = SortedSvd::new(&inner);
    if svd.rank(n, n) < n {
        let part = &ctx.partition;
        let rows = part.pairs().map(|(i, j)| part.pilot_len(i) * part.pilot_len(j)).sum();
        return Err(CalError::Unidentifiable { rows, needed: ctx.partition.m() - 1 });
    }
    let inv = inner.clone().try_inverse().unwrap_or_else(|| pinv(&inner));
    let crb = v * inv * v.adjoint() * C64::new(ctx.noise_variance, 0.0);
    Ok(CrbResult::new((&crb + crb.adjoint()) * C64::new(0.5, 0.0), kind))
}

/// `σ² V (V^H 𝓗^H P⊥_𝓕 𝓗 V)⁻¹ V^H` for an arbitrary basis `V` of the
/// constraint subspace.
pub fn crb_with_basis(ctx: &CrbContext, v: &CMat, kind: CrbKind) -> Result<CrbResult> {
    sandwich(ctx, &information_matrix(ctx), v, kind)
}

/// Constrained CRB on `f`.
///
/// The NPC bound is the pseudo-inverse of the information matrix, whose
/// null space is `span{f}`; it is evaluated through an orthonormal basis
/// of `f^⊥` rather than a thresholded pseudo-inverse (same matrix, see
/// [`crb_pinv_form`]).
pub fn crb_f(ctx: &CrbContext, kind: CrbKind) -> Result<CrbResult> {
    crb_with_basis(ctx, &basis_for(ctx, kind), kind)
}

/// `σ² (𝓗^H P⊥_𝓕 𝓗)†` evaluated literally.
pub fn crb_pinv_form(ctx: &CrbContext) -> CrbResult {
    let q = information_matrix(ctx);
    CrbResult::new(pinv(&q) * C64::new(ctx.noise_variance, 0.0), CrbKind::Npc)
}

/// Bound obtained when the internal channel is treated as known: the
/// projection onto the complement of `𝓕` is dropped. It is lower than
/// [`crb_f`] and underestimates the achievable error.
pub fn crb_known_channel(ctx: &CrbContext, kind: CrbKind) -> Result<CrbResult> {
    sandwich(ctx, &accumulate(ctx, false), &basis_for(ctx, kind), kind)
}
