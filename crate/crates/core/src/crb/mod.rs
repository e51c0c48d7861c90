//! Cramér-Rao bounds for the calibration vector under the bilinear model
//! `y = 𝓗(h,P) f + n = 𝓕(f,P) h + n`, and the orthogonal-complement matrix
//! `F⊥` that ties the compressed ML cost to the LS residual.

mod bound;
mod composite;
mod fperp;

pub use bound::{crb_f, crb_known_channel, crb_pinv_form, crb_with_basis, information_matrix, CrbKind, CrbResult};
pub use composite::{
    aux_channel, build_composites, fim, pair_layout, stack_observations, AuxSource, CrbContext, PairLayout,
};
pub use fperp::{build_f_perp, f_perp_is_complete, ml_compressed_cost, weighting_matrix, CompressedCost};

pub(crate) use composite::{f_pair, h_pair};
