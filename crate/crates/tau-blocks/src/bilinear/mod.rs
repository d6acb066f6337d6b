//! Hirota operators, bilinear relations on conformal blocks and the fast recursion for block
//! coefficients derived from them.

mod fast;
mod hirota;
mod identities;

pub use fast::{benchmark, c1_irregular_half_centered, fast_block, growth_exponent, BenchRow, CoeffTable, FastParams, LatticeKey, Scheme};
pub use hirota::{
    apply_d_iii, apply_d_iii_b, apply_d_vi, apply_d_vi_b, d_iii, d_iii_b, d_vi, d_vi_b, hirota, poly_series, q_pow,
    BilinearOperator, HirotaSpec, OpTerm,
};
pub use identities::{
    c1_p3_residual, c1_p6_residual, irregular_terms, regular_terms, verify_identity, verify_identity_with, DecompTerm, IdentityId,
    IdentityParams, IrregularPoint, RegularPoint, Sector, Verification,
};

use crate::blowup::BlowupError;
use crate::kernel::KernelError;
use crate::nsr::NsrError;
use crate::virasoro::VirasoroError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BilinearError {
    #[error("resonance: coefficient of the unknown vanishes at order {order}, lattice point {lattice}")]
    Resonance { order: usize, lattice: String },
    #[error("singular 2x2 system at order {order}, lattice point {lattice}")]
    SingularSystem { order: usize, lattice: String },
    #[error("exponent {0} is not a real rational")]
    NonRealExponent(String),
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
    #[error("identity `{id}` needs {needs} parameters")]
    WrongParameters { id: String, needs: String },
    #[error(transparent)]
    Blowup(#[from] BlowupError),
    #[error(transparent)]
    Virasoro(#[from] VirasoroError),
    #[error(transparent)]
    Nsr(#[from] NsrError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T> = std::result::Result<T, BilinearError>;
