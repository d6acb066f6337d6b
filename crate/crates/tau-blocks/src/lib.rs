//! Exact conformal blocks, blow-up factors and Painlevé tau series.

pub mod kernel;
pub mod virasoro;
pub mod nsr;
pub mod fnsr_oracle;
pub mod blowup;
pub mod mutation;
pub mod bilinear;
pub mod painleve;
