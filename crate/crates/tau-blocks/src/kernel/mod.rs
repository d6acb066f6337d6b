//! Exact scalars, graded series, partitions and characters.

mod character;
mod linalg;
mod partition;
mod scalar;
mod series;
mod state;

pub use character::{
    character_check, euler_product, fermion_nsr_character_sides, neveu_schwarz_fermions, triple_product_sides,
    vacuum_identity_sides,
};
pub use linalg::{determinant, solve, Matrix};
pub use partition::{partition_counts, partitions_of, Flavor, HalfInt, Partition};
pub use scalar::{rat, Scalar};
pub use series::{exponent_string, geometric, product, GradedSeries};
pub use state::StateVector;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse `{0}`")]
    Parse(String),
    #[error("series trusted only to {cutoff}, needed {order}")]
    CutoffTooSmall { cutoff: String, order: String },
    #[error("`{0}` is not a half-integer")]
    NotHalfInteger(String),
    #[error("singular matrix of size {0}")]
    SingularMatrix(usize),
}
