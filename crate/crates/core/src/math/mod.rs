//! Complex vectors, the discrete Fourier transform and window shifts.

mod fourier;
mod shift;
mod vector;

pub use fourier::{dft, dft_adjoint, dft_direct, idft, idft_direct, q_apply};
pub use shift::{shift, ShiftMode, ShiftSet};
pub use vector::ComplexVector;

pub use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MathError {
    #[error("vector must have at least one entry")]
    EmptyVector,
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
    #[error("shift set is empty")]
    EmptyShiftSet,
    #[error("shift offset {0} occurs more than once")]
    DuplicateShift(i64),
}
