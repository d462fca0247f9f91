//! Blind ptychography: recover an object and an unknown illumination window
//! from far-field intensities of overlapping shifted windows.
//!
//! The crate provides the measurement model, the smoothed amplitude loss with
//! Tikhonov regularization, its Wirtinger gradients and step-size bounds, and
//! four solvers: gradient descent, stochastic gradient descent, ePIE, and a
//! descent along the segment between the two partial gradient steps. The
//! [`verify`] module checks the inequalities those solvers rely on against
//! independent numerical oracles.

pub mod harness;
pub mod json;
pub mod math;
pub mod model;
pub mod objective;
pub mod rng;
pub mod solvers;
pub mod verify;

pub use math::{Complex64, ComplexVector, ShiftMode, ShiftSet};
pub use model::{ProblemInstance, SynthesisSpec};
pub use rng::Rng;
