use super::{drive, finite_or_zero, IteratePair, SolverConfig, SolverError, SolverRun, Step};
use crate::math::ComplexVector;
use crate::model::ProblemInstance;
use crate::objective::{bound_b, GradientPair};

/// Common step `mu = nu = min{1/B, (15d/4)^{-1/3} ||g_z||^{-2/3}, (15d/4)^{-1/3} ||g_v||^{-2/3}}`.
/// Terms with a zero gradient block are left out.
pub fn gd_step_size(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector, grad: &GradientPair) -> f64 {
    let scale = (3.75 * problem.dim() as f64).cbrt().recip();
    let mut step = bound_b(problem, z, v).recip();
    for norm in [grad.g_z.norm(), grad.g_v.norm()] {
        if norm > 0.0 {
            step = step.min(scale * norm.powf(-2.0 / 3.0));
        }
    }
    finite_or_zero(step)
}

/// Simultaneous gradient descent on `(z, v)`.
pub fn run_gd(problem: &ProblemInstance, start: IteratePair, config: &SolverConfig) -> Result<SolverRun, SolverError> {
    let factor = config.gd_step_factor;
    drive(problem, start, config, |_, it, _, grad| {
        let step = factor * gd_step_size(problem, &it.z, &it.v, grad);
        Ok(Step {
            next: IteratePair::new(it.z.step(step, &grad.g_z), it.v.step(step, &grad.g_v)),
            mu: step,
            nu: step,
        })
    })
}
