use super::{drive, finite_or_zero, IteratePair, SgdStepRule, SolverConfig, SolverError, SolverRun, Step};
use crate::math::ComplexVector;
use crate::model::ProblemInstance;
use crate::objective::{bound_b, bound_bv, bound_bz, gradient_region, GradientPair};
use crate::rng::Rng;

/// `k` independent region indices drawn from `p`.
pub fn sample_indices(p: &[f64], k: usize, rng: &mut Rng) -> Vec<usize> {
    (0..k).map(|_| rng.categorical(p)).collect()
}

/// `g = (1/K) sum_k (1/p_{r_k}) grad J_{r_k}`, with `K = indices.len()`.
pub fn stochastic_gradient(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector, indices: &[usize]) -> GradientPair {
    let k = indices.len() as f64;
    let mut total = GradientPair::zeros(problem.dim());
    for &r in indices {
        total.accumulate(1.0 / (k * problem.p()[r]), &gradient_region(problem, z, v, r));
    }
    total
}

/// Largest admissible step multiplier at iteration `t`:
///
/// ```text
/// min{ (1+t)^{-1+kappa} B^{-1/(1-theta)}, B_z^{-2/(3-theta)}, B_v^{-2/(3-theta)}, (1 - 1/K)^{-1/theta} }
/// ```
///
/// The `B_z`/`B_v` terms are dropped when the bound is zero and the last term
/// when `K = 1` or `theta = 0`.
pub fn sgd_mu_max(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector, t: usize, theta: f64, kappa: f64) -> f64 {
    let b = bound_b(problem, z, v);
    let mut mu = (1.0 + t as f64).powf(kappa - 1.0) * b.powf(-1.0 / (1.0 - theta));
    for bound in [bound_bz(problem, z, v), bound_bv(problem, z, v)] {
        if bound > 0.0 {
            mu = mu.min(bound.powf(-2.0 / (3.0 - theta)));
        }
    }
    let k = problem.batch_size();
    if k > 1 && theta > 0.0 {
        mu = mu.min((1.0 - 1.0 / k as f64).powf(-1.0 / theta));
    }
    finite_or_zero(mu)
}

/// Stochastic gradient descent with `K = problem.batch_size()` draws per step.
///
/// Indices come from `Rng::new(config.seed)`, one categorical draw per index.
pub fn run_sgd(problem: &ProblemInstance, start: IteratePair, config: &SolverConfig) -> Result<SolverRun, SolverError> {
    let k = problem.batch_size();
    if config.sgd_steps == SgdStepRule::EpieMapped && k != 1 {
        return Err(SolverError::InvalidConfig {
            field: "sgd_steps",
            reason: format!("ePIE-mapped steps need K = 1, problem has K = {k}"),
        });
    }
    let mut rng = Rng::new(config.seed);
    let d = problem.dim() as f64;
    drive(problem, start, config, |t, it, _, _| {
        let indices = sample_indices(problem.p(), k, &mut rng);
        let g = stochastic_gradient(problem, &it.z, &it.v, &indices);
        let (mu, nu) = match config.sgd_steps {
            SgdStepRule::Theorem => {
                let m = sgd_mu_max(problem, &it.z, &it.v, t, config.theta, config.kappa);
                (config.mu * m, config.nu * m)
            }
            SgdStepRule::EpieMapped => {
                let p_r = problem.p()[indices[0]];
                let (z_inf, v_inf) = super::epie::sup_norms(it, t)?;
                (
                    config.epie_alpha * p_r / (d * v_inf * v_inf),
                    config.epie_beta * p_r / (d * z_inf * z_inf),
                )
            }
        };
        Ok(Step {
            next: IteratePair::new(it.z.step(mu, &g.g_z), it.v.step(nu, &g.g_v)),
            mu,
            nu,
        })
    })
}
