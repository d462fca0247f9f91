use super::{fd_wirtinger_gradient, default_fd_step, relative_gradient_error, sample_vector, CheckReport, SlackTracker};
use crate::math::{q_apply, ComplexVector, ShiftSet};
use crate::model::ProblemInstance;
use crate::objective::{bound_bv, bound_bz, gradient, lipschitz_constants, loss, loss_and_gradient, GradientPair};
use crate::rng::Rng;
use crate::solvers::{sample_indices, stochastic_gradient};

/// Largest number of index tuples the unbiasedness check enumerates.
const MAX_ENUMERATED_TUPLES: usize = 1 << 16;

fn log_uniform(rng: &mut Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(lo_exp + (hi_exp - lo_exp) * rng.uniform())
}

fn failed(name: &str, reason: &str) -> CheckReport {
    CheckReport {
        name: name.into(),
        samples: 0,
        worst_slack: f64::NEG_INFINITY,
        passed: false,
        detail: reason.into(),
    }
}

/// Analytic gradient against [`fd_wirtinger_gradient`] at random points with
/// entries of size `scale`; passes at relative error `1e-6`.
pub fn check_fd_gradient(problem: &ProblemInstance, n_samples: usize, scale: f64, rng: &mut Rng) -> CheckReport {
    let name = "fd_gradient";
    if problem.epsilon() <= 0.0 {
        return failed(name, "finite differences need epsilon > 0");
    }
    let d = problem.dim();
    let mut tracker = SlackTracker::new(name, 1e-6, "= -||fd - analytic|| / ||analytic||");
    for _ in 0..n_samples {
        let z = sample_vector(rng, d, scale);
        let v = sample_vector(rng, d, scale);
        let fd = fd_wirtinger_gradient(problem, &z, &v, default_fd_step(&z, &v));
        tracker.observe_slack(-relative_gradient_error(&fd, &gradient(problem, &z, &v)));
    }
    tracker.finish("step 1e-6 (1 + max(||z||_inf, ||v||_inf))")
}

/// Right-hand side of the quartic descent lemma at `(z, v)` for the
/// perturbation `(u, h)`.
pub fn descent_lemma_rhs(
    problem: &ProblemInstance,
    z: &ComplexVector,
    v: &ComplexVector,
    u: &ComplexVector,
    h: &ComplexVector,
) -> f64 {
    let (value, grad) = loss_and_gradient(problem, z, v);
    let d = problem.dim() as f64;
    let ys = problem.y_scale();
    let (zz, vv, uu, hh) = (z.norm_sq(), v.norm_sq(), u.norm_sq(), h.norm_sq());
    let linear = 2.0 * u.inner(&grad.g_z).re + 2.0 * h.inner(&grad.g_v).re;
    let u_coef = problem.alpha_t() + d * (10.0 / 3.0 * vv + 1.25 * hh + 2.0 / 3.0 * zz + 0.25 * uu + ys);
    let h_coef = problem.beta_t() + d * (10.0 / 3.0 * zz + 1.25 * uu + 2.0 / 3.0 * vv + 0.25 * hh + ys);
    value.j + linear + uu * u_coef + hh * h_coef
}

/// `J(z + u, v + h) <= descent_lemma_rhs(z, v, u, h)` with `z, v` of size
/// `scale` and perturbations `scale * 10^{-U(0,3)}`. Slack is normalized by
/// `1 + |rhs|`, tolerance `1e-9`.
pub fn check_descent_lemma(problem: &ProblemInstance, n_samples: usize, scale: f64, rng: &mut Rng) -> CheckReport {
    let d = problem.dim();
    let mut tracker = SlackTracker::new(format!("descent_lemma(scale={scale})"), 1e-9, "/ (1 + |rhs|)");
    for _ in 0..n_samples {
        let z = sample_vector(rng, d, scale);
        let v = sample_vector(rng, d, scale);
        let step = scale * log_uniform(rng, -3.0, 0.0);
        let u = sample_vector(rng, d, step);
        let h = sample_vector(rng, d, step);
        let lhs = loss(problem, &z.add(&u), &v.add(&h)).j;
        tracker.observe_shifted(lhs, descent_lemma_rhs(problem, &z, &v, &u, &h));
    }
    tracker.finish("")
}

/// `E[g] = grad J` by enumeration: every single index with weight `p_r`,
/// and, for `K > 1`, every `K`-tuple with weight `prod p` (when there are at
/// most 65536 tuples). Error is `||E[g] - grad J|| / max(1, ||grad J||)`,
/// tolerance `1e-12`.
pub fn check_unbiasedness(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector) -> CheckReport {
    let d = problem.dim();
    let regions = problem.num_regions();
    let p = problem.p();
    let full = gradient(problem, z, v);
    let error = |mean: &GradientPair| {
        (mean.g_z.sub(&full.g_z).norm_sq() + mean.g_v.sub(&full.g_v).norm_sq()).sqrt() / full.norm().max(1.0)
    };
    let mut tracker = SlackTracker::new("unbiasedness", 1e-12, "= -||E g - grad J|| / max(1, ||grad J||)");

    let mut mean = GradientPair::zeros(d);
    for r in 0..regions {
        mean.accumulate(p[r], &stochastic_gradient(problem, z, v, &[r]));
    }
    tracker.observe_slack(-error(&mean));

    let k = problem.batch_size();
    let mut note = String::from("K = 1 enumerated");
    if k > 1 {
        match regions.checked_pow(k as u32).filter(|&n| n <= MAX_ENUMERATED_TUPLES) {
            Some(count) => {
                let mut mean = GradientPair::zeros(d);
                let mut tuple = vec![0usize; k];
                for code in 0..count {
                    let mut rest = code;
                    for slot in tuple.iter_mut() {
                        *slot = rest % regions;
                        rest /= regions;
                    }
                    let weight: f64 = tuple.iter().map(|&r| p[r]).product();
                    mean.accumulate(weight, &stochastic_gradient(problem, z, v, &tuple));
                }
                tracker.observe_slack(-error(&mean));
                note = format!("K = 1 and all {count} K = {k} tuples enumerated");
            }
            None => note = format!("K = {k} tuples too many to enumerate; K = 1 only"),
        }
    }
    tracker.finish(&note)
}

/// `(15d/4) ||g_z||^2 <= B_z^2` and `(15d/4) ||g_v||^2 <= B_v^2` for
/// stochastic gradients at random points and index draws. With `K = 1`
/// every other sample uses the least likely region. Relative slack,
/// tolerance `1e-9`.
pub fn check_gradient_bounds(problem: &ProblemInstance, n_samples: usize, rng: &mut Rng) -> CheckReport {
    let d = problem.dim();
    let k = problem.batch_size();
    let rarest = (0..problem.num_regions())
        .min_by(|&a, &b| problem.p()[a].total_cmp(&problem.p()[b]))
        .expect("at least one region");
    let factor = 3.75 * d as f64;
    let mut tracker = SlackTracker::new("stochastic_gradient_bounds", 1e-9, "relative");
    for i in 0..n_samples {
        let scale = log_uniform(rng, -1.0, 1.0);
        let z = sample_vector(rng, d, scale);
        let v = sample_vector(rng, d, scale);
        let indices = if k == 1 && i % 2 == 1 {
            vec![rarest]
        } else {
            sample_indices(problem.p(), k, rng)
        };
        let g = stochastic_gradient(problem, &z, &v, &indices);
        tracker.observe_relative(factor * g.g_z.norm_sq(), bound_bz(problem, &z, &v).powi(2));
        tracker.observe_relative(factor * g.g_v.norm_sq(), bound_bv(problem, &z, &v).powi(2));
    }
    tracker.finish("two inequalities per sample")
}

/// `sum_{r,k} |F(z o S_r v)_k|^2 <= d ||z||^2 ||v||^2` with the left side
/// summed entry by entry from the DFT definition. Relative slack,
/// tolerance `1e-9`.
pub fn check_bilinear_bound(d: usize, shifts: &ShiftSet, n_samples: usize, rng: &mut Rng) -> CheckReport {
    let mut tracker = SlackTracker::new(format!("bilinear_bound({:?})", shifts.mode()), 1e-9, "relative");
    for _ in 0..n_samples {
        let z = rng.complex_normal_vector(d);
        let v = rng.complex_normal_vector(d);
        let lhs: f64 = shifts
            .offsets()
            .iter()
            .flat_map(|&r| (0..d).map(move |k| (r, k)))
            .map(|(r, k)| q_apply(&z, &v, r, k, shifts.mode()).norm_sqr())
            .sum();
        tracker.observe_relative(lhs, d as f64 * z.norm_sq() * v.norm_sq());
    }
    tracker.finish("")
}

/// `L_eps(z, v) <= d ||z||^2 ||v||^2 + ||y||_1`, the loss summed from the
/// DFT definition. Relative slack, tolerance `1e-9`.
pub fn check_loss_bound(problem: &ProblemInstance, n_samples: usize, rng: &mut Rng) -> CheckReport {
    let d = problem.dim();
    let eps = problem.epsilon();
    let mode = problem.shifts().mode();
    let mut tracker = SlackTracker::new("loss_bound", 1e-9, "relative");
    for _ in 0..n_samples {
        let scale = log_uniform(rng, -1.0, 1.0);
        let z = sample_vector(rng, d, scale);
        let v = sample_vector(rng, d, scale);
        let mut lhs = 0.0;
        for (region, &r) in problem.shifts().offsets().iter().enumerate() {
            for (k, &y) in problem.measurements().row(region).iter().enumerate() {
                let diff = (q_apply(&z, &v, r, k, mode).norm_sqr() + eps).sqrt() - (y + eps).sqrt();
                lhs += diff * diff;
            }
        }
        let rhs = d as f64 * z.norm_sq() * v.norm_sq() + problem.measurements().l1_norm();
        tracker.observe_relative(lhs, rhs);
    }
    tracker.finish("")
}

/// `L_v <= d ||v||^2 + alpha_T` and `L_z <= d ||z||^2 + beta_T`.
pub fn check_lipschitz_constants(problem: &ProblemInstance, n_samples: usize, rng: &mut Rng) -> CheckReport {
    let d = problem.dim();
    let mut tracker = SlackTracker::new("coordinate_lipschitz_constants", 1e-9, "relative");
    for _ in 0..n_samples {
        let scale = log_uniform(rng, -1.0, 1.0);
        let z = sample_vector(rng, d, scale);
        let v = sample_vector(rng, d, scale);
        let (l_v, l_z) = lipschitz_constants(problem, &z, &v);
        tracker.observe_relative(l_v, d as f64 * v.norm_sq() + problem.alpha_t());
        tracker.observe_relative(l_z, d as f64 * z.norm_sq() + problem.beta_t());
    }
    tracker.finish("two inequalities per sample")
}

/// Constant `sqrt(2 L^2 + 2 max(alpha_T^2, beta_T^2))` of the local
/// Lipschitz bound on `grad J`, with
/// `L = d [ ||y/d||_1^{1/2} + max{5/4, ||y + eps||_inf^{1/2} eps^{-1/2} - 3/4} (||z1||^2 + ||z2||^2 + ||v1||^2 + ||v2||^2) ]`.
pub fn lipschitz_lemma_constant(
    problem: &ProblemInstance,
    z1: &ComplexVector,
    z2: &ComplexVector,
    v1: &ComplexVector,
    v2: &ComplexVector,
) -> f64 {
    let eps = problem.epsilon();
    let d = problem.dim() as f64;
    let ratio = ((problem.measurements().max() + eps) / eps).sqrt() - 0.75;
    let mass = z1.norm_sq() + z2.norm_sq() + v1.norm_sq() + v2.norm_sq();
    let l = d * (problem.y_scale() + ratio.max(1.25) * mass);
    let reg = problem.alpha_t().max(problem.beta_t());
    (2.0 * l * l + 2.0 * reg * reg).sqrt()
}

/// `||grad J(z1, v1) - grad J(z2, v2)|| <= lipschitz_lemma_constant * ||(z1 - z2, v1 - v2)||`
/// on random pairs at distances `10^{-U(0,3)}` of the point scale.
/// Relative slack, tolerance `1e-9`.
pub fn check_lipschitz_bound(problem: &ProblemInstance, n_samples: usize, rng: &mut Rng) -> CheckReport {
    let name = "gradient_lipschitz_bound";
    if problem.epsilon() <= 0.0 {
        return failed(name, "the bound needs epsilon > 0");
    }
    let d = problem.dim();
    let mut tracker = SlackTracker::new(name, 1e-9, "relative");
    for _ in 0..n_samples {
        let scale = log_uniform(rng, -1.0, 1.0);
        let z1 = sample_vector(rng, d, scale);
        let v1 = sample_vector(rng, d, scale);
        let gap = scale * log_uniform(rng, -3.0, 0.0);
        let z2 = z1.add(&sample_vector(rng, d, gap));
        let v2 = v1.add(&sample_vector(rng, d, gap));
        let g1 = gradient(problem, &z1, &v1);
        let g2 = gradient(problem, &z2, &v2);
        let lhs = (g1.g_z.sub(&g2.g_z).norm_sq() + g1.g_v.sub(&g2.g_v).norm_sq()).sqrt();
        let dist = (z1.sub(&z2).norm_sq() + v1.sub(&v2).norm_sq()).sqrt();
        tracker.observe_relative(lhs, lipschitz_lemma_constant(problem, &z1, &z2, &v1, &v2) * dist);
    }
    tracker.finish("")
}
