//! Scalar bounds that drive the step-size rules.

use crate::math::{shift, ComplexVector};
use crate::model::ProblemInstance;

/// `B(z, v) = 3d [ 10/3 ||z||^2 + 10/3 ||v||^2 + ||y/d||_1^{1/2} ] + 3 max(alpha_T, beta_T)`
pub fn bound_b(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector) -> f64 {
    let d = problem.dim() as f64;
    3.0 * d * (10.0 / 3.0 * z.norm_sq() + 10.0 / 3.0 * v.norm_sq() + problem.y_scale())
        + 3.0 * problem.alpha_t().max(problem.beta_t())
}

fn stochastic_bound(problem: &ProblemInstance, own: f64, other: f64, weight: f64) -> f64 {
    let d = problem.dim() as f64;
    let k = problem.batch_size() as f64;
    let data = d * other * (own * other + problem.y_scale()) / (k.sqrt() * problem.p_min());
    (3.75 * d).sqrt() * (data + weight * own)
}

/// Bound on the object part of the stochastic gradient:
/// `(15d/4) ||g_z||^2 <= B_z^2` for every index draw.
pub fn bound_bz(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector) -> f64 {
    stochastic_bound(problem, z.norm(), v.norm(), problem.alpha_t())
}

/// Window counterpart of [`bound_bz`].
pub fn bound_bv(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector) -> f64 {
    stochastic_bound(problem, v.norm(), z.norm(), problem.beta_t())
}

/// Coordinatewise Lipschitz constants `(L_v, L_z)` of the partial gradients.
///
/// `L_v = d max_j sum_r |(S_r v)_j|^2 + alpha_T` governs the object update,
/// `L_z = d max_j sum_r |(S_{-r} z)_j|^2 + beta_T` the window update.
pub fn lipschitz_constants(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector) -> (f64, f64) {
    let d = problem.dim();
    let mode = problem.shifts().mode();
    let mut cover_v = vec![0.0; d];
    let mut cover_z = vec![0.0; d];
    for &offset in problem.shifts().offsets() {
        for (acc, c) in cover_v.iter_mut().zip(shift(v, offset, mode).iter()) {
            *acc += c.norm_sqr();
        }
        for (acc, c) in cover_z.iter_mut().zip(shift(z, -offset, mode).iter()) {
            *acc += c.norm_sqr();
        }
    }
    let max = |xs: &[f64]| xs.iter().copied().fold(0.0, f64::max);
    (
        d as f64 * max(&cover_v) + problem.alpha_t(),
        d as f64 * max(&cover_z) + problem.beta_t(),
    )
}

/// Constant `C_1` of the deterministic rate, for starting loss `j0`.
/// Requires `alpha_T, beta_T > 0`.
pub fn gd_rate_constant(problem: &ProblemInstance, j0: f64) -> f64 {
    let d = problem.dim() as f64;
    let (a, b) = (problem.alpha_t(), problem.beta_t());
    let first = d * (20.0 * (1.0 / a + 1.0 / b) * j0 + 6.0 * problem.y_scale()) + 2.0 * a.max(b);
    first.max((15.0 * d).cbrt())
}

/// All step-size bounds at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSet {
    pub b: f64,
    pub b_z: f64,
    pub b_v: f64,
    pub l_v: f64,
    pub l_z: f64,
}

impl BoundSet {
    pub fn at(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector) -> Self {
        let (l_v, l_z) = lipschitz_constants(problem, z, v);
        Self {
            b: bound_b(problem, z, v),
            b_z: bound_bz(problem, z, v),
            b_v: bound_bv(problem, z, v),
            l_v,
            l_z,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{ShiftMode, ShiftSet};
    use crate::model::{synthesize_problem, LossParams, MeasurementSet, SynthesisSpec};
    use crate::rng::Rng;

    fn zero_data_problem(d: usize, alpha: f64, beta: f64) -> ProblemInstance {
        let shifts = ShiftSet::all_circular(d);
        let y = MeasurementSet::new(vec![vec![0.0; d]; d], shifts).unwrap();
        ProblemInstance::new(y, LossParams::new(0.0, alpha, beta), None, 1, None).unwrap()
    }

    fn unit(d: usize) -> ComplexVector {
        let mut v = ComplexVector::zeros(d);
        v[0].re = 1.0;
        v
    }

    #[test]
    fn b_at_origin() {
        let p = synthesize_problem(&SynthesisSpec::new(8, 1)).unwrap();
        let zero = ComplexVector::zeros(8);
        let expected = 3.0 * 8.0 * p.y_scale() + 3.0 * 1e-3;
        assert!((bound_b(&p, &zero, &zero) - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn b_for_unit_vectors_without_data() {
        let p = zero_data_problem(8, 0.0, 0.0);
        assert!((bound_b(&p, &unit(8), &unit(8)) - 160.0).abs() < 1e-12);
        let p = zero_data_problem(1, 1.0, 1.0);
        let zero = ComplexVector::zeros(1);
        assert_eq!(bound_b(&p, &zero, &zero), 3.0);
    }

    #[test]
    fn b_grows_with_scale() {
        let p = synthesize_problem(&SynthesisSpec::new(8, 2)).unwrap();
        let mut rng = Rng::new(0);
        let z = rng.complex_normal_vector(8);
        let v = rng.complex_normal_vector(8);
        assert!(bound_b(&p, &z.scale_real(2.0), &v) > bound_b(&p, &z, &v));
    }

    #[test]
    fn stochastic_bounds_vanish_at_origin_without_regularization() {
        let p = zero_data_problem(4, 0.0, 0.0);
        let zero = ComplexVector::zeros(4);
        assert_eq!(bound_bz(&p, &zero, &zero), 0.0);
        assert_eq!(bound_bv(&p, &zero, &zero), 0.0);
    }

    #[test]
    fn quadrupling_batch_halves_data_term() {
        let mut rng = Rng::new(3);
        let base = synthesize_problem(&SynthesisSpec::new(8, 3))
            .unwrap()
            .with_loss(LossParams::new(1e-8, 0.0, 0.0))
            .unwrap();
        let z = rng.complex_normal_vector(8);
        let v = rng.complex_normal_vector(8);
        let k1 = bound_bz(&base.clone().with_batch_size(2).unwrap(), &z, &v);
        let k4 = bound_bz(&base.with_batch_size(8).unwrap(), &z, &v);
        assert!((k1 / k4 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_single_shift_and_full_orbit() {
        let mut rng = Rng::new(5);
        let z = rng.complex_normal_vector(8);
        let v = rng.complex_normal_vector(8);

        let mut spec = SynthesisSpec::new(8, 1);
        spec.shifts = ShiftSet::new(vec![0], ShiftMode::Circular, 8).unwrap();
        spec.loss = LossParams::new(0.0, 0.25, 0.5);
        let single = synthesize_problem(&spec).unwrap();
        let (l_v, l_z) = lipschitz_constants(&single, &z, &v);
        let max_sq = |x: &ComplexVector| x.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
        assert!((l_v - (8.0 * max_sq(&v) + 0.25)).abs() < 1e-12);
        assert!((l_z - (8.0 * max_sq(&z) + 0.5)).abs() < 1e-12);

        spec.shifts = ShiftSet::all_circular(8);
        let full = synthesize_problem(&spec).unwrap();
        let (l_v, l_z) = lipschitz_constants(&full, &z, &v);
        assert!((l_v - (8.0 * v.norm_sq() + 0.25)).abs() <= 1e-12 * l_v);
        assert!((l_z - (8.0 * z.norm_sq() + 0.5)).abs() <= 1e-12 * l_z);
    }

    #[test]
    fn lipschitz_matches_exhaustive_coordinate_loop() {
        let mut rng = Rng::new(6);
        let d = 8;
        for mode in [ShiftMode::Circular, ShiftMode::ZeroPadded] {
            let mut spec = SynthesisSpec::new(d, 2);
            spec.shifts = ShiftSet::new(vec![-3, 0, 2, 4], mode, d).unwrap();
            let p = synthesize_problem(&spec).unwrap();
            let z = rng.complex_normal_vector(d);
            let v = rng.complex_normal_vector(d);
            // brute force from the index definition of the shift
            let at = |x: &ComplexVector, j: i64, r: i64| -> f64 {
                let src = j - r;
                match mode {
                    ShiftMode::Circular => x[src.rem_euclid(d as i64) as usize].norm_sqr(),
                    ShiftMode::ZeroPadded if (0..d as i64).contains(&src) => x[src as usize].norm_sqr(),
                    ShiftMode::ZeroPadded => 0.0,
                }
            };
            let mut best_v: f64 = 0.0;
            let mut best_z: f64 = 0.0;
            for j in 0..d as i64 {
                best_v = best_v.max(p.shifts().offsets().iter().map(|&r| at(&v, j, r)).sum());
                best_z = best_z.max(p.shifts().offsets().iter().map(|&r| at(&z, j, -r)).sum());
            }
            let (l_v, l_z) = lipschitz_constants(&p, &z, &v);
            assert!((l_v - (d as f64 * best_v + p.alpha_t())).abs() <= 1e-12 * l_v);
            assert!((l_z - (d as f64 * best_z + p.beta_t())).abs() <= 1e-12 * l_z);
            assert!(l_v <= d as f64 * v.norm_sq() + p.alpha_t() + 1e-12);
        }
    }
}
