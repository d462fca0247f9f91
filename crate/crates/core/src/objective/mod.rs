//! Regularized amplitude loss
//!
//! ```text
//! J(z, v) = sum_r L_r(z, v) + alpha_T ||z||^2 + beta_T ||v||^2
//! L_r(z, v) = sum_k ( sqrt(|F(z o S_r v)_k|^2 + eps) - sqrt(y_rk + eps) )^2
//! ```
//!
//! and its Wirtinger gradients `grad_z f = 1/2 (d/dRe + i d/dIm) f`, taken
//! coordinatewise. Region sums always run over regions in ascending offset
//! order so that the full gradient is bit-for-bit the sum of the per-region
//! gradients.

mod bounds;

pub use bounds::{bound_b, bound_bv, bound_bz, gd_rate_constant, lipschitz_constants, BoundSet};

use num_complex::Complex64;

use crate::math::{dft, dft_adjoint, shift, ComplexVector};
use crate::model::ProblemInstance;

/// Below this modulus a transform coefficient counts as zero when `eps = 0`.
const VANISHING_COEFFICIENT: f64 = 1e-300;

/// Value of `J` together with its unregularized part `L_eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossValue {
    pub j: f64,
    pub l_eps: f64,
}

/// Object and window components of a (stochastic) gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPair {
    pub g_z: ComplexVector,
    pub g_v: ComplexVector,
}

impl GradientPair {
    pub fn zeros(d: usize) -> Self {
        Self {
            g_z: ComplexVector::zeros(d),
            g_v: ComplexVector::zeros(d),
        }
    }

    /// Squared norm of the stacked gradient, `||g_z||^2 + ||g_v||^2`.
    pub fn norm_sq(&self) -> f64 {
        self.g_z.norm_sq() + self.g_v.norm_sq()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.g_z.is_finite() && self.g_v.is_finite()
    }

    /// `self += weight * other`
    pub fn accumulate(&mut self, weight: f64, other: &GradientPair) {
        self.g_z.axpy(weight, &other.g_z);
        self.g_v.axpy(weight, &other.g_v);
    }

    pub fn max_abs_diff(&self, other: &GradientPair) -> f64 {
        self.g_z.max_abs_diff(&other.g_z).max(self.g_v.max_abs_diff(&other.g_v))
    }
}

/// Transform of the exit wave for one region.
struct RegionSpectrum {
    offset: i64,
    shifted_window: ComplexVector,
    spectrum: ComplexVector,
}

fn region_spectrum(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector, region: usize) -> RegionSpectrum {
    let offset = problem.shifts().offsets()[region];
    let shifted_window = shift(v, offset, problem.shifts().mode());
    let spectrum = dft(&z.hadamard(&shifted_window));
    RegionSpectrum {
        offset,
        shifted_window,
        spectrum,
    }
}

fn region_loss_from_spectrum(spectrum: &ComplexVector, y: &[f64], eps: f64) -> f64 {
    spectrum
        .iter()
        .zip(y)
        .map(|(psi, &y)| {
            let diff = (psi.norm_sqr() + eps).sqrt() - (y + eps).sqrt();
            diff * diff
        })
        .sum()
}

/// `[1 - sqrt(y + eps) / sqrt(|psi|^2 + eps)] psi`, with the ratio taken as
/// zero for a vanishing coefficient when `eps = 0`.
fn residual_coefficient(psi: Complex64, y: f64, eps: f64) -> Complex64 {
    let target = (y + eps).sqrt();
    if eps > 0.0 {
        return psi * (1.0 - target / (psi.norm_sqr() + eps).sqrt());
    }
    let modulus = psi.norm();
    if modulus < VANISHING_COEFFICIENT {
        psi
    } else if psi.norm_sqr() >= f64::MIN_POSITIVE {
        psi * (1.0 - target / psi.norm_sqr().sqrt())
    } else {
        psi - (psi / modulus) * target
    }
}

/// Gradient of `L_r` alone (no Tikhonov share).
fn amplitude_gradient(problem: &ProblemInstance, z: &ComplexVector, region: usize, eval: &RegionSpectrum) -> GradientPair {
    let y = problem.measurements().row(region);
    let eps = problem.epsilon();
    let residual: ComplexVector = eval
        .spectrum
        .iter()
        .zip(y)
        .map(|(&psi, &y)| residual_coefficient(psi, y, eps))
        .collect();
    let back = dft_adjoint(&residual);
    let g_z = eval.shifted_window.conj().hadamard(&back);
    let g_v = shift(&z.conj().hadamard(&back), -eval.offset, problem.shifts().mode());
    GradientPair { g_z, g_v }
}

/// `L_{r,eps}(z, v)` for the region with index `region`.
pub fn loss_region(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector, region: usize) -> f64 {
    let eval = region_spectrum(problem, z, v, region);
    region_loss_from_spectrum(&eval.spectrum, problem.measurements().row(region), problem.epsilon())
}

pub fn loss(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector) -> LossValue {
    let l_eps: f64 = (0..problem.num_regions()).map(|r| loss_region(problem, z, v, r)).sum();
    LossValue {
        j: l_eps + tikhonov(problem, z, v),
        l_eps,
    }
}

fn tikhonov(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector) -> f64 {
    problem.alpha_t() * z.norm_sq() + problem.beta_t() * v.norm_sq()
}

/// Gradient of `J_r = L_r + p_r (alpha_T ||z||^2 + beta_T ||v||^2)`.
pub fn gradient_region(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector, region: usize) -> GradientPair {
    let eval = region_spectrum(problem, z, v, region);
    with_tikhonov_share(problem, z, v, region, amplitude_gradient(problem, z, region, &eval))
}

fn with_tikhonov_share(
    problem: &ProblemInstance,
    z: &ComplexVector,
    v: &ComplexVector,
    region: usize,
    mut grad: GradientPair,
) -> GradientPair {
    let p_r = problem.p()[region];
    grad.g_z.axpy(problem.alpha_t() * p_r, z);
    grad.g_v.axpy(problem.beta_t() * p_r, v);
    grad
}

/// Full gradient `grad J`, accumulated region by region.
pub fn gradient(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector) -> GradientPair {
    loss_and_gradient(problem, z, v).1
}

/// Loss and gradient sharing one transform per region.
pub fn loss_and_gradient(problem: &ProblemInstance, z: &ComplexVector, v: &ComplexVector) -> (LossValue, GradientPair) {
    let mut total = GradientPair::zeros(problem.dim());
    let mut l_eps = 0.0;
    for region in 0..problem.num_regions() {
        let eval = region_spectrum(problem, z, v, region);
        l_eps += region_loss_from_spectrum(&eval.spectrum, problem.measurements().row(region), problem.epsilon());
        let grad = with_tikhonov_share(problem, z, v, region, amplitude_gradient(problem, z, region, &eval));
        total.accumulate(1.0, &grad);
    }
    let value = LossValue {
        j: l_eps + tikhonov(problem, z, v),
        l_eps,
    };
    (value, total)
}
