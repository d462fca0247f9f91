//! Forward measurement model and problem instances.
//!
//! A measurement row for shift `r` is `|F(x o S_r w)|^2`, optionally passed
//! through a noise model. A [`ProblemInstance`] bundles the measurements with
//! the loss parameters (smoothing, Tikhonov weights) and the sampling
//! distribution used by the stochastic solvers.

mod io;
mod noise;

pub use io::ProblemFile;
pub use noise::{add_noise, NoiseModel};

use serde::{Deserialize, Serialize};

use crate::math::{dft, shift, ComplexVector, MathError, ShiftSet};
use crate::rng::Rng;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("invalid `{field}`: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("problem file: {0}")]
    Parse(#[from] crate::json::FieldError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ModelError {
    pub(crate) fn field(field: &'static str, reason: impl Into<String>) -> Self {
        Self::InvalidField {
            field,
            reason: reason.into(),
        }
    }
}

/// Nonnegative intensities, one row of length `d` per shift.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    d: usize,
    values: Vec<f64>,
    shifts: ShiftSet,
}

impl MeasurementSet {
    /// `rows[r][k]` is the intensity for region `r` (ascending offset order).
    pub fn new(rows: Vec<Vec<f64>>, shifts: ShiftSet) -> Result<Self, ModelError> {
        if rows.len() != shifts.len() {
            return Err(ModelError::field(
                "y",
                format!("{} rows for {} shifts", rows.len(), shifts.len()),
            ));
        }
        let d = rows.first().map(Vec::len).unwrap_or(0);
        if d == 0 {
            return Err(ModelError::field("y", "rows must be nonempty"));
        }
        let mut values = Vec::with_capacity(d * rows.len());
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != d {
                return Err(ModelError::field("y", format!("row {r} has length {} (expected {d})", row.len())));
            }
            if let Some(k) = row.iter().position(|y| !(y.is_finite() && *y >= 0.0)) {
                return Err(ModelError::field("y", format!("entry ({r}, {k}) is negative or not finite")));
            }
            values.extend(row);
        }
        Ok(Self { d, values, shifts })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn shifts(&self) -> &ShiftSet {
        &self.shifts
    }

    pub fn num_regions(&self) -> usize {
        self.shifts.len()
    }

    pub fn row(&self, region: usize) -> &[f64] {
        &self.values[region * self.d..(region + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.d)
    }

    /// Row-major view of all intensities.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `||y||_1`
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `||y||_inf`
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub(crate) fn map_values(&self, f: impl FnMut(f64) -> f64) -> Self {
        Self {
            d: self.d,
            values: self.values.iter().copied().map(f).collect(),
            shifts: self.shifts.clone(),
        }
    }
}

/// Noiseless intensities `|F(x o S_r w)|^2` for every shift.
pub fn forward_intensities(x: &ComplexVector, w: &ComplexVector, shifts: &ShiftSet) -> MeasurementSet {
    let d = x.len();
    let mut values = Vec::with_capacity(d * shifts.len());
    for &offset in shifts.offsets() {
        let exit_wave = x.hadamard(&shift(w, offset, shifts.mode()));
        values.extend(dft(&exit_wave).iter().map(|c| c.norm_sqr()));
    }
    MeasurementSet {
        d,
        values,
        shifts: shifts.clone(),
    }
}

/// Smoothing and Tikhonov weights of the regularized amplitude loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    pub epsilon: f64,
    pub alpha_t: f64,
    pub beta_t: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        Self {
            epsilon: 1e-8,
            alpha_t: 1e-3,
            beta_t: 1e-3,
        }
    }
}

impl LossParams {
    pub fn new(epsilon: f64, alpha_t: f64, beta_t: f64) -> Self {
        Self { epsilon, alpha_t, beta_t }
    }

    fn validate(&self) -> Result<(), ModelError> {
        for (field, value) in [("epsilon", self.epsilon), ("alpha_T", self.alpha_t), ("beta_T", self.beta_t)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ModelError::field(field, format!("must be finite and >= 0, got {value}")));
            }
        }
        Ok(())
    }
}

/// Object and window that generated a synthetic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub x: ComplexVector,
    pub w: ComplexVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    measurements: MeasurementSet,
    loss: LossParams,
    p: Vec<f64>,
    batch_size: usize,
    ground_truth: Option<GroundTruth>,
}

impl ProblemInstance {
    /// `p = None` selects the uniform distribution over regions.
    pub fn new(
        measurements: MeasurementSet,
        loss: LossParams,
        p: Option<Vec<f64>>,
        batch_size: usize,
        ground_truth: Option<GroundTruth>,
    ) -> Result<Self, ModelError> {
        loss.validate()?;
        let regions = measurements.num_regions();
        let p = p.unwrap_or_else(|| vec![1.0 / regions as f64; regions]);
        validate_distribution(&p, regions)?;
        if batch_size == 0 {
            return Err(ModelError::field("K", "batch size must be >= 1"));
        }
        if let Some(truth) = &ground_truth {
            let d = measurements.dim();
            if truth.x.len() != d || truth.w.len() != d {
                return Err(ModelError::field("x", format!("ground truth must have length {d}")));
            }
        }
        Ok(Self {
            measurements,
            loss,
            p,
            batch_size,
            ground_truth,
        })
    }

    pub fn dim(&self) -> usize {
        self.measurements.dim()
    }

    pub fn measurements(&self) -> &MeasurementSet {
        &self.measurements
    }

    pub fn shifts(&self) -> &ShiftSet {
        self.measurements.shifts()
    }

    pub fn num_regions(&self) -> usize {
        self.measurements.num_regions()
    }

    pub fn loss_params(&self) -> LossParams {
        self.loss
    }

    pub fn epsilon(&self) -> f64 {
        self.loss.epsilon
    }

    pub fn alpha_t(&self) -> f64 {
        self.loss.alpha_t
    }

    pub fn beta_t(&self) -> f64 {
        self.loss.beta_t
    }

    /// Sampling probabilities, aligned with the ascending shift offsets.
    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn p_min(&self) -> f64 {
        self.p.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn ground_truth(&self) -> Option<&GroundTruth> {
        self.ground_truth.as_ref()
    }

    /// `||y / d||_1^{1/2}`, which appears in every bound constant.
    pub fn y_scale(&self) -> f64 {
        (self.measurements.l1_norm() / self.dim() as f64).sqrt()
    }

    pub fn with_loss(mut self, loss: LossParams) -> Result<Self, ModelError> {
        loss.validate()?;
        self.loss = loss;
        Ok(self)
    }

    pub fn with_sampling(mut self, p: Vec<f64>) -> Result<Self, ModelError> {
        validate_distribution(&p, self.num_regions())?;
        self.p = p;
        Ok(self)
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Result<Self, ModelError> {
        if batch_size == 0 {
            return Err(ModelError::field("K", "batch size must be >= 1"));
        }
        self.batch_size = batch_size;
        Ok(self)
    }

    pub fn with_measurements(mut self, measurements: MeasurementSet) -> Result<Self, ModelError> {
        if measurements.num_regions() != self.num_regions() || measurements.dim() != self.dim() {
            return Err(ModelError::field("y", "replacement measurements have a different shape"));
        }
        self.measurements = measurements;
        Ok(self)
    }
}

fn validate_distribution(p: &[f64], regions: usize) -> Result<(), ModelError> {
    if p.len() != regions {
        return Err(ModelError::field("p", format!("length {} does not match {regions} shifts", p.len())));
    }
    if let Some(i) = p.iter().position(|&q| !(q.is_finite() && q > 0.0)) {
        return Err(ModelError::field("p", format!("entry {i} must be strictly positive, got {}", p[i])));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(ModelError::field("p", format!("entries sum to {total}, not 1")));
    }
    Ok(())
}

/// Inputs for [`synthesize_problem`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisSpec {
    pub d: usize,
    pub shifts: ShiftSet,
    pub seed: u64,
    pub noise: NoiseModel,
    pub loss: LossParams,
    pub p: Option<Vec<f64>>,
    pub batch_size: usize,
}

impl SynthesisSpec {
    /// All circular shifts, no noise, default loss parameters, uniform
    /// sampling and `K = 1`.
    pub fn new(d: usize, seed: u64) -> Self {
        Self {
            d,
            shifts: ShiftSet::all_circular(d),
            seed,
            noise: NoiseModel::None,
            loss: LossParams::default(),
            p: None,
            batch_size: 1,
        }
    }
}

/// Draws `x` and `w` with i.i.d. standard complex Gaussian entries, then
/// measures them. Deterministic in `spec.seed`.
pub fn synthesize_problem(spec: &SynthesisSpec) -> Result<ProblemInstance, ModelError> {
    if spec.d == 0 {
        return Err(ModelError::field("d", "dimension must be >= 1"));
    }
    let mut rng = Rng::new(spec.seed);
    let x = rng.complex_normal_vector(spec.d);
    let w = rng.complex_normal_vector(spec.d);
    let clean = forward_intensities(&x, &w, &spec.shifts);
    let measurements = add_noise(&clean, &spec.noise, &mut rng);
    ProblemInstance::new(
        measurements,
        spec.loss,
        spec.p.clone(),
        spec.batch_size,
        Some(GroundTruth { x, w }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{q_apply, Complex64, ShiftMode};

    #[test]
    fn constant_vectors_d2() {
        let ones = ComplexVector::from_real(&[1.0, 1.0]);
        let shifts = ShiftSet::new(vec![0], ShiftMode::Circular, 2).unwrap();
        let y = forward_intensities(&ones, &ones, &shifts);
        assert_eq!(y.row(0).len(), 2);
        assert!((y.row(0)[0] - 4.0).abs() < 1e-14);
        assert!(y.row(0)[1].abs() < 1e-14);
    }

    #[test]
    fn zero_object_gives_zero_measurements() {
        let mut rng = Rng::new(2);
        let w = rng.complex_normal_vector(6);
        let y = forward_intensities(&ComplexVector::zeros(6), &w, &ShiftSet::all_circular(6));
        assert!(y.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn entries_match_bilinear_form() {
        let mut rng = Rng::new(8);
        let d = 8;
        let x = rng.complex_normal_vector(d);
        let w = rng.complex_normal_vector(d);
        let shifts = ShiftSet::all_circular(d);
        let y = forward_intensities(&x, &w, &shifts);
        for (r, &offset) in shifts.offsets().iter().enumerate() {
            for k in 0..d {
                let expected = q_apply(&x, &w, offset, k, ShiftMode::Circular).norm_sqr();
                assert!((y.row(r)[k] - expected).abs() <= 1e-12 * (1.0 + expected));
            }
        }
        // total energy: d * sum_k |x_k|^2 sum_r |w_{k-r}|^2 = d ||x||^2 ||w||^2 for the full orbit
        let total: f64 = y.values().iter().sum();
        let expected = d as f64 * x.norm_sq() * w.norm_sq();
        assert!((total - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn synthesis_is_deterministic_and_valid() {
        let spec = SynthesisSpec::new(16, 42);
        let a = synthesize_problem(&spec).unwrap();
        let b = synthesize_problem(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_regions(), 16);
        assert!(a.measurements().values().iter().all(|&y| y >= 0.0));
        let c = synthesize_problem(&SynthesisSpec::new(16, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_distributions() {
        let mut spec = SynthesisSpec::new(4, 0);
        spec.p = Some(vec![0.5, 0.5, 0.0, 0.0]);
        assert!(matches!(synthesize_problem(&spec), Err(ModelError::InvalidField { field: "p", .. })));
        spec.p = Some(vec![0.5, 0.5]);
        assert!(matches!(synthesize_problem(&spec), Err(ModelError::InvalidField { field: "p", .. })));
        spec.p = Some(vec![0.4, 0.2, 0.2, 0.1]);
        assert!(matches!(synthesize_problem(&spec), Err(ModelError::InvalidField { field: "p", .. })));
        spec.p = Some(vec![0.4, 0.3, 0.2, 0.1]);
        assert!(synthesize_problem(&spec).is_ok());
        spec.batch_size = 0;
        assert!(matches!(synthesize_problem(&spec), Err(ModelError::InvalidField { field: "K", .. })));
    }

    #[test]
    fn measurement_set_rejects_negative_entries() {
        let shifts = ShiftSet::all_circular(2);
        assert!(MeasurementSet::new(vec![vec![1.0, -1.0], vec![0.0, 0.0]], shifts.clone()).is_err());
        assert!(MeasurementSet::new(vec![vec![1.0, 1.0]], shifts.clone()).is_err());
        assert!(MeasurementSet::new(vec![vec![1.0, 1.0], vec![2.0, 0.0]], shifts).is_ok());
    }

    fn rel_diff(a: &MeasurementSet, b: &MeasurementSet) -> f64 {
        let scale = a.max().max(1e-300);
        a.values()
            .iter()
            .zip(b.values())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
            / scale
    }

    #[test]
    fn ambiguities_leave_measurements_unchanged() {
        let mut rng = Rng::new(21);
        let d = 12;
        let x = rng.complex_normal_vector(d);
        let w = rng.complex_normal_vector(d);
        let shifts = ShiftSet::all_circular(d);
        let base = forward_intensities(&x, &w, &shifts);

        let a = Complex64::from_polar(1.0, 0.7);
        let b = Complex64::from_polar(1.0, -2.1);
        let phased = forward_intensities(&x.scale(a), &w.scale(b), &shifts);
        assert!(rel_diff(&base, &phased) <= 1e-10);

        let gamma = Complex64::new(1.7, -0.4);
        let scaled = forward_intensities(&x.scale(gamma), &w.scale(gamma.inv()), &shifts);
        assert!(rel_diff(&base, &scaled) <= 1e-10);

        // circular shifts need rho on the 2 pi / d lattice
        let rho = 2.0 * std::f64::consts::PI * 3.0 / d as f64;
        let xz: ComplexVector = x.iter().enumerate().map(|(k, c)| c * Complex64::from_polar(1.0, -rho * k as f64)).collect();
        let wv: ComplexVector = w.iter().enumerate().map(|(k, c)| c * Complex64::from_polar(1.0, rho * k as f64)).collect();
        let linear = forward_intensities(&xz, &wv, &shifts);
        assert!(rel_diff(&base, &linear) <= 1e-10);
    }
}
