use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MathError;

/// Fixed-length vector of complex doubles.
///
/// Objects, windows, gradients and spectra all live in this type. The length
/// is fixed at construction and never changes; every mutating helper keeps it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexVector(Vec<Complex64>);

impl ComplexVector {
    /// Validating constructor: rejects empty input and non-finite entries.
    pub fn new(entries: Vec<Complex64>) -> Result<Self, MathError> {
        if entries.is_empty() {
            return Err(MathError::EmptyVector);
        }
        if let Some(index) = entries.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(MathError::NonFinite { index });
        }
        Ok(Self(entries))
    }

    /// Wraps entries without validation. Callers guarantee the invariants.
    pub fn from_vec(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); d])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&re| Complex64::new(re, 0.0)).collect())
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Hermitian inner product `<self, other> = sum_j conj(self_j) other_j`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|c| c.conj()).collect())
    }

    pub fn hadamard(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).collect())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect())
    }

    /// `self += factor * other`
    pub fn axpy(&mut self, factor: f64, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b * factor;
        }
    }

    /// `self - step * direction`, the basic descent update.
    pub fn step(&self, step: f64, direction: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(direction.0.iter())
                .map(|(a, g)| a - g * step)
                .collect(),
        )
    }

    /// Largest entrywise modulus of the difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Deref for ComplexVector {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for ComplexVector {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(entries: Vec<Complex64>) -> Self {
        Self::from_vec(entries)
    }
}

impl FromIterator<Complex64> for ComplexVector {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}
