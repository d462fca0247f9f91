//! Unnormalized discrete Fourier transform `X_j = sum_k exp(-2 pi i j k / d) x_k`
//! and its inverse `(1/d) F^*`.
//!
//! The main path runs through `rustfft` with a per-thread planner cache. The
//! direct `O(d^2)` sums are kept as an independent reference for tests.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::shift::{shift, ShiftMode};
use super::ComplexVector;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform_in_place(buf: &mut [Complex64], inverse: bool) {
    let d = buf.len();
    let fft = PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        if inverse {
            planner.plan_fft_inverse(d)
        } else {
            planner.plan_fft_forward(d)
        }
    });
    fft.process(buf);
}

/// Forward transform, `F x`.
pub fn dft(x: &ComplexVector) -> ComplexVector {
    let mut buf = x.to_vec();
    transform_in_place(&mut buf, false);
    ComplexVector::from_vec(buf)
}

/// Unnormalized adjoint transform, `F^* x = d * idft(x)`.
pub fn dft_adjoint(x: &ComplexVector) -> ComplexVector {
    let mut buf = x.to_vec();
    transform_in_place(&mut buf, true);
    ComplexVector::from_vec(buf)
}

/// Inverse transform, `F^{-1} X = (1/d) F^* X`.
pub fn idft(spectrum: &ComplexVector) -> ComplexVector {
    let d = spectrum.len() as f64;
    let mut buf = spectrum.to_vec();
    transform_in_place(&mut buf, true);
    for c in buf.iter_mut() {
        *c /= d;
    }
    ComplexVector::from_vec(buf)
}

/// Direct summation of the forward transform.
pub fn dft_direct(x: &ComplexVector) -> ComplexVector {
    direct(x, -1.0, 1.0)
}

/// Direct summation of the inverse transform.
pub fn idft_direct(spectrum: &ComplexVector) -> ComplexVector {
    direct(spectrum, 1.0, 1.0 / spectrum.len() as f64)
}

fn direct(x: &ComplexVector, sign: f64, scale: f64) -> ComplexVector {
    let d = x.len();
    (0..d)
        .map(|j| {
            let acc: Complex64 = x
                .iter()
                .enumerate()
                .map(|(k, xk)| {
                    // reduce j*k mod d first so the angle stays small
                    let angle = sign * 2.0 * PI * ((j * k) % d) as f64 / d as f64;
                    xk * Complex64::from_polar(1.0, angle)
                })
                .sum();
            acc * scale
        })
        .collect()
}

/// Bilinear form `z^T Q_{r,k} v = [F(z o S_r v)]_k`, evaluated entrywise
/// without any transform.
pub fn q_apply(z: &ComplexVector, v: &ComplexVector, offset: i64, k: usize, mode: ShiftMode) -> Complex64 {
    let d = z.len();
    let shifted = shift(v, offset, mode);
    z.iter()
        .zip(shifted.iter())
        .enumerate()
        .map(|(l, (zl, vl))| {
            let angle = -2.0 * PI * ((k * l) % d) as f64 / d as f64;
            zl * vl * Complex64::from_polar(1.0, angle)
        })
        .sum()
}
