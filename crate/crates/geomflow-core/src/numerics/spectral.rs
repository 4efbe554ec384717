//! FFT plumbing shared by the periodic-grid calculus.
//!
//! All transforms are unnormalized forward / 1/n inverse, and the planner is
//! cached per thread so the public operations stay reentrant.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        RefCell::new(HashMap::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry((n, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(n)
                } else {
                    planner.plan_fft_inverse(n)
                }
            })
            .clone()
    })
}

/// Unnormalized forward transform.
pub fn fft(values: &mut [Complex64]) {
    plan(values.len(), true).process(values);
}

/// Inverse transform including the 1/n normalization.
pub fn ifft(values: &mut [Complex64]) {
    let n = values.len();
    plan(n, false).process(values);
    let scale = 1.0 / n as f64;
    for v in values.iter_mut() {
        *v *= scale;
    }
}

/// Signed integer wavenumber of bin `j` on an n-point grid.
pub fn wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Coefficients this far below the input's own spectral peak are FFT
/// roundoff; multiplying them by (ik)^order would manufacture high-mode
/// junk, so the derivative zeroes them first.
const NOISE_FLOOR: f64 = 1e-15;

/// In-place spectral derivative of sampled complex data.
///
/// `omega` is 2 pi / L. Coefficients below the machine-noise floor of the
/// input are dropped before symbol multiplication (band-limited data thus
/// has exactly band-limited derivatives), and the Nyquist bin is zeroed for
/// odd orders, where its derivative has no symmetric representative.
pub fn derivative_inplace(values: &mut [Complex64], omega: f64, order: u32) {
    let n = values.len();
    fft(values);
    let floor = values.iter().fold(0.0_f64, |m, v| m.max(v.norm())) * NOISE_FLOOR;
    for (j, v) in values.iter_mut().enumerate() {
        let k = wavenumber(j, n);
        if v.norm() < floor || (n % 2 == 0 && j == n / 2 && order % 2 == 1) {
            *v = Complex64::new(0.0, 0.0);
            continue;
        }
        let ik = Complex64::new(0.0, k as f64 * omega);
        *v *= ik.powu(order);
    }
    ifft(values);
}

/// Spectral antiderivative of the mean-free part; returns the removed mean.
///
/// The output has zero mode set to zero (an undetermined constant the caller
/// fixes), and the Nyquist bin is dropped for the same reason as above.
pub fn antiderivative_inplace(values: &mut [Complex64], omega: f64) -> Complex64 {
    let n = values.len();
    fft(values);
    let mean = values[0] / n as f64;
    values[0] = Complex64::new(0.0, 0.0);
    for (j, v) in values.iter_mut().enumerate().skip(1) {
        if n % 2 == 0 && j == n / 2 {
            *v = Complex64::new(0.0, 0.0);
            continue;
        }
        let k = wavenumber(j, n);
        *v /= Complex64::new(0.0, k as f64 * omega);
    }
    ifft(values);
    mean
}

/// Zero every mode with |k| > n/3 (2/3-rule dealiasing).
pub fn dealias_23_inplace(values: &mut [Complex64]) {
    let n = values.len();
    let cutoff = (n / 3) as i64;
    fft(values);
    for (j, v) in values.iter_mut().enumerate() {
        if wavenumber(j, n).abs() > cutoff {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    ifft(values);
}

/// Trigonometric interpolation of real samples at an arbitrary point.
///
/// `x` is measured in the same units as the period `length`. The Nyquist
/// term uses the cosine convention of the real interpolant.
pub fn eval_trig(samples: &[f64], length: f64, x: f64) -> f64 {
    let mut coeffs: Vec<Complex64> = samples
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fft(&mut coeffs);
    eval_trig_coeffs(&coeffs, length, x)
}

/// Same as [`eval_trig`] with precomputed unnormalized FFT coefficients.
pub fn eval_trig_coeffs(coeffs: &[Complex64], length: f64, x: f64) -> f64 {
    let n = coeffs.len();
    let omega = 2.0 * std::f64::consts::PI / length;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, &c) in coeffs.iter().enumerate() {
        let k = wavenumber(j, n);
        if n % 2 == 0 && j == n / 2 {
            acc += c * (k as f64 * omega * x).cos();
        } else {
            let phase = Complex64::new(0.0, k as f64 * omega * x).exp();
            acc += c * phase;
        }
    }
    acc.re / n as f64
}
