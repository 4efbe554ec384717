//! Classical 4-stage Runge-Kutta over flat state vectors.

use crate::error::{Error, Result};

/// One RK4 step. The right-hand side may fail (e.g. a derived quantity left
/// its domain); non-finite output is reported as blow-up.
pub fn rk4_step(
    state: &[f64],
    rhs: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    dt: f64,
) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let n = state.len();
    let k1 = rhs(state)?;
    let mut tmp = vec![0.0; n];

    for j in 0..n {
        tmp[j] = state[j] + 0.5 * dt * k1[j];
    }
    let k2 = rhs(&tmp)?;
    for j in 0..n {
        tmp[j] = state[j] + 0.5 * dt * k2[j];
    }
    let k3 = rhs(&tmp)?;
    for j in 0..n {
        tmp[j] = state[j] + dt * k3[j];
    }
    let k4 = rhs(&tmp)?;

    let mut out = vec![0.0; n];
    for j in 0..n {
        out[j] = state[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { step: 0, time: dt });
    }
    Ok(out)
}

/// `steps` RK4 steps of size dt (dt < 0 integrates backwards via the
/// time-reversed right-hand side).
pub fn rk4_advance(
    state: &[f64],
    rhs: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    dt: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    let mut current = state.to_vec();
    if dt >= 0.0 {
        for step in 0..steps {
            current = rk4_step(&current, rhs, dt).map_err(|e| match e {
                Error::BlowUp { .. } => Error::BlowUp { step, time: dt * step as f64 },
                other => other,
            })?;
        }
    } else {
        let back = |s: &[f64]| -> Result<Vec<f64>> {
            Ok(rhs(s)?.into_iter().map(|v| -v).collect())
        };
        for step in 0..steps {
            current = rk4_step(&current, &back, -dt).map_err(|e| match e {
                Error::BlowUp { .. } => Error::BlowUp { step, time: dt * step as f64 },
                other => other,
            })?;
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_rhs(s: &[f64]) -> Result<Vec<f64>> {
        Ok(s.to_vec())
    }

    #[test]
    fn exponential_single_step() {
        let out = rk4_step(&[1.0], &exp_rhs, 0.1).unwrap();
        assert!((out[0] - 0.1_f64.exp()).abs() < 1e-7);
    }

    #[test]
    fn zero_rhs_is_identity() {
        let rhs = |s: &[f64]| -> Result<Vec<f64>> { Ok(vec![0.0; s.len()]) };
        let out = rk4_step(&[3.0, -1.5], &rhs, 0.3).unwrap();
        assert_eq!(out, vec![3.0, -1.5]);
    }

    #[test]
    fn one_step_error_is_fourth_order() {
        // halving dt shrinks the one-step error by 2^5 on a single step, or
        // 2^4 per unit time; compare over a fixed horizon.
        let horizon = 0.4;
        let err = |steps: usize| {
            let dt = horizon / steps as f64;
            let y = rk4_advance(&[1.0], &exp_rhs, dt, steps).unwrap()[0];
            (y - horizon.exp()).abs()
        };
        let ratio = err(8) / err(16);
        assert!(
            (ratio / 16.0 - 1.0).abs() < 0.2,
            "order-4 ratio off: {ratio}"
        );
    }

    #[test]
    fn blow_up_is_detected() {
        let rhs = |s: &[f64]| -> Result<Vec<f64>> { Ok(vec![s[0] * s[0] * 1e300]) };
        let res = rk4_advance(&[1.0], &rhs, 1.0, 5);
        assert!(matches!(res, Err(Error::BlowUp { .. })));
    }
}
