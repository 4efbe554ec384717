//! Linear solves against grid operators.
//!
//! Constant-coefficient operators are inverted by Fourier-symbol division;
//! everything else goes through a dense assembly and SVD with the zero-mean
//! convention on the null direction of constants.

use crate::error::{Error, Result};
use crate::numerics::{spectral, GridFunction};
use crate::tolerances::SOLVABILITY_TOL;
use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;

/// A linear map on grid functions that can be solved against.
pub trait LinearGridOperator {
    fn apply_grid(&self, f: &GridFunction) -> Result<GridFunction>;

    /// Fourier symbol at integer wavenumber k (in units of 2 pi / L), when
    /// the operator has constant coefficients; None otherwise.
    fn constant_symbol(&self, _k: f64, _omega: f64) -> Option<Complex64> {
        None
    }
}

/// Solve Lop y = rhs on the periodic grid.
///
/// Free constants are fixed by the zero-mean convention; null directions the
/// right-hand side actually excites raise `Unsolvable` with the offending
/// residual, and a discretization with no usable pivots raises
/// `SingularOperator`.
pub fn solve_operator<L: LinearGridOperator + ?Sized>(
    op: &L,
    rhs: &GridFunction,
) -> Result<GridFunction> {
    let n = rhs.len();
    let omega = rhs.grid().omega();
    let scale = rhs.norm_sup().max(1e-300);

    if op.constant_symbol(0.0, omega).is_some() {
        // Symbol-division path.
        let mut buf: Vec<Complex64> = rhs
            .values()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        spectral::fft(&mut buf);
        let mut worst_blocked = 0.0_f64;
        for (j, v) in buf.iter_mut().enumerate() {
            let k = spectral::wavenumber(j, n) as f64;
            let sym = op
                .constant_symbol(k, omega)
                .expect("symbol available for all modes");
            if sym.norm() < 1e-12 {
                let mag = v.norm() / n as f64;
                if mag > SOLVABILITY_TOL * scale {
                    worst_blocked = worst_blocked.max(mag / scale);
                }
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v /= sym;
            }
        }
        if worst_blocked > 0.0 {
            return Err(Error::Unsolvable {
                residual: worst_blocked,
                detail: "right-hand side excites the operator kernel".into(),
            });
        }
        spectral::ifft(&mut buf);
        return GridFunction::new(rhs.grid().clone(), buf.into_iter().map(|c| c.re).collect());
    }

    // Dense path: assemble column by column.
    let grid = rhs.grid().clone();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let img = op.apply_grid(&GridFunction::new(grid.clone(), e)?)?;
        for (row, &v) in img.values().iter().enumerate() {
            a[(row, col)] = v;
        }
    }
    let b = DVector::from_column_slice(rhs.values());
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return Err(Error::SingularOperator("operator is identically zero".into()));
    }
    let cut = smax * 1e-10 * (n as f64);
    // Compatibility: components of rhs along near-null left singular vectors.
    let u = svd.u.as_ref().expect("svd with u");
    let mut incompat = 0.0_f64;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cut {
            let proj = u.column(i).dot(&b) * grid.dx().sqrt();
            incompat = incompat.max(proj.abs() / scale);
        }
    }
    if incompat > SOLVABILITY_TOL {
        return Err(Error::Unsolvable {
            residual: incompat,
            detail: "right-hand side excites a singular direction".into(),
        });
    }
    let y = svd
        .solve(&b, cut)
        .map_err(|e| Error::SingularOperator(e.to_string()))?;
    let mut vals: Vec<f64> = y.iter().cloned().collect();
    // Zero-mean convention when constants lie in the kernel.
    let ones = GridFunction::constant(grid.clone(), 1.0)?;
    let on_ones = op.apply_grid(&ones)?;
    if on_ones.norm_sup() < 1e-10 * smax {
        let mean = vals.iter().sum::<f64>() / n as f64;
        for v in vals.iter_mut() {
            *v -= mean;
        }
    }
    let solution = GridFunction::new(grid, vals)?;
    let residual = op.apply_grid(&solution)?.sub(rhs)?.norm_sup();
    if residual > 1e-7 * scale {
        return Err(Error::SingularOperator(format!(
            "solve residual {residual:.3e} exceeds tolerance"
        )));
    }
    Ok(solution)
}
