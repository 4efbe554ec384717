//! Periodic-grid calculus: spectral differentiation, quadrature,
//! antiderivatives, linear solves and the RK4 stepper used everywhere else.
//!
//! Everything here is a pure function of immutable inputs; cached FFT plans
//! are confined to the executing thread.

pub mod matrix_field;
pub mod rk4;
pub mod secular;
pub mod solve;
pub mod spectral;
pub mod windowed;

use crate::error::{Error, Result};
use rustfft::num_complex::Complex64;

pub use matrix_field::MatrixField;
pub use rk4::rk4_step;
pub use secular::SecularField;
pub use solve::{solve_operator, LinearGridOperator};

/// Uniform grid on [0, L) with periodic wrap-around.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    n: usize,
    length: f64,
}

impl PeriodicGrid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidInput(format!("grid needs n >= 8, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidInput(format!("period must be positive, got {length}")));
        }
        Ok(PeriodicGrid { n, length })
    }

    /// Standard grid of n points on [0, 2 pi).
    pub fn two_pi(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * std::f64::consts::PI)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Angular factor 2 pi / L.
    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    pub fn point(&self, j: usize) -> f64 {
        j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    pub fn check_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "expected n={}, L={}, got n={}, L={}",
                self.n, self.length, other.n, other.length
            )))
        }
    }
}

/// Real samples of a periodic function on a [`PeriodicGrid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "grid has {} points, {} values supplied",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        Ok(GridFunction { grid, values })
    }

    /// Sample a closure at the grid nodes.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|j| f(grid.point(j))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        let n = grid.len();
        GridFunction { grid, values: vec![0.0; n] }
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![c; n])
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// order-th spectral derivative; exact for band-limited data.
    pub fn derivative(&self, order: u32) -> Result<GridFunction> {
        if order == 0 || order > 5 {
            return Err(Error::UnsupportedOrder(order));
        }
        let mut buf: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        spectral::derivative_inplace(&mut buf, self.grid.omega(), order);
        GridFunction::new(self.grid.clone(), buf.into_iter().map(|c| c.re).collect())
    }

    /// Periodic trapezoid rule, spectrally accurate on smooth data.
    pub fn integrate(&self) -> f64 {
        self.grid.dx() * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// L2 pairing <f, g> = integral of f g.
    pub fn inner(&self, other: &GridFunction) -> Result<f64> {
        self.grid.check_same(other.grid()) ?;
        Ok(self.grid.dx()
            * self
                .values
                .iter()
                .zip(other.values())
                .map(|(a, b)| a * b)
                .sum::<f64>())
    }

    pub fn norm_l2(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Antiderivative F with F' = f and F(0) = base; a nonzero mean becomes
    /// the declared linear part of the result.
    pub fn antiderivative(&self, base: f64) -> Result<Antiderivative> {
        let mut buf: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mean = spectral::antiderivative_inplace(&mut buf, self.grid.omega());
        let mut vals: Vec<f64> = buf.into_iter().map(|c| c.re).collect();
        let shift = base - vals[0];
        for v in vals.iter_mut() {
            *v += shift;
        }
        Ok(Antiderivative {
            periodic: GridFunction::new(self.grid.clone(), vals)?,
            slope: mean.re,
        })
    }

    /// Zero every Fourier mode with |k| > n/3.
    pub fn dealias_23(&self) -> GridFunction {
        let mut buf: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        spectral::dealias_23_inplace(&mut buf);
        GridFunction {
            grid: self.grid.clone(),
            values: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Trigonometric interpolation at an arbitrary point.
    pub fn eval(&self, x: f64) -> f64 {
        spectral::eval_trig(&self.values, self.grid.length(), x)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
        GridFunction::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        self.grid.check_same(other.grid())?;
        GridFunction::new(
            self.grid.clone(),
            self.values
                .iter()
                .zip(other.values())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

/// Spectral antiderivative split into periodic part and linear slope:
/// F(x) = periodic(x) + slope * x.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    pub periodic: GridFunction,
    pub slope: f64,
}

impl Antiderivative {
    /// Pointwise values F(x_j) = periodic(x_j) + slope * x_j.
    pub fn values(&self) -> Vec<f64> {
        let grid = self.periodic.grid();
        self.periodic
            .values()
            .iter()
            .enumerate()
            .map(|(j, &p)| p + self.slope * grid.point(j))
            .collect()
    }

    /// Derivative values (periodic' + slope), again pointwise.
    pub fn derivative_values(&self) -> Result<Vec<f64>> {
        let d = self.periodic.derivative(1)?;
        Ok(d.values().iter().map(|&v| v + self.slope).collect())
    }
}

/// Complex samples of a periodic function.
#[derive(Debug, Clone)]
pub struct ComplexGridFunction {
    grid: PeriodicGrid,
    values: Vec<Complex64>,
}

impl ComplexGridFunction {
    pub fn new(grid: PeriodicGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "grid has {} points, {} values supplied",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample".into()));
        }
        Ok(ComplexGridFunction { grid, values })
    }

    pub fn from_parts(re: &GridFunction, im: &GridFunction) -> Result<Self> {
        re.grid().check_same(im.grid())?;
        Ok(ComplexGridFunction {
            grid: re.grid().clone(),
            values: re
                .values()
                .iter()
                .zip(im.values())
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn re(&self) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|c| c.re).collect(),
        }
    }

    pub fn im(&self) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|c| c.im).collect(),
        }
    }

    pub fn abs(&self) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|c| c.norm()).collect(),
        }
    }

    pub fn derivative(&self, order: u32) -> Result<ComplexGridFunction> {
        if order == 0 || order > 5 {
            return Err(Error::UnsupportedOrder(order));
        }
        let mut buf = self.values.clone();
        spectral::derivative_inplace(&mut buf, self.grid.omega(), order);
        ComplexGridFunction::new(self.grid.clone(), buf)
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.norm()))
    }

    pub fn norm_l2(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::two_pi(n).unwrap()
    }

    #[test]
    fn derivative_of_sine() {
        let f = GridFunction::from_fn(grid(64), |x| x.sin()).unwrap();
        let d = f.derivative(1).unwrap();
        let err = d
            .values()
            .iter()
            .enumerate()
            .map(|(j, v)| (v - d.grid().point(j).cos()).abs())
            .fold(0.0_f64, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let f = GridFunction::constant(grid(32), 4.2).unwrap();
        for order in 1..=5 {
            assert!(f.derivative(order).unwrap().norm_sup() < 1e-12);
        }
    }

    #[test]
    fn third_derivative_of_sin3x() {
        // analytic oracle: (sin 3x)''' = -27 cos 3x
        let f = GridFunction::from_fn(grid(64), |x| (3.0 * x).sin()).unwrap();
        let d = f.derivative(3).unwrap();
        let err = d
            .values()
            .iter()
            .enumerate()
            .map(|(j, v)| (v + 27.0 * (3.0 * d.grid().point(j)).cos()).abs())
            .fold(0.0_f64, f64::max);
        assert!(err < 1e-10, "err {err}");
    }

    #[test]
    fn unsupported_order_rejected() {
        let f = GridFunction::from_fn(grid(32), |x| x.sin()).unwrap();
        assert!(matches!(f.derivative(6), Err(crate::Error::UnsupportedOrder(6))));
        assert!(matches!(f.derivative(0), Err(crate::Error::UnsupportedOrder(0))));
    }

    #[test]
    fn non_finite_input_rejected() {
        let mut vals = vec![0.0; 32];
        vals[5] = f64::NAN;
        assert!(GridFunction::new(grid(32), vals).is_err());
    }

    #[test]
    fn integrals_of_reference_functions() {
        let pi = std::f64::consts::PI;
        let f = GridFunction::from_fn(grid(64), |x| x.sin()).unwrap();
        assert!(f.integrate().abs() < 1e-14);
        let g = GridFunction::constant(grid(64), 1.0).unwrap();
        assert!((g.integrate() - 2.0 * pi).abs() < 1e-12);
        // analytic oracle: integral of sin^2 over a period is pi
        let h = GridFunction::from_fn(grid(64), |x| x.sin().powi(2)).unwrap();
        assert!((h.integrate() - pi).abs() < 1e-12);
    }

    #[test]
    fn antiderivative_reference_cases() {
        let f = GridFunction::from_fn(grid(64), |x| x.cos()).unwrap();
        let a = f.antiderivative(0.0).unwrap();
        assert!(a.slope.abs() < 1e-14);
        let err = a
            .periodic
            .values()
            .iter()
            .enumerate()
            .map(|(j, v)| (v - a.periodic.grid().point(j).sin()).abs())
            .fold(0.0_f64, f64::max);
        assert!(err < 1e-12);

        let z = GridFunction::zeros(grid(64)).antiderivative(5.0).unwrap();
        assert!(z.slope.abs() < 1e-14);
        assert!(z.periodic.values().iter().all(|v| (v - 5.0).abs() < 1e-13));

        // analytic oracle: antiderivative of 1 + cos is x + sin, slope 1
        let g = GridFunction::from_fn(grid(64), |x| 1.0 + x.cos()).unwrap();
        let b = g.antiderivative(0.0).unwrap();
        assert!((b.slope - 1.0).abs() < 1e-13);
        let vals = b.values();
        for (j, v) in vals.iter().enumerate() {
            let x = b.periodic.grid().point(j);
            assert!((v - (x + x.sin())).abs() < 1e-12);
        }
    }

    #[test]
    fn derivative_of_antiderivative_roundtrip() {
        // band-limited f with nonzero mean
        let f = GridFunction::from_fn(grid(64), |x| 0.7 + x.sin() + 0.3 * (4.0 * x).cos()).unwrap();
        let a = f.antiderivative(1.3).unwrap();
        let d = a.derivative_values().unwrap();
        for (j, v) in d.iter().enumerate() {
            assert!((v - f.values()[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn integral_of_derivative_vanishes() {
        let f = GridFunction::from_fn(grid(64), |x| (2.0 * x).sin() * x.cos() + 0.4).unwrap();
        assert!(f.derivative(1).unwrap().integrate().abs() < 1e-12);
    }

    #[test]
    fn spectral_derivative_is_skew_adjoint() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let (a, b, c, d) = (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let f = GridFunction::from_fn(grid(64), |x| a * x.sin() + b * (3.0 * x).cos()).unwrap();
            let g = GridFunction::from_fn(grid(64), |x| c * (2.0 * x).sin() + d * (5.0 * x).cos())
                .unwrap();
            let lhs = f.derivative(1).unwrap().inner(&g).unwrap();
            let rhs = f.inner(&g.derivative(1).unwrap()).unwrap();
            assert!((lhs + rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn dealias_drops_top_third_of_modes() {
        let f = GridFunction::from_fn(grid(32), |x| x.sin() + 0.5 * (14.0 * x).cos()).unwrap();
        let g = f.dealias_23();
        let expect = GridFunction::from_fn(grid(32), |x| x.sin()).unwrap();
        assert!(g.sub(&expect).unwrap().norm_sup() < 1e-13);
    }

    #[test]
    fn advection_translates_sine() {
        // u_t = -u_x moves sin(x) to sin(x - t)
        let g = grid(64);
        let u0 = GridFunction::from_fn(g.clone(), |x| x.sin()).unwrap();
        let rhs = |s: &[f64]| -> crate::Result<Vec<f64>> {
            let u = GridFunction::new(PeriodicGrid::two_pi(64).unwrap(), s.to_vec())?;
            Ok(u.derivative(1)?.values().iter().map(|v| -v).collect())
        };
        let out = rk4::rk4_advance(u0.values(), &rhs, 1e-3, 100).unwrap();
        for (j, v) in out.iter().enumerate() {
            assert!((v - (g.point(j) - 0.1).sin()).abs() < 1e-6);
        }
    }
}
