//! Lie-algebra-valued grid functions: one m x m matrix per node, optionally
//! carrying a spectral parameter.

use crate::error::{Error, Result};
use crate::numerics::{GridFunction, PeriodicGrid};
use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct MatrixField {
    grid: PeriodicGrid,
    rows: usize,
    cols: usize,
    values: Vec<DMatrix<f64>>,
    pub lambda: Option<f64>,
}

impl MatrixField {
    pub fn new(grid: PeriodicGrid, values: Vec<DMatrix<f64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "grid has {} points, {} matrices supplied",
                grid.len(),
                values.len()
            )));
        }
        let (rows, cols) = (values[0].nrows(), values[0].ncols());
        for m in &values {
            if m.nrows() != rows || m.ncols() != cols {
                return Err(Error::ShapeMismatch("inconsistent matrix shapes".into()));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite matrix entry".into()));
            }
        }
        Ok(MatrixField { grid, rows, cols, values, lambda: None })
    }

    pub fn from_fn(
        grid: PeriodicGrid,
        rows: usize,
        cols: usize,
        f: impl Fn(usize) -> DMatrix<f64>,
    ) -> Result<Self> {
        let values: Vec<DMatrix<f64>> = (0..grid.len()).map(f).collect();
        let mut out = Self::new(grid, values)?;
        if out.rows != rows || out.cols != cols {
            return Err(Error::ShapeMismatch("builder produced wrong shape".into()));
        }
        out.lambda = None;
        Ok(out)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn values(&self) -> &[DMatrix<f64>] {
        &self.values
    }

    pub fn value(&self, j: usize) -> &DMatrix<f64> {
        &self.values[j]
    }

    /// Scalar series of one entry.
    pub fn entry(&self, r: usize, c: usize) -> Result<GridFunction> {
        GridFunction::new(
            self.grid.clone(),
            self.values.iter().map(|m| m[(r, c)]).collect(),
        )
    }

    /// Entrywise spectral derivative (entries must be periodic).
    pub fn derivative(&self, order: u32) -> Result<MatrixField> {
        let mut out = vec![DMatrix::zeros(self.rows, self.cols); self.grid.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let d = self.entry(r, c)?.derivative(order)?;
                for (j, v) in d.values().iter().enumerate() {
                    out[j][(r, c)] = *v;
                }
            }
        }
        let mut field = MatrixField::new(self.grid.clone(), out)?;
        field.lambda = self.lambda;
        Ok(field)
    }

    /// Pointwise map of the matrices.
    pub fn map(&self, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>) -> Result<MatrixField> {
        let mut field = MatrixField::new(self.grid.clone(), self.values.iter().map(f).collect())?;
        field.lambda = self.lambda;
        Ok(field)
    }

    pub fn zip(
        &self,
        other: &MatrixField,
        f: impl Fn(&DMatrix<f64>, &DMatrix<f64>) -> DMatrix<f64>,
    ) -> Result<MatrixField> {
        self.grid.check_same(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| f(a, b))
            .collect();
        MatrixField::new(self.grid.clone(), values)
    }

    pub fn sub(&self, other: &MatrixField) -> Result<MatrixField> {
        self.zip(other, |a, b| a - b)
    }

    /// Max absolute entry over all nodes.
    pub fn norm_sup(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|m| m.iter())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Largest |trace| over the field.
    pub fn max_trace(&self) -> f64 {
        self.values
            .iter()
            .map(|m| m.trace().abs())
            .fold(0.0_f64, f64::max)
    }

    /// Largest deviation from skew-symmetry.
    pub fn max_symmetric_part(&self) -> f64 {
        self.values
            .iter()
            .map(|m| (m + m.transpose()).abs().max())
            .fold(0.0_f64, f64::max)
    }
}
