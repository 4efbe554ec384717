//! Fields of the form f(x) = p(x) + x s(x) with p, s periodic.
//!
//! Quantities built from curves with translation monodromy (projective
//! curves, star-shaped lifts, frame entries containing u itself) are of this
//! shape; spectral calculus applies to the periodic pieces and the secular
//! part is differentiated by the product rule.

use crate::error::Result;
use crate::numerics::GridFunction;

#[derive(Debug, Clone)]
pub struct SecularField {
    pub periodic: GridFunction,
    pub secular: GridFunction,
}

impl SecularField {
    pub fn new(periodic: GridFunction, secular: GridFunction) -> Result<Self> {
        periodic.grid().check_same(secular.grid())?;
        Ok(SecularField { periodic, secular })
    }

    pub fn from_periodic(periodic: GridFunction) -> Self {
        let secular = GridFunction::zeros(periodic.grid().clone());
        SecularField { periodic, secular }
    }

    /// Pointwise samples p(x_j) + x_j s(x_j).
    pub fn values(&self) -> Vec<f64> {
        let grid = self.periodic.grid();
        self.periodic
            .values()
            .iter()
            .zip(self.secular.values())
            .enumerate()
            .map(|(j, (&p, &s))| p + grid.point(j) * s)
            .collect()
    }

    /// d/dx (p + x s) = (p' + s) + x s'.
    pub fn derivative(&self) -> Result<SecularField> {
        let dp = self.periodic.derivative(1)?;
        let ds = self.secular.derivative(1)?;
        Ok(SecularField {
            periodic: dp.add(&self.secular)?,
            secular: ds,
        })
    }

    pub fn derivative_values(&self) -> Result<Vec<f64>> {
        Ok(self.derivative()?.values())
    }

    pub fn scale(&self, c: f64) -> SecularField {
        SecularField {
            periodic: self.periodic.scale(c),
            secular: self.secular.scale(c),
        }
    }

    pub fn add(&self, other: &SecularField) -> Result<SecularField> {
        Ok(SecularField {
            periodic: self.periodic.add(&other.periodic)?,
            secular: self.secular.add(&other.secular)?,
        })
    }

    /// Multiply by a purely periodic factor.
    pub fn mul_periodic(&self, f: &GridFunction) -> Result<SecularField> {
        Ok(SecularField {
            periodic: self.periodic.mul(f)?,
            secular: self.secular.mul(f)?,
        })
    }
}
