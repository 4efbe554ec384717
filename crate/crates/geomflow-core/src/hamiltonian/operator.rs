//! Differential operators as sums of composition chains of the primitives
//! d/dx, multiply-by-field and scalar, with block structure for systems.

use crate::error::{Error, Result};
use crate::numerics::{GridFunction, LinearGridOperator, PeriodicGrid};
use rustfft::num_complex::Complex64;

/// One factor of a composition chain.
#[derive(Debug, Clone)]
pub enum Primitive {
    /// d/dx (spectral).
    D,
    /// Multiplication by a named coefficient field.
    Mul { name: String, f: GridFunction },
    /// Multiplication by a constant.
    Scalar(f64),
}

impl Primitive {
    pub fn mul(name: impl Into<String>, f: GridFunction) -> Primitive {
        Primitive::Mul { name: name.into(), f }
    }

    fn label(&self) -> String {
        match self {
            Primitive::D => "D".to_string(),
            Primitive::Mul { name, .. } => format!("mul:{name}"),
            Primitive::Scalar(c) => format!("scalar:{c}"),
        }
    }
}

/// Composition chain, applied right to left: [a, b, c] f = a(b(c(f))).
#[derive(Debug, Clone)]
pub struct Chain(pub Vec<Primitive>);

impl Chain {
    fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let mut acc = f.clone();
        for p in self.0.iter().rev() {
            acc = match p {
                Primitive::D => acc.derivative(1)?,
                Primitive::Mul { f: coeff, .. } => acc.mul(coeff)?,
                Primitive::Scalar(c) => acc.scale(*c),
            };
        }
        Ok(acc)
    }

    /// Formal adjoint: reverse the factors; D* = -D, multiplications are
    /// self-adjoint.
    fn adjoint(&self) -> Chain {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        let mut sign = 1.0;
        for p in self.0.iter() {
            if matches!(p, Primitive::D) {
                sign = -sign;
            }
        }
        if sign < 0.0 {
            out.push(Primitive::Scalar(-1.0));
        }
        out.extend(self.0.iter().rev().cloned());
        Chain(out)
    }

    fn is_constant_coefficient(&self) -> bool {
        self.0.iter().all(|p| !matches!(p, Primitive::Mul { .. }))
    }

    fn symbol(&self, k: f64, omega: f64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for p in &self.0 {
            match p {
                Primitive::D => acc *= Complex64::new(0.0, k * omega),
                Primitive::Scalar(c) => acc *= *c,
                Primitive::Mul { .. } => unreachable!("symbol of variable coefficient"),
            }
        }
        acc
    }

    fn labels(&self) -> Vec<String> {
        self.0.iter().map(|p| p.label()).collect()
    }
}

/// Scalar operator: a sum of chains.
#[derive(Debug, Clone, Default)]
pub struct ScalarOperator {
    pub chains: Vec<Chain>,
}

impl ScalarOperator {
    pub fn zero() -> ScalarOperator {
        ScalarOperator { chains: Vec::new() }
    }

    pub fn from_chains(chains: Vec<Vec<Primitive>>) -> ScalarOperator {
        ScalarOperator { chains: chains.into_iter().map(Chain).collect() }
    }

    /// c * D^n as a single chain.
    pub fn scaled_dn(c: f64, n: usize) -> ScalarOperator {
        let mut chain = Vec::with_capacity(n + 1);
        if c != 1.0 {
            chain.push(Primitive::Scalar(c));
        }
        chain.extend(std::iter::repeat_with(|| Primitive::D).take(n));
        ScalarOperator { chains: vec![Chain(chain)] }
    }

    pub fn plus(mut self, other: ScalarOperator) -> ScalarOperator {
        self.chains.extend(other.chains);
        self
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let mut acc = GridFunction::zeros(f.grid().clone());
        for chain in &self.chains {
            acc = acc.add(&chain.apply(f)?)?;
        }
        Ok(acc)
    }

    pub fn adjoint(&self) -> ScalarOperator {
        ScalarOperator { chains: self.chains.iter().map(Chain::adjoint).collect() }
    }

    pub fn is_constant_coefficient(&self) -> bool {
        self.chains.iter().all(Chain::is_constant_coefficient)
    }

    pub fn symbol(&self, k: f64, omega: f64) -> Complex64 {
        self.chains.iter().map(|c| c.symbol(k, omega)).sum()
    }

    pub fn labels(&self) -> Vec<Vec<String>> {
        self.chains.iter().map(Chain::labels).collect()
    }
}

/// Block matrix of scalar operators; 1 x 1 for scalar Poisson structures.
#[derive(Debug, Clone)]
pub struct DiffOperator {
    rows: usize,
    cols: usize,
    blocks: Vec<ScalarOperator>,
    pub name: String,
}

impl DiffOperator {
    pub fn scalar(name: impl Into<String>, op: ScalarOperator) -> DiffOperator {
        DiffOperator { rows: 1, cols: 1, blocks: vec![op], name: name.into() }
    }

    pub fn from_blocks(
        name: impl Into<String>,
        blocks: Vec<Vec<ScalarOperator>>,
    ) -> Result<DiffOperator> {
        let rows = blocks.len();
        if rows == 0 {
            return Err(Error::ShapeMismatch("empty block operator".into()));
        }
        let cols = blocks[0].len();
        if blocks.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged block rows".into()));
        }
        Ok(DiffOperator {
            rows,
            cols,
            blocks: blocks.into_iter().flatten().collect(),
            name: name.into(),
        })
    }

    pub fn block_shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn block(&self, r: usize, c: usize) -> &ScalarOperator {
        &self.blocks[r * self.cols + c]
    }

    /// Apply to a vector of grid functions (length = block columns).
    pub fn apply(&self, input: &[GridFunction]) -> Result<Vec<GridFunction>> {
        if input.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "operator expects {} components, got {}",
                self.cols,
                input.len()
            )));
        }
        let grid = input[0].grid().clone();
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let mut acc = GridFunction::zeros(grid.clone());
            for (c, f) in input.iter().enumerate() {
                acc = acc.add(&self.block(r, c).apply(f)?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Scalar convenience wrapper.
    pub fn apply_scalar(&self, f: &GridFunction) -> Result<GridFunction> {
        if (self.rows, self.cols) != (1, 1) {
            return Err(Error::ShapeMismatch("operator is not scalar".into()));
        }
        Ok(self.apply(std::slice::from_ref(f))?.pop().expect("one output"))
    }

    /// Formal adjoint: block transpose with chain adjoints.
    pub fn adjoint(&self) -> DiffOperator {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for r in 0..self.cols {
            for c in 0..self.rows {
                blocks.push(self.block(c, r).adjoint());
            }
        }
        DiffOperator {
            rows: self.cols,
            cols: self.rows,
            blocks,
            name: format!("{}*", self.name),
        }
    }

    /// Chain-level description for audit and structural comparison:
    /// blocks in row-major order, each a list of label chains.
    pub fn dump(&self) -> serde_json::Value {
        let blocks: Vec<Vec<serde_json::Value>> = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| serde_json::json!(self.block(r, c).labels()))
                    .collect()
            })
            .collect();
        serde_json::json!({
            "name": self.name,
            "rows": self.rows,
            "cols": self.cols,
            "blocks": blocks,
        })
    }
}

impl LinearGridOperator for DiffOperator {
    fn apply_grid(&self, f: &GridFunction) -> Result<GridFunction> {
        self.apply_scalar(f)
    }

    fn constant_symbol(&self, k: f64, omega: f64) -> Option<Complex64> {
        if (self.rows, self.cols) == (1, 1) && self.blocks[0].is_constant_coefficient() {
            Some(self.blocks[0].symbol(k, omega))
        } else {
            None
        }
    }
}

/// Random band-limited trial field for adjoint tests.
pub fn random_band_limited(
    grid: &PeriodicGrid,
    rng: &mut impl rand::Rng,
    modes: usize,
) -> Result<GridFunction> {
    let omega = grid.omega();
    let coeffs: Vec<(f64, f64, f64)> = (1..=modes)
        .map(|m| (m as f64, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GridFunction::from_fn(grid.clone(), move |x| {
        coeffs
            .iter()
            .map(|(m, a, b)| a * (m * omega * x).sin() + b * (m * omega * x).cos())
            .sum()
    })
}
