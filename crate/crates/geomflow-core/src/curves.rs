//! Curve models for the four geometries: closed space curves, projective
//! reparametrizations with translation monodromy, planar star-shaped curves,
//! and curves of Lagrangian planes (symmetric-matrix curves).

use crate::error::{Error, Result};
use crate::numerics::{GridFunction, PeriodicGrid, SecularField};
use crate::tolerances::GENERICITY_TOL;
use nalgebra::DMatrix;

/// Closed curve in R^3 sampled on a periodic grid.
#[derive(Debug, Clone)]
pub struct EuclideanCurve {
    components: [GridFunction; 3],
}

impl EuclideanCurve {
    pub fn new(components: [GridFunction; 3]) -> Result<Self> {
        components[0].grid().check_same(components[1].grid())?;
        components[0].grid().check_same(components[2].grid())?;
        Ok(EuclideanCurve { components })
    }

    pub fn from_points(grid: PeriodicGrid, points: &[[f64; 3]]) -> Result<Self> {
        if points.len() != grid.len() {
            return Err(Error::ShapeMismatch("point count != grid size".into()));
        }
        let comp = |axis: usize| -> Result<GridFunction> {
            GridFunction::new(grid.clone(), points.iter().map(|p| p[axis]).collect())
        };
        Self::new([comp(0)?, comp(1)?, comp(2)?])
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> [f64; 3]) -> Result<Self> {
        let pts: Vec<[f64; 3]> = (0..grid.len()).map(|j| f(grid.point(j))).collect();
        Self::from_points(grid, &pts)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.components[0].grid()
    }

    pub fn component(&self, axis: usize) -> &GridFunction {
        &self.components[axis]
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        (0..self.grid().len())
            .map(|j| {
                [
                    self.components[0].values()[j],
                    self.components[1].values()[j],
                    self.components[2].values()[j],
                ]
            })
            .collect()
    }

    /// Component-wise spectral derivative of given order, as point triples.
    pub fn derivative(&self, order: u32) -> Result<Vec<[f64; 3]>> {
        let d: Vec<GridFunction> = self
            .components
            .iter()
            .map(|c| c.derivative(order))
            .collect::<Result<_>>()?;
        Ok((0..self.grid().len())
            .map(|j| [d[0].values()[j], d[1].values()[j], d[2].values()[j]])
            .collect())
    }

    /// Pointwise parametrization speed ||u'||.
    pub fn speed(&self) -> Result<GridFunction> {
        let d = self.derivative(1)?;
        GridFunction::new(
            self.grid().clone(),
            d.iter()
                .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
                .collect(),
        )
    }

    pub fn min_speed(&self) -> Result<f64> {
        Ok(self
            .speed()?
            .values()
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(*v)))
    }

    pub fn is_arclength(&self, tol: f64) -> Result<bool> {
        let s = self.speed()?;
        Ok(s.values().iter().all(|v| (v - 1.0).abs() <= tol))
    }

    pub fn total_length(&self) -> Result<f64> {
        Ok(self.speed()?.integrate())
    }
}

/// Reparametrization of RP^1 stored as slope plus periodic part:
/// u(x) = slope * x + p(x), so that u(x + L) = u(x) + slope * L.
#[derive(Debug, Clone)]
pub struct ProjectiveCurve {
    slope: f64,
    periodic: GridFunction,
}

impl ProjectiveCurve {
    pub fn new(slope: f64, periodic: GridFunction) -> Result<Self> {
        if !slope.is_finite() {
            return Err(Error::InvalidInput("slope must be finite".into()));
        }
        let c = ProjectiveCurve { slope, periodic };
        let min = c.min_derivative()?;
        if min <= GENERICITY_TOL {
            return Err(Error::DegenerateCurve(format!(
                "u' must stay positive, min {min:.3e}"
            )));
        }
        Ok(c)
    }

    pub fn from_fn(grid: PeriodicGrid, slope: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(slope, GridFunction::from_fn(grid, f)?)
    }

    /// The identity reparametrization u = x.
    pub fn identity(grid: PeriodicGrid) -> Result<Self> {
        Self::new(1.0, GridFunction::zeros(grid))
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.periodic.grid()
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn periodic_part(&self) -> &GridFunction {
        &self.periodic
    }

    /// Pointwise values u(x_j) = slope x_j + p(x_j).
    pub fn values(&self) -> Vec<f64> {
        self.periodic
            .values()
            .iter()
            .enumerate()
            .map(|(j, &p)| self.slope * self.grid().point(j) + p)
            .collect()
    }

    /// u', u'', ... as periodic grid functions (u' includes the slope).
    pub fn derivative(&self, order: u32) -> Result<GridFunction> {
        let d = self.periodic.derivative(order)?;
        if order == 1 {
            d.map(|v| v + self.slope)
        } else {
            Ok(d)
        }
    }

    pub fn min_derivative(&self) -> Result<f64> {
        Ok(self
            .derivative(1)?
            .values()
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(*v)))
    }

    pub fn as_secular(&self) -> Result<SecularField> {
        SecularField::new(
            self.periodic.clone(),
            GridFunction::constant(self.grid().clone(), self.slope)?,
        )
    }
}

/// Planar star-shaped curve, possibly closed only up to a unipotent
/// monodromy M: gamma(x + L) = M gamma(x).
///
/// Stored as gamma = per + x * sec with per, sec periodic 2-vector fields;
/// for lift-produced curves sec = (M - I) per / L.
#[derive(Debug, Clone)]
pub struct StarCurve {
    per: [GridFunction; 2],
    sec: [GridFunction; 2],
}

impl StarCurve {
    pub fn new(per: [GridFunction; 2], sec: [GridFunction; 2]) -> Result<Self> {
        per[0].grid().check_same(per[1].grid())?;
        per[0].grid().check_same(sec[0].grid())?;
        per[0].grid().check_same(sec[1].grid())?;
        Ok(StarCurve { per, sec })
    }

    /// Genuinely closed curve (identity monodromy).
    pub fn from_periodic_points(grid: PeriodicGrid, points: &[[f64; 2]]) -> Result<Self> {
        if points.len() != grid.len() {
            return Err(Error::ShapeMismatch("point count != grid size".into()));
        }
        let comp = |axis: usize| -> Result<GridFunction> {
            GridFunction::new(grid.clone(), points.iter().map(|p| p[axis]).collect())
        };
        let zero = GridFunction::zeros(grid.clone());
        StarCurve::new([comp(0)?, comp(1)?], [zero.clone(), zero])
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.per[0].grid()
    }

    pub fn component(&self, axis: usize) -> Result<SecularField> {
        SecularField::new(self.per[axis].clone(), self.sec[axis].clone())
    }

    pub fn parts(&self) -> (&[GridFunction; 2], &[GridFunction; 2]) {
        (&self.per, &self.sec)
    }

    /// gamma(x_j) pointwise.
    pub fn points(&self) -> Result<Vec<[f64; 2]>> {
        let a = self.component(0)?.values();
        let b = self.component(1)?.values();
        Ok(a.into_iter().zip(b).map(|(x, y)| [x, y]).collect())
    }

    /// Pointwise derivative values of given order for both components.
    pub fn derivative(&self, order: u32) -> Result<Vec<[f64; 2]>> {
        let mut fa = self.component(0)?;
        let mut fb = self.component(1)?;
        for _ in 0..order {
            fa = fa.derivative()?;
            fb = fb.derivative()?;
        }
        let a = fa.values();
        let b = fb.values();
        Ok(a.into_iter().zip(b).map(|(x, y)| [x, y]).collect())
    }

    /// Monodromy matrix M with gamma(x+L) = M gamma(x), least-squares fit of
    /// the nilpotent generator C in sec = C per; M = I + L C.
    pub fn monodromy(&self) -> Result<DMatrix<f64>> {
        let n = self.grid().len();
        let mut ata = nalgebra::Matrix2::<f64>::zeros();
        let mut atb = nalgebra::Matrix2::<f64>::zeros();
        for j in 0..n {
            let pv = nalgebra::Vector2::new(self.per[0].values()[j], self.per[1].values()[j]);
            let sv = nalgebra::Vector2::new(self.sec[0].values()[j], self.sec[1].values()[j]);
            ata += pv * pv.transpose();
            atb += sv * pv.transpose();
        }
        let c = atb
            * ata
                .try_inverse()
                .ok_or_else(|| Error::DegenerateCurve("monodromy fit is singular".into()))?;
        let m = nalgebra::Matrix2::identity() + c * self.grid().length();
        Ok(DMatrix::from_fn(2, 2, |r, col| m[(r, col)]))
    }

    /// det(gamma, gamma') pointwise (columns convention: det(a,b) = a1 b2 - a2 b1).
    pub fn det_gamma_gamma1(&self) -> Result<GridFunction> {
        let g = self.points()?;
        let d = self.derivative(1)?;
        GridFunction::new(
            self.grid().clone(),
            g.iter()
                .zip(&d)
                .map(|(a, b)| a[0] * b[1] - a[1] * b[0])
                .collect(),
        )
    }

    pub fn is_normalized(&self, tol: f64) -> Result<bool> {
        Ok(self
            .det_gamma_gamma1()?
            .values()
            .iter()
            .all(|v| (v - 1.0).abs() <= tol))
    }

    pub fn min_det(&self) -> Result<f64> {
        Ok(self
            .det_gamma_gamma1()?
            .values()
            .iter()
            .fold(f64::INFINITY, |m, v| m.min(v.abs())))
    }
}

pub const SYMMETRY_TOL: f64 = 1e-12;

/// Curve of Lagrangian planes: symmetric matrix samples with a linear part,
/// u(x) = x A + P(x), P periodic, so u' = A + P' can stay positive definite.
#[derive(Debug, Clone)]
pub struct LagrangianCurve {
    grid: PeriodicGrid,
    dim: usize,
    slope: DMatrix<f64>,
    periodic: Vec<DMatrix<f64>>,
}

impl LagrangianCurve {
    pub fn new(
        grid: PeriodicGrid,
        slope: DMatrix<f64>,
        periodic: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        if periodic.len() != grid.len() {
            return Err(Error::ShapeMismatch("matrix count != grid size".into()));
        }
        let dim = slope.nrows();
        if slope.ncols() != dim {
            return Err(Error::ShapeMismatch("slope matrix must be square".into()));
        }
        let sym_dev = |m: &DMatrix<f64>| (m - m.transpose()).abs().max();
        if sym_dev(&slope) > SYMMETRY_TOL {
            return Err(Error::InvalidInput("slope matrix not symmetric".into()));
        }
        for m in &periodic {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::ShapeMismatch("inconsistent matrix dimensions".into()));
            }
            if sym_dev(m) > SYMMETRY_TOL {
                return Err(Error::InvalidInput("sample matrix not symmetric".into()));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite matrix entry".into()));
            }
        }
        Ok(LagrangianCurve { grid, dim, slope, periodic })
    }

    /// Diagonal curve built from scalar projective curves.
    pub fn diagonal(curves: &[ProjectiveCurve]) -> Result<Self> {
        let dim = curves.len();
        let grid = curves[0].grid().clone();
        for c in curves {
            grid.check_same(c.grid())?;
        }
        let slope =
            DMatrix::from_fn(dim, dim, |r, c| if r == c { curves[r].slope() } else { 0.0 });
        let periodic = (0..grid.len())
            .map(|j| {
                DMatrix::from_fn(dim, dim, |r, c| {
                    if r == c {
                        curves[r].periodic_part().values()[j]
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        LagrangianCurve::new(grid, slope, periodic)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn slope(&self) -> &DMatrix<f64> {
        &self.slope
    }

    pub fn periodic_samples(&self) -> &[DMatrix<f64>] {
        &self.periodic
    }

    /// u(x_j) pointwise.
    pub fn values(&self) -> Vec<DMatrix<f64>> {
        self.periodic
            .iter()
            .enumerate()
            .map(|(j, p)| p + &self.slope * self.grid.point(j))
            .collect()
    }

    /// Derivative samples u^(order); the slope enters only at order 1.
    pub fn derivative(&self, order: u32) -> Result<Vec<DMatrix<f64>>> {
        let mut out = vec![DMatrix::zeros(self.dim, self.dim); self.grid.len()];
        for r in 0..self.dim {
            for c in 0..self.dim {
                let series = GridFunction::new(
                    self.grid.clone(),
                    self.periodic.iter().map(|m| m[(r, c)]).collect(),
                )?;
                let d = series.derivative(order)?;
                for (j, v) in d.values().iter().enumerate() {
                    out[j][(r, c)] = *v;
                }
            }
        }
        if order == 1 {
            for m in out.iter_mut() {
                *m += &self.slope;
            }
        }
        Ok(out)
    }

    /// Smallest eigenvalue of u' over the grid (genericity margin).
    pub fn min_u1_eigenvalue(&self) -> Result<f64> {
        let u1 = self.derivative(1)?;
        let mut min = f64::INFINITY;
        for m in &u1 {
            let sym = (m + m.transpose()).scale(0.5);
            let eig = sym.symmetric_eigen();
            for v in eig.eigenvalues.iter() {
                min = min.min(*v);
            }
        }
        Ok(min)
    }
}

/// Tagged curve for generic interfaces (flows, CLI).
#[derive(Debug, Clone)]
pub enum Curve {
    Euclidean(EuclideanCurve),
    Projective(ProjectiveCurve),
    Star(StarCurve),
    Lagrangian(LagrangianCurve),
}

impl Curve {
    pub fn geometry(&self) -> &'static str {
        match self {
            Curve::Euclidean(_) => "euclidean",
            Curve::Projective(_) => "projective",
            Curve::Star(_) => "star",
            Curve::Lagrangian(_) => "lagrangian",
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        match self {
            Curve::Euclidean(c) => c.grid(),
            Curve::Projective(c) => c.grid(),
            Curve::Star(c) => c.grid(),
            Curve::Lagrangian(c) => c.grid(),
        }
    }
}

/// Genericity diagnostics: per-geometry margins with pass/fail at `tolerance`.
#[derive(Debug, Clone)]
pub struct GenericityReport {
    pub geometry: &'static str,
    pub margins: Vec<(String, f64)>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Margins of the regularity/nondegeneracy conditions for any curve type.
pub fn check_generic(curve: &Curve) -> Result<GenericityReport> {
    let tolerance = GENERICITY_TOL;
    let mut margins = Vec::new();
    match curve {
        Curve::Euclidean(c) => {
            margins.push(("min_speed".to_string(), c.min_speed()?));
        }
        Curve::Projective(c) => {
            margins.push(("min_u1".to_string(), c.min_derivative()?));
        }
        Curve::Star(c) => {
            margins.push(("min_det".to_string(), c.min_det()?));
        }
        Curve::Lagrangian(c) => {
            margins.push(("min_u1_eigenvalue".to_string(), c.min_u1_eigenvalue()?));
        }
    }
    let pass = margins.iter().all(|(_, v)| *v > tolerance);
    Ok(GenericityReport { geometry: curve.geometry(), margins, tolerance, pass })
}

/// Resample a closed space curve by arc length.
///
/// The result keeps the node count, its period is the total length and the
/// speed is 1; inversion of the cumulative length uses a monotone-cubic seed
/// polished by Newton iterations on the spectral series.
pub fn reparametrize_arclength(c: &EuclideanCurve) -> Result<EuclideanCurve> {
    let n = c.grid().len();
    let min_speed = c.min_speed()?;
    if min_speed <= GENERICITY_TOL {
        return Err(Error::DegenerateCurve(format!(
            "curve is not regular: min speed {min_speed:.3e}"
        )));
    }
    let speed = c.speed()?;
    let arc = speed.antiderivative(0.0)?;
    let total = arc.slope * c.grid().length();
    let arc_values = arc.values();

    let mut knots_s: Vec<f64> = arc_values;
    knots_s.push(total);
    let mut knots_x: Vec<f64> = c.grid().points();
    knots_x.push(c.grid().length());
    let seed = FritschCarlson::new(&knots_s, &knots_x)?;

    let eval_arc = |x: f64| arc.periodic.eval(x) + arc.slope * x;
    let eval_speed = |x: f64| speed.eval(x);

    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let target = total * i as f64 / n as f64;
        let mut x = seed.eval(target).clamp(0.0, c.grid().length());
        for _ in 0..3 {
            x -= (eval_arc(x) - target) / eval_speed(x);
        }
        nodes.push(x);
    }

    let new_grid = PeriodicGrid::new(n, total)?;
    let comp = |axis: usize| -> Result<GridFunction> {
        GridFunction::new(
            new_grid.clone(),
            nodes.iter().map(|&x| c.component(axis).eval(x)).collect(),
        )
    };
    EuclideanCurve::new([comp(0)?, comp(1)?, comp(2)?])
}

/// Lift a projective curve to its star-shaped representative
/// gamma = (u')^{-1/2} (1, u), normalized to det(gamma, gamma') = 1.
///
/// The lift closes only up to the translation monodromy; the result stores
/// the unipotent matrix implicitly through its secular part.
pub fn projective_to_star(u: &ProjectiveCurve) -> Result<StarCurve> {
    let u1 = u.derivative(1)?;
    if u1.values().iter().any(|&v| v <= GENERICITY_TOL) {
        return Err(Error::DegenerateCurve("u' must stay positive for the lift".into()));
    }
    let a = u1.map(|v| v.powf(-0.5))?;
    let per0 = a.clone();
    let per1 = a.mul(u.periodic_part())?;
    let sec0 = GridFunction::zeros(u.grid().clone());
    let sec1 = a.scale(u.slope());
    StarCurve::new([per0, per1], [sec0, sec1])
}

/// Recover u = gamma_2 / gamma_1 from a star curve produced by the lift.
pub fn star_to_projective(c: &StarCurve, slope: f64) -> Result<ProjectiveCurve> {
    let g = c.points()?;
    let grid = c.grid().clone();
    let mut periodic = Vec::with_capacity(grid.len());
    for (j, p) in g.iter().enumerate() {
        if p[0].abs() < 1e-12 {
            return Err(Error::DegenerateCurve(format!(
                "gamma_1 vanishes at node {j}; u = gamma_2/gamma_1 undefined"
            )));
        }
        periodic.push(p[1] / p[0] - slope * grid.point(j));
    }
    ProjectiveCurve::new(slope, GridFunction::new(grid, periodic)?)
}

/// Monotone piecewise-cubic interpolant (Fritsch-Carlson slopes).
struct FritschCarlson {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl FritschCarlson {
    fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(Error::InvalidInput("need at least two knots".into()));
        }
        let mut deltas = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let dx = xs[i + 1] - xs[i];
            if dx <= 0.0 {
                return Err(Error::InvalidInput("knots must be strictly increasing".into()));
            }
            deltas.push((ys[i + 1] - ys[i]) / dx);
        }
        let mut slopes = vec![0.0; n];
        slopes[0] = deltas[0];
        slopes[n - 1] = deltas[n - 2];
        for i in 1..n - 1 {
            if deltas[i - 1] * deltas[i] <= 0.0 {
                slopes[i] = 0.0;
            } else {
                // weighted harmonic mean keeps the interpolant monotone
                let w1 = 2.0 * (xs[i + 1] - xs[i]) + (xs[i] - xs[i - 1]);
                let w2 = (xs[i + 1] - xs[i]) + 2.0 * (xs[i] - xs[i - 1]);
                slopes[i] = (w1 + w2) / (w1 / deltas[i - 1] + w2 / deltas[i]);
            }
        }
        Ok(FritschCarlson { xs: xs.to_vec(), ys: ys.to_vec(), slopes })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let i = match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).expect("finite knots"))
        {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + m0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + m1 * (t3 - t2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(n: usize, r: f64) -> EuclideanCurve {
        let grid = PeriodicGrid::new(n, 2.0 * std::f64::consts::PI * r).unwrap();
        EuclideanCurve::from_fn(grid, |s| [r * (s / r).cos(), r * (s / r).sin(), 0.0]).unwrap()
    }

    #[test]
    fn arclength_reparam_fixes_unit_circle() {
        let c = circle(64, 1.0);
        let r = reparametrize_arclength(&c).unwrap();
        for (a, b) in c.points().iter().zip(&r.points()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn arclength_reparam_rescales_radius_two_circle() {
        // sampled by angle: speed 2, period should become 4 pi
        let grid = PeriodicGrid::two_pi(64).unwrap();
        let c = EuclideanCurve::from_fn(grid, |t| [2.0 * t.cos(), 2.0 * t.sin(), 0.0]).unwrap();
        let r = reparametrize_arclength(&c).unwrap();
        assert!((r.grid().length() - 4.0 * std::f64::consts::PI).abs() < 1e-10);
        for v in r.speed().unwrap().values() {
            assert!((v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn arclength_reparam_of_ellipse_matches_quadrature() {
        let grid = PeriodicGrid::two_pi(256).unwrap();
        let c = EuclideanCurve::from_fn(grid, |t| [2.0 * t.cos(), t.sin(), 0.0]).unwrap();
        let r = reparametrize_arclength(&c).unwrap();
        for v in r.speed().unwrap().values() {
            assert!((v - 1.0).abs() < 1e-6, "speed {v}");
        }
        // independent oracle: composite Simpson quadrature of the analytic speed
        let f = |t: f64| (4.0 * t.sin().powi(2) + t.cos().powi(2)).sqrt();
        let oracle = simpson(&f, 0.0, 2.0 * std::f64::consts::PI, 1 << 14);
        assert!((r.grid().length() - oracle).abs() < 1e-8);
    }

    #[test]
    fn arclength_reparam_is_idempotent() {
        let grid = PeriodicGrid::two_pi(128).unwrap();
        let c = EuclideanCurve::from_fn(grid, |t| {
            [
                (1.0 + 0.2 * (2.0 * t).cos()) * t.cos(),
                (1.0 + 0.2 * (2.0 * t).cos()) * t.sin(),
                0.1 * (3.0 * t).sin(),
            ]
        })
        .unwrap();
        let r1 = reparametrize_arclength(&c).unwrap();
        let r2 = reparametrize_arclength(&r1).unwrap();
        assert!((r1.grid().length() - r2.grid().length()).abs() < 1e-8);
        for (a, b) in r1.points().iter().zip(&r2.points()) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-8);
            }
        }
    }

    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 0 { 2.0 } else { 4.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn lift_of_identity_has_unit_det() {
        let grid = PeriodicGrid::two_pi(64).unwrap();
        let u = ProjectiveCurve::identity(grid).unwrap();
        let star = projective_to_star(&u).unwrap();
        for (j, p) in star.points().unwrap().iter().enumerate() {
            assert!((p[0] - 1.0).abs() < 1e-12);
            assert!((p[1] - star.grid().point(j)).abs() < 1e-12);
        }
        for v in star.det_gamma_gamma1().unwrap().values() {
            assert!((v - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn lift_of_doubled_slope_still_normalized() {
        let grid = PeriodicGrid::two_pi(64).unwrap();
        let u = ProjectiveCurve::from_fn(grid, 2.0, |_| 0.0).unwrap();
        let star = projective_to_star(&u).unwrap();
        for v in star.det_gamma_gamma1().unwrap().values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lift_of_wavy_curve_normalized_and_invertible() {
        let grid = PeriodicGrid::two_pi(128).unwrap();
        let u = ProjectiveCurve::from_fn(grid, 1.0, |x| 0.1 * x.sin()).unwrap();
        let star = projective_to_star(&u).unwrap();
        // the numerical check itself is the oracle here
        for v in star.det_gamma_gamma1().unwrap().values() {
            assert!((v - 1.0).abs() < 1e-8);
        }
        let back = star_to_projective(&star, 1.0).unwrap();
        for (a, b) in back.values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-8);
        }
        // the lift's monodromy is the unipotent translation block
        let m = star.monodromy().unwrap();
        assert!((m[(0, 0)] - 1.0).abs() < 1e-8);
        assert!((m[(1, 0)] - star.grid().length()).abs() < 1e-6);
        assert!(m[(0, 1)].abs() < 1e-8);
    }

    #[test]
    fn genericity_pass_and_fail() {
        let good = Curve::Euclidean(circle(64, 1.0));
        let rep = check_generic(&good).unwrap();
        assert!(rep.pass);
        assert!((rep.margins[0].1 - 1.0).abs() < 1e-10);

        // figure-eight-like closed curve with a cusp: speed vanishes at t = 0
        let grid = PeriodicGrid::two_pi(128).unwrap();
        let cusp = EuclideanCurve::from_fn(grid, |t| {
            [
                t.cos() + (2.0 * t).cos() / 2.0,
                t.sin() - (2.0 * t).sin() / 2.0,
                0.0,
            ]
        })
        .unwrap();
        let rep = check_generic(&Curve::Euclidean(cusp)).unwrap();
        assert!(!rep.pass, "cusp curve should fail, margins {:?}", rep.margins);
    }

    #[test]
    fn lagrangian_genericity_margin_is_eigenvalue() {
        let grid = PeriodicGrid::two_pi(64).unwrap();
        let ua = ProjectiveCurve::from_fn(grid.clone(), 1.0, |x| 0.2 * x.sin()).unwrap();
        let ub = ProjectiveCurve::from_fn(grid, 2.0, |x| 0.3 * x.cos()).unwrap();
        let c = LagrangianCurve::diagonal(&[ua.clone(), ub]).unwrap();
        let rep = check_generic(&Curve::Lagrangian(c)).unwrap();
        assert!(rep.pass);
        // diagonal case: margin is the smallest scalar u'
        let expected = ua.min_derivative().unwrap();
        assert!((rep.margins[0].1 - expected).abs() < 1e-10);
    }

    #[test]
    fn constructors_reject_degenerate_data() {
        let grid = PeriodicGrid::two_pi(64).unwrap();
        // u' changes sign
        assert!(ProjectiveCurve::from_fn(grid.clone(), 0.0, |x| x.sin()).is_err());
        // non-symmetric Lagrangian sample
        let bad = vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]); 64];
        assert!(LagrangianCurve::new(grid, DMatrix::identity(2, 2), bad).is_err());
    }

    #[test]
    fn random_perturbations_within_margin_stay_generic() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let grid = PeriodicGrid::two_pi(64).unwrap();
        for _ in 0..10 {
            let a: f64 = rng.gen_range(-0.2..0.2);
            let b: f64 = rng.gen_range(-0.2..0.2);
            let u = ProjectiveCurve::from_fn(grid.clone(), 1.0, |x| {
                a * x.sin() + b * (2.0 * x).cos() / 2.0
            })
            .unwrap();
            assert!(check_generic(&Curve::Projective(u)).unwrap().pass);
        }
    }
}
