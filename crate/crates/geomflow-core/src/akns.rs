//! Zero-curvature (AKNS) pairs and their compatibility residuals.
//!
//! A pair (A, B) sampled along a recorded trajectory is checked against
//! A_t = B_x + [B, A]: time derivatives by 5-point stencils over the stored
//! snapshots, space derivatives spectrally, the commutator pointwise.

use crate::curves::{EuclideanCurve, ProjectiveCurve};
use crate::error::{Error, Result};
use crate::frames::frenet_frame;
use crate::invariants::{curvature_torsion, schwarzian};
use crate::numerics::MatrixField;
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraTag {
    Sl2,
    So3,
}

/// A and B matrix fields sampled at uniformly spaced snapshot times.
#[derive(Debug, Clone)]
pub struct AknsPair {
    pub times: Vec<f64>,
    pub a: Vec<MatrixField>,
    pub b: Vec<MatrixField>,
    pub lambda: f64,
    pub algebra: AlgebraTag,
}

impl AknsPair {
    pub fn new(
        times: Vec<f64>,
        a: Vec<MatrixField>,
        b: Vec<MatrixField>,
        lambda: f64,
        algebra: AlgebraTag,
    ) -> Result<Self> {
        if times.len() != a.len() || times.len() != b.len() {
            return Err(Error::ShapeMismatch("times/A/B length mismatch".into()));
        }
        Ok(AknsPair { times, a, b, lambda, algebra })
    }

    /// Negative control: flip the sign of B.
    pub fn corrupted_b(&self) -> AknsPair {
        let mut out = self.clone();
        out.b = self
            .b
            .iter()
            .map(|f| f.map(|m| -m).expect("same shape"))
            .collect();
        out
    }

    /// Largest |trace A| over all snapshots (sl(2) sanity).
    pub fn max_trace_a(&self) -> f64 {
        self.a.iter().map(|f| f.max_trace()).fold(0.0_f64, f64::max)
    }

    /// Conjugate both matrices by a constant gauge.
    pub fn gauge(&self, g: &DMatrix<f64>) -> Result<AknsPair> {
        let conj = |fields: &[MatrixField]| -> Result<Vec<MatrixField>> {
            fields.iter().map(|f| gauge_transform_constant(f, g)).collect()
        };
        Ok(AknsPair {
            times: self.times.clone(),
            a: conj(&self.a)?,
            b: conj(&self.b)?,
            lambda: self.lambda,
            algebra: self.algebra,
        })
    }
}

/// Constant gauge: K -> g K g^{-1}.
pub fn gauge_transform_constant(k: &MatrixField, g: &DMatrix<f64>) -> Result<MatrixField> {
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::SingularOperator("singular gauge matrix".into()))?;
    k.map(|m| g * m * &g_inv)
}

/// x-dependent gauge (Kac-Moody action on right frames):
/// K -> g_x g^{-1} + g K g^{-1}, with g sampled as a periodic matrix field.
pub fn gauge_transform(k: &MatrixField, g: &MatrixField) -> Result<MatrixField> {
    k.grid().check_same(g.grid())?;
    let gx = g.derivative(1)?;
    let n = k.grid().len();
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        let gj = g.value(j);
        let g_inv = gj
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularOperator(format!("singular gauge at node {j}")))?;
        out.push(gx.value(j) * &g_inv + gj * k.value(j) * &g_inv);
    }
    MatrixField::new(k.grid().clone(), out)
}

/// The KdV pair on a Schwarzian trajectory:
///
/// A = [[-lambda, -1], [-q, lambda]],
/// B = [[-q_x/2 - lambda q + 2 lambda^3, -q + 2 lambda^2],
///      [q_xx/2 + lambda q_x + q(-q + 2 lambda^2), q_x/2 + lambda q - 2 lambda^3]]
///
/// with q = -(S(u)/2 + lambda^2). That sign makes A identical to the PSL(2)
/// Serret-Frenet matrix and B identical to the induced t-evolution of the
/// frame under u_t = u'(-S/2 - 3 lambda^2); the compatibility residual
/// selects this convention and rejects the alternatives.
pub fn kdv_akns_pair(history: &[(f64, ProjectiveCurve)], lambda: f64) -> Result<AknsPair> {
    if history.is_empty() {
        return Err(Error::InsufficientSnapshots { needed: 1, got: 0 });
    }
    let mut times = Vec::with_capacity(history.len());
    let mut a_fields = Vec::with_capacity(history.len());
    let mut b_fields = Vec::with_capacity(history.len());
    for (t, u) in history {
        let s = schwarzian(u)?.s;
        let q = s.map(|v| -(0.5 * v + lambda * lambda))?;
        let qx = q.derivative(1)?;
        let qxx = q.derivative(2)?;
        let grid = u.grid().clone();
        let a = MatrixField::from_fn(grid.clone(), 2, 2, |j| {
            DMatrix::from_row_slice(2, 2, &[-lambda, -1.0, -q.values()[j], lambda])
        })?
        .with_lambda(lambda);
        let b = MatrixField::from_fn(grid, 2, 2, |j| {
            let (qv, qxv, qxxv) = (q.values()[j], qx.values()[j], qxx.values()[j]);
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    -0.5 * qxv - lambda * qv + 2.0 * lambda.powi(3),
                    -qv + 2.0 * lambda * lambda,
                    0.5 * qxxv + lambda * qxv + qv * (-qv + 2.0 * lambda * lambda),
                    0.5 * qxv + lambda * qv - 2.0 * lambda.powi(3),
                ],
            )
        })?
        .with_lambda(lambda);
        times.push(*t);
        a_fields.push(a);
        b_fields.push(b);
    }
    AknsPair::new(times, a_fields, b_fields, lambda, AlgebraTag::Sl2)
}

/// The Euclidean/NLS-side pair: A is the printed so(3) matrix with kappa and
/// tau - lambda entries; B is measured numerically as (d/dt Theta^T) Theta
/// from the Frenet frame history (the right so(3) frame is Theta^T), by the
/// same 5-point stencil. Only interior snapshot times carry a B sample, so
/// the returned pair is trimmed by two snapshots on each side.
pub fn euclidean_akns_pair(history: &[(f64, EuclideanCurve)], lambda: f64) -> Result<AknsPair> {
    if history.len() < 9 {
        return Err(Error::InsufficientSnapshots { needed: 9, got: history.len() });
    }
    let dt = history[1].0 - history[0].0;
    check_uniform_times(&history.iter().map(|(t, _)| *t).collect::<Vec<_>>())?;
    let n = history[0].1.grid().len();
    let grid = history[0].1.grid().clone();

    let mut a_all = Vec::with_capacity(history.len());
    let mut frames = Vec::with_capacity(history.len());
    for (_, c) in history {
        grid.check_same(c.grid())?;
        let inv = curvature_torsion(c)?;
        let a = MatrixField::from_fn(grid.clone(), 3, 3, |j| {
            let (k, t) = (inv.kappa.values()[j], inv.tau.values()[j]);
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    0.0,
                    k,
                    0.0,
                    -k,
                    0.0,
                    t - lambda,
                    0.0,
                    -(t - lambda),
                    0.0,
                ],
            )
        })?
        .with_lambda(lambda);
        a_all.push(a);
        let f = frenet_frame(c)?;
        let thetas: Vec<nalgebra::Matrix3<f64>> =
            (0..n).map(|j| f.rotation_at(j).transpose()).collect();
        frames.push(thetas);
    }

    let m = history.len();
    let mut times = Vec::new();
    let mut a_fields = Vec::new();
    let mut b_fields = Vec::new();
    for i in 2..m - 2 {
        let b = MatrixField::from_fn(grid.clone(), 3, 3, |j| {
            let d_theta = (frames[i - 2][j] - frames[i + 2][j]
                + (frames[i + 1][j] - frames[i - 1][j]) * 8.0)
                / (12.0 * dt);
            let b3 = d_theta * frames[i][j].transpose();
            DMatrix::from_fn(3, 3, |r, c| b3[(r, c)])
        })?
        .with_lambda(lambda);
        times.push(history[i].0);
        a_fields.push(a_all[i].clone());
        b_fields.push(b);
    }
    AknsPair::new(times, a_fields, b_fields, lambda, AlgebraTag::So3)
}

fn check_uniform_times(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::InsufficientSnapshots { needed: 2, got: times.len() });
    }
    let dt = times[1] - times[0];
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-12) {
            return Err(Error::InvalidInput("snapshots are not uniformly spaced".into()));
        }
    }
    Ok(dt)
}

/// Compatibility report for one pair.
#[derive(Debug, Clone)]
pub struct ZeroCurvatureReport {
    pub lambda: f64,
    /// max over interior snapshots and grid nodes of |A_t - B_x - [B, A]|.
    pub residual: f64,
    /// (time, residual) per interior snapshot.
    pub per_time: Vec<(f64, f64)>,
}

/// Residual matrix field A_t - B_x - [B, A] at interior snapshot index i
/// (2 <= i <= len - 3).
pub fn zero_curvature_field(pair: &AknsPair, i: usize) -> Result<MatrixField> {
    let m = pair.times.len();
    if m < 5 || i < 2 || i + 2 >= m {
        return Err(Error::InsufficientSnapshots { needed: 5, got: m });
    }
    let dt = check_uniform_times(&pair.times)?;
    let a_t = pair.a[i - 2]
        .sub(&pair.a[i + 2])?
        .zip(&pair.a[i + 1].sub(&pair.a[i - 1])?, |x, y| x + y * 8.0)?
        .map(|mtx| mtx / (12.0 * dt))?;
    let b_x = pair.b[i].derivative(1)?;
    let n = pair.a[i].grid().len();
    let mut vals = Vec::with_capacity(n);
    for j in 0..n {
        let comm =
            pair.b[i].value(j) * pair.a[i].value(j) - pair.a[i].value(j) * pair.b[i].value(j);
        vals.push(a_t.value(j) - b_x.value(j) - comm);
    }
    MatrixField::new(pair.a[i].grid().clone(), vals)
}

/// Evaluate ||A_t - B_x - [B, A]||_inf over the interior of the space-time
/// sampling. Needs at least 5 uniformly spaced snapshots.
pub fn zero_curvature_residual(pair: &AknsPair) -> Result<ZeroCurvatureReport> {
    let m = pair.times.len();
    if m < 5 {
        return Err(Error::InsufficientSnapshots { needed: 5, got: m });
    }
    let dt = check_uniform_times(&pair.times)?;
    let mut per_time = Vec::new();
    let mut worst = 0.0_f64;
    for i in 2..m - 2 {
        let a_t = pair.a[i - 2]
            .sub(&pair.a[i + 2])?
            .zip(&pair.a[i + 1].sub(&pair.a[i - 1])?, |x, y| x + y * 8.0)?
            .map(|mtx| mtx / (12.0 * dt))?;
        let b_x = pair.b[i].derivative(1)?;
        let mut local = 0.0_f64;
        for j in 0..pair.a[i].grid().len() {
            let comm = pair.b[i].value(j) * pair.a[i].value(j)
                - pair.a[i].value(j) * pair.b[i].value(j);
            let res = a_t.value(j) - b_x.value(j) - comm;
            local = local.max(res.abs().max());
        }
        per_time.push((pair.times[i], local));
        worst = worst.max(local);
    }
    Ok(ZeroCurvatureReport { lambda: pair.lambda, residual: worst, per_time })
}
