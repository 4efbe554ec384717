//! Moving frames and their Serret-Frenet matrices: the classical Frenet
//! frame, the normalization-based PSL(2) frame with spectral parameter, and
//! the Euclidean group frame in affine form.

use crate::curves::{EuclideanCurve, ProjectiveCurve};
use crate::error::{Error, Result};
use crate::invariants::{curvature_torsion, schwarzian, EuclideanInvariants, FRAME_TOL};
use crate::numerics::{GridFunction, MatrixField, PeriodicGrid, SecularField};
use crate::tolerances::ARC_LENGTH_TOL;
use nalgebra::{DMatrix, Matrix2};

/// Classical orthonormal frame {T, N, B} along an arc-length curve.
#[derive(Debug, Clone)]
pub struct FrenetFrame {
    grid: PeriodicGrid,
    pub t: [GridFunction; 3],
    pub n: [GridFunction; 3],
    pub b: [GridFunction; 3],
}

impl FrenetFrame {
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn t_at(&self, j: usize) -> [f64; 3] {
        [self.t[0].values()[j], self.t[1].values()[j], self.t[2].values()[j]]
    }

    pub fn n_at(&self, j: usize) -> [f64; 3] {
        [self.n[0].values()[j], self.n[1].values()[j], self.n[2].values()[j]]
    }

    pub fn b_at(&self, j: usize) -> [f64; 3] {
        [self.b[0].values()[j], self.b[1].values()[j], self.b[2].values()[j]]
    }

    /// Rotation matrix (T N B) at node j, columns are the frame vectors.
    pub fn rotation_at(&self, j: usize) -> nalgebra::Matrix3<f64> {
        let (t, n, b) = (self.t_at(j), self.n_at(j), self.b_at(j));
        nalgebra::Matrix3::from_columns(&[
            nalgebra::Vector3::from_row_slice(&t),
            nalgebra::Vector3::from_row_slice(&n),
            nalgebra::Vector3::from_row_slice(&b),
        ])
    }

    /// Max deviation from orthonormality and right-handedness over the grid.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.grid.len() {
            let r = self.rotation_at(j);
            worst = worst.max((r.transpose() * r - nalgebra::Matrix3::identity()).abs().max());
            worst = worst.max((r.determinant() - 1.0).abs());
        }
        worst
    }

    /// Sup-norm residual of the Frenet relations T' = kN, N' = -kT + tB,
    /// B' = -tN against supplied invariants.
    pub fn frenet_relation_residual(&self, inv: &EuclideanInvariants) -> Result<f64> {
        let d = |f: &[GridFunction; 3]| -> Result<Vec<[f64; 3]>> {
            let dx: Vec<GridFunction> =
                f.iter().map(|c| c.derivative(1)).collect::<Result<_>>()?;
            Ok((0..self.grid.len())
                .map(|j| [dx[0].values()[j], dx[1].values()[j], dx[2].values()[j]])
                .collect())
        };
        let (dt, dn, db) = (d(&self.t)?, d(&self.n)?, d(&self.b)?);
        let mut worst = 0.0_f64;
        for j in 0..self.grid.len() {
            let (k, tau) = (inv.kappa.values()[j], inv.tau.values()[j]);
            let (t, n, b) = (self.t_at(j), self.n_at(j), self.b_at(j));
            for a in 0..3 {
                worst = worst.max((dt[j][a] - k * n[a]).abs());
                worst = worst.max((dn[j][a] + k * t[a] - tau * b[a]).abs());
                worst = worst.max((db[j][a] + tau * n[a]).abs());
            }
        }
        Ok(worst)
    }
}

/// T = u', N = u''/kappa, B = T x N on an arc-length curve.
pub fn frenet_frame(c: &EuclideanCurve) -> Result<FrenetFrame> {
    if !c.is_arclength(ARC_LENGTH_TOL)? {
        return Err(Error::Precondition(
            "curve is not arc-length parametrized; call reparametrize_arclength first".into(),
        ));
    }
    let u1 = c.derivative(1)?;
    let u2 = c.derivative(2)?;
    let n_pts = c.grid().len();
    let mut t = vec![[0.0; 3]; n_pts];
    let mut n = vec![[0.0; 3]; n_pts];
    let mut b = vec![[0.0; 3]; n_pts];
    for j in 0..n_pts {
        let k = (u2[j][0].powi(2) + u2[j][1].powi(2) + u2[j][2].powi(2)).sqrt();
        if k < FRAME_TOL {
            return Err(Error::FrameDegenerate(format!(
                "kappa = {k:.3e} at node {j}; Frenet frame undefined"
            )));
        }
        t[j] = u1[j];
        n[j] = [u2[j][0] / k, u2[j][1] / k, u2[j][2] / k];
        b[j] = [
            t[j][1] * n[j][2] - t[j][2] * n[j][1],
            t[j][2] * n[j][0] - t[j][0] * n[j][2],
            t[j][0] * n[j][1] - t[j][1] * n[j][0],
        ];
    }
    let comp = |pts: &Vec<[f64; 3]>, axis: usize| -> Result<GridFunction> {
        GridFunction::new(c.grid().clone(), pts.iter().map(|p| p[axis]).collect())
    };
    Ok(FrenetFrame {
        grid: c.grid().clone(),
        t: [comp(&t, 0)?, comp(&t, 1)?, comp(&t, 2)?],
        n: [comp(&n, 0)?, comp(&n, 1)?, comp(&n, 2)?],
        b: [comp(&b, 0)?, comp(&b, 1)?, comp(&b, 2)?],
    })
}

/// The explicit PSL(2) right moving frame determined by the normalization
/// equations rho.u = 0, rho.u_1 = 1, rho.u_2 = 2 lambda:
///
/// rho = [[1,0],[u_2/(2u_1) - lambda, 1]] [[u_1^{-1/2},0],[0,u_1^{1/2}]] [[1,-u],[0,1]]
///
/// Entries containing u itself have a secular part (translation monodromy).
#[derive(Debug, Clone)]
pub struct PSL2Frame {
    pub a: SecularField,
    pub b: SecularField,
    pub c: SecularField,
    pub d: SecularField,
    pub lambda: f64,
}

pub fn psl2_frame(u: &ProjectiveCurve, lambda: f64) -> Result<PSL2Frame> {
    let grid = u.grid().clone();
    let u1 = u.derivative(1)?;
    if u1.values().iter().any(|&v| v <= 0.0) {
        return Err(Error::DegenerateCurve("u' must stay positive".into()));
    }
    let u2 = u.derivative(2)?;
    let p = u.periodic_part();
    let m = u.slope();

    let a = u1.map(|v| v.powf(-0.5))?;
    let sqrt_u1 = u1.map(|v| v.sqrt())?;
    let w = u2.zip(&u1, |n2, n1| 0.5 * n2 / n1)?.map(|v| v - lambda)?;

    let zero = GridFunction::zeros(grid);
    let b_per = p.mul(&a)?.scale(-1.0);
    let b_sec = a.scale(-m);
    let c_per = w.mul(&a)?;
    let wa = c_per.clone();
    let d_per = sqrt_u1.sub(&p.mul(&wa)?)?;
    let d_sec = wa.scale(-m);

    Ok(PSL2Frame {
        a: SecularField::new(a, zero.clone())?,
        b: SecularField::new(b_per, b_sec)?,
        c: SecularField::new(c_per, zero)?,
        d: SecularField::new(d_per, d_sec)?,
        lambda,
    })
}

impl PSL2Frame {
    pub fn grid(&self) -> &PeriodicGrid {
        self.a.periodic.grid()
    }

    /// Frame matrices at every node.
    pub fn matrices(&self) -> Vec<Matrix2<f64>> {
        let (a, b) = (self.a.values(), self.b.values());
        let (c, d) = (self.c.values(), self.d.values());
        (0..a.len())
            .map(|j| Matrix2::new(a[j], b[j], c[j], d[j]))
            .collect()
    }

    /// x-derivative of the frame at every node.
    pub fn derivative_matrices(&self) -> Result<Vec<Matrix2<f64>>> {
        let da = self.a.derivative_values()?;
        let db = self.b.derivative_values()?;
        let dc = self.c.derivative_values()?;
        let dd = self.d.derivative_values()?;
        Ok((0..da.len())
            .map(|j| Matrix2::new(da[j], db[j], dc[j], dd[j]))
            .collect())
    }

    /// Max |det - 1| over the grid.
    pub fn det_residual(&self) -> f64 {
        self.matrices()
            .iter()
            .map(|m| (m.determinant() - 1.0).abs())
            .fold(0.0_f64, f64::max)
    }

    /// Residuals of the three normalization equations, sup over the grid:
    /// (rho.u, rho.u_1 - 1, rho.u_2 - 2 lambda) under the prolonged
    /// fractional-linear action.
    pub fn normalization_residual(&self, u: &ProjectiveCurve) -> Result<[f64; 3]> {
        let vals = u.values();
        let u1 = u.derivative(1)?;
        let u2 = u.derivative(2)?;
        let (a, b) = (self.a.values(), self.b.values());
        let (c, d) = (self.c.values(), self.d.values());
        let mut worst = [0.0_f64; 3];
        for j in 0..vals.len() {
            let phi = c[j] * vals[j] + d[j];
            let r0 = (a[j] * vals[j] + b[j]) / phi;
            let r1 = u1.values()[j] / (phi * phi) - 1.0;
            let r2 = u2.values()[j] / (phi * phi)
                - 2.0 * c[j] * u1.values()[j].powi(2) / (phi * phi * phi)
                - 2.0 * self.lambda;
            worst[0] = worst[0].max(r0.abs());
            worst[1] = worst[1].max(r1.abs());
            worst[2] = worst[2].max(r2.abs());
        }
        Ok(worst)
    }
}

/// Build the PSL(2) frame from pointwise jet values (u, u_1, u_2); used for
/// equivariance checks where the transformed curve has fractional-linear
/// monodromy and no grid representation.
pub fn psl2_frame_from_jet(u: f64, u1: f64, u2: f64, lambda: f64) -> Matrix2<f64> {
    let a = u1.powf(-0.5);
    let w = 0.5 * u2 / u1 - lambda;
    Matrix2::new(a, -u * a, w * a, u1.sqrt() - u * w * a)
}

/// Which geometry a Serret-Frenet matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameGeometry {
    Psl2,
    Euclidean,
}

/// K with rho_x = K rho (right frames) or rho_x = rho K (left frames),
/// together with the measured consistency residual.
#[derive(Debug, Clone)]
pub struct SerretFrenetMatrix {
    pub k: MatrixField,
    pub geometry: FrameGeometry,
    pub verification_residual: f64,
}

/// K = [[-lambda, -1], [S(u)/2 + lambda^2, lambda]] for the PSL(2) frame,
/// verified against the spectral derivative of the frame itself.
pub fn psl2_serret_frenet(frame: &PSL2Frame, u: &ProjectiveCurve) -> Result<SerretFrenetMatrix> {
    let lambda = frame.lambda;
    let s = schwarzian(u)?.s;
    let grid = u.grid().clone();
    let k = MatrixField::from_fn(grid, 2, 2, |j| {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                -lambda,
                -1.0,
                0.5 * s.values()[j] + lambda * lambda,
                lambda,
            ],
        )
    })?
    .with_lambda(lambda);

    let rho = frame.matrices();
    let rho_x = frame.derivative_matrices()?;
    let mut residual = 0.0_f64;
    for j in 0..rho.len() {
        let kj = k.value(j);
        let pred = Matrix2::new(
            kj[(0, 0)] * rho[j][(0, 0)] + kj[(0, 1)] * rho[j][(1, 0)],
            kj[(0, 0)] * rho[j][(0, 1)] + kj[(0, 1)] * rho[j][(1, 1)],
            kj[(1, 0)] * rho[j][(0, 0)] + kj[(1, 1)] * rho[j][(1, 0)],
            kj[(1, 0)] * rho[j][(0, 1)] + kj[(1, 1)] * rho[j][(1, 1)],
        );
        residual = residual.max((rho_x[j] - pred).abs().max());
    }
    if residual > 1e-4 {
        return Err(Error::Inconsistency(format!(
            "||rho_x - K rho|| = {residual:.3e}: discretization breakdown"
        )));
    }
    Ok(SerretFrenetMatrix { k, geometry: FrameGeometry::Psl2, verification_residual: residual })
}

/// The induced t-evolution matrix of the PSL(2) frame under u_t = u' h:
/// N = [[-h'/2 - lambda h, -h], [h''/2 + lambda h' + lambda^2 h + S h / 2,
/// h'/2 + lambda h]].
pub fn psl2_time_evolution(
    u: &ProjectiveCurve,
    h: &GridFunction,
    lambda: f64,
) -> Result<MatrixField> {
    let s = schwarzian(u)?.s;
    let h1 = h.derivative(1)?;
    let h2 = h.derivative(2)?;
    let grid = u.grid().clone();
    Ok(MatrixField::from_fn(grid, 2, 2, |j| {
        let (hv, h1v, h2v, sv) = (h.values()[j], h1.values()[j], h2.values()[j], s.values()[j]);
        DMatrix::from_row_slice(
            2,
            2,
            &[
                -0.5 * h1v - lambda * hv,
                -hv,
                0.5 * h2v + lambda * h1v + lambda * lambda * hv + 0.5 * sv * hv,
                0.5 * h1v + lambda * hv,
            ],
        )
    })?
    .with_lambda(lambda))
}

/// Euclidean left moving frame rho = [[1, 0], [u, (T N B)]] and its
/// Serret-Frenet matrix K = rho^{-1} rho_x with first column e_2 (arc length)
/// and so(3) block built from kappa and tau.
pub struct EuclideanFrameData {
    pub frame: FrenetFrame,
    pub invariants: EuclideanInvariants,
    pub sf: SerretFrenetMatrix,
}

pub fn euclidean_serret_frenet(c: &EuclideanCurve) -> Result<EuclideanFrameData> {
    let frame = frenet_frame(c)?;
    let invariants = curvature_torsion(c)?;
    let grid = c.grid().clone();
    let k = MatrixField::from_fn(grid.clone(), 4, 4, |j| {
        let (kv, tv) = (invariants.kappa.values()[j], invariants.tau.values()[j]);
        DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 0.0, 0.0, //
                1.0, 0.0, -kv, 0.0, //
                0.0, kv, 0.0, -tv, //
                0.0, 0.0, tv, 0.0,
            ],
        )
    })?;

    // rho as a 4x4 matrix field: affine representation, all entries periodic
    let rho = MatrixField::from_fn(grid, 4, 4, |j| {
        let mut m = DMatrix::identity(4, 4);
        let pt = [
            c.component(0).values()[j],
            c.component(1).values()[j],
            c.component(2).values()[j],
        ];
        let rot = frame.rotation_at(j);
        for r in 0..3 {
            m[(r + 1, 0)] = pt[r];
            for col in 0..3 {
                m[(r + 1, col + 1)] = rot[(r, col)];
            }
        }
        m
    })?;
    let rho_x = rho.derivative(1)?;
    let mut residual = 0.0_f64;
    for j in 0..rho.values().len() {
        let pred = rho.value(j) * k.value(j);
        residual = residual.max((rho_x.value(j) - pred).abs().max());
    }
    if residual > 1e-4 {
        return Err(Error::Inconsistency(format!(
            "||rho_x - rho K|| = {residual:.3e}: discretization breakdown"
        )));
    }
    Ok(EuclideanFrameData {
        frame,
        invariants,
        sf: SerretFrenetMatrix {
            k,
            geometry: FrameGeometry::Euclidean,
            verification_residual: residual,
        },
    })
}
