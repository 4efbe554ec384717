//! Non-periodic evaluation path: 6th-order finite differences on a window of
//! uniformly spaced samples, with one-sided-safe stencils near the edges.
//!
//! This lets textbook, non-periodic examples (u = e^{2x}, Moebius images of a
//! projective curve) be differentiated without the periodic model.

/// Fornberg weights for the m-th derivative at `x0` from nodes `xs`.
///
/// Standard recursion (Fornberg 1988); returns weights[k][i] for derivative
/// order k at node i.
pub fn fornberg_weights(xs: &[f64], x0: f64, max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Derivatives of orders 1..=max_order at every sample of a uniform window.
///
/// Interior points use centered 9-point stencils, which keeps third
/// derivatives at order 6; points within four nodes of an edge fall back to
/// shifted stencils of the same width.
pub fn window_derivatives(samples: &[f64], h: f64, max_order: usize) -> Vec<Vec<f64>> {
    const W: usize = 9;
    let n = samples.len();
    assert!(n >= W, "windowed path needs at least {W} samples");
    assert!(max_order <= 5);
    let mut out = vec![vec![0.0; n]; max_order];
    for i in 0..n {
        let start = i.saturating_sub(W / 2).min(n - W);
        let xs: Vec<f64> = (0..W).map(|k| (start + k) as f64 * h).collect();
        let w = fornberg_weights(&xs, i as f64 * h, max_order);
        for ord in 1..=max_order {
            let mut acc = 0.0;
            for k in 0..W {
                acc += w[ord][k] * samples[start + k];
            }
            out[ord - 1][i] = acc;
        }
    }
    out
}

/// Schwarzian derivative u'''/u' - 3/2 (u''/u')^2 of windowed samples.
///
/// Returns None at nodes where u' is below `min_slope`.
pub fn window_schwarzian(samples: &[f64], h: f64, min_slope: f64) -> Vec<Option<f64>> {
    let d = window_derivatives(samples, h, 3);
    (0..samples.len())
        .map(|i| {
            let u1 = d[0][i];
            if u1.abs() < min_slope {
                None
            } else {
                let r = d[1][i] / u1;
                Some(d[2][i] / u1 - 1.5 * r * r)
            }
        })
        .collect()
}

/// Curvature and torsion of a windowed space curve (not assumed arc-length).
///
/// General-parameter formulas kappa = |u' x u''| / |u'|^3 and
/// tau = det(u', u'', u''') / |u' x u''|^2.
pub fn window_curvature_torsion(points: &[[f64; 3]], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = points.len();
    let comp = |axis: usize| -> Vec<f64> { points.iter().map(|p| p[axis]).collect() };
    let d: Vec<Vec<Vec<f64>>> = (0..3).map(|a| window_derivatives(&comp(a), h, 3)).collect();
    let mut kappa = vec![0.0; n];
    let mut tau = vec![0.0; n];
    for i in 0..n {
        let u1 = [d[0][0][i], d[1][0][i], d[2][0][i]];
        let u2 = [d[0][1][i], d[1][1][i], d[2][1][i]];
        let u3 = [d[0][2][i], d[1][2][i], d[2][2][i]];
        let cx = cross(u1, u2);
        let speed = norm(u1);
        let cn = norm(cx);
        kappa[i] = cn / speed.powi(3);
        tau[i] = if cn > 0.0 { dot(cx, u3) / (cn * cn) } else { 0.0 };
    }
    (kappa, tau)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
