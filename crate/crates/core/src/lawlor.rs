//! Lawlor necks: special Lagrangian cylinders S^{n-1} × R in C^n asymptotic to
//! a transverse pair of SLag planes whose angles sum to π.
//!
//! With λ_1, .., λ_n > 0 put
//!
//! ```text
//! P(s)   = (Π_k (1 + λ_k s²) − 1)/s²,
//! θ_k    = λ_k ∫ ds / ((1 + λ_k s²) √P(s)),      Σ_k θ_k = π,
//! ψ_k(s) = incomplete version of the same integral, ψ_k(−∞) = 0,
//! z_k    = ε · x_k √(λ_k^{-1} + s²) e^{± i ψ_k(s)},   x ∈ S^{n-1}.
//! ```
//!
//! The `+` sign gives a neck asymptotic (in the oriented sense) to P(0, .., 0)
//! and −P(θ_1, .., θ_n); the `−` sign gives the conjugate neck asymptotic to
//! P(0, .., 0) and −P(−θ_1, .., −θ_n). The λ-vector is redundant up to a common
//! scale (a dilation), so λ ↦ θ is inverted on the slice Πλ_k = 1.

use crate::cy::StandardCY;
use crate::planes::OrientedPlane;
use crate::quad::{self, CubicSpline, QuadError};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NeckError {
    #[error("lambda[{index}] = {value} must be positive")]
    NonPositiveLambda { index: usize, value: f64 },
    #[error("theta[{index}] = {value} outside the open interval (0, π)")]
    AngleOutOfRange { index: usize, value: f64 },
    #[error("angle sum {sum} differs from π beyond 1e-8")]
    AngleSumMismatch { sum: f64 },
    #[error("Newton iteration stalled after {iterations} steps (residual {residual:.3e})")]
    NewtonDidNotConverge { residual: f64, iterations: usize },
    #[error("empty sampling grid")]
    EmptyGrid,
    #[error("point at radius {radius:.3e} is inside the non-graphical core")]
    NotGraphical { radius: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Which of the two oriented asymptotic ends the ψ-phase runs toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NeckSign {
    /// ψ_k(+∞) = +θ_k; asymptotic planes P(0,…,0) and −P(θ_1,…,θ_n).
    Positive,
    /// ψ_k(+∞) = −θ_k; asymptotic planes P(0,…,0) and −P(−θ_1,…,−θ_n).
    Negative,
}

impl NeckSign {
    pub fn factor(self) -> f64 {
        match self {
            NeckSign::Positive => 1.0,
            NeckSign::Negative => -1.0,
        }
    }
}

/// Quadrature/tabulation resolution for one neck.
#[derive(Debug, Clone, Copy)]
pub struct NeckResolution {
    /// nodes of the main ψ-spline (in the compactified variable)
    pub main_nodes: usize,
    /// nodes of the tail spline (in 1/s)
    pub tail_nodes: usize,
    /// absolute tolerance of the adaptive angle integrals
    pub angle_tol: f64,
    /// |s| beyond which the tail expansion takes over
    pub s_switch: f64,
}

impl Default for NeckResolution {
    fn default() -> Self {
        NeckResolution {
            main_nodes: 800,
            tail_nodes: 160,
            angle_tol: 1e-10,
            s_switch: 20.0,
        }
    }
}

impl NeckResolution {
    pub fn refined(self) -> Self {
        NeckResolution {
            main_nodes: self.main_nodes * 2,
            tail_nodes: self.tail_nodes * 2,
            angle_tol: self.angle_tol * 0.1,
            s_switch: self.s_switch,
        }
    }

    pub fn coarse() -> Self {
        NeckResolution {
            main_nodes: 200,
            tail_nodes: 40,
            angle_tol: 1e-8,
            s_switch: 20.0,
        }
    }
}

/// P(s) = (Π (1 + λ_k s²) − 1)/s², extended by continuity at s = 0.
fn capital_p(lambda: &[f64], s: f64) -> f64 {
    let s2 = s * s;
    if s2 == 0.0 {
        return lambda.iter().sum();
    }
    let log_prod: f64 = lambda.iter().map(|l| (l * s2).ln_1p()).sum();
    log_prod.exp_m1() / s2
}

/// Integrand of the k-th angle integral, in the original variable.
fn angle_integrand(lambda: &[f64], k: usize, s: f64) -> f64 {
    lambda[k] / ((1.0 + lambda[k] * s * s) * capital_p(lambda, s).sqrt())
}

/// Same integrand compactified through s = u/√(1−u²), u ∈ (−1, 1).
fn angle_integrand_u(lambda: &[f64], k: usize, u: f64) -> f64 {
    let w = 1.0 - u * u;
    if w <= 0.0 {
        return 0.0;
    }
    let s = u / w.sqrt();
    angle_integrand(lambda, k, s) * w.powf(-1.5)
}

fn validate_lambda(lambda: &[f64]) -> Result<(), NeckError> {
    for (index, &value) in lambda.iter().enumerate() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(NeckError::NonPositiveLambda { index, value });
        }
    }
    Ok(())
}

/// θ_k(λ) by adaptive quadrature on the compactified line.
pub fn angles_from_lambda(lambda: &[f64], tol: f64) -> Result<Vec<f64>, NeckError> {
    validate_lambda(lambda)?;
    let mut theta = Vec::with_capacity(lambda.len());
    for k in 0..lambda.len() {
        let f = |u: f64| angle_integrand_u(lambda, k, u);
        theta.push(quad::adaptive(&f, -1.0, 1.0, tol)?);
    }
    Ok(theta)
}

/// Invert θ(λ) on the slice Πλ_k = 1 by damped Newton in log-coordinates.
///
/// The λ-vector is only determined up to a common scale (dilating the neck
/// rescales λ), so the product-one normalization picks the representative.
pub fn lambda_from_angles(theta: &[f64], tol: f64) -> Result<Vec<f64>, NeckError> {
    let n = theta.len();
    for (index, &value) in theta.iter().enumerate() {
        if !(value > 0.0 && value < PI) {
            return Err(NeckError::AngleOutOfRange { index, value });
        }
    }
    let sum: f64 = theta.iter().sum();
    if (sum - PI).abs() > 1e-8 {
        return Err(NeckError::AngleSumMismatch { sum });
    }

    // θ_k grows with its own λ_k; the quadratic guess is exact at the barycenter.
    let mut log_lambda: Vec<f64> = theta
        .iter()
        .map(|t| 2.0 * (t * n as f64 / PI).ln())
        .collect();
    let recenter = |ll: &mut Vec<f64>| {
        let mean: f64 = ll.iter().sum::<f64>() / n as f64;
        ll.iter_mut().for_each(|v| *v -= mean);
    };
    recenter(&mut log_lambda);

    let eval = |ll: &[f64]| -> Result<Vec<f64>, NeckError> {
        let lambda: Vec<f64> = ll.iter().map(|v| v.exp()).collect();
        angles_from_lambda(&lambda, tol)
    };
    let res_norm = |th: &[f64]| -> f64 {
        th.iter()
            .zip(theta)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };

    let mut current = eval(&log_lambda)?;
    let mut residual = res_norm(&current);
    let max_iter = 50;
    for _ in 0..max_iter {
        if residual < 1e-10 {
            return Ok(log_lambda.iter().map(|v| v.exp()).collect());
        }
        // finite-difference Jacobian dθ/d(log λ)
        let h = 1e-6;
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let mut ll = log_lambda.clone();
            ll[k] += h;
            let th = eval(&ll)?;
            for i in 0..n {
                jac[(i, k)] = (th[i] - current[i]) / h;
            }
        }
        let rhs = DVector::from_fn(n, |i, _| theta[i] - current[i]);
        let svd = jac.svd(true, true);
        let step = svd.solve(&rhs, 1e-12).expect("svd solve");
        let mut step: Vec<f64> = step.iter().copied().collect();
        let mean: f64 = step.iter().sum::<f64>() / n as f64;
        step.iter_mut().for_each(|v| *v -= mean);

        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = log_lambda
                .iter()
                .zip(&step)
                .map(|(l, d)| l + t * d)
                .collect();
            let th = eval(&trial)?;
            let r = res_norm(&th);
            if r < residual * (1.0 - 0.25 * t) || t < 1.0 / 64.0 {
                log_lambda = trial;
                recenter(&mut log_lambda);
                current = th;
                residual = r;
                break;
            }
            t *= 0.5;
        }
    }
    if residual < 1e-9 {
        return Ok(log_lambda.iter().map(|v| v.exp()).collect());
    }
    Err(NeckError::NewtonDidNotConverge {
        residual,
        iterations: max_iter,
    })
}

/// Tabulated incomplete angle integral Ψ_k with Ψ_k(−∞) = 0, Ψ_k(+∞) = θ_k.
///
/// The tail branch is anchored to the main branch at |s| = s_switch, so the
/// table is continuous across the seam by construction; the table's own
/// asymptote (`theta_table`) may differ from the adaptive θ by quadrature
/// roundoff and is the value used wherever exact decay of χ = Ψ − Ψ(∞) matters.
#[derive(Debug, Clone)]
struct PsiTable {
    /// chain-consistent asymptote Ψ(+∞)
    theta_table: f64,
    /// Ψ(s(u)) on |s| ≤ s_switch, in the compactified variable u
    main: CubicSpline,
    /// tail mass T(ξ) = ∫_0^ξ integrand(1/w)/w² dw for ξ = 1/|s|
    tail: CubicSpline,
    main_lo: f64,
    main_hi: f64,
    tail_total: f64,
    s_switch: f64,
}

impl PsiTable {
    fn build(lambda: &[f64], k: usize, theta_k: f64, res: &NeckResolution) -> Self {
        let s_sw = res.s_switch;
        let u_sw = s_sw / (1.0 + s_sw * s_sw).sqrt();

        // cumulative integral outward from u = 0, one GK panel per segment
        let m = res.main_nodes.max(16) & !1; // force even
        let us: Vec<f64> = (0..=m)
            .map(|i| -u_sw + 2.0 * u_sw * i as f64 / m as f64)
            .collect();
        let mid = m / 2;
        let mut vals = vec![0.0; us.len()];
        let f = |u: f64| angle_integrand_u(lambda, k, u);
        vals[mid] = theta_k / 2.0; // Ψ(0) = θ/2 by evenness of the integrand
        for i in mid..m {
            vals[i + 1] = vals[i] + quad::gk15(&f, us[i], us[i + 1]).0;
        }
        for i in (0..mid).rev() {
            vals[i] = vals[i + 1] - quad::gk15(&f, us[i], us[i + 1]).0;
        }
        let main_lo = vals[0];
        let main_hi = vals[m];
        let main = CubicSpline::clamped(us, vals, f(-u_sw), f(u_sw));

        // tail: T(ξ) = ∫_0^ξ integrand(1/w)/w² dw, smooth with T(0) = 0
        let tn = res.tail_nodes.max(8);
        let xi_max = 1.0 / s_sw;
        let xis: Vec<f64> = (0..=tn).map(|i| xi_max * i as f64 / tn as f64).collect();
        let g = |w: f64| {
            if w <= 0.0 {
                0.0
            } else {
                angle_integrand(lambda, k, 1.0 / w) / (w * w)
            }
        };
        let mut tvals = vec![0.0; xis.len()];
        for i in 0..tn {
            tvals[i + 1] = tvals[i] + quad::gk15(&g, xis[i], xis[i + 1]).0;
        }
        let tail_total = tvals[tn];
        let tail = CubicSpline::clamped(xis, tvals, 0.0, g(xi_max));

        PsiTable {
            theta_table: main_hi + tail_total,
            main,
            tail,
            main_lo,
            main_hi,
            tail_total,
            s_switch: s_sw,
        }
    }

    /// Ψ(s) ∈ (0, θ); continuous across the tail seam.
    fn eval(&self, s: f64) -> f64 {
        if s >= self.s_switch {
            self.main_hi + (self.tail_total - self.tail.eval(1.0 / s))
        } else if s <= -self.s_switch {
            self.main_lo - (self.tail_total - self.tail.eval(-1.0 / s))
        } else {
            let u = s / (1.0 + s * s).sqrt();
            self.main.eval(u)
        }
    }
}

/// The λ-vector, its asymptotic angles θ(λ), the dilation ε, and the quadrature
/// tables defining one Lawlor neck.
#[derive(Debug, Clone)]
pub struct NeckParameters {
    pub n: usize,
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
    /// dilation ε > 0
    pub scale: f64,
    pub sign: NeckSign,
    pub resolution: NeckResolution,
    psi: Vec<PsiTable>,
}

impl NeckParameters {
    pub fn new(
        lambda: Vec<f64>,
        scale: f64,
        sign: NeckSign,
        resolution: NeckResolution,
    ) -> Result<Self, NeckError> {
        validate_lambda(&lambda)?;
        assert!(scale > 0.0, "dilation must be positive");
        let n = lambda.len();
        let theta = angles_from_lambda(&lambda, resolution.angle_tol)?;
        let psi = (0..n)
            .map(|k| PsiTable::build(&lambda, k, theta[k], &resolution))
            .collect();
        Ok(NeckParameters {
            n,
            lambda,
            theta,
            scale,
            sign,
            resolution,
            psi,
        })
    }

    /// Neck for given asymptotic angles (λ via the product-one slice).
    pub fn from_angles(
        theta: &[f64],
        scale: f64,
        sign: NeckSign,
        resolution: NeckResolution,
    ) -> Result<Self, NeckError> {
        let lambda = lambda_from_angles(theta, resolution.angle_tol)?;
        Self::new(lambda, scale, sign, resolution)
    }

    pub fn angle_sum_defect(&self) -> f64 {
        self.theta.iter().sum::<f64>() - PI
    }

    /// Signed phase ψ_k(s); runs from 0 to ±θ_k.
    pub fn psi(&self, k: usize, s: f64) -> f64 {
        self.sign.factor() * self.psi[k].eval(s)
    }

    /// dψ_k/ds, analytic.
    pub fn psi_prime(&self, k: usize, s: f64) -> f64 {
        self.sign.factor() * angle_integrand(&self.lambda, k, s)
    }

    pub fn radius_k(&self, k: usize, s: f64) -> f64 {
        (1.0 / self.lambda[k] + s * s).sqrt()
    }

    /// Immersion point for curve parameter s and unit sphere point x (scaled by ε).
    pub fn point(&self, s: f64, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut p = DVector::zeros(2 * n);
        for k in 0..n {
            let r = self.radius_k(k, s);
            let (sinp, cosp) = self.psi(k, s).sin_cos();
            p[k] = self.scale * x[k] * r * cosp;
            p[n + k] = self.scale * x[k] * r * sinp;
        }
        p
    }

    /// Unnormalized analytic tangents: ∂/∂s then the sphere directions.
    fn raw_tangents(
        &self,
        s: f64,
        x: &DVector<f64>,
        sphere_tangents: &[DVector<f64>],
    ) -> DMatrix<f64> {
        let n = self.n;
        let sqrt_p = capital_p(&self.lambda, s).sqrt();
        let mut t = DMatrix::zeros(2 * n, n);
        for k in 0..n {
            let r = self.radius_k(k, s);
            let phase = Complex64::from_polar(1.0, self.psi(k, s));
            let zs = phase * Complex64::new(s, self.sign.factor() / sqrt_p) * (x[k] / r);
            t[(k, 0)] = zs.re;
            t[(n + k, 0)] = zs.im;
        }
        for (j, xi) in sphere_tangents.iter().enumerate() {
            for k in 0..n {
                let r = self.radius_k(k, s);
                let z = Complex64::from_polar(r * xi[k], self.psi(k, s));
                t[(k, j + 1)] = z.re;
                t[(n + k, j + 1)] = z.im;
            }
        }
        t
    }

    /// Orthonormal oriented tangent frame; orientation fixed so that the
    /// Lagrangian phase lies in (−π/2, π/2] (the special Lagrangian one).
    pub fn tangent_frame(&self, s: f64, x: &DVector<f64>) -> DMatrix<f64> {
        let tangents = sphere_tangent_basis(x);
        let mut frame = gram_schmidt(&self.raw_tangents(s, x, &tangents));
        let cy = StandardCY::new(self.n);
        let phase = cy.omega_hol_matrix(&frame).arg();
        if phase.abs() > PI / 2.0 {
            frame.swap_columns(self.n - 2, self.n - 1);
        }
        frame
    }

    /// The oriented asymptotic pair: P(0,…,0) as s → −∞ and −P(±θ) as s → +∞.
    pub fn asymptotic_planes(&self) -> (OrientedPlane, OrientedPlane) {
        let p0 = OrientedPlane::x_plane(self.n);
        let signed: Vec<f64> = self.theta.iter().map(|t| self.sign.factor() * t).collect();
        (p0, OrientedPlane::from_angles(self.n, &signed).neg())
    }
}

/// Orthonormal basis of the tangent space of S^{n-1} at x (Householder complement).
pub fn sphere_tangent_basis(x: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = x.len();
    let mut e1 = DVector::zeros(n);
    e1[0] = 1.0;
    let diff = x - &e1;
    let norm = diff.norm();
    let mut cols = Vec::with_capacity(n - 1);
    for j in 1..n {
        let mut v = DVector::zeros(n);
        v[j] = 1.0;
        if norm > 1e-12 {
            let v_new = &v - &diff * (2.0 * diff.dot(&v) / (norm * norm));
            cols.push(v_new);
        } else {
            cols.push(v);
        }
    }
    cols
}

/// Modified Gram–Schmidt on the columns.
pub fn gram_schmidt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for i in 0..j {
            let qi = q.column(i).into_owned();
            let proj = qi.dot(&q.column(j).into_owned());
            let col = q.column(j) - qi * proj;
            q.set_column(j, &col);
        }
        let norm = q.column(j).norm();
        let col = q.column(j) / norm;
        q.set_column(j, &col);
    }
    q
}

/// One sampled neck point with its tangent frame.
#[derive(Debug, Clone)]
pub struct NeckSample {
    pub s: f64,
    pub sphere_index: usize,
    pub point: DVector<f64>,
    pub frame: DMatrix<f64>,
}

/// A finite indexed set of points on S^{n-1}.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub n: usize,
    pub points: Vec<DVector<f64>>,
}

impl SphereGrid {
    pub fn circle(count: usize) -> Self {
        let points = (0..count)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / count as f64;
                DVector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect();
        SphereGrid { n: 2, points }
    }

    pub fn lat_long(nu: usize, nv: usize) -> Self {
        let mut points = Vec::new();
        for i in 0..nu {
            let u = PI * (i as f64 + 0.5) / nu as f64;
            for j in 0..nv {
                let v = 2.0 * PI * j as f64 / nv as f64;
                points.push(DVector::from_vec(vec![
                    u.sin() * v.cos(),
                    u.sin() * v.sin(),
                    u.cos(),
                ]));
            }
        }
        SphereGrid { n: 3, points }
    }

    /// Deterministic pseudo-uniform points in any dimension.
    pub fn gaussian(n: usize, count: usize, seed: u64) -> Self {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let normal = StandardNormal;
        let points = (0..count)
            .map(|_| {
                let mut v: DVector<f64> = DVector::from_fn(n, |_, _| normal.sample(&mut rng));
                while v.norm() < 1e-6 {
                    v = DVector::from_fn(n, |_, _| normal.sample(&mut rng));
                }
                let norm = v.norm();
                v / norm
            })
            .collect();
        SphereGrid { n, points }
    }
}

/// Sample the immersion over the product of an s-grid and a sphere grid.
pub fn sample_neck(
    params: &NeckParameters,
    s_values: &[f64],
    sphere: &SphereGrid,
) -> Result<Vec<NeckSample>, NeckError> {
    if s_values.is_empty() || sphere.points.is_empty() {
        return Err(NeckError::EmptyGrid);
    }
    assert_eq!(sphere.n, params.n);
    let mut out = Vec::with_capacity(s_values.len() * sphere.points.len());
    for &s in s_values {
        for (sphere_index, x) in sphere.points.iter().enumerate() {
            out.push(NeckSample {
                s,
                sphere_index,
                point: params.point(s, x),
                frame: params.tangent_frame(s, x),
            });
        }
    }
    Ok(out)
}

/// Restriction residuals of ω, Im Ω and the phase over a set of samples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlagResidual {
    pub sup_omega: f64,
    pub sup_im_omega: f64,
    pub sup_phase: f64,
}

pub fn slag_residual(n: usize, samples: &[NeckSample]) -> SlagResidual {
    let cy = StandardCY::new(n);
    let mut sup_omega: f64 = 0.0;
    let mut sup_im: f64 = 0.0;
    let mut sup_phase: f64 = 0.0;
    for sample in samples {
        for i in 0..n {
            for j in i + 1..n {
                let u = sample.frame.column(i).into_owned();
                let v = sample.frame.column(j).into_owned();
                sup_omega = sup_omega.max(cy.omega(&u, &v).abs());
            }
        }
        let det = cy.omega_hol_matrix(&sample.frame);
        sup_im = sup_im.max(det.im.abs());
        sup_phase = sup_phase.max(det.arg().abs());
    }
    SlagResidual {
        sup_omega,
        sup_im_omega: sup_im,
        sup_phase,
    }
}

/// Which asymptotic plane a graph chart lives over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimbSide {
    /// s < 0, graph over P(0,…,0)
    Eta,
    /// s > 0, graph over the rotated plane
    Xi,
}

/// Potential data of one limb at a plane point.
#[derive(Debug, Clone)]
pub struct LimbData {
    pub s: f64,
    /// unit sphere point of the underlying neck parametrization
    pub x_sphere: DVector<f64>,
    /// scalar potential, normalized to vanish at infinity
    pub u: f64,
    /// ∇u at the point (plane coordinates)
    pub grad: DVector<f64>,
    /// Hess u at the point (plane coordinates)
    pub hess: DMatrix<f64>,
}

/// Graph chart of one neck limb over its asymptotic plane.
///
/// Plane coordinates are the limb's own: for the η limb the ambient
/// x-coordinates, for the ξ limb the coordinates obtained by rotating
/// each z_k by e^{-iψ_k(±∞)}. `ambient` maps chart data back to C^n.
pub struct LimbChart<'a> {
    pub neck: &'a NeckParameters,
    pub side: LimbSide,
}

impl<'a> LimbChart<'a> {
    pub fn new(neck: &'a NeckParameters, side: LimbSide) -> Self {
        LimbChart { neck, side }
    }

    fn side_sign(&self) -> f64 {
        match self.side {
            LimbSide::Eta => -1.0,
            LimbSide::Xi => 1.0,
        }
    }

    /// Limb phase χ_k(s) = ψ_k(s) − ψ_k(side ∞); tends to 0 along this limb.
    fn chi(&self, k: usize, s: f64) -> f64 {
        match self.side {
            LimbSide::Eta => self.neck.psi(k, s),
            LimbSide::Xi => self.neck.psi(k, s) - self.neck.sign.factor() * self.neck.theta[k],
        }
    }

    /// Solve Σ_k X_k²/(r_k² cos²χ_k) = 1 for s on this limb (unit scale).
    fn solve_s_unit(&self, x_plane: &[f64]) -> Result<f64, NeckError> {
        let neck = self.neck;
        let n = neck.n;
        let radius2: f64 = x_plane.iter().map(|v| v * v).sum();
        let radius = radius2.sqrt();
        let side = self.side_sign();
        let f = |m: f64| -> f64 {
            let s = side * m;
            let mut acc = 0.0;
            for k in 0..n {
                let r = neck.radius_k(k, s);
                let c = self.chi(k, s).cos();
                acc += x_plane[k] * x_plane[k] / (r * r * c * c);
            }
            acc - 1.0
        };
        if f(0.0) <= 0.0 {
            return Err(NeckError::NotGraphical { radius });
        }
        let mut hi = radius.max(1.0);
        let mut tries = 0;
        while f(hi) > 0.0 {
            hi *= 2.0;
            tries += 1;
            if tries > 60 {
                return Err(NeckError::NotGraphical { radius });
            }
        }
        // bisect to locate, then secant-polish to machine precision
        let mut lo = hi / 2.0;
        if f(lo) <= 0.0 {
            lo = 0.0;
        }
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 * (1.0 + hi) {
                break;
            }
        }
        let (mut a, mut b) = (lo, hi);
        let (mut fa, mut fb) = (f(a), f(b));
        for _ in 0..8 {
            if (fa - fb).abs() < 1e-300 || b - a < 1e-16 * (1.0 + b) {
                break;
            }
            let m = a - fa * (b - a) / (fb - fa);
            let fm = f(m);
            if fm > 0.0 {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
        Ok(side * 0.5 * (a + b))
    }

    /// Gradient field of the limb potential at a unit-scale plane point:
    /// G_k = X_k tan χ_k(s).
    fn grad_unit(&self, x_plane: &[f64]) -> Result<(f64, DVector<f64>), NeckError> {
        let s = self.solve_s_unit(x_plane)?;
        let n = self.neck.n;
        let g = DVector::from_fn(n, |k, _| x_plane[k] * self.chi(k, s).tan());
        Ok((s, g))
    }

    /// Hessian from the analytic tangent frame: tangent vectors of a graph are
    /// (v, H v), so H = Im(T)·Re(T)^{-1} for the complex tangent matrix T.
    fn hess_unit(&self, s: f64, x_plane: &[f64]) -> DMatrix<f64> {
        let neck = self.neck;
        let n = neck.n;
        let x_sphere = DVector::from_fn(n, |k, _| {
            x_plane[k] / (neck.radius_k(k, s) * self.chi(k, s).cos())
        });
        let tangents = sphere_tangent_basis(&x_sphere);
        let sqrt_p = capital_p(&neck.lambda, s).sqrt();
        let mut t_re = DMatrix::<f64>::zeros(n, n);
        let mut t_im = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let r = neck.radius_k(k, s);
            let phase = Complex64::from_polar(1.0, self.chi(k, s));
            let zs = phase * Complex64::new(s, neck.sign.factor() / sqrt_p) * (x_sphere[k] / r);
            t_re[(k, 0)] = zs.re;
            t_im[(k, 0)] = zs.im;
            for (j, xi) in tangents.iter().enumerate() {
                let z = Complex64::from_polar(r * xi[k], self.chi(k, s));
                t_re[(k, j + 1)] = z.re;
                t_im[(k, j + 1)] = z.im;
            }
        }
        let inv = t_re
            .clone()
            .try_inverse()
            .expect("graphical region tangent projection invertible");
        let h = t_im * inv;
        DMatrix::from_fn(n, n, |r, c| 0.5 * (h[(r, c)] + h[(c, r)]))
    }

    /// Potential, gradient and Hessian at a model-scale plane point X.
    ///
    /// The potential is the radial path integral u(X) = −∫_{|X|}^∞ ⟨g(tω), ω⟩ dt,
    /// so u → 0 at infinity (n ≥ 3 makes the tail integrable).
    pub fn eval(&self, x_model: &DVector<f64>) -> Result<LimbData, NeckError> {
        let eps = self.neck.scale;
        let x_unit: Vec<f64> = x_model.iter().map(|v| v / eps).collect();
        let (s, g_unit) = self.grad_unit(&x_unit)?;
        let hess = self.hess_unit(s, &x_unit);
        let grad = DVector::from_fn(self.neck.n, |k, _| eps * g_unit[k]);
        let x_sphere = DVector::from_fn(self.neck.n, |k, _| {
            x_unit[k] / (self.neck.radius_k(k, s) * self.chi(k, s).cos())
        });

        let radius: f64 = x_unit.iter().map(|v| v * v).sum::<f64>().sqrt();
        let omega: Vec<f64> = x_unit.iter().map(|v| v / radius).collect();
        let radial = |t: f64| -> f64 {
            let pt: Vec<f64> = omega.iter().map(|w| w * t).collect();
            match self.grad_unit(&pt) {
                Ok((_, g)) => g.iter().zip(&omega).map(|(gi, wi)| gi * wi).sum::<f64>(),
                Err(_) => 0.0,
            }
        };
        // compactify the tail with t = radius / w
        let integrand = |w: f64| -> f64 {
            if w <= 0.0 {
                return 0.0;
            }
            let t = radius / w;
            radial(t) * radius / (w * w)
        };
        let u_unit = -quad::adaptive(&integrand, 0.0, 1.0, 1e-11)?;
        Ok(LimbData {
            s,
            x_sphere,
            u: eps * eps * u_unit,
            grad,
            hess,
        })
    }

    /// Ambient C^n point of the graph of an arbitrary gradient field over this
    /// limb's plane: z_k = e^{i χ∞_k}(X_k + i G_k).
    pub fn ambient(&self, x_model: &DVector<f64>, grad: &DVector<f64>) -> DVector<f64> {
        let n = self.neck.n;
        let mut p = DVector::zeros(2 * n);
        for k in 0..n {
            let offset = match self.side {
                LimbSide::Eta => 0.0,
                LimbSide::Xi => self.neck.sign.factor() * self.neck.theta[k],
            };
            let z = Complex64::from_polar(1.0, offset) * Complex64::new(x_model[k], grad[k]);
            p[k] = z.re;
            p[n + k] = z.im;
        }
        p
    }

    /// Ambient tangent frame of the graph of a gradient field with Hessian
    /// `hess` over this limb, oriented like the limb's asymptotic plane.
    pub fn ambient_frame(&self, hess: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.neck.n;
        let mut cols = DMatrix::<f64>::zeros(2 * n, n);
        for j in 0..n {
            for k in 0..n {
                let offset = match self.side {
                    LimbSide::Eta => 0.0,
                    LimbSide::Xi => self.neck.sign.factor() * self.neck.theta[k],
                };
                let delta = if k == j { 1.0 } else { 0.0 };
                let z = Complex64::from_polar(1.0, offset) * Complex64::new(delta, hess[(k, j)]);
                cols[(k, j)] = z.re;
                cols[(n + k, j)] = z.im;
            }
        }
        let mut frame = gram_schmidt(&cols);
        // the ξ limb carries the orientation of −P(±θ): one swap
        if self.side == LimbSide::Xi {
            frame.swap_columns(0, 1);
        }
        frame
    }

    /// Max |FD ∇u − analytic ∇u| over coordinate directions at a point; checks
    /// that the integrated potential generates the graph.
    pub fn potential_gradient_residual(
        &self,
        x_model: &DVector<f64>,
        h: f64,
    ) -> Result<f64, NeckError> {
        let n = self.neck.n;
        let base = self.eval(x_model)?;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let mut xp = x_model.clone();
            let mut xm = x_model.clone();
            xp[k] += h;
            xm[k] -= h;
            let up = self.eval(&xp)?.u;
            let um = self.eval(&xm)?.u;
            let fd = (up - um) / (2.0 * h);
            worst = worst.max((fd - base.grad[k]).abs());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_lambda_gives_equal_angles() {
        for n in [3usize, 4] {
            let lambda = vec![1.0; n];
            let theta = angles_from_lambda(&lambda, 1e-12).unwrap();
            for t in &theta {
                assert_abs_diff_eq!(*t, PI / n as f64, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn angle_sum_is_pi() {
        let lambda = vec![1.0, 2.0, 4.0];
        let theta = angles_from_lambda(&lambda, 1e-11).unwrap();
        assert_abs_diff_eq!(theta.iter().sum::<f64>(), PI, epsilon = 1e-9);
        assert!(theta[0] < theta[1] && theta[1] < theta[2]);
    }

    #[test]
    fn theta_is_scale_invariant_in_lambda() {
        let lambda = vec![0.5, 1.5, 3.0];
        let theta1 = angles_from_lambda(&lambda, 1e-11).unwrap();
        let scaled: Vec<f64> = lambda.iter().map(|l| 7.3 * l).collect();
        let theta2 = angles_from_lambda(&scaled, 1e-11).unwrap();
        for (a, b) in theta1.iter().zip(&theta2) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-9);
        }
    }

    #[test]
    fn theta_increases_in_its_own_lambda() {
        let base = vec![0.7, 1.3, 2.1];
        let theta0 = angles_from_lambda(&base, 1e-11).unwrap();
        for k in 0..3 {
            let mut bumped = base.clone();
            bumped[k] *= 1.01;
            let theta1 = angles_from_lambda(&bumped, 1e-11).unwrap();
            assert!(
                theta1[k] > theta0[k],
                "θ_{k} should grow with λ_{k}: {} vs {}",
                theta1[k],
                theta0[k]
            );
            for j in 0..3 {
                if j != k {
                    assert!(theta1[j] < theta0[j], "θ_{j} should shrink");
                }
            }
        }
    }

    #[test]
    fn lambda_from_angles_roundtrip() {
        let theta = vec![0.6, 1.0, PI - 1.6];
        let lambda = lambda_from_angles(&theta, 1e-11).unwrap();
        let theta_rt = angles_from_lambda(&lambda, 1e-11).unwrap();
        for (a, b) in theta.iter().zip(&theta_rt) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
        let prod: f64 = lambda.iter().product();
        assert_abs_diff_eq!(prod, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn lambda_from_angles_rejects_bad_input() {
        assert!(matches!(
            lambda_from_angles(&[PI / 2.0, PI / 2.0, 0.0], 1e-10),
            Err(NeckError::AngleOutOfRange { .. })
        ));
        assert!(matches!(
            lambda_from_angles(&[0.5, 0.5, 0.5], 1e-10),
            Err(NeckError::AngleSumMismatch { .. })
        ));
    }

    #[test]
    fn symmetric_angles_give_common_lambda() {
        let theta = vec![PI / 3.0; 3];
        let lambda = lambda_from_angles(&theta, 1e-11).unwrap();
        for l in &lambda {
            assert_abs_diff_eq!(*l, lambda[0], epsilon = 1e-9);
        }
    }

    #[test]
    fn neck_is_special_lagrangian() {
        let neck = NeckParameters::new(
            vec![1.0, 1.0, 1.0],
            1.0,
            NeckSign::Positive,
            NeckResolution::default(),
        )
        .unwrap();
        let sphere = SphereGrid::lat_long(4, 8);
        let s_values: Vec<f64> = (-8..=8).map(|i| i as f64 * 0.9).collect();
        let samples = sample_neck(&neck, &s_values, &sphere).unwrap();
        let res = slag_residual(3, &samples);
        assert!(res.sup_omega < 1e-6, "ω residual {}", res.sup_omega);
        assert!(res.sup_im_omega < 1e-6, "Im Ω residual {}", res.sup_im_omega);
        assert!(res.sup_phase < 1e-6, "phase residual {}", res.sup_phase);
    }

    #[test]
    fn waist_radii_at_s_zero() {
        let eps = 0.25;
        let neck = NeckParameters::new(
            vec![1.0, 2.0, 4.0],
            eps,
            NeckSign::Positive,
            NeckResolution::coarse(),
        )
        .unwrap();
        for k in 0..3 {
            let mut x = DVector::zeros(3);
            x[k] = 1.0;
            let p = neck.point(0.0, &x);
            let expected = eps / neck.lambda[k].sqrt();
            assert_abs_diff_eq!(p.norm(), expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn dilation_scales_points_exactly() {
        let lambda = vec![1.0, 2.0, 4.0];
        let big = NeckParameters::new(lambda.clone(), 1.0, NeckSign::Positive, NeckResolution::coarse()).unwrap();
        let small = NeckParameters::new(lambda, 0.5, NeckSign::Positive, NeckResolution::coarse()).unwrap();
        let x = DVector::from_vec(vec![0.6, 0.64,0.48]);
        let x = x.clone() / x.norm();
        let p1 = big.point(1.7, &x);
        let p2 = small.point(1.7, &x);
        assert_abs_diff_eq!((p1 * 0.5 - p2).norm(), 0.0, epsilon = 1e-14);
    }
}

#[cfg(test)]
mod probe_tests {
    use super::*;

    #[test]
    fn probe_radial_integrand() {
        let eps = 0.125;
        let neck = NeckParameters::new(vec![1.0, 2.0, 4.0], eps, NeckSign::Positive, NeckResolution::default()).unwrap();
        let chart = LimbChart::new(&neck, LimbSide::Eta);
        let x_unit = [3.5, 0.0, 0.0];
        let radius: f64 = 3.5;
        let omega = [1.0, 0.0, 0.0];
        let mut prev = f64::NAN;
        for i in 1..=60 {
            let w = i as f64 / 60.0;
            let t = radius / w;
            let pt: Vec<f64> = omega.iter().map(|v| v * t).collect();
            let val = match chart.grad_unit(&pt) {
                Ok((_, g)) => g.iter().zip(&omega).map(|(a, b)| a * b).sum::<f64>(),
                Err(e) => { println!("w={w:.4} t={t:.2} ERR {e}"); continue; }
            };
            let integrand = val * radius / (w * w);
            if (integrand - prev).abs() > 0.05 * (integrand.abs() + 1e-12) {
                println!("w={w:.4} t={t:.3} integrand={integrand:.8e} JUMP from {prev:.8e}");
            }
            prev = integrand;
        }
        println!("done");
    }
}
