//! One-dimensional quadrature: Gauss–Kronrod 7-15 panels, adaptively bisected
//! or in fixed composite form, plus a natural cubic spline for tabulated
//! antiderivatives.

use thiserror::Error;

/// Kronrod abscissae (positive half) for the 7-15 pair.
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// 7-point Gauss weights for abscissae XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("adaptive quadrature did not converge: achieved error {achieved:.3e} > tol {tol:.3e}")]
    NoConvergence { achieved: f64, tol: f64 },
}

/// One Gauss–Kronrod 7-15 panel on [a, b]; returns (integral, error estimate).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = WGK[7] * f(mid);
    let mut gauss = WG[3] * f(mid);
    for i in 0..7 {
        let x = half * XGK[i];
        let fsum = f(mid - x) + f(mid + x);
        kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (value, err)
}

/// Adaptive bisection of GK15 panels down to absolute tolerance `tol`.
///
/// A panel is also accepted once its error estimate reaches the roundoff floor
/// of its own value, so tolerances below machine precision degrade gracefully
/// instead of splitting forever.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64, QuadError> {
    const MAX_DEPTH: usize = 28;
    let mut total = 0.0;
    let mut achieved = 0.0;
    let mut failed = false;
    let mut stack = vec![(a, b, 0usize, tol)];
    while let Some((lo, hi, depth, budget)) = stack.pop() {
        let (value, err) = gk15(f, lo, hi);
        let floor = 1e-14 * value.abs() + 1e-300;
        if err <= budget.max(floor) || depth >= MAX_DEPTH {
            total += value;
            achieved += err;
            if err > budget.max(floor) {
                failed = true;
            }
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1, 0.5 * budget));
            stack.push((mid, hi, depth + 1, 0.5 * budget));
        }
    }
    if failed && achieved > tol {
        return Err(QuadError::NoConvergence { achieved, tol });
    }
    Ok(total)
}

/// Fixed composite GK15 with `panels` equal panels (no error control).
pub fn composite_gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| gk15(f, a + i as f64 * h, a + (i + 1) as f64 * h).0)
        .sum()
}

/// Natural cubic spline through strictly increasing nodes.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// second derivatives at the nodes
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        Self::build(xs, ys, None)
    }

    /// Clamped spline with prescribed end slopes; avoids the O(h²) end artifact
    /// of the natural boundary when the true derivative is known.
    pub fn clamped(xs: Vec<f64>, ys: Vec<f64>, slope_lo: f64, slope_hi: f64) -> Self {
        Self::build(xs, ys, Some((slope_lo, slope_hi)))
    }

    fn build(xs: Vec<f64>, ys: Vec<f64>, slopes: Option<(f64, f64)>) -> Self {
        let n = xs.len();
        assert!(n >= 2, "spline needs at least two nodes");
        assert_eq!(xs.len(), ys.len());
        // tridiagonal solve for second derivatives
        let mut sub = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            sub[i] = h0;
            diag[i] = 2.0 * (h0 + h1);
            sup[i] = h1;
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        if let Some((s_lo, s_hi)) = slopes {
            let h0 = xs[1] - xs[0];
            diag[0] = 2.0 * h0;
            sup[0] = h0;
            rhs[0] = 6.0 * ((ys[1] - ys[0]) / h0 - s_lo);
            let h1 = xs[n - 1] - xs[n - 2];
            sub[n - 1] = h1;
            diag[n - 1] = 2.0 * h1;
            rhs[n - 1] = 6.0 * (s_hi - (ys[n - 1] - ys[n - 2]) / h1);
        }
        // Thomas algorithm (natural boundary rows stay identity with rhs 0)
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        CubicSpline { xs, ys, m }
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).expect("no NaN nodes"))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn gk15_exact_on_low_degree() {
        let f = |x: f64| 3.0 * x * x - x + 2.0;
        let (v, _) = gk15(&f, -1.0, 2.0);
        let exact = (8.0 - 2.0 + 4.0) - (-1.0 - 0.5 - 2.0);
        assert_abs_diff_eq!(v, exact, epsilon = 1e-13);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let f = |x: f64| 1.0 / (1e-4 + x * x);
        let v = adaptive(&f, -1.0, 1.0, 1e-12).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert_abs_diff_eq!(v, exact, epsilon = 1e-9);
    }

    #[test]
    fn adaptive_matches_arctan_tail() {
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let v = adaptive(&f, -50.0, 50.0, 1e-13).unwrap();
        assert_abs_diff_eq!(v, PI - 2.0 * (1.0f64 / 50.0).atan(), epsilon = 1e-12);
    }

    #[test]
    fn spline_reproduces_smooth_function() {
        let xs: Vec<f64> = (0..200).map(|i| -3.0 + 6.0 * i as f64 / 199.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x * 0.7).sin()).collect();
        let sp = CubicSpline::natural(xs, ys);
        for i in 0..500 {
            let x = -2.9 + 5.8 * i as f64 / 499.0;
            assert_abs_diff_eq!(sp.eval(x), (x * 0.7).sin(), epsilon = 1e-6);
        }
    }
}
