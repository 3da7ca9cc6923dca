//! The standard Calabi-Yau structure on C^n ≅ R^{2n}.
//!
//! Coordinates are ordered (x_1, .., x_n, y_1, .., y_n). The complex structure
//! sends ∂x_j ↦ ∂y_j, the Kähler form is ω = Σ dx^j ∧ dy^j, and the holomorphic
//! volume form is Ω = dz^1 ∧ … ∧ dz^n with z_j = x_j + i y_j.

use crate::exterior::{ComplexForm, RealForm};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// The standard CY structure, parametrized only by the complex dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StandardCY {
    pub n: usize,
}

impl StandardCY {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "complex dimension must be at least 1");
        StandardCY { n }
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    /// ω(u, v) = Σ_j (u_{x_j} v_{y_j} − u_{y_j} v_{x_j}).
    pub fn omega(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let n = self.n;
        (0..n).map(|j| u[j] * v[n + j] - u[n + j] * v[j]).sum()
    }

    /// J(x, y) = (−y, x).
    pub fn complex_structure(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(2 * n, |r, _| if r < n { -v[n + r] } else { v[r - n] })
    }

    /// Complexify a real vector: z_j = x_j + i y_j.
    pub fn complexify(&self, v: &DVector<f64>) -> Vec<Complex64> {
        (0..self.n).map(|j| Complex64::new(v[j], v[j + self.n])).collect()
    }

    /// Ω evaluated on n real vectors: the complex determinant of their
    /// complexified coordinates.
    pub fn omega_hol(&self, vectors: &[DVector<f64>]) -> Complex64 {
        assert_eq!(vectors.len(), self.n);
        let mut z = DMatrix::<Complex64>::zeros(self.n, self.n);
        for (col, v) in vectors.iter().enumerate() {
            for row in 0..self.n {
                z[(row, col)] = Complex64::new(v[row], v[row + self.n]);
            }
        }
        z.determinant()
    }

    /// Ω on the columns of a 2n×n matrix.
    pub fn omega_hol_matrix(&self, m: &DMatrix<f64>) -> Complex64 {
        let cols: Vec<DVector<f64>> = (0..m.ncols()).map(|j| m.column(j).into_owned()).collect();
        self.omega_hol(&cols)
    }

    /// Both sides of the volume normalization ω^n/n! = (−1)^{n(n−1)/2} (i/2)^n Ω ∧ Ω̄,
    /// evaluated on the oriented volume basis (∂x_1, ∂y_1, …, ∂x_n, ∂y_n).
    pub fn normalization_sides(&self) -> (f64, f64) {
        let n = self.n;
        let dim = 2 * n;
        let basis: Vec<DVector<f64>> = (0..dim)
            .map(|i| {
                // interleaved order: x_j at even slots, y_j at odd slots
                let coord = if i % 2 == 0 { i / 2 } else { n + i / 2 };
                DVector::from_fn(dim, |r, _| if r == coord { 1.0 } else { 0.0 })
            })
            .collect();

        let omega = RealForm::standard_symplectic(n);
        let mut omega_n = omega.clone();
        for _ in 1..n {
            omega_n = omega_n.wedge(&omega);
        }
        let mut factorial = 1.0;
        for k in 2..=n {
            factorial *= k as f64;
        }
        let lhs = omega_n.eval(&basis) / factorial;

        let omega_hol = ComplexForm::holomorphic_volume(n);
        let pairing = omega_hol.wedge(&omega_hol.conjugate());
        // (i/2)^n as a complex scalar
        let mut i_half = Complex64::new(1.0, 0.0);
        for _ in 0..n {
            i_half *= Complex64::new(0.0, 0.5);
        }
        let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let value = Complex64::new(pairing.re.eval(&basis), pairing.im.eval(&basis));
        let rhs = sign * (i_half * value).re;
        let rhs_imag = (i_half * value).im;
        debug_assert!(rhs_imag.abs() < 1e-12);
        (lhs, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normalization_holds_up_to_n5() {
        for n in 1..=5 {
            let cy = StandardCY::new(n);
            let (lhs, rhs) = cy.normalization_sides();
            assert_abs_diff_eq!(lhs, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn j_squares_to_minus_one() {
        let cy = StandardCY::new(3);
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5, 0.25, 3.0, -1.5]);
        let jjv = cy.complex_structure(&cy.complex_structure(&v));
        assert_abs_diff_eq!((jjv + &v).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn omega_is_j_compatible() {
        // ω(u, v) = ⟨Ju, v⟩
        let cy = StandardCY::new(2);
        let u = DVector::from_vec(vec![0.3, -1.2, 0.7, 2.0]);
        let v = DVector::from_vec(vec![1.1, 0.4, -0.6, 0.9]);
        let ju = cy.complex_structure(&u);
        assert_abs_diff_eq!(cy.omega(&u, &v), ju.dot(&v), epsilon = 1e-14);
    }
}
