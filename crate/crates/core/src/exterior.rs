//! Constant-coefficient exterior forms on R^{2n}.
//!
//! A degree-k form is stored as a dense coefficient vector indexed by the
//! k-subsets of {0, .., dim-1} in lexicographic order (combinatorial number
//! system). This is enough for the handful of forms the deformation theory
//! needs: ω^n, Ω ∧ Ω̄, Im χ, and their evaluations on tangent n-vectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Binomial coefficient as usize. Small arguments only.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Lexicographic rank of a strictly increasing index set among k-subsets of {0..dim-1}.
fn subset_rank(indices: &[usize], dim: usize) -> usize {
    let k = indices.len();
    let mut rank = 0;
    let mut prev: isize = -1;
    for (pos, &idx) in indices.iter().enumerate() {
        for skipped in (prev + 1) as usize..idx {
            rank += binomial(dim - skipped - 1, k - pos - 1);
        }
        prev = idx as isize;
    }
    rank
}

/// Enumerate all k-subsets of {0..dim-1} in lexicographic order.
fn subsets(dim: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(dim, k));
    let mut cur: Vec<usize> = (0..k).collect();
    if k > dim {
        return out;
    }
    loop {
        out.push(cur.clone());
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + dim - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Sign of the shuffle merging two disjoint sorted index sets `a` then `b`.
fn merge_sign(a: &[usize], b: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for &x in a {
        inversions += b.iter().filter(|&&y| y < x).count();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A constant real k-form on R^dim.
#[derive(Debug, Clone)]
pub struct RealForm {
    pub dim: usize,
    pub degree: usize,
    /// Coefficients indexed by lexicographic k-subset rank.
    pub coeffs: Vec<f64>,
}

impl RealForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        RealForm {
            dim,
            degree,
            coeffs: vec![0.0; binomial(dim, degree)],
        }
    }

    /// The standard symplectic form Σ dx^j ∧ dy^j on R^{2n} (x_1..x_n, y_1..y_n).
    pub fn standard_symplectic(n: usize) -> Self {
        let mut f = RealForm::zero(2 * n, 2);
        for j in 0..n {
            let r = subset_rank(&[j, n + j], 2 * n);
            f.coeffs[r] = 1.0;
        }
        f
    }

    pub fn set(&mut self, indices: &[usize], value: f64) {
        let r = subset_rank(indices, self.dim);
        self.coeffs[r] = value;
    }

    /// Wedge product with another constant form.
    pub fn wedge(&self, other: &RealForm) -> RealForm {
        assert_eq!(self.dim, other.dim);
        let mut out = RealForm::zero(self.dim, self.degree + other.degree);
        let lhs = subsets(self.dim, self.degree);
        let rhs = subsets(self.dim, other.degree);
        for (ia, sa) in lhs.iter().enumerate() {
            let ca = self.coeffs[ia];
            if ca == 0.0 {
                continue;
            }
            for (ib, sb) in rhs.iter().enumerate() {
                let cb = other.coeffs[ib];
                if cb == 0.0 {
                    continue;
                }
                if sa.iter().any(|x| sb.contains(x)) {
                    continue;
                }
                let mut merged: Vec<usize> = sa.iter().chain(sb.iter()).copied().collect();
                let sign = merge_sign(sa, sb);
                merged.sort_unstable();
                let r = subset_rank(&merged, self.dim);
                out.coeffs[r] += sign * ca * cb;
            }
        }
        out
    }

    /// Evaluate on `degree` many column vectors of length `dim`.
    pub fn eval(&self, vectors: &[DVector<f64>]) -> f64 {
        assert_eq!(vectors.len(), self.degree);
        let combos = subsets(self.dim, self.degree);
        let k = self.degree;
        let mut sub = DMatrix::<f64>::zeros(k, k);
        let mut acc = 0.0;
        for (ci, combo) in combos.iter().enumerate() {
            let c = self.coeffs[ci];
            if c == 0.0 {
                continue;
            }
            for (row, &idx) in combo.iter().enumerate() {
                for col in 0..k {
                    sub[(row, col)] = vectors[col][idx];
                }
            }
            acc += c * sub.determinant();
        }
        acc
    }

    /// Evaluate on the columns of a dim×k matrix.
    pub fn eval_matrix(&self, m: &DMatrix<f64>) -> f64 {
        let cols: Vec<DVector<f64>> = (0..m.ncols()).map(|j| m.column(j).into_owned()).collect();
        self.eval(&cols)
    }

    pub fn scale(&self, t: f64) -> RealForm {
        RealForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * t).collect(),
        }
    }

    pub fn add(&self, other: &RealForm) -> RealForm {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.degree, other.degree);
        RealForm {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// A constant complex k-form on R^{2n}, kept as a pair (Re, Im).
#[derive(Debug, Clone)]
pub struct ComplexForm {
    pub re: RealForm,
    pub im: RealForm,
}

impl ComplexForm {
    /// Wedge of complex covectors given by their components on (dx_1..dx_n, dy_1..dy_n).
    ///
    /// The coefficient on e_I (|I| = k) is the k×k determinant of the factor
    /// components at the columns I.
    pub fn from_covectors(dim: usize, factors: &[Vec<Complex64>]) -> Self {
        let k = factors.len();
        let combos = subsets(dim, k);
        let mut re = RealForm::zero(dim, k);
        let mut im = RealForm::zero(dim, k);
        let mut sub = DMatrix::<Complex64>::zeros(k, k);
        for (ci, combo) in combos.iter().enumerate() {
            for (row, factor) in factors.iter().enumerate() {
                for (col, &idx) in combo.iter().enumerate() {
                    sub[(row, col)] = factor[idx];
                }
            }
            let det = sub.clone().determinant();
            re.coeffs[ci] = det.re;
            im.coeffs[ci] = det.im;
        }
        ComplexForm { re, im }
    }

    /// dz^j as a complex covector on R^{2n}.
    pub fn dz(n: usize, j: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); 2 * n];
        v[j] = Complex64::new(1.0, 0.0);
        v[n + j] = Complex64::new(0.0, 1.0);
        v
    }

    /// dz̄^j as a complex covector on R^{2n}.
    pub fn dz_bar(n: usize, j: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); 2 * n];
        v[j] = Complex64::new(1.0, 0.0);
        v[n + j] = Complex64::new(0.0, -1.0);
        v
    }

    /// The holomorphic volume form Ω = dz^1 ∧ … ∧ dz^n.
    pub fn holomorphic_volume(n: usize) -> Self {
        let factors: Vec<Vec<Complex64>> = (0..n).map(|j| Self::dz(n, j)).collect();
        Self::from_covectors(2 * n, &factors)
    }

    pub fn scale_i(&self) -> ComplexForm {
        // multiplication by i: (re + i im) ↦ (-im + i re)
        ComplexForm {
            re: self.im.scale(-1.0),
            im: self.re.clone(),
        }
    }

    pub fn add(&self, other: &ComplexForm) -> ComplexForm {
        ComplexForm {
            re: self.re.add(&other.re),
            im: self.im.add(&other.im),
        }
    }

    pub fn wedge(&self, other: &ComplexForm) -> ComplexForm {
        // (a + ib) ∧ (c + id) = (a∧c − b∧d) + i(a∧d + b∧c)
        let re = self.re.wedge(&other.re).add(&self.im.wedge(&other.im).scale(-1.0));
        let im = self.re.wedge(&other.im).add(&self.im.wedge(&other.re));
        ComplexForm { re, im }
    }

    pub fn conjugate(&self) -> ComplexForm {
        ComplexForm {
            re: self.re.clone(),
            im: self.im.scale(-1.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn subset_rank_roundtrip() {
        let dim = 6;
        for k in 0..=dim {
            for (i, s) in subsets(dim, k).iter().enumerate() {
                assert_eq!(subset_rank(s, dim), i, "subset {s:?}");
            }
        }
    }

    #[test]
    fn symplectic_on_standard_pairs() {
        let n = 3;
        let om = RealForm::standard_symplectic(n);
        let e = |i: usize| DVector::from_fn(2 * n, |r, _| if r == i { 1.0 } else { 0.0 });
        assert_abs_diff_eq!(om.eval(&[e(0), e(3)]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(om.eval(&[e(3), e(0)]), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(om.eval(&[e(0), e(4)]), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn wedge_is_graded_antisymmetric() {
        // dx0 ∧ dx1 = -(dx1 ∧ dx0)
        let mut a = RealForm::zero(4, 1);
        a.set(&[0], 1.0);
        let mut b = RealForm::zero(4, 1);
        b.set(&[1], 1.0);
        let ab = a.wedge(&b);
        let ba = b.wedge(&a);
        for (x, y) in ab.coeffs.iter().zip(&ba.coeffs) {
            assert_abs_diff_eq!(*x, -*y, epsilon = 1e-15);
        }
    }

    #[test]
    fn holomorphic_volume_on_x_plane() {
        let n = 3;
        let omega = ComplexForm::holomorphic_volume(n);
        let cols: Vec<DVector<f64>> = (0..n)
            .map(|j| DVector::from_fn(2 * n, |r, _| if r == j { 1.0 } else { 0.0 }))
            .collect();
        assert_abs_diff_eq!(omega.re.eval(&cols), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(omega.im.eval(&cols), 0.0, epsilon = 1e-14);
    }
}
