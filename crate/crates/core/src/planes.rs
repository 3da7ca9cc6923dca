//! Oriented Lagrangian planes in C^n and the angle-criterion decision procedure.
//!
//! An oriented n-plane is stored as a 2n×n matrix with orthonormal columns; the
//! orientation is the orientation of the ordered columns. Reversing orientation
//! swaps the first two columns, so no separate sign field can drift out of sync.
//!
//! Two routes into the angle algebra coexist:
//! * `characterizing_angles` works for *any* pair of oriented planes through the
//!   SVD of the cross-Gram matrix and also returns the adapted orthonormal basis
//!   realizing the normal form;
//! * `canonical_slag_angles` is specific to transverse special Lagrangian pairs:
//!   each plane is written as U·R^n for a unitary U, and the relative unitary
//!   W = U_η^{-1}U_ξ is reduced through the spectral decomposition of the complex
//!   symmetric unitary W·Wᵀ, whose eigenvalue arguments are twice the angles.

use crate::cy::StandardCY;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Orthonormality tolerance for plane bases.
pub const TOL_ORTHONORMAL: f64 = 1e-12;
/// Tolerance under which a plane counts as Lagrangian.
pub const TOL_LAGRANGIAN: f64 = 1e-10;
/// Tolerance under which a Lagrangian plane counts as special Lagrangian.
pub const TOL_SLAG: f64 = 1e-8;
/// A pair is non-transverse when a characterizing angle is this close to 0 or π.
pub const TRANSVERSALITY_THRESHOLD: f64 = 1e-9;
/// Default absolute tolerance on the angle-criterion sum.
pub const TOL_CRITERION: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum PlaneError {
    #[error("basis columns are not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },
    #[error("spanning set is rank deficient (pivot {pivot:.3e})")]
    RankDeficient { pivot: f64 },
    #[error("plane is not Lagrangian (sup |ω| = {residual:.3e})")]
    NotLagrangian { residual: f64 },
    #[error("plane is not special Lagrangian (phase {phase:.3e})")]
    NotSpecialLagrangian { phase: f64 },
    #[error("planes are not transverse (characterizing angle {angle:.3e} below threshold {threshold:.1e})")]
    NotTransverse { angle: f64, threshold: f64 },
    #[error("dimension mismatch: n = {0} vs n = {1}")]
    DimensionMismatch(usize, usize),
}

/// Which normal form an angle multiset refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngleKind {
    Characterizing,
    CanonicalSlag,
}

/// Sign dichotomy of Lemma-style canonical angles: all positive summing to π,
/// all negative summing to −π, or neither (criterion fails).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignCase {
    Positive,
    Negative,
    NotApplicable,
}

/// An unordered multiset of n angles, stored sorted ascending.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AngleList {
    pub angles: Vec<f64>,
    pub kind: AngleKind,
    pub sign_case: SignCase,
}

impl AngleList {
    pub fn sum(&self) -> f64 {
        self.angles.iter().sum()
    }

    pub fn abs_sum(&self) -> f64 {
        self.angles.iter().map(|a| a.abs()).sum()
    }

    /// Multiset comparison after sorting, within `tol` per entry.
    pub fn approx_eq(&self, other: &AngleList, tol: f64) -> bool {
        self.angles.len() == other.angles.len()
            && self
                .angles
                .iter()
                .zip(&other.angles)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// An oriented n-dimensional linear subspace of R^{2n}.
#[derive(Debug, Clone)]
pub struct OrientedPlane {
    n: usize,
    basis: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct PlaneRepr {
    n: usize,
    /// Row-major 2n×n array.
    basis: Vec<Vec<f64>>,
}

impl Serialize for OrientedPlane {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows = (0..2 * self.n)
            .map(|r| (0..self.n).map(|c| self.basis[(r, c)]).collect())
            .collect();
        PlaneRepr { n: self.n, basis: rows }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrientedPlane {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = PlaneRepr::deserialize(d)?;
        let m = DMatrix::from_fn(2 * repr.n, repr.n, |r, c| repr.basis[r][c]);
        OrientedPlane::from_orthonormal(m).map_err(serde::de::Error::custom)
    }
}

impl OrientedPlane {
    /// Wrap a 2n×n matrix whose columns are already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Result<Self, PlaneError> {
        let n = basis.ncols();
        if basis.nrows() != 2 * n {
            return Err(PlaneError::DimensionMismatch(basis.nrows(), 2 * n));
        }
        let gram = basis.transpose() * &basis;
        let residual = (&gram - DMatrix::identity(n, n)).abs().max();
        if residual > TOL_ORTHONORMAL {
            return Err(PlaneError::NotOrthonormal { residual });
        }
        Ok(OrientedPlane { n, basis })
    }

    /// Orthonormalize a spanning set, preserving the orientation of the given
    /// column order.
    pub fn from_spanning(cols: DMatrix<f64>) -> Result<Self, PlaneError> {
        let n = cols.ncols();
        let qr = cols.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            let piv = r[(j, j)];
            if piv.abs() < 1e-10 {
                return Err(PlaneError::RankDeficient { pivot: piv.abs() });
            }
            if piv < 0.0 {
                for i in 0..q.nrows() {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        OrientedPlane::from_orthonormal(q)
    }

    /// P(φ_1, …, φ_n): span of cos(φ_j)∂x^j + sin(φ_j)∂y^j with the orientation
    /// of that ordered wedge.
    pub fn from_angles(n: usize, phis: &[f64]) -> Self {
        assert_eq!(phis.len(), n);
        let mut basis = DMatrix::zeros(2 * n, n);
        for (j, &phi) in phis.iter().enumerate() {
            basis[(j, j)] = phi.cos();
            basis[(n + j, j)] = phi.sin();
        }
        OrientedPlane { n, basis }
    }

    /// The x-plane ∂x^1 ∧ … ∧ ∂x^n.
    pub fn x_plane(n: usize) -> Self {
        Self::from_angles(n, &vec![0.0; n])
    }

    /// The y-plane ∂y^1 ∧ … ∧ ∂y^n.
    pub fn y_plane(n: usize) -> Self {
        Self::from_angles(n, &vec![PI / 2.0; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Same span, opposite orientation.
    pub fn neg(&self) -> Self {
        let mut basis = self.basis.clone();
        if self.n == 1 {
            basis = -basis;
        } else {
            basis.swap_columns(0, 1);
        }
        OrientedPlane { n: self.n, basis }
    }

    /// The plane as a unitary-ish complex n×n matrix (columns complexified).
    pub fn complex_matrix(&self) -> DMatrix<Complex64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |r, c| {
            Complex64::new(self.basis[(r, c)], self.basis[(n + r, c)])
        })
    }

    /// Orthogonal projector onto the (unoriented) span.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Distance from a point to the unoriented span.
    pub fn distance(&self, p: &DVector<f64>) -> f64 {
        (p - self.projector() * p).norm()
    }

    /// Equal as oriented planes: spans agree and orientations match.
    pub fn approx_eq(&self, other: &OrientedPlane, tol: f64) -> bool {
        if self.n != other.n {
            return false;
        }
        let span = (self.projector() - other.projector()).abs().max();
        if span > tol {
            return false;
        }
        (self.basis.transpose() * &other.basis).determinant() > 0.0
    }

    /// sup over basis pairs of |ω(u, v)|.
    pub fn lagrangian_residual(&self) -> f64 {
        let cy = StandardCY::new(self.n);
        let mut sup: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let u = self.basis.column(i).into_owned();
                let v = self.basis.column(j).into_owned();
                sup = sup.max(cy.omega(&u, &v).abs());
            }
        }
        sup
    }

    pub fn is_lagrangian(&self, tol: f64) -> bool {
        self.lagrangian_residual() <= tol
    }

    /// The Lagrangian phase θ ∈ (−π, π] with Ω|_plane = e^{iθ} vol.
    pub fn slag_phase(&self) -> Result<f64, PlaneError> {
        let res = self.lagrangian_residual();
        if res > TOL_LAGRANGIAN {
            return Err(PlaneError::NotLagrangian { residual: res });
        }
        let cy = StandardCY::new(self.n);
        Ok(cy.omega_hol_matrix(&self.basis).arg())
    }

    pub fn is_special_lagrangian(&self, tol: f64) -> bool {
        matches!(self.slag_phase(), Ok(phase) if phase.abs() <= tol)
    }

    /// Image of the plane under a complex-linear map (columns are mapped and
    /// re-orthonormalized; for unitary input the QR is a no-op up to roundoff).
    pub fn apply_unitary(&self, u: &DMatrix<Complex64>) -> Result<Self, PlaneError> {
        let n = self.n;
        let z = u * self.complex_matrix();
        let mut real = DMatrix::zeros(2 * n, n);
        for c in 0..n {
            for r in 0..n {
                real[(r, c)] = z[(r, c)].re;
                real[(n + r, c)] = z[(r, c)].im;
            }
        }
        OrientedPlane::from_spanning(real)
    }

    /// Haar-ish random special Lagrangian plane: QR of a complex Ginibre matrix,
    /// phase-normalized to det = 1.
    pub fn random_slag<R: Rng>(n: usize, rng: &mut R) -> Self {
        use rand_distr::{Distribution, StandardNormal};
        let normal = StandardNormal;
        let g = DMatrix::from_fn(n, n, |_, _| {
            Complex64::new(normal.sample(rng), normal.sample(rng))
        });
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = d / Complex64::new(d.norm(), 0.0);
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        // det(q) is now a unit complex number; spread its inverse phase evenly.
        let det = q.determinant();
        let corr = Complex64::from_polar(1.0, -det.arg() / n as f64);
        q *= corr;
        let mut real = DMatrix::zeros(2 * n, n);
        for c in 0..n {
            for r2 in 0..n {
                real[(r2, c)] = q[(r2, c)].re;
                real[(n + r2, c)] = q[(r2, c)].im;
            }
        }
        OrientedPlane::from_orthonormal(real).expect("unitary columns are orthonormal")
    }
}

/// Result of the characterizing-angle normal form.
#[derive(Debug, Clone)]
pub struct CharacterizingData {
    pub angles: AngleList,
    /// Adapted orthonormal basis e_1..e_{2n} as matrix columns; the first n
    /// columns span η with its orientation.
    pub basis: DMatrix<f64>,
}

impl CharacterizingData {
    /// Rebuild (η, ξ) from the stored normal form.
    pub fn reconstruct(&self) -> (OrientedPlane, OrientedPlane) {
        let n = self.angles.angles.len();
        let eta_basis = self.basis.columns(0, n).into_owned();
        let mut xi_basis = DMatrix::zeros(2 * n, n);
        for (j, &theta) in self.angles.angles.iter().enumerate() {
            let u = self.basis.column(j);
            let w = self.basis.column(n + j);
            let col = u * theta.cos() + w * theta.sin();
            xi_basis.set_column(j, &col);
        }
        (
            OrientedPlane::from_orthonormal(eta_basis).expect("adapted basis orthonormal"),
            OrientedPlane::from_orthonormal(xi_basis).expect("adapted basis orthonormal"),
        )
    }

    /// Max reconstruction error against the given pair (projector + orientation).
    pub fn reconstruction_residual(&self, eta: &OrientedPlane, xi: &OrientedPlane) -> f64 {
        let (eta2, xi2) = self.reconstruct();
        let r1 = (eta.projector() - eta2.projector()).abs().max();
        let r2 = (xi.projector() - xi2.projector()).abs().max();
        let o1 = (eta.basis().transpose() * eta2.basis()).determinant();
        let o2 = (xi.basis().transpose() * xi2.basis()).determinant();
        let orientation_ok = o1 > 0.0 && o2 > 0.0;
        if orientation_ok {
            r1.max(r2)
        } else {
            f64::INFINITY
        }
    }
}

/// Characterizing angles of an ordered pair of oriented planes, together with
/// an adapted orthonormal basis of R^{2n}. Defined for all pairs.
pub fn characterizing_angles(
    eta: &OrientedPlane,
    xi: &OrientedPlane,
) -> Result<CharacterizingData, PlaneError> {
    if eta.n != xi.n {
        return Err(PlaneError::DimensionMismatch(eta.n, xi.n));
    }
    let n = eta.n;
    let a = eta.basis.transpose() * &xi.basis;
    let svd = a.svd(true, true);
    let mut u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let mut v = vt.transpose();
    let mut sigma: Vec<f64> = svd.singular_values.iter().copied().collect();

    // Sort descending so angles come out ascending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let up = DMatrix::from_fn(n, n, |r, c| u[(r, order[c])]);
    let vp = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    sigma = order.iter().map(|&i| sigma[i]).collect();
    u = up;
    v = vp;

    // Restore orientation of both frames; an odd mismatch moves the last angle
    // past π/2 instead.
    let du = u.determinant();
    let dv = v.determinant();
    let mut cosines: Vec<f64> = sigma.iter().map(|s| s.min(1.0)).collect();
    if du < 0.0 {
        for r in 0..n {
            u[(r, n - 1)] = -u[(r, n - 1)];
        }
        cosines[n - 1] = -cosines[n - 1];
    }
    if dv < 0.0 {
        for r in 0..n {
            v[(r, n - 1)] = -v[(r, n - 1)];
        }
        cosines[n - 1] = -cosines[n - 1];
    }

    let u_frame = &eta.basis * &u; // columns u_1..u_n
    let v_frame = &xi.basis * &v; // columns v_1..v_n
    // Snap cosines within roundoff of ±1; arccos loses half the digits there.
    let angles: Vec<f64> = cosines
        .iter()
        .map(|c| {
            if *c > 1.0 - 1e-14 {
                0.0
            } else if *c < -1.0 + 1e-14 {
                PI
            } else {
                c.acos()
            }
        })
        .collect();

    // w_j = (v_j − cosθ_j u_j)/sinθ_j where defined; complete the rest.
    let mut e = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        e.set_column(j, &u_frame.column(j));
    }
    let mut pending: Vec<usize> = Vec::new();
    for j in 0..n {
        let s = angles[j].sin();
        if s > 1e-7 {
            let w = (v_frame.column(j) - u_frame.column(j) * angles[j].cos()) / s;
            e.set_column(n + j, &w);
        } else {
            pending.push(j);
        }
    }
    // Gram–Schmidt completion against everything already placed.
    for &j in &pending {
        let mut best: Option<DVector<f64>> = None;
        let mut best_norm = 0.0;
        for cand_idx in 0..2 * n {
            let mut cand = DVector::from_fn(2 * n, |r, _| if r == cand_idx { 1.0 } else { 0.0 });
            for col in 0..2 * n {
                let ec = e.column(col);
                if ec.norm() > 0.5 {
                    let proj = ec.dot(&cand);
                    cand -= ec.into_owned() * proj;
                }
            }
            let norm = cand.norm();
            if norm > best_norm {
                best_norm = norm;
                best = Some(cand / norm);
            }
        }
        e.set_column(n + j, &best.expect("completion vector exists"));
    }

    Ok(CharacterizingData {
        angles: AngleList {
            angles,
            kind: AngleKind::Characterizing,
            sign_case: SignCase::NotApplicable,
        },
        basis: e,
    })
}

/// Simultaneous spectral decomposition of the commuting symmetric pair
/// (Re M, Im M) of a symmetric unitary M; returns (Q, diagonal of QᵀMQ).
fn symmetric_unitary_eigenbasis(m: &DMatrix<Complex64>) -> (DMatrix<f64>, Vec<Complex64>) {
    let n = m.nrows();
    let a = DMatrix::from_fn(n, n, |r, c| 0.5 * (m[(r, c)].re + m[(c, r)].re));
    let b = DMatrix::from_fn(n, n, |r, c| 0.5 * (m[(r, c)].im + m[(c, r)].im));
    let eig = nalgebra::SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap()
    });
    let mut q = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    // Break A-eigenvalue clusters with the commuting B.
    let cluster_tol = 1e-7;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (vals[end] - vals[end - 1]).abs() <= cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let block = q.columns(start, end - start).into_owned();
            let sub = block.transpose() * &b * &block;
            let sub_sym = DMatrix::from_fn(end - start, end - start, |r, c| {
                0.5 * (sub[(r, c)] + sub[(c, r)])
            });
            let sub_eig = nalgebra::SymmetricEigen::new(sub_sym);
            let rotated = &block * sub_eig.eigenvectors;
            for (k, col) in (start..end).enumerate() {
                q.set_column(col, &rotated.column(k));
            }
        }
        start = end;
    }

    if q.determinant() < 0.0 {
        let last = n - 1;
        for r in 0..n {
            q[(r, last)] = -q[(r, last)];
        }
    }
    let qc = q.map(|x| Complex64::new(x, 0.0));
    let d = qc.transpose() * m * &qc;
    let diag = (0..n).map(|j| d[(j, j)]).collect();
    (q, diag)
}

fn require_slag(p: &OrientedPlane) -> Result<(), PlaneError> {
    let phase = p.slag_phase()?;
    if phase.abs() > TOL_SLAG {
        return Err(PlaneError::NotSpecialLagrangian { phase });
    }
    Ok(())
}

/// The canonical unordered angle list φ_1..φ_n with −ξ = P(φ_1, …, φ_n) in
/// coordinates where η = P(0, …, 0), plus the sign case of the Lemma dichotomy.
pub fn canonical_slag_angles(
    eta: &OrientedPlane,
    xi: &OrientedPlane,
) -> Result<AngleList, PlaneError> {
    if eta.n != xi.n {
        return Err(PlaneError::DimensionMismatch(eta.n, xi.n));
    }
    let n = eta.n;
    require_slag(eta)?;
    require_slag(xi)?;

    let w = eta.complex_matrix().adjoint() * xi.complex_matrix();
    let m = &w * w.transpose();
    let (q, diag) = symmetric_unitary_eigenbasis(&m);

    // Halved eigenvalue arguments, i.e. the angles mod π in (−π/2, π/2].
    let mut phis: Vec<f64> = diag.iter().map(|z| z.arg() / 2.0).collect();
    for phi in &phis {
        let dist = phi.abs().min(PI - phi.abs());
        if dist < TRANSVERSALITY_THRESHOLD {
            return Err(PlaneError::NotTransverse {
                angle: dist,
                threshold: TRANSVERSALITY_THRESHOLD,
            });
        }
    }

    // W = Q·D·Oᵀ with O real orthogonal; det O tells the orientation carried by
    // the current lifts: ξ = P(φ)·sign(det O).
    let qc = q.map(|x| Complex64::new(x, 0.0));
    let d_inv = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::from_polar(1.0, -phis[r])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let o_t = d_inv * qc.transpose() * &w;
    let o_real = o_t.map(|z| z.re);
    debug_assert!(
        o_t.iter().map(|z| z.im.abs()).fold(0.0, f64::max) < 1e-7,
        "O factor should be real"
    );
    let det_o = o_real.determinant();

    if det_o > 0.0 {
        // −ξ currently equals −P(φ): push one lift across π to flip. The entry
        // allowed outside (−π/2, π/2] is the one of largest |φ|, ties broken by
        // the largest index after sorting by value.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| phis[i].partial_cmp(&phis[j]).unwrap());
        let max_abs = phis.iter().map(|p| p.abs()).fold(0.0, f64::max);
        let j_star = *order
            .iter()
            .rev()
            .find(|&&j| phis[j].abs() >= max_abs - 1e-12)
            .expect("nonempty");
        phis[j_star] -= phis[j_star].signum() * PI;
    }

    phis.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let abs_sum: f64 = phis.iter().map(|p| p.abs()).sum();
    let signed_sum: f64 = phis.iter().sum();
    let sign_case = if (abs_sum - PI).abs() <= TOL_CRITERION {
        if signed_sum > 0.0 {
            SignCase::Positive
        } else {
            SignCase::Negative
        }
    } else {
        SignCase::NotApplicable
    };

    Ok(AngleList {
        angles: phis,
        kind: AngleKind::CanonicalSlag,
        sign_case,
    })
}

/// Angle criterion: the characterizing angles between η and −ξ sum to π.
pub fn angle_criterion(
    eta: &OrientedPlane,
    xi: &OrientedPlane,
    tol: f64,
) -> Result<bool, PlaneError> {
    let canon = canonical_slag_angles(eta, xi)?;
    Ok((canon.abs_sum() - PI).abs() <= tol)
}

/// Lawlor–Nance predicate: the pair is minimizing iff the characterizing angles
/// between η and −ξ sum to at least π.
pub fn lawlor_nance_minimizing(
    eta: &OrientedPlane,
    xi: &OrientedPlane,
    tol: f64,
) -> Result<bool, PlaneError> {
    let canon = canonical_slag_angles(eta, xi)?;
    Ok(canon.abs_sum() >= PI - tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_angles_give_x_plane() {
        let p = OrientedPlane::from_angles(3, &[0.0, 0.0, 0.0]);
        assert!(p.approx_eq(&OrientedPlane::x_plane(3), 1e-14));
    }

    #[test]
    fn two_pi_shifts_preserve_orientation() {
        let p = OrientedPlane::from_angles(2, &[PI, PI]);
        let q = OrientedPlane::from_angles(2, &[0.0, 0.0]);
        assert!(p.approx_eq(&q, 1e-14));
    }

    #[test]
    fn one_pi_shift_flips_orientation() {
        let p = OrientedPlane::from_angles(2, &[PI, 0.0]);
        let q = OrientedPlane::from_angles(2, &[0.0, 0.0]);
        assert!(!p.approx_eq(&q, 1e-12));
        assert!(p.approx_eq(&q.neg(), 1e-12));
    }

    #[test]
    fn x_plane_is_slag() {
        let p = OrientedPlane::x_plane(3);
        assert!(p.is_lagrangian(1e-14));
        assert_abs_diff_eq!(p.slag_phase().unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn mixed_span_is_not_lagrangian() {
        // span(∂x¹, ∂y¹, ∂x²) for n = 3
        let mut basis = DMatrix::zeros(6, 3);
        basis[(0, 0)] = 1.0;
        basis[(3, 1)] = 1.0;
        basis[(1, 2)] = 1.0;
        let p = OrientedPlane::from_orthonormal(basis).unwrap();
        assert!(!p.is_lagrangian(1e-10));
        assert!(matches!(p.slag_phase(), Err(PlaneError::NotLagrangian { .. })));
    }

    #[test]
    fn phase_is_angle_sum_mod_2pi() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let n = 2 + (rng.gen::<u64>() % 3) as usize;
            let phis: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 * PI - PI).collect();
            let p = OrientedPlane::from_angles(n, &phis);
            let phase = p.slag_phase().unwrap();
            let expected = phis.iter().sum::<f64>();
            let diff = (phase - expected).rem_euclid(2.0 * PI);
            let diff = diff.min(2.0 * PI - diff);
            assert!(diff < 1e-10, "phase {phase} vs sum {expected}");
        }
    }

    #[test]
    fn arctan_identity_plane_is_slag_after_flip() {
        let phis = [1f64.atan(), 2f64.atan(), 3f64.atan()];
        assert_abs_diff_eq!(phis.iter().sum::<f64>(), PI, epsilon = 1e-15);
        let p = OrientedPlane::from_angles(3, &phis).neg();
        assert_abs_diff_eq!(p.slag_phase().unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn characterizing_identity_pair_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = OrientedPlane::random_slag(3, &mut rng);
        let data = characterizing_angles(&p, &p).unwrap();
        for a in &data.angles.angles {
            assert_abs_diff_eq!(*a, 0.0, epsilon = 1e-7);
        }
        assert!(data.reconstruction_residual(&p, &p) < 1e-10);
    }

    #[test]
    fn characterizing_x_vs_y_plane_n2() {
        let x = OrientedPlane::x_plane(2);
        let y = OrientedPlane::y_plane(2);
        let data = characterizing_angles(&x, &y).unwrap();
        assert_abs_diff_eq!(data.angles.angles[0], PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(data.angles.angles[1], PI / 2.0, epsilon = 1e-12);
        assert!(data.reconstruction_residual(&x, &y) < 1e-10);
    }

    #[test]
    fn characterizing_recovers_p_phi_angles() {
        let x = OrientedPlane::x_plane(3);
        let p = OrientedPlane::from_angles(3, &[0.3, 0.5, 0.9]);
        let data = characterizing_angles(&x, &p).unwrap();
        let mut got = data.angles.angles.clone();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(got[0], 0.3, epsilon = 1e-10);
        assert_abs_diff_eq!(got[1], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(got[2], 0.9, epsilon = 1e-10);
        assert!(data.reconstruction_residual(&x, &p) < 1e-10);
    }

    #[test]
    fn canonical_symmetric_case() {
        let x = OrientedPlane::x_plane(3);
        let xi = OrientedPlane::from_angles(3, &[PI / 3.0, PI / 3.0, PI / 3.0]).neg();
        let canon = canonical_slag_angles(&x, &xi).unwrap();
        for a in &canon.angles {
            assert_abs_diff_eq!(*a, PI / 3.0, epsilon = 1e-10);
        }
        assert_eq!(canon.sign_case, SignCase::Positive);
    }

    #[test]
    fn canonical_rejects_non_transverse() {
        let x = OrientedPlane::x_plane(3);
        assert!(matches!(
            canonical_slag_angles(&x, &x),
            Err(PlaneError::NotTransverse { .. })
        ));
    }

    #[test]
    fn canonical_arctan_identity() {
        let phis = [1f64.atan(), 2f64.atan(), 3f64.atan()];
        let x = OrientedPlane::x_plane(3);
        let xi = OrientedPlane::from_angles(3, &phis).neg();
        let canon = canonical_slag_angles(&x, &xi).unwrap();
        let mut expected = phis.to_vec();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in canon.angles.iter().zip(&expected) {
            assert_abs_diff_eq!(*got, *want, epsilon = 1e-10);
        }
        assert_eq!(canon.sign_case, SignCase::Positive);
        assert!(angle_criterion(&x, &xi, TOL_CRITERION).unwrap());
    }

    #[test]
    fn criterion_violated_in_n4() {
        // Σφ = π but mixed signs: transverse SLag pair failing the criterion.
        let phis = [3.0 * PI / 8.0, 3.0 * PI / 8.0, 3.0 * PI / 8.0, -PI / 8.0];
        assert_abs_diff_eq!(phis.iter().sum::<f64>(), PI, epsilon = 1e-15);
        let x = OrientedPlane::x_plane(4);
        let xi = OrientedPlane::from_angles(4, &phis).neg();
        assert!(xi.is_special_lagrangian(1e-10));
        let canon = canonical_slag_angles(&x, &xi).unwrap();
        assert_eq!(canon.sign_case, SignCase::NotApplicable);
        assert!(!angle_criterion(&x, &xi, TOL_CRITERION).unwrap());
        // Such pairs are still minimizing: the abs sum exceeds π.
        assert!(lawlor_nance_minimizing(&x, &xi, TOL_CRITERION).unwrap());
        assert!(canon.abs_sum() > PI + 0.1);
    }

    #[test]
    fn symmetric_pi4_case_n4() {
        let x = OrientedPlane::x_plane(4);
        let xi = OrientedPlane::from_angles(4, &[PI / 4.0; 4]).neg();
        assert!(angle_criterion(&x, &xi, TOL_CRITERION).unwrap());
    }

    #[test]
    fn every_random_slag_pair_satisfies_criterion_n3() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let eta = OrientedPlane::random_slag(3, &mut rng);
            let xi = OrientedPlane::random_slag(3, &mut rng);
            match angle_criterion(&eta, &xi, TOL_CRITERION) {
                Ok(ok) => assert!(ok, "criterion must hold at n = 3"),
                Err(PlaneError::NotTransverse { .. }) => continue,
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn su_invariance_of_characterizing_angles() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let eta = OrientedPlane::random_slag(3, &mut rng);
            let xi = OrientedPlane::random_slag(3, &mut rng);
            let u = OrientedPlane::random_slag(3, &mut rng).complex_matrix();
            let eta_u = eta.apply_unitary(&u).unwrap();
            let xi_u = xi.apply_unitary(&u).unwrap();
            let a = characterizing_angles(&eta, &xi).unwrap().angles;
            let b = characterizing_angles(&eta_u, &xi_u).unwrap().angles;
            assert!(a.approx_eq(&b, 1e-8), "{:?} vs {:?}", a.angles, b.angles);
        }
    }

    #[test]
    fn canonical_abs_matches_characterizing_of_neg_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let eta = OrientedPlane::random_slag(3, &mut rng);
            let xi = OrientedPlane::random_slag(3, &mut rng);
            let canon = match canonical_slag_angles(&eta, &xi) {
                Ok(c) => c,
                Err(_) => continue,
            };
            let char_data = characterizing_angles(&eta, &xi.neg()).unwrap();
            let mut abs: Vec<f64> = canon.angles.iter().map(|a| a.abs()).collect();
            abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (got, want) in abs.iter().zip(&char_data.angles.angles) {
                assert_abs_diff_eq!(*got, *want, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn sign_case_dichotomy_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let eta = OrientedPlane::random_slag(3, &mut rng);
            let xi = OrientedPlane::random_slag(3, &mut rng);
            let canon = match canonical_slag_angles(&eta, &xi) {
                Ok(c) => c,
                Err(_) => continue,
            };
            match canon.sign_case {
                SignCase::Positive => {
                    assert!(canon.angles.iter().all(|&a| a > 0.0));
                    assert_abs_diff_eq!(canon.sum(), PI, epsilon = 1e-8);
                }
                SignCase::Negative => {
                    assert!(canon.angles.iter().all(|&a| a < 0.0));
                    assert_abs_diff_eq!(canon.sum(), -PI, epsilon = 1e-8);
                }
                SignCase::NotApplicable => panic!("criterion always holds at n = 3"),
            }
        }
    }

    #[test]
    fn reconstruction_residual_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let eta = OrientedPlane::random_slag(4, &mut rng);
            let xi = OrientedPlane::random_slag(4, &mut rng);
            let data = characterizing_angles(&eta, &xi).unwrap();
            assert!(
                data.reconstruction_residual(&eta, &xi) < 1e-10,
                "normal form must reproduce the pair"
            );
        }
    }

    #[test]
    fn plane_json_roundtrip() {
        let p = OrientedPlane::from_angles(3, &[0.2, -0.4, 1.1]);
        let json = serde_json::to_string(&p).unwrap();
        let q: OrientedPlane = serde_json::from_str(&json).unwrap();
        assert!(p.approx_eq(&q, 1e-12));
    }
}
