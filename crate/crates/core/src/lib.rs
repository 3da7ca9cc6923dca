//! Numerical laboratory for connected sums of special Lagrangian submanifolds.
//!
//! Everything happens in `C^n = R^{2n}` with the standard Calabi-Yau structure
//! (coordinates ordered `x_1..x_n, y_1..y_n`). The crate builds, from the ground
//! up, each constructive ingredient of the gluing argument:
//!
//! * [`planes`] — oriented (special) Lagrangian planes, characterizing angles and
//!   the angle-criterion decision procedure;
//! * [`lawlor`] — Lawlor necks: the λ ↔ θ angle integrals, sampling, and special
//!   Lagrangian residual checks;
//! * [`torus`] — flat SLag subtori of Calabi-Yau tori, intersection counting by
//!   Smith normal form, and the torus deformation pairing;
//! * [`gluing`] — the exactly Lagrangian approximate solution obtained by cutting
//!   out a ball and cutting off the neck potential, with its residual scalings;
//! * [`spectral`] — a finite-volume discretization of the glued manifold, its low
//!   Laplacian eigenvalues, the linearized deformation operator and the
//!   inverse-function-theorem feasibility arithmetic;
//! * [`cli`] — the batch experiment runner behind the `slag-lab` binary.

pub mod cli;
pub mod cy;
pub mod exterior;
pub mod fit;
pub mod gluing;
pub mod intmat;
pub mod lawlor;
pub mod mesh;
pub mod planes;
pub mod quad;
pub mod solver;
pub mod spectral;
pub mod torus;

pub use cy::StandardCY;
pub use planes::{AngleKind, AngleList, OrientedPlane, SignCase};
