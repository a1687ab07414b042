//! Adaptive anisotropic virtual element solver for the Poisson problem
//! `-Δu = f` with homogeneous Dirichlet conditions on convex polygonal
//! meshes of the unit square.
//!
//! The pipeline is the classical SOLVE -> ESTIMATE -> MARK -> REFINE
//! loop. Cell anisotropy is read off the spectral decomposition of the
//! polygon covariance matrix; the a posteriori indicators weight the
//! residual and flux-jump terms with a Zienkiewicz-Zhu reconstruction of
//! the error-gradient tensor, and marked cells are cut by a straight
//! line whose direction comes from that tensor (or from the cell shape
//! when the shape anisotropy dominates).
//!
//! Modules:
//! - [`geometry`]: polygon moments, covariance eigenanalysis, clipping,
//!   quadrature, scaled monomials.
//! - [`mesh`]: polygonal mesh container with edge adjacency, cell
//!   splitting and regularity diagnostics.
//! - [`vem`]: virtual element discretisation of orders 1 and 2.
//! - [`recovery`]: gradient recovery and error-gradient tensors.
//! - [`estimator`]: anisotropic and isotropic error indicators.
//! - [`adapt`]: Dörfler marking and the adaptive refinement loop.
//! - [`cases`]: manufactured boundary-layer test problems.
//! - [`io`]: CSV/VTK writers, mesh serialisation, rate fitting, CLI
//!   driver.

pub mod adapt;
pub mod cases;
pub mod estimator;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod recovery;
pub mod vem;

#[cfg(test)]
pub(crate) mod testutil;
