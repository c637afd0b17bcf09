//! Interior transmission eigenvalues from eigenvalue-curve sweeps.
//!
//! A λ-dependent symmetric matrix family `A(λ)` is assembled once from six
//! Galerkin matrices on a clamped cubic spline space. Sweeping λ and
//! tracking the sorted eigenvalues of `(A(λ), Mw)` locates transmission
//! eigenvalues as zero crossings. For balls with constant potential an
//! independent Bessel-determinant oracle gives reference values.

pub mod assembly;
pub mod cli;
pub mod curves;
mod dd;
pub mod eigensolve;
pub mod experiments;
pub mod matrix;
pub mod model;
pub mod output;
pub mod radial;
pub mod specfun;
