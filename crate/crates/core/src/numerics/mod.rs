//! Shared numerical kernels: adaptive quadrature over finite and infinite
//! intervals, bracketing root finding, and compensated summation.

mod quadrature;
mod roots;
mod summation;

pub use quadrature::{integrate, integrate_split, QuadratureResult, DEFAULT_QUADRATURE_TOL};
pub use roots::{bracket_scan, find_root, RootResult};
pub use summation::{compensated_sum, CompensatedSum};

use crate::Real;

/// Evaluation grid `lo, lo + step, ...` up to and including `hi` (within half
/// a step). Points are generated as `lo + i * step` so they do not drift.
pub fn uniform_grid<T: Real>(lo: T, hi: T, step: T) -> Vec<T> {
    assert!(step > T::zero() && hi >= lo, "bad grid request");
    let count = ((hi - lo) / step + T::cast(0.5)).floor().to_usize().unwrap_or(0);
    (0..=count).map(|i| lo + T::cast(i) * step).collect()
}
