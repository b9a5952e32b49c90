//! Linear (P1) triangular finite elements on structured meshes.
//!
//! Meshes are uniform grids split into two right triangles per cell, either
//! on a box (with a tagged scatterer square whose boundary follows element
//! edges) or on a periodic torus. Assembly produces a [`SparseMatrix`] for
//! the bilinear form `∫ a∇u·∇v + ∫ c u v + γ∫_∂Ω u v`; no complex
//! conjugation is applied since the basis functions are real.

mod assembly;
mod field;
mod mesh;
mod sparse;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

pub use assembly::{
    assemble, assemble_load, element_residual, integrate_boundary_load, local_mass,
    local_stiffness, Coefficients, Load,
};
pub use field::{FieldP1, NormKind};
pub use mesh::{
    build_box_mesh, build_torus_mesh, BoundaryEdge, DofMap, FeSpace, Grid, Region, TriMesh,
};
pub use sparse::{solve_linear, Factorization, SparseMatrix, TripletBuilder, SOLVE_TOLERANCE};

pub type ComplexSparseMatrix = SparseMatrix<Complex64>;

/// Nodal value type: `f64` for corrector fields, `Complex64` for wave fields.
pub trait Scalar:
    Copy
    + Default
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Mul<f64, Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + faer::traits::ComplexField
    + 'static
{
    fn from_real(x: f64) -> Self;
    /// Squared modulus.
    fn abs2(self) -> f64;
    fn is_finite_value(self) -> bool;
    /// `Re(self · conj(other))`.
    fn real_inner(self, other: Self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn abs2(self) -> f64 {
        self * self
    }
    #[inline]
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
    #[inline]
    fn real_inner(self, other: Self) -> f64 {
        self * other
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn abs2(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn real_inner(self, other: Self) -> f64 {
        self.re * other.re + self.im * other.im
    }
}
