//! Helmholtz scattering on a truncated box: special functions, the outgoing
//! Green function, the finite element solve, flux recovery on the scatterer
//! boundary, the exterior representation and a disk benchmark.

mod bessel;
mod cylinder;
mod exterior;
mod flux;
mod green;
mod helmholtz;

pub use bessel::{
    bessel_j, bessel_j_orders, bessel_jy, bessel_y_orders, derivatives, hankel1_orders,
};
pub use cylinder::{disk_area_fractions, disk_index_field, series_order, CylinderSeries, Disk};
pub use exterior::{format_values_csv, parse_points, ExteriorRepresentation};
pub use flux::{recover_flux, InterfaceTrace};
pub use green::{grad_green_2d, green_2d, green_with_gradient};
pub use helmholtz::{
    solve_helmholtz, HelmholtzOperator, PlaneWave, ScatterSolution, SolutionKind, TruncationClosure,
};
