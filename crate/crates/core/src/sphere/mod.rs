//! The unit sphere in the `(t, φ)` chart: quadrature, smooth functions,
//! Poisson bracket and partitions of unity.

mod function;
mod grid;
mod partition;

pub use function::{
    bracket_at, poisson_bracket, sup_norm, Smoothness, SphereFunction, BRACKET_KAPPA, FD_STEP,
};
pub use grid::{gauss_legendre, SphereGrid, SpherePoint};
pub use partition::{
    band_cover, band_partition, cap_partition, cap_partition_with_taper, covering_radius,
    platonic_centers, CoverSet, NuC, PartitionOfUnity, PartitionSpec, CAP_TAPER_EXPONENT,
    DEFAULT_RADIUS_FACTOR, TETRAHEDRAL_RADIUS,
};
