//! Small numerical toolbox: vectors with the gyro-rotation action, Bessel
//! evaluations tuned for smooth differencing, and the quadrature rules the
//! rest of the crate leans on.

mod bessel;
mod quad;
mod vec3;

pub use bessel::{bessel_j0, bessel_j1, j1_over_z};
pub use quad::{adaptive_gauss, composite_gauss, gauss_hermite, gauss_legendre, periodic_average};
pub use vec3::{rotate, Vec3};

/// Gyrophase in radians. No wrapping is implied; callers pass any real value.
pub type Angle = f64;
