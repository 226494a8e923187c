//! Numerical building blocks: seedable random streams, complex Gaussian
//! sampling, special functions and Gauss–Hermite quadrature.

mod quadrature;
mod rng;
mod special;

pub use quadrature::{gauss_hermite, Quadrature};
pub use rng::{fill_cscg, sample_cscg_vector, RngStream};
pub use special::{
    bessel_i0, bessel_i0_scaled, erfc, marcum_q1, normal_cdf, scaled_bessel_sequence,
    MARCUM_SERIES_LIMIT,
};
