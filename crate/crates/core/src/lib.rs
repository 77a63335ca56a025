//! Exponent analysis for products of free operators.
//!
//! The crate turns a spectral measure — the distribution of squared singular
//! values of one factor — into the growth exponents of long products built
//! from freely independent copies of that factor:
//!
//! * [`measure`] represents measures with atoms and power-law edge
//!   components, and integrates smooth and logarithmic payloads against them
//!   to near machine precision.
//! * [`transform`] evaluates the moment-generating transform `psi`, its
//!   inverse, the Cauchy transform, and the S-transform, including
//!   S-transforms of free products.
//! * [`lyapunov`] derives the exponent profile, its integral, the exponent
//!   distribution, extended determinants, and the growth-threshold equation.
//! * [`rmt`] samples finite random-matrix products as an independent Monte
//!   Carlo check of the analytic predictions.
//! * [`io`] defines the JSON/CSV document formats, and [`verify`] packages
//!   the end-to-end verification suite.
//!
//! Heavy loops are data-parallel under the default `parallel` feature and
//! fall back to sequential execution without it; results are bit-identical
//! either way.

pub mod error;
pub mod io;
pub mod lyapunov;
pub mod measure;
pub(crate) mod par;
pub mod quad;
pub mod rmt;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use lyapunov::{
    exponent_cdf, exponent_distribution, fk_determinant, integrated_exponent, largest_exponent,
    lyapunov_profile, marginal_exponent, newman_solve, s_from_determinant, DetMethod,
    DeterminantResult, ExponentDistribution, LargestExponent, LyapunovProfile,
};
pub use measure::{LogValue, SpectralMeasure};
pub use rmt::{run_mc, EnsembleConfig, McReport, SingularLaw};
pub use transform::{psi, psi_inverse, s_transform, SProduct, TransformKind, TransformPoint};
