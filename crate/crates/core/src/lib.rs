//! Numerical core for single-image and panoramic HDR reconstruction work.
//!
//! The crate covers everything around a reconstruction network except the
//! network itself: luminance-scale calibration of HDR targets against their
//! LDR inputs, scale-invariant losses and metrics, luminance segmentation
//! labels, a virtual camera for LDR synthesis, equirectangular / ceiling-view
//! panorama geometry, and a small environment-lit renderer used to score
//! panoramas by what they light.
//!
//! Image math is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! bottom of this file name the common instantiations.

pub mod calibration;
pub mod camera;
mod error;
pub mod ibl;
pub mod image;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod pano;
mod scalar;

pub use error::{Error, ErrorKind, Result};
pub use image::{HdrImage, LdrImage, LinearLdr, Plane, RgbImage};
pub use scalar::{CompensatedSum, Scalar};

pub type HdrImageF32 = HdrImage<f32>;
pub type HdrImageF64 = HdrImage<f64>;
pub type LinearLdrF32 = LinearLdr<f32>;
pub type LinearLdrF64 = LinearLdr<f64>;
pub type PlaneF32 = Plane<f32>;
pub type PlaneF64 = Plane<f64>;
