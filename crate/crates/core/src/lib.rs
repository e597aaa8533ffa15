//! Green's function convolution for gradient-domain image processing.
//!
//! * [`field`]: grids, vector fields, feature batches and valid-pixel masks.
//! * [`io`]: grayscale image and binary tensor files.
//! * [`gfc`]: the spectral Laplacian solver and gradient integrator.
//! * [`gis`]: the parameter-free Gradient Integration and Sum layer and its adjoint.
//! * [`metrics`]: PR/ROC based saliency scores, MAE, RMSE and cross-entropy.
//! * [`perturb`]: salt-and-pepper noise and darkening.
//! * [`demo`]: reconstructing a disk from its edges.
//!
//! ```
//! use gfconv::field::ScalarField;
//! use gfconv::gfc::{forward_gradient, integrate_gradient, OperatorCache};
//!
//! // A square that is zero near the border.
//! let img = ScalarField::from_fn(16, 16, |r, c| {
//!     if (5..11).contains(&r) && (5..11).contains(&c) { 1.0 } else { 0.0 }
//! });
//! let cache = OperatorCache::new();
//! let back = integrate_gradient(&forward_gradient(&img), &cache);
//! assert!(back.max_abs_diff(&img) < 1e-9);
//! ```
//!
//! The guide under `book/` walks through each module; its code listings are
//! compiled and run as doctests of this crate.

pub mod demo;
pub mod error;
pub mod field;
pub mod gfc;
pub mod gis;
pub mod io;
pub mod metrics;
pub mod perturb;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{FeatureBatch, ScalarField, ValidMask, VectorField};
pub use gfc::{GreenOperator, OperatorCache};

// Runs the guide's listings as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/green-function.md")]
    mod green_function {}
    #[doc = include_str!("../../../book/src/gis-layer.md")]
    mod gis_layer {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/perturbation.md")]
    mod perturbation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
