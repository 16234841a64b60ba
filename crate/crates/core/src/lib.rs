//! Scale-adaptive box regression and tiny-object evaluation primitives.
//!
//! Everything in this crate is pure computation over boxes, small tensors and
//! score lists. It builds without `std` (only `alloc` is required), so it can be
//! embedded in training loops or evaluation services unchanged. File formats,
//! CSV/SVG emission and the command line live in the `scaleloss` crate.
//!
//! Modules:
//!
//! * [`boxgeom`]: boxes, IoU and batch area normalization.
//! * [`losses`]: cross-entropy, L1, the scale-feedback loss and their gradients.
//! * [`relay`]: forward pass of the scale-aware relay attention layer.
//! * [`evaluator`]: COCO-style AP with very-tiny/tiny/small/medium buckets.
//! * [`harness`]: synthetic scenes and gradient-descent box regression.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod boxgeom;
pub mod error;
pub mod evaluator;
pub mod harness;
pub mod losses;
mod math;
pub mod relay;
pub mod rng;

pub use boxgeom::{Bbox, MatchedPair};
pub use error::{Error, Result};
pub use losses::{BoxGradient, LossBreakdown, LossConfig};
