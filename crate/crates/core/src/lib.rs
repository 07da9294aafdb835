//! Single-image event-frame synthesis and the neural reference math that
//! consumes it.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: dense f32 tensors, convolution, batch-norm and friends.
//! * [`imaging`]: image container, PNG I/O, HSV, exposure, luminance, resize.
//! * [`flow`]: seeded per-pixel unit velocity fields.
//! * [`eventgen`]: Sobel gradients, brightness change, thresholding, constant coding.
//! * [`snn`]: discrete-time leaky integrate-and-fire dynamics.
//! * [`fusion`]: temporal attention, cross-modality alignment and symmetric fusion.
//! * [`pipeline`]: deterministic dataset generation over image directories.
//! * [`formats`]: EVTF event-frame container, CSV event lists, visualisation.

pub mod error;
pub mod eventgen;
pub mod flow;
pub mod formats;
pub mod fusion;
pub mod imaging;
pub mod pipeline;
pub mod snn;
pub mod tensor;

pub use error::{Error, Result};
