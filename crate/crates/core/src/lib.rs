//! Simulation and algorithm library for multi-satellite cooperative downlink
//! networks with full frequency reuse.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: Walker constellation propagation, satellite/GU link
//!   geometry and visibility sets.
//! - [`channel`]: large-scale path loss, VSAT receive pattern and the
//!   Loo-distributed MISO channel built from UPA steering vectors.
//! - [`beamforming`]: 2D DFT codebook, codebook-based analog beams,
//!   regularized zero-forcing digital stage and hybrid power scaling.
//! - [`scheduling`]: greedy link construction in the AU / SHU / JHU flavours
//!   plus an exhaustive oracle for small instances.
//! - [`metrics`]: SINR, spectral efficiency, density classes and summary
//!   statistics.
//! - [`harness`]: scenario configuration, paired multi-epoch experiments and
//!   result emission.
//!
//! Runnable walkthroughs of each capability live under `examples/`.

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod rng;
pub mod scheduling;

pub use error::{Error, Result};

/// Complex sample type used throughout.
pub type C64 = num_complex::Complex64;
