pub mod error;
pub mod imagecore;
pub mod medial_axis;
pub mod density_profile;
pub mod banding;
pub mod backproject;
pub mod perlin;
pub mod metrics;
pub mod synth;
pub mod dataset;
pub mod cli;

pub use error::{Error, Result};
