pub mod cli;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod inference;
pub mod io;
pub mod loss;
pub mod montecarlo;
pub mod periodogram;
pub mod regress;
pub mod simgen;
pub mod spectrogram;
pub mod spectrum;
pub mod svg;
pub mod util;

pub use error::{Error, Result};
