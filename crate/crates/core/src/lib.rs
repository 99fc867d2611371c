pub mod classifier;
pub mod dsp;
pub mod evaluation;
pub mod features;
pub mod fusion;
pub mod io;
pub mod synth;
pub mod pipeline;
