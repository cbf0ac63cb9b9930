pub mod dataset;
pub mod evalstat;
pub mod linalg;
pub mod linear;
pub mod nn;
pub mod parallel;
pub mod pipeline;
pub mod rng;
pub mod svr;
pub mod synth;
pub mod tree;
