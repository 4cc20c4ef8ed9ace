pub mod cli;
pub mod constants;
pub mod discrete;
pub mod error;
pub mod funcs;
pub mod quad;
pub mod reps;
pub mod seminorm;
pub mod spectral;
