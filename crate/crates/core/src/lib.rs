pub mod engine;
pub mod error;
pub mod experiment;
pub mod game;
pub mod lattice;
pub mod metrics;
pub mod rng;
pub mod theory;
