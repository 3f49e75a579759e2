//! Embedded benchmark instances for annealer-style hardware graphs, with a
//! solver pipeline that emulates the annealer by simulated annealing.
//!
//! Numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`.

pub mod embedding;
pub mod error;
pub mod graph;
pub mod harness;
pub mod physmap;
pub mod problems;
pub mod ratio;
pub mod rng;
pub mod scalar;
pub mod solvers;
pub mod topology;

pub use error::{Error, Result};
pub use graph::{Graph, NodeId};
pub use scalar::Scalar;

pub type Ising = problems::IsingModel<f64>;
pub type Qubo = problems::QuboModel<f64>;
pub type Model = problems::Model<f64>;
pub type Instance = problems::ProblemInstance<f64>;
pub type PhysicalModel = physmap::PhysicalModel<f64>;
pub type SampleSet = physmap::SampleSet<f64>;
pub type SolveResult = solvers::SolveResult<f64>;

pub type Ising32 = problems::IsingModel<f32>;
pub type Qubo32 = problems::QuboModel<f32>;
pub type Instance32 = problems::ProblemInstance<f32>;
