//! Parsing, simulation and compositional verification of configurable
//! scheduler-restricted asynchronous systems.

pub mod contract;
pub mod frontend;
pub mod grounding;
pub mod model;
pub mod oracles;
pub mod pipeline;
pub mod sim;
pub mod vcgen;
