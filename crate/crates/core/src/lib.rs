//! Simulation engine for Gibbs point processes of balls.
//!
//! The crate builds up from exact fixed-point geometry (`space`), through a
//! bit-interleaved measurable total order on the ball domain (`order`), to the
//! dependent-thinning sampler (`thinning`) and the recursive disagreement
//! coupling (`coupling`). Partition-function oracles (`partition`) provide the
//! ground truth the samplers are validated against, and `percolation` /
//! `diagnostics` hold the Boolean-model and boundary-influence experiments.

pub mod coupling;
pub mod diagnostics;
pub mod error;
pub mod models;
pub mod order;
pub mod partition;
pub mod percolation;
pub mod poisson;
pub mod rng;
pub mod space;
pub mod stats;
pub mod thinning;
pub mod verify;

pub use error::{Error, Result};
pub use models::{HamiltonianModel, Model};
pub use order::{OrderCodec, OrderInterval, OrderKey};
pub use poisson::RadiusLaw;
pub use space::{Configuration, Point, Region, Window};
