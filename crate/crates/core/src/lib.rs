//! QUBO/Ising encodings of graph coloring, clique vertex cover and parallel
//! machine scheduling, with exhaustive spectrum analysis, a classical
//! annealing sampler and penalty-coefficient sweeps.

pub mod anneal;
pub mod error;
pub mod exec;
pub mod fit;
pub mod model;
pub mod polarity;
pub mod problem;
pub mod spectrum;
pub mod spin;
pub mod sweep;

pub use error::{Error, Result};
pub use exec::Execution;
pub use fit::{fit_scaling, ScalingFit};
pub use model::{AnyModel, CompiledQubo, IsingModel, QuboModel};
pub use problem::Instance;
pub use spin::{SpinKind, SpinVector};
pub use sweep::{run_sweep, SweepRecord, SweepSpec};
