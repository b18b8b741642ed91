//! Throughput model and packet-level simulator for a single TCP NewReno
//! flow striped round-robin across heterogeneous links.
//!
//! * [`scenario`]: links, transport configuration, file formats.
//! * [`reorder_prob`]: arrival-order distributions for one round.
//! * [`model`]: the analytical round iteration.
//! * [`sim`]: discrete-event simulator used to check the model.
//! * [`metrics`]: asymmetry measures and prediction accuracy.
//! * [`eval`]: accuracy tables, asymmetry sweeps, link-count selection.
//! * [`cli`]: the `hetpath` command line.

pub mod cli;
pub mod eval;
pub mod metrics;
pub mod model;
pub mod reorder_prob;
pub mod scenario;
pub mod sim;
pub mod svg;

pub use model::{run_model, ThroughputReport};
pub use scenario::{DelayDataset, Link, ModelConfig, PathSet, Scenario};
pub use sim::{run_sim, SimOptions, SimReport};
