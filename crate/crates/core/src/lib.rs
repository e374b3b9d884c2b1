//! Minmax-regret sink location on dynamic path networks with general edge
//! capacities.
//!
//! Everything in the solver core runs on exact rationals ([`Q`]). The layers,
//! bottom up:
//!
//! * [`path_model`]: instances, scenarios, range-minimum capacities.
//! * [`evacuation`]: closed-form evacuation times and optimal sinks.
//! * [`pwl`]: exact piecewise-linear function algebra.
//! * [`envelopes`]: evacuation time at a vertex as a function of one weight.
//! * [`profiles`]: min-max profiles over weight boxes and edges.
//! * [`regret`]: the six term families, `R_max(x)` and `R_OPT`.
//! * [`oracle`]: brute-force checks (fluid simulation, grids, sweeps).
//! * [`io`] and [`cli`]: file formats and the command-line front end.

pub mod cli;
pub mod envelopes;
pub mod error;
pub mod evacuation;
pub mod io;
pub mod oracle;
pub mod path_model;
pub mod profiles;
pub mod pwl;
pub mod rational;
pub mod regret;
pub mod sparse_table;

pub use error::{Error, Result};
pub use rational::Q;
