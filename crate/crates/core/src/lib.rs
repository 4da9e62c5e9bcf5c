//! Community detection by semi-supervised evidential label propagation.
//!
//! A few labeled nodes seed categorical mass functions; evidence flows to
//! their neighbors through Dempster's rule, discounted by how many
//! neighbors each pair shares. Nodes that collect no usable evidence are
//! reported as outliers. Plain and seed-clamped majority label propagation
//! are provided for comparison, along with metrics, a planted-partition
//! generator and a trial harness.

pub mod baselines;
pub mod belief;
pub mod benchgen;
pub mod cli;
pub mod datasets;
pub mod error;
pub mod eval;
pub mod graph;
pub mod partition;
pub mod selp;

pub use belief::{combine, combine_powerset_oracle, LabelFrame, PowerSetMass, SimpleMass};
pub use error::{Error, Result};
pub use eval::{error_rate, nmi, GroundTruth};
pub use graph::{load_edge_list, Dissimilarity, Graph};
pub use partition::{Assignment, Labeling};
pub use selp::{propagate, DetectionResult, SeedSet, SelpConfig};
