//! Taxonomy alignment by relaxation labeling.
//!
//! Each node of a source taxonomy is linked to candidate nodes of a target
//! taxonomy through a bilingual dictionary. Relaxation labeling then weighs
//! those candidates by how well the hypernym/hyponym structure around each
//! candidate agrees with the already weighted neighbouring connections.
//!
//! The pipeline is:
//!
//! 1. load both taxonomies ([`taxonomy`]), optionally transformed;
//! 2. generate candidates ([`candidates`]);
//! 3. relax weights under a constraint pack ([`constraints`], [`relaxation`]);
//! 4. score the selected mapping ([`evaluation`]).

pub mod candidates;
pub mod cli;
pub mod constraints;
pub mod error;
pub mod evaluation;
pub mod relaxation;
pub mod taxonomy;

pub use candidates::{
    connection_stats, BilingualDict, CandidateSet, ConnectionStats, ConnectionStatus,
};
pub use constraints::{AlignContext, Connection, ConstraintPack, ConstraintRule, Direction, Scope};
pub use error::{Error, Result};
pub use evaluation::{
    baseline_random, coverage, precision, EvalLevel, GoldAnswer, GoldStandard, Quality,
};
pub use relaxation::{
    cost_estimate, init_weights, run, step, InitMode, Mapping, MappingStatus, RelaxConfig,
    RelaxOutcome, RelaxTrace, WeightTable,
};
pub use taxonomy::{ClosureIndex, NodeId, TaxNode, TaxonomyGraph};
