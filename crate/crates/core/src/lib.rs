//! Dependability analysis of shuffle-exchange networks (SEN and SEN+).
//!
//! The crate builds dynamic fault trees (DFTs) and dynamic reliability block
//! diagrams (DRBDs) with warm-spare constructs, evaluates their closed-form
//! failure probability or reliability, and checks those numbers against two
//! independent oracles: Monte Carlo lifetime simulation and exhaustive
//! enumeration of component states.
//!
//! Module map:
//!
//! - [`dist`]: component lifetime laws (CDF, density, sampling).
//! - [`model`]: DFT and DRBD trees, validation, the DFT/DRBD complement
//!   transform and the JSON persistence schema.
//! - [`eval`]: exact evaluation, including the warm-spare kernel.
//! - [`sen`]: generators for terminal, broadcast and network models.
//! - [`oracle`]: Monte Carlo and enumeration oracles.
//! - [`cli`]: the `senrel` command-line front end.

pub mod cli;
pub mod dist;
pub mod error;
pub mod eval;
pub mod model;
pub mod oracle;
pub mod sen;

pub use dist::{DormancyFactor, FailureDistribution};
pub use error::{Error, Result};
pub use eval::{eval_curve, prob_fail, reliability, wsp_fail_prob, Curve, WspParams};
pub use model::{
    component_ids, drbd_to_dft, dft_to_drbd, validate, ComponentId, DftNode, DrbdNode,
    Formalism, Model, ValidationReport,
};
pub use oracle::{enumerate_exact, mc_curve, mc_estimate, McEstimate};
pub use sen::{build_model, preset_paper_128, sen_counts, SenModelSpec, StructureCounts};
