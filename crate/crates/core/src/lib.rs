//! Causal fairness analysis toolkit.
//!
//! Decomposes an observed outcome gap between two groups into direct,
//! indirect, and confounded components on the four-node fairness graph,
//! estimates heterogeneous total and direct effects, and quantifies
//! robustness to unobserved confounding and poor overlap. A built-in
//! synthetic generative model with an exact counterfactual oracle backs
//! every estimator with ground-truth checks.

pub mod decomp;
pub mod error;
pub mod nuisance;
pub mod rng;
pub mod sfm;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use sfm::{
    assign_folds, encode, simple_impute, Column, Dataset, Encoded, FoldAssignment, Kind, Role,
    SfmSchema, VariableSpec, Violation,
};
pub use synth::{desk_1, null_1, sample, GroundTruth, ScmSpec};
