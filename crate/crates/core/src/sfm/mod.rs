//! Standard fairness model: schema, dataset container, encoding, imputation,
//! and fold assignment.

pub mod dataset;
pub mod encode;
pub mod folds;
pub mod impute;
pub mod io;
pub mod schema;

pub use dataset::{Column, Dataset, Violation};
pub use encode::{encode, encoded_names, Encoded};
pub use folds::{assign_folds, FoldAssignment};
pub use impute::simple_impute;
pub use schema::{Kind, Role, SfmSchema, VariableSpec};
