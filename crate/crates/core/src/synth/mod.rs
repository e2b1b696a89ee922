//! Synthetic data generation with exact ground truth.

pub mod oracle;
pub mod reference;
pub mod sample;
pub mod spec;

pub use oracle::{
    oracle_cate, oracle_ctf_de, oracle_decomposition, oracle_decomposition_exact,
    oracle_decomposition_mc, GroundTruth, McStandardErrors, OracleMethod, StratumTruth,
};
pub use reference::{by_name, desk_1, null_1};
pub use sample::sample;
pub use spec::{
    CompiledScm, ConfounderDist, ConfounderGen, DiscreteVar, LogitModel, MediatorModel,
    OutcomeModel, ScmSpec,
};
