//! Subsampling and reconstruction of graph signals generated by a Laplacian
//! polynomial.
//!
//! The pipeline: build a weighted graph, form the normalized Laplacian `L`,
//! take the generator `B = sum_k gamma_k L^k`, pick a rank `P` from a
//! tolerance, choose `P` nodes greedily by row correlation, and reconstruct
//! every node from the chosen ones.

pub mod error;
pub mod experiment;
pub mod generator;
pub mod graph;
pub mod io;
pub mod lowrank;
pub mod numerics;
pub mod reconstruct;
pub mod selection;

pub use error::{Error, Result};
pub use experiment::{
    run_experiment, run_suite, sweep_alpha, ExperimentConfig, ExperimentOutcome, SchemeChoice,
};
pub use generator::{
    build_generator, generate_signals, signal_correlation, synthesize_coefficients, GeneratorSpec,
    SignalMatrix, SignalMode, SignalSpec,
};
pub use graph::{
    build_graph, normalized_laplacian, second_smallest_singular_value, GraphFamily, GraphTemplate,
    WeightedGraph,
};
pub use lowrank::{
    approx_samp, approx_svd, select_rank, LowRankFactorization, RankSelection, Scheme,
};
pub use numerics::{svd, DenseMatrix, SvdResult};
pub use reconstruct::{
    error_report, normalized_error_db, reconstruct, subsample, ReconstructionReport,
    SubsamplingOperator,
};
pub use selection::{
    brute_force_select, greedy_select, node_correlation_matrix, select_and_approximate,
    GreedyOptions, SelectionResult,
};
