//! Dictionary learning on synthetic data.

mod experiment;
mod learn;
mod omp;
mod synth;

pub use experiment::{
    run_trial, summarize, Cell, CellSummary, ExperimentConfig, Grid, TrialRecord, TrialStatus,
    EXPERIMENT_FORMAT_VERSION,
};
pub use learn::{
    coefficient_set, oracle_baseline_rmse, proposed_learn, LearnParams, COEFF_SPARSITY,
    FIRST_SPLIT_NOTE,
};
pub use omp::{encode_all, omp, omp_matrix, Atoms, OmpCode, OmpResult};
pub use synth::{synth_dictionary, synth_training_data, DictKind, SynthDictionary, SynthSpec};
