//! Experiment orchestration: feature views, seeded splits, model
//! pipelines, tuning, repeated evaluation, comparison and reporting.

pub mod config;
mod experiment;
mod pipeline;
pub mod report;
mod split;
mod synth;
mod tune;

pub use experiment::{
    compare_models, run_experiment, Cell, CompareMetric, ComparisonRow, ComparisonTable, ExperimentResult,
    ModelOutcome, Summary,
};
pub use pipeline::{
    default_models, fit_model, fit_pipeline, fit_trimmed_forest, ConstantSpec, FeatureViews, FittedPipeline, LdaSpec, LsaSpec,
    MnbSpec, ModelConfig, ModelSpec, NbsvmSpec, NnSpec, Predictor, RfSpec, SvmSpec, Transform, View,
};
pub use split::{split, Fractions, Split, SplitPlan};
pub use synth::{
    calibrate_separation, synth_corpus, synth_word, LengthModel, SynthModel, SynthSpec, LENGTH_MAX, LENGTH_MIN,
    LENGTH_QUARTILES,
};
pub use config::{run_config, ExperimentConfig, ExperimentRun, SynthSection};
pub use tune::{file_stem, tune_model, tune_models, write_tuning_outputs, SearchLog, TunedModel, TuningOptions};
