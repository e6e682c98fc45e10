//! Declarative experiments: TOML configs, sweeps over delay, correlation,
//! horizon or learner, seeded parallel trials and plot-ready outputs.

mod config;
mod presets;
mod runner;
mod seeds;

pub use config::{
    BodySection, ComparatorMode, DelaySection, EtaFromDelays, ExperimentConfig, ExperimentKind, LearnerSection,
    LossSection, Plan, PlanPoint, RegretSection, ScoringSection, StreamSection, SweepSection, Tuned,
};
pub use presets::{load_preset, preset_description, preset_source, PRESETS};
pub use runner::{run_experiment, write_outputs, ExperimentResult, PointResult, Summary, TrialSummary};
pub use seeds::{splitmix64, trial_seeds, TrialSeeds};

#[cfg(test)]
mod tests;
