//! Invocation routing simulation and error-rate sweeps.

mod experiments;
mod metrics;
mod routing;
pub mod synth;

pub use experiments::{identical_sets, run_experiment, ExperimentReport, Misroute, OutcomeCounts, Scenario};
pub use metrics::{
    equal_error_point, evaluate_user, load_traces, malicious_skills, parse_traces, rates_for_plan,
    sweep_thresholds, threshold_grid, traces_to_jsonl, EerPoint, ErrorRates, HistoryRow, SweepInputs,
    SweepResult, SweepRow, TraceFile, UserTrace, MALICIOUS_CUTOFF,
};
pub use routing::{simulate_invocation, ConfusionModel, InvocationOutcome, DEFAULT_CONFUSION_RADIUS};
