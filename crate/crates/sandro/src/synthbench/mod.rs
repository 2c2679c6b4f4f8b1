//! Synthetic outlier benchmark: ground-truthed registration pairs with
//! controlled contamination, plus a campaign runner that aggregates
//! success statistics across methods and outlier rates.

mod blob;
mod campaign;
mod metrics;
mod scenario;

pub use blob::builtin_source_cloud;
pub use campaign::{
    run_campaign, write_aggregate_csv, write_records_jsonl, AggregateRow, CampaignResult,
    MethodConfig, SuccessThresholds, TrialRecord,
};
pub use metrics::{rotation_error_deg, translation_error_m};
pub use scenario::{
    generate_pair, DecoyConfig, RotationMagnitude, ScenarioConfig, SynthError, TrialPair,
};
