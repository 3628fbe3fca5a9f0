//! Ground truth, intent spaces and evaluation measures.

mod cv;
mod measures;
mod report;
mod runfile;
mod significance;
mod spaces;
mod topics;

pub use cv::{cross_validate, fold_ranges, CvResult, Fold, DEFAULT_FOLDS};
pub use measures::{alpha_gains, alpha_ndcg, ia_metrics, sbr, IaMetrics, DEFAULT_NDCG_ALPHA, ERR_STOP};
pub use report::{evaluate_topic, CellError, Metric, MetricReport, MetricRow, MEAN_TOPIC};
pub use runfile::{format_run, load_run, parse_run, Run, RunEntry};
pub use significance::{
    randomization_test, win_loss, WinLoss, DEFAULT_ITERATIONS, DEFAULT_SEED, MIN_ITERATIONS,
};
pub use spaces::{build_spaces, Intent, IntentSpace, SpaceKind, Spaces, TimeRelevance};
pub use topics::{load_qrels, load_topics, parse_qrels, parse_topics, Judgments, Subtopic, Topic};
