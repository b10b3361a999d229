//! Test-then-train harness, imbalance-aware metrics, smoothing and rank
//! statistics.

pub mod harness;
pub mod methods;
pub mod metrics;
pub mod ranks;
pub mod smooth;
pub mod wilcoxon;

pub use harness::{run_test_then_train, PhaseCost, RunConfig, RunResult, StreamMethod};
pub use methods::{
    default_image_side, CdsMethod, HoeffdingMethod, MethodSpec, OracleMethod, SstmlConfig,
    SstmlMethod,
};
pub use metrics::{compute_metrics, mean_defined, ChunkMetrics, ConfusionMatrix, Metrics};
pub use ranks::{mean_ranks, PairwiseComparison, RankTable};
pub use smooth::{gaussian_kernel, gaussian_smooth, gaussian_smooth_partial};
pub use wilcoxon::{
    average_ranks, exact_p_value, normal_p_value, signed_ranks, wilcoxon_signed_rank,
    WilcoxonResult,
};
