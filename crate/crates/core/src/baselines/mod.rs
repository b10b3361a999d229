//! Non-deep reference learners.

pub mod ensemble;
pub mod smote;
pub mod tree;

pub use ensemble::{weighted_vote, ChunkEnsemble, EnsembleConfig, Member, UpdateReport};
pub use smote::{smote_oversample, smote_point, SmoteOutput};
pub use tree::{hellinger_split_score, hoeffding_bound, HoeffdingConfig, HoeffdingTree, HISTOGRAM_BINS};
