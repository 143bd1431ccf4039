//! Confound representations: z-scored log-odds with an informative
//! Dirichlet prior, the per-document distributions derived from them, and
//! the LDA baseline.

mod distribution;
mod lda;
mod log_odds;

pub use distribution::{
    document_confound_distribution, word_class_distribution, ConfoundDistribution,
    WordClassDistribution,
};
pub use lda::{fit_lda, lda_document_distribution, LdaConfig, TopicModelState};
pub use log_odds::{compute_log_odds, LogOddsTable, SCORE_CLAMP};
