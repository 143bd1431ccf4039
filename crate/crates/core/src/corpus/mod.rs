//! Corpus ingestion: documents, tokenization, vocabulary, masking,
//! splitting and the synthetic confounded-corpus generator.

mod document;
mod mask;
mod split;
mod synth;
mod tokenize;
mod vocab;

pub use document::{Document, Domain, EncodedDocument, LabelSet};
pub use mask::{mask_ids, mask_top_k, masked_word_ids, masked_words};
pub use split::{split_corpus, SplitSpec, Splits};
pub use synth::{generate_synthetic, SynthSpec, SyntheticWordKind};
pub use tokenize::tokenize;
pub use vocab::{Vocabulary, MASK, MASK_TOKEN, PAD, PAD_TOKEN, RESERVED, UNK, UNK_TOKEN};

/// Longest token sequence fed to the encoder; tails are truncated.
pub const MAX_SEQUENCE_LEN: usize = 512;
