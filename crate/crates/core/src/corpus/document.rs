use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    #[default]
    In,
    Out,
}

/// A tokenized document with its class label and domain tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub tokens: Vec<String>,
    pub label: String,
    #[serde(default)]
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<Vec<String>>,
}

impl Document {
    pub fn new(tokens: Vec<String>, label: impl Into<String>, domain: Domain) -> Result<Self> {
        let doc = Document {
            tokens,
            label: label.into(),
            domain,
            prompt: None,
            pos: None,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn with_prompt(mut self, prompt: impl Into<String>) -> Self {
        self.prompt = Some(prompt.into());
        self
    }

    pub fn with_pos(mut self, pos: Vec<String>) -> Result<Self> {
        self.pos = Some(pos);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tokens.is_empty() {
            return Err(Error::InvalidDocument("no tokens".into()));
        }
        if let Some(pos) = &self.pos {
            if pos.len() != self.tokens.len() {
                return Err(Error::InvalidDocument(format!(
                    "{} POS tags for {} tokens",
                    pos.len(),
                    self.tokens.len()
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Ordered set of class names; a class index is its position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    names: Vec<String>,
}

impl LabelSet {
    /// Classes sorted lexicographically.
    pub fn from_documents(docs: &[Document]) -> Self {
        let names: BTreeSet<&str> = docs.iter().map(|d| d.label.as_str()).collect();
        LabelSet {
            names: names.into_iter().map(String::from).collect(),
        }
    }

    pub fn new(mut names: Vec<String>) -> Self {
        names.sort();
        names.dedup();
        LabelSet { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .binary_search_by(|n| n.as_str().cmp(name))
            .map_err(|_| Error::UnknownClass(name.into()))
    }
}

/// A document mapped to vocabulary ids and a class index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedDocument {
    pub ids: Vec<u32>,
    pub label: usize,
    pub domain: Domain,
}
