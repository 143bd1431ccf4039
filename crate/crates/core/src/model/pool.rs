use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::head::HeadParams;
use super::rng::SeededRng;
use super::tensor::Parameters;
use crate::error::{Error, Result};

/// Adversary heads accumulated across topic-training phases, with the
/// random stream used to pick one per topic-forgetting step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryPool {
    heads: Vec<HeadParams>,
    selector: SeededRng,
}

impl AdversaryPool {
    pub fn new(seed: u64) -> Self {
        AdversaryPool {
            heads: Vec::new(),
            selector: SeededRng::derive(seed, 2),
        }
    }

    pub fn push(&mut self, head: HeadParams) {
        self.heads.push(head);
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn heads(&self) -> &[HeadParams] {
        &self.heads
    }

    pub fn get(&self, i: usize) -> Option<&HeadParams> {
        self.heads.get(i)
    }

    /// Replaces the heads, keeping the selection stream.
    pub fn set_heads(&mut self, heads: Vec<HeadParams>) {
        self.heads = heads;
    }

    pub fn last_mut(&mut self) -> Option<&mut HeadParams> {
        self.heads.last_mut()
    }

    /// Uniformly random index into the pool.
    pub fn select(&mut self) -> Result<usize> {
        if self.heads.is_empty() {
            return Err(Error::EmptyPool);
        }
        Ok(self.selector.gen_range(0..self.heads.len()))
    }

    pub fn checksums(&self) -> Vec<u64> {
        self.heads.iter().map(Parameters::checksum).collect()
    }
}
