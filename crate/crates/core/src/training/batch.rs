use alloc::vec::Vec;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::EncodedDocument;
use crate::error::Result;
use crate::model::{AdversaryTerm, HeadParams, LossParts, Network, NetworkGradients, SeededRng};

/// Seeded epoch-wise shuffler handing out minibatches of document indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSampler {
    order: Vec<usize>,
    cursor: usize,
    rng: SeededRng,
}

impl BatchSampler {
    pub fn new(n: usize, seed: u64) -> Self {
        BatchSampler {
            order: (0..n).collect(),
            cursor: n,
            rng: SeededRng::derive(seed, 3),
        }
    }

    fn reshuffle(&mut self) {
        self.order.shuffle(&mut self.rng);
        self.cursor = 0;
    }

    /// Indices of one full pass in a fresh random order, split into batches.
    pub fn epoch(&mut self, batch_size: usize) -> Vec<Vec<usize>> {
        self.reshuffle();
        self.cursor = self.order.len();
        self.order
            .chunks(batch_size)
            .map(<[usize]>::to_vec)
            .collect()
    }

    /// Next `batch_size` indices, continuing across epoch boundaries.
    pub fn next_batch(&mut self, batch_size: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(batch_size);
        if self.order.is_empty() {
            return out;
        }
        while out.len() < batch_size {
            if self.cursor >= self.order.len() {
                self.reshuffle();
            }
            out.push(self.order[self.cursor]);
            self.cursor += 1;
        }
        out
    }
}

/// Number of partial sums a minibatch gradient is split into. Partial sums
/// are reduced in a fixed order, so results do not depend on threading.
const CHUNKS: usize = 4;

/// Mean gradient of a minibatch; `term(i)` supplies the adversary term for
/// training document `i`.
pub(crate) fn batch_gradients<'a, F>(
    net: &Network,
    docs: &[EncodedDocument],
    batch: &[usize],
    adversary: Option<&HeadParams>,
    term: F,
) -> Result<(NetworkGradients, LossParts)>
where
    F: Fn(usize) -> AdversaryTerm<'a> + Sync,
{
    let scale = 1.0 / batch.len() as f64;
    let chunk_len = batch.len().div_ceil(CHUNKS).max(1);
    let run = |chunk: &[usize]| -> Result<(NetworkGradients, LossParts)> {
        let mut g = NetworkGradients::zeros(net, adversary);
        let mut loss = LossParts::default();
        for &i in chunk {
            let d = &docs[i];
            loss += net.accumulate_gradients(&d.ids, d.label, term(i), scale, &mut g)?;
        }
        Ok((g, loss))
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<_> = {
        use rayon::prelude::*;
        batch.par_chunks(chunk_len).map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<_> = batch.chunks(chunk_len).map(run).collect();

    let mut parts = parts.into_iter();
    let (mut total, mut loss) = parts.next().unwrap_or_else(|| {
        Ok((
            NetworkGradients::zeros(net, adversary),
            LossParts::default(),
        ))
    })?;
    for p in parts {
        let (g, l) = p?;
        total.add(&g);
        loss += l;
    }
    loss.classification *= scale;
    loss.adversary *= scale;
    Ok((total, loss))
}

/// Applies `f` to every item, in parallel when enabled, preserving order.
pub(crate) fn map_docs<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn batches_cover_every_document_once_per_epoch() {
        let mut s = BatchSampler::new(10, 3);
        let mut seen: Vec<usize> = s.epoch(3).concat();
        seen.sort_unstable();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
        let mut a = BatchSampler::new(10, 3);
        let mut b = BatchSampler::new(10, 3);
        for _ in 0..7 {
            assert_eq!(a.next_batch(4), b.next_batch(4));
        }
        let mut seen: Vec<usize> = BatchSampler::new(10, 5).next_batch(10);
        seen.sort_unstable();
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
    }
}
