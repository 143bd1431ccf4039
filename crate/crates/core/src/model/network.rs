use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::encoder::EncoderParams;
use super::grl::grl_transform;
use super::head::{ce_logit_grad, HeadParams};
use super::rng::SeededRng;
use super::tensor::Parameters;
use crate::error::{Error, Result};
use crate::math::{argmax, cross_entropy_dist, sqrt, uniform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    /// Per direction.
    pub hidden_dim: usize,
    pub head_hidden: usize,
    pub num_classes: usize,
    pub num_topics: usize,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(vocab_size: usize, num_classes: usize, num_topics: usize) -> Self {
        ModelConfig {
            vocab_size,
            embed_dim: 128,
            hidden_dim: 128,
            head_hidden: 256,
            num_classes,
            num_topics,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dims = [
            self.vocab_size,
            self.embed_dim,
            self.hidden_dim,
            self.head_hidden,
            self.num_classes,
            self.num_topics,
        ];
        if dims.contains(&0) {
            return Err(Error::InvalidConfig(
                "all model dimensions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Encoder plus label classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub config: ModelConfig,
    pub encoder: EncoderParams,
    pub classifier: HeadParams,
}

impl Parameters for Network {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut t = self.encoder.tensors();
        t.extend(self.classifier.tensors());
        t
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut t = self.encoder.tensors_mut();
        t.extend(self.classifier.tensors_mut());
        t
    }
}

/// Extra loss term attached to the classification objective.
#[derive(Debug, Clone, Copy)]
pub enum AdversaryTerm<'a> {
    None,
    /// `CE(adv(h), U_K)` through a frozen adversary.
    Uniform {
        head: &'a HeadParams,
    },
    /// `CE(adv(grl(h)), t)`: the adversary learns `t` while the encoder
    /// receives the reversed, `lambda`-scaled gradient.
    Reversal {
        head: &'a HeadParams,
        target: &'a [f64],
        lambda: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossParts {
    pub classification: f64,
    pub adversary: f64,
}

impl LossParts {
    pub fn combined(&self) -> f64 {
        self.classification + self.adversary
    }
}

impl core::ops::AddAssign for LossParts {
    fn add_assign(&mut self, o: Self) {
        self.classification += o.classification;
        self.adversary += o.adversary;
    }
}

/// Gradient accumulator for one optimization step.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGradients {
    pub network: Network,
    pub adversary: Option<HeadParams>,
}

impl NetworkGradients {
    pub fn zeros(net: &Network, adversary: Option<&HeadParams>) -> Self {
        NetworkGradients {
            network: net.zeros_like(),
            adversary: adversary.map(Parameters::zeros_like),
        }
    }

    pub fn add(&mut self, other: &NetworkGradients) {
        self.network.add_scaled(&other.network, 1.0);
        if let (Some(a), Some(b)) = (self.adversary.as_mut(), other.adversary.as_ref()) {
            a.add_scaled(b, 1.0);
        }
    }
}

impl Network {
    /// Deterministic uniform initialization from `config.seed`.
    pub fn init(config: &ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = SeededRng::derive(config.seed, 0);
        let encoder = EncoderParams::init(
            config.vocab_size,
            config.embed_dim,
            config.hidden_dim,
            &mut rng,
        );
        let classifier = HeadParams::init(
            2 * config.hidden_dim,
            config.head_hidden,
            config.num_classes,
            &mut rng,
        );
        Ok(Network {
            config: config.clone(),
            encoder,
            classifier,
        })
    }

    /// Fresh adversary head number `index`, deterministic in the model seed.
    pub fn new_adversary(&self, index: u64) -> HeadParams {
        let mut rng = SeededRng::derive(self.config.seed, 1000 + index);
        HeadParams::init(
            self.encoder.output_dim(),
            self.config.head_hidden,
            self.config.num_topics,
            &mut rng,
        )
    }

    /// Document representation and attention weights over the input.
    pub fn encode(&self, ids: &[u32]) -> Result<(Vec<f64>, Vec<f64>)> {
        let tr = self.encoder.forward(ids)?;
        let att = tr.attention();
        Ok((tr.representation, att))
    }

    pub fn predict_proba(&self, ids: &[u32]) -> Result<Vec<f64>> {
        let tr = self.encoder.forward(ids)?;
        Ok(self.classifier.forward(&tr.representation)?.probs)
    }

    /// Argmax class; ties go to the lowest index.
    pub fn predict(&self, ids: &[u32]) -> Result<usize> {
        Ok(argmax(&self.predict_proba(ids)?))
    }

    /// Loss of one document, without gradients.
    pub fn loss(&self, ids: &[u32], label: usize, term: AdversaryTerm<'_>) -> Result<LossParts> {
        let tr = self.encoder.forward(ids)?;
        let h = &tr.representation;
        let classification =
            cross_entropy_dist(&self.classifier.forward(h)?.probs, &self.one_hot(label)?)?;
        let adversary = match term {
            AdversaryTerm::None => 0.0,
            AdversaryTerm::Uniform { head } => {
                let q = head.forward(h)?.probs;
                cross_entropy_dist(&q, &uniform(q.len()))?
            }
            AdversaryTerm::Reversal { head, target, .. } => {
                cross_entropy_dist(&head.forward(h)?.probs, target)?
            }
        };
        Ok(LossParts {
            classification,
            adversary,
        })
    }

    fn one_hot(&self, label: usize) -> Result<Vec<f64>> {
        let m = self.config.num_classes;
        if label >= m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: label,
            });
        }
        let mut y = vec![0.0; m];
        y[label] = 1.0;
        Ok(y)
    }

    /// Forward and backward for one document; gradients are multiplied by
    /// `scale` (use `1/b` for minibatch means) and added into `grads`.
    pub fn accumulate_gradients(
        &self,
        ids: &[u32],
        label: usize,
        term: AdversaryTerm<'_>,
        scale: f64,
        grads: &mut NetworkGradients,
    ) -> Result<LossParts> {
        let y = self.one_hot(label)?;
        let tr = self.encoder.forward(ids)?;
        let h = &tr.representation;
        let ct = self.classifier.forward(h)?;
        let classification = cross_entropy_dist(&ct.probs, &y)?;
        let d_logits = ce_logit_grad(&ct.probs, &y, scale);
        let mut dh = self
            .classifier
            .backward(&ct, &d_logits, Some(&mut grads.network.classifier));

        let adversary = match term {
            AdversaryTerm::None => 0.0,
            AdversaryTerm::Uniform { head } => {
                let at = head.forward(h)?;
                let u = uniform(at.probs.len());
                let loss = cross_entropy_dist(&at.probs, &u)?;
                let d = head.backward(&at, &ce_logit_grad(&at.probs, &u, scale), None);
                crate::math::axpy(1.0, &d, &mut dh);
                loss
            }
            AdversaryTerm::Reversal {
                head,
                target,
                lambda,
            } => {
                let at = head.forward(h)?;
                let loss = cross_entropy_dist(&at.probs, target)?;
                let d = head.backward(
                    &at,
                    &ce_logit_grad(&at.probs, target, scale),
                    grads.adversary.as_mut(),
                );
                crate::math::axpy(1.0, &grl_transform(&d, lambda), &mut dh);
                loss
            }
        };
        self.encoder
            .backward(&tr, &dh, Some(&mut grads.network.encoder));
        Ok(LossParts {
            classification,
            adversary,
        })
    }
}

/// Gradient of the predicted label's probability w.r.t. each read token's
/// embedding, as `(input positions, [step][embed])`.
pub fn predicted_probability_gradient(
    ids: &[u32],
    enc: &EncoderParams,
    head: &HeadParams,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let tr = enc.forward(ids)?;
    let ht = head.forward(&tr.representation)?;
    let y = argmax(&ht.probs);
    let py = ht.probs[y];
    let d_logits: Vec<f64> = ht
        .probs
        .iter()
        .enumerate()
        .map(|(j, pj)| py * (if j == y { 1.0 } else { 0.0 } - pj))
        .collect();
    let dh = head.backward(&ht, &d_logits, None);
    let dx = enc.backward(&tr, &dh, None);
    Ok((tr.positions().to_vec(), dx))
}

/// Per-token saliency: L2 norm of the input gradient of the predicted
/// label's probability, normalized to sum to one. PAD positions get zero.
pub fn saliency_map(ids: &[u32], enc: &EncoderParams, head: &HeadParams) -> Result<Vec<f64>> {
    let (positions, dx) = predicted_probability_gradient(ids, enc, head)?;
    let ed = enc.embed_dim();
    let norms: Vec<f64> = dx
        .chunks_exact(ed)
        .map(|g| sqrt(crate::math::dot(g, g)))
        .collect();
    let total: f64 = norms.iter().sum();
    let mut out = vec![0.0; ids.len()];
    for (p, n) in positions.iter().zip(&norms) {
        out[*p] = if total > 0.0 {
            n / total
        } else {
            1.0 / positions.len() as f64
        };
    }
    Ok(out)
}

/// Representation `h_x` and attention weights of a document.
pub fn encode(ids: &[u32], enc: &EncoderParams) -> Result<(Vec<f64>, Vec<f64>)> {
    let tr = enc.forward(ids)?;
    let att = tr.attention();
    Ok((tr.representation, att))
}

/// Initial network and the first adversary head.
pub fn init_params(config: &ModelConfig) -> Result<(Network, HeadParams)> {
    let net = Network::init(config)?;
    let adv = net.new_adversary(0);
    Ok((net, adv))
}
