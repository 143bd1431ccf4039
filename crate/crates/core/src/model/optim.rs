use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::tensor::Parameters;
use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Adam,
    Sgd,
}

/// Per-parameter-set optimizer state (Adam moments or plain SGD).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub steps: u64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64) -> Self {
        Optimizer {
            kind,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            steps: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn step<P: Parameters>(&mut self, params: &mut P, grads: &P) {
        self.steps += 1;
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgd => params.add_scaled(grads, -lr),
            OptimizerKind::Adam => {
                if self.first.is_empty() {
                    self.first = grads
                        .tensors()
                        .iter()
                        .map(|t| alloc::vec![0.0; t.len()])
                        .collect();
                    self.second = self.first.clone();
                }
                let (b1, b2) = (self.beta1, self.beta2);
                let c1 = 1.0 - libm::pow(b1, self.steps as f64);
                let c2 = 1.0 - libm::pow(b2, self.steps as f64);
                let step = lr * sqrt(c2) / c1;
                let eps_hat = self.epsilon * sqrt(c2);
                for (((p, g), m), v) in params
                    .tensors_mut()
                    .into_iter()
                    .zip(grads.tensors())
                    .zip(self.first.iter_mut())
                    .zip(self.second.iter_mut())
                {
                    for i in 0..p.len() {
                        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                        p[i] -= step * m[i] / (sqrt(v[i]) + eps_hat);
                    }
                }
            }
        }
    }
}
