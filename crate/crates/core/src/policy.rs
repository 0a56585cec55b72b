//! Linear softmax policy over sparse binary feature vectors: logits,
//! action distributions, cross-entropy loss with L2 regularisation, and the
//! batched SGD update.

use crate::features::CompiledFeatureSet;
use crate::game::{GameState, Move};

/// Weight vector aligned index-for-index with a feature set, plus the
/// training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPolicy {
    pub weights: Vec<f64>,
    pub step_size: f64,
    pub l2: f64,
}

/// Probabilities parallel to the legal-move list that produced them.
#[derive(Debug, Clone)]
pub struct ActionDistribution {
    pub moves: Vec<Move>,
    pub probs: Vec<f64>,
}

/// One training sample: the active-feature indices per legal move, and the
/// target distribution over those moves.
#[derive(Debug, Clone)]
pub struct PolicySample {
    pub move_features: Vec<Vec<u32>>,
    pub target: Vec<f64>,
}

/// Softmax with max-logit subtraction; strictly positive outputs.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    assert!(!logits.is_empty(), "softmax over an empty vector");
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.iter().map(|e| e / z).collect()
}

impl LinearPolicy {
    pub fn zeros(n: usize, step_size: f64, l2: f64) -> LinearPolicy {
        LinearPolicy { weights: vec![0.0; n], step_size, l2 }
    }

    pub fn with_weights(weights: Vec<f64>, step_size: f64, l2: f64) -> LinearPolicy {
        assert!(weights.iter().all(|w| w.is_finite()), "weights must be finite");
        LinearPolicy { weights, step_size, l2 }
    }

    /// Grows the weight vector for a newly appended feature. Zero weight
    /// keeps every existing distribution unchanged.
    pub fn append_feature(&mut self) {
        self.weights.push(0.0);
    }

    /// Sum of weights over the active indices.
    pub fn logit(&self, active: &[u32]) -> f64 {
        active
            .iter()
            .map(|&i| {
                *self
                    .weights
                    .get(i as usize)
                    .expect("feature index out of range: feature set and weights out of sync")
            })
            .sum()
    }

    pub fn probabilities(&self, move_features: &[Vec<u32>]) -> Vec<f64> {
        let logits: Vec<f64> = move_features.iter().map(|phi| self.logit(phi)).collect();
        softmax(&logits)
    }

    /// Apprentice distribution over the legal moves of `s`.
    pub fn distribution(
        &self,
        cfs: &CompiledFeatureSet,
        s: &GameState,
        moves: &[Move],
    ) -> ActionDistribution {
        assert!(!moves.is_empty(), "distribution over an empty move list");
        let phis: Vec<Vec<u32>> = moves.iter().map(|m| cfs.active_features(s, m)).collect();
        ActionDistribution { moves: moves.to_vec(), probs: self.probabilities(&phis) }
    }

    /// Cross-entropy against the target plus the L2 penalty:
    /// −πᵀ log p + (λ/2)‖θ‖².
    pub fn loss(&self, sample: &PolicySample) -> f64 {
        let total: f64 = sample.target.iter().sum();
        assert!(
            (total - 1.0).abs() < 1e-6,
            "target distribution sums to {total}, expected 1"
        );
        assert_eq!(sample.target.len(), sample.move_features.len());
        let p = self.probabilities(&sample.move_features);
        let ce: f64 = sample
            .target
            .iter()
            .zip(&p)
            .map(|(pi, pr)| -pi * pr.ln())
            .sum();
        let reg: f64 = self.weights.iter().map(|w| w * w).sum::<f64>() * self.l2 / 2.0;
        ce + reg
    }

    /// Data gradient of the cross-entropy term with respect to the weights,
    /// averaged over the batch: mean of Σ_a (p(s,a) − π(s,a))·φ(s,a).
    pub fn batch_gradient(&self, batch: &[PolicySample]) -> Vec<f64> {
        assert!(!batch.is_empty(), "gradient of an empty batch");
        let mut grad = vec![0.0; self.weights.len()];
        for sample in batch {
            let p = self.probabilities(&sample.move_features);
            for (phi, (pr, pi)) in sample
                .move_features
                .iter()
                .zip(p.iter().zip(sample.target.iter()))
            {
                let err = pr - pi;
                for &idx in phi {
                    grad[idx as usize] += err;
                }
            }
        }
        let scale = 1.0 / batch.len() as f64;
        for g in &mut grad {
            *g *= scale;
        }
        grad
    }

    /// One SGD step: θ ← θ − α·grad − α·λ·θ, with probabilities recomputed
    /// from the pre-update weights for the whole batch and L2 decay applied
    /// once per update.
    pub fn sgd_update(&mut self, batch: &[PolicySample]) {
        let grad = self.batch_gradient(batch);
        let alpha = self.step_size;
        let decay = alpha * self.l2;
        for (w, g) in self.weights.iter_mut().zip(&grad) {
            *w -= alpha * g + decay * *w;
        }
    }
}
