//! Multinomial logistic regression over sparse inputs, trained by mini-batch
//! gradient descent on the L2-regularized log-loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse input: `(feature index, value)` pairs.
pub type SparseInput = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.5,
            l2: 1e-4,
            epochs: 30,
            batch_size: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxRegression {
    n_features: usize,
    n_classes: usize,
    /// Row-major `[n_features × n_classes]`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

pub fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        total += *s;
    }
    for s in scores.iter_mut() {
        *s /= total;
    }
}

impl SoftmaxRegression {
    pub fn zeros(n_features: usize, n_classes: usize) -> Self {
        assert!(n_classes >= 1 && n_features >= 1);
        Self {
            n_features,
            n_classes,
            weights: vec![0.0; n_features * n_classes],
            bias: vec![0.0; n_classes],
        }
    }

    pub fn from_parts(
        n_features: usize,
        n_classes: usize,
        weights: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if weights.len() != n_features * n_classes {
            return Err(Error::Dimension {
                expected: n_features * n_classes,
                got: weights.len(),
            });
        }
        if bias.len() != n_classes {
            return Err(Error::Dimension {
                expected: n_classes,
                got: bias.len(),
            });
        }
        if weights.iter().chain(&bias).any(|w| !w.is_finite()) {
            return Err(Error::Validation("non-finite classifier weight".into()));
        }
        Ok(Self {
            n_features,
            n_classes,
            weights,
            bias,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn scores(&self, x: &[(usize, f64)]) -> Vec<f64> {
        let mut out = self.bias.clone();
        for &(i, v) in x {
            let row = &self.weights[i * self.n_classes..(i + 1) * self.n_classes];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * v;
            }
        }
        out
    }

    pub fn probabilities(&self, x: &[(usize, f64)]) -> Vec<f64> {
        let mut s = self.scores(x);
        softmax_in_place(&mut s);
        s
    }

    /// Lowest index wins ties.
    pub fn predict(&self, x: &[(usize, f64)]) -> usize {
        argmax(&self.scores(x))
    }

    /// `mean(-ln p(y|x)) + l2/2 · ‖W‖²` (biases unregularized).
    pub fn loss(&self, data: &[(SparseInput, usize)], l2: f64) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        let nll: f64 = data
            .iter()
            .map(|(x, y)| -self.probabilities(x)[*y].max(f64::MIN_POSITIVE).ln())
            .sum();
        let sq: f64 = self.weights.iter().map(|w| w * w).sum();
        nll / data.len() as f64 + 0.5 * l2 * sq
    }

    /// Dense gradient of [`loss`](Self::loss): `(d weights, d bias)`.
    pub fn gradient(&self, data: &[(SparseInput, usize)], l2: f64) -> (Vec<f64>, Vec<f64>) {
        let mut gw: Vec<f64> = self.weights.iter().map(|w| l2 * w).collect();
        let mut gb = vec![0.0; self.n_classes];
        if data.is_empty() {
            return (gw, gb);
        }
        let scale = 1.0 / data.len() as f64;
        for (x, y) in data {
            let mut p = self.probabilities(x);
            p[*y] -= 1.0;
            for (b, d) in gb.iter_mut().zip(&p) {
                *b += scale * d;
            }
            for &(i, v) in x {
                let row = &mut gw[i * self.n_classes..(i + 1) * self.n_classes];
                for (g, d) in row.iter_mut().zip(&p) {
                    *g += scale * v * d;
                }
            }
        }
        (gw, gb)
    }

    /// Mini-batch gradient descent. Returns the full objective after each
    /// epoch. Weight decay is applied through a shared scale factor so a step
    /// only touches the rows its batch activates.
    pub fn fit(&mut self, data: &[(SparseInput, usize)], config: &SgdConfig) -> Result<Vec<f64>> {
        if data.is_empty() {
            return Err(Error::Validation(
                "cannot train on an empty data set".into(),
            ));
        }
        if let Some((_, y)) = data.iter().find(|(_, y)| *y >= self.n_classes) {
            return Err(Error::Validation(format!("label {y} out of range")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let batch_size = config.batch_size.max(1);
        let lr = config.learning_rate;
        let decay = 1.0 - lr * config.l2;
        if decay.is_nan() || decay <= 0.0 {
            return Err(Error::Config("learning_rate * l2 must be below 1".into()));
        }
        let k = self.n_classes;
        let mut scale = 1.0_f64;
        let mut losses = Vec::with_capacity(config.epochs);
        let mut touched: Vec<usize> = Vec::new();
        let mut grad_rows: std::collections::HashMap<usize, Vec<f64>> = Default::default();

        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(batch_size) {
                grad_rows.clear();
                touched.clear();
                let mut gb = vec![0.0; k];
                let inv = 1.0 / batch.len() as f64;
                for &idx in batch {
                    let (x, y) = &data[idx];
                    // Scores with the effective weights `scale * w`.
                    let mut p = self.bias.clone();
                    for &(i, v) in x {
                        let row = &self.weights[i * k..(i + 1) * k];
                        for (o, w) in p.iter_mut().zip(row) {
                            *o += scale * w * v;
                        }
                    }
                    softmax_in_place(&mut p);
                    p[*y] -= 1.0;
                    for (b, d) in gb.iter_mut().zip(&p) {
                        *b += inv * d;
                    }
                    for &(i, v) in x {
                        let g = grad_rows.entry(i).or_insert_with(|| {
                            touched.push(i);
                            vec![0.0; k]
                        });
                        for (g, d) in g.iter_mut().zip(&p) {
                            *g += inv * v * d;
                        }
                    }
                }
                // W_eff <- decay * W_eff - lr * g_data, with W_eff = scale * w.
                scale *= decay;
                for &i in &touched {
                    let g = &grad_rows[&i];
                    let row = &mut self.weights[i * k..(i + 1) * k];
                    for (w, g) in row.iter_mut().zip(g) {
                        *w -= lr * g / scale;
                    }
                }
                for (b, g) in self.bias.iter_mut().zip(&gb) {
                    *b -= lr * g;
                }
                if scale < 1e-6 {
                    self.fold_scale(&mut scale);
                }
            }
            self.fold_scale(&mut scale);
            let loss = self.loss(data, config.l2);
            if !loss.is_finite() {
                return Err(Error::Numerical(format!(
                    "maxent training loss became {loss}"
                )));
            }
            losses.push(loss);
        }
        Ok(losses)
    }

    fn fold_scale(&mut self, scale: &mut f64) {
        if *scale != 1.0 {
            for w in &mut self.weights {
                *w *= *scale;
            }
            *scale = 1.0;
        }
    }
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
