use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::StableHasher;

/// Sizes of a two-hidden-layer network with a decision head and a query head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub input: usize,
    pub hidden: usize,
    pub n_decisions: usize,
    pub n_queries: usize,
}

impl Architecture {
    fn sizes(&self) -> [usize; 8] {
        let (d, h) = (self.input, self.hidden);
        [
            h * d,
            h,
            h * h,
            h,
            self.n_decisions * h,
            self.n_decisions,
            self.n_queries * h,
            self.n_queries,
        ]
    }

    fn offsets(&self) -> [usize; 9] {
        let mut o = [0; 9];
        for (i, s) in self.sizes().iter().enumerate() {
            o[i + 1] = o[i] + s;
        }
        o
    }

    pub fn n_params(&self) -> usize {
        self.offsets()[8]
    }
}

/// Q-network: `relu(W1 s + b1)`, `relu(W2 h1 + b2)`, then two affine heads.
/// All parameters live in one flat vector, weights row-major by output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QNetwork {
    arch: Architecture,
    params: Vec<f64>,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
    pub q_d: Vec<f64>,
    pub q_q: Vec<f64>,
}

fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut Vec<f64>) {
    let n_in = x.len();
    out.clear();
    out.extend(b.iter().enumerate().map(|(i, &bi)| {
        let row = &w[i * n_in..(i + 1) * n_in];
        bi + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }));
}

impl QNetwork {
    pub fn zeros(arch: Architecture) -> Self {
        Self {
            params: vec![0.0; arch.n_params()],
            arch,
        }
    }

    /// Parameters drawn uniformly from `[-scale, scale]`.
    pub fn random(arch: Architecture, scale: f64, rng: &mut impl Rng) -> Self {
        let params = (0..arch.n_params())
            .map(|_| rng.gen_range(-scale..=scale))
            .collect();
        Self { arch, params }
    }

    pub fn from_params(arch: Architecture, params: Vec<f64>) -> Result<Self> {
        if params.len() != arch.n_params() {
            return Err(Error::Dimension {
                expected: arch.n_params(),
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numerical("non-finite network parameter".into()));
        }
        Ok(Self { arch, params })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn block(&self, i: usize) -> &[f64] {
        let o = self.arch.offsets();
        &self.params[o[i]..o[i + 1]]
    }

    pub fn checksum(&self) -> u64 {
        StableHasher::new(self.params.len() as u64)
            .write_f64s(&self.params)
            .finish()
    }

    pub fn forward_cached(&self, s: &[f64]) -> Result<ForwardCache> {
        if s.len() != self.arch.input {
            return Err(Error::Dimension {
                expected: self.arch.input,
                got: s.len(),
            });
        }
        let mut h1 = Vec::new();
        affine(self.block(0), self.block(1), s, &mut h1);
        h1.iter_mut().for_each(|x| *x = x.max(0.0));
        let mut h2 = Vec::new();
        affine(self.block(2), self.block(3), &h1, &mut h2);
        h2.iter_mut().for_each(|x| *x = x.max(0.0));
        let mut q_d = Vec::new();
        affine(self.block(4), self.block(5), &h2, &mut q_d);
        let mut q_q = Vec::new();
        affine(self.block(6), self.block(7), &h2, &mut q_q);
        Ok(ForwardCache { h1, h2, q_d, q_q })
    }

    /// Q-values for every decision and every query.
    pub fn forward(&self, s: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let c = self.forward_cached(s)?;
        Ok((c.q_d, c.q_q))
    }

    /// Adds to `grad` the gradient of `g_d·Q_d + g_q·Q_q` at input `s`.
    pub fn accumulate_gradient(
        &self,
        s: &[f64],
        cache: &ForwardCache,
        g_d: &[f64],
        g_q: &[f64],
        grad: &mut [f64],
    ) {
        let a = self.arch;
        let (d, h) = (a.input, a.hidden);
        let o = a.offsets();
        let mut g_h2 = vec![0.0; h];
        for (gs, w_block) in [(g_d, 4), (g_q, 6)] {
            let w = self.block(w_block);
            for (k, &g) in gs.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                let wrow = o[w_block] + k * h;
                for i in 0..h {
                    grad[wrow + i] += g * cache.h2[i];
                    g_h2[i] += g * w[k * h + i];
                }
                grad[o[w_block + 1] + k] += g;
            }
        }
        let w2 = self.block(2);
        let mut g_h1 = vec![0.0; h];
        for i in 0..h {
            if cache.h2[i] <= 0.0 {
                continue;
            }
            let g = g_h2[i];
            let row = o[2] + i * h;
            for k in 0..h {
                grad[row + k] += g * cache.h1[k];
                g_h1[k] += g * w2[i * h + k];
            }
            grad[o[3] + i] += g;
        }
        for i in 0..h {
            if cache.h1[i] <= 0.0 {
                continue;
            }
            let g = g_h1[i];
            if g == 0.0 {
                continue;
            }
            let row = o[0] + i * d;
            for (k, &x) in s.iter().enumerate() {
                grad[row + k] += g * x;
            }
            grad[o[1] + i] += g;
        }
    }
}
