//! Squashed-Gaussian policy head.

use ndarray::{s, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{hcat, Mlp, MlpCache, Parameterized, Tensor};
use crate::error::Result;

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// `ln(1 − tanh²u)` without cancellation.
pub fn log_one_minus_tanh_sq(u: f64) -> f64 {
    2.0 * (std::f64::consts::LN_2 - u - softplus(-2.0 * u))
}

/// Policy network `obs → [mean, log_std]`, each of width `act_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPolicy {
    pub net: Mlp,
    pub act_dim: usize,
}

/// One batch of reparameterised samples.
#[derive(Debug, Clone)]
pub struct PolicyOutput {
    pub mean: Tensor,
    /// Clamped log standard deviation.
    pub log_std: Tensor,
    /// Unclamped network output, kept for the clamp gradient.
    log_std_raw: Tensor,
    pub eps: Tensor,
    /// Pre-squash sample `u = mean + σ·eps`.
    pub pre: Tensor,
    /// Squashed action `tanh(u)` in `(−1, 1)`.
    pub action: Tensor,
    /// `batch × 1` log-density of `action` including the squash correction.
    pub log_prob: Tensor,
    cache: MlpCache,
}

impl GaussianPolicy {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, act_dim: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            net: Mlp::new(&[obs_dim, hidden, hidden, 2 * act_dim], rng),
            act_dim,
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.net.n_in()
    }

    fn split(&self, out: &Tensor) -> (Tensor, Tensor) {
        let a = self.act_dim;
        (
            out.slice(s![.., ..a]).to_owned(),
            out.slice(s![.., a..2 * a]).to_owned(),
        )
    }

    /// Squashed mean action, used for evaluation.
    pub fn mean_action(&self, obs: &Tensor) -> Result<Tensor> {
        let out = self.net.forward(obs)?;
        Ok(self.split(&out).0.mapv(f64::tanh))
    }

    /// Reparameterised sample with externally supplied standard normal noise.
    pub fn sample_with(&self, obs: &Tensor, eps: &Tensor) -> Result<PolicyOutput> {
        let (out, cache) = self.net.forward_cached(obs)?;
        let (mean, log_std_raw) = self.split(&out);
        let log_std = log_std_raw.mapv(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX));
        let pre = &mean + &(log_std.mapv(f64::exp) * eps);
        let action = pre.mapv(f64::tanh);
        let mut log_prob = Array2::zeros((obs.nrows(), 1));
        for r in 0..obs.nrows() {
            let mut lp = 0.0;
            for c in 0..self.act_dim {
                let e = eps[[r, c]];
                lp += -0.5 * e * e - log_std[[r, c]] - HALF_LN_TWO_PI
                    - log_one_minus_tanh_sq(pre[[r, c]]);
            }
            log_prob[[r, 0]] = lp;
        }
        Ok(PolicyOutput {
            mean,
            log_std,
            log_std_raw,
            eps: eps.clone(),
            pre,
            action,
            log_prob,
            cache,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, obs: &Tensor, rng: &mut R) -> Result<PolicyOutput> {
        let eps = Array2::from_shape_fn((obs.nrows(), self.act_dim), |_| rng.sample(StandardNormal));
        self.sample_with(obs, &eps)
    }

    /// Backpropagates `∂L/∂action` and `∂L/∂log_prob` (both per sample) into
    /// `grad`. Returns `∂L/∂obs`.
    pub fn backward(
        &self,
        out: &PolicyOutput,
        g_action: &Tensor,
        g_log_prob: &Tensor,
        grad: &mut GaussianPolicy,
    ) -> Tensor {
        let (b, a) = (out.mean.nrows(), self.act_dim);
        let mut g_mean = Array2::zeros((b, a));
        let mut g_ls = Array2::zeros((b, a));
        for r in 0..b {
            let glp = g_log_prob[[r, 0]];
            for c in 0..a {
                let t = out.action[[r, c]];
                let sigma_eps = out.log_std[[r, c]].exp() * out.eps[[r, c]];
                // d logp/du = 2 tanh u from the squash correction
                let g_pre = g_action[[r, c]] * (1.0 - t * t) + glp * 2.0 * t;
                g_mean[[r, c]] = g_pre;
                let raw = out.log_std_raw[[r, c]];
                g_ls[[r, c]] = if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw) {
                    g_pre * sigma_eps - glp
                } else {
                    0.0
                };
            }
        }
        let g_out = hcat(&[&g_mean, &g_ls]);
        self.net.backward(&out.cache, &g_out, &mut grad.net)
    }
}

impl Parameterized for GaussianPolicy {
    fn tensors(&self) -> Vec<&Tensor> {
        self.net.tensors()
    }
    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        self.net.tensors_mut()
    }
}

/// Mean of a `batch × 1` column.
pub fn column_mean(x: &Tensor) -> f64 {
    x.mean_axis(Axis(0)).map_or(0.0, |m| m[0])
}
