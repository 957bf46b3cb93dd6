//! Per-agent critics `Q_m(s, a)`.
//!
//! The attention critic embeds the state and the agent's own action,
//! `e = ReLU(g([s, a_m]))`, attends over the other agents' actions with the
//! shared projections `W_q`, `W_k`, `W_v` and reads out `Q = f([e, x])`.
//! The concatenation critic feeds the other agents' raw actions instead of
//! the attention summary `x`.

use ndarray::{Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_cols, hcat, hsplit, relu, relu_backward, Linear, Mlp, MlpCache, Parameterized, Tensor};
use crate::error::{MarlError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticKind {
    Attention,
    Concat,
}

/// Query, key and value projections shared by all agents' critics.
#[derive(Debug, Clone, PartialEq)]
pub struct Projections {
    /// `embed × d_k`
    pub wq: Tensor,
    /// `act_dim × d_k`
    pub wk: Tensor,
    /// `act_dim × d_k`
    pub wv: Tensor,
}

impl Projections {
    pub fn new<R: Rng + ?Sized>(embed: usize, act_dim: usize, d_k: usize, rng: &mut R) -> Self {
        let mut draw = |r: usize, c: usize| {
            let bound = 1.0 / (r as f64).sqrt();
            Array2::from_shape_fn((r, c), |_| rng.random_range(-bound..=bound))
        };
        Self {
            wq: draw(embed, d_k),
            wk: draw(act_dim, d_k),
            wv: draw(act_dim, d_k),
        }
    }

    pub fn d_k(&self) -> usize {
        self.wq.ncols()
    }
}

impl Parameterized for Projections {
    fn tensors(&self) -> Vec<&Tensor> {
        vec![&self.wq, &self.wk, &self.wv]
    }
    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.wq, &mut self.wk, &mut self.wv]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentCritic {
    /// Agent index `m` within the joint action.
    pub index: usize,
    pub n_agents: usize,
    pub act_dim: usize,
    pub kind: CriticKind,
    /// Embedding `g_m`, one ReLU layer.
    pub g: Linear,
    /// Head `f_m`, two ReLU hidden layers and a scalar output.
    pub f: Mlp,
}

#[derive(Debug, Clone)]
pub struct CriticCache {
    gin: Tensor,
    e_pre: Tensor,
    e: Tensor,
    q: Tensor,
    keys: Vec<Tensor>,
    values: Vec<Tensor>,
    /// `batch × (N − 1)` attention scores, other agents in index order.
    pub scores: Tensor,
    f_cache: MlpCache,
}

/// Gradients of a critic output with respect to its inputs.
#[derive(Debug, Clone)]
pub struct CriticInputGrads {
    pub obs: Tensor,
    /// One entry per agent of the joint action.
    pub actions: Vec<Tensor>,
}

fn row_dot(a: &Tensor, b: &Tensor) -> Tensor {
    (a * b).sum_axis(Axis(1)).insert_axis(Axis(1))
}

impl AgentCritic {
    #[allow(clippy::too_many_arguments)]
    pub fn new<R: Rng + ?Sized>(
        index: usize,
        n_agents: usize,
        obs_dim: usize,
        act_dim: usize,
        embed: usize,
        hidden: usize,
        d_k: usize,
        kind: CriticKind,
        rng: &mut R,
    ) -> Result<Self> {
        if index >= n_agents {
            return Err(MarlError::Shape(format!("agent {index} of {n_agents}")));
        }
        if kind == CriticKind::Attention && n_agents < 2 {
            return Err(MarlError::Shape(
                "the attention critic needs at least one other agent".into(),
            ));
        }
        let x_dim = match kind {
            CriticKind::Attention => d_k,
            CriticKind::Concat => (n_agents - 1) * act_dim,
        };
        Ok(Self {
            index,
            n_agents,
            act_dim,
            kind,
            g: Linear::new(obs_dim + act_dim, embed, rng),
            f: Mlp::new(&[embed + x_dim, hidden, hidden, 1], rng),
        })
    }

    fn others(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_agents).filter(move |&n| n != self.index)
    }

    pub fn forward(
        &self,
        proj: &Projections,
        obs: &Tensor,
        actions: &[Tensor],
    ) -> Result<(Tensor, CriticCache)> {
        if actions.len() != self.n_agents {
            return Err(MarlError::Shape(format!(
                "joint action has {} agents, critic expects {}",
                actions.len(),
                self.n_agents
            )));
        }
        for a in actions {
            check_cols(a, self.act_dim, "critic action")?;
        }
        let b = obs.nrows();
        let gin = hcat(&[obs, &actions[self.index]]);
        check_cols(&gin, self.g.n_in(), "critic embedding input")?;
        let e_pre = self.g.forward(&gin);
        let e = relu(&e_pre);
        let (x, q, keys, values, scores) = match self.kind {
            CriticKind::Attention => {
                let q = e.dot(&proj.wq);
                let scale = 1.0 / (proj.d_k() as f64).sqrt();
                let keys: Vec<Tensor> = self.others().map(|n| actions[n].dot(&proj.wk)).collect();
                let values: Vec<Tensor> = self.others().map(|n| actions[n].dot(&proj.wv)).collect();
                let logits: Vec<Tensor> = keys.iter().map(|k| row_dot(&q, k) * scale).collect();
                let views: Vec<_> = logits.iter().map(|l| l.view()).collect();
                let mut scores = ndarray::concatenate(Axis(1), &views)
                    .map_err(|e| MarlError::Shape(e.to_string()))?;
                for mut row in scores.rows_mut() {
                    let mx = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                    row.mapv_inplace(|v| (v - mx).exp());
                    let s = row.sum();
                    row.mapv_inplace(|v| v / s);
                }
                let mut x = Array2::zeros((b, proj.d_k()));
                for (j, v) in values.iter().enumerate() {
                    let s = scores.column(j).to_owned().insert_axis(Axis(1));
                    x += &(v * &s);
                }
                (x, q, keys, values, scores)
            }
            CriticKind::Concat => {
                let others: Vec<&Tensor> = self.others().map(|n| &actions[n]).collect();
                let x = if others.is_empty() {
                    Array2::zeros((b, 0))
                } else {
                    hcat(&others)
                };
                (x, Array2::zeros((b, 0)), Vec::new(), Vec::new(), Array2::zeros((b, 0)))
            }
        };
        let (out, f_cache) = self.f.forward_cached(&hcat(&[&e, &x]))?;
        Ok((
            out,
            CriticCache {
                gin,
                e_pre,
                e,
                q,
                keys,
                values,
                scores,
                f_cache,
            },
        ))
    }

    /// Backpropagates `∂L/∂Q` (`batch × 1`). Parameter gradients accumulate
    /// into `grad` and `grad_proj`.
    pub fn backward(
        &self,
        proj: &Projections,
        actions: &[Tensor],
        cache: &CriticCache,
        g_q: &Tensor,
        grad: &mut AgentCritic,
        grad_proj: &mut Projections,
    ) -> CriticInputGrads {
        let embed = self.g.n_out();
        let x_dim = self.f.n_in() - embed;
        let g_fin = self.f.backward(&cache.f_cache, g_q, &mut grad.f);
        let parts = hsplit(&g_fin, &[embed, x_dim]);
        let (mut g_e, g_x) = (parts[0].clone(), &parts[1]);
        let mut g_actions: Vec<Tensor> = actions.iter().map(|a| Array2::zeros(a.raw_dim())).collect();
        match self.kind {
            CriticKind::Attention => {
                let scale = 1.0 / (proj.d_k() as f64).sqrt();
                let g_s: Vec<Tensor> = cache.values.iter().map(|v| row_dot(g_x, v)).collect();
                let mut weighted = Array2::zeros((g_q.nrows(), 1));
                for (j, gs) in g_s.iter().enumerate() {
                    weighted += &(gs * &cache.scores.column(j).to_owned().insert_axis(Axis(1)));
                }
                let mut g_query = Array2::zeros(cache.q.raw_dim());
                for (j, n) in self.others().enumerate() {
                    let s = cache.scores.column(j).to_owned().insert_axis(Axis(1));
                    let g_v = g_x * &s;
                    let g_z = &s * &(&g_s[j] - &weighted) * scale;
                    g_query += &(&cache.keys[j] * &g_z);
                    let g_k = &cache.q * &g_z;
                    grad_proj.wk += &actions[n].t().dot(&g_k);
                    grad_proj.wv += &actions[n].t().dot(&g_v);
                    g_actions[n] = g_k.dot(&proj.wk.t()) + g_v.dot(&proj.wv.t());
                }
                grad_proj.wq += &cache.e.t().dot(&g_query);
                g_e += &g_query.dot(&proj.wq.t());
            }
            CriticKind::Concat => {
                let widths = vec![self.act_dim; self.n_agents - 1];
                for (g, n) in hsplit(g_x, &widths).into_iter().zip(self.others().collect::<Vec<_>>()) {
                    g_actions[n] = g;
                }
            }
        }
        relu_backward(&cache.e_pre, &mut g_e);
        let g_in = self.g.backward(&cache.gin, &g_e, &mut grad.g);
        let obs_dim = self.g.n_in() - self.act_dim;
        let parts = hsplit(&g_in, &[obs_dim, self.act_dim]);
        g_actions[self.index] = parts[1].clone();
        CriticInputGrads {
            obs: parts[0].clone(),
            actions: g_actions,
        }
    }
}

impl Parameterized for AgentCritic {
    fn tensors(&self) -> Vec<&Tensor> {
        let mut t = self.g.tensors();
        t.extend(self.f.tensors());
        t
    }
    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut t = self.g.tensors_mut();
        t.extend(self.f.tensors_mut());
        t
    }
}
