//! Uniform replay buffer over joint transitions.

use ndarray::Array2;
use rand::Rng;

use crate::error::{MarlError, Result};
use crate::nn::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    /// Joint action, agent-major, in policy units.
    pub actions: Vec<f64>,
    /// Per-agent reward.
    pub rewards: Vec<f64>,
    pub next_obs: Vec<f64>,
}

/// A sampled minibatch in matrix form.
#[derive(Debug, Clone)]
pub struct Batch {
    pub obs: Tensor,
    /// One `batch × act_dim` matrix per agent.
    pub actions: Vec<Tensor>,
    /// `batch × n_agents`.
    pub rewards: Tensor,
    pub next_obs: Tensor,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.obs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    obs_dim: usize,
    n_agents: usize,
    act_dim: usize,
    data: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, obs_dim: usize, n_agents: usize, act_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(MarlError::invalid("buffer_capacity", "must be >= 1"));
        }
        Ok(Self {
            capacity,
            obs_dim,
            n_agents,
            act_dim,
            data: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        let shapes = [
            (t.obs.len(), self.obs_dim, "obs"),
            (t.next_obs.len(), self.obs_dim, "next_obs"),
            (t.actions.len(), self.n_agents * self.act_dim, "actions"),
            (t.rewards.len(), self.n_agents, "rewards"),
        ];
        for (got, expected, what) in shapes {
            if got != expected {
                return Err(MarlError::Shape(format!("transition {what}: {got} != {expected}")));
            }
        }
        let finite = [&t.obs, &t.next_obs, &t.actions, &t.rewards]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()));
        if !finite {
            return Err(MarlError::Divergence("non-finite transition".into()));
        }
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.data.get(i)
    }

    /// Indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Vec<usize>> {
        if batch == 0 || self.data.len() < batch {
            return Err(MarlError::invalid(
                "batch_size",
                format!("cannot sample {batch} from {} stored transitions", self.data.len()),
            ));
        }
        Ok((0..batch).map(|_| rng.random_range(0..self.data.len())).collect())
    }

    pub fn gather(&self, idx: &[usize]) -> Batch {
        let b = idx.len();
        let obs = Array2::from_shape_fn((b, self.obs_dim), |(r, c)| self.data[idx[r]].obs[c]);
        let next_obs = Array2::from_shape_fn((b, self.obs_dim), |(r, c)| self.data[idx[r]].next_obs[c]);
        let rewards = Array2::from_shape_fn((b, self.n_agents), |(r, c)| self.data[idx[r]].rewards[c]);
        let actions = (0..self.n_agents)
            .map(|m| {
                Array2::from_shape_fn((b, self.act_dim), |(r, c)| {
                    self.data[idx[r]].actions[m * self.act_dim + c]
                })
            })
            .collect();
        Batch {
            obs,
            actions,
            rewards,
            next_obs,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, batch: usize, rng: &mut R) -> Result<Batch> {
        let idx = self.sample_indices(batch, rng)?;
        Ok(self.gather(&idx))
    }
}
