//! Small dense networks with hand-derived gradients.
//!
//! Batches are row-major: every forward pass takes a `batch × features`
//! matrix. Gradient containers have the same type as the network they belong
//! to and are accumulated with `+=`.

pub mod adam;
pub mod checkpoint;
pub mod critic;
pub mod policy;

use ndarray::{Array2, Axis};
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{MarlError, Result};

pub type Tensor = Array2<f64>;

/// Anything that owns a fixed, ordered list of parameter tensors.
pub trait Parameterized {
    fn tensors(&self) -> Vec<&Tensor>;
    fn tensors_mut(&mut self) -> Vec<&mut Tensor>;

    /// A zero-filled container of the same shape, used for gradients.
    fn zeros_like(&self) -> Self
    where
        Self: Sized + Clone,
    {
        let mut z = self.clone();
        z.tensors_mut().into_iter().for_each(|t| t.fill(0.0));
        z
    }

    fn n_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn fill_zero(&mut self) {
        self.tensors_mut().into_iter().for_each(|t| t.fill(0.0));
    }
}

/// `target ← τ·online + (1 − τ)·target`, elementwise.
pub fn polyak<P: Parameterized>(target: &mut P, online: &P, tau: f64) {
    for (t, o) in target.tensors_mut().into_iter().zip(online.tensors()) {
        t.zip_mut_with(o, |t, &o| *t = tau * o + (1.0 - tau) * *t);
    }
}

/// Euclidean norm over all tensors.
pub fn global_norm<P: Parameterized>(p: &P) -> f64 {
    p.tensors()
        .iter()
        .flat_map(|t| t.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
}

/// SHA-256 over shapes and little-endian values of every tensor.
pub fn param_hash<P: Parameterized>(p: &P) -> String {
    let mut h = Sha256::new();
    for t in p.tensors() {
        h.update((t.nrows() as u64).to_le_bytes());
        h.update((t.ncols() as u64).to_le_bytes());
        for x in t.iter() {
            h.update(x.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn check_cols(x: &Tensor, expected: usize, what: &str) -> Result<()> {
    if x.ncols() != expected {
        return Err(MarlError::Shape(format!(
            "{what}: expected {expected} columns, got {}",
            x.ncols()
        )));
    }
    Ok(())
}

pub(crate) fn relu(x: &Tensor) -> Tensor {
    x.mapv(|v| v.max(0.0))
}

/// Zeroes `grad` wherever the pre-activation was not positive.
pub(crate) fn relu_backward(pre: &Tensor, grad: &mut Tensor) {
    grad.zip_mut_with(pre, |g, &p| {
        if p <= 0.0 {
            *g = 0.0;
        }
    });
}

/// Affine layer `y = x W + b` with `W: in × out` and `b: 1 × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub w: Tensor,
    pub b: Tensor,
}

impl Linear {
    /// Uniform initialisation in `±1/√in`.
    pub fn new<R: Rng + ?Sized>(n_in: usize, n_out: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (n_in.max(1) as f64).sqrt();
        let mut draw = |r, c| Array2::from_shape_fn((r, c), |_| rng.random_range(-bound..=bound));
        let w = draw(n_in, n_out);
        let b = draw(1, n_out);
        Self { w, b }
    }

    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            w: Array2::zeros((n_in, n_out)),
            b: Array2::zeros((1, n_out)),
        }
    }

    pub fn n_in(&self) -> usize {
        self.w.nrows()
    }

    pub fn n_out(&self) -> usize {
        self.w.ncols()
    }

    pub fn forward(&self, x: &Tensor) -> Tensor {
        x.dot(&self.w) + &self.b
    }

    /// Accumulates parameter gradients into `grad` and returns `∂L/∂x`.
    pub fn backward(&self, x: &Tensor, gy: &Tensor, grad: &mut Linear) -> Tensor {
        grad.w += &x.t().dot(gy);
        grad.b += &gy.sum_axis(Axis(0)).insert_axis(Axis(0));
        gy.dot(&self.w.t())
    }
}

impl Parameterized for Linear {
    fn tensors(&self) -> Vec<&Tensor> {
        vec![&self.w, &self.b]
    }
    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.w, &mut self.b]
    }
}

/// Multilayer perceptron with ReLU on every hidden layer and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Linear>,
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// Input of every layer (post-activation of the previous one).
    inputs: Vec<Tensor>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Tensor>,
}

impl Mlp {
    /// `sizes = [in, h1, ..., out]`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs at least input and output sizes");
        Self {
            layers: sizes.windows(2).map(|w| Linear::new(w[0], w[1], rng)).collect(),
        }
    }

    pub fn from_layers(layers: Vec<Linear>) -> Result<Self> {
        if layers.is_empty() {
            return Err(MarlError::Shape("an MLP needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].n_out() != pair[1].n_in() {
                return Err(MarlError::Shape(format!(
                    "layer output {} does not feed layer input {}",
                    pair[0].n_out(),
                    pair[1].n_in()
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn n_in(&self) -> usize {
        self.layers[0].n_in()
    }

    pub fn n_out(&self) -> usize {
        self.layers[self.layers.len() - 1].n_out()
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        check_cols(x, self.n_in(), "mlp input")?;
        let last = self.layers.len() - 1;
        let mut h = x.clone();
        for (i, l) in self.layers.iter().enumerate() {
            h = l.forward(&h);
            if i < last {
                h.mapv_inplace(|v| v.max(0.0));
            }
        }
        Ok(h)
    }

    pub fn forward_cached(&self, x: &Tensor) -> Result<(Tensor, MlpCache)> {
        check_cols(x, self.n_in(), "mlp input")?;
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(last);
        let mut h = x.clone();
        for (i, l) in self.layers.iter().enumerate() {
            let z = l.forward(&h);
            inputs.push(h);
            if i < last {
                h = relu(&z);
                pre.push(z);
            } else {
                h = z;
            }
        }
        Ok((h, MlpCache { inputs, pre }))
    }

    pub fn backward(&self, cache: &MlpCache, gy: &Tensor, grad: &mut Mlp) -> Tensor {
        let mut g = gy.clone();
        for i in (0..self.layers.len()).rev() {
            if i < self.layers.len() - 1 {
                relu_backward(&cache.pre[i], &mut g);
            }
            g = self.layers[i].backward(&cache.inputs[i], &g, &mut grad.layers[i]);
        }
        g
    }
}

impl Parameterized for Mlp {
    fn tensors(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(|l| l.tensors()).collect()
    }
    fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(|l| l.tensors_mut()).collect()
    }
}

/// Horizontal concatenation of row-aligned blocks.
pub fn hcat(blocks: &[&Tensor]) -> Tensor {
    let views: Vec<_> = blocks.iter().map(|b| b.view()).collect();
    ndarray::concatenate(Axis(1), &views).expect("row counts agree")
}

/// Splits `x` into column blocks of the given widths.
pub fn hsplit(x: &Tensor, widths: &[usize]) -> Vec<Tensor> {
    let mut out = Vec::with_capacity(widths.len());
    let mut start = 0;
    for &w in widths {
        out.push(x.slice(ndarray::s![.., start..start + w]).to_owned());
        start += w;
    }
    out
}


#[cfg(test)]
mod tests {
    use super::testing::fd_check;
    use super::*;
    use ndarray::array;
    use swarmsec_core::seed::rng_from;

    #[test]
    fn zero_network_outputs_zero() {
        let mlp = Mlp::from_layers(vec![Linear::zeros(3, 5), Linear::zeros(5, 2)]).unwrap();
        let y = mlp.forward(&array![[1.0, -2.0, 3.0]]).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_layer_echoes_input() {
        let mut l = Linear::zeros(3, 3);
        l.w = Array2::eye(3);
        let mlp = Mlp::from_layers(vec![l]).unwrap();
        let x = array![[1.0, -2.0, 3.0], [0.5, 0.0, -0.1]];
        assert_eq!(mlp.forward(&x).unwrap(), x);
    }

    #[test]
    fn forward_matches_scalar_oracle() {
        let mut rng = rng_from(1);
        let mlp = Mlp::new(&[4, 6, 5, 3], &mut rng);
        let x = Array2::from_shape_fn((3, 4), |_| rng.random_range(-1.0..1.0));
        let y = mlp.forward(&x).unwrap();
        for r in 0..3 {
            let mut h: Vec<f64> = x.row(r).to_vec();
            for (li, l) in mlp.layers.iter().enumerate() {
                let mut next = vec![0.0; l.n_out()];
                for (o, out) in next.iter_mut().enumerate() {
                    let mut acc = l.b[[0, o]];
                    for (i, hi) in h.iter().enumerate() {
                        acc += hi * l.w[[i, o]];
                    }
                    *out = if li + 1 < mlp.layers.len() { acc.max(0.0) } else { acc };
                }
                h = next;
            }
            for (o, v) in h.iter().enumerate() {
                assert!((v - y[[r, o]]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mlp = Mlp::new(&[4, 2], &mut rng_from(1));
        assert!(matches!(mlp.forward(&Array2::zeros((1, 3))), Err(MarlError::Shape(_))));
        assert!(Mlp::from_layers(vec![Linear::zeros(2, 3), Linear::zeros(4, 1)]).is_err());
    }

    #[test]
    fn mlp_gradients_match_finite_differences() {
        let mut rng = rng_from(2);
        let mut mlp = Mlp::new(&[3, 8, 8, 2], &mut rng);
        let x = Array2::from_shape_fn((5, 3), |_| rng.random_range(-1.0..1.0));
        let c = Array2::from_shape_fn((5, 2), |_| rng.random_range(-1.0..1.0));
        let loss = |m: &Mlp| (m.forward(&x).unwrap() * &c).sum();
        let (_, cache) = mlp.forward_cached(&x).unwrap();
        let mut grad = mlp.zeros_like();
        mlp.backward(&cache, &c, &mut grad);
        assert!(fd_check(&mut mlp, &grad, loss, 1e-5) < 1e-4);
    }

    #[test]
    fn polyak_cases() {
        let online = Linear { w: Array2::ones((1, 1)), b: Array2::ones((1, 1)) };
        let mut target = Linear::zeros(1, 1);
        polyak(&mut target, &online, 0.5);
        polyak(&mut target, &online, 0.5);
        assert_eq!(target.w[[0, 0]], 0.75);
        polyak(&mut target, &online, 1.0);
        assert_eq!(target, online);
        // geometric approach with ratio 1 − τ
        let mut target = Linear::zeros(1, 1);
        for k in 1..=20 {
            polyak(&mut target, &online, 0.1);
            let gap = 1.0 - target.w[[0, 0]];
            assert!((gap - 0.9f64.powi(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn hash_tracks_values() {
        let mut rng = rng_from(3);
        let mut mlp = Mlp::new(&[2, 3, 1], &mut rng);
        let h = param_hash(&mlp);
        assert_eq!(h, param_hash(&mlp.clone()));
        mlp.layers[0].w[[0, 0]] += 1e-12;
        assert_ne!(h, param_hash(&mlp));
    }

    #[test]
    fn split_inverts_concat() {
        let a = array![[1.0, 2.0], [3.0, 4.0]];
        let b = array![[5.0], [6.0]];
        let c = hcat(&[&a, &b]);
        let parts = hsplit(&c, &[2, 1]);
        assert_eq!(parts[0], a);
        assert_eq!(parts[1], b);
    }
}
