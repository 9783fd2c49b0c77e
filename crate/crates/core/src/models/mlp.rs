//! Feed-forward network: ReLU hidden layers, a single sigmoid output,
//! class-weighted binary cross-entropy trained with Adam on shuffled
//! mini-batches. Glorot-uniform initialization from the spec seed.

use super::ModelError;
use crate::domain::ZoneStatus;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden_layers: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl MlpParams {
    /// Grid defaults: 10 epochs, batches of 5, Adam at 0.001.
    pub fn with_hidden(hidden_layers: Vec<usize>) -> Self {
        MlpParams {
            hidden_layers,
            epochs: 10,
            batch_size: 5,
            learning_rate: 0.001,
        }
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Dense {
    /// Row-major [out][in].
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl Dense {
    fn n_in(&self) -> usize {
        self.w.first().map_or(0, Vec::len)
    }

    fn n_out(&self) -> usize {
        self.b.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Dense>,
    n_features: usize,
}

impl Mlp {
    /// Glorot-uniform initialized network without any training steps.
    pub fn init(n_features: usize, hidden: &[usize], seed: u64) -> Mlp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sizes = vec![n_features];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|io| {
                let (n_in, n_out) = (io[0], io[1]);
                let limit = (6.0 / (n_in + n_out) as f64).sqrt();
                Dense {
                    w: (0..n_out)
                        .map(|_| (0..n_in).map(|_| rng.gen_range(-limit..=limit)).collect())
                        .collect(),
                    b: vec![0.0; n_out],
                }
            })
            .collect();
        Mlp { layers, n_features }
    }

    pub fn fit(
        x: &[Vec<f64>],
        y: &[ZoneStatus],
        params: &MlpParams,
        seed: u64,
    ) -> Result<Mlp, ModelError> {
        if x.is_empty() {
            return Err(ModelError::EmptyTrainSet);
        }
        let n = x.len();
        let mut net = Mlp::init(x[0].len(), &params.hidden_layers, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));

        // Inverse class frequency normalized to mean 1: w_c = n / (2 n_c).
        let n_closed = y.iter().filter(|l| l.is_closed()).count();
        let n_open = n - n_closed;
        let w_closed = if n_closed > 0 { n as f64 / (2.0 * n_closed as f64) } else { 1.0 };
        let w_open = if n_open > 0 { n as f64 / (2.0 * n_open as f64) } else { 1.0 };

        let y01: Vec<f64> = y.iter().map(|l| l.encode()).collect();
        let weights: Vec<f64> =
            y.iter().map(|l| if l.is_closed() { w_closed } else { w_open }).collect();

        let mut adam_m = vec![0.0; net.n_params()];
        let mut adam_v = vec![0.0; net.n_params()];
        let mut t = 0u32;

        let mut order: Vec<usize> = (0..n).collect();
        for epoch in 0..params.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(params.batch_size) {
                let bx: Vec<&[f64]> = batch.iter().map(|&i| x[i].as_slice()).collect();
                let by: Vec<f64> = batch.iter().map(|&i| y01[i]).collect();
                let bw: Vec<f64> = batch.iter().map(|&i| weights[i]).collect();
                let (loss, grads) = net.batch_gradients(&bx, &by, &bw);
                if !loss.is_finite() {
                    return Err(ModelError::NonFiniteLoss { epoch });
                }
                t += 1;
                let mut flat = net.params_flat();
                let bc1 = 1.0 - BETA1.powi(t as i32);
                let bc2 = 1.0 - BETA2.powi(t as i32);
                for (i, g) in grads.iter().enumerate() {
                    adam_m[i] = BETA1 * adam_m[i] + (1.0 - BETA1) * g;
                    adam_v[i] = BETA2 * adam_v[i] + (1.0 - BETA2) * g * g;
                    let m_hat = adam_m[i] / bc1;
                    let v_hat = adam_v[i] / bc2;
                    flat[i] -= params.learning_rate * m_hat / (v_hat.sqrt() + ADAM_EPS);
                }
                net.set_params_flat(&flat);
            }
        }
        Ok(net)
    }

    /// Closure probability for one (scaled) row.
    pub fn predict_proba(&self, row: &[f64]) -> Result<f64, ModelError> {
        if row.len() != self.n_features {
            return Err(ModelError::ArityMismatch {
                expected: self.n_features,
                got: row.len(),
            });
        }
        let (activations, _) = self.forward(row);
        Ok(sigmoid(activations.last().unwrap()[0]))
    }

    pub fn predict(&self, row: &[f64]) -> Result<ZoneStatus, ModelError> {
        Ok(if self.predict_proba(row)? >= 0.5 {
            ZoneStatus::Closed
        } else {
            ZoneStatus::Open
        })
    }

    /// Pre-activations per layer; the final entry is the output logit
    /// (before the sigmoid). Returns (pre_activations, post_activations).
    fn forward(&self, row: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n_layers = self.layers.len();
        let mut pre = Vec::with_capacity(n_layers);
        let mut post = Vec::with_capacity(n_layers);
        let mut input: Vec<f64> = row.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let z: Vec<f64> = layer
                .w
                .iter()
                .zip(&layer.b)
                .map(|(wr, b)| wr.iter().zip(&input).map(|(w, a)| w * a).sum::<f64>() + b)
                .collect();
            let a: Vec<f64> = if li + 1 == n_layers {
                z.clone() // output layer stays a logit; sigmoid applied by callers
            } else {
                z.iter().map(|&v| v.max(0.0)).collect()
            };
            pre.push(z);
            post.push(a.clone());
            input = a;
        }
        (pre, post)
    }

    /// Mean weighted BCE over the batch.
    pub fn batch_loss(&self, xs: &[&[f64]], ys: &[f64], ws: &[f64]) -> f64 {
        let mut total = 0.0;
        for ((x, &y), &w) in xs.iter().zip(ys).zip(ws) {
            let (pre, _) = self.forward(x);
            let z = pre.last().unwrap()[0];
            total += w * (softplus(z) - y * z);
        }
        total / xs.len() as f64
    }

    /// Loss and the gradient of the mean weighted BCE with respect to every
    /// parameter, flattened in `params_flat` order.
    pub fn batch_gradients(&self, xs: &[&[f64]], ys: &[f64], ws: &[f64]) -> (f64, Vec<f64>) {
        let n_layers = self.layers.len();
        let mut grad_w: Vec<Vec<Vec<f64>>> = self
            .layers
            .iter()
            .map(|l| vec![vec![0.0; l.n_in()]; l.n_out()])
            .collect();
        let mut grad_b: Vec<Vec<f64>> = self.layers.iter().map(|l| vec![0.0; l.n_out()]).collect();
        let mut total_loss = 0.0;
        let batch = xs.len() as f64;

        for ((x, &y), &w) in xs.iter().zip(ys).zip(ws) {
            let (pre, post) = self.forward(x);
            let z_out = pre.last().unwrap()[0];
            total_loss += w * (softplus(z_out) - y * z_out);

            // delta at the output logit: w (sigma(z) - y), averaged later.
            let mut delta = vec![w * (sigmoid(z_out) - y)];
            for li in (0..n_layers).rev() {
                let inputs: &[f64] = if li == 0 { x } else { &post[li - 1] };
                for (o, &dv) in delta.iter().enumerate() {
                    for (i, &a) in inputs.iter().enumerate() {
                        grad_w[li][o][i] += dv * a / batch;
                    }
                    grad_b[li][o] += dv / batch;
                }
                if li == 0 {
                    break;
                }
                // Propagate through the ReLU of layer li-1.
                let mut next = vec![0.0; self.layers[li].n_in()];
                for (o, &dv) in delta.iter().enumerate() {
                    for (i, nx) in next.iter_mut().enumerate() {
                        *nx += self.layers[li].w[o][i] * dv;
                    }
                }
                for (i, nx) in next.iter_mut().enumerate() {
                    if pre[li - 1][i] <= 0.0 {
                        *nx = 0.0;
                    }
                }
                delta = next;
            }
        }

        let mut flat = Vec::with_capacity(self.n_params());
        for (gw, gb) in grad_w.iter().zip(&grad_b) {
            for row in gw {
                flat.extend_from_slice(row);
            }
            flat.extend_from_slice(gb);
        }
        (total_loss / batch, flat)
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(|l| l.n_out() * l.n_in() + l.n_out()).sum()
    }

    /// All parameters, layer by layer: weight rows then biases.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.n_params());
        for layer in &self.layers {
            for row in &layer.w {
                flat.extend_from_slice(row);
            }
            flat.extend_from_slice(&layer.b);
        }
        flat
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.n_params());
        let mut at = 0;
        for layer in &mut self.layers {
            for row in &mut layer.w {
                let len = row.len();
                row.copy_from_slice(&flat[at..at + len]);
                at += len;
            }
            let nb = layer.b.len();
            layer.b.copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}
