//! Fully connected closure network trained with Adam.
//!
//! LeakyReLU hidden layers, linear output, inverted dropout on hidden
//! activations during training, loss = training MSE summed over the r
//! outputs plus an L2 penalty on the weights. One multi-output network
//! covers all closure components.

use crate::closure::ClosureDataset;
use crate::error::{Error, Result};
use crate::scalar::Real;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct NnConfig {
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    /// L2 penalty on the weights.
    pub l2: f64,
    /// Dropout rate on hidden activations (training only).
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub leaky_slope: f64,
    pub seed: u64,
}

impl NnConfig {
    pub fn new(seed: u64) -> Self {
        NnConfig {
            hidden: vec![64, 128, 64],
            learning_rate: 1e-3,
            l2: 1e-4,
            dropout: 0.3,
            epochs: 100,
            batch_size: 512,
            leaky_slope: 0.01,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 || self.batch_size == 0 {
            return Err(Error::Argument(
                "learning rate and batch size must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Argument("dropout must lie in [0, 1)".into()));
        }
        if self.l2 < 0.0 {
            return Err(Error::Argument("l2 penalty must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MlpClosure<T> {
    /// Per layer, `out x in`.
    pub weights: Vec<DMatrix<T>>,
    pub biases: Vec<DVector<T>>,
    pub leaky_slope: T,
    pub config: NnConfig,
    /// Full-dataset training loss after each epoch (dropout off).
    pub loss_history: Vec<f64>,
}

impl<T: Real> MlpClosure<T> {
    /// Seeded He-style uniform initialization.
    pub fn initialized(inputs: usize, outputs: usize, config: &NnConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut dims = vec![inputs];
        dims.extend_from_slice(&config.hidden);
        dims.push(outputs);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for layer in 0..dims.len() - 1 {
            let fan_in = dims[layer];
            let bound = (6.0 / fan_in as f64).sqrt();
            weights.push(DMatrix::from_fn(dims[layer + 1], fan_in, |_, _| {
                T::of(rng.gen_range(-bound..bound))
            }));
            biases.push(DVector::zeros(dims[layer + 1]));
        }
        MlpClosure {
            weights,
            biases,
            leaky_slope: T::of(config.leaky_slope),
            config: config.clone(),
            loss_history: Vec::new(),
        }
    }

    /// All-zero network of the same shape (degenerate baseline).
    pub fn zero(inputs: usize, outputs: usize, config: &NnConfig) -> Self {
        let mut model = Self::initialized(inputs, outputs, config);
        for w in model.weights.iter_mut() {
            w.fill(T::zero());
        }
        model
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().unwrap().nrows()
    }

    /// Total weights plus biases.
    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Inference forward pass; dropout is disabled.
    pub fn predict(&self, input: &[T]) -> Result<Vec<T>> {
        if input.len() != self.input_dim() {
            return Err(Error::Dimension {
                context: "network input length",
                expected: self.input_dim(),
                actual: input.len(),
            });
        }
        let mut a = DVector::from_vec(input.to_vec());
        let layers = self.weights.len();
        for l in 0..layers {
            let mut z = &self.weights[l] * a + &self.biases[l];
            if l + 1 < layers {
                for v in z.iter_mut() {
                    if *v < T::zero() {
                        *v *= self.leaky_slope;
                    }
                }
            }
            a = z;
        }
        let out: Vec<T> = a.iter().cloned().collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network prediction".into()));
        }
        Ok(out)
    }

    /// Loss and parameter gradients on a batch.
    ///
    /// `masks`, when given, holds one 0/1 dropout mask per hidden layer
    /// (already scaled decisions; scaling by 1/(1-p) happens here). With
    /// `None` the network runs deterministically, which is what both the
    /// epoch-end loss recording and the finite-difference check use.
    #[allow(clippy::type_complexity)]
    pub fn loss_and_grad(
        &self,
        x: &DMatrix<T>,
        y: &DMatrix<T>,
        masks: Option<&[DMatrix<T>]>,
    ) -> (T, Vec<DMatrix<T>>, Vec<DVector<T>>) {
        let batch = x.nrows();
        let layers = self.weights.len();
        let keep = T::one() - T::of(self.config.dropout);

        // Forward, keeping pre-activations and activations.
        let mut activations: Vec<DMatrix<T>> = vec![x.clone()];
        let mut pre: Vec<DMatrix<T>> = Vec::with_capacity(layers);
        for l in 0..layers {
            let z = {
                let a = &activations[l];
                let mut z = a * self.weights[l].transpose();
                for mut row in z.row_iter_mut() {
                    row += self.biases[l].transpose();
                }
                z
            };
            pre.push(z.clone());
            let mut a_next = z;
            if l + 1 < layers {
                for v in a_next.iter_mut() {
                    if *v < T::zero() {
                        *v *= self.leaky_slope;
                    }
                }
                if let Some(masks) = masks {
                    let mask = &masks[l];
                    for (v, m) in a_next.iter_mut().zip(mask.iter()) {
                        *v = *v * *m / keep;
                    }
                }
            }
            activations.push(a_next);
        }

        // Loss: batch mean of the summed squared output errors + L2.
        let prediction = activations.last().unwrap();
        let diff = prediction - y;
        let inv_batch = T::one() / T::from_usize(batch).unwrap();
        let mut loss = diff.iter().fold(T::zero(), |acc, &d| acc + d * d) * inv_batch;
        let l2 = T::of(self.config.l2);
        for w in &self.weights {
            loss += l2 * w.iter().fold(T::zero(), |acc, &v| acc + v * v);
        }

        // Backward.
        let mut grad_w: Vec<DMatrix<T>> = Vec::with_capacity(layers);
        let mut grad_b: Vec<DVector<T>> = Vec::with_capacity(layers);
        let mut delta = diff * (T::of(2.0) * inv_batch);
        for l in (0..layers).rev() {
            let mut dw = delta.transpose() * &activations[l];
            dw += self.weights[l].clone() * (T::of(2.0) * l2);
            let mut db = DVector::<T>::zeros(self.biases[l].len());
            for row in delta.row_iter() {
                for (i, &v) in row.iter().enumerate() {
                    db[i] += v;
                }
            }
            grad_w.push(dw);
            grad_b.push(db);
            if l > 0 {
                let mut upstream = delta * &self.weights[l];
                if let Some(masks) = masks {
                    let mask = &masks[l - 1];
                    for (v, m) in upstream.iter_mut().zip(mask.iter()) {
                        *v = *v * *m / keep;
                    }
                }
                for (v, &z) in upstream.iter_mut().zip(pre[l - 1].iter()) {
                    if z < T::zero() {
                        *v *= self.leaky_slope;
                    }
                }
                delta = upstream;
            }
        }
        grad_w.reverse();
        grad_b.reverse();
        (loss, grad_w, grad_b)
    }
}

/// Trains the network on the closure dataset and returns the final-epoch
/// weights with the per-epoch loss curve.
pub fn fit_mlp<T: Real>(dataset: &ClosureDataset<T>, config: &NnConfig) -> Result<MlpClosure<T>> {
    config.validate()?;
    let n = dataset.len();
    let r = dataset.resolved_dim;
    let mut model = MlpClosure::initialized(r, r, config);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6d6c_7031);

    let x_full = dataset.inputs.clone();
    let y_full = dataset.targets.clone();

    let layers = model.weights.len();
    let mut m_w: Vec<DMatrix<T>> = model.weights.iter().map(|w| DMatrix::zeros(w.nrows(), w.ncols())).collect();
    let mut v_w = m_w.clone();
    let mut m_b: Vec<DVector<T>> = model.biases.iter().map(|b| DVector::zeros(b.len())).collect();
    let mut v_b = m_b.clone();
    let mut t_step = 0usize;

    let mut indices: Vec<usize> = (0..n).collect();
    for epoch in 0..config.epochs {
        indices.shuffle(&mut rng);
        for chunk in indices.chunks(config.batch_size) {
            let batch = chunk.len();
            let mut xb = DMatrix::<T>::zeros(batch, r);
            let mut yb = DMatrix::<T>::zeros(batch, r);
            for (row, &sample) in chunk.iter().enumerate() {
                for c in 0..r {
                    xb[(row, c)] = x_full[(sample, c)];
                    yb[(row, c)] = y_full[(sample, c)];
                }
            }
            let masks: Option<Vec<DMatrix<T>>> = if config.dropout > 0.0 {
                Some(
                    (0..layers - 1)
                        .map(|l| {
                            DMatrix::from_fn(batch, model.weights[l].nrows(), |_, _| {
                                if rng.gen::<f64>() < config.dropout {
                                    T::zero()
                                } else {
                                    T::one()
                                }
                            })
                        })
                        .collect(),
                )
            } else {
                None
            };

            let (loss, grad_w, grad_b) = model.loss_and_grad(&xb, &yb, masks.as_deref());
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    step: epoch,
                    detail: "training loss became non-finite".into(),
                });
            }

            t_step += 1;
            let b1 = T::of(ADAM_BETA1);
            let b2 = T::of(ADAM_BETA2);
            let bias1 = T::one() - T::of(ADAM_BETA1.powi(t_step as i32));
            let bias2 = T::one() - T::of(ADAM_BETA2.powi(t_step as i32));
            let lr = T::of(config.learning_rate);
            let eps = T::of(ADAM_EPS);
            for l in 0..layers {
                for (idx, g) in grad_w[l].iter().enumerate() {
                    let m = &mut m_w[l][idx];
                    *m = b1 * *m + (T::one() - b1) * *g;
                    let v = &mut v_w[l][idx];
                    *v = b2 * *v + (T::one() - b2) * *g * *g;
                    let update = lr * (*m / bias1) / ((*v / bias2).sqrt() + eps);
                    model.weights[l][idx] -= update;
                }
                for (idx, g) in grad_b[l].iter().enumerate() {
                    let m = &mut m_b[l][idx];
                    *m = b1 * *m + (T::one() - b1) * *g;
                    let v = &mut v_b[l][idx];
                    *v = b2 * *v + (T::one() - b2) * *g * *g;
                    let update = lr * (*m / bias1) / ((*v / bias2).sqrt() + eps);
                    model.biases[l][idx] -= update;
                }
            }
        }

        let (epoch_loss, _, _) = model.loss_and_grad(&x_full, &y_full, None);
        if !epoch_loss.is_finite() {
            return Err(Error::Divergence {
                step: epoch,
                detail: "epoch loss became non-finite".into(),
            });
        }
        model.loss_history.push(epoch_loss.as_f64());
    }

    Ok(model)
}
