use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::GrayImage;
use crate::scalar::Scalar;

use super::model::{ae_backward, visual_divergence, AeConfig, AeParams};
use super::VisDivError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub hyper: AdamConfig,
    pub step: u64,
    /// Moment accumulators, one per parameter tensor.
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &AeParams<T>, hyper: AdamConfig) -> Self {
        let zeros: Vec<Vec<T>> = params.tensors().iter().map(|t| vec![T::zero(); t.len()]).collect();
        Self {
            hyper,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }
}

/// One bias-corrected Adam update. Nothing is modified if any gradient
/// entry is non-finite.
pub fn adam_step<T: Scalar>(
    params: &mut AeParams<T>,
    grads: &AeParams<T>,
    state: &mut AdamState<T>,
) -> Result<(), VisDivError> {
    let gts = grads.tensors();
    if gts.len() != state.m.len() || gts.iter().zip(&state.m).any(|(g, m)| g.len() != m.len()) {
        return Err(VisDivError::GradientShape);
    }
    for (ti, g) in gts.iter().enumerate() {
        if let Some(i) = g.iter().position(|v| !v.is_finite()) {
            return Err(VisDivError::NonFiniteGradient {
                tensor: grads.tensor_names()[ti].clone(),
                index: i,
                value: g[i].as_f64(),
            });
        }
    }
    state.step += 1;
    let h = state.hyper;
    let (b1, b2) = (T::lit(h.beta1), T::lit(h.beta2));
    let c1 = T::one() - T::lit(h.beta1.powf(state.step as f64));
    let c2 = T::one() - T::lit(h.beta2.powf(state.step as f64));
    let (lr, eps) = (T::lit(h.lr), T::lit(h.eps));
    for (((p, g), m), v) in params
        .tensors_mut()
        .into_iter()
        .zip(gts)
        .zip(&mut state.m)
        .zip(&mut state.v)
    {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (T::one() - b1) * g[i];
            v[i] = b2 * v[i] + (T::one() - b2) * g[i] * g[i];
            let mh = m[i] / c1;
            let vh = v[i] / c2;
            p[i] -= lr * mh / (vh.sqrt() + eps);
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 8,
            adam: AdamConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainReport<T> {
    /// Snapshot with the lowest validation MSE.
    pub params: AeParams<T>,
    /// 0 means the initialisation was never beaten.
    pub best_epoch: usize,
    pub best_val_mse: T,
    /// Mean batch loss per epoch.
    pub train_mse: Vec<T>,
    /// Validation MSE at initialisation and after each epoch.
    pub val_mse: Vec<T>,
    pub updates: u64,
}

/// Mini-batch Adam on the training images, keeping the best-on-validation
/// snapshot. Fully determined by `config.seed` and the data.
pub fn train_autoencoder<T: Scalar>(
    config: &AeConfig,
    train: &[GrayImage<T>],
    val: &[GrayImage<T>],
    opts: &TrainOptions,
) -> Result<TrainReport<T>, VisDivError> {
    if train.is_empty() || val.is_empty() {
        return Err(VisDivError::EmptySet);
    }
    if opts.batch_size == 0 {
        return Err(VisDivError::InvalidConfig("batch_size must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = AeParams::init_with(config, &mut rng)?;
    let mut adam = AdamState::new(&params, opts.adam);

    let initial = visual_divergence(&params, val)?;
    if !initial.is_finite() {
        return Err(VisDivError::Diverged { epoch: 0 });
    }
    let mut best = (params.clone(), 0, initial);
    let mut val_mse = vec![initial];
    let mut train_mse = Vec::with_capacity(opts.epochs);
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=opts.epochs {
        order.shuffle(&mut rng);
        let mut total = T::zero();
        let mut batches = 0usize;
        for chunk in order.chunks(opts.batch_size) {
            let batch: Vec<GrayImage<T>> = chunk.iter().map(|&i| train[i].clone()).collect();
            let (grads, loss) = ae_backward(&params, &batch)?;
            if !loss.is_finite() {
                return Err(VisDivError::Diverged { epoch });
            }
            adam_step(&mut params, &grads, &mut adam)?;
            total += loss;
            batches += 1;
        }
        train_mse.push(total / T::from_count(batches));
        let v = visual_divergence(&params, val)?;
        if !v.is_finite() {
            return Err(VisDivError::Diverged { epoch });
        }
        val_mse.push(v);
        if v < best.2 {
            best = (params.clone(), epoch, v);
        }
    }

    Ok(TrainReport {
        params: best.0,
        best_epoch: best.1,
        best_val_mse: best.2,
        train_mse,
        val_mse,
        updates: adam.step,
    })
}
