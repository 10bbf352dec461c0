use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::GrayImage;
use crate::scalar::Scalar;

use super::layers::{
    conv3x3, conv3x3_backward, deconv3x3, deconv3x3_backward, dense, dense_backward, leaky, leaky_backward, maxpool2,
    maxpool2_backward, sigmoid,
};
use super::VisDivError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AeConfig {
    pub input_h: usize,
    pub input_w: usize,
    /// Channel count entering each conv stage plus the last stage's output;
    /// starts with 1 (grayscale).
    pub enc_channels: Vec<usize>,
    pub latent_dim: usize,
    pub leaky_slope: f64,
    pub seed: u64,
}

impl Default for AeConfig {
    /// Desk-scale network: 32×256 input, two conv stages, 64-d latent.
    fn default() -> Self {
        Self {
            input_h: 32,
            input_w: 256,
            enc_channels: vec![1, 8, 16],
            latent_dim: 64,
            leaky_slope: 0.01,
            seed: 42,
        }
    }
}

impl AeConfig {
    /// Full-size network: 64×1024 input, four stages up to 128 channels,
    /// 512-d latent (about 33M parameters).
    pub fn full_scale() -> Self {
        Self {
            input_h: 64,
            input_w: 1024,
            enc_channels: vec![1, 16, 32, 64, 128],
            latent_dim: 512,
            ..Self::default()
        }
    }

    pub fn stages(&self) -> usize {
        self.enc_channels.len().saturating_sub(1)
    }

    /// Spatial size after the encoder's pooling.
    pub fn bottleneck_hw(&self) -> (usize, usize) {
        let f = 1 << self.stages();
        (self.input_h / f, self.input_w / f)
    }

    pub fn flat_dim(&self) -> usize {
        let (h, w) = self.bottleneck_hw();
        self.enc_channels.last().copied().unwrap_or(1) * h * w
    }

    pub fn validate(&self) -> Result<(), VisDivError> {
        let bad = |reason: String| Err(VisDivError::InvalidConfig(reason));
        if self.enc_channels.first() != Some(&1) {
            return bad("enc_channels must start with 1".into());
        }
        if self.enc_channels.iter().any(|&c| c == 0) {
            return bad("channel counts must be positive".into());
        }
        if self.stages() > 16 {
            return bad("too many conv stages".into());
        }
        let f = 1usize << self.stages();
        if self.input_h == 0 || self.input_w == 0 || self.input_h % f != 0 || self.input_w % f != 0 {
            return bad(format!(
                "input {}x{} is not divisible by {f}",
                self.input_h, self.input_w
            ));
        }
        if self.latent_dim == 0 {
            return bad("latent_dim must be at least 1".into());
        }
        if !(self.leaky_slope.is_finite() && self.leaky_slope >= 0.0) {
            return bad(format!("leaky_slope {} is invalid", self.leaky_slope));
        }
        Ok(())
    }
}

/// One weight tensor and its bias.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer<T> {
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Layer<T> {
    fn zeros(weights: usize, biases: usize) -> Self {
        Self {
            weight: vec![T::zero(); weights],
            bias: vec![T::zero(); biases],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AeParams<T> {
    pub config: AeConfig,
    /// Stage `s` maps `enc_channels[s] → enc_channels[s+1]`.
    pub enc_conv: Vec<Layer<T>>,
    pub enc_fc: Layer<T>,
    pub dec_fc: Layer<T>,
    /// In application order: the first maps the deepest channel count back
    /// one stage, the last produces the single output channel.
    pub dec_deconv: Vec<Layer<T>>,
}

impl<T: Scalar> AeParams<T> {
    pub fn zeros(config: &AeConfig) -> Result<Self, VisDivError> {
        config.validate()?;
        let ch = &config.enc_channels;
        let s = config.stages();
        let flat = config.flat_dim();
        Ok(Self {
            config: config.clone(),
            enc_conv: (0..s).map(|i| Layer::zeros(ch[i + 1] * ch[i] * 9, ch[i + 1])).collect(),
            enc_fc: Layer::zeros(config.latent_dim * flat, config.latent_dim),
            dec_fc: Layer::zeros(flat * config.latent_dim, flat),
            dec_deconv: (0..s)
                .rev()
                .map(|i| Layer::zeros(ch[i + 1] * ch[i] * 9, ch[i]))
                .collect(),
        })
    }

    /// He-uniform weights (`±sqrt(6 / fan_in)`) from the config seed, zero
    /// biases.
    pub fn init(config: &AeConfig) -> Result<Self, VisDivError> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self::init_with(config, &mut rng)
    }

    pub(crate) fn init_with(config: &AeConfig, rng: &mut ChaCha8Rng) -> Result<Self, VisDivError> {
        let mut p = Self::zeros(config)?;
        let ch = config.enc_channels.clone();
        let s = config.stages();
        let mut fill = |w: &mut [T], fan_in: usize| {
            let bound = (6.0 / fan_in as f64).sqrt();
            for v in w {
                *v = T::lit(rng.random_range(-bound..bound));
            }
        };
        for (i, l) in p.enc_conv.iter_mut().enumerate() {
            fill(&mut l.weight, ch[i] * 9);
        }
        fill(&mut p.enc_fc.weight, config.flat_dim());
        fill(&mut p.dec_fc.weight, config.latent_dim);
        for (j, l) in p.dec_deconv.iter_mut().enumerate() {
            fill(&mut l.weight, ch[s - j] * 9);
        }
        Ok(p)
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.config).expect("config was validated on construction")
    }

    /// Parameter tensors in serialisation order.
    pub fn tensors(&self) -> Vec<&[T]> {
        let mut out: Vec<&[T]> = Vec::new();
        for l in self.layers() {
            out.push(&l.weight);
            out.push(&l.bias);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::new();
        for l in self.layers_mut() {
            out.push(&mut l.weight);
            out.push(&mut l.bias);
        }
        out
    }

    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        let mut push = |layer: String| {
            names.push(format!("{layer}.weight"));
            names.push(format!("{layer}.bias"));
        };
        for i in 0..self.enc_conv.len() {
            push(format!("enc_conv{i}"));
        }
        push("enc_fc".into());
        push("dec_fc".into());
        for i in 0..self.dec_deconv.len() {
            push(format!("dec_deconv{i}"));
        }
        names
    }

    fn layers(&self) -> impl Iterator<Item = &Layer<T>> {
        self.enc_conv
            .iter()
            .chain([&self.enc_fc, &self.dec_fc])
            .chain(self.dec_deconv.iter())
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut Layer<T>> {
        self.enc_conv
            .iter_mut()
            .chain([&mut self.enc_fc, &mut self.dec_fc])
            .chain(self.dec_deconv.iter_mut())
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn cast<U: Scalar>(&self) -> AeParams<U> {
        let cast_layer = |l: &Layer<T>| Layer {
            weight: l.weight.iter().map(|v| U::lit(v.as_f64())).collect(),
            bias: l.bias.iter().map(|v| U::lit(v.as_f64())).collect(),
        };
        AeParams {
            config: self.config.clone(),
            enc_conv: self.enc_conv.iter().map(cast_layer).collect(),
            enc_fc: cast_layer(&self.enc_fc),
            dec_fc: cast_layer(&self.dec_fc),
            dec_deconv: self.dec_deconv.iter().map(cast_layer).collect(),
        }
    }
}

/// Activations kept for the backward pass.
struct Trace<T> {
    /// Input to each encoder conv.
    enc_in: Vec<Vec<T>>,
    /// Pre-activation of each encoder conv.
    enc_pre: Vec<Vec<T>>,
    pool_arg: Vec<Vec<usize>>,
    flat: Vec<T>,
    latent: Vec<T>,
    dec_fc_pre: Vec<T>,
    /// Input to each decoder deconv.
    dec_in: Vec<Vec<T>>,
    dec_pre: Vec<Vec<T>>,
    output: Vec<T>,
}

fn check_shape<T: Scalar>(cfg: &AeConfig, img: &GrayImage<T>) -> Result<(), VisDivError> {
    if img.dims() != (cfg.input_h, cfg.input_w) {
        return Err(VisDivError::ShapeMismatch {
            expected: (cfg.input_h, cfg.input_w),
            got: img.dims(),
        });
    }
    Ok(())
}

fn forward_trace<T: Scalar>(p: &AeParams<T>, x: &[T]) -> Trace<T> {
    let cfg = &p.config;
    let slope = T::lit(cfg.leaky_slope);
    let ch = &cfg.enc_channels;
    let s = cfg.stages();
    let (mut h, mut w) = (cfg.input_h, cfg.input_w);
    let mut t = Trace {
        enc_in: Vec::with_capacity(s),
        enc_pre: Vec::with_capacity(s),
        pool_arg: Vec::with_capacity(s),
        flat: Vec::new(),
        latent: Vec::new(),
        dec_fc_pre: Vec::new(),
        dec_in: Vec::with_capacity(s),
        dec_pre: Vec::with_capacity(s),
        output: Vec::new(),
    };

    let mut cur = x.to_vec();
    for (i, l) in p.enc_conv.iter().enumerate() {
        let pre = conv3x3(&cur, ch[i], h, w, &l.weight, &l.bias, ch[i + 1]);
        let act = leaky(&pre, slope);
        let (pooled, arg) = maxpool2(&act, ch[i + 1], h, w);
        t.enc_in.push(std::mem::replace(&mut cur, pooled));
        t.enc_pre.push(pre);
        t.pool_arg.push(arg);
        h /= 2;
        w /= 2;
    }
    t.latent = dense(&cur, &p.enc_fc.weight, &p.enc_fc.bias);
    t.flat = cur;
    t.dec_fc_pre = dense(&t.latent, &p.dec_fc.weight, &p.dec_fc.bias);
    if s == 0 {
        t.output = t.dec_fc_pre.iter().map(|&v| sigmoid(v)).collect();
        return t;
    }
    cur = leaky(&t.dec_fc_pre, slope);
    for (j, l) in p.dec_deconv.iter().enumerate() {
        let (cin, cout) = (ch[s - j], ch[s - j - 1]);
        let pre = deconv3x3(&cur, cin, h, w, &l.weight, &l.bias, cout);
        h *= 2;
        w *= 2;
        let next = if j + 1 == s {
            pre.iter().map(|&v| sigmoid(v)).collect()
        } else {
            leaky(&pre, slope)
        };
        t.dec_in.push(std::mem::replace(&mut cur, next));
        t.dec_pre.push(pre);
    }
    t.output = cur;
    t
}

/// Accumulates `∂L/∂θ` into `grads` given `∂L/∂output`.
fn backward_trace<T: Scalar>(p: &AeParams<T>, t: &Trace<T>, mut g: Vec<T>, grads: &mut AeParams<T>) {
    let cfg = &p.config;
    let slope = T::lit(cfg.leaky_slope);
    let ch = &cfg.enc_channels;
    let s = cfg.stages();

    // through the output sigmoid
    for (d, &y) in g.iter_mut().zip(&t.output) {
        *d *= y * (T::one() - y);
    }
    let (bh, bw) = cfg.bottleneck_hw();
    for j in (0..s).rev() {
        let (cin, cout) = (ch[s - j], ch[s - j - 1]);
        let (h, w) = (bh << j, bw << j);
        if j + 1 != s {
            leaky_backward(&mut g, &t.dec_pre[j], slope);
        }
        let gl = &mut grads.dec_deconv[j];
        g = deconv3x3_backward(
            &t.dec_in[j],
            cin,
            h,
            w,
            &p.dec_deconv[j].weight,
            cout,
            &g,
            &mut gl.weight,
            &mut gl.bias,
        );
    }
    if s > 0 {
        leaky_backward(&mut g, &t.dec_fc_pre, slope);
    }
    let g_latent = dense_backward(
        &t.latent,
        &p.dec_fc.weight,
        &g,
        &mut grads.dec_fc.weight,
        &mut grads.dec_fc.bias,
        true,
    )
    .expect("requested");
    let want_flat = s > 0;
    let g_flat = dense_backward(
        &t.flat,
        &p.enc_fc.weight,
        &g_latent,
        &mut grads.enc_fc.weight,
        &mut grads.enc_fc.bias,
        want_flat,
    );
    let Some(mut g) = g_flat else { return };
    for i in (0..s).rev() {
        let (h, w) = (cfg.input_h >> i, cfg.input_w >> i);
        let mut ga = maxpool2_backward(&g, &t.pool_arg[i], ch[i + 1] * h * w);
        leaky_backward(&mut ga, &t.enc_pre[i], slope);
        let gl = &mut grads.enc_conv[i];
        match conv3x3_backward(
            &t.enc_in[i],
            ch[i],
            h,
            w,
            &p.enc_conv[i].weight,
            ch[i + 1],
            &ga,
            &mut gl.weight,
            &mut gl.bias,
            i > 0,
        ) {
            Some(next) => g = next,
            None => break,
        }
    }
}

/// Reconstructs each image.
pub fn ae_forward<T: Scalar>(params: &AeParams<T>, batch: &[GrayImage<T>]) -> Result<Vec<GrayImage<T>>, VisDivError> {
    let cfg = &params.config;
    batch
        .iter()
        .map(|img| {
            check_shape(cfg, img)?;
            let out = forward_trace(params, img.pixels()).output;
            Ok(GrayImage::new(cfg.input_h, cfg.input_w, out).expect("shape matches config"))
        })
        .collect()
}

/// Mean squared pixel difference.
pub fn ae_loss<T: Scalar>(recon: &GrayImage<T>, input: &GrayImage<T>) -> Result<T, VisDivError> {
    if recon.dims() != input.dims() {
        return Err(VisDivError::ShapeMismatch {
            expected: input.dims(),
            got: recon.dims(),
        });
    }
    let n = recon.pixels().len();
    if n == 0 {
        return Ok(T::zero());
    }
    let sum: T = recon
        .pixels()
        .iter()
        .zip(input.pixels())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok(sum / T::from_count(n))
}

/// Gradient of the batch-mean reconstruction loss, and that loss.
pub fn ae_backward<T: Scalar>(params: &AeParams<T>, batch: &[GrayImage<T>]) -> Result<(AeParams<T>, T), VisDivError> {
    if batch.is_empty() {
        return Err(VisDivError::EmptySet);
    }
    let cfg = &params.config;
    let mut grads = params.zeros_like();
    let npix = T::from_count(cfg.input_h * cfg.input_w);
    let nb = T::from_count(batch.len());
    let scale = T::lit(2.0) / (npix * nb);
    let mut loss = T::zero();
    for img in batch {
        check_shape(cfg, img)?;
        let x = img.pixels();
        let t = forward_trace(params, x);
        let mut sq = T::zero();
        let g: Vec<T> = t
            .output
            .iter()
            .zip(x)
            .map(|(&y, &v)| {
                sq += (y - v) * (y - v);
                scale * (y - v)
            })
            .collect();
        loss += sq / (npix * nb);
        backward_trace(params, &t, g, &mut grads);
    }
    Ok((grads, loss))
}

/// Mean per-image reconstruction MSE of `images` under `params`.
pub fn visual_divergence<T: Scalar>(params: &AeParams<T>, images: &[GrayImage<T>]) -> Result<T, VisDivError> {
    if images.is_empty() {
        return Err(VisDivError::EmptySet);
    }
    let recon = ae_forward(params, images)?;
    let mut total = T::zero();
    for (r, x) in recon.iter().zip(images) {
        total += ae_loss(r, x)?;
    }
    Ok(total / T::from_count(images.len()))
}
