use oodlab_core::corpus::{resize_image, GrayImage};
use oodlab_core::synthgen::{render_line, BitmapFont, StyleParams};
use oodlab_core::visdiv::{
    adam_step, ae_backward, ae_forward, ae_loss, train_autoencoder, visual_divergence, AdamConfig, AdamState, AeConfig,
    AeParams, TrainOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tiny() -> AeConfig {
    AeConfig {
        input_h: 8,
        input_w: 8,
        enc_channels: vec![1, 2],
        latent_dim: 4,
        leaky_slope: 0.01,
        seed: 17,
    }
}

fn random_images(n: usize, h: usize, w: usize, seed: u64) -> Vec<GrayImage<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| GrayImage::new(h, w, (0..h * w).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap())
        .collect()
}

fn batch_loss(p: &AeParams<f64>, batch: &[GrayImage<f64>]) -> f64 {
    let recon = ae_forward(p, batch).unwrap();
    recon
        .iter()
        .zip(batch)
        .map(|(r, x)| ae_loss(r, x).unwrap())
        .sum::<f64>()
        / batch.len() as f64
}

/// Largest relative error between analytic and central-difference gradients.
fn max_gradient_error(cfg: &AeConfig, batch: &[GrayImage<f64>]) -> f64 {
    let p = AeParams::<f64>::init(cfg).unwrap();
    let (grads, _) = ae_backward(&p, batch).unwrap();
    let analytic: Vec<f64> = grads.tensors().concat();
    let h = 1e-4;
    let mut worst = 0.0f64;
    let mut flat = 0;
    for t in 0..p.tensors().len() {
        for i in 0..p.tensors()[t].len() {
            let mut plus = p.clone();
            plus.tensors_mut()[t][i] += h;
            let mut minus = p.clone();
            minus.tensors_mut()[t][i] -= h;
            let numeric = (batch_loss(&plus, batch) - batch_loss(&minus, batch)) / (2.0 * h);
            let a = analytic[flat];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
            flat += 1;
        }
    }
    worst
}

#[test]
fn gradients_match_finite_differences() {
    let batch = random_images(2, 8, 8, 1);
    let err = max_gradient_error(&tiny(), &batch);
    assert!(err < 1e-3, "max relative error {err}");
}

#[test]
fn gradients_match_with_two_stages() {
    let cfg = AeConfig {
        input_h: 8,
        input_w: 16,
        enc_channels: vec![1, 2, 3],
        latent_dim: 3,
        leaky_slope: 0.01,
        seed: 5,
    };
    let batch = random_images(1, 8, 16, 2);
    let err = max_gradient_error(&cfg, &batch);
    assert!(err < 1e-3, "max relative error {err}");
}

#[test]
fn outputs_stay_inside_the_unit_interval() {
    let p = AeParams::<f64>::init(&AeConfig {
        input_h: 16,
        input_w: 32,
        ..tiny()
    })
    .unwrap();
    for img in ae_forward(&p, &random_images(3, 16, 32, 3)).unwrap() {
        assert!(img.pixels().iter().all(|&v| v > 0.0 && v < 1.0));
    }
}

/// A rendered line with paper-tone contrast (ink 0.1, background 0.9).
fn text_image(h: usize, w: usize) -> GrayImage<f32> {
    let style = StyleParams {
        scale: 2.0,
        height: 16,
        ..StyleParams::default()
    };
    let img: GrayImage<f32> = render_line("Quiet ox", &BitmapFont::builtin(), &style).unwrap();
    let img = resize_image(&img, h, w).unwrap();
    GrayImage::new(h, w, img.pixels().iter().map(|v| 0.1 + 0.8 * v).collect()).unwrap()
}

#[test]
fn overfits_a_single_line() {
    let cfg = AeConfig {
        input_h: 16,
        input_w: 64,
        enc_channels: vec![1, 8],
        latent_dim: 16,
        leaky_slope: 0.01,
        seed: 42,
    };
    let img = text_image(16, 64);
    let mut p = AeParams::<f32>::init(&cfg).unwrap();
    let mut adam = AdamState::new(&p, AdamConfig::default());
    let mut loss = f32::INFINITY;
    let mut steps = 0;
    while steps < 2000 && loss >= 1e-3 {
        let (g, l) = ae_backward(&p, std::slice::from_ref(&img)).unwrap();
        adam_step(&mut p, &g, &mut adam).unwrap();
        loss = l;
        steps += 1;
    }
    let final_loss = visual_divergence(&p, std::slice::from_ref(&img)).unwrap();
    assert!(final_loss < 1e-3, "loss {final_loss} after {steps} steps");
}

#[test]
fn best_snapshot_never_worse_than_any_epoch() {
    let cfg = AeConfig {
        input_h: 8,
        input_w: 16,
        enc_channels: vec![1, 4],
        latent_dim: 8,
        leaky_slope: 0.01,
        seed: 8,
    };
    let train: Vec<GrayImage<f32>> = random_images(12, 8, 16, 4).iter().map(|i| i.cast()).collect();
    let val: Vec<GrayImage<f32>> = random_images(4, 8, 16, 5).iter().map(|i| i.cast()).collect();
    let opts = TrainOptions {
        epochs: 8,
        batch_size: 4,
        ..TrainOptions::default()
    };
    let r = train_autoencoder(&cfg, &train, &val, &opts).unwrap();
    assert_eq!(r.val_mse.len(), 9);
    assert!(r.val_mse.iter().all(|&v| r.best_val_mse <= v));
    let again = train_autoencoder(&cfg, &train, &val, &opts).unwrap();
    assert_eq!(r.params, again.params);
}
