use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use oodlab_core::corpus::{load_split_images, DatasetManifest, Split};
use oodlab_core::heatmap::matrix_to_csv;
use oodlab_core::linalg::Matrix;
use oodlab_core::textdiv::{divergence_matrix, TextDivergence, MAX_ORDER};
use oodlab_core::visdiv::{
    load_params, save_params, train_autoencoder, visual_divergence, AeConfig, AeParams, TrainOptions,
};
use oodlab_core::{heatmap::normalize_off_diagonal, Image32};

use super::{heatmap_path, load_domains, names, single_split, split_texts};
use crate::config::check_nmax;
use crate::error::CliError;
use crate::output::{csv_text, emit, num, save_heatmap, write_file};
use crate::{pool, AeArgs, Context, TextdivArgs, VisScoreArgs, VisTrainArgs};

pub const PARAMS_EXT: &str = "oodae";

pub fn textdiv(ctx: &Context, args: TextdivArgs) -> Result<(), CliError> {
    let domains = load_domains(&ctx.config.manifests(&args.manifests)?)?;
    let nmax = check_nmax(args.nmax.or(ctx.config.nmax).unwrap_or(MAX_ORDER))?;
    let corpora: Vec<Vec<String>> = domains.iter().map(|d| split_texts(d, args.split)).collect();
    if let Some(i) = corpora.iter().position(Vec::is_empty) {
        return Err(CliError::Data(format!(
            "domain {:?} has no transcripts in the chosen split",
            domains[i].name
        )));
    }
    let cfg = TextDivergence { nmax, alpha: 1.0 };
    let m: Matrix<f64> = divergence_matrix(&corpora, &cfg, args.normalize)?;
    emit(args.out.as_deref(), &matrix_to_csv(&names(&domains), &m))?;
    if let Some(p) = heatmap_path(args.pgm, args.out.as_deref(), ctx.config.pgm) {
        save_heatmap(&p, &m, args.normalize)?;
    }
    Ok(())
}

fn ae_config(ctx: &Context, a: &AeArgs) -> (AeConfig, TrainOptions) {
    let file = &ctx.config.autoencoder;
    let base = AeConfig::default();
    let config = AeConfig {
        input_h: a.height.or(file.height).unwrap_or(base.input_h),
        input_w: a.width.or(file.width).unwrap_or(base.input_w),
        enc_channels: a
            .channels
            .clone()
            .or_else(|| file.channels.clone())
            .unwrap_or(base.enc_channels),
        latent_dim: a.latent.or(file.latent).unwrap_or(base.latent_dim),
        leaky_slope: a.slope.or(file.slope).unwrap_or(base.leaky_slope),
        seed: ctx.seed,
    };
    let mut opts = TrainOptions::default();
    opts.epochs = a.epochs.or(file.epochs).unwrap_or(opts.epochs);
    opts.batch_size = a.batch_size.or(file.batch_size).unwrap_or(opts.batch_size);
    opts.adam.lr = a.lr.or(file.lr).unwrap_or(opts.adam.lr);
    (config, opts)
}

fn params_path(dir: &Path, domain: &str) -> PathBuf {
    dir.join(format!("{domain}.{PARAMS_EXT}"))
}

fn images(d: &DatasetManifest, split: Split, hw: (usize, usize)) -> Result<Vec<Image32>, CliError> {
    let imgs = load_split_images::<f32>(d, split, hw.0, hw.1).map_err(|e| CliError::from(e).context(&d.name))?;
    if imgs.is_empty() {
        return Err(CliError::Data(format!(
            "domain {:?} has an empty {} split",
            d.name,
            split.as_str()
        )));
    }
    Ok(imgs)
}

pub fn visdiv_train(ctx: &Context, args: VisTrainArgs) -> Result<(), CliError> {
    let domains = load_domains(&ctx.config.manifests(&args.manifests)?)?;
    let (config, opts) = ae_config(ctx, &args.ae);
    config.validate()?;
    let hw = (config.input_h, config.input_w);
    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::io(&args.out_dir, e))?;
    let rows = pool::run(ctx.jobs, &domains, |d| {
        let train = images(d, Split::Train, hw)?;
        let val = images(d, Split::Val, hw)?;
        let report = train_autoencoder(&config, &train, &val, &opts).map_err(|e| CliError::from(e).context(&d.name))?;
        save_params(&report.params, &params_path(&args.out_dir, &d.name))?;
        let log = (0..report.val_mse.len()).map(|e| {
            vec![
                e.to_string(),
                e.checked_sub(1)
                    .map_or(String::new(), |i| num(report.train_mse[i] as f64, None)),
                num(report.val_mse[e] as f64, None),
            ]
        });
        write_file(
            &args.out_dir.join(format!("{}.log.csv", d.name)),
            &csv_text(&["epoch", "train_mse", "val_mse"], log)?,
        )?;
        Ok(vec![
            d.name.clone(),
            report.best_epoch.to_string(),
            num(report.best_val_mse as f64, None),
            report.updates.to_string(),
            report.params.num_params().to_string(),
        ])
    })?;
    emit(
        None,
        &csv_text(&["domain", "best_epoch", "best_val_mse", "updates", "params"], rows)?,
    )
}

pub fn visdiv_score(ctx: &Context, args: VisScoreArgs) -> Result<(), CliError> {
    let domains = load_domains(&ctx.config.manifests(&args.manifests)?)?;
    let split = single_split(args.split)?;
    let mut params: Vec<AeParams<f32>> = Vec::with_capacity(domains.len());
    for d in &domains {
        let path = params_path(&args.params_dir, &d.name);
        if !path.exists() {
            return Err(CliError::Data(format!(
                "no trained parameters for {:?}: {} is missing (run `oodlab visdiv train` first)",
                d.name,
                path.display()
            )));
        }
        params.push(load_params(&path)?);
    }
    // Every distinct input size needs its own resized copy of the targets.
    let mut by_size: BTreeMap<(usize, usize), Vec<Vec<Image32>>> = BTreeMap::new();
    for p in &params {
        let hw = (p.config.input_h, p.config.input_w);
        if !by_size.contains_key(&hw) {
            let sets = pool::run(ctx.jobs, &domains, |d| images(d, split, hw))?;
            by_size.insert(hw, sets);
        }
    }
    let sources: Vec<usize> = (0..domains.len()).collect();
    let rows = pool::run(ctx.jobs, &sources, |&i| {
        let p = &params[i];
        let targets = &by_size[&(p.config.input_h, p.config.input_w)];
        targets
            .iter()
            .map(|t| Ok(visual_divergence(p, t)? as f64))
            .collect::<Result<Vec<f64>, CliError>>()
            .map_err(|e| e.context(&domains[i].name))
    })?;
    if let Some(v) = rows.iter().flatten().find(|v| !v.is_finite()) {
        return Err(CliError::Numerical(format!("non-finite reconstruction error {v}")));
    }
    let raw = Matrix::from_rows(&rows);
    let m = if args.normalize {
        normalize_off_diagonal(&raw)
    } else {
        raw
    };
    emit(args.out.as_deref(), &matrix_to_csv(&names(&domains), &m))?;
    if let Some(p) = heatmap_path(args.pgm, args.out.as_deref(), ctx.config.pgm) {
        save_heatmap(&p, &m, args.normalize)?;
    }
    Ok(())
}
