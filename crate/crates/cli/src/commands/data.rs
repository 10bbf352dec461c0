use std::collections::BTreeSet;

use oodlab_core::corpus::{build_alphabet, load_image, Split};
use oodlab_core::errmetrics::{corpus_cer, corpus_wer, ece, load_predictions};
use oodlab_core::synthgen::{generate_lines, make_domain, BitmapFont, Language, StyleParams};

use super::load_domains;
use crate::error::CliError;
use crate::output::{csv_text, emit, num, write_file};
use crate::{Context, EvalArgs, IngestArgs, SynthArgs};

const DEFAULT_ECE_BINS: usize = 15;

pub fn ingest(ctx: &Context, args: IngestArgs) -> Result<(), CliError> {
    let paths = ctx.config.manifests(&args.manifests)?;
    let domains = load_domains(&paths)?;
    let mut rows = Vec::new();
    for d in &domains {
        let mut images = 0usize;
        if !args.no_images {
            for split in Split::ALL {
                for s in d.split(split) {
                    load_image::<f32>(&d.image_path(s)).map_err(|e| CliError::from(e).context(&d.name))?;
                    images += 1;
                }
            }
        }
        let chars: BTreeSet<char> = d.all_texts().flat_map(str::chars).collect();
        rows.push(vec![
            d.name.clone(),
            d.language.clone(),
            d.split_len(Split::Train).to_string(),
            d.split_len(Split::Val).to_string(),
            d.split_len(Split::Test).to_string(),
            images.to_string(),
            chars.len().to_string(),
        ]);
    }
    if let Some(path) = &args.alphabet {
        let alphabet = build_alphabet(&domains)?;
        let symbols: Vec<String> = alphabet.symbols().iter().map(char::to_string).collect();
        let json = serde_json::to_string(&symbols).map_err(|e| CliError::Data(e.to_string()))?;
        write_file(path, &(json + "\n"))?;
    }
    let header = ["name", "language", "train", "val", "test", "images", "distinct_chars"];
    emit(args.out.as_deref(), &csv_text(&header, rows)?)
}

pub fn synth(ctx: &Context, args: SynthArgs) -> Result<(), CliError> {
    let language: Language = args.lang.parse()?;
    let lines = match &args.text {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .map(str::to_string)
                .collect()
        }
        None => generate_lines(language, args.lines, ctx.seed),
    };
    let style = StyleParams {
        scale: args.scale,
        slant: args.slant,
        ink: args.ink,
        noise_sigma: args.noise,
        baseline_jitter: args.jitter,
        seed: ctx.seed,
        height: args.height,
        margin: args.margin,
    };
    let m = make_domain(
        &lines,
        &BitmapFont::builtin(),
        &style,
        &args.out,
        &args.name,
        language.code(),
    )?;
    let row = vec![
        m.name.clone(),
        m.language.clone(),
        m.split_len(Split::Train).to_string(),
        m.split_len(Split::Val).to_string(),
        m.split_len(Split::Test).to_string(),
    ];
    emit(None, &csv_text(&["name", "language", "train", "val", "test"], [row])?)
}

pub fn eval(ctx: &Context, args: EvalArgs) -> Result<(), CliError> {
    let records = load_predictions::<f64>(&args.predictions)?;
    let mut rows = vec![
        vec!["cer".to_string(), num(corpus_cer(&records)?, None)],
        vec!["wer".to_string(), num(corpus_wer(&records)?, None)],
    ];
    if args.ece {
        let bins = args.bins.or(ctx.config.ece_bins).unwrap_or(DEFAULT_ECE_BINS);
        rows.push(vec!["ece".to_string(), num(ece(&records, bins)?, None)]);
    }
    emit(args.out.as_deref(), &csv_text(&["metric", "value"], rows)?)
}
