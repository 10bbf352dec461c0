use oodlab_core::analysis::{
    aggregate_summary, evaluate_regressor, factor_analysis, fit_ood_regressor, load_validation_csv,
    residual_distribution, select_model, CrossTable, Evaluation, Metric, OutlierScope, OutlierSet, Protocol,
    RegressionModel, SelectionStrategy,
};
use oodlab_core::corpus::save_image;
use oodlab_core::heatmap::heatmap_image;
use oodlab_core::linalg::Matrix;
use oodlab_core::MetricsTable64;
use serde::Serialize;

use crate::config::parse_metrics;
use crate::error::CliError;
use crate::output::{csv_text, emit, num, write_file, write_json};
use crate::{AnalyzeArgs, Context, ProtocolArg, ReportArgs, ScopeArg, SelectArgs, StrategyArg};

#[derive(Serialize)]
struct RegressionReport<'a> {
    protocol: Protocol,
    model: &'a RegressionModel<f64>,
    evaluation: &'a Evaluation<f64>,
}

pub fn analyze(ctx: &Context, args: AnalyzeArgs) -> Result<(), CliError> {
    let table = MetricsTable64::load(&args.metrics)?;
    if table.is_empty() {
        return Err(CliError::Data(format!("{}: no rows", args.metrics.display())));
    }
    let columns = match &args.columns {
        Some(c) => parse_metrics(c)?,
        None => Metric::ALL.to_vec(),
    };
    let features = ctx.config.features(args.features.as_deref())?;
    let protocol = match args.protocol {
        ProtocolArg::Lodo => Protocol::LeaveOneDomainOut,
        ProtocolArg::InSample => Protocol::InSample,
    };

    let fm = factor_analysis(&table, &columns).map_err(|e| CliError::from(e).context("factor analysis"))?;
    let model = fit_ood_regressor(&table, &features).map_err(|e| CliError::from(e).context("regression"))?;
    let eval = evaluate_regressor(&model, &table, protocol).map_err(|e| CliError::from(e).context("regression"))?;
    let buckets = residual_distribution(&eval.residuals, args.bucket_width)?;

    let dir = &args.out_dir;
    let eig = fm
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &v)| vec![(i + 1).to_string(), num(v, None), (i < fm.retained_k).to_string()]);
    write_file(
        &dir.join("eigenvalues.csv"),
        &csv_text(&["index", "eigenvalue", "retained"], eig)?,
    )?;

    let factor_names: Vec<String> = (1..=fm.retained_k).map(|k| format!("F{k}")).collect();
    let mut header = vec!["metric"];
    header.extend(factor_names.iter().map(String::as_str));
    let lr = &fm.loadings_rotated;
    let load_rows = fm.columns.iter().enumerate().map(|(i, c)| {
        std::iter::once(c.clone())
            .chain(lr.row(i).iter().map(|&v| num(v, None)))
            .collect::<Vec<_>>()
    });
    write_file(&dir.join("loadings.csv"), &csv_text(&header, load_rows)?)?;
    write_json(&dir.join("factor.json"), &fm)?;
    if args.pgm || ctx.config.pgm {
        let abs = Matrix::from_fn(lr.rows(), lr.cols(), |i, j| (lr[(i, j)].abs() * 100.0).min(100.0));
        save_image(&heatmap_image(&abs, 16), &dir.join("loadings.pgm"))?;
    }

    write_json(
        &dir.join("regression.json"),
        &RegressionReport {
            protocol,
            model: &model,
            evaluation: &eval,
        },
    )?;
    let preds = table.rows().iter().enumerate().map(|(i, r)| {
        vec![
            r.model.clone(),
            r.source.clone(),
            r.target.clone(),
            num(eval.actual[i], None),
            num(eval.predictions[i], None),
            num(eval.residuals[i], None),
        ]
    });
    write_file(
        &dir.join("predictions.csv"),
        &csv_text(&["model", "source", "target", "actual", "predicted", "residual"], preds)?,
    )?;
    let bucket_rows = buckets.iter().map(|b| {
        vec![
            num(b.lower, None),
            num(b.upper, None),
            b.count.to_string(),
            num(b.cumulative_pct, None),
        ]
    });
    write_file(
        &dir.join("residuals.csv"),
        &csv_text(&["lower", "upper", "count", "cumulative_pct"], bucket_rows)?,
    )?;

    let eig_list: Vec<String> = fm.eigenvalues.iter().map(|&v| format!("{v:.4}")).collect();
    let summary = [
        ["rows".to_string(), table.len().to_string()],
        ["eigenvalues".to_string(), eig_list.join(" ")],
        ["retained_k".to_string(), fm.retained_k.to_string()],
        ["rotation_converged".to_string(), fm.rotation_converged.to_string()],
        ["mae".to_string(), num(eval.mae, None)],
        ["mse".to_string(), num(eval.mse, None)],
        ["rank_deficient".to_string(), eval.rank_deficient.to_string()],
    ];
    emit(None, &csv_text(&["key", "value"], summary)?)
}

pub fn select(_ctx: &Context, args: SelectArgs) -> Result<(), CliError> {
    let records = load_validation_csv::<f64>(&args.validation)?;
    let d = args.domain.clone();
    let strategies = match args.strategy {
        StrategyArg::All => vec![
            SelectionStrategy::NoSelection { source: d.clone() },
            SelectionStrategy::Heldout { target: d.clone() },
            SelectionStrategy::Oracle { target: d.clone() },
        ],
        StrategyArg::NoSelection => vec![SelectionStrategy::NoSelection { source: d.clone() }],
        StrategyArg::Heldout => vec![SelectionStrategy::Heldout { target: d.clone() }],
        StrategyArg::Oracle => vec![SelectionStrategy::Oracle { target: d.clone() }],
    };
    let mut rows = Vec::new();
    for s in &strategies {
        let sel = select_model(&records, s)?;
        let name = match s {
            SelectionStrategy::NoSelection { .. } => "no-selection",
            SelectionStrategy::Heldout { .. } => "heldout",
            SelectionStrategy::Oracle { .. } => "oracle",
        };
        rows.push(vec![name.to_string(), d.clone(), sel.checkpoint, num(sel.score, None)]);
    }
    emit(
        args.out.as_deref(),
        &csv_text(&["strategy", "domain", "checkpoint", "score"], rows)?,
    )
}

fn parse_outlier(raw: &str) -> Result<(String, String), CliError> {
    match raw.split_once(':') {
        Some((m, t)) if !m.is_empty() && !t.is_empty() => Ok((m.to_string(), t.to_string())),
        _ => Err(CliError::Usage(format!("outlier {raw:?} is not MODEL:TARGET"))),
    }
}

fn load_outliers(args: &ReportArgs) -> Result<OutlierSet, CliError> {
    let mut set = OutlierSet::new();
    if let Some(path) = &args.outliers {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let headers = reader.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CliError::Data(format!("{}: missing column {name:?}", path.display())))
        };
        let (mi, ti) = (col("model")?, col("target")?);
        for rec in reader.records() {
            let rec = rec?;
            set.insert((rec[mi].to_string(), rec[ti].to_string()));
        }
    }
    for raw in &args.outlier {
        set.insert(parse_outlier(raw)?);
    }
    Ok(set)
}

pub fn report(_ctx: &Context, args: ReportArgs) -> Result<(), CliError> {
    let table = CrossTable::<f64>::load(&args.cross)?;
    if table.entries().is_empty() {
        return Err(CliError::Data(format!("{}: no rows", args.cross.display())));
    }
    let outliers = load_outliers(&args)?;
    for (m, t) in &outliers {
        if table.get(m, t, t).is_none() {
            return Err(CliError::Data(format!(
                "outlier {m}:{t} has no in-distribution entry in the table"
            )));
        }
    }
    let scope = match args.outlier_scope {
        ScopeArg::IdAndOod => OutlierScope::IdAndOod,
        ScopeArg::IdOnly => OutlierScope::IdOnly,
    };
    let summaries = aggregate_summary(&table, &outliers, scope)?;
    let dp = args.decimals;

    let detail = summaries.iter().flat_map(|s| {
        s.targets.iter().map(move |t| {
            vec![
                s.model.clone(),
                t.target.clone(),
                num(t.id_cer, dp),
                num(t.ood_cer, dp),
                num(t.gap, dp),
                t.best_source.clone(),
                t.outlier.to_string(),
            ]
        })
    });
    let summary_csv = csv_text(
        &["model", "target", "id_cer", "ood_cer", "gap", "best_source", "outlier"],
        detail,
    )?;
    let averages_csv = csv_text(
        &["model", "mean_id", "mean_ood", "mean_gap"],
        summaries.iter().map(|s| {
            vec![
                s.model.clone(),
                num(s.mean_id, dp),
                num(s.mean_ood, dp),
                num(s.mean_gap, dp),
            ]
        }),
    )?;
    let mut targets: Vec<String> = Vec::new();
    for s in &summaries {
        for t in &s.targets {
            if !targets.contains(&t.target) {
                targets.push(t.target.clone());
            }
        }
    }
    let mut header = vec!["model"];
    header.extend(targets.iter().map(String::as_str));
    let best_csv = csv_text(
        &header,
        summaries.iter().map(|s| {
            std::iter::once(s.model.clone())
                .chain(targets.iter().map(|t| {
                    s.targets
                        .iter()
                        .find(|x| &x.target == t)
                        .map_or(String::new(), |x| x.best_source.clone())
                }))
                .collect::<Vec<_>>()
        }),
    )?;

    match &args.out_dir {
        Some(dir) => {
            write_file(&dir.join("summary.csv"), &summary_csv)?;
            write_file(&dir.join("averages.csv"), &averages_csv)?;
            write_file(&dir.join("best_source.csv"), &best_csv)
        }
        None => emit(None, &format!("{summary_csv}\n{averages_csv}\n{best_csv}")),
    }
}
