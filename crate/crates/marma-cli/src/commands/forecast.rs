use marma::forecast::{bootstrap_intervals, predict, ForecastResult};
use marma::simulation::CovariateRule;
use serde::Serialize;

use crate::cli::ForecastArgs;
use crate::dataset::{read_dataset, read_future_covariates};
use crate::model_file::ModelFile;
use crate::report::{write_json, Meta};
use crate::AppError;

#[derive(Serialize)]
struct ForecastReport {
    horizon: usize,
    level: Option<f64>,
    n_paths: usize,
    steps: Vec<StepReport>,
    boot_clamp_count: usize,
    meta: Meta,
}

#[derive(Serialize)]
struct StepReport {
    step: usize,
    point: f64,
    lower: Option<f64>,
    upper: Option<f64>,
}

pub fn run(args: ForecastArgs) -> Result<(), AppError> {
    let model = ModelFile::load(&args.model)?;
    let fitted = model.to_fit()?;

    // data columns named in the model come from the dataset; trailing
    // harmonic columns are regenerated from the row index
    let n_data_cols = model.covariate_names.len() - model.harmonics.len();
    let data_cols: Vec<String> = model.covariate_names[..n_data_cols].to_vec();
    let harmonic_specs: Vec<String> = model
        .harmonics
        .iter()
        .map(|h| {
            let kind = match h.kind {
                marma::simulation::HarmonicKind::Sin => "sin",
                marma::simulation::HarmonicKind::Cos => "cos",
            };
            format!("{kind}:{}", h.period)
        })
        .collect();
    let dataset = read_dataset(&args.data.data, &args.data.y_col, &data_cols, &harmonic_specs)?;
    if dataset.series.n_covariates() != fitted.spec.r {
        return Err(AppError::Validation(format!(
            "dataset provides {} covariates, model needs {}",
            dataset.series.n_covariates(),
            fitted.spec.r
        )));
    }

    // future covariates: explicit file for data columns, harmonic rule
    // extension for generated ones
    let n = dataset.series.n();
    let new_x: Vec<Vec<f64>> = if fitted.spec.r == 0 {
        vec![]
    } else if n_data_cols > 0 {
        let mut rows = match &args.new_x {
            Some(path) => read_future_covariates(path, &data_cols, args.horizon)?,
            None => {
                return Err(AppError::Validation(
                    "model uses dataset covariates; supply --new-x with future rows".into(),
                ))
            }
        };
        if !model.harmonics.is_empty() {
            let rule = CovariateRule::Harmonics(model.harmonics.clone());
            for (k, row) in rows.iter_mut().take(args.horizon).enumerate() {
                row.extend(rule.row((n + k + 1) as i64));
            }
        }
        rows
    } else {
        let rule = CovariateRule::Harmonics(model.harmonics.clone());
        (0..args.horizon).map(|k| rule.row((n + k + 1) as i64)).collect()
    };

    let fc: ForecastResult = if args.boot == 0 {
        predict(&fitted, &dataset.series, &new_x, args.horizon)?
    } else {
        bootstrap_intervals(
            &fitted,
            &dataset.series,
            &new_x,
            args.horizon,
            args.boot,
            args.level,
            args.seed,
        )?
    };

    let desc = format!(
        "forecast model={} data={} horizon={} boot={} level={} seed={}",
        args.model.display(),
        args.data.data.display(),
        args.horizon,
        args.boot,
        args.level,
        args.seed
    );
    let meta = Meta::new(desc.as_bytes(), Some(args.seed));

    let steps: Vec<StepReport> = (0..fc.horizon)
        .map(|k| StepReport {
            step: k + 1,
            point: fc.point[k],
            lower: fc.intervals.as_ref().map(|iv| iv[k].0),
            upper: fc.intervals.as_ref().map(|iv| iv[k].1),
        })
        .collect();

    // CSV: step, point, lower, upper
    let csv_path = args.out.with_extension("csv");
    let mut writer = csv::Writer::from_path(&csv_path)
        .map_err(|e| AppError::Io(format!("{}: {e}", csv_path.display())))?;
    writer
        .write_record(["step", "point", "lower", "upper"])
        .map_err(|e| AppError::Io(e.to_string()))?;
    for s in &steps {
        writer
            .write_record([
                s.step.to_string(),
                format!("{}", s.point),
                s.lower.map(|v| format!("{v}")).unwrap_or_default(),
                s.upper.map(|v| format!("{v}")).unwrap_or_default(),
            ])
            .map_err(|e| AppError::Io(e.to_string()))?;
    }
    writer.flush().map_err(|e| AppError::Io(e.to_string()))?;

    let report = ForecastReport {
        horizon: fc.horizon,
        level: fc.level,
        n_paths: args.boot,
        steps,
        boot_clamp_count: fc.boot_clamp_count,
        meta,
    };
    write_json(&args.out.with_extension("json"), &report)?;

    println!(
        "wrote {} and {}",
        csv_path.display(),
        args.out.with_extension("json").display()
    );
    Ok(())
}
