use marma::diagnostics::{ad_normality, confint, ks_normality, residual_acf, residuals};
use serde::Serialize;

use crate::cli::DiagnoseArgs;
use crate::dataset::read_dataset;
use crate::model_file::ModelFile;
use crate::report::{sig6, write_json, Meta};
use crate::AppError;

#[derive(Serialize)]
struct DiagnoseReport {
    n_obs: usize,
    simple_mean: f64,
    quantile_mean: f64,
    quantile_sd: f64,
    ks: TestReport,
    ad: TestReport,
    acf: Vec<f64>,
    acf_band: f64,
    confint_95: Option<Vec<ParamInterval>>,
    cdf_clamp_count: usize,
    meta: Meta,
}

#[derive(Serialize)]
struct TestReport {
    statistic: f64,
    p_value: f64,
}

#[derive(Serialize)]
struct ParamInterval {
    name: String,
    lower: f64,
    upper: f64,
}

pub fn run(args: DiagnoseArgs) -> Result<(), AppError> {
    let model = ModelFile::load(&args.model)?;
    let fitted = model.to_fit()?;

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

    let res = residuals(&fitted, &dataset.series).map_err(AppError::from)?;
    let ks = ks_normality(&res.quantile).map_err(AppError::from)?;
    let ad = ad_normality(&res.quantile).map_err(AppError::from)?;
    let n = res.quantile.len();
    let max_lag = args.max_lag.unwrap_or_else(|| 20.min(n / 2 - 1));
    let acf = residual_acf(&res.quantile, max_lag).map_err(AppError::from)?;

    let confint_95 = match confint(&fitted, 0.05) {
        Ok(intervals) => Some(
            fitted
                .spec
                .param_names()
                .into_iter()
                .zip(intervals)
                .map(|(name, (lower, upper))| ParamInterval { name, lower, upper })
                .collect(),
        ),
        Err(_) => None,
    };

    let qm = res.quantile.iter().sum::<f64>() / n as f64;
    let qsd = (res.quantile.iter().map(|v| (v - qm).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    let desc = format!("diagnose model={} data={}", args.model.display(), args.data.data.display());
    let report = DiagnoseReport {
        n_obs: n,
        simple_mean: res.simple.iter().sum::<f64>() / n as f64,
        quantile_mean: qm,
        quantile_sd: qsd,
        ks: TestReport { statistic: ks.statistic, p_value: ks.p_value },
        ad: TestReport { statistic: ad.statistic, p_value: ad.p_value },
        acf: acf.values,
        acf_band: acf.band,
        confint_95,
        cdf_clamp_count: res.cdf_clamp_count,
        meta: Meta::new(desc.as_bytes(), None),
    };

    println!(
        "quantile residuals: mean {}, sd {}, KS p = {}, AD p = {}",
        sig6(report.quantile_mean),
        sig6(report.quantile_sd),
        sig6(report.ks.p_value),
        sig6(report.ad.p_value)
    );
    write_json(&args.out, &report)?;
    Ok(())
}
