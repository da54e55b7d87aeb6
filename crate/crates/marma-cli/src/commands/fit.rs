use marma::diagnostics::{ad_normality, ks_normality, residuals, wald_test};
use marma::estimation::{fit, FitOptions};
use marma::link::Link;
use marma::model::ModelSpec;
use serde::Serialize;

use crate::cli::FitArgs;
use crate::dataset::read_dataset;
use crate::model_file::ModelFile;
use crate::report::{sig6, write_json, Meta, Table};
use crate::AppError;

#[derive(Serialize)]
struct FitReport {
    model: ModelSpec,
    n_obs: usize,
    converged: bool,
    loglik: f64,
    score_sup_norm: f64,
    n_evals: usize,
    clamp_count: usize,
    parameters: Vec<ParamReport>,
    ic: marma::estimation::InfoCriteria,
    residual_diagnostics: Option<ResidualSummary>,
    meta: Meta,
}

#[derive(Serialize)]
struct ParamReport {
    name: String,
    estimate: f64,
    stderr: Option<f64>,
    /// Wald z and two-sided p-value for H0: parameter = 0.
    z: Option<f64>,
    p_value: Option<f64>,
}

#[derive(Serialize)]
struct ResidualSummary {
    simple_mean: f64,
    ks_statistic: f64,
    ks_p_value: f64,
    ad_statistic: f64,
    ad_p_value: f64,
    cdf_clamp_count: usize,
}

pub fn parse_order(order: &str) -> Result<(usize, usize), AppError> {
    let parts: Vec<&str> = order.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(AppError::Validation(format!("bad --order '{order}', want \"p,q\"")));
    }
    let p = parts[0]
        .parse()
        .map_err(|_| AppError::Validation(format!("bad AR order '{}'", parts[0])))?;
    let q = parts[1]
        .parse()
        .map_err(|_| AppError::Validation(format!("bad MA order '{}'", parts[1])))?;
    Ok((p, q))
}

pub fn run(args: FitArgs) -> Result<(), AppError> {
    let (p, q) = parse_order(&args.order)?;
    let link: Link = args
        .link
        .parse()
        .map_err(|e: marma::Error| AppError::Validation(e.to_string()))?;
    let dataset = read_dataset(
        &args.data.data,
        &args.data.y_col,
        &args.data.x_cols,
        &args.data.harmonics,
    )?;
    let spec = ModelSpec::new(p, q, dataset.series.n_covariates(), link);
    let options = FitOptions {
        max_evals: args.max_evals,
        grad_tol: args.grad_tol,
        ..FitOptions::default()
    };
    let fitted = fit(&dataset.series, &spec, &options)?;

    let names = spec.param_names();
    let mut parameters = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        let (stderr, z, p_value) = match &fitted.stderr {
            Some(se) => {
                let w = wald_test(&fitted, j, 0.0).map_err(AppError::from)?;
                (Some(se[j]), Some(w.z), Some(w.p_value))
            }
            None => (None, None, None),
        };
        parameters.push(ParamReport {
            name: name.clone(),
            estimate: fitted.gamma_hat.to_vec()[j],
            stderr,
            z,
            p_value,
        });
    }

    let residual_diagnostics = if fitted.converged {
        let res = residuals(&fitted, &dataset.series).map_err(AppError::from)?;
        let ks = ks_normality(&res.quantile).map_err(AppError::from)?;
        let ad = ad_normality(&res.quantile).map_err(AppError::from)?;
        Some(ResidualSummary {
            simple_mean: res.simple.iter().sum::<f64>() / res.simple.len() as f64,
            ks_statistic: ks.statistic,
            ks_p_value: ks.p_value,
            ad_statistic: ad.statistic,
            ad_p_value: ad.p_value,
            cdf_clamp_count: res.cdf_clamp_count,
        })
    } else {
        None
    };

    // the fit is a pure function of the dataset and flags; hash a canonical
    // description of both
    let desc = format!(
        "fit data={} y={} x={:?} harmonics={:?} order={p},{q} link={link} max_evals={} grad_tol={}",
        args.data.data.display(),
        args.data.y_col,
        args.data.x_cols,
        args.data.harmonics,
        args.max_evals,
        args.grad_tol,
    );
    let meta = Meta::new(desc.as_bytes(), None);

    let report = FitReport {
        model: spec,
        n_obs: fitted.n_obs,
        converged: fitted.converged,
        loglik: fitted.loglik,
        score_sup_norm: fitted.score_sup_norm,
        n_evals: fitted.n_evals,
        clamp_count: fitted.clamp_count,
        parameters,
        ic: fitted.ic,
        residual_diagnostics,
        meta: meta.clone(),
    };

    // human-readable table
    println!(
        "MARMA({p},{q}) [{}], n = {}, log-likelihood = {}",
        link,
        fitted.n_obs,
        sig6(fitted.loglik)
    );
    let mut table = Table::new(&["parameter", "estimate", "stderr", "z", "p"]);
    for pr in &report.parameters {
        table.row(vec![
            pr.name.clone(),
            sig6(pr.estimate),
            pr.stderr.map(sig6).unwrap_or_else(|| "-".into()),
            pr.z.map(sig6).unwrap_or_else(|| "-".into()),
            pr.p_value.map(sig6).unwrap_or_else(|| "-".into()),
        ]);
    }
    table.print();
    println!(
        "AIC = {}  BIC = {}  HQC = {}",
        sig6(fitted.ic.aic),
        sig6(fitted.ic.bic),
        sig6(fitted.ic.hqc)
    );
    if let Some(rd) = &report.residual_diagnostics {
        println!(
            "residuals: mean(simple) = {}, KS p = {}, AD p = {}",
            sig6(rd.simple_mean),
            sig6(rd.ks_p_value),
            sig6(rd.ad_p_value)
        );
    }
    if fitted.stderr.is_none() {
        println!("warning: conditional information is numerically singular; no standard errors");
    }

    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    if let Some(path) = &args.save_model {
        ModelFile::from_fit(&fitted, &dataset.covariate_names, &dataset.harmonics, meta)
            .save(path)?;
    }

    if !fitted.converged {
        return Err(AppError::NonConvergence(format!(
            "optimizer did not reach grad_tol (score sup-norm {})",
            fitted.score_sup_norm
        )));
    }
    Ok(())
}
