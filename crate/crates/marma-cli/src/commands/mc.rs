use marma::estimation::FitOptions;
use marma::simulation::{mc_coverage, mc_goodness_of_fit, mc_point_estimation, McReport};
use serde::Serialize;

use crate::cli::McArgs;
use crate::config::{load_json, McConfig, StudyConfig};
use crate::report::{sig6, write_json, Meta, Table};
use crate::AppError;

#[derive(Serialize)]
struct McFileReport {
    study: StudyConfig,
    report: McReport,
    meta: Meta,
}

pub fn run(args: McArgs) -> Result<(), AppError> {
    let (config, bytes) = load_json::<McConfig>(&args.config)?;
    let mut scenario = config.scenario.to_scenario()?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let options = FitOptions::default();

    let report = match &config.study {
        StudyConfig::Point => mc_point_estimation(&scenario, &options)?,
        StudyConfig::Gof => mc_goodness_of_fit(&scenario, &options)?,
        StudyConfig::Coverage { horizon, boot, levels } => {
            mc_coverage(&scenario, &options, *horizon, *boot, levels)?
        }
    };

    let meta = Meta::new(&bytes, Some(scenario.seed));
    println!(
        "replicas: {} converged, {} not converged, {} failed (of {})",
        report.n_converged, report.n_not_converged, report.n_error, report.n_replicas
    );

    if let Some(est) = &report.estimates {
        let mut table = Table::new(&["parameter", "true", "mean", "median", "sd"]);
        for s in &est.converged {
            table.row(vec![
                s.name.clone(),
                sig6(s.true_value),
                sig6(s.mean),
                sig6(s.median),
                sig6(s.sd),
            ]);
        }
        table.print();

        // Table-1-style CSV (converged block)
        let csv_path = args.out.with_extension("csv");
        let mut writer = csv::Writer::from_path(&csv_path)
            .map_err(|e| AppError::Io(format!("{}: {e}", csv_path.display())))?;
        writer
            .write_record(["parameter", "true", "mean", "median", "sd"])
            .map_err(|e| AppError::Io(e.to_string()))?;
        for s in &est.converged {
            writer
                .write_record([
                    s.name.clone(),
                    format!("{}", s.true_value),
                    format!("{}", s.mean),
                    format!("{}", s.median),
                    format!("{}", s.sd),
                ])
                .map_err(|e| AppError::Io(e.to_string()))?;
        }
        writer.flush().map_err(|e| AppError::Io(e.to_string()))?;
    }

    if let Some(gof) = &report.gof {
        println!(
            "rejection rates at level {}: KS {}, AD {} (n = {})",
            sig6(gof.level),
            sig6(gof.ks_rejection_rate),
            sig6(gof.ad_rejection_rate),
            gof.n_used
        );
    }

    if let Some(cov) = &report.coverage {
        for lc in &cov.levels {
            let cells: Vec<String> = lc.per_horizon.iter().map(|&c| sig6(c)).collect();
            println!(
                "coverage at nominal {}: [{}]{}",
                sig6(1.0 - lc.level),
                cells.join(", "),
                if lc.conservative { " (conservative)" } else { "" }
            );
        }
    }

    write_json(
        &args.out.with_extension("json"),
        &McFileReport { study: config.study, report, meta },
    )?;
    Ok(())
}
