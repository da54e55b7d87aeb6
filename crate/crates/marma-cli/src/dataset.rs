//! CSV dataset ingestion and emission.
//!
//! One dialect: comma separator, dot decimal, UTF-8, header mandatory.
//! Observations must lie strictly inside (0,1); missing or malformed values
//! are rejected with their (1-based) data row number.

use std::path::Path;

use marma::model::SeriesData;
use marma::simulation::{CovariateRule, Harmonic, HarmonicKind};

use crate::AppError;

pub struct Dataset {
    pub series: SeriesData,
    /// Covariate column names as used (data columns first, then harmonics).
    pub covariate_names: Vec<String>,
    /// Harmonic rule used to generate trailing covariate columns, if any.
    pub harmonics: Vec<Harmonic>,
}

/// Parses "sin:12" / "cos:12" terms.
pub fn parse_harmonics(specs: &[String]) -> Result<Vec<Harmonic>, AppError> {
    specs
        .iter()
        .map(|s| {
            let (kind, period) = s
                .split_once(':')
                .ok_or_else(|| AppError::Validation(format!("bad harmonic '{s}', want kind:period")))?;
            let kind = match kind.trim().to_ascii_lowercase().as_str() {
                "sin" => HarmonicKind::Sin,
                "cos" => HarmonicKind::Cos,
                other => {
                    return Err(AppError::Validation(format!(
                        "bad harmonic kind '{other}' (want sin or cos)"
                    )))
                }
            };
            let period: f64 = period
                .trim()
                .parse()
                .map_err(|_| AppError::Validation(format!("bad harmonic period in '{s}'")))?;
            if !(period > 0.0) {
                return Err(AppError::Validation(format!("harmonic period must be positive in '{s}'")));
            }
            Ok(Harmonic { kind, period })
        })
        .collect()
}

pub fn read_dataset(
    path: &Path,
    y_col: &str,
    x_cols: &[String],
    harmonic_specs: &[String],
) -> Result<Dataset, AppError> {
    let harmonics = parse_harmonics(harmonic_specs)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?
        .clone();

    let col_index = |name: &str| -> Result<usize, AppError> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            AppError::Validation(format!("column '{name}' not found in {}", path.display()))
        })
    };
    let y_idx = col_index(y_col)?;
    let x_idx: Vec<usize> = x_cols
        .iter()
        .map(|c| col_index(c))
        .collect::<Result<_, _>>()?;

    let mut y = Vec::new();
    let mut x_data: Vec<Vec<f64>> = vec![Vec::new(); x_idx.len()];
    for (row_0, record) in reader.records().enumerate() {
        let row = row_0 + 1; // 1-based data row for messages
        let record = record.map_err(|e| AppError::Io(format!("row {row}: {e}")))?;
        let parse = |idx: usize, what: &str| -> Result<f64, AppError> {
            let raw = record.get(idx).unwrap_or("").trim();
            if raw.is_empty() || raw.eq_ignore_ascii_case("na") || raw.eq_ignore_ascii_case("nan") {
                return Err(AppError::Validation(format!("missing {what} on row {row}")));
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| AppError::Validation(format!("bad {what} '{raw}' on row {row}")))?;
            if !v.is_finite() {
                return Err(AppError::Validation(format!("non-finite {what} on row {row}")));
            }
            Ok(v)
        };
        let yv = parse(y_idx, "observation")?;
        if !(yv > 0.0 && yv < 1.0) {
            return Err(AppError::Validation(format!(
                "observation {yv} on row {row} is not strictly inside (0,1)"
            )));
        }
        y.push(yv);
        for (l, &idx) in x_idx.iter().enumerate() {
            x_data[l].push(parse(idx, &format!("covariate '{}'", x_cols[l]))?);
        }
    }
    if y.is_empty() {
        return Err(AppError::Validation(format!("{} holds no data rows", path.display())));
    }

    // harmonic columns generated from the 1-based row index
    let n = y.len();
    let mut names = x_cols.to_vec();
    if !harmonics.is_empty() {
        let rule = CovariateRule::Harmonics(harmonics.clone());
        for (j, col) in rule.columns(1, n).into_iter().enumerate() {
            x_data.push(col);
            let h = &harmonics[j];
            let kind = match h.kind {
                HarmonicKind::Sin => "sin",
                HarmonicKind::Cos => "cos",
            };
            names.push(format!("{kind}{}", h.period));
        }
    }

    let series = SeriesData::new(y, x_data).map_err(AppError::from)?;
    Ok(Dataset { series, covariate_names: names, harmonics })
}

/// Reads future covariate rows (the model's covariate columns, in order).
pub fn read_future_covariates(
    path: &Path,
    x_cols: &[String],
    horizon: usize,
) -> Result<Vec<Vec<f64>>, AppError> {
    let ds = read_dataset_covariates_only(path, x_cols)?;
    if ds.len() < horizon {
        return Err(AppError::Validation(format!(
            "need {horizon} future covariate rows, {} has {}",
            path.display(),
            ds.len()
        )));
    }
    Ok(ds)
}

fn read_dataset_covariates_only(path: &Path, x_cols: &[String]) -> Result<Vec<Vec<f64>>, AppError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?
        .clone();
    let x_idx: Vec<usize> = x_cols
        .iter()
        .map(|c| {
            headers.iter().position(|h| h == c).ok_or_else(|| {
                AppError::Validation(format!("column '{c}' not found in {}", path.display()))
            })
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for (row_0, record) in reader.records().enumerate() {
        let row = row_0 + 1;
        let record = record.map_err(|e| AppError::Io(format!("row {row}: {e}")))?;
        let mut vals = Vec::with_capacity(x_idx.len());
        for (&idx, name) in x_idx.iter().zip(x_cols) {
            let raw = record.get(idx).unwrap_or("").trim();
            let v: f64 = raw.parse().map_err(|_| {
                AppError::Validation(format!("bad covariate '{name}' value '{raw}' on row {row}"))
            })?;
            vals.push(v);
        }
        rows.push(vals);
    }
    Ok(rows)
}

/// Writes a dataset as t,y,x1..xr with full-precision values.
pub fn write_dataset(
    path: &Path,
    series: &SeriesData,
    covariate_names: &[String],
) -> Result<(), AppError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    let mut header = vec!["t".to_string(), "y".to_string()];
    header.extend(covariate_names.iter().cloned());
    writer
        .write_record(&header)
        .map_err(|e| AppError::Io(e.to_string()))?;
    for t in 0..series.n() {
        let mut record = vec![(t + 1).to_string(), format!("{}", series.y()[t])];
        for v in series.covariate_row(t) {
            record.push(format!("{v}"));
        }
        writer
            .write_record(&record)
            .map_err(|e| AppError::Io(e.to_string()))?;
    }
    writer.flush().map_err(|e| AppError::Io(e.to_string()))?;
    Ok(())
}
