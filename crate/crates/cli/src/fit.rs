use std::path::Path;

use coint_alasso::estimators::{adaptive_lasso_multivariate, adaptive_lasso_univariate, default_tolerance, Dataset, TuningParams};
use coint_alasso::Matrix;

use crate::error::{CliError, Result};
use crate::io::write_json;

pub struct FitArgs<'a> {
    pub data: &'a Path,
    pub lambda: f64,
    pub gamma: f64,
    /// Pair `y_t` with `x_{t-1}` (predictive regression).
    pub lag: bool,
    pub max_iter: usize,
    pub out: Option<&'a Path>,
}

pub fn run(args: &FitArgs) -> Result<()> {
    let data = read_dataset(args.data, args.lag)?;
    let tuning = TuningParams {
        gamma: args.gamma,
        ..TuningParams::new(args.lambda)
    };
    let fit = if data.k() == 1 && args.gamma == 1.0 {
        adaptive_lasso_univariate(&data, args.lambda)?
    } else {
        adaptive_lasso_multivariate(&data, &tuning, default_tolerance(&data), args.max_iter)?
    };
    match args.out {
        Some(path) => write_json(path, &fit),
        None => {
            println!("{}", serde_json::to_string_pretty(&fit).map_err(|e| CliError::Failed(e.to_string()))?);
            Ok(())
        }
    }
}

/// Reads column `y` and every column whose name starts with `x`. Rows with an
/// empty `y` are skipped.
fn read_dataset(path: &Path, lag: bool) -> Result<Dataset<f64>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Failed(format!("{other:?}")),
    })?;
    let headers = r.headers()?.clone();
    let iy = headers
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| CliError::Config(format!("{}: no column named y", path.display())))?;
    let ix: Vec<usize> = (0..headers.len()).filter(|&i| headers[i].starts_with('x')).collect();
    if ix.is_empty() {
        return Err(CliError::Config(format!("{}: no regressor columns (x...)", path.display())));
    }
    let parse = |s: &str, line: usize| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{}: line {line}: bad number {s:?}", path.display())))
    };
    let mut ys: Vec<Option<f64>> = Vec::new();
    let mut xs: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let y = rec[iy].trim();
        ys.push(if y.is_empty() { None } else { Some(parse(y, line)?) });
        xs.push(ix.iter().map(|&j| parse(&rec[j], line)).collect::<Result<_>>()?);
    }
    let mut y = Vec::new();
    let mut rows = Vec::new();
    for t in 0..ys.len() {
        let xrow = if lag {
            match t.checked_sub(1) {
                Some(s) => &xs[s],
                None => continue,
            }
        } else {
            &xs[t]
        };
        if let Some(v) = ys[t] {
            y.push(v);
            rows.push(xrow.clone());
        }
    }
    if rows.is_empty() {
        return Err(CliError::Config(format!("{}: no usable rows", path.display())));
    }
    Ok(Dataset::new(y, Matrix::from_rows(rows)?)?)
}
