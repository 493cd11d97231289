use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use coint_alasso::limitdist::{
    sample_limit_conservative, sample_limit_consistent, sample_limit_consistent_rate_t, sample_limit_multivariate,
    BrownianGrid, FunctionalSampler, FunctionalVariant, LimitMode, LimitOutcome, LimitParams, SelectionEstimate,
    DEFAULT_STEPS,
};
use coint_alasso::rng::stream_rng;
use coint_alasso::{ExtendedReal64, Matrix64};

use crate::error::{CliError, Result};
use crate::io::{override_field, read_json, write_json, OutputDir};

const DRAW_DOMAIN: u64 = 0x4452_4157;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LimitSpec {
    Conservative {
        lambda0: f64,
        beta0: ExtendedReal64,
    },
    Consistent {
        tilde_beta0: ExtendedReal64,
    },
    ConsistentRateT {
        beta0: ExtendedReal64,
        tilde_beta0: ExtendedReal64,
        bar_beta0: ExtendedReal64,
    },
    Multivariate {
        limit_mode: LimitMode,
        params: LimitParams<f64>,
    },
}

fn default_draws() -> usize {
    10_000
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

fn default_tol() -> f64 {
    1e-12
}

#[derive(Clone, Debug, Deserialize)]
pub struct LimitConfig {
    #[serde(flatten)]
    pub spec: LimitSpec,
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    /// Long-run covariance of `(u, v')`; identity when absent.
    #[serde(default)]
    pub omega: Option<Matrix64>,
    /// Univariate modes only; the multivariate mode reads it from `params`.
    #[serde(default)]
    pub delta_vu: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize)]
struct CoordSelection {
    coord: usize,
    #[serde(flatten)]
    estimate: SelectionEstimate,
}

#[derive(Clone, Debug, Serialize)]
struct LimitSummary {
    mode: String,
    k: usize,
    draws: usize,
    steps: usize,
    seed: u64,
    ols_equivalent: bool,
    selection: Vec<CoordSelection>,
    /// Fractions of draws escaping to +∞ and −∞ (rate-T consistent mode).
    escape: Option<[f64; 2]>,
}

struct Row {
    atoms: Vec<bool>,
    values: Vec<f64>,
}

pub fn run(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let (mut cfg, mut raw): (LimitConfig, _) = read_json(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
        override_field(&mut raw, "seed", s.into());
    }
    if cfg.draws == 0 {
        return Err(CliError::Config("draws must be at least 1".into()));
    }
    let k = match &cfg.spec {
        LimitSpec::Multivariate { limit_mode, params } => {
            params.validate(*limit_mode)?;
            if cfg.delta_vu.is_some() {
                return Err(CliError::Config(
                    "multivariate mode takes delta_vu inside params, not at the top level".into(),
                ));
            }
            params.k()
        }
        _ => 1,
    };
    let delta = match &cfg.spec {
        LimitSpec::Multivariate { params, .. } => params.delta_vu.clone(),
        _ => cfg.delta_vu.clone().unwrap_or_else(|| vec![0.0; k]),
    };
    let grid = match &cfg.omega {
        Some(omega) => BrownianGrid::new(omega.clone())?,
        None => BrownianGrid::standard(k),
    }
    .with_steps(cfg.steps);
    if grid.k() != k {
        return Err(CliError::Config(format!("omega is {0}x{0}, expected {1}x{1}", grid.dim(), k + 1)));
    }
    let sampler = FunctionalSampler::new(&grid, &delta, FunctionalVariant::UnitRoot)?;

    let rows = (0..cfg.draws as u64)
        .into_par_iter()
        .map(|i| {
            let fs = sampler.draw(&mut stream_rng(cfg.seed, DRAW_DOMAIN, i))?;
            draw_row(&cfg, &fs).map_err(|e| e.context(format!("draw {i}")))
        })
        .collect::<coint_alasso::Result<Vec<Row>>>()?;

    let mut dir = OutputDir::create(out)?;
    write_draws(&dir.path("limit_draws.csv"), &rows, k)?;
    let summary = summarize(&cfg, &rows, k);
    write_json(&dir.path("limit_summary.json"), &summary)?;
    dir.finish("limit", raw, Some(cfg.seed))
}

fn draw_row(cfg: &LimitConfig, fs: &coint_alasso::FunctionalSample64) -> coint_alasso::Result<Row> {
    let single = |atom: bool, value: f64| Row {
        atoms: vec![atom],
        values: vec![value],
    };
    Ok(match &cfg.spec {
        LimitSpec::Conservative { lambda0, beta0 } => {
            let d = sample_limit_conservative(*lambda0, *beta0, fs)?;
            single(d.atom, d.value)
        }
        LimitSpec::Consistent { tilde_beta0 } => {
            let d = sample_limit_consistent(*tilde_beta0, fs)?;
            single(d.atom, d.value)
        }
        LimitSpec::ConsistentRateT {
            beta0,
            tilde_beta0,
            bar_beta0,
        } => match sample_limit_consistent_rate_t(*beta0, *tilde_beta0, *bar_beta0, fs)? {
            LimitOutcome::Draw(d) => single(d.atom, d.value),
            LimitOutcome::Escape(s) => single(false, f64::from(s) * f64::INFINITY),
        },
        LimitSpec::Multivariate { limit_mode, params } => {
            let d = sample_limit_multivariate(*limit_mode, params, fs, cfg.tol)?;
            Row {
                atoms: d.at_kink,
                values: d.z,
            }
        }
    })
}

fn write_draws(path: &Path, rows: &[Row], k: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Failed(format!("{other:?}")),
    })?;
    let mut header = vec!["draw_id".to_string(), "atom".to_string()];
    header.extend((1..=k).map(|j| format!("value{j}")));
    w.write_record(&header)?;
    for (i, row) in rows.iter().enumerate() {
        let atom = row
            .atoms
            .iter()
            .map(|&a| u8::from(a).to_string())
            .collect::<Vec<_>>()
            .join(";");
        let mut rec = vec![i.to_string(), atom];
        rec.extend(row.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn ols_equivalent(spec: &LimitSpec) -> bool {
    match spec {
        LimitSpec::Conservative { lambda0, beta0 } => *lambda0 == 0.0 || beta0.is_infinite(),
        LimitSpec::Multivariate {
            limit_mode: LimitMode::V,
            params,
        } => params.lambda0.is_zero() || params.beta0.iter().all(|b| b.is_infinite()),
        _ => false,
    }
}

fn summarize(cfg: &LimitConfig, rows: &[Row], k: usize) -> LimitSummary {
    let n = rows.len();
    let selection = (0..k)
        .map(|j| CoordSelection {
            coord: j + 1,
            estimate: SelectionEstimate::from_count(rows.iter().filter(|r| r.atoms[j]).count(), n),
        })
        .collect();
    let escape = matches!(cfg.spec, LimitSpec::ConsistentRateT { .. }).then(|| {
        let frac = |s: f64| rows.iter().filter(|r| r.values[0] == s).count() as f64 / n as f64;
        [frac(f64::INFINITY), frac(f64::NEG_INFINITY)]
    });
    let mode = match &cfg.spec {
        LimitSpec::Conservative { .. } => "conservative".to_string(),
        LimitSpec::Consistent { .. } => "consistent".to_string(),
        LimitSpec::ConsistentRateT { .. } => "consistent_rate_t".to_string(),
        LimitSpec::Multivariate { limit_mode, .. } => format!("multivariate_{limit_mode:?}").to_lowercase(),
    };
    LimitSummary {
        mode,
        k,
        draws: n,
        steps: cfg.steps,
        seed: cfg.seed,
        ols_equivalent: ols_equivalent(&cfg.spec),
        selection,
        escape,
    }
}
