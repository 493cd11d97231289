use std::path::Path;

use coint_alasso::dgp::{long_run_moments, DynamicsKind, Flavor};
use coint_alasso::limitdist::{BrownianGrid, FunctionalSampler, FunctionalVariant, MixedDraw};
use coint_alasso::montecarlo::{
    compare, ecdf_ks, matched_limit_draw, run_experiment, summarize_mixed, summarize_ols, CellResult,
    MixedDistributionSummary,
};
use coint_alasso::rng::derive_seed;
use coint_alasso::{ExperimentPlan64, FunctionalSample64};

use crate::error::{CliError, Result};
use crate::io::{override_field, read_json, write_json, OutputDir};
use crate::summary::{records_file, CellSummary, CoordSummary, DistSummary};

const LIMIT_DOMAIN: u64 = 0x4c49_4d54;

pub fn run(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let (mut plan, mut raw): (ExperimentPlan64, _) = read_json(config)?;
    if let Some(s) = seed {
        plan.seed = s;
        override_field(&mut raw, "seed", s.into());
    }
    plan.validate()?;
    let cells = run_experiment(&plan)?;
    let functionals = limit_functionals(&plan)?;

    let mut dir = OutputDir::create(out)?;
    let mut summaries = Vec::with_capacity(cells.len());
    for cell in &cells {
        let label = cell.rule.label();
        let name = records_file(cell.t, &label);
        write_records(&dir.path(&name), cell)?;
        summaries.push(summarize(cell, name, functionals.as_deref())?);
    }
    write_json(&dir.path("summaries.json"), &summaries)?;
    dir.finish("simulate", raw, Some(plan.seed))
}

fn limit_functionals(plan: &ExperimentPlan64) -> Result<Option<Vec<FunctionalSample64>>> {
    let Some(draws) = plan.limit_draws else {
        return Ok(None);
    };
    if plan.model.k != 1 {
        log::warn!("matched limit laws are univariate; skipping them for k = {}", plan.model.k);
        return Ok(None);
    }
    let (omega, delta) = long_run_moments(&plan.model.errors, plan.model.flavor == Flavor::Predictive)?;
    let variant = match plan.model.dynamics.kind {
        DynamicsKind::UnitRoot => FunctionalVariant::UnitRoot,
        DynamicsKind::LocalToUnity => FunctionalVariant::Ou {
            c: plan.model.dynamics.c.clone(),
        },
    };
    let sampler = FunctionalSampler::new(&BrownianGrid::new(omega)?, &delta, variant)?;
    Ok(Some(sampler.batch(draws, derive_seed(plan.seed, LIMIT_DOMAIN))?))
}

fn write_records(path: &Path, cell: &CellResult<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Failed(format!("{other:?}")),
    })?;
    let k = cell.beta.len();
    let mut header = vec!["rep_id".to_string()];
    for j in 1..=k {
        for name in ["beta_ols", "beta_al", "active", "scaled_error_ols", "scaled_error_al"] {
            header.push(format!("{name}{j}"));
        }
    }
    w.write_record(&header)?;
    for r in &cell.records {
        let mut row = vec![r.rep_id.to_string()];
        for j in 0..k {
            row.push(r.beta_ols[j].to_string());
            row.push(r.beta_al[j].to_string());
            row.push(u8::from(r.active_set[j]).to_string());
            row.push(r.scaled_error_ols[j].to_string());
            row.push(r.scaled_error_al[j].to_string());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn summarize(cell: &CellResult<f64>, records_file: String, functionals: Option<&[FunctionalSample64]>) -> Result<CellSummary> {
    let mut coords = Vec::with_capacity(cell.beta.len());
    for j in 0..cell.beta.len() {
        let al = summarize_mixed(&cell.records, j, cell.atom_location(j))?;
        let ols = summarize_ols(&cell.records, j)?;
        let al_all: Vec<f64> = cell.records.iter().map(|r| r.scaled_error_al[j]).collect();
        let ols_all: Vec<f64> = cell.records.iter().map(|r| r.scaled_error_ols[j]).collect();
        let (limit, limit_comparison) = match functionals {
            Some(fs) => {
                let draws = fs
                    .iter()
                    .map(|f| matched_limit_draw(cell.scaling, cell.lambda, &cell.finite_params, f))
                    .collect::<coint_alasso::Result<Vec<MixedDraw<f64>>>>()?;
                let summary = MixedDistributionSummary::from_draws(&draws, cell.atom_location(j))?;
                (Some(DistSummary::from(&summary)), Some(compare(&al, &draws)?))
            }
            None => (None, None),
        };
        coords.push(CoordSummary {
            coord: j + 1,
            al: DistSummary::from(&al),
            ols: DistSummary::from(&ols),
            limit,
            limit_comparison,
            ks_al_ols: ecdf_ks(&al_all, &ols_all),
        });
    }
    Ok(CellSummary {
        t: cell.t,
        rule: cell.rule.label(),
        tuning: cell.rule.clone(),
        lambda: cell.lambda,
        scaling: cell.scaling,
        seed: cell.seed,
        beta: cell.beta.clone(),
        records_file,
        coords,
    })
}
