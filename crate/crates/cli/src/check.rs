use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use coint_alasso::dgp::{CoefficientPath, ModelConfig};
use coint_alasso::estimators::{
    adaptive_lasso_multivariate, adaptive_lasso_univariate, default_tolerance, finite_sample_decomposition,
    kkt_energy_check, Dataset, TuningParams,
};
use coint_alasso::limitdist::{
    sample_limit_conservative, sample_limit_consistent, sample_limit_consistent_rate_t, sample_limit_multivariate,
    BrownianGrid, FunctionalSampler, FunctionalVariant, LimitMode, LimitOutcome, LimitParams, MixedDraw,
};
use coint_alasso::montecarlo::{run_cell, summarize_mixed, ExperimentPlan, Scaling};
use coint_alasso::{ExtendedReal, FunctionalSample64, Matrix, TuningRule};

use crate::error::{CliError, Result};

type Ext = ExtendedReal<f64>;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

type Check = fn(u64, &[FunctionalSample64]) -> coint_alasso::Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("closed form matches coordinate descent", closed_form_vs_cd),
    ("KKT residual and energy bound", kkt_and_energy),
    ("finite-sample decomposition", decomposition),
    ("conservative selection probability", conservative_probability),
    ("consistent selection probability", consistent_probability),
    ("mean of Z under exogeneity", mean_of_z),
    ("mean of zeta", mean_of_zeta),
    ("argmin reduces to closed forms", argmin_reduction),
    ("mixed mass conservation", mass_conservation),
    ("replications are reproducible", reproducible),
];

pub fn run(seed: u64, draws: usize, steps: usize) -> Result<()> {
    let grid = BrownianGrid::standard(1).with_steps(steps);
    let sampler = FunctionalSampler::new(&grid, &[0.0], FunctionalVariant::UnitRoot)?;
    let functionals = sampler.batch(draws, seed)?;
    let mut outcomes = Vec::new();
    for (name, check) in CHECKS {
        let (pass, detail) = match check(seed, &functionals) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        outcomes.push(Outcome { name, pass, detail });
    }
    let width = CHECKS.iter().map(|c| c.0.len()).max().unwrap_or(0);
    println!("{:<width$}  result  detail", "check");
    for o in &outcomes {
        println!("{:<width$}  {:<6}  {}", o.name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} checks failed", outcomes.len())));
    }
    Ok(())
}

fn random_data(rng: &mut ChaCha8Rng, n: usize, k: usize) -> coint_alasso::Result<Dataset<f64>> {
    let mut x = Matrix::zeros(n, k);
    let mut level = vec![0.0; k];
    for t in 0..n {
        for j in 0..k {
            level[j] += rng.sample::<f64, _>(StandardNormal);
            x[(t, j)] = level[j];
        }
    }
    let beta: Vec<f64> = (0..k).map(|_| rng.random_range(-0.1..0.1)).collect();
    let y = (0..n)
        .map(|t| x.row(t).iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + rng.sample::<f64, _>(StandardNormal))
        .collect();
    Dataset::new(y, x)
}

fn closed_form_vs_cd(seed: u64, _: &[FunctionalSample64]) -> coint_alasso::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = random_data(&mut rng, 100, 1)?;
        let lambda = rng.random_range(0.0..50.0);
        let a = adaptive_lasso_univariate(&d, lambda)?;
        let b = adaptive_lasso_multivariate(&d, &TuningParams::new(lambda), default_tolerance(&d), 10_000)?;
        worst = worst.max((a.beta_al[0] - b.beta_al[0]).abs() / a.beta_ols[0].abs().max(1e-300));
    }
    Ok((worst <= 1e-10, format!("max relative gap {worst:.1e}")))
}

fn kkt_and_energy(seed: u64, _: &[FunctionalSample64]) -> coint_alasso::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
    let (mut worst_kkt, mut violations) = (0.0f64, 0);
    for _ in 0..200 {
        let d = random_data(&mut rng, 100, 3)?;
        let tuning = TuningParams::new(rng.random_range(0.0..50.0));
        let tol = default_tolerance(&d);
        let fit = adaptive_lasso_multivariate(&d, &tuning, tol, 100_000)?;
        worst_kkt = worst_kkt.max(fit.kkt_residual / tol);
        let (lhs, bound) = kkt_energy_check(&d, &fit, &tuning)?;
        if lhs > bound * (1.0 + 1e-9) + 1e-12 {
            violations += 1;
        }
    }
    Ok((
        worst_kkt <= 1.0 && violations == 0,
        format!("max KKT/tol {worst_kkt:.2}, {violations} energy violations"),
    ))
}

fn decomposition(seed: u64, _: &[FunctionalSample64]) -> coint_alasso::Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let beta = rng.random_range(-0.1..0.1);
        let mut level = 0.0;
        let x: Vec<f64> = (0..200)
            .map(|_| {
                level += rng.sample::<f64, _>(StandardNormal);
                level
            })
            .collect();
        let y = x.iter().map(|x| beta * x + rng.sample::<f64, _>(StandardNormal)).collect();
        let d = Dataset::univariate(y, x)?;
        let dec = finite_sample_decomposition(&d, beta, rng.random_range(0.1..50.0))?;
        worst = worst.max(dec.relative_error);
    }
    Ok((worst < 1e-10, format!("max relative error {worst:.1e}")))
}

fn atom_share(draws: &[MixedDraw<f64>]) -> (f64, f64) {
    let n = draws.len() as f64;
    let p = draws.iter().filter(|d| d.atom).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

fn conservative_probability(_: u64, fs: &[FunctionalSample64]) -> coint_alasso::Result<(bool, String)> {
    let draws = fs
        .iter()
        .map(|f| sample_limit_conservative(1.0, Ext::Finite(1.0), f))
        .collect::<coint_alasso::Result<Vec<_>>>()?;
    let (p, se) = atom_share(&draws);
    Ok(((p - 0.43).abs() < 0.02 + 3.0 * se, format!("p = {p:.4} (s.e. {se:.4}), expected about 0.43")))
}

fn consistent_probability(_: u64, fs: &[FunctionalSample64]) -> coint_alasso::Result<(bool, String)> {
    let draws = fs
        .iter()
        .map(|f| sample_limit_consistent(Ext::Finite(1.0), f))
        .collect::<coint_alasso::Result<Vec<_>>>()?;
    let (p, se) = atom_share(&draws);
    Ok(((p - 0.68).abs() < 0.02 + 3.0 * se, format!("p = {p:.4} (s.e. {se:.4}), expected about 0.68")))
}

fn mean_se(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = v.collect();
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn mean_of_z(_: u64, fs: &[FunctionalSample64]) -> coint_alasso::Result<(bool, String)> {
    let (m, se) = mean_se(fs.iter().map(|f| f.z[0]));
    Ok((m.abs() <= 3.0 * se, format!("{m:.4} (s.e. {se:.4})")))
}

fn mean_of_zeta(_: u64, fs: &[FunctionalSample64]) -> coint_alasso::Result<(bool, String)> {
    let (m, se) = mean_se(fs.iter().map(|f| f.zeta_vv[(0, 0)]));
    Ok(((m - 0.5).abs() <= 3.0 * se + 1e-3, format!("{m:.4} (s.e. {se:.4})")))
}

fn argmin_reduction(_: u64, fs: &[FunctionalSample64]) -> coint_alasso::Result<(bool, String)> {
    let inf = Ext::PlusInf;
    let v = LimitParams::conservative(1.0, vec![Ext::Finite(0.5)], vec![0.0]);
    let vt = LimitParams::consistent(vec![inf], vec![Ext::Finite(0.8)], vec![Ext::zero()], vec![0.0]);
    let vb = LimitParams::consistent(vec![inf], vec![inf], vec![Ext::Finite(1.5)], vec![0.0]);
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for f in fs.iter().take(1000) {
        let pairs = [
            (LimitMode::V, &v, sample_limit_conservative(1.0, Ext::Finite(0.5), f)?),
            (LimitMode::Vtilde, &vt, sample_limit_consistent(Ext::Finite(0.8), f)?),
            (
                LimitMode::Vbar,
                &vb,
                match sample_limit_consistent_rate_t(inf, inf, Ext::Finite(1.5), f)? {
                    LimitOutcome::Draw(d) => d,
                    LimitOutcome::Escape(_) => unreachable!("finite bar_beta0 never escapes"),
                },
            ),
        ];
        for (mode, params, closed) in pairs {
            let arg = sample_limit_multivariate(mode, params, f, 1e-12)?;
            if arg.at_kink[0] != closed.atom {
                mismatches += 1;
            }
            worst = worst.max((arg.z[0] - closed.value).abs() / closed.value.abs().max(1.0));
        }
    }
    Ok((
        mismatches == 0 && worst < 1e-8,
        format!("{mismatches} atom mismatches, max gap {worst:.1e}"),
    ))
}

fn small_plan(seed: u64) -> coint_alasso::Result<ExperimentPlan<f64>> {
    Ok(ExperimentPlan {
        model: ModelConfig::standard(CoefficientPath::power_law(vec![1.0], 1.0))?,
        sample_sizes: vec![100],
        tuning_rules: vec![TuningRule::Const { lambda0: 1.0 }],
        scaling: Scaling::ByT,
        replications: 1000,
        seed,
        limit_draws: None,
    })
}

fn mass_conservation(seed: u64, _: &[FunctionalSample64]) -> coint_alasso::Result<(bool, String)> {
    let plan = small_plan(seed)?;
    let cell = run_cell(&plan, 100, &plan.tuning_rules[0])?;
    let summary = summarize_mixed(&cell.records, 0, cell.atom_location(0))?;
    let mass = summary.total_mass();
    Ok(((mass - 1.0).abs() <= 1e-3, format!("p + integral = {mass:.5}")))
}

fn reproducible(seed: u64, _: &[FunctionalSample64]) -> coint_alasso::Result<(bool, String)> {
    let plan = small_plan(seed)?;
    let a = run_cell(&plan, 100, &plan.tuning_rules[0])?;
    let b = run_cell(&plan, 100, &plan.tuning_rules[0])?;
    Ok((a == b, format!("{} replications compared", a.records.len())))
}
