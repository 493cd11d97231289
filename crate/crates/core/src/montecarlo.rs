//! Monte Carlo experiments: replicate the DGP, fit, and summarise the
//! finite-sample mixed distribution of the scaled estimation error.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgp::{FiniteSampleParams, ModelConfig};
use crate::error::{Error, Result};
use crate::estimators::{
    adaptive_lasso_multivariate, adaptive_lasso_univariate, default_tolerance, TuningParams,
};
use crate::extended::ExtendedReal;
use crate::limitdist::{sample_limit_conservative, sample_limit_consistent, FunctionalSample, MixedDraw};
use crate::rng::{mix64, stream_rng};
use crate::scalar::Scalar;
use crate::tuning::TuningRule;

pub const KDE_POINTS: usize = 512;
const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `T(β̂ − β_T)`.
    #[default]
    ByT,
    /// `λ_T^{−1/2} T(β̂ − β_T)`.
    ByTOverSqrtLambda,
}

impl Scaling {
    pub fn factor<F: Scalar>(&self, t: usize, lambda: F) -> F {
        match self {
            Scaling::ByT => F::of_usize(t),
            Scaling::ByTOverSqrtLambda => F::of_usize(t) / lambda.sqrt(),
        }
    }
}

/// Grid of sample sizes × tuning rules for one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct ExperimentPlan<F> {
    pub model: ModelConfig<F>,
    pub sample_sizes: Vec<usize>,
    pub tuning_rules: Vec<TuningRule<F>>,
    #[serde(default)]
    pub scaling: Scaling,
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Functional draws for the matched limit law (CLI only).
    #[serde(default)]
    pub limit_draws: Option<usize>,
}

impl<F: Scalar> ExperimentPlan<F> {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.sample_sizes.is_empty() || self.tuning_rules.is_empty() {
            return Err(Error::Config("plan needs at least one sample size and one tuning rule".into()));
        }
        if let Some(&t) = self.sample_sizes.iter().find(|&&t| t <= self.model.k + 1) {
            return Err(Error::Config(format!(
                "sample size {t} too small for k = {}",
                self.model.k
            )));
        }
        for rule in &self.tuning_rules {
            rule.validate()?;
            self.model.path.limits_for(rule)?;
        }
        Ok(())
    }
}

/// Outcome of one replication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct ReplicationRecord<F> {
    pub rep_id: usize,
    pub beta_ols: Vec<F>,
    pub beta_al: Vec<F>,
    pub active_set: Vec<bool>,
    pub scaled_error_ols: Vec<F>,
    pub scaled_error_al: Vec<F>,
}

/// All replications of one (T, tuning rule) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct CellResult<F> {
    pub t: usize,
    pub rule: TuningRule<F>,
    pub lambda: F,
    pub beta: Vec<F>,
    pub scaling: Scaling,
    pub finite_params: FiniteSampleParams<F>,
    pub seed: u64,
    pub records: Vec<ReplicationRecord<F>>,
}

impl<F: Scalar> CellResult<F> {
    /// Value of the scaled AL error when coordinate `j` is estimated as zero.
    pub fn atom_location(&self, j: usize) -> F {
        -self.scaling.factor(self.t, self.lambda) * self.beta[j]
    }
}

/// Seed of one cell; depends only on the master seed, T and the rule.
pub fn cell_seed<F: Scalar>(seed: u64, t: usize, rule: &TuningRule<F>) -> u64 {
    let label = rule
        .label()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3));
    mix64(seed ^ mix64(t as u64) ^ mix64(label))
}

pub fn run_experiment<F: Scalar>(plan: &ExperimentPlan<F>) -> Result<Vec<CellResult<F>>> {
    plan.validate()?;
    let mut cells = Vec::with_capacity(plan.sample_sizes.len() * plan.tuning_rules.len());
    for &t in &plan.sample_sizes {
        for rule in &plan.tuning_rules {
            cells.push(run_cell(plan, t, rule)?);
        }
    }
    Ok(cells)
}

pub fn run_cell<F: Scalar>(plan: &ExperimentPlan<F>, t: usize, rule: &TuningRule<F>) -> Result<CellResult<F>> {
    let lambda = rule.lambda_at(t);
    let seed = cell_seed(plan.seed, t, rule);
    let factor = plan.scaling.factor(t, lambda);
    let records = (0..plan.replications)
        .into_par_iter()
        .map(|r| {
            replicate(&plan.model, t, lambda, factor, seed, r)
                .map_err(|e| e.context(format!("cell T={t}, {rule}, replication {r}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CellResult {
        t,
        rule: rule.clone(),
        lambda,
        beta: plan.model.path.beta_at(t, lambda),
        scaling: plan.scaling,
        finite_params: plan.model.path.finite_sample_params(t, lambda),
        seed,
        records,
    })
}

fn replicate<F: Scalar>(
    model: &ModelConfig<F>,
    t: usize,
    lambda: F,
    factor: F,
    seed: u64,
    rep: usize,
) -> Result<ReplicationRecord<F>> {
    let mut rng = stream_rng(seed, 0, rep as u64);
    let path = model.simulate(t, lambda, &mut rng)?;
    let data = path.dataset()?;
    let fit = if model.k == 1 {
        adaptive_lasso_univariate(&data, lambda)?
    } else {
        adaptive_lasso_multivariate(&data, &TuningParams::new(lambda), default_tolerance(&data), DEFAULT_MAX_ITER)?
    };
    let scale = |b: &[F]| -> Vec<F> { b.iter().zip(&path.beta).map(|(&e, &b)| factor * (e - b)).collect() };
    Ok(ReplicationRecord {
        rep_id: rep,
        scaled_error_ols: scale(&fit.beta_ols),
        scaled_error_al: scale(&fit.beta_al),
        beta_ols: fit.beta_ols,
        beta_al: fit.beta_al,
        active_set: fit.active_set,
    })
}

/// Fraction of replications in which coordinate `coord` is estimated as zero.
pub fn selection_frequency<F: Scalar>(records: &[ReplicationRecord<F>], coord: usize) -> F {
    if records.is_empty() {
        return F::zero();
    }
    let zeros = records.iter().filter(|r| !r.active_set[coord]).count();
    F::of_usize(zeros) / F::of_usize(records.len())
}

/// Gaussian kernel density estimate on an even grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct KdeCurve<F> {
    pub points: Vec<F>,
    pub density: Vec<F>,
    pub bandwidth: F,
}

impl<F: Scalar> KdeCurve<F> {
    /// Trapezoid-rule integral of the curve.
    pub fn mass(&self) -> F {
        trapezoid(&self.points, &self.density)
    }

    pub fn scaled(mut self, s: F) -> Self {
        self.density.iter_mut().for_each(|d| *d *= s);
        self
    }
}

fn trapezoid<F: Scalar>(x: &[F], y: &[F]) -> F {
    x.windows(2)
        .zip(y.windows(2))
        .fold(F::zero(), |acc, (x, y)| acc + (x[1] - x[0]) * (y[0] + y[1]) * F::of(0.5))
}

/// Linear-interpolation quantile (type 7) of sorted data.
pub fn quantile_sorted<F: Scalar>(sorted: &[F], q: f64) -> F {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = F::of(h - lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// `0.9 · min(sd, IQR/1.34) · n^{−1/5}`, falling back to sd, |x₁| or 1 when
/// the spread estimate is zero.
pub fn silverman_bandwidth<F: Scalar>(sample: &[F]) -> Result<F> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::Config(format!("bandwidth needs at least 2 points, got {n}")));
    }
    let nf = F::of_usize(n);
    let mean = sample.iter().copied().sum::<F>() / nf;
    let var = sample.iter().map(|&x| (x - mean) * (x - mean)).sum::<F>() / (nf - F::one());
    let sd = var.sqrt();
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let mut lo = sd.min(iqr / F::of(1.34));
    if !(lo > F::zero()) {
        lo = if sd > F::zero() {
            sd
        } else if sample[0] != F::zero() {
            sample[0].abs()
        } else {
            F::one()
        };
    }
    Ok(F::of(0.9) * lo * nf.powf(F::of(-0.2)))
}

pub fn kde<F: Scalar>(sample: &[F], bandwidth: Option<F>) -> Result<KdeCurve<F>> {
    if sample.len() < 2 {
        return Err(Error::Config(format!(
            "kernel density needs at least 2 points, got {}",
            sample.len()
        )));
    }
    let h = match bandwidth {
        Some(h) if h > F::zero() && h.is_finite() => h,
        Some(h) => return Err(Error::Config(format!("bandwidth must be positive, got {h}"))),
        None => silverman_bandwidth(sample)?,
    };
    let (lo, hi) = sample
        .iter()
        .fold((F::infinity(), F::neg_infinity()), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let three = F::of(3.0);
    let (start, end) = (lo - three * h, hi + three * h);
    let step = (end - start) / F::of_usize(KDE_POINTS - 1);
    let norm = F::one() / (F::of_usize(sample.len()) * h * F::of(std::f64::consts::TAU).sqrt());
    let half = F::of(0.5);
    let points: Vec<F> = (0..KDE_POINTS).map(|i| start + step * F::of_usize(i)).collect();
    let density = points
        .par_iter()
        .map(|&p| {
            sample
                .iter()
                .map(|&x| {
                    let u = (p - x) / h;
                    (-half * u * u).exp()
                })
                .sum::<F>()
                * norm
        })
        .collect();
    Ok(KdeCurve {
        points,
        density,
        bandwidth: h,
    })
}

/// Atom plus kernel-smoothed continuous part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct MixedDistributionSummary<F> {
    pub atom_prob: F,
    pub atom_location: F,
    pub continuous_sample: Vec<F>,
    /// Integrates to `1 − atom_prob`; absent when fewer than two draws are continuous.
    pub kde: Option<KdeCurve<F>>,
    pub bandwidth: Option<F>,
    pub n: usize,
}

impl<F: Scalar> MixedDistributionSummary<F> {
    pub fn from_draws(draws: &[MixedDraw<F>], atom_location: F) -> Result<Self> {
        let n = draws.len();
        if n == 0 {
            return Err(Error::Config("cannot summarise an empty sample".into()));
        }
        let continuous: Vec<F> = draws.iter().filter(|d| !d.atom).map(|d| d.value).collect();
        let p = F::of_usize(n - continuous.len()) / F::of_usize(n);
        let kde = if continuous.len() >= 2 {
            Some(kde(&continuous, None)?.scaled(F::one() - p))
        } else {
            None
        };
        Ok(MixedDistributionSummary {
            atom_prob: p,
            atom_location,
            bandwidth: kde.as_ref().map(|k| k.bandwidth),
            continuous_sample: continuous,
            kde,
            n,
        })
    }

    /// `atom_prob + ∫kde`, which should be 1.
    pub fn total_mass(&self) -> F {
        self.atom_prob + self.kde.as_ref().map_or(F::zero(), |k| k.mass())
    }
}

/// Summary of the scaled AL error for coordinate `coord`; atoms come from the
/// solver's active-set flags.
pub fn summarize_mixed<F: Scalar>(
    records: &[ReplicationRecord<F>],
    coord: usize,
    atom_value: F,
) -> Result<MixedDistributionSummary<F>> {
    let draws: Vec<MixedDraw<F>> = records
        .iter()
        .map(|r| MixedDraw {
            atom: !r.active_set[coord],
            value: r.scaled_error_al[coord],
        })
        .collect();
    MixedDistributionSummary::from_draws(&draws, atom_value)
}

/// Summary of the scaled OLS error (never has an atom).
pub fn summarize_ols<F: Scalar>(records: &[ReplicationRecord<F>], coord: usize) -> Result<MixedDistributionSummary<F>> {
    let draws: Vec<MixedDraw<F>> = records
        .iter()
        .map(|r| MixedDraw::continuous(r.scaled_error_ols[coord]))
        .collect();
    MixedDistributionSummary::from_draws(&draws, F::zero())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct ComparisonReport<F> {
    pub atom_prob_diff: F,
    /// Two-sample KS distance of the continuous parts; `None` when one side has none.
    pub ks_continuous: Option<F>,
    pub n_finite: usize,
    pub n_limit: usize,
}

pub fn compare<F: Scalar>(finite: &MixedDistributionSummary<F>, limit_draws: &[MixedDraw<F>]) -> Result<ComparisonReport<F>> {
    if limit_draws.is_empty() {
        return Err(Error::Config("no limit draws to compare against".into()));
    }
    let limit_cont: Vec<F> = limit_draws.iter().filter(|d| !d.atom).map(|d| d.value).collect();
    let p_limit = F::of_usize(limit_draws.len() - limit_cont.len()) / F::of_usize(limit_draws.len());
    let ks = if finite.continuous_sample.is_empty() || limit_cont.is_empty() {
        None
    } else {
        Some(ecdf_ks(&finite.continuous_sample, &limit_cont))
    };
    Ok(ComparisonReport {
        atom_prob_diff: (finite.atom_prob - p_limit).abs(),
        ks_continuous: ks,
        n_finite: finite.n,
        n_limit: limit_draws.len(),
    })
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a − F_b|`.
pub fn ecdf_ks<F: Scalar>(a: &[F], b: &[F]) -> F {
    if a.is_empty() || b.is_empty() {
        return F::zero();
    }
    let sort = |v: &[F]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| x.partial_cmp(y).expect("NaN in sample"));
        v
    };
    let (a, b) = (sort(a), sort(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    F::of(d)
}

/// The limit law matched to one cell: conservative formula at
/// `(λ_T, T β_T)` under `T` scaling, consistent formula at `λ_T^{−1/2} T β_T`
/// otherwise (k = 1).
pub fn matched_limit_draw<F: Scalar>(
    scaling: Scaling,
    lambda: F,
    params: &FiniteSampleParams<F>,
    fs: &FunctionalSample<F>,
) -> Result<MixedDraw<F>> {
    match scaling {
        Scaling::ByT => sample_limit_conservative(lambda, ExtendedReal::Finite(params.beta0[0]), fs),
        Scaling::ByTOverSqrtLambda => sample_limit_consistent(ExtendedReal::Finite(params.tilde_beta0[0]), fs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::CoefficientPath;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn plan(beta: f64, rules: Vec<TuningRule<f64>>, t: usize, reps: usize) -> ExperimentPlan<f64> {
        ExperimentPlan {
            model: ModelConfig::standard(CoefficientPath::fixed(vec![beta])).unwrap(),
            sample_sizes: vec![t],
            tuning_rules: rules,
            scaling: Scaling::ByT,
            replications: reps,
            seed: 17,
            limit_draws: None,
        }
    }

    #[test]
    fn experiment_is_reproducible() {
        let p = plan(0.1, vec![TuningRule::Const { lambda0: 1.0 }], 50, 20);
        assert_eq!(run_experiment(&p).unwrap(), run_experiment(&p).unwrap());
        let single = plan(0.1, vec![TuningRule::Const { lambda0: 1.0 }], 50, 1);
        assert_eq!(run_experiment(&single).unwrap(), run_experiment(&single).unwrap());
    }

    #[test]
    fn cell_results_do_not_depend_on_the_rest_of_the_grid() {
        let a = plan(0.1, vec![TuningRule::Linear], 40, 5);
        let b = plan(0.1, vec![TuningRule::Const { lambda0: 2.0 }, TuningRule::Linear], 40, 5);
        assert_eq!(run_experiment(&a).unwrap()[0], run_experiment(&b).unwrap()[1]);
    }

    #[test]
    fn consistent_tuning_kills_zero_coefficients() {
        let cells = run_experiment(&plan(0.0, vec![TuningRule::Linear], 1000, 1000)).unwrap();
        let active = 1.0 - selection_frequency(&cells[0].records, 0);
        assert!(active < 0.02, "active fraction {active}");
    }

    #[test]
    fn vanishing_penalty_reproduces_ols() {
        let cells = run_experiment(&plan(0.1, vec![TuningRule::Const { lambda0: 1e-300 }], 100, 50)).unwrap();
        for r in &cells[0].records {
            assert_eq!(r.scaled_error_al, r.scaled_error_ols);
        }
    }

    #[test]
    fn invalid_plans_rejected() {
        let mut p = plan(0.1, vec![TuningRule::Power { exponent: 2.0 }], 50, 1);
        assert!(run_experiment(&p).is_err());
        p.tuning_rules = vec![TuningRule::Linear];
        p.replications = 0;
        assert!(run_experiment(&p).is_err());
    }

    #[test]
    fn summary_edge_cases() {
        let atoms = vec![MixedDraw::atom(-2.0f64); 5];
        let s = MixedDistributionSummary::from_draws(&atoms, -2.0).unwrap();
        assert_eq!(s.atom_prob, 1.0);
        assert!(s.kde.is_none());
        let cont: Vec<MixedDraw<f64>> = (0..50).map(|i| MixedDraw::continuous(i as f64 / 10.0)).collect();
        let s = MixedDistributionSummary::from_draws(&cont, 0.0).unwrap();
        assert_eq!(s.atom_prob, 0.0);
        assert!((s.total_mass() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn mass_is_conserved_with_atoms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let draws: Vec<MixedDraw<f64>> = (0..2000)
            .map(|i| {
                if i % 4 == 0 {
                    MixedDraw::atom(-1.0)
                } else {
                    MixedDraw::continuous(StandardNormal.sample(&mut rng))
                }
            })
            .collect();
        let s = MixedDistributionSummary::from_draws(&draws, -1.0).unwrap();
        assert_eq!(s.atom_prob, 0.25);
        assert!((s.total_mass() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn kde_contracts() {
        let two = kde(&[-1.0f64, 1.0], None).unwrap();
        let n = two.density.len();
        for i in 0..n {
            assert!((two.density[i] - two.density[n - 1 - i]).abs() < 1e-12);
        }
        let fixed = kde(&[0.0, 1.0, 2.0], Some(0.37)).unwrap();
        assert_eq!(fixed.bandwidth, 0.37);
        assert_eq!(fixed.points.len(), KDE_POINTS);
        assert!(kde(&[1.0], None).is_err());
        // Constant sample falls back to |x| for the spread.
        assert!(silverman_bandwidth(&[3.0, 3.0, 3.0]).unwrap() > 0.0);
    }

    #[test]
    fn kde_recovers_standard_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let curve = kde(&x, None).unwrap();
        let phi = |u: f64| (-0.5 * u * u).exp() / std::f64::consts::TAU.sqrt();
        let diff: Vec<f64> = curve.points.iter().zip(&curve.density).map(|(&p, &d)| (d - phi(p)).abs()).collect();
        let l1 = trapezoid(&curve.points, &diff);
        assert!(l1 < 0.05, "L1 {l1}");
        let mean_density: Vec<f64> = curve.points.iter().zip(&curve.density).map(|(&p, &d)| p * d).collect();
        assert!(trapezoid(&curve.points, &mean_density).abs() < 0.03);
        assert!((curve.mass() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ks_contracts() {
        assert_eq!(ecdf_ks(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(ecdf_ks(&[0.0], &[1.0]), 1.0);
        assert_eq!(ecdf_ks(&[0.0, 0.0, 1.0], &[0.0, 1.0, 1.0]), 1.0 / 3.0);
    }

    #[test]
    fn compare_flags_missing_continuous_part() {
        let s = MixedDistributionSummary::from_draws(&[MixedDraw::atom(0.0), MixedDraw::atom(0.0)], 0.0).unwrap();
        let r = compare(&s, &[MixedDraw::continuous(1.0), MixedDraw::atom(0.0)]).unwrap();
        assert_eq!(r.ks_continuous, None);
        assert_eq!(r.atom_prob_diff, 0.5);
        let c: Vec<_> = (0..10).map(|i| MixedDraw::continuous(i as f64)).collect();
        let s = MixedDistributionSummary::from_draws(&c, 0.0).unwrap();
        let r = compare(&s, &c).unwrap();
        assert_eq!((r.atom_prob_diff, r.ks_continuous), (0.0, Some(0.0)));
    }
}
