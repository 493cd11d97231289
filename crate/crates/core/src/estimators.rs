//! OLS and adaptive LASSO estimation.
//!
//! The adaptive LASSO minimises `Σ(y_t − x_t'b)² + λ Σ_j w_j |b_j|` with
//! `w_j = |β̂_j|^{−γ}` built from the OLS fit. Zeros are tracked through the
//! `active_set` flags and are always stored as exact `0`.

use serde::{Deserialize, Serialize};

use crate::cd::{self, Penalty};
use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky, Matrix};
use crate::scalar::Scalar;

/// Regression sample `(y, X)` with `n > k ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct Dataset<F> {
    y: Vec<F>,
    x: Matrix<F>,
}

impl<F: Scalar> Dataset<F> {
    pub fn new(y: Vec<F>, x: Matrix<F>) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::Shape(format!(
                "y has {} observations but X has {} rows",
                y.len(),
                x.rows()
            )));
        }
        if x.cols() == 0 || x.rows() <= x.cols() {
            return Err(Error::Shape(format!(
                "need n > k >= 1, got n = {}, k = {}",
                x.rows(),
                x.cols()
            )));
        }
        Ok(Dataset { y, x })
    }

    /// Single-regressor convenience constructor.
    pub fn univariate(y: Vec<F>, x: Vec<F>) -> Result<Self> {
        Self::new(y, Matrix::column(&x))
    }

    pub fn y(&self) -> &[F] {
        &self.y
    }

    pub fn x(&self) -> &Matrix<F> {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn k(&self) -> usize {
        self.x.cols()
    }

    /// Sufficient statistics `(X'X, X'y, y'y)`.
    pub fn moments(&self) -> (Matrix<F>, Vec<F>, F) {
        let g = self.x.gram();
        let c = self.x.tr_matvec(&self.y).expect("validated shapes");
        (g, c, dot(&self.y, &self.y))
    }
}

/// Penalty level and weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct TuningParams<F> {
    pub lambda: F,
    #[serde(default = "one")]
    pub gamma: F,
    /// Explicit weights; derived as `|β̂_j|^{−γ}` from OLS when absent.
    #[serde(default)]
    pub weights: Option<Vec<F>>,
}

fn one<F: Scalar>() -> F {
    F::one()
}

impl<F: Scalar> TuningParams<F> {
    pub fn new(lambda: F) -> Self {
        TuningParams {
            lambda,
            gamma: F::one(),
            weights: None,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if !(self.lambda >= F::zero()) || !self.lambda.is_finite() {
            return Err(Error::Config(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if !(self.gamma >= F::one()) {
            return Err(Error::Config(format!("gamma must be >= 1, got {}", self.gamma)));
        }
        if let Some(w) = &self.weights {
            if w.len() != k {
                return Err(Error::Config(format!("{} weights for k = {k}", w.len())));
            }
            if let Some(bad) = w.iter().find(|w| !(**w > F::zero()) || !w.is_finite()) {
                return Err(Error::Config(format!(
                    "weights must be finite and positive, got {bad}"
                )));
            }
        }
        Ok(())
    }

    /// Effective weights. An OLS coordinate that is exactly zero gets an
    /// infinite weight, which pins it at zero.
    pub fn weights_for(&self, beta_ols: &[F]) -> Vec<F> {
        match &self.weights {
            Some(w) => w.clone(),
            None => beta_ols
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    if *b == F::zero() {
                        log::warn!("OLS coefficient {j} is exactly zero; pinning it at zero");
                        F::infinity()
                    } else {
                        b.abs().powf(-self.gamma)
                    }
                })
                .collect(),
        }
    }
}

/// OLS and adaptive LASSO estimates with diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct FitResult<F> {
    pub beta_ols: Vec<F>,
    pub beta_al: Vec<F>,
    pub active_set: Vec<bool>,
    /// λ̃ = λ / (2 Σx²); univariate fits only.
    pub lambda_std: Option<F>,
    pub kkt_residual: F,
    pub iterations: usize,
}

/// OLS coefficients and residuals. Fails when X'X is singular.
pub fn ols_fit<F: Scalar>(data: &Dataset<F>) -> Result<(Vec<F>, Vec<F>)> {
    let (g, c, _) = data.moments();
    let beta = ols_from_moments(&g, &c)?;
    let fitted = data.x.matvec(&beta)?;
    let resid = data.y.iter().zip(&fitted).map(|(&y, &f)| y - f).collect();
    Ok((beta, resid))
}

fn ols_from_moments<F: Scalar>(g: &Matrix<F>, c: &[F]) -> Result<Vec<F>> {
    let chol = Cholesky::new(g)
        .map_err(|_| Error::Estimation("Gram matrix X'X is singular".into()))?;
    Ok(chol.solve(c))
}

/// Closed-form adaptive LASSO for one regressor with γ = 1 and OLS weights.
pub fn adaptive_lasso_univariate<F: Scalar>(data: &Dataset<F>, lambda: F) -> Result<FitResult<F>> {
    if data.k() != 1 {
        return Err(Error::Usage(format!(
            "univariate closed form needs k = 1, got k = {}",
            data.k()
        )));
    }
    TuningParams::new(lambda).validate(1)?;
    let x = data.x.as_slice();
    let sxx = dot(x, x);
    if !(sxx > F::zero()) {
        return Err(Error::Estimation("regressor has zero sum of squares".into()));
    }
    let sxy = dot(x, &data.y);
    let beta = sxy / sxx;
    let lambda_std = F::of(0.5) * lambda / sxx;
    let (value, active) = if beta == F::zero() {
        log::warn!("OLS coefficient is exactly zero; adaptive LASSO estimate pinned at zero");
        (F::zero(), false)
    } else if beta.abs() > lambda_std.sqrt() {
        (beta - lambda_std / beta, true)
    } else {
        (F::zero(), false)
    };
    let mut fit = FitResult {
        beta_ols: vec![beta],
        beta_al: vec![value],
        active_set: vec![active],
        lambda_std: Some(lambda_std),
        kkt_residual: F::zero(),
        iterations: 0,
    };
    let g = Matrix::from_vec(1, 1, vec![sxx])?;
    let w = TuningParams::new(lambda).weights_for(&fit.beta_ols);
    fit.kkt_residual = kkt_from_moments(&g, &[sxy], &fit.beta_al, &fit.active_set, lambda, &w, data.n());
    Ok(fit)
}

/// Default stopping tolerance `1e−10 · Σy²`.
pub fn default_tolerance<F: Scalar>(data: &Dataset<F>) -> F {
    F::of(1e-10) * dot(&data.y, &data.y)
}

/// Cyclic coordinate descent on the Gram form, stopped by the KKT residual.
pub fn adaptive_lasso_multivariate<F: Scalar>(
    data: &Dataset<F>,
    tuning: &TuningParams<F>,
    tol: F,
    max_iter: usize,
) -> Result<FitResult<F>> {
    tuning.validate(data.k())?;
    if !(tol > F::zero()) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let (g, c, _) = data.moments();
    let beta_ols = ols_from_moments(&g, &c)?;
    let w = tuning.weights_for(&beta_ols);
    let pens = penalties(tuning.lambda, &w);
    let n = F::of_usize(data.n());
    let sol = cd::solve(&g, &c, &pens, &beta_ols, tol * n, max_iter).map_err(|e| match e {
        Error::Convergence { iterations, residual, last_iterate } => Error::Convergence {
            iterations,
            residual: residual / n.as_f64(),
            last_iterate,
        },
        other => other,
    })?;
    Ok(FitResult {
        beta_ols,
        beta_al: sol.z,
        active_set: sol.at_kink.iter().map(|k| !k).collect(),
        lambda_std: None,
        kkt_residual: sol.kkt / n,
        iterations: sol.iterations,
    })
}

fn penalties<F: Scalar>(lambda: F, w: &[F]) -> Vec<Penalty<F>> {
    w.iter()
        .map(|&w| {
            if w.is_infinite() {
                Penalty::Pinned
            } else {
                Penalty::Weighted {
                    kink: F::zero(),
                    weight: lambda * w,
                }
            }
        })
        .collect()
}

fn kkt_from_moments<F: Scalar>(
    g: &Matrix<F>,
    c: &[F],
    b: &[F],
    active: &[bool],
    lambda: F,
    w: &[F],
    n: usize,
) -> F {
    let inactive: Vec<bool> = active.iter().map(|a| !a).collect();
    cd::kkt(g, c, &penalties(lambda, w), b, &inactive) / F::of_usize(n)
}

/// `S(r, t) = sign(r)(|r| − t)_+`, with a flag for a nonzero result.
pub(crate) fn soft_threshold<F: Scalar>(r: F, t: F) -> (F, bool) {
    if r > t {
        (r - t, true)
    } else if r < -t {
        (r + t, true)
    } else {
        (F::zero(), false)
    }
}

/// `Σ(y_t − x_t'b)² + λ Σ w_j |b_j|` with the weights implied by `tuning`.
pub fn penalized_objective<F: Scalar>(data: &Dataset<F>, b: &[F], tuning: &TuningParams<F>) -> Result<F> {
    let fitted = data.x.matvec(b)?;
    let rss = data
        .y
        .iter()
        .zip(&fitted)
        .fold(F::zero(), |acc, (&y, &f)| acc + (y - f) * (y - f));
    let w = match &tuning.weights {
        Some(w) => w.clone(),
        None => tuning.weights_for(&ols_fit(data)?.0),
    };
    let mut pen = F::zero();
    for (bj, wj) in b.iter().zip(&w) {
        if *bj != F::zero() {
            pen += *wj * bj.abs();
        }
    }
    Ok(rss + tuning.lambda * pen)
}

/// Maximal violation of the subgradient conditions, divided by n.
pub fn kkt_residual<F: Scalar>(data: &Dataset<F>, fit: &FitResult<F>, tuning: &TuningParams<F>) -> Result<F> {
    if fit.beta_al.len() != data.k() || fit.active_set.len() != data.k() {
        return Err(Error::Shape("fit does not match the dataset".into()));
    }
    let (g, c, _) = data.moments();
    let w = tuning.weights_for(&fit.beta_ols);
    Ok(kkt_from_moments(&g, &c, &fit.beta_al, &fit.active_set, tuning.lambda, &w, data.n()))
}

/// `(lhs, bound)` with `lhs = (β̂_AL − β̂)'X'X(β̂_AL − β̂)` and `bound = kλ/2`.
pub fn kkt_energy_check<F: Scalar>(
    data: &Dataset<F>,
    fit: &FitResult<F>,
    tuning: &TuningParams<F>,
) -> Result<(F, F)> {
    if fit.beta_al.len() != data.k() {
        return Err(Error::Shape("fit does not match the dataset".into()));
    }
    let g = data.x.gram();
    let d: Vec<F> = fit
        .beta_al
        .iter()
        .zip(&fit.beta_ols)
        .map(|(&a, &o)| a - o)
        .collect();
    Ok((g.quad_form(&d), F::of_usize(data.k()) * tuning.lambda * F::of(0.5)))
}

/// Scaled quantities behind the univariate selection event and the two
/// equivalent expressions for `T(β̂_AL − β_T)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct Decomposition<F> {
    pub z_t: F,
    pub zeta_vv_t: F,
    pub beta0_t: F,
    pub tilde_beta0_t: F,
    pub bar_beta0_t: F,
    /// `T(β̂_AL − β_T)` from the fitted estimate.
    pub scaled_error: F,
    /// Reconstruction in terms of `(𝒵_T, ζ_T, λ, β_{0,T})`.
    pub reconstructed_scaled_error: F,
    /// Same, written with `λ⁻¹𝒵_T + β̄_{0,T}`.
    pub reconstructed_bar: F,
    /// `ζ_T^{1/2}|𝒵_T + β_{0,T}| ≤ √(λ/2)`.
    pub zero_event: bool,
    pub active: bool,
    /// Largest discrepancy between the three expressions, relative to the
    /// largest term involved.
    pub relative_error: F,
}

pub fn finite_sample_decomposition<F: Scalar>(
    data: &Dataset<F>,
    beta_true: F,
    lambda: F,
) -> Result<Decomposition<F>> {
    let fit = adaptive_lasso_univariate(data, lambda)?;
    let t = F::of_usize(data.n());
    let x = data.x.as_slice();
    let zeta = dot(x, x) / (t * t);
    let z = t * (fit.beta_ols[0] - beta_true);
    let beta0 = t * beta_true;
    let tilde = beta0 / lambda.sqrt();
    let bar = beta0 / lambda;
    let two = F::of(2.0);
    let active = fit.active_set[0];
    let (recon, recon_bar, shift) = if active {
        let s = lambda / (two * zeta * (z + beta0));
        let s_bar = F::one() / (two * zeta * (z / lambda + bar));
        (z - s, z - s_bar, s.abs().max(s_bar.abs()))
    } else {
        (-beta0, -beta0, F::zero())
    };
    let direct = t * (fit.beta_al[0] - beta_true);
    let scale = z.abs().max(beta0.abs()).max(shift).max(direct.abs()).max(F::min_positive_value());
    let rel = (recon - direct).abs().max((recon_bar - direct).abs()) / scale;
    Ok(Decomposition {
        z_t: z,
        zeta_vv_t: zeta,
        beta0_t: beta0,
        tilde_beta0_t: tilde,
        bar_beta0_t: bar,
        scaled_error: direct,
        reconstructed_scaled_error: recon,
        reconstructed_bar: recon_bar,
        zero_event: zeta.sqrt() * (z + beta0).abs() <= (lambda / two).sqrt(),
        active,
        relative_error: rel,
    })
}
