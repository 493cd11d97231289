//! Data-generating processes for cointegrating, local-to-unit-root and
//! predictive regressions.
//!
//! Errors `w_t = [u_t, v_t']'` follow a finite moving average of Gaussian
//! innovations, regressors integrate `v_t` (or follow a near-unit-root AR),
//! and the response is `y_t = x_t'β_T + u_t` (or `x_{t-1}'β_T + u_t`).

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Dataset;
use crate::extended::ExtendedReal;
use crate::linalg::{Cholesky, Lu, Matrix};
use crate::scalar::Scalar;
use crate::tuning::TuningRule;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnovationFamily {
    #[default]
    Gaussian,
}

/// i.i.d. innovations ε_t with covariance Σ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct InnovationSpec<F> {
    pub sigma: Matrix<F>,
    #[serde(default)]
    pub family: InnovationFamily,
}

impl<F: Scalar> InnovationSpec<F> {
    pub fn gaussian(sigma: Matrix<F>) -> Self {
        InnovationSpec {
            sigma,
            family: InnovationFamily::Gaussian,
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma.rows()
    }

    /// Cholesky factor of Σ, failing unless Σ is symmetric positive definite.
    pub fn factor(&self) -> Result<Cholesky<F>> {
        if self.dim() < 2 {
            return Err(Error::Config(format!(
                "innovation dimension must be at least 2 (1 + k), got {}",
                self.dim()
            )));
        }
        if !self.sigma.is_symmetric(F::of(1e-12)) {
            return Err(Error::Config("innovation covariance is not symmetric".into()));
        }
        self.sigma
            .cholesky()
            .map_err(|_| Error::Config("innovation covariance is not positive definite".into()))
    }
}

/// `w_t = Σ_{j=0}^{q} C_j ε_{t-j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct LinearProcessSpec<F> {
    pub coeffs: Vec<Matrix<F>>,
    pub innovation: InnovationSpec<F>,
}

impl<F: Scalar> LinearProcessSpec<F> {
    /// Identity filter: i.i.d. errors with covariance Σ.
    pub fn iid(sigma: Matrix<F>) -> Self {
        let n = sigma.rows();
        LinearProcessSpec {
            coeffs: vec![Matrix::identity(n)],
            innovation: InnovationSpec::gaussian(sigma),
        }
    }

    /// Filter order q.
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        self.innovation.dim()
    }

    /// C(1) = Σ_j C_j.
    pub fn impact(&self) -> Matrix<F> {
        let n = self.dim();
        self.coeffs
            .iter()
            .fold(Matrix::zeros(n, n), |acc, c| acc.add(c).expect("validated shapes"))
    }

    pub fn validate(&self) -> Result<()> {
        self.innovation.factor()?;
        if self.coeffs.is_empty() {
            return Err(Error::Config("moving-average filter needs at least C_0".into()));
        }
        let n = self.dim();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.rows() != n || c.cols() != n {
                return Err(Error::Config(format!(
                    "filter matrix C_{j} is {}x{}, expected {n}x{n}",
                    c.rows(),
                    c.cols()
                )));
            }
        }
        if Lu::new(&self.impact())?.is_singular() {
            return Err(Error::Config("C(1) is singular (det C(1) = 0)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsKind {
    #[default]
    UnitRoot,
    LocalToUnity,
}

/// `x_t = x_{t-1} + v_t` or `x_t = (I − T⁻¹ diag(c)) x_{t-1} + v_t`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct RegressorDynamics<F> {
    #[serde(default)]
    pub kind: DynamicsKind,
    #[serde(default)]
    pub c: Vec<F>,
    /// Initial condition; zero when absent.
    #[serde(default)]
    pub x0: Option<Vec<F>>,
}

impl<F: Scalar> RegressorDynamics<F> {
    pub fn unit_root() -> Self {
        RegressorDynamics {
            kind: DynamicsKind::UnitRoot,
            c: Vec::new(),
            x0: None,
        }
    }

    pub fn local_to_unity(c: Vec<F>) -> Self {
        RegressorDynamics {
            kind: DynamicsKind::LocalToUnity,
            c,
            x0: None,
        }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if let Some(x0) = &self.x0 {
            if x0.len() != k {
                return Err(Error::Config(format!(
                    "x0 has length {}, expected {k}",
                    x0.len()
                )));
            }
        }
        if self.kind == DynamicsKind::LocalToUnity {
            if self.c.len() != k {
                return Err(Error::Config(format!(
                    "local-to-unity c has length {}, expected {k}",
                    self.c.len()
                )));
            }
            if let Some(bad) = self.c.iter().find(|c| !(**c > F::zero())) {
                return Err(Error::Config(format!(
                    "local-to-unity parameters must be positive, got {bad}"
                )));
            }
        }
        Ok(())
    }
}

/// A user-supplied coefficient sequence `T ↦ β_T`.
#[derive(Clone)]
pub struct CustomPath<F>(pub Arc<dyn Fn(usize) -> Vec<F> + Send + Sync>);

impl<F> fmt::Debug for CustomPath<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomPath(..)")
    }
}

impl<F> PartialEq for CustomPath<F> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub enum PathRule<F> {
    /// β_T ≡ β.
    Fixed { beta: Vec<F> },
    /// β_T = β · T^{−δ}.
    PowerLaw { beta: Vec<F>, delta: F },
    /// β_T = β · √λ_T / T.
    TuningCoupled { beta: Vec<F> },
    /// Arbitrary sequence; limits must be supplied with the path.
    #[serde(skip)]
    Custom(CustomPath<F>),
}

/// (β₀, β̃₀, β̄₀) = limits of (T β_T, λ_T^{−1/2} T β_T, λ_T^{−1} T β_T).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct PathLimits<F> {
    pub beta0: Vec<ExtendedReal<F>>,
    pub tilde_beta0: Vec<ExtendedReal<F>>,
    pub bar_beta0: Vec<ExtendedReal<F>>,
}

/// Finite-T counterparts (β_{0,T}, β̃_{0,T}, β̄_{0,T}).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct FiniteSampleParams<F> {
    pub beta0: Vec<F>,
    pub tilde_beta0: Vec<F>,
    pub bar_beta0: Vec<F>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct CoefficientPath<F> {
    pub rule: PathRule<F>,
    /// Declared limits. Derived from the rule when absent; required for
    /// custom rules.
    #[serde(default)]
    pub limits: Option<PathLimits<F>>,
}

// Powers of λ_T used by the three normalisations.
const LIMIT_POWERS: [f64; 3] = [0.0, 0.5, 1.0];

impl<F: Scalar> CoefficientPath<F> {
    pub fn new(rule: PathRule<F>) -> Self {
        CoefficientPath { rule, limits: None }
    }

    pub fn fixed(beta: Vec<F>) -> Self {
        Self::new(PathRule::Fixed { beta })
    }

    pub fn power_law(beta: Vec<F>, delta: F) -> Self {
        Self::new(PathRule::PowerLaw { beta, delta })
    }

    pub fn tuning_coupled(beta: Vec<F>) -> Self {
        Self::new(PathRule::TuningCoupled { beta })
    }

    pub fn custom(
        f: impl Fn(usize) -> Vec<F> + Send + Sync + 'static,
        limits: PathLimits<F>,
    ) -> Self {
        CoefficientPath {
            rule: PathRule::Custom(CustomPath(Arc::new(f))),
            limits: Some(limits),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.rule {
            PathRule::Fixed { beta }
            | PathRule::PowerLaw { beta, .. }
            | PathRule::TuningCoupled { beta } => Some(beta.len()),
            PathRule::Custom(_) => self.limits.as_ref().map(|l| l.beta0.len()),
        }
    }

    /// β_T for sample size `t` under tuning value `lambda_t`.
    pub fn beta_at(&self, t: usize, lambda_t: F) -> Vec<F> {
        let tf = F::of_usize(t);
        match &self.rule {
            PathRule::Fixed { beta } => beta.clone(),
            PathRule::PowerLaw { beta, delta } => {
                let s = tf.powf(-*delta);
                beta.iter().map(|&b| b * s).collect()
            }
            PathRule::TuningCoupled { beta } => {
                let s = lambda_t.sqrt() / tf;
                beta.iter().map(|&b| b * s).collect()
            }
            PathRule::Custom(f) => (f.0)(t),
        }
    }

    pub fn finite_sample_params(&self, t: usize, lambda_t: F) -> FiniteSampleParams<F> {
        let tf = F::of_usize(t);
        let beta = self.beta_at(t, lambda_t);
        let scaled = |p: F| -> Vec<F> { beta.iter().map(|&b| tf * b / lambda_t.powf(p)).collect() };
        FiniteSampleParams {
            beta0: scaled(F::zero()),
            tilde_beta0: scaled(F::of(0.5)),
            bar_beta0: scaled(F::one()),
        }
    }

    /// Limits under `tuning`, derived analytically for the built-in rules and
    /// checked against any declared limits; custom paths are checked numerically.
    pub fn limits_for(&self, tuning: &TuningRule<F>) -> Result<PathLimits<F>> {
        let derived = self.analytic_limits(tuning);
        match (derived, &self.limits) {
            (Some(d), None) => Ok(d),
            (Some(d), Some(declared)) => {
                if limits_agree(&d, declared) {
                    Ok(d)
                } else {
                    Err(Error::Config(format!(
                        "declared path limits {declared:?} disagree with the rule under {tuning}"
                    )))
                }
            }
            (None, Some(declared)) => {
                self.check_limits_numerically(declared, tuning)?;
                Ok(declared.clone())
            }
            (None, None) => Err(Error::Config(
                "custom coefficient paths must declare their limits".into(),
            )),
        }
    }

    // β_T = β · T^{−δ} · λ_T^m, so λ_T^{−s} T β_T = β · scale^{m−s} · T^{1−δ+a(m−s)}.
    fn analytic_limits(&self, tuning: &TuningRule<F>) -> Option<PathLimits<F>> {
        let (beta, delta, m) = match &self.rule {
            PathRule::Fixed { beta } => (beta, F::zero(), F::zero()),
            PathRule::PowerLaw { beta, delta } => (beta, *delta, F::zero()),
            PathRule::TuningCoupled { beta } => (beta, F::one(), F::of(0.5)),
            PathRule::Custom(_) => return None,
        };
        let a = tuning.exponent();
        let scale = tuning.scale();
        let tol = F::of(1e-12);
        let limit_for = |s: F| -> Vec<ExtendedReal<F>> {
            let e = F::one() - delta + a * (m - s);
            beta.iter()
                .map(|&b| {
                    if b == F::zero() || e < -tol {
                        ExtendedReal::zero()
                    } else if e > tol {
                        ExtendedReal::signed_infinity(b)
                    } else {
                        ExtendedReal::Finite(b * scale.powf(m - s))
                    }
                })
                .collect()
        };
        let [s0, s1, s2] = LIMIT_POWERS.map(F::of);
        Some(PathLimits {
            beta0: limit_for(s0),
            tilde_beta0: limit_for(s1),
            bar_beta0: limit_for(s2),
        })
    }

    fn check_limits_numerically(
        &self,
        declared: &PathLimits<F>,
        tuning: &TuningRule<F>,
    ) -> Result<()> {
        let (t_mid, t_big) = (1_000_000usize, 100_000_000usize);
        let mid = self.finite_sample_params(t_mid, tuning.lambda_at(t_mid));
        let big = self.finite_sample_params(t_big, tuning.lambda_at(t_big));
        let triples = [
            (&declared.beta0, &mid.beta0, &big.beta0, "beta0"),
            (&declared.tilde_beta0, &mid.tilde_beta0, &big.tilde_beta0, "tilde_beta0"),
            (&declared.bar_beta0, &mid.bar_beta0, &big.bar_beta0, "bar_beta0"),
        ];
        for (lim, at_mid, at_big, name) in triples {
            if lim.len() != at_big.len() {
                return Err(Error::Config(format!(
                    "{name} has {} entries but the path has {}",
                    lim.len(),
                    at_big.len()
                )));
            }
            for j in 0..lim.len() {
                if !sequence_consistent(lim[j], at_mid[j], at_big[j]) {
                    return Err(Error::Config(format!(
                        "{name}[{j}] = {} is inconsistent with the path (value {} at T = {t_big})",
                        lim[j], at_big[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

fn limits_agree<F: Scalar>(a: &PathLimits<F>, b: &PathLimits<F>) -> bool {
    let same = |x: &[ExtendedReal<F>], y: &[ExtendedReal<F>]| {
        x.len() == y.len()
            && x.iter().zip(y).all(|(p, q)| match (p, q) {
                (ExtendedReal::Finite(u), ExtendedReal::Finite(v)) => {
                    (*u - *v).abs() <= F::of(1e-9) * F::one().max(u.abs())
                }
                _ => p == q,
            })
    };
    same(&a.beta0, &b.beta0) && same(&a.tilde_beta0, &b.tilde_beta0) && same(&a.bar_beta0, &b.bar_beta0)
}

// Heuristic convergence check from two large-T evaluations.
fn sequence_consistent<F: Scalar>(limit: ExtendedReal<F>, mid: F, big: F) -> bool {
    match limit {
        ExtendedReal::Finite(l) => {
            let tol = F::of(0.05) * F::one().max(l.abs());
            (big - l).abs() <= tol && (big - l).abs() <= (mid - l).abs() + tol * F::of(1e-3)
        }
        inf => {
            let s = F::of(inf.sign() as f64);
            big * s > F::zero() && big.abs() >= mid.abs() && big.abs() > F::of(10.0)
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    #[default]
    Cointegrating,
    Predictive,
}

/// Complete description of the data-generating process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct ModelConfig<F> {
    pub k: usize,
    pub errors: LinearProcessSpec<F>,
    #[serde(default)]
    pub dynamics: RegressorDynamics<F>,
    pub path: CoefficientPath<F>,
    #[serde(default)]
    pub flavor: Flavor,
}

impl<F: Scalar> ModelConfig<F> {
    /// i.i.d. N(0, I_{1+k}) errors and unit-root regressors.
    pub fn standard(path: CoefficientPath<F>) -> Result<Self> {
        let k = path
            .dim()
            .ok_or_else(|| Error::Config("cannot infer k from the path".into()))?;
        let cfg = ModelConfig {
            k,
            errors: LinearProcessSpec::iid(Matrix::identity(1 + k)),
            dynamics: RegressorDynamics::unit_root(),
            path,
            flavor: Flavor::Cointegrating,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        self.errors.validate()?;
        if self.errors.dim() != 1 + self.k {
            return Err(Error::Config(format!(
                "innovation dimension {} does not equal 1 + k = {}",
                self.errors.dim(),
                1 + self.k
            )));
        }
        self.dynamics.validate(self.k)?;
        if let Some(d) = self.path.dim() {
            if d != self.k {
                return Err(Error::Config(format!(
                    "coefficient path has {d} entries, expected k = {}",
                    self.k
                )));
            }
        }
        Ok(())
    }

    /// Simulates one sample of size `t`; β_T is evaluated at `lambda_t`.
    pub fn simulate<R: Rng + ?Sized>(
        &self,
        t: usize,
        lambda_t: F,
        rng: &mut R,
    ) -> Result<SimulatedPath<F>> {
        if t < 2 {
            return Err(Error::Config(format!("sample size must be at least 2, got {t}")));
        }
        let q = self.errors.order();
        let eps = gen_innovations(&self.errors.innovation, t + q, rng)?;
        let w = gen_errors(&self.errors, &eps, t)?;
        let k = self.k;
        let u = w.col(0);
        let mut v = Matrix::zeros(t, k);
        for i in 0..t {
            v.row_mut(i).copy_from_slice(&w.row(i)[1..]);
        }
        let x = build_regressors(&v, &self.dynamics, t)?;
        let beta = self.path.beta_at(t, lambda_t);
        if beta.len() != k {
            return Err(Error::Shape(format!(
                "path produced {} coefficients, expected {k}",
                beta.len()
            )));
        }
        let y = build_response(&x, &beta, &u, self.flavor)?;
        Ok(SimulatedPath {
            beta,
            y,
            x,
            u,
            v,
            flavor: self.flavor,
        })
    }
}

/// One simulated sample.
#[derive(Clone, Debug)]
pub struct SimulatedPath<F> {
    pub beta: Vec<F>,
    /// Length T (cointegrating) or T − 1 (predictive, t = 2..T).
    pub y: Vec<F>,
    pub x: Matrix<F>,
    pub u: Vec<F>,
    pub v: Matrix<F>,
    pub flavor: Flavor,
}

impl<F: Scalar> SimulatedPath<F> {
    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    /// Regression dataset: `(y_t, x_t)` or, for predictive regressions, `(y_t, x_{t-1})`.
    pub fn dataset(&self) -> Result<Dataset<F>> {
        match self.flavor {
            Flavor::Cointegrating => Dataset::new(self.y.clone(), self.x.clone()),
            Flavor::Predictive => {
                let n = self.len() - 1;
                let k = self.x.cols();
                let lagged = Matrix::from_vec(n, k, self.x.as_slice()[..n * k].to_vec())?;
                Dataset::new(self.y.clone(), lagged)
            }
        }
    }

    /// CSV with header `t,y,x1..xk,u,v1..vk`. Predictive paths leave y empty at t = 1.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let k = self.x.cols();
        let mut header = vec!["t".to_string(), "y".to_string()];
        header.extend((1..=k).map(|j| format!("x{j}")));
        header.push("u".into());
        header.extend((1..=k).map(|j| format!("v{j}")));
        writeln!(out, "{}", header.join(","))?;
        let offset = match self.flavor {
            Flavor::Cointegrating => 0,
            Flavor::Predictive => 1,
        };
        for i in 0..self.len() {
            let mut fields = vec![(i + 1).to_string()];
            fields.push(if i >= offset {
                self.y[i - offset].to_string()
            } else {
                String::new()
            });
            fields.extend(self.x.row(i).iter().map(|x| x.to_string()));
            fields.push(self.u[i].to_string());
            fields.extend(self.v.row(i).iter().map(|x| x.to_string()));
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// `n` i.i.d. rows with covariance Σ.
pub fn gen_innovations<F: Scalar, R: Rng + ?Sized>(
    spec: &InnovationSpec<F>,
    n: usize,
    rng: &mut R,
) -> Result<Matrix<F>> {
    if n == 0 {
        return Err(Error::Config("number of innovations must be at least 1".into()));
    }
    let chol = spec.factor()?;
    let l = chol.lower();
    let d = spec.dim();
    let mut out = Matrix::zeros(n, d);
    let mut z = vec![F::zero(); d];
    for i in 0..n {
        match spec.family {
            InnovationFamily::Gaussian => z.iter_mut().for_each(|zi| *zi = F::standard_normal(rng)),
        }
        let row = out.row_mut(i);
        for a in 0..d {
            let mut s = F::zero();
            for b in 0..=a {
                s += l[(a, b)] * z[b];
            }
            row[a] = s;
        }
    }
    Ok(out)
}

/// Applies the MA filter; the first q rows of `eps` are warm-up.
pub fn gen_errors<F: Scalar>(
    spec: &LinearProcessSpec<F>,
    eps: &Matrix<F>,
    t: usize,
) -> Result<Matrix<F>> {
    let q = spec.order();
    let d = spec.dim();
    if eps.cols() != d {
        return Err(Error::Shape(format!(
            "innovations have {} columns, expected {d}",
            eps.cols()
        )));
    }
    if eps.rows() < t + q {
        return Err(Error::Length {
            needed: t + q,
            got: eps.rows(),
        });
    }
    let mut w = Matrix::zeros(t, d);
    for i in 0..t {
        let row = w.row_mut(i);
        for (j, c) in spec.coeffs.iter().enumerate() {
            let e = eps.row(i + q - j);
            for a in 0..d {
                let mut s = F::zero();
                for b in 0..d {
                    s += c[(a, b)] * e[b];
                }
                row[a] += s;
            }
        }
    }
    Ok(w)
}

/// Integrates `v` into the regressor path `x_1..x_T`.
pub fn build_regressors<F: Scalar>(
    v: &Matrix<F>,
    dynamics: &RegressorDynamics<F>,
    t: usize,
) -> Result<Matrix<F>> {
    let k = v.cols();
    dynamics.validate(k)?;
    if v.rows() != t {
        return Err(Error::Shape(format!("v has {} rows, expected {t}", v.rows())));
    }
    let mut prev = dynamics.x0.clone().unwrap_or_else(|| vec![F::zero(); k]);
    let ar: Vec<F> = match dynamics.kind {
        DynamicsKind::UnitRoot => vec![F::one(); k],
        DynamicsKind::LocalToUnity => {
            let tf = F::of_usize(t);
            dynamics.c.iter().map(|&c| F::one() - c / tf).collect()
        }
    };
    let mut x = Matrix::zeros(t, k);
    for i in 0..t {
        let vi = v.row(i);
        let row = x.row_mut(i);
        for j in 0..k {
            row[j] = ar[j] * prev[j] + vi[j];
        }
        prev.copy_from_slice(row);
    }
    Ok(x)
}

/// `y_t = x_t'β + u_t`, or `y_t = x_{t-1}'β + u_t` for t = 2..T (predictive).
pub fn build_response<F: Scalar>(
    x: &Matrix<F>,
    beta: &[F],
    u: &[F],
    flavor: Flavor,
) -> Result<Vec<F>> {
    if x.cols() != beta.len() || x.rows() != u.len() {
        return Err(Error::Shape(format!(
            "x is {}x{}, beta has {} entries, u has {}",
            x.rows(),
            x.cols(),
            beta.len(),
            u.len()
        )));
    }
    let dot = |r: &[F]| r.iter().zip(beta).fold(F::zero(), |acc, (&a, &b)| acc + a * b);
    Ok(match flavor {
        Flavor::Cointegrating => (0..x.rows()).map(|i| dot(x.row(i)) + u[i]).collect(),
        Flavor::Predictive => (1..x.rows()).map(|i| dot(x.row(i - 1)) + u[i]).collect(),
    })
}

/// Long-run covariance Ω = C(1) Σ C(1)' and one-sided covariance
/// Δ_vu = Σ_h E(v_0 u_h), summed from h = 0 (or h = 1 when `predictive`).
pub fn long_run_moments<F: Scalar>(
    spec: &LinearProcessSpec<F>,
    predictive: bool,
) -> Result<(Matrix<F>, Vec<F>)> {
    spec.validate()?;
    let sigma = &spec.innovation.sigma;
    let c1 = spec.impact();
    let omega = c1.matmul(sigma)?.matmul(&c1.transpose())?;
    let d = spec.dim();
    let q = spec.order();
    let start = usize::from(predictive);
    let mut delta = vec![F::zero(); d - 1];
    for h in start..=q {
        let gamma = autocovariance(spec, h)?;
        for (a, dv) in delta.iter_mut().enumerate() {
            *dv += gamma[(1 + a, 0)];
        }
    }
    Ok((omega, delta))
}

/// Γ(h) = E(w_0 w_h') = Σ_j C_j Σ C_{j+h}'.
pub fn autocovariance<F: Scalar>(spec: &LinearProcessSpec<F>, h: usize) -> Result<Matrix<F>> {
    let d = spec.dim();
    let sigma = &spec.innovation.sigma;
    let mut g = Matrix::zeros(d, d);
    for j in 0..spec.coeffs.len() {
        if j + h >= spec.coeffs.len() {
            break;
        }
        let term = spec.coeffs[j]
            .matmul(sigma)?
            .matmul(&spec.coeffs[j + h].transpose())?;
        g = g.add(&term)?;
    }
    Ok(g)
}
