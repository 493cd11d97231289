//! Brownian functionals and the limit laws of the adaptive LASSO.
//!
//! `B = L W` with `L L' = Ω` is simulated on an equally spaced grid of `[0, 1]`.
//! Integrals use left-endpoint sums, so `Σ B_v dB_u` is an Itô sum.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cd::{self, Penalty};
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::stream_rng;
use crate::scalar::Scalar;

pub use crate::extended::ExtendedReal;

pub const DEFAULT_STEPS: usize = 10_000;
pub const MIN_STEPS: usize = 100;

const DOMAIN_FUNCTIONALS: u64 = 0x4655_4e43;

/// Discretisation grid and long-run covariance of `B = (B_u, B_v')'`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct BrownianGrid<F> {
    #[serde(default = "default_steps")]
    pub steps: usize,
    pub omega: Matrix<F>,
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

impl<F: Scalar> BrownianGrid<F> {
    pub fn new(omega: Matrix<F>) -> Result<Self> {
        let grid = BrownianGrid {
            steps: DEFAULT_STEPS,
            omega,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Ω = I_{1+k}.
    pub fn standard(k: usize) -> Self {
        BrownianGrid {
            steps: DEFAULT_STEPS,
            omega: Matrix::identity(1 + k),
        }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn dim(&self) -> usize {
        self.omega.rows()
    }

    pub fn k(&self) -> usize {
        self.dim().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < MIN_STEPS {
            return Err(Error::Config(format!(
                "grid needs at least {MIN_STEPS} steps, got {}",
                self.steps
            )));
        }
        if self.dim() < 2 || !self.omega.is_square() {
            return Err(Error::Config("omega must be square of dimension 1 + k >= 2".into()));
        }
        if !self.omega.is_symmetric(F::of(1e-12)) {
            return Err(Error::Config("omega is not symmetric".into()));
        }
        self.omega
            .cholesky()
            .map_err(|_| Error::Config("omega is not positive definite".into()))?;
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub enum FunctionalVariant<F> {
    #[default]
    UnitRoot,
    /// `B_v` replaced by the Ornstein–Uhlenbeck process `J^C` with drift `−diag(c)`.
    Ou { c: Vec<F> },
}

/// One joint draw of `(∫B_vB_v', ∫B_v dB_u + Δ_vu, 𝒵)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct FunctionalSample<F> {
    pub zeta_vv: Matrix<F>,
    pub ito_term: Vec<F>,
    pub z: Vec<F>,
    pub variant: FunctionalVariant<F>,
}

impl<F: Scalar> FunctionalSample<F> {
    pub fn k(&self) -> usize {
        self.z.len()
    }

    fn scalar_parts(&self) -> Result<(F, F)> {
        if self.k() != 1 {
            return Err(Error::Usage(format!(
                "univariate limit sampler called with k = {}",
                self.k()
            )));
        }
        Ok((self.zeta_vv[(0, 0)], self.z[0]))
    }
}

// Running left-endpoint sums along one path.
struct Accumulator<F> {
    k: usize,
    level: Vec<F>,
    decay: Vec<F>,
    zeta: Vec<F>,
    ito: Vec<F>,
    dt: F,
}

impl<F: Scalar> Accumulator<F> {
    fn new(k: usize, steps: usize, c: Option<&[F]>) -> Self {
        let dt = F::one() / F::of_usize(steps);
        let decay = match c {
            Some(c) => c.iter().map(|&c| F::one() - c * dt).collect(),
            None => vec![F::one(); k],
        };
        Accumulator {
            k,
            level: vec![F::zero(); k],
            decay,
            zeta: vec![F::zero(); k * k],
            ito: vec![F::zero(); k],
            dt,
        }
    }

    // `db = (dB_u, dB_v')`.
    #[inline]
    fn push(&mut self, db: &[F]) {
        let k = self.k;
        for a in 0..k {
            let ja = self.level[a];
            for b in a..k {
                self.zeta[a * k + b] += ja * self.level[b];
            }
            self.ito[a] += ja * db[0];
        }
        for a in 0..k {
            self.level[a] = self.decay[a] * self.level[a] + db[1 + a];
        }
    }

    fn finish(self, delta_vu: &[F], variant: FunctionalVariant<F>) -> Result<FunctionalSample<F>> {
        let k = self.k;
        let mut zeta = Matrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let v = self.zeta[a * k + b] * self.dt;
                zeta[(a, b)] = v;
                zeta[(b, a)] = v;
            }
        }
        let ito: Vec<F> = self.ito.iter().zip(delta_vu).map(|(&i, &d)| i + d).collect();
        let z = Cholesky::new(&zeta)
            .map_err(|_| Error::Estimation("simulated zeta_vv is not positive definite".into()))?
            .solve(&ito);
        Ok(FunctionalSample {
            zeta_vv: zeta,
            ito_term: ito,
            z,
            variant,
        })
    }
}

/// Grid, Cholesky root and drift prepared once for repeated draws.
#[derive(Clone, Debug)]
pub struct FunctionalSampler<F> {
    steps: usize,
    lower: Matrix<F>,
    delta_vu: Vec<F>,
    variant: FunctionalVariant<F>,
}

impl<F: Scalar> FunctionalSampler<F> {
    pub fn new(grid: &BrownianGrid<F>, delta_vu: &[F], variant: FunctionalVariant<F>) -> Result<Self> {
        grid.validate()?;
        let k = grid.k();
        if delta_vu.len() != k {
            return Err(Error::Config(format!(
                "delta_vu has {} entries, expected k = {k}",
                delta_vu.len()
            )));
        }
        if let FunctionalVariant::Ou { c } = &variant {
            if c.len() != k {
                return Err(Error::Config(format!("c has {} entries, expected k = {k}", c.len())));
            }
            if let Some(bad) = c.iter().find(|c| !(**c >= F::zero())) {
                return Err(Error::Config(format!("OU parameters must be >= 0, got {bad}")));
            }
        }
        Ok(FunctionalSampler {
            steps: grid.steps,
            lower: grid.omega.cholesky()?.lower().clone(),
            delta_vu: delta_vu.to_vec(),
            variant,
        })
    }

    pub fn k(&self) -> usize {
        self.delta_vu.len()
    }

    fn accumulator(&self, steps: usize) -> Accumulator<F> {
        let c = match &self.variant {
            FunctionalVariant::UnitRoot => None,
            FunctionalVariant::Ou { c } => Some(c.as_slice()),
        };
        Accumulator::new(self.k(), steps, c)
    }

    #[inline]
    fn rotate(&self, w: &[F], out: &mut [F]) {
        for a in 0..w.len() {
            let mut s = F::zero();
            for b in 0..=a {
                s += self.lower[(a, b)] * w[b];
            }
            out[a] = s;
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FunctionalSample<F>> {
        let d = self.k() + 1;
        let sd = (F::one() / F::of_usize(self.steps)).sqrt();
        let mut acc = self.accumulator(self.steps);
        let mut w = vec![F::zero(); d];
        let mut db = vec![F::zero(); d];
        for _ in 0..self.steps {
            for x in w.iter_mut() {
                *x = sd * F::standard_normal(rng);
            }
            self.rotate(&w, &mut db);
            acc.push(&db);
        }
        acc.finish(&self.delta_vu, self.variant.clone())
    }

    /// The same path on the grid and on a `factor`-times finer grid. The fine
    /// increments are Brownian-bridge refinements of the coarse ones.
    pub fn draw_refined<R: Rng + ?Sized>(
        &self,
        factor: usize,
        rng: &mut R,
    ) -> Result<(FunctionalSample<F>, FunctionalSample<F>)> {
        if factor < 2 {
            return Err(Error::Config(format!("refinement factor must be >= 2, got {factor}")));
        }
        let d = self.k() + 1;
        let sd = (F::one() / F::of_usize(self.steps)).sqrt();
        let sd_fine = (F::one() / F::of_usize(self.steps * factor)).sqrt();
        let m = F::of_usize(factor);
        let mut coarse = self.accumulator(self.steps);
        let mut fine = self.accumulator(self.steps * factor);
        let mut w = vec![F::zero(); d];
        let mut db = vec![F::zero(); d];
        let mut sub = vec![F::zero(); factor * d];
        for _ in 0..self.steps {
            for x in w.iter_mut() {
                *x = sd * F::standard_normal(rng);
            }
            for x in sub.iter_mut() {
                *x = sd_fine * F::standard_normal(rng);
            }
            for a in 0..d {
                let total: F = (0..factor).map(|i| sub[i * d + a]).sum();
                let shift = (total - w[a]) / m;
                for i in 0..factor {
                    sub[i * d + a] -= shift;
                }
            }
            self.rotate(&w, &mut db);
            coarse.push(&db);
            for i in 0..factor {
                self.rotate(&sub[i * d..(i + 1) * d], &mut db);
                fine.push(&db);
            }
        }
        Ok((
            coarse.finish(&self.delta_vu, self.variant.clone())?,
            fine.finish(&self.delta_vu, self.variant.clone())?,
        ))
    }

    /// `n` draws on independent streams derived from `seed`; parallel and
    /// independent of the worker count.
    pub fn batch(&self, n: usize, seed: u64) -> Result<Vec<FunctionalSample<F>>> {
        (0..n as u64)
            .into_par_iter()
            .map(|i| self.draw(&mut stream_rng(seed, DOMAIN_FUNCTIONALS, i)))
            .collect()
    }
}

pub fn sample_brownian_functionals<F: Scalar, R: Rng + ?Sized>(
    grid: &BrownianGrid<F>,
    delta_vu: &[F],
    rng: &mut R,
) -> Result<FunctionalSample<F>> {
    FunctionalSampler::new(grid, delta_vu, FunctionalVariant::UnitRoot)?.draw(rng)
}

/// Local-to-unity analogue: `J_t = (1 − cΔ) J_{t−1} + ΔB_{v,t}` on the grid.
pub fn sample_ou_functionals<F: Scalar, R: Rng + ?Sized>(
    grid: &BrownianGrid<F>,
    c: &[F],
    delta_vu: &[F],
    rng: &mut R,
) -> Result<FunctionalSample<F>> {
    FunctionalSampler::new(grid, delta_vu, FunctionalVariant::Ou { c: c.to_vec() })?.draw(rng)
}

/// A draw from a law with one atom.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedDraw<F> {
    pub atom: bool,
    pub value: F,
}

impl<F: Scalar> MixedDraw<F> {
    pub fn continuous(value: F) -> Self {
        MixedDraw { atom: false, value }
    }

    pub fn atom(value: F) -> Self {
        MixedDraw { atom: true, value }
    }
}

/// Either a draw or mass escaping to `sign · ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LimitOutcome<F> {
    Draw(MixedDraw<F>),
    Escape(i8),
}

/// λ₀ → conservative law at `β₀` (univariate).
pub fn sample_limit_conservative<F: Scalar>(
    lambda0: F,
    beta0: ExtendedReal<F>,
    fs: &FunctionalSample<F>,
) -> Result<MixedDraw<F>> {
    if !(lambda0 >= F::zero()) || !lambda0.is_finite() {
        return Err(Error::Config(format!("lambda0 must be finite and >= 0, got {lambda0}")));
    }
    let (zeta, z) = fs.scalar_parts()?;
    let b0 = match beta0 {
        ExtendedReal::Finite(b) => b,
        _ => return Ok(MixedDraw::continuous(z)),
    };
    if lambda0 == F::zero() {
        return Ok(MixedDraw::continuous(z));
    }
    let two = F::of(2.0);
    if zeta.sqrt() * (z + b0).abs() > (lambda0 / two).sqrt() {
        Ok(MixedDraw::continuous(z - lambda0 / (two * zeta * (z + b0))))
    } else {
        Ok(MixedDraw::atom(-b0))
    }
}

/// Consistent tuning, scaled by `λ_T^{−1/2} T`.
pub fn sample_limit_consistent<F: Scalar>(
    tilde_beta0: ExtendedReal<F>,
    fs: &FunctionalSample<F>,
) -> Result<MixedDraw<F>> {
    let (zeta, _) = fs.scalar_parts()?;
    let b = match tilde_beta0 {
        ExtendedReal::Finite(b) if b != F::zero() => b,
        ExtendedReal::Finite(_) => return Ok(MixedDraw::atom(F::zero())),
        _ => return Ok(MixedDraw::continuous(F::zero())),
    };
    let two = F::of(2.0);
    let a0 = F::one() / (two.sqrt() * b.abs());
    if zeta.sqrt() > a0 {
        Ok(MixedDraw::continuous(-F::one() / (two * b * zeta)))
    } else {
        Ok(MixedDraw::atom(-b))
    }
}

/// Checks that `(β₀, β̃₀, β̄₀)` can arise from one sequence with λ_T → ∞.
pub fn check_rate_t_triple<F: Scalar>(
    beta0: ExtendedReal<F>,
    tilde_beta0: ExtendedReal<F>,
    bar_beta0: ExtendedReal<F>,
) -> Result<()> {
    let fail = |why: &str| {
        Err(Error::Config(format!(
            "inconsistent limits (beta0 = {beta0}, tilde_beta0 = {tilde_beta0}, bar_beta0 = {bar_beta0}): {why}"
        )))
    };
    let signs = [beta0.sign(), tilde_beta0.sign(), bar_beta0.sign()];
    if signs.contains(&1) && signs.contains(&-1) {
        return fail("limits of one sequence cannot change sign");
    }
    match tilde_beta0 {
        ExtendedReal::Finite(t) if t == F::zero() => {
            if !bar_beta0.is_zero() {
                return fail("tilde_beta0 = 0 forces bar_beta0 = 0");
            }
        }
        ExtendedReal::Finite(_) => {
            if beta0.is_finite() || !bar_beta0.is_zero() {
                return fail("finite nonzero tilde_beta0 forces |beta0| = inf and bar_beta0 = 0");
            }
        }
        _ => {
            if beta0.is_finite() {
                return fail("infinite tilde_beta0 forces |beta0| = inf");
            }
        }
    }
    Ok(())
}

/// Consistent tuning, scaled by `T`.
pub fn sample_limit_consistent_rate_t<F: Scalar>(
    beta0: ExtendedReal<F>,
    tilde_beta0: ExtendedReal<F>,
    bar_beta0: ExtendedReal<F>,
    fs: &FunctionalSample<F>,
) -> Result<LimitOutcome<F>> {
    check_rate_t_triple(beta0, tilde_beta0, bar_beta0)?;
    let (zeta, z) = fs.scalar_parts()?;
    if tilde_beta0.is_zero() {
        return Ok(match beta0 {
            ExtendedReal::Finite(b) => LimitOutcome::Draw(MixedDraw::atom(-b)),
            inf => LimitOutcome::Escape(-inf.sign()),
        });
    }
    if tilde_beta0.is_finite() {
        return Ok(LimitOutcome::Escape(-tilde_beta0.sign()));
    }
    Ok(match bar_beta0 {
        ExtendedReal::Finite(b) if b == F::zero() => LimitOutcome::Escape(-tilde_beta0.sign()),
        ExtendedReal::Finite(b) => {
            LimitOutcome::Draw(MixedDraw::continuous(z - F::one() / (F::of(2.0) * zeta * b)))
        }
        _ => LimitOutcome::Draw(MixedDraw::continuous(z)),
    })
}

/// Monte Carlo estimate of a probability with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionEstimate {
    pub p: f64,
    pub std_error: f64,
    pub draws: usize,
    /// Known without simulation.
    pub exact: bool,
}

impl SelectionEstimate {
    pub fn exact(p: f64) -> Self {
        SelectionEstimate {
            p,
            std_error: 0.0,
            draws: 0,
            exact: true,
        }
    }

    pub fn from_count(hits: usize, draws: usize) -> Self {
        let p = hits as f64 / draws as f64;
        SelectionEstimate {
            p,
            std_error: binomial_std_error(p, draws),
            draws,
            exact: false,
        }
    }
}

pub fn binomial_std_error(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn count_parallel<F: Scalar>(
    sampler: &FunctionalSampler<F>,
    draws: usize,
    seed: u64,
    hit: impl Fn(&FunctionalSample<F>) -> Result<bool> + Sync,
) -> Result<SelectionEstimate> {
    if draws == 0 {
        return Err(Error::Config("need at least one draw".into()));
    }
    let hits = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let fs = sampler.draw(&mut stream_rng(seed, DOMAIN_FUNCTIONALS, i))?;
            hit(&fs).map(usize::from)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(SelectionEstimate::from_count(hits, draws))
}

fn univariate_sampler<F: Scalar>(grid: &BrownianGrid<F>, delta_vu: &[F]) -> Result<FunctionalSampler<F>> {
    if grid.k() != 1 {
        return Err(Error::Usage(format!("univariate probability needs k = 1, got {}", grid.k())));
    }
    FunctionalSampler::new(grid, delta_vu, FunctionalVariant::UnitRoot)
}

/// `P(ζ_vv^{1/2}|𝒵 + β₀| ≤ √(λ₀/2))`.
pub fn limit_selection_prob_conservative<F: Scalar, R: Rng + ?Sized>(
    lambda0: F,
    beta0: ExtendedReal<F>,
    draws: usize,
    grid: &BrownianGrid<F>,
    delta_vu: &[F],
    rng: &mut R,
) -> Result<SelectionEstimate> {
    if !(lambda0 >= F::zero()) || !lambda0.is_finite() {
        return Err(Error::Config(format!("lambda0 must be finite and >= 0, got {lambda0}")));
    }
    let b0 = match beta0 {
        ExtendedReal::Finite(b) if lambda0 > F::zero() => b,
        _ => return Ok(SelectionEstimate::exact(0.0)),
    };
    let sampler = univariate_sampler(grid, delta_vu)?;
    let cut = (lambda0 / F::of(2.0)).sqrt();
    count_parallel(&sampler, draws, rng.next_u64(), |fs| {
        let (zeta, z) = fs.scalar_parts()?;
        Ok(zeta.sqrt() * (z + b0).abs() <= cut)
    })
}

/// `P(ζ_vv^{1/2} ≤ 1/(√2|β̃₀|))`.
pub fn limit_selection_prob_consistent<F: Scalar, R: Rng + ?Sized>(
    tilde_beta0: ExtendedReal<F>,
    draws: usize,
    grid: &BrownianGrid<F>,
    rng: &mut R,
) -> Result<SelectionEstimate> {
    let b = match tilde_beta0 {
        ExtendedReal::Finite(b) if b == F::zero() => return Ok(SelectionEstimate::exact(1.0)),
        ExtendedReal::Finite(b) => b,
        _ => return Ok(SelectionEstimate::exact(0.0)),
    };
    let sampler = univariate_sampler(grid, &[F::zero()])?;
    let a0 = F::one() / (F::of(2.0).sqrt() * b.abs());
    count_parallel(&sampler, draws, rng.next_u64(), |fs| {
        let (zeta, _) = fs.scalar_parts()?;
        Ok(zeta.sqrt() <= a0)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitMode {
    /// Conservative tuning, scaled by T.
    V,
    /// Consistent tuning, scaled by `λ_T^{−1/2} T`.
    Vtilde,
    /// Consistent tuning, scaled by T.
    Vbar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Conservative,
    Consistent,
}

/// Limit parameters of the tuning and coefficient sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct LimitParams<F> {
    pub lambda0: ExtendedReal<F>,
    #[serde(default)]
    pub beta0: Vec<ExtendedReal<F>>,
    #[serde(default)]
    pub tilde_beta0: Vec<ExtendedReal<F>>,
    #[serde(default)]
    pub bar_beta0: Vec<ExtendedReal<F>>,
    pub delta_vu: Vec<F>,
    pub regime: Regime,
}

impl<F: Scalar> LimitParams<F> {
    pub fn conservative(lambda0: F, beta0: Vec<ExtendedReal<F>>, delta_vu: Vec<F>) -> Self {
        LimitParams {
            lambda0: ExtendedReal::Finite(lambda0),
            beta0,
            tilde_beta0: Vec::new(),
            bar_beta0: Vec::new(),
            delta_vu,
            regime: Regime::Conservative,
        }
    }

    pub fn consistent(
        beta0: Vec<ExtendedReal<F>>,
        tilde_beta0: Vec<ExtendedReal<F>>,
        bar_beta0: Vec<ExtendedReal<F>>,
        delta_vu: Vec<F>,
    ) -> Self {
        LimitParams {
            lambda0: ExtendedReal::PlusInf,
            beta0,
            tilde_beta0,
            bar_beta0,
            delta_vu,
            regime: Regime::Consistent,
        }
    }

    pub fn k(&self) -> usize {
        self.delta_vu.len()
    }

    pub fn validate(&self, mode: LimitMode) -> Result<()> {
        let k = self.k();
        let need = |v: &[ExtendedReal<F>], name: &str| {
            if v.len() == k {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} has {} entries, expected k = {k}", v.len())))
            }
        };
        match self.regime {
            Regime::Conservative => match self.lambda0 {
                ExtendedReal::Finite(l) if l >= F::zero() => {}
                other => {
                    return Err(Error::Config(format!(
                        "conservative regime needs finite lambda0 >= 0, got {other}"
                    )))
                }
            },
            Regime::Consistent => {
                if self.lambda0 != ExtendedReal::PlusInf {
                    return Err(Error::Config("consistent regime needs lambda0 = inf".into()));
                }
                need(&self.tilde_beta0, "tilde_beta0")?;
            }
        }
        match mode {
            LimitMode::V => {
                if self.regime != Regime::Conservative {
                    return Err(Error::Config("mode V needs the conservative regime".into()));
                }
                need(&self.beta0, "beta0")
            }
            LimitMode::Vtilde => {
                if self.regime != Regime::Consistent {
                    return Err(Error::Config("mode Vtilde needs the consistent regime".into()));
                }
                Ok(())
            }
            LimitMode::Vbar => {
                if self.regime != Regime::Consistent {
                    return Err(Error::Config("mode Vbar needs the consistent regime".into()));
                }
                need(&self.beta0, "beta0")?;
                need(&self.bar_beta0, "bar_beta0")
            }
        }
    }
}

/// Penalty shape of one coordinate of the limit objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CoordinateClass<F> {
    Free,
    Pinned,
    Weighted { kink: F, weight: F },
    /// Penalty `slope · z_j`.
    Linear { slope: F },
}

/// Classifies every coordinate; weights under `V` depend on the draw's `𝒵`.
pub fn classify<F: Scalar>(
    mode: LimitMode,
    params: &LimitParams<F>,
    fs: &FunctionalSample<F>,
) -> Result<Vec<CoordinateClass<F>>> {
    params.validate(mode)?;
    if fs.k() != params.k() {
        return Err(Error::Shape(format!(
            "functional draw has k = {}, parameters have k = {}",
            fs.k(),
            params.k()
        )));
    }
    (0..params.k())
        .map(|j| match mode {
            LimitMode::V => {
                let lambda0 = params.lambda0.finite().expect("validated");
                Ok(match params.beta0[j] {
                    ExtendedReal::Finite(b) if lambda0 > F::zero() => {
                        let denom = (b + fs.z[j]).abs();
                        let weight = if denom > F::zero() {
                            lambda0 / denom
                        } else {
                            F::max_value()
                        };
                        CoordinateClass::Weighted { kink: -b, weight }
                    }
                    _ => CoordinateClass::Free,
                })
            }
            LimitMode::Vtilde => Ok(match params.tilde_beta0[j] {
                ExtendedReal::Finite(b) if b == F::zero() => CoordinateClass::Pinned,
                ExtendedReal::Finite(b) => CoordinateClass::Weighted {
                    kink: -b,
                    weight: F::one() / b.abs(),
                },
                _ => CoordinateClass::Free,
            }),
            LimitMode::Vbar => match params.bar_beta0[j] {
                ExtendedReal::Finite(b) if b == F::zero() => {
                    if params.beta0[j].is_zero() {
                        Ok(CoordinateClass::Pinned)
                    } else {
                        Err(Error::UnsupportedRegime(format!(
                            "coordinate {j}: bar_beta0 = 0 with beta0 = {} makes the limit objective \
                             unbounded below; use the univariate rate-T limits \
                             (sample_limit_consistent_rate_t) instead",
                            params.beta0[j]
                        )))
                    }
                }
                ExtendedReal::Finite(b) => Ok(CoordinateClass::Linear { slope: F::one() / b }),
                _ => Ok(CoordinateClass::Free),
            },
        })
        .collect()
}

/// Minimiser of the limit objective for one functional draw.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Scalar", deserialize = "F: Scalar"))]
pub struct ArgminDraw<F> {
    pub z: Vec<F>,
    /// Coordinate sits at its kink, i.e. the estimate is exactly zero.
    pub at_kink: Vec<bool>,
    pub kkt_residual: F,
    pub iterations: usize,
}

fn limit_problem<F: Scalar>(
    mode: LimitMode,
    classes: &[CoordinateClass<F>],
    fs: &FunctionalSample<F>,
) -> (Vec<F>, Vec<Penalty<F>>) {
    let half = F::of(0.5);
    let mut g = match mode {
        LimitMode::Vtilde => vec![F::zero(); fs.k()],
        _ => fs.ito_term.clone(),
    };
    let pens = classes
        .iter()
        .enumerate()
        .map(|(j, c)| match *c {
            CoordinateClass::Free => Penalty::Free,
            CoordinateClass::Pinned => Penalty::Pinned,
            CoordinateClass::Weighted { kink, weight } => Penalty::Weighted { kink, weight },
            CoordinateClass::Linear { slope } => {
                g[j] -= half * slope;
                Penalty::Free
            }
        })
        .collect();
    (g, pens)
}

pub fn sample_limit_multivariate<F: Scalar>(
    mode: LimitMode,
    params: &LimitParams<F>,
    fs: &FunctionalSample<F>,
    tol: F,
) -> Result<ArgminDraw<F>> {
    let classes = classify(mode, params, fs)?;
    let (g, pens) = limit_problem(mode, &classes, fs);
    let start = vec![F::zero(); fs.k()];
    let sol = cd::solve(&fs.zeta_vv, &g, &pens, &start, tol, 100_000)?;
    Ok(ArgminDraw {
        z: sol.z,
        at_kink: sol.at_kink,
        kkt_residual: sol.kkt,
        iterations: sol.iterations,
    })
}

/// Limit objective up to an additive constant; `+∞` off the feasible set.
pub fn limit_objective<F: Scalar>(
    mode: LimitMode,
    params: &LimitParams<F>,
    fs: &FunctionalSample<F>,
    z: &[F],
) -> Result<F> {
    let classes = classify(mode, params, fs)?;
    let mut value = fs.zeta_vv.quad_form(z);
    if mode != LimitMode::Vtilde {
        value -= F::of(2.0) * crate::linalg::dot(z, &fs.ito_term);
    }
    for (j, c) in classes.iter().enumerate() {
        match *c {
            CoordinateClass::Free => {}
            CoordinateClass::Pinned if z[j] != F::zero() => return Ok(F::infinity()),
            CoordinateClass::Pinned => {}
            CoordinateClass::Weighted { kink, weight } => value += weight * (z[j] - kink).abs(),
            CoordinateClass::Linear { slope } => value += slope * z[j],
        }
    }
    Ok(value)
}

/// Frequency with which coordinate `coord` of the argmin sits at its kink.
pub fn limit_selection_prob_multivariate<F: Scalar, R: Rng + ?Sized>(
    mode: LimitMode,
    params: &LimitParams<F>,
    coord: usize,
    draws: usize,
    grid: &BrownianGrid<F>,
    rng: &mut R,
) -> Result<SelectionEstimate> {
    params.validate(mode)?;
    if coord >= params.k() {
        return Err(Error::Config(format!("coordinate {coord} out of range for k = {}", params.k())));
    }
    if grid.k() != params.k() {
        return Err(Error::Shape(format!("grid has k = {}, parameters k = {}", grid.k(), params.k())));
    }
    // Coordinates whose class does not depend on the draw are decided exactly.
    match mode {
        LimitMode::V => {
            let lambda0 = params.lambda0.finite().expect("validated");
            if lambda0 == F::zero() || params.beta0[coord].is_infinite() {
                return Ok(SelectionEstimate::exact(0.0));
            }
        }
        LimitMode::Vtilde => match params.tilde_beta0[coord] {
            b if b.is_zero() => return Ok(SelectionEstimate::exact(1.0)),
            b if b.is_infinite() => return Ok(SelectionEstimate::exact(0.0)),
            _ => {}
        },
        LimitMode::Vbar => match params.bar_beta0[coord] {
            b if b.is_zero() && params.beta0[coord].is_zero() => return Ok(SelectionEstimate::exact(1.0)),
            b if !b.is_zero() => return Ok(SelectionEstimate::exact(0.0)),
            _ => {}
        },
    }
    let sampler = FunctionalSampler::new(grid, &params.delta_vu, FunctionalVariant::UnitRoot)?;
    count_parallel(&sampler, draws, rng.next_u64(), |fs| {
        let draw = sample_limit_multivariate(mode, params, fs, F::of(1e-12))?;
        Ok(draw.at_kink[coord])
    })
}
