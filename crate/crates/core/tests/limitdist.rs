use coint_alasso::limitdist::{
    limit_objective, limit_selection_prob_conservative, limit_selection_prob_consistent,
    limit_selection_prob_multivariate, sample_limit_conservative, sample_limit_multivariate, BrownianGrid,
    FunctionalSample, FunctionalSampler, FunctionalVariant, LimitMode, LimitParams,
};
use coint_alasso::montecarlo::ecdf_ks;
use coint_alasso::rng::stream_rng;
use coint_alasso::{ExtendedReal, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Ext = ExtendedReal<f64>;

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn functional_moments_with_correlated_errors() {
    let omega = Matrix::from_rows(vec![vec![1.0, 0.5], vec![0.5, 2.0]]).unwrap();
    let grid = BrownianGrid::new(omega).unwrap().with_steps(1000);
    let sampler = FunctionalSampler::new(&grid, &[0.3], FunctionalVariant::UnitRoot).unwrap();
    let draws = sampler.batch(20_000, 11).unwrap();
    let zeta: Vec<f64> = draws.iter().map(|f| f.zeta_vv[(0, 0)]).collect();
    let ito: Vec<f64> = draws.iter().map(|f| f.ito_term[0]).collect();
    let (mz, sz) = mean_se(&zeta);
    // Left-endpoint sums: Ω_vv (N − 1) / (2N).
    let exact = 2.0 * 999.0 / 2000.0;
    assert!((mz - exact).abs() < 4.0 * sz, "E zeta {mz} vs {exact}");
    let (mi, si) = mean_se(&ito);
    assert!((mi - 0.3).abs() < 4.0 * si, "E ito {mi}");
    for f in draws.iter().take(100) {
        assert!((f.z[0] * f.zeta_vv[(0, 0)] - f.ito_term[0]).abs() < 1e-12);
    }
}

#[test]
fn grid_refinement_barely_moves_the_law() {
    let grid = BrownianGrid::<f64>::standard(1).with_steps(1000);
    let sampler = FunctionalSampler::new(&grid, &[0.0], FunctionalVariant::UnitRoot).unwrap();
    let pairs: Vec<(FunctionalSample<f64>, FunctionalSample<f64>)> = (0..20_000u64)
        .into_par_iter()
        .map(|i| sampler.draw_refined(10, &mut stream_rng(12, 0, i)).unwrap())
        .collect();
    let coarse: Vec<f64> = pairs.iter().map(|p| p.0.zeta_vv[(0, 0)]).collect();
    let fine: Vec<f64> = pairs.iter().map(|p| p.1.zeta_vv[(0, 0)]).collect();
    let ks = ecdf_ks(&coarse, &fine);
    assert!(ks < 0.01, "zeta KS {ks}");
    let cz: Vec<f64> = pairs.iter().map(|p| p.0.z[0]).collect();
    let fz: Vec<f64> = pairs.iter().map(|p| p.1.z[0]).collect();
    assert!(ecdf_ks(&cz, &fz) < 0.01);
}

fn ou_mean(c: f64) -> f64 {
    // E ∫ J² = ∫ (1 − e^{−2ct}) / (2c) dt.
    simpson(|t| (1.0 - (-2.0 * c * t).exp()) / (2.0 * c), 0.0, 1.0, 2000)
}

#[test]
fn ou_functional_matches_integrated_variance() {
    let exact = ou_mean(1.0);
    assert!((exact - (1.0 + (-2.0f64).exp()) / 4.0).abs() < 1e-12);
    let grid = BrownianGrid::<f64>::standard(1).with_steps(2000);
    let sampler = FunctionalSampler::new(&grid, &[0.0], FunctionalVariant::Ou { c: vec![1.0] }).unwrap();
    let zeta: Vec<f64> = sampler.batch(20_000, 13).unwrap().iter().map(|f| f.zeta_vv[(0, 0)]).collect();
    let (m, se) = mean_se(&zeta);
    assert!((m - exact).abs() < 4.0 * se + 1e-3, "{m} vs {exact}");
}

#[test]
fn strong_mean_reversion_shrinks_the_functional() {
    let c = 50.0;
    let grid = BrownianGrid::<f64>::standard(1).with_steps(10_000);
    let sampler = FunctionalSampler::new(&grid, &[0.0], FunctionalVariant::Ou { c: vec![c] }).unwrap();
    let zeta: Vec<f64> = sampler.batch(5000, 14).unwrap().iter().map(|f| f.zeta_vv[(0, 0)]).collect();
    let (m, _) = mean_se(&zeta);
    let exact = ou_mean(c);
    assert!((m / exact - 1.0).abs() < 0.03, "{m} vs {exact}");
    assert!(m < 0.05);
}

#[test]
fn conservative_atom_frequency_matches_selection_probability() {
    let grid = BrownianGrid::<f64>::standard(1).with_steps(1000);
    let sampler = FunctionalSampler::new(&grid, &[0.0], FunctionalVariant::UnitRoot).unwrap();
    let draws = sampler.batch(20_000, 15).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for lambda0 in [0.5, 1.0, 2.0] {
        for beta0 in [0.0, 1.0, -2.0] {
            let mixed: Vec<_> = draws
                .iter()
                .map(|f| sample_limit_conservative(lambda0, Ext::Finite(beta0), f).unwrap())
                .collect();
            let atoms = mixed.iter().filter(|d| d.atom).count();
            assert!(mixed.iter().filter(|d| d.atom).all(|d| d.value == -beta0));
            let freq = atoms as f64 / draws.len() as f64;
            let est =
                limit_selection_prob_conservative(lambda0, Ext::Finite(beta0), 20_000, &grid, &[0.0], &mut rng)
                    .unwrap();
            let se = (2.0f64).sqrt() * est.std_error.max(1e-3);
            assert!(
                (freq - est.p).abs() < 4.0 * se,
                "lambda0 {lambda0}, beta0 {beta0}: {freq} vs {}",
                est.p
            );
        }
    }
}

#[test]
fn multivariate_selection_reduces_to_univariate() {
    let grid = BrownianGrid::<f64>::standard(1).with_steps(1000);
    let tilde = 1.0;
    let uni = limit_selection_prob_consistent(Ext::Finite(tilde), 20_000, &grid, &mut ChaCha8Rng::seed_from_u64(17))
        .unwrap();
    let params = LimitParams::consistent(vec![Ext::PlusInf], vec![Ext::Finite(tilde)], vec![Ext::zero()], vec![0.0]);
    let multi =
        limit_selection_prob_multivariate(LimitMode::Vtilde, &params, 0, 20_000, &grid, &mut ChaCha8Rng::seed_from_u64(17))
            .unwrap();
    assert!((uni.p - multi.p).abs() < 0.01, "{} vs {}", uni.p, multi.p);

    let uni = limit_selection_prob_conservative(1.0, Ext::Finite(0.5), 20_000, &grid, &[0.0], &mut ChaCha8Rng::seed_from_u64(18))
        .unwrap();
    let params = LimitParams::conservative(1.0, vec![Ext::Finite(0.5)], vec![0.0]);
    let multi =
        limit_selection_prob_multivariate(LimitMode::V, &params, 0, 20_000, &grid, &mut ChaCha8Rng::seed_from_u64(18))
            .unwrap();
    assert!((uni.p - multi.p).abs() < 0.01, "{} vs {}", uni.p, multi.p);
}

#[test]
fn multivariate_argmin_is_certified() {
    let omega = Matrix::from_rows(vec![
        vec![1.0, 0.3, -0.2, 0.1],
        vec![0.3, 1.5, 0.4, 0.0],
        vec![-0.2, 0.4, 1.0, 0.3],
        vec![0.1, 0.0, 0.3, 0.8],
    ])
    .unwrap();
    let grid = BrownianGrid::new(omega).unwrap().with_steps(500);
    let delta = vec![0.1, -0.2, 0.05];
    let sampler = FunctionalSampler::new(&grid, &delta, FunctionalVariant::UnitRoot).unwrap();
    let inf = Ext::PlusInf;
    let cases = [
        (
            LimitMode::V,
            LimitParams::conservative(1.0, vec![Ext::zero(), Ext::Finite(1.0), inf], delta.clone()),
        ),
        (
            LimitMode::Vtilde,
            LimitParams::consistent(
                vec![Ext::zero(), inf, inf],
                vec![Ext::zero(), Ext::Finite(0.7), inf],
                vec![Ext::zero(), Ext::zero(), inf],
                delta.clone(),
            ),
        ),
        (
            LimitMode::Vbar,
            LimitParams::consistent(
                vec![Ext::zero(), inf, Ext::MinusInf],
                vec![Ext::zero(), inf, Ext::MinusInf],
                vec![Ext::zero(), Ext::Finite(2.0), Ext::MinusInf],
                delta.clone(),
            ),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for (mode, params) in &cases {
        params.validate(*mode).unwrap();
        for _ in 0..20 {
            let fs = sampler.draw(&mut rng).unwrap();
            let sol = sample_limit_multivariate(*mode, params, &fs, 1e-12).unwrap();
            assert!(sol.kkt_residual <= 1e-12);
            let best = limit_objective(*mode, params, &fs, &sol.z).unwrap();
            assert!(best.is_finite());
            for _ in 0..100 {
                let scale = 10f64.powf(rng.random_range(-6.0..0.0));
                let probe: Vec<f64> = sol.z.iter().map(|z| z + scale * rng.random_range(-1.0..1.0)).collect();
                let value = limit_objective(*mode, params, &fs, &probe).unwrap();
                assert!(value >= best - 1e-10 * best.abs().max(1.0), "{mode:?}: {value} < {best}");
            }
        }
    }
}
