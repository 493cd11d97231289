use coint_alasso::dgp::{
    gen_errors, gen_innovations, long_run_moments, CoefficientPath, InnovationSpec, LinearProcessSpec, ModelConfig,
};
use coint_alasso::limitdist::{BrownianGrid, FunctionalSampler, FunctionalVariant};
use coint_alasso::montecarlo::ecdf_ks;
use coint_alasso::rng::stream_rng;
use coint_alasso::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn mat(rows: Vec<Vec<f64>>) -> Matrix<f64> {
    Matrix::from_rows(rows).unwrap()
}

fn ma1() -> LinearProcessSpec<f64> {
    LinearProcessSpec {
        coeffs: vec![
            mat(vec![vec![1.0, 0.0], vec![0.3, 1.0]]),
            mat(vec![vec![0.4, -0.2], vec![0.5, 0.6]]),
        ],
        innovation: InnovationSpec::gaussian(mat(vec![vec![1.0, 0.3], vec![0.3, 2.0]])),
    }
}

#[test]
fn innovation_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let spec = InnovationSpec::gaussian(mat(vec![vec![1.0, 0.5], vec![0.5, 1.0]]));
    let n = 1_000_000;
    let e = gen_innovations(&spec, n, &mut rng).unwrap();
    let (mut s00, mut s01, mut s11) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let r = e.row(i);
        s00 += r[0] * r[0];
        s01 += r[0] * r[1];
        s11 += r[1] * r[1];
    }
    let nf = n as f64;
    assert!((s00 / nf - 1.0).abs() < 0.01);
    assert!((s11 / nf - 1.0).abs() < 0.01);
    let corr = s01 / (s00 * s11).sqrt();
    assert!((corr - 0.5).abs() < 0.01, "corr {corr}");
}

#[test]
fn linear_process_matches_direct_convolution() {
    let spec = ma1();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = 500;
    let eps = gen_innovations(&spec.innovation, t + 1, &mut rng).unwrap();
    let w = gen_errors(&spec, &eps, t).unwrap();
    let c = &spec.coeffs;
    for i in 0..t {
        for a in 0..2 {
            let mut direct = 0.0;
            for (j, cj) in c.iter().enumerate() {
                for b in 0..2 {
                    direct += cj[(a, b)] * eps[(i + 1 - j, b)];
                }
            }
            assert!((w[(i, a)] - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }
}

#[test]
fn long_run_covariance_matches_empirical_autocovariances() {
    let spec = ma1();
    let (omega, delta) = long_run_moments(&spec, false).unwrap();
    let c1 = spec.impact();
    let direct = c1.matmul(&spec.innovation.sigma).unwrap().matmul(&c1.transpose()).unwrap();
    assert!(omega.add(&direct.scale(-1.0)).unwrap().max_abs() < 1e-14);

    let n = 10_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let eps = gen_innovations(&spec.innovation, n + 1, &mut rng).unwrap();
    let w = gen_errors(&spec, &eps, n).unwrap();
    // Δ_vu = E(v_0 u_0) + E(v_0 u_1).
    let mut acc = 0.0;
    let mut sq = 0.0;
    for t in 0..n - 1 {
        let term = w[(t, 1)] * (w[(t, 0)] + w[(t + 1, 0)]);
        acc += term;
        sq += term * term;
    }
    let m = acc / (n - 1) as f64;
    // Generous standard error: ignores the positive serial correlation.
    let se = 3.0 * ((sq / (n - 1) as f64 - m * m) / (n - 1) as f64).sqrt();
    assert!((m - delta[0]).abs() < 4.0 * se, "empirical {m}, exact {}", delta[0]);

    let (_, pred) = long_run_moments(&spec, true).unwrap();
    let mut acc1 = 0.0;
    for t in 0..n - 1 {
        acc1 += w[(t, 1)] * w[(t + 1, 0)];
    }
    assert!((acc1 / (n - 1) as f64 - pred[0]).abs() < 4.0 * se);
}

#[test]
fn simulation_is_deterministic() {
    let cfg = ModelConfig::standard(CoefficientPath::fixed(vec![0.5, -0.2])).unwrap();
    let a = cfg.simulate(100, 1.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = cfg.simulate(100, 1.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a.y, b.y);
    assert_eq!(a.x, b.x);
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    a.write_csv(&mut ca).unwrap();
    b.write_csv(&mut cb).unwrap();
    assert_eq!(ca, cb);
    assert!(String::from_utf8(ca).unwrap().starts_with("t,y,x1,x2,u,v1,v2\n"));
}

#[test]
fn scaled_regressor_gram_follows_integrated_brownian_law() {
    let cfg = ModelConfig::standard(CoefficientPath::fixed(vec![0.0])).unwrap();
    let t = 10_000;
    let reps = 10_000;
    let finite: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let path = cfg.simulate(t, 1.0, &mut stream_rng(4, 1, r)).unwrap();
            let x = path.x.col(0);
            x.iter().map(|v| v * v).sum::<f64>() / (t as f64 * t as f64)
        })
        .collect();
    let sampler = FunctionalSampler::new(&BrownianGrid::standard(1), &[0.0], FunctionalVariant::UnitRoot).unwrap();
    let limit: Vec<f64> = sampler.batch(reps, 5).unwrap().iter().map(|f| f.zeta_vv[(0, 0)]).collect();
    let ks = ecdf_ks(&finite, &limit);
    assert!(ks < 0.02, "KS {ks}");
}
