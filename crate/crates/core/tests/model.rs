use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risync::harness::small_instance;
use risync::linalg::{lambda_max_hermitian, CMat};
use risync::mm::{
    mse_bar, mse_full, optimal_equalizer, run_mm, MajorizerBound, MmOptions, PhaseSolution,
    StopMetric, Surrogate,
};
use risync::oracle;
use risync::sysmodel::qpsk_symbols;

fn phases(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect()
}

#[test]
fn fast_path_matches_dense_across_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (n, k, l0, lg, q) in [(2, 2, 2, 1, 2), (3, 1, 3, 2, 1), (2, 3, 2, 1, 3)] {
        let (ch, m) = small_instance(17, n, k, l0, lg, q, 3.0).unwrap();
        let theta = phases(&mut rng, m.num_phases());
        let dense = oracle::dense_effective_channel(&m, &theta).unwrap();
        assert!(oracle::rel_err(&m.effective_channel(&theta), &dense) < 1e-12);
        let l = m.l();
        let hwf = oracle::dense_h(&ch, l) * oracle::dense_w(&theta, l) * oracle::dense_f(&ch, l);
        let heq = oracle::dense_h_eq(&ch.cascade(), l) * oracle::dense_theta(&theta, l);
        assert!(oracle::rel_err(&hwf, &heq) < 1e-12);
        let fast = mse_bar(&m, &theta).unwrap();
        let slow = oracle::dense_mse_bar(&m, &theta).unwrap();
        assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1.0));
    }
}

#[test]
fn noiseless_reception_is_the_effective_channel() {
    let (_, m) = small_instance(4, 2, 2, 3, 1, 2, 6.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let theta = phases(&mut rng, m.num_phases());
    let s = qpsk_symbols(&mut rng, m.l(), m.es);
    let mut silent = m.clone();
    silent.sigma2 = 0.0;
    let r = silent.simulate_received(&s, &theta, &mut rng).unwrap();
    let sv = CMat::from_column_slice(s.len(), 1, &s);
    let expect = m.effective_channel(&theta) * sv * Complex64::new(m.es.sqrt().recip(), 0.0);
    for (a, b) in r.iter().zip(expect.iter()) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn spectral_lambda_is_the_gram_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..10 {
        let (_, m) = small_instance(seed, 2, 2, 2, 1, 2, 0.0).unwrap();
        let theta = phases(&mut rng, m.num_phases());
        let s = Surrogate::with_bound(&m, &theta, MajorizerBound::Spectral, 1.0).unwrap();
        let gram = oracle::dense_gram(&m, &s.lin.f).unwrap();
        let expect = m.es * lambda_max_hermitian(&gram);
        assert!(
            (s.lambda - expect).abs() <= 1e-9 * expect,
            "{} vs {expect}",
            s.lambda
        );
        let norm1 = Surrogate::at(&m, &theta).unwrap().lambda;
        assert!(s.lambda <= norm1 * (1.0 + 1e-12));
    }
}

#[test]
fn spectral_bound_keeps_monotone_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for seed in 0..10 {
        let (_, m) = small_instance(seed, 2, 2, 2, 1, 2, 10.0).unwrap();
        let init = PhaseSolution::new(phases(&mut rng, m.num_phases())).unwrap();
        let opts = MmOptions {
            bound: MajorizerBound::Spectral,
            tol: 0.0,
            max_iters: 200,
            ..MmOptions::default()
        };
        let res = run_mm(&init, &m, &opts).unwrap();
        assert!(res.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }
}

#[test]
fn single_element_converges_immediately() {
    let (_, m) = small_instance(3, 1, 1, 2, 1, 2, 0.0).unwrap();
    let res = run_mm(&PhaseSolution::ones(1), &m, &MmOptions::default()).unwrap();
    assert!(res.converged);
    assert!(res.iterations <= 2);
}

#[test]
fn mse_metric_runs_at_least_as_long() {
    let (_, m) = small_instance(8, 2, 2, 2, 1, 2, 15.0).unwrap();
    let init = PhaseSolution::new(vec![Complex64::new(1.0, 0.0); m.num_phases()]).unwrap();
    let by_bar = run_mm(&init, &m, &MmOptions::default()).unwrap();
    let by_mse = run_mm(
        &init,
        &m,
        &MmOptions {
            stop: StopMetric::Mse,
            ..MmOptions::default()
        },
    )
    .unwrap();
    assert!(by_mse.iterations >= by_bar.iterations);
    assert!(by_mse.mse_final <= by_bar.mse_final + 1e-12);
}

#[test]
fn equalizer_output_matches_full_mse() {
    let (_, m) = small_instance(12, 2, 2, 2, 1, 2, 0.0).unwrap();
    let theta = vec![Complex64::new(1.0, 0.0); m.num_phases()];
    let x = m.effective_channel(&theta);
    let g = optimal_equalizer(&x, &m.window, m.es, m.sigma2).unwrap();
    let full = mse_full(&m, &theta, &g).unwrap();
    assert!((full - (m.mse0() - mse_bar(&m, &theta).unwrap())).abs() < 1e-10);
}
