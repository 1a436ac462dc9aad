use modeflux::detection::{
    count_moments, laguerre_cf, laguerre_pmf, laguerre_pmf_series, noise_variances, poisson_pmf,
    sample_detected_count,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn truncation(m_s: f64, m_c: f64) -> usize {
    let (mean, var) = count_moments(m_s, m_c, 0.0);
    (mean + 40.0 * var.sqrt()).ceil() as usize + 10
}

#[test]
fn pmf_normalizes_on_lattice() {
    let lattice = [0.1, 1.0, 10.0, 100.0];
    for &m_s in &lattice {
        for &m_c in &lattice {
            let p = laguerre_pmf_series(truncation(m_s, m_c), m_s, m_c).unwrap();
            let total: f64 = p.iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "({m_s}, {m_c}): {total}");
            assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

/// First and second derivatives at 0 by Richardson-extrapolated central differences.
fn cf_moments(m_s: f64, m_c: f64) -> (f64, f64) {
    let (mean, var) = count_moments(m_s, m_c, 0.0);
    let h = 1e-2 / (1.0 + mean + var.sqrt());
    let d1 = |h: f64| (laguerre_cf(h, m_s, m_c) - laguerre_cf(-h, m_s, m_c)) / (2.0 * h);
    let d2 = |h: f64| {
        (laguerre_cf(h, m_s, m_c) - 2.0 * laguerre_cf(0.0, m_s, m_c) + laguerre_cf(-h, m_s, m_c)) / (h * h)
    };
    let first: Complex64 = (4.0 * d1(h / 2.0) - d1(h)) / 3.0;
    let second: Complex64 = (4.0 * d2(h / 2.0) - d2(h)) / 3.0;
    // Ψ'(0) = j·E[n], Ψ''(0) = −E[n²]
    let m1 = first.im;
    let m2 = -second.re;
    (m1, m2 - m1 * m1)
}

#[test]
fn cf_derivatives_match_closed_form_moments() {
    for &(m_s, m_c) in &[(3.0, 2.0), (0.1, 0.1), (10.0, 1.0), (100.0, 10.0), (1.0, 100.0), (5.0, 0.0)] {
        let (mean, var) = count_moments(m_s, m_c, 0.0);
        let (m, v) = cf_moments(m_s, m_c);
        assert!((m - mean).abs() < 1e-6 * mean, "mean ({m_s}, {m_c}): {m} vs {mean}");
        assert!((v - var).abs() < 1e-6 * var, "variance ({m_s}, {m_c}): {v} vs {var}");
    }
}

#[test]
fn poisson_limit() {
    for m_c in [1e-3, 1e-6, 1e-9] {
        let p = laguerre_pmf_series(60, 5.0, m_c).unwrap();
        let sup = p
            .iter()
            .enumerate()
            .map(|(n, v)| (v - poisson_pmf(n as i64, 5.0).unwrap()).abs())
            .fold(0.0, f64::max);
        if m_c <= 1e-6 {
            assert!(sup < 1e-6, "m_c = {m_c}: {sup}");
        } else {
            assert!(sup < 1e-2, "m_c = {m_c}: {sup}");
        }
    }
    assert_eq!(laguerre_pmf(4, 2.0, 0.0).unwrap(), poisson_pmf(4, 2.0).unwrap());
}

#[test]
fn noise_terms_reproduce_count_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let m_s = rng.random::<f64>() * 50.0;
        let m_c = rng.random::<f64>() * 20.0;
        let th = rng.random::<f64>() * 100.0;
        let (zs, z0) = noise_variances(m_c, th);
        // n = m_s + √m_s·Z_s + Z_0 has mean m_s and variance m_s·σ_Zs² + σ_Z0²;
        // adding back the removed bias m_c gives the detected-count moments
        let (mean, var) = count_moments(m_s, m_c, th);
        assert!((m_s + m_c - mean).abs() < 1e-12 * mean.max(1.0));
        assert!((m_s * zs + z0 - var).abs() < 1e-12 * var);
    }
}

#[test]
fn sampler_matches_model_moments() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws = 100_000;
    for point in 0..10 {
        let mu = 1.0;
        let rho_i = 1.0 + 4.0 * rng.random::<f64>();
        let alpha_ii = Complex64::from_polar(0.5 + 0.5 * rng.random::<f64>(), 6.0 * rng.random::<f64>());
        let rho: Vec<f64> = (0..7).map(|_| 0.5 + 2.0 * rng.random::<f64>()).collect();
        let var_k: Vec<f64> = (0..7).map(|_| 0.2 * rng.random::<f64>()).collect();
        let th = 30.0 * rng.random::<f64>();

        let m_s = mu * rho_i * rho_i * alpha_ii.norm_sqr();
        let m_c: f64 = mu * rho.iter().zip(&var_k).map(|(r, v)| r * r * v).sum::<f64>();
        let (mean, var) = count_moments(m_s, m_c, th);

        let samples: Vec<f64> = (0..draws)
            .map(|_| {
                let alpha: Vec<Complex64> = var_k
                    .iter()
                    .map(|v| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(re, im) * (v / 2.0).sqrt()
                    })
                    .collect();
                sample_detected_count(rho_i, alpha_ii, &rho, &alpha, mu, th, &mut rng).unwrap()
            })
            .collect();
        let n = draws as f64;
        let m = samples.iter().sum::<f64>() / n;
        let v = samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        let m4 = samples.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
        let se_mean = (v / n).sqrt();
        let se_var = ((m4 - v * v) / n).sqrt();
        assert!((m - mean).abs() < 3.0 * se_mean, "point {point}: mean {m} vs {mean}");
        assert!((v - var).abs() < 3.0 * se_var, "point {point}: var {v} vs {var}");
    }
}

#[test]
fn sampler_poisson_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 100_000;
    let s: f64 = (0..n)
        .map(|_| sample_detected_count(1.0, Complex64::new(7f64.sqrt(), 0.0), &[], &[], 1.0, 0.0, &mut rng).unwrap())
        .sum();
    let mean = s / n as f64;
    assert!((mean - 7.0).abs() < 3.0 * (7.0 / n as f64).sqrt());
}
