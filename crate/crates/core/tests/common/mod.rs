#![allow(dead_code)]

use modeflux::{ChannelEnsemble, CouplingMatrix, ModeState};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn states(v: &[i32]) -> Vec<ModeState> {
    v.iter().map(|&s| ModeState(s)).collect()
}

/// Random passive matrices with a dominant diagonal and leakage that decays with |k − i|.
pub fn synthetic_ensemble(max_state: u32, count: usize, seed: u64) -> ChannelEnsemble {
    let st = ModeState::range(max_state);
    let n = st.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mats = (0..count)
        .map(|_| {
            let mut alpha = vec![Complex64::new(0.0, 0.0); n * n];
            for k in 0..n {
                let mut row: Vec<f64> = (0..n)
                    .map(|i| {
                        let d = (k as f64 - i as f64).abs();
                        rng.random::<f64>() * (-1.2 * d).exp() * if d == 0.0 { 4.0 } else { 1.0 }
                    })
                    .collect();
                let total: f64 = row.iter().sum::<f64>() * (1.0 + 0.2 * rng.random::<f64>());
                for v in &mut row {
                    *v /= total;
                }
                for i in 0..n {
                    alpha[k * n + i] = Complex64::from_polar(row[i].sqrt(), rng.random::<f64>() * 6.283);
                }
            }
            CouplingMatrix::new(st.clone(), alpha).unwrap()
        })
        .collect();
    ChannelEnsemble::from_matrices(mats).unwrap()
}
