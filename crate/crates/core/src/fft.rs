//! Square 2-D FFTs built from batched 1-D `rustfft` plans.
//!
//! The forward transform leaves the spectrum transposed (`[kx][ky]`), and the
//! inverse expects that layout. Every spectral multiplier in this crate depends
//! only on `kx² + ky²` or is white noise, so the layout never needs undoing.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

#[derive(Clone)]
pub(crate) struct Fft2<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Real> Fft2<T> {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch: vec![Complex::new(T::zero(), T::zero()); len],
        }
    }

    /// Unnormalized forward transform; output is in transposed layout.
    pub(crate) fn forward(&mut self, data: &mut [Complex<T>]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.forward.process_with_scratch(data, &mut self.scratch);
        transpose_in_place(data, self.n);
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// Inverse of [`Fft2::forward`], including the 1/n² normalization.
    #[cfg(test)]
    pub(crate) fn inverse(&mut self, data: &mut [Complex<T>]) {
        self.inverse_unnormalized(data);
        let norm = T::one() / T::of_usize(self.n * self.n);
        for v in data.iter_mut() {
            *v = *v * norm;
        }
    }

    pub(crate) fn inverse_unnormalized(&mut self, data: &mut [Complex<T>]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        self.inverse.process_with_scratch(data, &mut self.scratch);
        transpose_in_place(data, self.n);
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }
}

fn transpose_in_place<V: Copy>(data: &mut [V], n: usize) {
    const BLOCK: usize = 32;
    for bi in (0..n).step_by(BLOCK) {
        for bj in (bi..n).step_by(BLOCK) {
            for i in bi..(bi + BLOCK).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + BLOCK).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}
