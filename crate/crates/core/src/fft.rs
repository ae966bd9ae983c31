//! Thin helpers over `rustfft` for real input.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::scalar::Real;

pub(crate) fn forward_real<T: Real>(x: &[T]) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
    forward(&mut buf);
    buf
}

pub(crate) fn forward<T: Real>(buf: &mut [Complex<T>]) {
    if buf.is_empty() {
        return;
    }
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// Unnormalised inverse transform.
pub(crate) fn inverse<T: Real>(buf: &mut [Complex<T>]) {
    if buf.is_empty() {
        return;
    }
    let mut planner = FftPlanner::<T>::new();
    planner.plan_fft_inverse(buf.len()).process(buf);
}
