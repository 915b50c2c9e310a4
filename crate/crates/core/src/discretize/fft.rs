//! Multi-dimensional FFT built from 1-D `rustfft` passes.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

/// In-place unnormalized DFT over a row-major array.
pub fn fftn(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    fftn_with(data, shape, &plan_axes(shape, inverse));
}

/// One 1-D plan per axis of `shape`.
pub fn plan_axes(shape: &[usize], inverse: bool) -> Vec<Arc<dyn Fft<f64>>> {
    let mut planner = FftPlanner::<f64>::new();
    shape
        .iter()
        .map(|&len| {
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .collect()
}

/// [`fftn`] with precomputed per-axis plans.
pub fn fftn_with(data: &mut [Complex64], shape: &[usize], plans: &[Arc<dyn Fft<f64>>]) {
    let mut line = Vec::new();
    for axis in 0..shape.len() {
        let len = shape[axis];
        if len < 2 {
            continue;
        }
        let fft = &plans[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        if stride == 1 {
            for chunk in data.chunks_exact_mut(len) {
                fft.process(chunk);
            }
            continue;
        }
        line.resize(len, Complex64::new(0.0, 0.0));
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * len * stride + inner;
                for k in 0..len {
                    line[k] = data[base + k * stride];
                }
                fft.process(&mut line);
                for k in 0..len {
                    data[base + k * stride] = line[k];
                }
            }
        }
    }
}

/// Angular frequencies `2 pi k / (N h)` of an `N`-point axis, in DFT order.
pub fn axis_frequencies(len: usize, h: f64) -> Vec<f64> {
    let period = len as f64 * h;
    (0..len)
        .map(|k| {
            let kk = if k <= len / 2 {
                k as f64
            } else {
                k as f64 - len as f64
            };
            2.0 * PI * kk / period
        })
        .collect()
}

/// `|xi|` for every DFT bin of the grid.
pub fn frequency_magnitudes(shape: &[usize], h: &[f64]) -> Vec<f64> {
    let axes: Vec<Vec<f64>> = shape
        .iter()
        .zip(h)
        .map(|(&n, &h)| axis_frequencies(n, h))
        .collect();
    let total: usize = shape.iter().product();
    let mut out = vec![0.0; total];
    let mut idx = vec![0usize; shape.len()];
    for slot in out.iter_mut() {
        let r2: f64 = idx
            .iter()
            .enumerate()
            .map(|(a, &i)| axes[a][i] * axes[a][i])
            .sum();
        *slot = r2.sqrt();
        let mut a = shape.len();
        while a > 0 {
            a -= 1;
            idx[a] += 1;
            if idx[a] < shape[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d() {
        let shape = [6, 5];
        let orig: Vec<Complex64> = (0..30)
            .map(|i| Complex64::new(i as f64 * 0.3, (i % 4) as f64))
            .collect();
        let mut d = orig.clone();
        fftn(&mut d, &shape, false);
        fftn(&mut d, &shape, true);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a / 30.0 - b).norm() < 1e-12);
        }
    }

    #[test]
    fn frequencies_are_symmetric() {
        let f = axis_frequencies(8, 0.25);
        assert_eq!(f[0], 0.0);
        assert!((f[1] + f[7]).abs() < 1e-15);
        assert!((f[4] - PI / 0.25).abs() < 1e-12);
    }
}
