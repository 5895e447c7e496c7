//! Shared 3D FFT plumbing over rustfft, x-fastest layout.
//!
//! Convention: `forward` produces coefficients of e^{i k.x} with integer k,
//! i.e. u(x) = sum_k u_hat(k) e^{i k.x}; forward carries the 1/n^3 factor.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Integer wavenumber for grid index i on an n-point axis (range [-n/2, n/2)).
#[inline]
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Grid index holding wavenumber k on an n-point axis.
#[inline]
pub fn index_of_wavenumber(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

#[inline]
pub fn idx3(i: usize, j: usize, k: usize, n: usize) -> usize {
    i + n * (j + n * k)
}

/// Below this size the per-line rayon dispatch costs more than it saves.
const PARALLEL_MIN_N: usize = 32;

fn transform_axis(data: &mut [Complex64], n: usize, axis: usize, inverse: bool) {
    let fft = plan(n, inverse);
    let nn = n * n;
    if axis == 0 {
        if n >= PARALLEL_MIN_N {
            data.par_chunks_mut(n).for_each_init(
                || vec![Complex64::default(); fft.get_inplace_scratch_len()],
                |scratch, row| fft.process_with_scratch(row, scratch),
            );
        } else {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            for row in data.chunks_mut(n) {
                fft.process_with_scratch(row, &mut scratch);
            }
        }
        return;
    }
    let stride = if axis == 1 { n } else { nn };
    // enumerate line origins: axis 1 -> (i, k) fixed; axis 2 -> (i, j) fixed
    let origins: Vec<usize> = if axis == 1 {
        (0..n).flat_map(|k| (0..n).map(move |i| i + nn * k)).collect()
    } else {
        (0..n).flat_map(|j| (0..n).map(move |i| i + n * j)).collect()
    };
    if n >= PARALLEL_MIN_N {
        let results: Vec<(usize, Vec<Complex64>)> = origins
            .par_iter()
            .map(|&o| {
                let mut buf: Vec<Complex64> = (0..n).map(|s| data[o + stride * s]).collect();
                let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
                fft.process_with_scratch(&mut buf, &mut scratch);
                (o, buf)
            })
            .collect();
        for (o, buf) in results {
            for (s, v) in buf.into_iter().enumerate() {
                data[o + stride * s] = v;
            }
        }
    } else {
        let mut buf = vec![Complex64::default(); n];
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for &o in &origins {
            for s in 0..n {
                buf[s] = data[o + stride * s];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for s in 0..n {
                data[o + stride * s] = buf[s];
            }
        }
    }
}

/// In-place forward 3D transform with 1/n^3 normalization.
pub fn fft3_forward(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n * n);
    for axis in 0..3 {
        transform_axis(data, n, axis, false);
    }
    let scale = 1.0 / (n as f64).powi(3);
    data.iter_mut().for_each(|v| *v *= scale);
}

/// In-place inverse 3D transform (no scaling; inverse of `fft3_forward`).
pub fn fft3_inverse(data: &mut [Complex64], n: usize) {
    debug_assert_eq!(data.len(), n * n * n);
    for axis in 0..3 {
        transform_axis(data, n, axis, true);
    }
}

/// Forward transform of real samples.
pub fn real_to_spectrum(samples: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft3_forward(&mut buf, n);
    buf
}

/// Inverse transform keeping the real part (imaginary residue is discarded;
/// inputs produced from real fields keep it at rounding level).
pub fn spectrum_to_real(spec: &[Complex64], n: usize) -> Vec<f64> {
    let mut buf = spec.to_vec();
    fft3_inverse(&mut buf, n);
    buf.iter().map(|v| v.re).collect()
}

/// 1D forward FFT with 1/n normalization (profile coefficient extraction).
pub fn fft1_forward(data: &mut [Complex64]) {
    let n = data.len();
    let fft = plan(n, false);
    fft.process(data);
    let scale = 1.0 / n as f64;
    data.iter_mut().for_each(|v| *v *= scale);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_mode_placement() {
        let n = 16;
        let mut samples = vec![0.0; n * n * n];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let x = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    let y = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                    samples[idx3(i, j, k, n)] = (x).cos() + 2.0 * (3.0 * y).sin();
                }
            }
        }
        let spec = real_to_spectrum(&samples, n);
        // cos(x) -> 1/2 at k=(1,0,0) and (-1,0,0)
        let at = |kx: i64, ky: i64, kz: i64| {
            spec[idx3(
                index_of_wavenumber(kx, n),
                index_of_wavenumber(ky, n),
                index_of_wavenumber(kz, n),
                n,
            )]
        };
        assert!((at(1, 0, 0).re - 0.5).abs() < 1e-12);
        // 2 sin(3y) -> -i at k=(0,3,0)
        assert!((at(0, 3, 0).im + 1.0).abs() < 1e-12);
        let back = spectrum_to_real(&spec, n);
        let err = samples
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
