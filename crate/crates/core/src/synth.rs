//! Seeded band-limited synthetic fields: test stresses and initial data with
//! prescribed symmetry class, band and amplitude. All randomness flows from
//! one 64-bit seed so reports are bit-reproducible.

use crate::spectral::{Field3, Grid, ScalarField, SpecField3, SymmetryClass, TensorField3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random band-limited scalar with zero mean, sup-norm close to 1.
pub fn synthetic_scalar(grid: Grid, k_max: i64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex64::default(); grid.len()];
    for lin in 0..grid.len() {
        let k = grid.wavevector(lin);
        if k == [0, 0, 0] {
            continue;
        }
        if k[0].abs() > k_max || k[1].abs() > k_max || k[2].abs() > k_max {
            continue;
        }
        // fill only the half with positive leading component; mirror below
        if (k[0], k[1], k[2]) > (0, 0, 0) || (k[0] == 0 && (k[1], k[2]) > (0, 0)) {
            spec[lin] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    // hermitian mirror
    let snapshot = spec.clone();
    for lin in 0..grid.len() {
        let k = grid.wavevector(lin);
        let neg = grid.spectral_index([-k[0], -k[1], -k[2]]);
        if snapshot[neg] != Complex64::default() && spec[lin] == Complex64::default() {
            spec[lin] = snapshot[neg].conj();
        }
    }
    let data = crate::spectral::fft::spectrum_to_real(&spec, grid.n);
    let peak = data.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    ScalarField { grid, data: data.iter().map(|v| v / peak).collect() }
}

/// Random scalar with power-law spectrum |f_hat| ~ |k|^(-slope); `slope` 3/2
/// puts equal weighted mass per octave under the inverse-gradient gain.
pub fn synthetic_scalar_pink(grid: Grid, k_max: i64, slope: f64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex64::default(); grid.len()];
    for lin in 0..grid.len() {
        let k = grid.wavevector(lin);
        if k == [0, 0, 0] {
            continue;
        }
        let kn = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        if kn > k_max as f64 {
            continue;
        }
        if (k[0], k[1], k[2]) > (0, 0, 0) || (k[0] == 0 && (k[1], k[2]) > (0, 0)) {
            let amp = kn.powf(-slope);
            spec[lin] =
                Complex64::new(amp * rng.gen_range(-1.0..1.0), amp * rng.gen_range(-1.0..1.0));
        }
    }
    let snapshot = spec.clone();
    for lin in 0..grid.len() {
        let k = grid.wavevector(lin);
        let neg = grid.spectral_index([-k[0], -k[1], -k[2]]);
        if snapshot[neg] != Complex64::default() && spec[lin] == Complex64::default() {
            spec[lin] = snapshot[neg].conj();
        }
    }
    let data = crate::spectral::fft::spectrum_to_real(&spec, grid.n);
    let peak = data.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    ScalarField { grid, data: data.iter().map(|v| v / peak).collect() }
}

/// Random skew tensor field, band-limited, max Frobenius norm = amplitude.
pub fn synthetic_skew(grid: Grid, k_max: i64, amplitude: f64, seed: u64) -> TensorField3 {
    let a = [
        synthetic_scalar(grid, k_max, seed.wrapping_mul(3).wrapping_add(1)),
        synthetic_scalar(grid, k_max, seed.wrapping_mul(3).wrapping_add(2)),
        synthetic_scalar(grid, k_max, seed.wrapping_mul(3).wrapping_add(3)),
    ];
    let mut t = TensorField3::zeros(grid, SymmetryClass::Skew);
    for i in 0..grid.len() {
        t.comps[3 * 0 + 1][i] = -a[2].data[i];
        t.comps[3 * 1 + 0][i] = a[2].data[i];
        t.comps[3 * 0 + 2][i] = a[1].data[i];
        t.comps[3 * 2 + 0][i] = -a[1].data[i];
        t.comps[3 * 1 + 2][i] = -a[0].data[i];
        t.comps[3 * 2 + 1][i] = a[0].data[i];
    }
    rescale(t, amplitude)
}

/// Random symmetric traceless tensor field with max Frobenius = amplitude.
pub fn synthetic_symmetric_traceless(
    grid: Grid,
    k_max: i64,
    amplitude: f64,
    seed: u64,
) -> TensorField3 {
    let s: Vec<ScalarField> = (0..6)
        .map(|j| synthetic_scalar(grid, k_max, seed.wrapping_mul(7).wrapping_add(j)))
        .collect();
    let mut t = TensorField3::zeros(grid, SymmetryClass::General);
    for i in 0..grid.len() {
        let d = [s[0].data[i], s[1].data[i], s[2].data[i]];
        let tr = (d[0] + d[1] + d[2]) / 3.0;
        t.comps[0][i] = d[0] - tr;
        t.comps[4][i] = d[1] - tr;
        t.comps[8][i] = d[2] - tr;
        t.comps[3 * 0 + 1][i] = s[3].data[i];
        t.comps[3 * 1 + 0][i] = s[3].data[i];
        t.comps[3 * 0 + 2][i] = s[4].data[i];
        t.comps[3 * 2 + 0][i] = s[4].data[i];
        t.comps[3 * 1 + 2][i] = s[5].data[i];
        t.comps[3 * 2 + 1][i] = s[5].data[i];
    }
    t.class = SymmetryClass::SymmetricTraceless;
    rescale(t, amplitude)
}

/// Random diagonal traceless tensor field (the reconstructible class of the
/// axis-aligned box frames).
pub fn synthetic_diagonal_traceless(
    grid: Grid,
    k_max: i64,
    amplitude: f64,
    seed: u64,
) -> TensorField3 {
    let s: Vec<ScalarField> = (0..2)
        .map(|j| synthetic_scalar(grid, k_max, seed.wrapping_mul(5).wrapping_add(j)))
        .collect();
    let mut t = TensorField3::zeros(grid, SymmetryClass::SymmetricTraceless);
    for i in 0..grid.len() {
        let a = s[0].data[i];
        let b = s[1].data[i];
        t.comps[0][i] = a;
        t.comps[4][i] = b;
        t.comps[8][i] = -a - b;
    }
    rescale(t, amplitude)
}

fn rescale(mut t: TensorField3, amplitude: f64) -> TensorField3 {
    let peak = t.linf().max(1e-300);
    let s = amplitude / peak;
    for c in t.comps.iter_mut() {
        for v in c.iter_mut() {
            *v *= s;
        }
    }
    t
}

/// Random mean-free divergence-free band-limited vector field with
/// L2 (mean convention) norm = amplitude.
pub fn synthetic_divfree(grid: Grid, k_max: i64, amplitude: f64, seed: u64) -> Field3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = SpecField3::zeros(grid);
    for lin in 0..grid.len() {
        let k = grid.wavevector(lin);
        if k == [0, 0, 0] || k[0].abs() > k_max || k[1].abs() > k_max || k[2].abs() > k_max {
            continue;
        }
        if (k[0], k[1], k[2]) > (0, 0, 0) || (k[0] == 0 && (k[1], k[2]) > (0, 0)) {
            let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
            let k2 = kf[0] * kf[0] + kf[1] * kf[1] + kf[2] * kf[2];
            let v = [
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            ];
            let kdotv = kf[0] * v[0] + kf[1] * v[1] + kf[2] * v[2];
            for c in 0..3 {
                spec.comps[c][lin] = v[c] - kf[c] * kdotv / k2;
            }
        }
    }
    let snapshot = spec.clone();
    for lin in 0..grid.len() {
        let k = grid.wavevector(lin);
        let neg = grid.spectral_index([-k[0], -k[1], -k[2]]);
        for c in 0..3 {
            if snapshot.comps[c][neg] != Complex64::default()
                && spec.comps[c][lin] == Complex64::default()
            {
                spec.comps[c][lin] = snapshot.comps[c][neg].conj();
            }
        }
    }
    let f = spec.to_field();
    let norm = f.l2_mean().max(1e-300);
    f.scaled(amplitude / norm)
}

/// Smooth compactly supported time envelope on (t0, t1), built from the C^4 ramp.
pub fn time_envelope(t0: f64, t1: f64) -> impl Fn(f64) -> f64 + Copy {
    move |t: f64| {
        if t <= t0 || t >= t1 {
            0.0
        } else {
            let x = (t - t0) / (t1 - t0);
            crate::amplitude::smoothstep9(2.0 * x.min(1.0 - x))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ops::divergence;

    #[test]
    fn synthetic_fields_have_declared_structure() {
        let grid = Grid::new(16).unwrap();
        let sk = synthetic_skew(grid, 2, 0.3, 1);
        assert!(sk.class_residual(SymmetryClass::Skew) < 1e-12);
        assert!((sk.linf() - 0.3).abs() < 1e-12);
        let st = synthetic_symmetric_traceless(grid, 2, 0.4, 2);
        assert!(st.class_residual(SymmetryClass::SymmetricTraceless) < 1e-12);
        let f = synthetic_divfree(grid, 3, 1.0, 3);
        assert!(divergence(&f).l2_mean() < 1e-10);
        assert!((f.l2_mean() - 1.0).abs() < 1e-12);
        let m = f.mean();
        assert!(m.iter().all(|v| v.abs() < 1e-12));
        // determinism
        let f2 = synthetic_divfree(grid, 3, 1.0, 3);
        assert_eq!(f.comps[0], f2.comps[0]);
    }
}
