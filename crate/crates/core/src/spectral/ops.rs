//! Spectral operators: derivatives, projections, fractional dissipation,
//! semigroup, and the two inverse-divergence potentials.

use super::fft::{real_to_spectrum, spectrum_to_real};
use super::{Field3, ScalarField, SpecField3, SymmetryClass, TensorField3};
use crate::error::{Error, Result};
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
fn ksq(k: [i64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
}

/// True when any wavevector component sits on the Nyquist line; odd-order
/// derivative multipliers zero these modes to stay conjugate-symmetric.
#[inline]
fn on_nyquist(k: [i64; 3], n: usize) -> bool {
    let ny = (n / 2) as i64;
    k[0] == -ny || k[1] == -ny || k[2] == -ny || k[0] == ny || k[1] == ny || k[2] == ny
}

/// Spectral gradient of a scalar.
pub fn gradient(f: &ScalarField) -> Field3 {
    let spec = real_to_spectrum(&f.data, f.grid.n);
    let mut out = SpecField3::zeros(f.grid);
    for (lin, v) in spec.iter().enumerate() {
        let k = f.grid.wavevector(lin);
        if on_nyquist(k, f.grid.n) {
            continue;
        }
        for a in 0..3 {
            out.comps[a][lin] = I * k[a] as f64 * v;
        }
    }
    out.to_field()
}

/// Spectral divergence of a vector field.
pub fn divergence(f: &Field3) -> ScalarField {
    let spec = f.to_spectrum();
    let mut out = vec![Complex64::default(); f.grid.len()];
    for lin in 0..f.grid.len() {
        let k = f.grid.wavevector(lin);
        if on_nyquist(k, f.grid.n) {
            continue;
        }
        out[lin] = I
            * (k[0] as f64 * spec.comps[0][lin]
                + k[1] as f64 * spec.comps[1][lin]
                + k[2] as f64 * spec.comps[2][lin]);
    }
    ScalarField { grid: f.grid, data: spectrum_to_real(&out, f.grid.n) }
}

/// Spectral curl.
pub fn curl(f: &Field3) -> Field3 {
    let spec = f.to_spectrum();
    let mut out = SpecField3::zeros(f.grid);
    for lin in 0..f.grid.len() {
        let k = f.grid.wavevector(lin);
        if on_nyquist(k, f.grid.n) {
            continue;
        }
        let (kx, ky, kz) = (k[0] as f64, k[1] as f64, k[2] as f64);
        let u = [spec.comps[0][lin], spec.comps[1][lin], spec.comps[2][lin]];
        out.comps[0][lin] = I * (ky * u[2] - kz * u[1]);
        out.comps[1][lin] = I * (kz * u[0] - kx * u[2]);
        out.comps[2][lin] = I * (kx * u[1] - ky * u[0]);
    }
    out.to_field()
}

/// Row-wise divergence of a tensor: (div T)_i = d_j T_ij.
pub fn tensor_divergence(t: &TensorField3) -> Field3 {
    let mut out = SpecField3::zeros(t.grid);
    for a in 0..3 {
        for b in 0..3 {
            let spec = real_to_spectrum(&t.comps[3 * a + b], t.grid.n);
            for (lin, v) in spec.iter().enumerate() {
                let k = t.grid.wavevector(lin);
                if on_nyquist(k, t.grid.n) {
                    continue;
                }
                out.comps[a][lin] += I * k[b] as f64 * v;
            }
        }
    }
    out.to_field()
}

/// Divergence-free projection Id - grad inv_lap div; annihilates gradients,
/// acts as the identity on divergence-free fields, removes the mean.
pub fn leray_project(f: &Field3) -> Field3 {
    let spec = f.to_spectrum();
    let mut out = SpecField3::zeros(f.grid);
    for lin in 0..f.grid.len() {
        let k = f.grid.wavevector(lin);
        let k2 = ksq(k);
        if k2 == 0.0 {
            continue;
        }
        let u = [spec.comps[0][lin], spec.comps[1][lin], spec.comps[2][lin]];
        let kdotu = k[0] as f64 * u[0] + k[1] as f64 * u[1] + k[2] as f64 * u[2];
        for a in 0..3 {
            out.comps[a][lin] = u[a] - k[a] as f64 * kdotu / k2;
        }
    }
    out.to_field()
}

/// Fourier multiplier |k|^(2 alpha); the zero mode is annihilated.
pub fn frac_laplacian(f: &Field3, alpha: f64) -> Field3 {
    let mut spec = f.to_spectrum();
    spec.apply_multiplier(|k| {
        let k2 = ksq(k);
        if k2 == 0.0 {
            0.0
        } else {
            k2.powf(alpha)
        }
    });
    spec.to_field()
}

/// Dissipative semigroup multiplier e^(-nu t |k|^(2 alpha)); zero mode kept.
pub fn semigroup_apply(f: &Field3, nu: f64, t: f64, alpha: f64) -> Field3 {
    let mut spec = f.to_spectrum();
    spec.apply_multiplier(|k| {
        let k2 = ksq(k);
        (-nu * t * k2.powf(alpha)).exp()
    });
    spec.to_field()
}

pub fn semigroup_apply_spec(spec: &mut SpecField3, nu: f64, t: f64, alpha: f64) {
    spec.apply_multiplier(|k| {
        let k2 = ksq(k);
        (-nu * t * k2.powf(alpha)).exp()
    });
}

/// Removes the spatial mean.
pub fn remove_mean(f: &Field3) -> Field3 {
    let m = f.mean();
    let mut out = f.clone();
    for a in 0..3 {
        for v in out.comps[a].iter_mut() {
            *v -= m[a];
        }
    }
    out
}

/// Sharp projection onto modes with |k| >= k_min (Euclidean length).
pub fn highpass(f: &Field3, k_min: f64) -> Field3 {
    let mut spec = f.to_spectrum();
    spec.apply_multiplier(|k| if ksq(k).sqrt() >= k_min { 1.0 } else { 0.0 });
    spec.to_field()
}

pub fn highpass_scalar(f: &ScalarField, k_min: f64) -> ScalarField {
    let mut spec = f.to_spectrum();
    spec.apply_multiplier(|k| if ksq(k).sqrt() >= k_min { 1.0 } else { 0.0 });
    spec.to_field()
}

/// Projection onto nonzero modes of a scalar.
pub fn remove_mean_scalar(f: &ScalarField) -> ScalarField {
    let m = f.mean();
    ScalarField { grid: f.grid, data: f.data.iter().map(|v| v - m).collect() }
}

/// |grad|^(-1) on nonzero modes (zero mode annihilated).
pub fn inv_grad_scalar(f: &ScalarField) -> ScalarField {
    let mut spec = f.to_spectrum();
    spec.apply_multiplier(|k| {
        let k2 = ksq(k);
        if k2 == 0.0 {
            0.0
        } else {
            1.0 / k2.sqrt()
        }
    });
    spec.to_field()
}

fn mean_magnitude(f: &Field3) -> (f64, f64) {
    let m = f.mean();
    let mean_norm = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
    (mean_norm, f.l2_mean().max(1e-300))
}

/// Symmetric traceless potential with div(out) = v, for mean-free v.
pub fn inv_div_u(v: &Field3) -> Result<TensorField3> {
    let (mean_norm, scale) = mean_magnitude(v);
    if mean_norm > 1e-10 * scale {
        return Err(Error::Invalid(format!(
            "inverse divergence requires a mean-free field (|mean|/||f|| = {:.3e})",
            mean_norm / scale
        )));
    }
    let spec = v.to_spectrum();
    let grid = v.grid;
    let mut out = TensorField3::zeros(grid, SymmetryClass::SymmetricTraceless);
    let mut entries: Vec<Vec<Complex64>> =
        (0..9).map(|_| vec![Complex64::default(); grid.len()]).collect();
    for lin in 0..grid.len() {
        let k = grid.wavevector(lin);
        let k2 = ksq(k);
        if k2 == 0.0 {
            continue;
        }
        let u = [spec.comps[0][lin], spec.comps[1][lin], spec.comps[2][lin]];
        let kdotu = k[0] as f64 * u[0] + k[1] as f64 * u[1] + k[2] as f64 * u[2];
        for a in 0..3 {
            for b in 0..3 {
                let ka = k[a] as f64;
                let kb = k[b] as f64;
                let delta = if a == b { 1.0 } else { 0.0 };
                // -i(k_a u_b + k_b u_a)/|k|^2 + (i/2)(delta + k_a k_b/|k|^2) (k.u)/|k|^2
                entries[3 * a + b][lin] = -I * (ka * u[b] + kb * u[a]) / k2
                    + I * 0.5 * (delta + ka * kb / k2) * kdotu / k2;
            }
        }
    }
    for (c, e) in entries.into_iter().enumerate() {
        out.comps[c] = spectrum_to_real(&e, grid.n);
    }
    out.with_class(SymmetryClass::SymmetricTraceless)
}

/// Skew potential with div(out) = f, for mean-free divergence-free f.
pub fn inv_div_b(f: &Field3) -> Result<TensorField3> {
    let (mean_norm, scale) = mean_magnitude(f);
    if mean_norm > 1e-10 * scale {
        return Err(Error::Invalid(format!(
            "inverse divergence requires a mean-free field (|mean|/||f|| = {:.3e})",
            mean_norm / scale
        )));
    }
    let div_norm = divergence(f).l2_mean();
    if div_norm > 1e-8 * scale {
        return Err(Error::Invalid(format!(
            "skew inverse divergence requires div f = 0 (||div f||/||f|| = {:.3e})",
            div_norm / scale
        )));
    }
    let spec = f.to_spectrum();
    let grid = f.grid;
    let mut m_spec = SpecField3::zeros(grid); // m = (-lap)^(-1) curl f
    for lin in 0..grid.len() {
        let k = grid.wavevector(lin);
        let k2 = ksq(k);
        if k2 == 0.0 || on_nyquist(k, grid.n) {
            continue;
        }
        let (kx, ky, kz) = (k[0] as f64, k[1] as f64, k[2] as f64);
        let u = [spec.comps[0][lin], spec.comps[1][lin], spec.comps[2][lin]];
        m_spec.comps[0][lin] = I * (ky * u[2] - kz * u[1]) / k2;
        m_spec.comps[1][lin] = I * (kz * u[0] - kx * u[2]) / k2;
        m_spec.comps[2][lin] = I * (kx * u[1] - ky * u[0]) / k2;
    }
    let m = m_spec.to_field();
    let mut out = TensorField3::zeros(grid, SymmetryClass::Skew);
    // T_ij = eps_ijk m_k
    out.comps[3 * 0 + 1] = m.comps[2].clone();
    out.comps[3 * 1 + 0] = m.comps[2].iter().map(|v| -v).collect();
    out.comps[3 * 1 + 2] = m.comps[0].clone();
    out.comps[3 * 2 + 1] = m.comps[0].iter().map(|v| -v).collect();
    out.comps[3 * 2 + 0] = m.comps[1].clone();
    out.comps[3 * 0 + 2] = m.comps[1].iter().map(|v| -v).collect();
    out.with_class(SymmetryClass::Skew)
}

/// Sharp spectral truncation to |k|_inf <= cutoff (dealiasing).
pub fn truncate(f: &Field3, cutoff: i64) -> Field3 {
    let mut spec = f.to_spectrum();
    spec.apply_multiplier(|k| {
        if k[0].abs() <= cutoff && k[1].abs() <= cutoff && k[2].abs() <= cutoff {
            1.0
        } else {
            0.0
        }
    });
    spec.to_field()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;

    fn grid() -> Grid {
        Grid::new(16).unwrap()
    }

    #[test]
    fn leray_annihilates_gradients() {
        let f = Field3::from_fn(grid(), |x, _, _| [x.cos(), 0.0, 0.0]);
        let p = leray_project(&f);
        assert!(p.l2_mean() < 1e-12);
    }

    #[test]
    fn leray_identity_on_divfree() {
        let f = Field3::from_fn(grid(), |_, y, _| [y.sin(), 0.0, 0.0]);
        let p = leray_project(&f);
        assert!(p.sub(&f).l2_mean() < 1e-12);
    }

    #[test]
    fn leray_single_mode_example() {
        let f = Field3::from_fn(grid(), |x, _, _| [x.cos(), x.cos(), 0.0]);
        let p = leray_project(&f);
        let expected = Field3::from_fn(grid(), |x, _, _| [0.0, x.cos(), 0.0]);
        assert!(p.sub(&expected).l2_mean() < 1e-12);
    }

    #[test]
    fn leray_orthogonal_and_idempotent() {
        let f = Field3::from_fn(grid(), |x, y, z| {
            [(x + 2.0 * y).sin(), (y - z).cos(), (3.0 * x).sin() * y.cos()]
        });
        let p = leray_project(&f);
        let pp = leray_project(&p);
        assert!(pp.sub(&p).l2_mean() < 1e-12 * p.l2_mean().max(1.0));
        let resid = f.sub(&p);
        let inner: f64 = (0..3)
            .map(|a| {
                p.comps[a]
                    .iter()
                    .zip(&resid.comps[a])
                    .map(|(x, y)| x * y)
                    .sum::<f64>()
            })
            .sum::<f64>()
            / f.grid.len() as f64;
        assert!(inner.abs() <= 1e-10 * f.l2_mean().powi(2));
        assert!(divergence(&p).l2_mean() < 1e-10 * p.l2_mean());
    }

    #[test]
    fn frac_laplacian_eigenmode() {
        // mode k = (1,2,2): |k|^2 = 9, multiplier 9^(5/4) = 3^(5/2)
        let f = Field3::from_fn(grid(), |x, y, z| [(x + 2.0 * y + 2.0 * z).sin(), 0.0, 0.0]);
        let g = frac_laplacian(&f, 1.25);
        let factor = g.l2_mean() / f.l2_mean();
        assert!((factor - 3.0f64.powf(2.5)).abs() < 1e-10 * 3.0f64.powf(2.5));
        // alpha = 1 on |k| = 1 mode is the identity
        let f1 = Field3::from_fn(grid(), |x, _, _| [0.0, x.sin(), 0.0]);
        assert!(frac_laplacian(&f1, 1.0).sub(&f1).l2_mean() < 1e-12);
        // alpha = 0 is the identity on mean-free fields
        let f2 = remove_mean(&Field3::from_fn(grid(), |x, y, _| [x.sin() * y.cos(), 0.0, 0.0]));
        assert!(frac_laplacian(&f2, 0.0).sub(&f2).l2_mean() < 1e-12);
    }

    #[test]
    fn semigroup_scalar_factor_and_composition() {
        let f = Field3::from_fn(grid(), |_, y, _| [y.sin(), 0.0, 0.0]);
        let g = semigroup_apply(&f, 1.0, 0.5, 1.0);
        let factor = g.l2_mean() / f.l2_mean();
        assert!((factor - (-0.5f64).exp()).abs() < 1e-12);
        // t = 0 identity
        assert!(semigroup_apply(&f, 1.0, 0.0, 1.25).sub(&f).l2_mean() < 1e-14);
        // composition
        let f2 = Field3::from_fn(grid(), |x, y, z| [(x + y).sin(), (2.0 * z).cos(), x.sin()]);
        let ab = semigroup_apply(&semigroup_apply(&f2, 0.7, 0.3, 1.2), 0.7, 0.2, 1.2);
        let once = semigroup_apply(&f2, 0.7, 0.5, 1.2);
        assert!(ab.sub(&once).l2_mean() < 1e-12 * once.l2_mean().max(1.0));
        // L2 norm non-increasing in t
        assert!(once.l2_mean() <= f2.l2_mean());
    }

    #[test]
    fn inv_div_u_single_mode_closed_form() {
        let v = Field3::from_fn(grid(), |_, y, _| [y.cos(), 0.0, 0.0]);
        let t = inv_div_u(&v).unwrap();
        // expected sin(y) (e1 (x) e2 + e2 (x) e1)
        let n = grid().n;
        let mut worst = 0.0f64;
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let idx = grid().idx(i, j, k);
                    let y = grid().coord(j);
                    let e = y.sin();
                    worst = worst.max((t.entry(0, 1)[idx] - e).abs());
                    worst = worst.max((t.entry(1, 0)[idx] - e).abs());
                    worst = worst.max(t.entry(0, 0)[idx].abs());
                    worst = worst.max(t.entry(2, 2)[idx].abs());
                }
            }
        }
        assert!(worst < 1e-12);
        let back = tensor_divergence(&t);
        assert!(back.sub(&v).l2_mean() < 1e-10 * v.l2_mean());
    }

    #[test]
    fn inv_div_u_random_roundtrip_and_trace() {
        let v = remove_mean(&Field3::from_fn(grid(), |x, y, z| {
            [
                (x + y).sin() * (2.0 * z).cos(),
                (y - 2.0 * x).cos(),
                (z + 3.0 * y).sin(),
            ]
        }));
        let t = inv_div_u(&v).unwrap();
        let back = tensor_divergence(&t);
        assert!(back.sub(&v).l2_mean() < 1e-10 * v.l2_mean());
        assert!(t.class_residual(SymmetryClass::SymmetricTraceless) < 1e-12);
    }

    #[test]
    fn inv_div_u_rejects_nonmeanfree() {
        let v = Field3::from_fn(grid(), |_, _, _| [1.0, 0.0, 0.0]);
        assert!(inv_div_u(&v).is_err());
    }

    #[test]
    fn inv_div_b_examples() {
        let f = Field3::from_fn(grid(), |_, y, _| [y.sin(), 0.0, 0.0]);
        let t = inv_div_b(&f).unwrap();
        assert!(t.class_residual(SymmetryClass::Skew) < 1e-12);
        let back = tensor_divergence(&t);
        assert!(back.sub(&f).l2_mean() < 1e-10 * f.l2_mean());
        // curl of a band-limited potential: roundtrip through curl
        let g = Field3::from_fn(grid(), |x, y, z| {
            [(y + z).sin(), (2.0 * x).cos() * z.sin(), (x - y).cos()]
        });
        let f2 = curl(&g);
        let t2 = inv_div_b(&f2).unwrap();
        let back2 = tensor_divergence(&t2);
        assert!(back2.sub(&f2).l2_mean() < 1e-10 * f2.l2_mean());
        // non-divergence-free input rejected
        let bad = Field3::from_fn(grid(), |x, _, _| [x.sin(), 0.0, 0.0]);
        assert!(inv_div_b(&bad).is_err());
    }

    #[test]
    fn highpass_and_mean_removal() {
        let c = Field3::from_fn(grid(), |_, _, _| [2.5, -1.0, 0.25]);
        assert!(remove_mean(&c).l2_mean() < 1e-14);
        let f = Field3::from_fn(grid(), |x, _, _| [(8.0 * x).sin(), 0.0, 0.0]);
        let hp = highpass(&f, 4.0);
        assert!(hp.sub(&f).l2_mean() < 1e-12);
        let mixed = Field3::from_fn(grid(), |x, y, _| [(x).sin() + (6.0 * y).cos(), 0.0, 0.0]);
        let hp2 = highpass(&mixed, 4.0);
        assert!(hp2.l2_mean() <= mixed.l2_mean() + 1e-14);
    }
}
