//! Invariant diagnostics and measured operator estimates: energy/helicities,
//! the high-frequency commutator gain, scale-separation decorrelation, and
//! semigroup smoothing fits.

use super::ops::{curl, divergence, gradient, highpass_scalar, inv_grad_scalar, remove_mean_scalar, semigroup_apply};
use super::{Field3, Grid, ScalarField, SpecField3, VOLUME};
use crate::error::{Error, Result};
use crate::fit::fit_loglog;

/// Total energy, cross helicity and magnetic helicity (integral convention).
/// The magnetic potential solves curl A = B with zero mean.
pub fn helicities(u: &Field3, b: &Field3) -> Result<(f64, f64, f64)> {
    let scale = b.l2_mean().max(1e-300);
    let m = b.mean();
    if (m[0].powi(2) + m[1].powi(2) + m[2].powi(2)).sqrt() > 1e-10 * scale {
        return Err(Error::Invalid("magnetic field must be mean-free".into()));
    }
    if divergence(b).l2_mean() > 1e-8 * scale {
        return Err(Error::Invalid("magnetic field must be divergence-free".into()));
    }
    let npts = u.grid.len() as f64;
    let energy = 0.5
        * VOLUME
        * (0..3)
            .map(|a| {
                u.comps[a].iter().map(|v| v * v).sum::<f64>()
                    + b.comps[a].iter().map(|v| v * v).sum::<f64>()
            })
            .sum::<f64>()
        / npts;
    let cross = VOLUME * u.dot(b).mean();
    // A = (-lap)^(-1) curl B
    let mut spec = curl(b).to_spectrum();
    let grid = b.grid;
    let mut a_spec = SpecField3::zeros(grid);
    for lin in 0..grid.len() {
        let k = grid.wavevector(lin);
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        if k2 == 0.0 {
            continue;
        }
        for c in 0..3 {
            a_spec.comps[c][lin] = spec.comps[c][lin] / k2;
        }
    }
    for c in 0..3 {
        spec.comps[c].clear();
    }
    let a = a_spec.to_field();
    let magnetic = VOLUME * a.dot(b).mean();
    Ok((energy, cross, magnetic))
}

/// One data point of the high-frequency commutator estimate:
/// numerator = ||grad^{-1} P_{neq 0}(a P_{>=k} f)||_{L^p} and the reference norms.
pub struct CommutatorSample {
    pub numerator: f64,
    pub f_norm: f64,
    pub hess_inf: f64,
}

impl CommutatorSample {
    /// Ratio against ||f||_p alone (well-defined for constant a).
    pub fn ratio_plain(&self) -> f64 {
        self.numerator / self.f_norm
    }

    /// Fully normalized ratio; None when the modulating function is constant.
    pub fn ratio_normalized(&self) -> Option<f64> {
        if self.hess_inf < 1e-14 {
            None
        } else {
            Some(self.numerator / (self.hess_inf * self.f_norm))
        }
    }
}

pub fn commutator_probe(a: &ScalarField, f: &ScalarField, k_cut: f64, p: f64) -> CommutatorSample {
    let hi = highpass_scalar(f, k_cut);
    let prod = a.mul(&hi);
    let out = inv_grad_scalar(&remove_mean_scalar(&prod));
    // max Frobenius norm of the Hessian of a
    let g = gradient(a);
    let mut hess_sq = vec![0.0; a.grid.len()];
    for c in 0..3 {
        let gc = ScalarField { grid: a.grid, data: g.comps[c].clone() };
        let h = gradient(&gc);
        for d in 0..3 {
            for (i, v) in h.comps[d].iter().enumerate() {
                hess_sq[i] += v * v;
            }
        }
    }
    let hess_inf = hess_sq.iter().map(|v| v.sqrt()).fold(0.0, f64::max);
    CommutatorSample { numerator: out.lp_mean(p), f_norm: f.lp_mean(p), hess_inf }
}

/// Fitted slope of the commutator gain against the cutoff ladder.
pub fn commutator_slope(a: &ScalarField, f: &ScalarField, cuts: &[f64], p: f64) -> f64 {
    let ys: Vec<f64> = cuts
        .iter()
        .map(|&k| {
            let s = commutator_probe(a, f, k, p);
            s.ratio_normalized().unwrap_or(s.ratio_plain())
        })
        .collect();
    fit_loglog(cuts, &ys)
}

/// 1D product-decorrelation deviation | ||f g(theta .)||_p - ||f||_p ||g||_p |
/// measured by fine quadrature on the unit circle (period 2 pi).
pub fn decorrelation_deviation(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    theta: u64,
    p: f64,
    n_quad: usize,
) -> f64 {
    let h = super::TAU / n_quad as f64;
    let mut pf = 0.0;
    let mut pg = 0.0;
    let mut pfg = 0.0;
    for i in 0..n_quad {
        let x = i as f64 * h;
        let fv = f(x).abs();
        let gv = g((theta as f64 * x) % super::TAU).abs();
        pf += fv.powf(p);
        pg += gv.powf(p);
        pfg += (fv * gv).powf(p);
    }
    let nq = n_quad as f64;
    let nf = (pf / nq).powf(1.0 / p);
    let ng = (pg / nq).powf(1.0 / p);
    let nfg = (pfg / nq).powf(1.0 / p);
    (nfg - nf * ng).abs()
}

/// Fitted decay slope of the decorrelation deviation over a theta ladder.
pub fn decorrelation_slope(
    f: impl Fn(f64) -> f64 + Copy,
    g: impl Fn(f64) -> f64 + Copy,
    thetas: &[u64],
    p: f64,
) -> f64 {
    let xs: Vec<f64> = thetas.iter().map(|&t| t as f64).collect();
    let ys: Vec<f64> = thetas
        .iter()
        .map(|&t| decorrelation_deviation(f, g, t, p, 1 << 16).max(1e-300))
        .collect();
    fit_loglog(&xs, &ys)
}

/// Slope of log ||grad e^{-t lap} f|| / ||f|| against log t for a spectrally
/// pink field (equal energy per shell makes the operator rate visible).
pub fn heat_gradient_slope(grid: Grid, alpha: f64, ts: &[f64], seed: u64) -> f64 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut spec = SpecField3::zeros(grid);
    let kmax = (grid.n / 2 - 1) as i64;
    for lin in 0..grid.len() {
        let k = grid.wavevector(lin);
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        if k2 == 0.0 {
            continue;
        }
        if k[0].abs() > kmax || k[1].abs() > kmax || k[2].abs() > kmax {
            continue;
        }
        let amp = k2.powf(-0.75); // ~ |k|^(-3/2): flat energy per |k| shell
        for c in 0..3 {
            spec.comps[c][lin] = num_complex::Complex64::new(
                amp * rng.gen_range(-1.0..1.0),
                amp * rng.gen_range(-1.0..1.0),
            );
        }
    }
    // hermitian symmetrize by keeping the real part of the inverse transform
    let f = spec.to_field();
    let base = f.l2_mean();
    let ys: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let sm = semigroup_apply(&f, 1.0, t, alpha);
            let g = (0..3)
                .map(|c| {
                    gradient(&ScalarField { grid, data: sm.comps[c].clone() }).l2_mean().powi(2)
                })
                .sum::<f64>()
                .sqrt();
            g / base
        })
        .collect();
    fit_loglog(ts, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beltrami_helicity() {
        let grid = Grid::new(16).unwrap();
        let b = Field3::from_fn(grid, |x, y, z| {
            [z.sin() + y.cos(), x.sin() + z.cos(), y.sin() + x.cos()]
        });
        let (energy, cross, magnetic) = helicities(&b, &b).unwrap();
        let expect = 3.0 * VOLUME;
        assert!((magnetic - expect).abs() < 1e-9 * expect);
        assert!((cross - expect).abs() < 1e-9 * expect);
        assert!((energy - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn zero_and_orthogonal_cases() {
        let grid = Grid::new(16).unwrap();
        let u = Field3::from_fn(grid, |_, y, _| [y.sin(), 0.0, 0.0]);
        let b0 = Field3::zeros(grid);
        let (_, _, m) = helicities(&u, &b0).unwrap();
        assert_eq!(m, 0.0);
        let b = Field3::from_fn(grid, |x, _, _| [0.0, 0.0, x.sin()]);
        let (_, cross, _) = helicities(&u, &b).unwrap();
        assert!(cross.abs() < 1e-12);
    }

    #[test]
    fn commutator_single_mode_ratio() {
        let grid = Grid::new(32).unwrap();
        let a = ScalarField::from_fn(grid, |_, _, _| 1.0);
        for kf in [4.0, 8.0] {
            let f = ScalarField::from_fn(grid, |x, _, _| (kf * x).sin());
            let s = commutator_probe(&a, &f, kf / 2.0, 2.0);
            assert!((s.ratio_plain() - 1.0 / kf).abs() < 1e-10);
        }
    }
}
