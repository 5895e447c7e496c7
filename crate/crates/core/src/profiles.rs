//! One-dimensional profile machinery: the compactly supported bump, its exact
//! derivative family, rescaled space profiles, band-limited trig-polynomial
//! twins for grid sampling, and the temporal oscillation/corrector pair.

use crate::error::{Error, Result};
use crate::spectral::fft::fft1_forward;
use crate::spectral::TAU;
use num_complex::Complex64;
use std::sync::OnceLock;

// ---------------------------------------------------------------------------
// base bump with exact derivatives
// ---------------------------------------------------------------------------

fn poly_derive(p: &[f64]) -> Vec<f64> {
    if p.len() <= 1 {
        return vec![0.0];
    }
    (1..p.len()).map(|i| p[i] * i as f64).collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn poly_eval(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

const MAX_DERIV: usize = 8;

/// Numerators of B^(N)(t) = num_N(t) (1-t^2)^(-2N) e^(-1/(1-t^2)).
fn bump_numerators() -> &'static Vec<Vec<f64>> {
    static CACHE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let one_minus_t2 = vec![1.0, 0.0, -1.0];
        let sq = poly_mul(&one_minus_t2, &one_minus_t2);
        let mut nums: Vec<Vec<f64>> = vec![vec![1.0]];
        for n in 0..MAX_DERIV {
            let num = &nums[n];
            // num' (1-t^2)^2 + 4 n t num (1-t^2) - 2 t num
            let term1 = poly_mul(&poly_derive(num), &sq);
            let term2 = poly_mul(&poly_mul(&[0.0, 4.0 * n as f64], num), &one_minus_t2);
            let term3 = poly_mul(&[0.0, -2.0], num);
            nums.push(poly_add(&poly_add(&term1, &term2), &term3));
        }
        nums
    })
}

/// N-th derivative of the standard bump exp(-1/(1-t^2)) on (-1,1), zero outside.
pub fn bump_deriv(t: f64, order: usize) -> f64 {
    assert!(order <= MAX_DERIV, "bump derivative order {order} > {MAX_DERIV}");
    let u = 1.0 - t * t;
    if u <= 0.0 {
        return 0.0;
    }
    let e = (-1.0 / u).exp();
    if e == 0.0 {
        return 0.0;
    }
    let num = poly_eval(&bump_numerators()[order], t);
    num * u.powi(-2 * (order as i32)) * e
}

pub fn bump(t: f64) -> f64 {
    bump_deriv(t, 0)
}

/// Composite Simpson quadrature (n even subintervals).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

struct BumpConstants {
    /// (1/2pi) int (B'')^2 -> amplitude for the space pair
    c_phi: f64,
    /// (1/2pi) int (B')^2 -> amplitude for the transverse profile
    c_psi: f64,
    /// int_0^1 (B(2t-1))^2 -> amplitude for the temporal bump
    c_g: f64,
}

fn constants() -> &'static BumpConstants {
    static CACHE: OnceLock<BumpConstants> = OnceLock::new();
    CACHE.get_or_init(|| {
        let n = 1 << 15;
        let i2 = simpson(|t| bump_deriv(t, 2).powi(2), -1.0, 1.0, n);
        let i1 = simpson(|t| bump_deriv(t, 1).powi(2), -1.0, 1.0, n);
        let i0 = simpson(|t| bump(t).powi(2), -1.0, 1.0, n);
        BumpConstants {
            c_phi: (TAU / i2).sqrt(),
            c_psi: (TAU / i1).sqrt(),
            c_g: (2.0 / i0).sqrt(),
        }
    })
}

/// Potential profile: compactly supported on [-1,1], scaled so that the
/// oscillation profile -Phi'' has unit quadratic mean (1/2pi) int phi^2 = 1.
pub fn profile_potential(t: f64, order: usize) -> f64 {
    constants().c_phi * bump_deriv(t, order)
}

/// Oscillation profile phi = -Phi''.
pub fn profile_phi(t: f64, order: usize) -> f64 {
    -constants().c_phi * bump_deriv(t, order + 2)
}

/// Mean-free transverse profile psi = c B' with (1/2pi) int psi^2 = 1.
pub fn profile_psi(t: f64, order: usize) -> f64 {
    constants().c_psi * bump_deriv(t, order + 1)
}

/// Temporal bump on [0,1] with int_0^1 g^2 = 1.
pub fn profile_g(t: f64, order: usize) -> f64 {
    constants().c_g * 2.0f64.powi(order as i32) * bump_deriv(2.0 * t - 1.0, order)
}

// ---------------------------------------------------------------------------
// rescaled space profiles
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceKind {
    /// phi, the oscillation profile
    Oscillation,
    /// Phi, its double antiderivative
    Potential,
    /// psi, the mean-free transverse profile
    Transverse,
}

/// Concentrated profile f_r(y) = r^(-1/2) f(y/r), one copy per 2 pi period.
#[derive(Clone, Copy, Debug)]
pub struct ScaledProfile {
    pub kind: SpaceKind,
    pub r: f64,
}

impl ScaledProfile {
    pub fn new(kind: SpaceKind, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Invalid(format!("concentration {r} must lie in (0, 1]")));
        }
        Ok(ScaledProfile { kind, r })
    }

    fn base(&self, t: f64, order: usize) -> f64 {
        match self.kind {
            SpaceKind::Oscillation => profile_phi(t, order),
            SpaceKind::Potential => profile_potential(t, order),
            SpaceKind::Transverse => profile_psi(t, order),
        }
    }

    /// N-th derivative at the periodized argument.
    pub fn eval(&self, y: f64, order: usize) -> f64 {
        let mut yy = y.rem_euclid(TAU);
        if yy > std::f64::consts::PI {
            yy -= TAU;
        }
        self.r.powf(-0.5 - order as f64) * self.base(yy / self.r, order)
    }

    /// Mean-normalized L^p norm over the period, by quadrature on the support
    /// (exact for the compactly supported profiles).
    pub fn lp_mean(&self, p: f64, order: usize) -> f64 {
        let n = 1 << 13;
        if p.is_infinite() {
            let mut m: f64 = 0.0;
            for i in 0..=n {
                let y = -self.r + 2.0 * self.r * i as f64 / n as f64;
                m = m.max(self.eval(y, order).abs());
            }
            return m;
        }
        let v = simpson(|y| self.eval(y, order).abs().powf(p), -self.r, self.r, n);
        (v / TAU).powf(1.0 / p)
    }

    /// (1/2pi) int f_r g_r for two profiles at the same concentration.
    pub fn mean_product(&self, other: &ScaledProfile, order_a: usize, order_b: usize) -> f64 {
        assert_eq!(self.r, other.r);
        let n = 1 << 13;
        simpson(
            |y| self.eval(y, order_a) * other.eval(y, order_b),
            -self.r,
            self.r,
            n,
        ) / TAU
    }
}

// ---------------------------------------------------------------------------
// band-limited trig twins
// ---------------------------------------------------------------------------

/// Real trig polynomial sum_{|m| <= m_max} c_m e^{i m y}; the sampled field of
/// such a profile is exactly its own trig interpolant, so grid-spectral
/// operations on it are exact.
#[derive(Clone, Debug)]
pub struct TrigProfile {
    pub m_max: usize,
    /// coefficient of e^{i m y} at index m + m_max
    pub coeffs: Vec<Complex64>,
    /// fraction of quadratic mass discarded by the band limit
    pub truncation: f64,
}

impl TrigProfile {
    /// Projects a periodic function onto modes |m| <= m_max (fine-grid FFT).
    pub fn project(f: impl Fn(f64) -> f64, m_max: usize) -> Self {
        let n = (8 * (m_max + 1)).next_power_of_two().max(1 << 12);
        let mut buf: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(f(TAU * i as f64 / n as f64), 0.0))
            .collect();
        fft1_forward(&mut buf);
        let total: f64 = buf.iter().map(|c| c.norm_sqr()).sum();
        let mut coeffs = vec![Complex64::default(); 2 * m_max + 1];
        let mut kept = 0.0;
        for m in -(m_max as i64)..=(m_max as i64) {
            let idx = m.rem_euclid(n as i64) as usize;
            coeffs[(m + m_max as i64) as usize] = buf[idx];
            kept += buf[idx].norm_sqr();
        }
        TrigProfile {
            m_max,
            coeffs,
            truncation: if total > 0.0 { 1.0 - kept / total } else { 0.0 },
        }
    }

    /// Rescales so the quadratic mean (1/2pi) int f^2 = sum |c_m|^2 equals `target`.
    pub fn normalize_quadratic_mean(&mut self, target: f64) -> f64 {
        let mass: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        let s = (target / mass).sqrt();
        for c in self.coeffs.iter_mut() {
            *c *= s;
        }
        s
    }

    pub fn scale(&mut self, s: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= s;
        }
    }

    /// Exact N-th derivative: coefficient-wise (i m)^N.
    pub fn derivative(&self, order: u32) -> Self {
        let mut out = self.clone();
        for m in -(self.m_max as i64)..=(self.m_max as i64) {
            let f = Complex64::new(0.0, m as f64).powu(order);
            out.coeffs[(m + self.m_max as i64) as usize] *= f;
        }
        out
    }

    pub fn eval(&self, y: f64) -> f64 {
        // real field: c_{-m} = conj(c_m); sum c_0 + 2 Re sum_{m>0} c_m e^{imy}
        let mut acc = self.coeffs[self.m_max].re;
        for m in 1..=self.m_max {
            let ph = Complex64::from_polar(1.0, m as f64 * y);
            acc += 2.0 * (self.coeffs[self.m_max + m] * ph).re;
        }
        acc
    }

    /// Quadratic mean sum |c_m|^2 (Parseval, exact for the trig polynomial).
    pub fn quadratic_mean(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Mean of the product of two trig profiles (exact).
    pub fn mean_product(&self, other: &TrigProfile) -> f64 {
        let m = self.m_max.min(other.m_max) as i64;
        let mut acc = Complex64::default();
        for k in -m..=m {
            acc += self.coeffs[(k + self.m_max as i64) as usize]
                * other.coeffs[(-k + other.m_max as i64) as usize];
        }
        acc.re
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[self.m_max].re
    }
}

/// Band-limited (phi, Phi) pair keeping phi = -Phi'' exactly and
/// renormalizing so the trig phi has unit quadratic mean.
#[derive(Debug)]
pub struct BandLimitedPair {
    pub phi: TrigProfile,
    pub potential: TrigProfile,
}

pub fn band_limited_space_pair(r_perp: f64, m_max: usize) -> Result<BandLimitedPair> {
    let base = ScaledProfile::new(SpaceKind::Potential, r_perp)?;
    let mut potential = TrigProfile::project(|y| base.eval(y, 0), m_max);
    // the rescaled pair obeys phi_r = -r^2 Phi_r'' in the periodized variable,
    // i.e. coefficients r^2 m^2 c_m
    let mut phi = potential.clone();
    for m in -(m_max as i64)..=(m_max as i64) {
        phi.coeffs[(m + m_max as i64) as usize] *= r_perp * r_perp * (m * m) as f64;
    }
    let mass = phi.quadratic_mean();
    if mass <= 0.0 {
        return Err(Error::UnderResolved(format!(
            "band limit m_max={m_max} leaves no oscillation mass at r_perp={r_perp}"
        )));
    }
    let s = (1.0 / mass).sqrt();
    phi.scale(s);
    potential.scale(s);
    Ok(BandLimitedPair { phi, potential })
}

pub fn band_limited_transverse(r_par: f64, m_max: usize) -> Result<TrigProfile> {
    let base = ScaledProfile::new(SpaceKind::Transverse, r_par)?;
    let mut psi = TrigProfile::project(|y| base.eval(y, 0), m_max);
    // exact mean-free: the projection of a mean-free profile keeps c_0 = 0
    psi.coeffs[m_max] = Complex64::default();
    psi.normalize_quadratic_mean(1.0);
    Ok(psi)
}

// ---------------------------------------------------------------------------
// temporal pair
// ---------------------------------------------------------------------------

/// Temporal oscillation g and the corrector primitive h on the horizon [0, T]:
/// one bump of width T/tau per period, amplified by sqrt(tau), swept sigma
/// times across the horizon; h(t) integrates g^2 - 1 from zero.
#[derive(Clone, Debug)]
pub struct TemporalPair {
    pub tau: u64,
    pub sigma: u64,
    pub t_horizon: f64,
    /// cumulative integral of g0^2 on [0,1] at resolution `grid`
    cum: Vec<f64>,
}

impl TemporalPair {
    pub fn new(tau: u64, sigma: u64, t_horizon: f64) -> Result<Self> {
        if tau == 0 || sigma == 0 {
            return Err(Error::Invalid("tau and sigma must be positive integers".into()));
        }
        let n = 1 << 14;
        let mut cum = Vec::with_capacity(n + 1);
        cum.push(0.0);
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let a = i as f64 * h;
            // 4-point Gauss-Legendre on [a, a+h]
            acc += gauss4(|s| profile_g(s, 0).powi(2), a, a + h);
            cum.push(acc);
        }
        // exact unit mass by construction; renormalize the tabulated cum so
        // that cum[n] == 1 to remove the residual quadrature error
        let total = cum[n];
        for v in cum.iter_mut() {
            *v /= total;
        }
        Ok(TemporalPair { tau, sigma, t_horizon, cum })
    }

    fn cum_g0_sq(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let n = self.cum.len() - 1;
        let x = s * n as f64;
        let j = (x.floor() as usize).min(n - 1);
        let a = j as f64 / n as f64;
        self.cum[j] + gauss4(|u| profile_g(u, 0).powi(2), a, s) / self.norm_total()
    }

    fn norm_total(&self) -> f64 {
        1.0
    }

    /// Oscillated, concentrated profile g_(tau)(t).
    pub fn g_at(&self, t: f64) -> f64 {
        self.g_deriv(t, 0)
    }

    /// Exact time derivatives of g_(tau).
    pub fn g_deriv(&self, t: f64, order: usize) -> f64 {
        let tt = self.t_horizon;
        let u = (self.sigma as f64 * t).rem_euclid(tt);
        let s = self.tau as f64 * u / tt; // in [0, tau)
        if s >= 1.0 {
            return 0.0;
        }
        let chain = (self.sigma * self.tau) as f64 / tt;
        (self.tau as f64).sqrt() * chain.powi(order as i32) * profile_g(s, order)
    }

    /// h_(tau)(t) = integral of (g_tau^2 - 1) evaluated at the swept time.
    pub fn h_at(&self, t: f64) -> f64 {
        let tt = self.t_horizon;
        let u = (self.sigma as f64 * t).rem_euclid(tt);
        let s = (self.tau as f64 * u / tt).min(1.0);
        tt * self.cum_g0_sq(s) - u
    }

    /// d/dt h_(tau) = sigma (g_(tau)^2 - 1).
    pub fn h_deriv(&self, t: f64) -> f64 {
        self.sigma as f64 * (self.g_at(t).powi(2) - 1.0)
    }

    /// L^gamma norm over one horizon (fine quadrature).
    pub fn g_lgamma(&self, gamma: f64, order: usize) -> f64 {
        let n = 1 << 18;
        if gamma.is_infinite() {
            let mut m: f64 = 0.0;
            // sample only the first bump (all copies identical)
            for i in 0..=n {
                let t = self.t_horizon * i as f64 / ((self.sigma * self.tau) as f64 * n as f64);
                m = m.max(self.g_deriv(t, order).abs());
            }
            return m;
        }
        // per-bump integral times bump count (one bump per sweep)
        let bump_len = self.t_horizon / (self.sigma * self.tau) as f64;
        let one = simpson(
            |t| self.g_deriv(t, order).abs().powf(gamma),
            0.0,
            bump_len,
            1 << 12,
        );
        (self.sigma as f64 * one).powf(1.0 / gamma)
    }
}

fn gauss4(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 4] = [
        -0.861136311594052575,
        -0.339981043584856265,
        0.339981043584856265,
        0.861136311594052575,
    ];
    const W: [f64; 4] = [
        0.347854845137453857,
        0.652145154862546143,
        0.652145154862546143,
        0.347854845137453857,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    h * X.iter().zip(&W).map(|(&x, &w)| w * f(c + h * x)).sum::<f64>()
}

// ---------------------------------------------------------------------------
// assembled profile set
// ---------------------------------------------------------------------------

/// The full profile family for one level of the construction.
#[derive(Debug)]
pub struct ProfileSet {
    pub phi: ScaledProfile,
    pub potential: ScaledProfile,
    pub psi: Option<ScaledProfile>,
    pub temporal: TemporalPair,
}

pub fn make_profiles(
    r_perp: f64,
    r_par: Option<f64>,
    tau: u64,
    sigma: u64,
    t_horizon: f64,
    grid_1d: usize,
) -> Result<ProfileSet> {
    for (name, r) in [("r_perp", Some(r_perp)), ("r_par", r_par)] {
        if let Some(r) = r {
            let cells = r * grid_1d as f64 / TAU;
            if cells < 4.0 {
                return Err(Error::UnderResolved(format!(
                    "{name} = {r} spans {cells:.2} cells on a {grid_1d}-point axis (need >= 4)"
                )));
            }
        }
    }
    Ok(ProfileSet {
        phi: ScaledProfile::new(SpaceKind::Oscillation, r_perp)?,
        potential: ScaledProfile::new(SpaceKind::Potential, r_perp)?,
        psi: r_par.map(|r| ScaledProfile::new(SpaceKind::Transverse, r)).transpose()?,
        temporal: TemporalPair::new(tau, sigma, t_horizon)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::fit_loglog;

    #[test]
    fn bump_derivative_consistency() {
        // FD check of the symbolic derivatives
        let h = 1e-5;
        for order in 0..4 {
            for &t in &[0.0, 0.3, -0.55, 0.8] {
                let fd = (bump_deriv(t + h, order) - bump_deriv(t - h, order)) / (2.0 * h);
                let exact = bump_deriv(t, order + 1);
                assert!(
                    (fd - exact).abs() < 1e-6 * (1.0 + exact.abs()),
                    "order {order} t {t}: fd {fd} exact {exact}"
                );
            }
        }
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump_deriv(-1.2, 3), 0.0);
    }

    #[test]
    fn normalized_profiles() {
        // (1/2pi) int phi^2 = 1 and psi mean-free with unit quadratic mean
        let i_phi = simpson(|t| profile_phi(t, 0).powi(2), -1.0, 1.0, 1 << 14) / TAU;
        assert!((i_phi - 1.0).abs() < 1e-10);
        let i_psi = simpson(|t| profile_psi(t, 0).powi(2), -1.0, 1.0, 1 << 14) / TAU;
        assert!((i_psi - 1.0).abs() < 1e-10);
        let m_psi = simpson(|t| profile_psi(t, 0), -1.0, 1.0, 1 << 14);
        assert!(m_psi.abs() < 1e-12);
        // phi = -Phi''
        for &t in &[0.1, -0.4, 0.75] {
            assert!((profile_phi(t, 0) + profile_potential(t, 2)).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_profile_norm_scaling() {
        // ||phi_r||_p ~ r^(1/p - 1/2)
        let ladder = [0.25, 0.125, 0.0625, 0.03125];
        for p in [1.0, 2.0, 8.0] {
            let ys: Vec<f64> = ladder
                .iter()
                .map(|&r| ScaledProfile::new(SpaceKind::Oscillation, r).unwrap().lp_mean(p, 0))
                .collect();
            let slope = fit_loglog(&ladder, &ys);
            let predicted = 1.0 / p - 0.5;
            assert!(
                (slope - predicted).abs() < 0.02,
                "p={p}: slope {slope} predicted {predicted}"
            );
        }
        // unit quadratic mean at every r
        let phi = ScaledProfile::new(SpaceKind::Oscillation, 0.1).unwrap();
        assert!((phi.lp_mean(2.0, 0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn band_limited_pair_identities() {
        let r = 0.25;
        let pair = band_limited_space_pair(r, 15).unwrap();
        // phi_r = -r^2 Phi_r'' exactly in coefficients
        let dd = pair.potential.derivative(2);
        for m in 0..pair.phi.coeffs.len() {
            let want = -dd.coeffs[m] * r * r;
            let got = pair.phi.coeffs[m];
            assert!((want - got).norm() < 1e-12);
        }
        // unit quadratic mean exactly
        assert!((pair.phi.quadratic_mean() - 1.0).abs() < 1e-14);
        // evaluation matches coefficients roundtrip
        let v = pair.phi.eval(0.3);
        assert!(v.is_finite());
    }

    #[test]
    fn temporal_pair_properties() {
        let tp = TemporalPair::new(16, 2, 1.0).unwrap();
        // quadratic mean 1
        assert!((tp.g_lgamma(2.0, 0) - 1.0).abs() < 1e-8);
        // |h| <= 1
        let mut hmax: f64 = 0.0;
        for i in 0..4096 {
            hmax = hmax.max(tp.h_at(i as f64 / 4096.0).abs());
        }
        assert!(hmax <= 1.0 + 1e-9, "hmax {hmax}");
        // dh/dt = sigma (g^2 - 1) via FD at second order
        let mut errs = Vec::new();
        for &dt in &[1e-4, 5e-5] {
            let t0 = 0.2371;
            let fd = (tp.h_at(t0 + dt) - tp.h_at(t0 - dt)) / (2.0 * dt);
            errs.push((fd - tp.h_deriv(t0)).abs());
        }
        assert!(errs[1] < errs[0] * 0.5 || errs[1] < 1e-8, "{errs:?}");
    }

    #[test]
    fn temporal_norm_scaling() {
        let ladder: [u64; 4] = [8, 16, 32, 64];
        let xs: Vec<f64> = ladder.iter().map(|&t| t as f64).collect();
        // M = 0, gamma = 2: slope 0 (exactly normalized)
        let ys: Vec<f64> = ladder
            .iter()
            .map(|&t| TemporalPair::new(t, 1, 1.0).unwrap().g_lgamma(2.0, 0))
            .collect();
        assert!(fit_loglog(&xs, &ys).abs() < 0.02);
        // M = 0, gamma = 1: slope -1/2
        let ys: Vec<f64> = ladder
            .iter()
            .map(|&t| TemporalPair::new(t, 1, 1.0).unwrap().g_lgamma(1.0, 0))
            .collect();
        assert!((fit_loglog(&xs, &ys) + 0.5).abs() < 0.02);
        // M = 1, gamma = inf: slope 3/2 (sigma fixed)
        let ys: Vec<f64> = ladder
            .iter()
            .map(|&t| TemporalPair::new(t, 1, 1.0).unwrap().g_lgamma(f64::INFINITY, 1))
            .collect();
        assert!((fit_loglog(&xs, &ys) - 1.5).abs() < 0.05);
    }

    #[test]
    fn make_profiles_resolution_gate() {
        assert!(make_profiles(0.25, None, 16, 2, 1.0, 256).is_ok());
        let err = make_profiles(0.001, None, 16, 2, 1.0, 256).unwrap_err();
        assert!(matches!(err, Error::UnderResolved(_)));
    }
}
