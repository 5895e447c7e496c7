//! Periodic pseudospectral toolbox on the 3-torus: fields, tensors, norms,
//! projections, fractional dissipation, inverse divergences and diagnostics.
//!
//! Coefficients are taken against e^{i k.x} with integer k; samples live on the
//! uniform grid x_i = 2 pi i / n (one full period per axis).

pub mod diag;
pub mod dump;
pub mod fft;
pub mod ops;

use crate::error::{Error, Result};
use fft::{idx3, index_of_wavenumber, real_to_spectrum, spectrum_to_real, wavenumber};
use num_complex::Complex64;

pub const TAU: f64 = 2.0 * std::f64::consts::PI;
/// Volume of the torus, (2 pi)^3.
pub const VOLUME: f64 = TAU * TAU * TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    pub n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Invalid(format!(
                "grid size {n} must be a power of two >= 4"
            )));
        }
        Ok(Grid { n })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        TAU * i as f64 / self.n as f64
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        idx3(i, j, k, self.n)
    }

    /// Integer wavevector of the linear spectral index.
    #[inline]
    pub fn wavevector(&self, lin: usize) -> [i64; 3] {
        let n = self.n;
        let i = lin % n;
        let j = (lin / n) % n;
        let k = lin / (n * n);
        [wavenumber(i, n), wavenumber(j, n), wavenumber(k, n)]
    }

    #[inline]
    pub fn spectral_index(&self, k: [i64; 3]) -> usize {
        idx3(
            index_of_wavenumber(k[0], self.n),
            index_of_wavenumber(k[1], self.n),
            index_of_wavenumber(k[2], self.n),
            self.n,
        )
    }
}

fn lp_of_samples(vals: impl Iterator<Item = f64>, count: usize, p: f64) -> f64 {
    if p.is_infinite() {
        vals.fold(0.0, f64::max)
    } else {
        let s: f64 = vals.map(|v| v.powf(p)).sum();
        (s / count as f64).powf(1.0 / p)
    }
}

/// Real scalar samples on the grid.
#[derive(Clone, Debug)]
pub struct ScalarField {
    pub grid: Grid,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField { grid, data: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Self {
        let n = grid.n;
        let mut data = vec![0.0; grid.len()];
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    data[grid.idx(i, j, k)] = f(grid.coord(i), grid.coord(j), grid.coord(k));
                }
            }
        }
        ScalarField { grid, data }
    }

    pub fn to_spectrum(&self) -> SpecScalar {
        SpecScalar { grid: self.grid, data: real_to_spectrum(&self.data, self.grid.n) }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Mean-normalized L^p norm ((avg |f|^p)^(1/p)); p = inf gives the max.
    pub fn lp_mean(&self, p: f64) -> f64 {
        lp_of_samples(self.data.iter().map(|v| v.abs()), self.data.len(), p)
    }

    /// Integral-normalized L^p norm over the torus of volume (2 pi)^3.
    pub fn lp_integral(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.lp_mean(p)
        } else {
            self.lp_mean(p) * VOLUME.powf(1.0 / p)
        }
    }

    pub fn l2_mean(&self) -> f64 {
        self.lp_mean(2.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        ScalarField { grid: self.grid, data: self.data.iter().map(|v| v * c).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        ScalarField {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        ScalarField {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.grid, other.grid);
        ScalarField {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect(),
        }
    }
}

/// Complex spectrum of a scalar field.
#[derive(Clone, Debug)]
pub struct SpecScalar {
    pub grid: Grid,
    pub data: Vec<Complex64>,
}

impl SpecScalar {
    pub fn to_field(&self) -> ScalarField {
        ScalarField { grid: self.grid, data: spectrum_to_real(&self.data, self.grid.n) }
    }

    pub fn apply_multiplier(&mut self, m: impl Fn([i64; 3]) -> f64 + Sync) {
        for (lin, v) in self.data.iter_mut().enumerate() {
            *v *= m(self.grid.wavevector(lin));
        }
    }

    /// Largest |k|_inf carrying more than `rel_tol` of the spectral maximum.
    pub fn max_active_freq(&self, rel_tol: f64) -> i64 {
        let peak = self.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0;
        }
        let mut kmax = 0;
        for (lin, v) in self.data.iter().enumerate() {
            if v.norm() > rel_tol * peak {
                let k = self.grid.wavevector(lin);
                kmax = kmax.max(k[0].abs().max(k[1].abs()).max(k[2].abs()));
            }
        }
        kmax
    }
}

/// Real 3-vector samples on the grid.
#[derive(Clone, Debug)]
pub struct Field3 {
    pub grid: Grid,
    pub comps: [Vec<f64>; 3],
}

impl Field3 {
    pub fn zeros(grid: Grid) -> Self {
        Field3 { grid, comps: [vec![0.0; grid.len()], vec![0.0; grid.len()], vec![0.0; grid.len()]] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> [f64; 3] + Sync) -> Self {
        let n = grid.n;
        let mut out = Self::zeros(grid);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let v = f(grid.coord(i), grid.coord(j), grid.coord(k));
                    let idx = grid.idx(i, j, k);
                    out.comps[0][idx] = v[0];
                    out.comps[1][idx] = v[1];
                    out.comps[2][idx] = v[2];
                }
            }
        }
        out
    }

    pub fn from_components(grid: Grid, comps: [Vec<f64>; 3]) -> Self {
        for c in &comps {
            assert_eq!(c.len(), grid.len());
        }
        Field3 { grid, comps }
    }

    pub fn to_spectrum(&self) -> SpecField3 {
        SpecField3 {
            grid: self.grid,
            comps: [
                real_to_spectrum(&self.comps[0], self.grid.n),
                real_to_spectrum(&self.comps[1], self.grid.n),
                real_to_spectrum(&self.comps[2], self.grid.n),
            ],
        }
    }

    pub fn mean(&self) -> [f64; 3] {
        let m = self.grid.len() as f64;
        [
            self.comps[0].iter().sum::<f64>() / m,
            self.comps[1].iter().sum::<f64>() / m,
            self.comps[2].iter().sum::<f64>() / m,
        ]
    }

    pub fn magnitude(&self) -> ScalarField {
        let mut data = vec![0.0; self.grid.len()];
        for (i, v) in data.iter_mut().enumerate() {
            *v = (self.comps[0][i].powi(2) + self.comps[1][i].powi(2) + self.comps[2][i].powi(2))
                .sqrt();
        }
        ScalarField { grid: self.grid, data }
    }

    pub fn lp_mean(&self, p: f64) -> f64 {
        self.magnitude().lp_mean(p)
    }

    pub fn lp_integral(&self, p: f64) -> f64 {
        self.magnitude().lp_integral(p)
    }

    pub fn l2_mean(&self) -> f64 {
        self.lp_mean(2.0)
    }

    pub fn l2_integral(&self) -> f64 {
        self.lp_integral(2.0)
    }

    /// Inhomogeneous Sobolev norm sqrt(sum_k (1+|k|^2)^s |u_hat|^2), mean convention.
    pub fn hs_mean(&self, s: f64) -> f64 {
        self.to_spectrum().hs_mean(s)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Field3 {
            grid: self.grid,
            comps: [
                self.comps[0].iter().map(|v| v * c).collect(),
                self.comps[1].iter().map(|v| v * c).collect(),
                self.comps[2].iter().map(|v| v * c).collect(),
            ],
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid);
        Field3 {
            grid: self.grid,
            comps: [
                self.comps[0].iter().zip(&other.comps[0]).map(|(a, b)| f(*a, *b)).collect(),
                self.comps[1].iter().zip(&other.comps[1]).map(|(a, b)| f(*a, *b)).collect(),
                self.comps[2].iter().zip(&other.comps[2]).map(|(a, b)| f(*a, *b)).collect(),
            ],
        }
    }

    pub fn dot(&self, other: &Self) -> ScalarField {
        assert_eq!(self.grid, other.grid);
        let mut data = vec![0.0; self.grid.len()];
        for (i, v) in data.iter_mut().enumerate() {
            *v = self.comps[0][i] * other.comps[0][i]
                + self.comps[1][i] * other.comps[1][i]
                + self.comps[2][i] * other.comps[2][i];
        }
        ScalarField { grid: self.grid, data }
    }

    /// Pointwise tensor product u (x) v.
    pub fn outer(&self, other: &Self) -> TensorField3 {
        assert_eq!(self.grid, other.grid);
        let mut comps: Vec<Vec<f64>> = (0..9).map(|_| vec![0.0; self.grid.len()]).collect();
        for a in 0..3 {
            for b in 0..3 {
                let dst = &mut comps[3 * a + b];
                for (i, v) in dst.iter_mut().enumerate() {
                    *v = self.comps[a][i] * other.comps[b][i];
                }
            }
        }
        TensorField3 { grid: self.grid, comps, class: SymmetryClass::General }
    }

    /// Traceless tensor product.
    pub fn outer_traceless(&self, other: &Self) -> TensorField3 {
        self.outer(other).traceless()
    }

    pub fn mul_scalar(&self, s: &ScalarField) -> Self {
        assert_eq!(self.grid, s.grid);
        Field3 {
            grid: self.grid,
            comps: [
                self.comps[0].iter().zip(&s.data).map(|(a, b)| a * b).collect(),
                self.comps[1].iter().zip(&s.data).map(|(a, b)| a * b).collect(),
                self.comps[2].iter().zip(&s.data).map(|(a, b)| a * b).collect(),
            ],
        }
    }
}

/// Complex spectrum of a 3-vector field.
#[derive(Clone, Debug)]
pub struct SpecField3 {
    pub grid: Grid,
    pub comps: [Vec<Complex64>; 3],
}

impl SpecField3 {
    pub fn zeros(grid: Grid) -> Self {
        let z = vec![Complex64::default(); grid.len()];
        SpecField3 { grid, comps: [z.clone(), z.clone(), z] }
    }

    pub fn to_field(&self) -> Field3 {
        Field3 {
            grid: self.grid,
            comps: [
                spectrum_to_real(&self.comps[0], self.grid.n),
                spectrum_to_real(&self.comps[1], self.grid.n),
                spectrum_to_real(&self.comps[2], self.grid.n),
            ],
        }
    }

    pub fn hs_mean(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for lin in 0..self.grid.len() {
            let k = self.grid.wavevector(lin);
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            let w = (1.0 + k2).powf(s);
            let e = self.comps[0][lin].norm_sqr()
                + self.comps[1][lin].norm_sqr()
                + self.comps[2][lin].norm_sqr();
            acc += w * e;
        }
        acc.sqrt()
    }

    /// Homogeneous Sobolev seminorm sqrt(sum |k|^{2s} |u_hat|^2), mean convention.
    pub fn hs_dot_mean(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for lin in 0..self.grid.len() {
            let k = self.grid.wavevector(lin);
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            if k2 == 0.0 {
                continue;
            }
            let e = self.comps[0][lin].norm_sqr()
                + self.comps[1][lin].norm_sqr()
                + self.comps[2][lin].norm_sqr();
            acc += k2.powf(s) * e;
        }
        acc.sqrt()
    }

    pub fn apply_multiplier(&mut self, m: impl Fn([i64; 3]) -> f64 + Sync + Copy) {
        for c in self.comps.iter_mut() {
            for (lin, v) in c.iter_mut().enumerate() {
                *v *= m(self.grid.wavevector(lin));
            }
        }
    }

    pub fn max_active_freq(&self, rel_tol: f64) -> i64 {
        let peak = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if peak == 0.0 {
            return 0;
        }
        let mut kmax = 0;
        for c in &self.comps {
            for (lin, v) in c.iter().enumerate() {
                if v.norm() > rel_tol * peak {
                    let k = self.grid.wavevector(lin);
                    kmax = kmax.max(k[0].abs().max(k[1].abs()).max(k[2].abs()));
                }
            }
        }
        kmax
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryClass {
    SymmetricTraceless,
    Skew,
    General,
}

/// Real 3x3-matrix samples, row-major component storage.
#[derive(Clone, Debug)]
pub struct TensorField3 {
    pub grid: Grid,
    /// comps[3*i + j] holds entry (i, j).
    pub comps: Vec<Vec<f64>>,
    pub class: SymmetryClass,
}

impl TensorField3 {
    pub fn zeros(grid: Grid, class: SymmetryClass) -> Self {
        TensorField3 { grid, comps: (0..9).map(|_| vec![0.0; grid.len()]).collect(), class }
    }

    pub fn from_fn(
        grid: Grid,
        class: SymmetryClass,
        f: impl Fn(f64, f64, f64) -> [[f64; 3]; 3],
    ) -> Result<Self> {
        let n = grid.n;
        let mut t = Self::zeros(grid, SymmetryClass::General);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let m = f(grid.coord(i), grid.coord(j), grid.coord(k));
                    let idx = grid.idx(i, j, k);
                    for a in 0..3 {
                        for b in 0..3 {
                            t.comps[3 * a + b][idx] = m[a][b];
                        }
                    }
                }
            }
        }
        t.with_class(class)
    }

    /// Tags and verifies the symmetry class pointwise (tolerance 1e-12 relative).
    pub fn with_class(mut self, class: SymmetryClass) -> Result<Self> {
        let res = self.class_residual(class);
        if res > 1e-12 {
            return Err(Error::Invalid(format!(
                "symmetry class {class:?} violated: relative residual {res:.3e}"
            )));
        }
        self.class = class;
        Ok(self)
    }

    /// Relative pointwise residual against a symmetry class.
    pub fn class_residual(&self, class: SymmetryClass) -> f64 {
        let scale = self
            .comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.abs())
            .fold(0.0, f64::max)
            .max(1e-300);
        let mut worst = 0.0f64;
        match class {
            SymmetryClass::General => {}
            SymmetryClass::SymmetricTraceless => {
                for i in 0..self.grid.len() {
                    let tr = self.comps[0][i] + self.comps[4][i] + self.comps[8][i];
                    worst = worst.max(tr.abs());
                    for a in 0..3 {
                        for b in (a + 1)..3 {
                            worst = worst
                                .max((self.comps[3 * a + b][i] - self.comps[3 * b + a][i]).abs());
                        }
                    }
                }
            }
            SymmetryClass::Skew => {
                for i in 0..self.grid.len() {
                    for a in 0..3 {
                        worst = worst.max(self.comps[3 * a + a][i].abs());
                        for b in (a + 1)..3 {
                            worst = worst
                                .max((self.comps[3 * a + b][i] + self.comps[3 * b + a][i]).abs());
                        }
                    }
                }
            }
        }
        worst / scale
    }

    pub fn entry(&self, a: usize, b: usize) -> &Vec<f64> {
        &self.comps[3 * a + b]
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |x, y| x - y)
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid);
        let class = if self.class == other.class { self.class } else { SymmetryClass::General };
        TensorField3 {
            grid: self.grid,
            comps: (0..9)
                .map(|c| {
                    self.comps[c]
                        .iter()
                        .zip(&other.comps[c])
                        .map(|(a, b)| f(*a, *b))
                        .collect()
                })
                .collect(),
            class,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        TensorField3 {
            grid: self.grid,
            comps: self.comps.iter().map(|v| v.iter().map(|x| x * c).collect()).collect(),
            class: self.class,
        }
    }

    pub fn mul_scalar(&self, s: &ScalarField) -> Self {
        assert_eq!(self.grid, s.grid);
        TensorField3 {
            grid: self.grid,
            comps: self
                .comps
                .iter()
                .map(|v| v.iter().zip(&s.data).map(|(x, w)| x * w).collect())
                .collect(),
            class: self.class,
        }
    }

    /// Removes the pointwise trace: T - (tr T / 3) Id.
    pub fn traceless(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.grid.len() {
            let tr = (self.comps[0][i] + self.comps[4][i] + self.comps[8][i]) / 3.0;
            out.comps[0][i] -= tr;
            out.comps[4][i] -= tr;
            out.comps[8][i] -= tr;
        }
        out.class = SymmetryClass::General;
        out
    }

    pub fn transpose(&self) -> Self {
        let mut comps: Vec<Vec<f64>> = (0..9).map(|_| Vec::new()).collect();
        for a in 0..3 {
            for b in 0..3 {
                comps[3 * a + b] = self.comps[3 * b + a].clone();
            }
        }
        TensorField3 { grid: self.grid, comps, class: self.class }
    }

    /// Pointwise Frobenius norm.
    pub fn frobenius(&self) -> ScalarField {
        let mut data = vec![0.0; self.grid.len()];
        for c in &self.comps {
            for (i, v) in c.iter().enumerate() {
                data[i] += v * v;
            }
        }
        for v in data.iter_mut() {
            *v = v.sqrt();
        }
        ScalarField { grid: self.grid, data }
    }

    pub fn lp_mean(&self, p: f64) -> f64 {
        self.frobenius().lp_mean(p)
    }

    pub fn lp_integral(&self, p: f64) -> f64 {
        self.frobenius().lp_integral(p)
    }

    pub fn linf(&self) -> f64 {
        self.frobenius().lp_mean(f64::INFINITY)
    }

    /// Right product with a vector field: (T v)_i = T_ij v_j.
    pub fn mul_vec(&self, v: &Field3) -> Field3 {
        assert_eq!(self.grid, v.grid);
        let mut out = Field3::zeros(self.grid);
        for a in 0..3 {
            for b in 0..3 {
                let t = &self.comps[3 * a + b];
                let src = &v.comps[b];
                let dst = &mut out.comps[a];
                for i in 0..dst.len() {
                    dst[i] += t[i] * src[i];
                }
            }
        }
        out
    }

    /// Inhomogeneous Sobolev norm of the tensor (sum over entries).
    pub fn hs_mean(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for c in &self.comps {
            let spec = real_to_spectrum(c, self.grid.n);
            for (lin, v) in spec.iter().enumerate() {
                let k = self.grid.wavevector(lin);
                let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
                acc += (1.0 + k2).powf(s) * v.norm_sqr();
            }
        }
        acc.sqrt()
    }
}

/// Pair norm ||(u, v)|| = ||u|| + ||v|| used for coupled velocity/magnetic bounds.
pub fn pair_norm(a: f64, b: f64) -> f64 {
    a + b
}
