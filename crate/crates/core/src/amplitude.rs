//! Amplitude construction: the smooth growth cutoff, pointwise energy-density
//! fields, temporal cutoffs, the transverse compensation matrix and the
//! per-direction amplitude fields for both flow families.

use crate::blocks::BlockFlow;
use crate::error::{Error, Result};
use crate::geometry::{to_f64_vec, DecompositionKind, GammaSolver};
use crate::rat::rat_to_f64;
use crate::spectral::{Field3, Grid, ScalarField, SymmetryClass, TensorField3};

// ---------------------------------------------------------------------------
// smoothstep primitives
// ---------------------------------------------------------------------------

/// Quintic smoothstep, C^2 at the seams.
pub fn smoothstep5(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
    }
}

const STEP9: [f64; 10] = [0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0];

/// Ninth-order smoothstep, C^4 at the seams.
pub fn smoothstep9(x: f64) -> f64 {
    smoothstep9_deriv(x, 0)
}

/// Exact piecewise-polynomial derivatives of the ninth-order smoothstep.
pub fn smoothstep9_deriv(x: f64, order: usize) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return if order == 0 && x > 1.0 { 1.0 } else { 0.0 };
    }
    let mut c = STEP9.to_vec();
    for _ in 0..order {
        c = (1..c.len()).map(|i| c[i] * i as f64).collect();
        if c.is_empty() {
            return 0.0;
        }
    }
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

// ---------------------------------------------------------------------------
// growth cutoff
// ---------------------------------------------------------------------------

/// Smooth cutoff: 1 on [0,1], identity on [2,inf), blended on (1,2) through a
/// quintic smoothstep of the log variable; satisfies z/2 <= chi(z) <= 2z there.
pub fn chi(z: f64) -> Result<f64> {
    if z < 0.0 {
        return Err(Error::Domain(format!("cutoff argument {z} must be nonnegative")));
    }
    Ok(chi_raw(z))
}

#[inline]
pub(crate) fn chi_raw(z: f64) -> f64 {
    if z <= 1.0 {
        1.0
    } else if z >= 2.0 {
        z
    } else {
        let s = smoothstep5(z.ln() / std::f64::consts::LN_2);
        (1.0 - s) + s * z
    }
}

// ---------------------------------------------------------------------------
// energy density
// ---------------------------------------------------------------------------

/// Pointwise density rho = 2 eps^-1 scale chi(|R|/scale); guarantees
/// |R|/rho <= eps and rho >= 2 eps^-1 scale everywhere.
pub fn rho_field(stress: &TensorField3, scale: f64, eps_geom: f64) -> Result<ScalarField> {
    if scale <= 0.0 || eps_geom <= 0.0 {
        return Err(Error::Domain("scale and eps_geom must be positive".into()));
    }
    let frob = stress.frobenius();
    let c = 2.0 / eps_geom * scale;
    Ok(ScalarField {
        grid: stress.grid,
        data: frob.data.iter().map(|&f| c * chi_raw(f / scale)).collect(),
    })
}

// ---------------------------------------------------------------------------
// temporal cutoff
// ---------------------------------------------------------------------------

/// Smooth time cutoff equal to one on the given intervals, supported in their
/// theta/2-neighborhood, built from the C^4 smoothstep ramp.
#[derive(Clone, Debug)]
pub struct TimeCutoff {
    pub plateaus: Vec<(f64, f64)>,
    pub ramp: f64,
}

impl TimeCutoff {
    pub fn new(intervals: &[(f64, f64)], theta: f64) -> Result<Self> {
        if theta <= 0.0 {
            return Err(Error::Domain("theta must be positive".into()));
        }
        let ramp = theta / 2.0;
        let mut iv: Vec<(f64, f64)> = intervals
            .iter()
            .filter(|(a, b)| b > a)
            .map(|&(a, b)| (a, b))
            .collect();
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        // merge intervals whose padded versions overlap
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in iv {
            match merged.last_mut() {
                Some(last) if a - ramp <= last.1 + ramp => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Ok(TimeCutoff { plateaus: merged, ramp })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_deriv(t, 0)
    }

    /// Exact piecewise derivative of order `order`.
    pub fn eval_deriv(&self, t: f64, order: usize) -> f64 {
        for &(a, b) in &self.plateaus {
            if t >= a && t <= b {
                return if order == 0 { 1.0 } else { 0.0 };
            }
            if t > a - self.ramp && t < a {
                let scale = (1.0 / self.ramp).powi(order as i32);
                return scale * smoothstep9_deriv((t - (a - self.ramp)) / self.ramp, order);
            }
            if t > b && t < b + self.ramp {
                let scale = (1.0 / self.ramp).powi(order as i32);
                let s = smoothstep9_deriv((b + self.ramp - t) / self.ramp, order);
                return if order % 2 == 0 { scale * s } else { -scale * s };
            }
        }
        0.0
    }

    pub fn support(&self) -> Vec<(f64, f64)> {
        self.plateaus.iter().map(|&(a, b)| (a - self.ramp, b + self.ramp)).collect()
    }

    /// Measured sup |f^(N)| over a dense grid (exact piecewise derivatives).
    pub fn seminorm(&self, order: usize, samples: usize) -> f64 {
        if self.plateaus.is_empty() {
            return 0.0;
        }
        let lo = self.plateaus.first().unwrap().0 - self.ramp;
        let hi = self.plateaus.last().unwrap().1 + self.ramp;
        (0..=samples)
            .map(|i| {
                let t = lo + (hi - lo) * i as f64 / samples as f64;
                self.eval_deriv(t, order).abs()
            })
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// amplitude fields
// ---------------------------------------------------------------------------

/// Per-direction amplitude fields at one time slice (the temporal cutoff value
/// is folded in by the caller).
#[derive(Clone, Debug)]
pub struct AmplitudeSlice {
    /// a_(k) on the grid, one per solver direction.
    pub per_k: Vec<ScalarField>,
    pub rho: ScalarField,
    pub cutoff_value: f64,
}

fn solver_f64(solver: &GammaSolver) -> (Vec<f64>, Vec<Vec<f64>>) {
    let c: Vec<f64> = solver.c.iter().map(rat_to_f64).collect();
    let linear: Vec<Vec<f64>> = solver
        .linear
        .iter()
        .map(|row| row.iter().map(rat_to_f64).collect())
        .collect();
    (c, linear)
}

fn stress_entries(stress: &TensorField3, idx: usize) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            m[a][b] = stress.comps[3 * a + b][idx];
        }
    }
    m
}

/// Magnetic amplitudes a_(k) = rho^(1/2) f gamma_(k)(-R/rho) for the skew
/// stress R at one time slice.
pub fn amplitudes_b(
    stress: &TensorField3,
    scale: f64,
    eps_geom: f64,
    solver: &GammaSolver,
    cutoff_value: f64,
) -> Result<AmplitudeSlice> {
    if solver.kind != DecompositionKind::SkewNearZero {
        return Err(Error::Regime("magnetic amplitudes need the skew decomposition".into()));
    }
    let rho = rho_field(stress, scale, eps_geom)?;
    let (c, linear) = solver_f64(solver);
    let grid = stress.grid;
    let mut per_k: Vec<ScalarField> = (0..solver.frames.len())
        .map(|_| ScalarField::zeros(grid))
        .collect();
    for idx in 0..grid.len() {
        let r = rho.data[idx];
        let m = stress_entries(stress, idx);
        // axis coordinates of -R/rho
        let x = [-m[2][1] / r, -m[0][2] / r, -m[1][0] / r];
        let dev = (2.0 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).sqrt();
        if dev > solver.radius * (1.0 + 1e-12) {
            return Err(Error::BallViolation(format!(
                "skew deviation {dev:.3e} exceeds certified radius {:.3e} at grid index {idx}",
                solver.radius
            )));
        }
        for k in 0..per_k.len() {
            let g2 = c[k] + linear[k][0] * x[0] + linear[k][1] * x[1] + linear[k][2] * x[2];
            if g2 <= 0.0 {
                return Err(Error::BallViolation(format!(
                    "gamma^2 = {g2:.3e} not positive at grid index {idx}"
                )));
            }
            per_k[k].data[idx] = (r * g2).sqrt() * cutoff_value;
        }
    }
    Ok(AmplitudeSlice { per_k, rho, cutoff_value })
}

/// Velocity amplitudes a_(k) = rho^(1/2) f gamma_(k)(Id - (R + G)/rho) for the
/// symmetric traceless stress R and the compensation matrix G at one slice.
pub fn amplitudes_u(
    stress: &TensorField3,
    compensation: &TensorField3,
    scale: f64,
    eps_geom: f64,
    solver: &GammaSolver,
    cutoff_value: f64,
) -> Result<AmplitudeSlice> {
    if solver.kind != DecompositionKind::SymmetricNearId {
        return Err(Error::Regime("velocity amplitudes need the symmetric decomposition".into()));
    }
    let total = stress.add(compensation);
    let rho = rho_field(&total, scale, eps_geom)?;
    let (c, linear) = solver_f64(solver);
    let grid = stress.grid;
    let mut per_k: Vec<ScalarField> = (0..solver.frames.len())
        .map(|_| ScalarField::zeros(grid))
        .collect();
    for idx in 0..grid.len() {
        let r = rho.data[idx];
        let m = stress_entries(&total, idx);
        // deviation of Id - M/rho from Id is -M/rho
        let x = [
            -m[0][0] / r,
            -m[1][1] / r,
            -m[2][2] / r,
            -m[0][1] / r,
            -m[0][2] / r,
            -m[1][2] / r,
        ];
        let dev = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
            + 2.0 * (x[3] * x[3] + x[4] * x[4] + x[5] * x[5]))
            .sqrt();
        if dev > solver.radius * (1.0 + 1e-12) {
            return Err(Error::BallViolation(format!(
                "symmetric deviation {dev:.3e} exceeds certified radius {:.3e} at index {idx}",
                solver.radius
            )));
        }
        for k in 0..per_k.len() {
            let g2 = c[k]
                + linear[k].iter().zip(&x).map(|(w, xv)| w * xv).sum::<f64>();
            if g2 <= 0.0 {
                return Err(Error::BallViolation(format!(
                    "gamma^2 = {g2:.3e} not positive at grid index {idx}"
                )));
            }
            per_k[k].data[idx] = (r * g2).sqrt() * cutoff_value;
        }
    }
    // subspace-consistency for incomplete direction sets: reconstruct and compare
    if !solver.complete {
        let rec = reconstruct_symmetric(solver, &per_k, &rho, cutoff_value, grid);
        let target = symmetric_target(&total, &rho, cutoff_value, grid);
        let err = rec.sub(&target).linf();
        let scale_ref = target.linf().max(1e-300);
        if err > 1e-8 * scale_ref {
            return Err(Error::BallViolation(format!(
                "stress leaves the reconstructible subspace of an incomplete set \
                 (residual {:.3e})",
                err / scale_ref
            )));
        }
    }
    Ok(AmplitudeSlice { per_k, rho, cutoff_value })
}

fn reconstruct_symmetric(
    solver: &GammaSolver,
    per_k: &[ScalarField],
    _rho: &ScalarField,
    _f: f64,
    grid: Grid,
) -> TensorField3 {
    let mut out = TensorField3::zeros(grid, SymmetryClass::General);
    for (k, f) in solver.frames.iter().enumerate() {
        let k1 = to_f64_vec(&f.k1);
        for a in 0..3 {
            for b in 0..3 {
                let w = k1[a] * k1[b];
                let dst = &mut out.comps[3 * a + b];
                for (i, v) in per_k[k].data.iter().enumerate() {
                    dst[i] += w * v * v;
                }
            }
        }
    }
    out
}

fn symmetric_target(
    total: &TensorField3,
    rho: &ScalarField,
    f: f64,
    grid: Grid,
) -> TensorField3 {
    // rho f^2 Id - f^2 (R + G)
    let mut out = total.scaled(-f * f);
    for d in 0..3 {
        let dst = &mut out.comps[3 * d + d];
        for (i, v) in rho.data.iter().enumerate() {
            dst[i] += f * f * v;
        }
    }
    out.class = SymmetryClass::General;
    let _ = grid;
    out
}

/// Pointwise residual of the skew cancellation core:
/// sum_k a_(k)^2 (k2 (x) k1 - k1 (x) k2) + f^2 R = 0.
pub fn magnetic_core_residual(
    amps: &AmplitudeSlice,
    solver: &GammaSolver,
    stress: &TensorField3,
) -> f64 {
    let grid = stress.grid;
    let f2 = amps.cutoff_value * amps.cutoff_value;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for idx in 0..grid.len() {
        let mut rec = [[0.0f64; 3]; 3];
        for (k, fr) in solver.frames.iter().enumerate() {
            let a2 = amps.per_k[k].data[idx].powi(2);
            let k1 = to_f64_vec(&fr.k1);
            let k2 = to_f64_vec(&fr.k2);
            for a in 0..3 {
                for b in 0..3 {
                    rec[a][b] += a2 * (k2[a] * k1[b] - k1[a] * k2[b]);
                }
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                let target = -f2 * stress.comps[3 * a + b][idx];
                worst = worst.max((rec[a][b] - target).abs());
                scale = scale.max(target.abs());
            }
        }
    }
    worst / scale.max(1e-300)
}

/// Pointwise residual of the symmetric cancellation core:
/// sum_k a_(k)^2 k1 (x) k1 = rho f^2 Id - f^2 (R + G).
pub fn velocity_core_residual(
    amps: &AmplitudeSlice,
    solver: &GammaSolver,
    stress: &TensorField3,
    compensation: &TensorField3,
) -> f64 {
    let grid = stress.grid;
    let total = stress.add(compensation);
    let rec = reconstruct_symmetric(solver, &amps.per_k, &amps.rho, amps.cutoff_value, grid);
    let target = symmetric_target(&total, &amps.rho, amps.cutoff_value, grid);
    let err = rec.sub(&target).linf();
    err / target.linf().max(1e-300)
}

/// Transverse compensation matrix
/// G = sum_k a_(k)^2 mean(W (x) W - D (x) D) built from the magnetic set:
/// mean(W (x) W - D (x) D) = c_phi (k1 (x) k1 - k2 (x) k2), trace-free.
pub fn g_matrix(
    amps: &AmplitudeSlice,
    solver: &GammaSolver,
    flows: &[BlockFlow],
) -> Result<TensorField3> {
    if flows.len() != solver.frames.len() {
        return Err(Error::FrameMismatch(format!(
            "{} flows for {} directions",
            flows.len(),
            solver.frames.len()
        )));
    }
    let grid = amps.rho.grid;
    let mut out = TensorField3::zeros(grid, SymmetryClass::General);
    for (k, flow) in flows.iter().enumerate() {
        let c = flow.mean_amplitude_sq();
        let k1 = to_f64_vec(&flow.frame.k1);
        let k2 = to_f64_vec(&flow.frame.k2);
        for a in 0..3 {
            for b in 0..3 {
                let w = c * (k1[a] * k1[b] - k2[a] * k2[b]);
                if w == 0.0 {
                    continue;
                }
                let dst = &mut out.comps[3 * a + b];
                for (i, v) in amps.per_k[k].data.iter().enumerate() {
                    dst[i] += w * v * v;
                }
            }
        }
    }
    out.with_class(SymmetryClass::SymmetricTraceless)
}

/// Mean tensor of one flow pair: mean(D (x) W - W (x) D) = c (k2 (x) k1 - k1 (x) k2).
pub fn mean_skew_tensor(flow: &BlockFlow) -> [[f64; 3]; 3] {
    let c = flow.mean_amplitude_sq();
    let k1 = to_f64_vec(&flow.frame.k1);
    let k2 = to_f64_vec(&flow.frame.k2);
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            m[a][b] = c * (k2[a] * k1[b] - k1[a] * k2[b]);
        }
    }
    m
}

/// Mean tensor mean(W (x) W) = c k1 (x) k1.
pub fn mean_ww_tensor(flow: &BlockFlow) -> [[f64; 3]; 3] {
    let c = flow.mean_amplitude_sq();
    let k1 = to_f64_vec(&flow.frame.k1);
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            m[a][b] = c * k1[a] * k1[b];
        }
    }
    m
}

/// Mean tensor mean(W (x) W - D (x) D) = c (k1 (x) k1 - k2 (x) k2).
pub fn mean_ww_minus_dd_tensor(flow: &BlockFlow) -> [[f64; 3]; 3] {
    let c = flow.mean_amplitude_sq();
    let k1 = to_f64_vec(&flow.frame.k1);
    let k2 = to_f64_vec(&flow.frame.k2);
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            m[a][b] = c * (k1[a] * k1[b] - k2[a] * k2[b]);
        }
    }
    m
}

/// grad(a^2) for one amplitude field (spectral).
pub fn grad_amp_sq(a: &ScalarField) -> Field3 {
    crate::spectral::ops::gradient(&a.mul(a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::toy_run_frames_shear;
    use crate::synth;

    #[test]
    fn chi_branches_and_sandwich() {
        assert_eq!(chi(0.5).unwrap(), 1.0);
        assert_eq!(chi(3.0).unwrap(), 3.0);
        let v = chi(1.5).unwrap();
        assert!((0.75..=3.0).contains(&v));
        assert!(chi(-0.1).is_err());
        // sandwich and monotonicity on a dense sweep
        let mut prev = 1.0;
        for i in 0..=2000 {
            let z = 1.0 + i as f64 / 2000.0;
            let c = chi(z).unwrap();
            assert!(c >= 0.5 * z - 1e-12 && c <= 2.0 * z + 1e-12, "z={z} chi={c}");
            assert!(c >= prev - 1e-12);
            prev = c;
        }
    }

    #[test]
    fn rho_examples() {
        let grid = Grid::new(8).unwrap();
        let eps = 0.5;
        let scale = 0.3;
        // zero stress -> rho = 2 eps^-1 scale
        let zero = TensorField3::zeros(grid, SymmetryClass::Skew);
        let rho = rho_field(&zero, scale, eps).unwrap();
        for v in &rho.data {
            assert!((v - 2.0 / eps * scale).abs() < 1e-14);
        }
        // |R| = 10 scale -> rho = 20 eps^-1 scale, ratio eps/2
        let mag = 10.0 * scale / 2.0f64.sqrt(); // Frobenius of the 2-entry skew = sqrt(2)*mag
        let big = TensorField3::from_fn(grid, SymmetryClass::Skew, |_, _, _| {
            [[0.0, mag, 0.0], [-mag, 0.0, 0.0], [0.0, 0.0, 0.0]]
        })
        .unwrap();
        let rho = rho_field(&big, scale, eps).unwrap();
        for v in &rho.data {
            assert!((v - 20.0 / eps * scale).abs() < 1e-10);
        }
        // pointwise bound |R|/rho <= eps on a random stress
        let r = synth::synthetic_skew(grid, 3, 1.0, 11);
        let rho = rho_field(&r, scale, eps).unwrap();
        let frob = r.frobenius();
        for (f, v) in frob.data.iter().zip(&rho.data) {
            assert!(f / v <= eps + 1e-12);
        }
    }

    #[test]
    fn cutoff_template() {
        let f = TimeCutoff::new(&[(0.4, 0.6)], 0.1).unwrap();
        for t in [0.4, 0.45, 0.6] {
            assert_eq!(f.eval(t), 1.0);
        }
        for t in [0.33, 0.67, 0.0, 1.0] {
            assert_eq!(f.eval(t), 0.0);
        }
        assert!(f.eval(0.37) > 0.0 && f.eval(0.37) < 1.0);
        // empty support
        let z = TimeCutoff::new(&[], 0.1).unwrap();
        assert_eq!(z.eval(0.5), 0.0);
        // merged overlaps
        let m = TimeCutoff::new(&[(0.1, 0.2), (0.24, 0.3)], 0.1).unwrap();
        assert_eq!(m.plateaus.len(), 1);
        // seminorm scaling: theta * ||f'|| bounded across a theta ladder
        let mut consts = Vec::new();
        for theta in [0.1, 0.05, 0.025] {
            let f = TimeCutoff::new(&[(0.4, 0.6)], theta).unwrap();
            consts.push(f.seminorm(1, 20000) * theta);
        }
        let cmax = consts.iter().cloned().fold(0.0, f64::max);
        let cmin = consts.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(cmax / cmin < 1.05, "{consts:?}");
    }

    #[test]
    fn magnetic_amplitudes_cancel() {
        let grid = Grid::new(16).unwrap();
        let sets = toy_run_frames_shear();
        let gb = sets.gamma_b.unwrap();
        let stress = synth::synthetic_skew(grid, 2, 0.05, 42);
        let a = amplitudes_b(&stress, 0.5, gb.radius, &gb, 1.0).unwrap();
        let resid = magnetic_core_residual(&a, &gb, &stress);
        assert!(resid < 1e-10, "core residual {resid:.3e}");
        // zero stress: kernel coefficients reconstruct zero
        let zero = TensorField3::zeros(grid, SymmetryClass::Skew);
        let a0 = amplitudes_b(&zero, 0.5, gb.radius, &gb, 1.0).unwrap();
        let mut rec = [[0.0f64; 3]; 3];
        for (k, fr) in gb.frames.iter().enumerate() {
            let a2 = a0.per_k[k].data[0].powi(2);
            let k1 = to_f64_vec(&fr.k1);
            let k2 = to_f64_vec(&fr.k2);
            for i in 0..3 {
                for j in 0..3 {
                    rec[i][j] += a2 * (k2[i] * k1[j] - k1[i] * k2[j]);
                }
            }
        }
        for row in rec {
            for v in row {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn velocity_amplitudes_cancel() {
        let grid = Grid::new(16).unwrap();
        let sets = toy_run_frames_shear();
        let gu = sets.gamma_u.unwrap();
        let stress = synth::synthetic_symmetric_traceless(grid, 2, 0.05, 7);
        let comp = synth::synthetic_symmetric_traceless(grid, 2, 0.02, 8);
        let a = amplitudes_u(&stress, &comp, 0.5, gu.radius, &gu, 1.0).unwrap();
        let resid = velocity_core_residual(&a, &gu, &stress, &comp);
        assert!(resid < 1e-10, "core residual {resid:.3e}");
    }

    #[test]
    fn ball_violation_rejected() {
        let grid = Grid::new(8).unwrap();
        let sets = toy_run_frames_shear();
        let gb = sets.gamma_b.unwrap();
        let stress = synth::synthetic_skew(grid, 2, 5.0, 3);
        // an eps_geom above the certified radius admits deviations the
        // certificate does not cover; the runtime check must reject them
        assert!(matches!(
            amplitudes_b(&stress, 0.5, gb.radius * 4.0, &gb, 1.0),
            Err(Error::BallViolation(_))
        ));
    }

    #[test]
    fn g_matrix_properties() {
        let grid = Grid::new(32).unwrap();
        let sets = toy_run_frames_shear();
        let gb = sets.gamma_b.unwrap();
        let flows: Vec<BlockFlow> = gb
            .frames
            .iter()
            .map(|f| BlockFlow::shear(f.clone(), 4, &crate::rat::rat(1, 4), grid).unwrap())
            .collect();
        let stress = synth::synthetic_skew(grid, 2, 0.05, 5);
        let a = amplitudes_b(&stress, 0.5, gb.radius, &gb, 1.0).unwrap();
        let g = g_matrix(&a, &gb, &flows).unwrap();
        assert!(g.class_residual(SymmetryClass::SymmetricTraceless) < 1e-12);
        // zero amplitudes -> zero matrix
        let zero_amps = AmplitudeSlice {
            per_k: (0..gb.frames.len()).map(|_| ScalarField::zeros(grid)).collect(),
            rho: ScalarField::zeros(grid),
            cutoff_value: 0.0,
        };
        let g0 = g_matrix(&zero_amps, &gb, &flows).unwrap();
        assert_eq!(g0.linf(), 0.0);
    }
}
