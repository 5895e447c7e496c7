//! Assembly of the velocity and magnetic perturbations from amplitudes and
//! building blocks: principal parts, incompressibility correctors, temporal
//! correctors, and the verification of every algebraic identity they satisfy.

use crate::amplitude::{
    amplitudes_b, amplitudes_u, g_matrix, grad_amp_sq, mean_skew_tensor, mean_ww_minus_dd_tensor,
    mean_ww_tensor, AmplitudeSlice, TimeCutoff,
};
use crate::blocks::{BlockFlow, FlowKind};
use crate::error::{Error, Result};
use crate::geometry::{to_f64_vec, GammaSolver};
use crate::profiles::TemporalPair;
use crate::spectral::ops::{curl, divergence, gradient, leray_project};
use crate::spectral::{Field3, Grid, ScalarField, SymmetryClass, TensorField3};
use std::sync::Arc;

/// Supplier of the level-q stresses as functions of time.
pub trait StressSource: Send + Sync {
    fn stress_u(&self, grid: Grid, t: f64) -> Result<TensorField3>;
    fn stress_b(&self, grid: Grid, t: f64) -> Result<TensorField3>;
    /// Temporal support intervals of the two stresses.
    fn support_u(&self) -> Vec<(f64, f64)>;
    fn support_b(&self) -> Vec<(f64, f64)>;
}

/// Band-limited synthetic stress pair under a smooth time envelope.
pub struct SyntheticStress {
    pub pattern_u: TensorField3,
    pub pattern_b: TensorField3,
    pub window: (f64, f64),
}

impl SyntheticStress {
    fn envelope(&self, t: f64) -> f64 {
        let (t0, t1) = self.window;
        if t <= t0 || t >= t1 {
            0.0
        } else {
            let x = (t - t0) / (t1 - t0);
            crate::amplitude::smoothstep9(2.0 * x.min(1.0 - x))
        }
    }
}

impl StressSource for SyntheticStress {
    fn stress_u(&self, grid: Grid, t: f64) -> Result<TensorField3> {
        assert_eq!(grid, self.pattern_u.grid);
        Ok(self.pattern_u.scaled(self.envelope(t)))
    }
    fn stress_b(&self, grid: Grid, t: f64) -> Result<TensorField3> {
        assert_eq!(grid, self.pattern_b.grid);
        Ok(self.pattern_b.scaled(self.envelope(t)))
    }
    fn support_u(&self) -> Vec<(f64, f64)> {
        vec![self.window]
    }
    fn support_b(&self) -> Vec<(f64, f64)> {
        vec![self.window]
    }
}

/// All level parameters and shared machinery needed to assemble the
/// perturbation at an arbitrary time.
pub struct LevelContext {
    pub grid: Grid,
    pub regime: FlowKind,
    pub vel_solver: GammaSolver,
    pub mag_solver: GammaSolver,
    pub vel_flows: Vec<BlockFlow>,
    pub mag_flows: Vec<BlockFlow>,
    pub temporal: TemporalPair,
    pub sigma: f64,
    pub mu: Option<f64>,
    /// Amplitude scale of the magnetic stress (planner: lambda^(-eps_R/4) delta).
    pub scale_b: f64,
    /// Amplitude scale of the velocity stress (planner: delta).
    pub scale_u: f64,
    pub eps_b: f64,
    pub eps_u: f64,
    pub cutoff_b: TimeCutoff,
    pub cutoff_u: TimeCutoff,
    pub stresses: Arc<dyn StressSource>,
    /// Negative-control switch: drops every temporal corrector from both the
    /// perturbations and the matching stress terms.
    pub temporal_correctors: bool,
}

/// One time slice of the assembled perturbation with itemized components.
pub struct PerturbationSlice {
    pub t: f64,
    pub amps_u: AmplitudeSlice,
    pub amps_b: AmplitudeSlice,
    pub g_mat: TensorField3,
    pub w_p: Field3,
    pub w_c: Field3,
    pub w_o: Field3,
    pub w_t: Option<Field3>,
    pub d_p: Field3,
    pub d_c: Field3,
    pub d_o: Field3,
    pub d_t: Option<Field3>,
}

impl PerturbationSlice {
    pub fn w_total(&self) -> Field3 {
        let mut w = self.w_p.add(&self.w_c).add(&self.w_o);
        if let Some(wt) = &self.w_t {
            w = w.add(wt);
        }
        w
    }

    pub fn d_total(&self) -> Field3 {
        let mut d = self.d_p.add(&self.d_c).add(&self.d_o);
        if let Some(dt) = &self.d_t {
            d = d.add(dt);
        }
        d
    }
}

impl LevelContext {
    pub fn builders(
        grid: Grid,
        regime: FlowKind,
        vel_solver: GammaSolver,
        mag_solver: GammaSolver,
        vel_flows: Vec<BlockFlow>,
        mag_flows: Vec<BlockFlow>,
        temporal: TemporalPair,
        mu: Option<f64>,
        scale_b: f64,
        scale_u: f64,
        theta: f64,
        stresses: Arc<dyn StressSource>,
    ) -> Result<Self> {
        if vel_flows.len() != vel_solver.frames.len()
            || mag_flows.len() != mag_solver.frames.len()
        {
            return Err(Error::FrameMismatch(
                "flow count must match the direction count of each solver".into(),
            ));
        }
        for (f, s) in vel_flows.iter().zip(&vel_solver.frames) {
            if f.frame != *s {
                return Err(Error::FrameMismatch("velocity flow frames out of order".into()));
            }
        }
        for (f, s) in mag_flows.iter().zip(&mag_solver.frames) {
            if f.frame != *s {
                return Err(Error::FrameMismatch("magnetic flow frames out of order".into()));
            }
        }
        let cutoff_b = TimeCutoff::new(&stresses.support_b(), theta)?;
        // the velocity cutoff covers the velocity stress and the whole support
        // of the transverse compensation matrix (= support of the magnetic
        // amplitudes, i.e. of the magnetic cutoff)
        let mut u_iv = stresses.support_u();
        u_iv.extend(cutoff_b.support());
        let cutoff_u = TimeCutoff::new(&u_iv, theta)?;
        let sigma = temporal.sigma as f64;
        Ok(LevelContext {
            grid,
            regime,
            vel_solver,
            mag_solver,
            vel_flows,
            mag_flows,
            temporal,
            sigma,
            mu,
            scale_b,
            scale_u,
            eps_b: 0.0,
            eps_u: 0.0,
            cutoff_b,
            cutoff_u,
            stresses,
            temporal_correctors: true,
        }
        .with_default_radii())
    }

    fn with_default_radii(mut self) -> Self {
        self.eps_b = self.mag_solver.radius;
        self.eps_u = self.vel_solver.radius;
        self
    }

    pub fn amplitude_slices(&self, t: f64) -> Result<(AmplitudeSlice, AmplitudeSlice, TensorField3)> {
        let rb = self.stresses.stress_b(self.grid, t)?;
        let amps_b =
            amplitudes_b(&rb, self.scale_b, self.eps_b, &self.mag_solver, self.cutoff_b.eval(t))?;
        let g_mat = g_matrix(&amps_b, &self.mag_solver, &self.mag_flows)?;
        let ru = self.stresses.stress_u(self.grid, t)?;
        let amps_u = amplitudes_u(
            &ru,
            &g_mat,
            self.scale_u,
            self.eps_u,
            &self.vel_solver,
            self.cutoff_u.eval(t),
        )?;
        Ok((amps_u, amps_b, g_mat))
    }

    /// Assembles every perturbation component at time t.
    pub fn slice(&self, t: f64) -> Result<PerturbationSlice> {
        let (amps_u, amps_b, g_mat) = self.amplitude_slices(t)?;
        self.slice_with(t, amps_u, amps_b, g_mat)
    }

    /// Assembly from precomputed amplitude slices (avoids re-deriving them
    /// when a caller already holds the finite-difference stencil).
    pub fn slice_with(
        &self,
        t: f64,
        amps_u: AmplitudeSlice,
        amps_b: AmplitudeSlice,
        g_mat: TensorField3,
    ) -> Result<PerturbationSlice> {
        let g = self.temporal.g_at(t);
        let grid = self.grid;

        let mut w_p = Field3::zeros(grid);
        let mut d_p = Field3::zeros(grid);
        let mut w_c = Field3::zeros(grid);
        let mut d_c = Field3::zeros(grid);

        let add_principal = |amp: &ScalarField, flow: &BlockFlow, into: &mut Field3| -> Result<()> {
            let w = flow.w_field(grid, t)?;
            *into = into.add(&w.mul_scalar(amp).scaled(g));
            Ok(())
        };
        for (k, flow) in self.vel_flows.iter().enumerate() {
            add_principal(&amps_u.per_k[k], flow, &mut w_p)?;
        }
        for (k, flow) in self.mag_flows.iter().enumerate() {
            add_principal(&amps_b.per_k[k], flow, &mut w_p)?;
            let dfield = flow.d_field(grid, t)?;
            d_p = d_p.add(&dfield.mul_scalar(&amps_b.per_k[k]).scaled(g));
        }

        // incompressibility correctors
        let add_corrector = |amp: &ScalarField,
                                 potential: &Field3,
                                 curl_potential: &Field3,
                                 tilde: Option<&Field3>,
                                 into: &mut Field3|
         -> Result<()> {
            let grad_a = gradient(amp);
            let term1 = cross(&grad_a, curl_potential);
            let term2 = curl(&cross(&grad_a, potential));
            let mut sum = term1.add(&term2);
            if let Some(tl) = tilde {
                sum = sum.add(&tl.mul_scalar(amp));
            }
            *into = into.add(&sum.scaled(g));
            Ok(())
        };
        for (k, flow) in self.vel_flows.iter().enumerate() {
            let pot = flow.w_potential(grid, t)?;
            let cp = flow.curl_w_potential(grid, t)?;
            let tilde = match self.regime {
                FlowKind::Shear => None,
                FlowKind::TravelingBox => Some(flow.w_corrector(grid, t)?),
            };
            add_corrector(&amps_u.per_k[k], &pot, &cp, tilde.as_ref(), &mut w_c)?;
        }
        for (k, flow) in self.mag_flows.iter().enumerate() {
            let pot = flow.w_potential(grid, t)?;
            let cp = flow.curl_w_potential(grid, t)?;
            let tilde = match self.regime {
                FlowKind::Shear => None,
                FlowKind::TravelingBox => Some(flow.w_corrector(grid, t)?),
            };
            add_corrector(&amps_b.per_k[k], &pot, &cp, tilde.as_ref(), &mut w_c)?;
            let dpot = flow.d_potential(grid, t)?;
            let dcp = flow.curl_d_potential(grid, t)?;
            let dtilde = match self.regime {
                FlowKind::Shear => None,
                FlowKind::TravelingBox => Some(flow.d_corrector(grid, t)?),
            };
            add_corrector(&amps_b.per_k[k], &dpot, &dcp, dtilde.as_ref(), &mut d_c)?;
        }

        // temporal corrector balancing the g-oscillation of the means
        let (w_o, d_o) = if self.temporal_correctors {
            self.oscillation_correctors(t, &amps_u, &amps_b)?
        } else {
            (Field3::zeros(grid), Field3::zeros(grid))
        };

        // traveling-box corrector balancing the transverse spatial oscillation
        let (w_t, d_t) = if self.regime == FlowKind::TravelingBox {
            if self.temporal_correctors {
                let (a, b) = self.traveling_correctors(t, &amps_u, &amps_b)?;
                (Some(a), Some(b))
            } else {
                (Some(Field3::zeros(grid)), Some(Field3::zeros(grid)))
            }
        } else {
            (None, None)
        };

        Ok(PerturbationSlice {
            t,
            amps_u,
            amps_b,
            g_mat,
            w_p,
            w_c,
            w_o,
            d_p,
            d_c,
            d_o,
            w_t,
            d_t,
        })
    }

    /// -sigma^-1 sum P_H P_neq0 (h mean ( . ) grad(a^2)) for both roles.
    pub fn oscillation_correctors(
        &self,
        t: f64,
        amps_u: &AmplitudeSlice,
        amps_b: &AmplitudeSlice,
    ) -> Result<(Field3, Field3)> {
        let h = self.temporal.h_at(t);
        let grid = self.grid;
        let mut w_acc = Field3::zeros(grid);
        let mut d_acc = Field3::zeros(grid);
        for (k, flow) in self.vel_flows.iter().enumerate() {
            let m = mean_ww_tensor(flow);
            let ga = grad_amp_sq(&amps_u.per_k[k]);
            w_acc = w_acc.add(&apply_const_tensor(&m, &ga));
        }
        for (k, flow) in self.mag_flows.iter().enumerate() {
            let ga = grad_amp_sq(&amps_b.per_k[k]);
            let m = mean_ww_minus_dd_tensor(flow);
            w_acc = w_acc.add(&apply_const_tensor(&m, &ga));
            let ms = mean_skew_tensor(flow);
            d_acc = d_acc.add(&apply_const_tensor(&ms, &ga));
        }
        let c = -h / self.sigma;
        Ok((
            leray_project(&w_acc).scaled(c),
            leray_project(&d_acc).scaled(c),
        ))
    }

    /// -mu^-1 sum P_H P_neq0 (a^2 g^2 psi^2 phi^2 k_dir).
    pub fn traveling_correctors(
        &self,
        t: f64,
        amps_u: &AmplitudeSlice,
        amps_b: &AmplitudeSlice,
    ) -> Result<(Field3, Field3)> {
        let mu = self
            .mu
            .ok_or_else(|| Error::Regime("traveling corrector requires a finite mu".into()))?;
        let g2 = self.temporal.g_at(t).powi(2);
        let grid = self.grid;
        let mut w_acc = Field3::zeros(grid);
        let mut d_acc = Field3::zeros(grid);
        let add = |amp: &ScalarField, flow: &BlockFlow, dir_k2: bool, into: &mut Field3| -> Result<()> {
            let prof = flow.amplitude_scalar(grid, t)?; // psi phi
            let mut s = prof.mul(&prof).mul(&amp.mul(amp)).scaled(g2);
            // remove the mean before projection (P_neq0)
            let mean = s.mean();
            for v in s.data.iter_mut() {
                *v -= mean;
            }
            let dir = if dir_k2 {
                to_f64_vec(&flow.frame.k2)
            } else {
                to_f64_vec(&flow.frame.k1)
            };
            let vecf = Field3 {
                grid,
                comps: [
                    s.data.iter().map(|v| v * dir[0]).collect(),
                    s.data.iter().map(|v| v * dir[1]).collect(),
                    s.data.iter().map(|v| v * dir[2]).collect(),
                ],
            };
            *into = into.add(&vecf);
            Ok(())
        };
        for (k, flow) in self.vel_flows.iter().enumerate() {
            add(&amps_u.per_k[k], flow, false, &mut w_acc)?;
        }
        for (k, flow) in self.mag_flows.iter().enumerate() {
            add(&amps_b.per_k[k], flow, false, &mut w_acc)?;
            add(&amps_b.per_k[k], flow, true, &mut d_acc)?;
        }
        Ok((
            leray_project(&w_acc).scaled(-1.0 / mu),
            leray_project(&d_acc).scaled(-1.0 / mu),
        ))
    }
}

fn cross(a: &Field3, b: &Field3) -> Field3 {
    assert_eq!(a.grid, b.grid);
    let mut out = Field3::zeros(a.grid);
    for i in 0..a.grid.len() {
        let av = [a.comps[0][i], a.comps[1][i], a.comps[2][i]];
        let bv = [b.comps[0][i], b.comps[1][i], b.comps[2][i]];
        out.comps[0][i] = av[1] * bv[2] - av[2] * bv[1];
        out.comps[1][i] = av[2] * bv[0] - av[0] * bv[2];
        out.comps[2][i] = av[0] * bv[1] - av[1] * bv[0];
    }
    out
}

/// Right product of a constant matrix with a vector field: (M v)(x).
fn apply_const_tensor(m: &[[f64; 3]; 3], v: &Field3) -> Field3 {
    let mut out = Field3::zeros(v.grid);
    for a in 0..3 {
        for b in 0..3 {
            let w = m[a][b];
            if w == 0.0 {
                continue;
            }
            for (i, x) in v.comps[b].iter().enumerate() {
                out.comps[a][i] += w * x;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// identity verification
// ---------------------------------------------------------------------------

pub struct IdentityReport {
    pub identity: String,
    pub regime: &'static str,
    pub max_residual: f64,
    pub fd_order: Option<f64>,
    pub pass: bool,
}

fn tensor_linf_diff(a: &TensorField3, b: &TensorField3) -> f64 {
    a.sub(b).linf()
}

/// Pointwise check of the skew product identity:
/// d_p (x) w_p - w_p (x) d_p + R_B = [high-osc] + [mean-osc] + [interactions].
pub fn magnetic_cancellation(ctx: &LevelContext, slice: &PerturbationSlice) -> Result<IdentityReport> {
    let grid = ctx.grid;
    let t = slice.t;
    let g2 = ctx.temporal.g_at(t).powi(2);
    let rb = ctx.stresses.stress_b(grid, t)?;
    let lhs = slice
        .d_p
        .outer(&slice.w_p)
        .sub(&slice.w_p.outer(&slice.d_p))
        .add(&rb);

    let mut rhs = TensorField3::zeros(grid, SymmetryClass::General);
    // high-oscillation parts and mean parts per magnetic direction
    for (k, flow) in ctx.mag_flows.iter().enumerate() {
        let w = flow.w_field(grid, t)?;
        let d = flow.d_field(grid, t)?;
        let prod = d.outer(&w).sub(&w.outer(&d));
        let mean = mean_skew_tensor(flow);
        let a2 = slice.amps_b.per_k[k].mul(&slice.amps_b.per_k[k]);
        // a^2 g^2 P_neq0(D (x) W - W (x) D)
        let mut osc = prod.clone();
        for aa in 0..3 {
            for bb in 0..3 {
                for v in osc.comps[3 * aa + bb].iter_mut() {
                    *v -= mean[aa][bb];
                }
            }
        }
        rhs = rhs.add(&osc.mul_scalar(&a2).scaled(g2));
        // a^2 (g^2 - 1) mean
        let mut m = TensorField3::zeros(grid, SymmetryClass::General);
        for aa in 0..3 {
            for bb in 0..3 {
                if mean[aa][bb] != 0.0 {
                    m.comps[3 * aa + bb] = a2.data.iter().map(|v| v * mean[aa][bb]).collect();
                }
            }
        }
        rhs = rhs.add(&m.scaled(g2 - 1.0));
    }
    // interactions: distinct magnetic pairs and velocity-magnetic pairs
    for (kp, flow_p) in ctx.mag_flows.iter().enumerate() {
        let d_kp = flow_p.d_field(grid, t)?;
        for (k, flow_k) in ctx.mag_flows.iter().enumerate() {
            if k == kp {
                continue;
            }
            let w_k = flow_k.w_field(grid, t)?;
            let a = slice.amps_b.per_k[k].mul(&slice.amps_b.per_k[kp]);
            let prod = d_kp.outer(&w_k).sub(&w_k.outer(&d_kp));
            rhs = rhs.add(&prod.mul_scalar(&a).scaled(g2));
        }
        for (k, flow_k) in ctx.vel_flows.iter().enumerate() {
            let w_k = flow_k.w_field(grid, t)?;
            let a = slice.amps_u.per_k[k].mul(&slice.amps_b.per_k[kp]);
            let prod = d_kp.outer(&w_k).sub(&w_k.outer(&d_kp));
            rhs = rhs.add(&prod.mul_scalar(&a).scaled(g2));
        }
    }
    let scale = lhs.linf().max(rhs.linf()).max(1e-300);
    let resid = tensor_linf_diff(&lhs, &rhs) / scale;
    Ok(IdentityReport {
        identity: "magnetic_cancellation".into(),
        regime: regime_name(ctx.regime),
        max_residual: resid,
        fd_order: None,
        pass: resid <= 1e-8,
    })
}

/// Pointwise check of the symmetric product identity:
/// w_p (x) w_p - d_p (x) d_p + R_u = rho f^2 Id + (1-f^2) G + [osc] + [means] + [interactions].
pub fn velocity_cancellation(ctx: &LevelContext, slice: &PerturbationSlice) -> Result<IdentityReport> {
    let grid = ctx.grid;
    let t = slice.t;
    let g2 = ctx.temporal.g_at(t).powi(2);
    let f_u = ctx.cutoff_u.eval(t);
    let ru = ctx.stresses.stress_u(grid, t)?;
    let lhs = slice
        .w_p
        .outer(&slice.w_p)
        .sub(&slice.d_p.outer(&slice.d_p))
        .add(&ru);

    // rho f^2 Id + (1 - f^2) G
    let mut rhs = slice.g_mat.scaled(1.0 - f_u * f_u);
    for d in 0..3 {
        let dst = &mut rhs.comps[3 * d + d];
        for (i, v) in slice.amps_u.rho.data.iter().enumerate() {
            dst[i] += f_u * f_u * v;
        }
    }
    // (1 - f^2) R_u term: the identity cancels only f^2 R_u
    rhs = rhs.add(&ru.scaled(1.0 - f_u * f_u));

    for (k, flow) in ctx.vel_flows.iter().enumerate() {
        let w = flow.w_field(grid, t)?;
        let prod = w.outer(&w);
        let mean = mean_ww_tensor(flow);
        let a2 = slice.amps_u.per_k[k].mul(&slice.amps_u.per_k[k]);
        let mut osc = prod.clone();
        for aa in 0..3 {
            for bb in 0..3 {
                for v in osc.comps[3 * aa + bb].iter_mut() {
                    *v -= mean[aa][bb];
                }
            }
        }
        rhs = rhs.add(&osc.mul_scalar(&a2).scaled(g2));
        let mut m = TensorField3::zeros(grid, SymmetryClass::General);
        for aa in 0..3 {
            for bb in 0..3 {
                if mean[aa][bb] != 0.0 {
                    m.comps[3 * aa + bb] = a2.data.iter().map(|v| v * mean[aa][bb]).collect();
                }
            }
        }
        rhs = rhs.add(&m.scaled(g2 - 1.0));
    }
    for (k, flow) in ctx.mag_flows.iter().enumerate() {
        let w = flow.w_field(grid, t)?;
        let d = flow.d_field(grid, t)?;
        let prod = w.outer(&w).sub(&d.outer(&d));
        let mean = mean_ww_minus_dd_tensor(flow);
        let a2 = slice.amps_b.per_k[k].mul(&slice.amps_b.per_k[k]);
        let mut osc = prod.clone();
        for aa in 0..3 {
            for bb in 0..3 {
                for v in osc.comps[3 * aa + bb].iter_mut() {
                    *v -= mean[aa][bb];
                }
            }
        }
        rhs = rhs.add(&osc.mul_scalar(&a2).scaled(g2));
        let mut m = TensorField3::zeros(grid, SymmetryClass::General);
        for aa in 0..3 {
            for bb in 0..3 {
                if mean[aa][bb] != 0.0 {
                    m.comps[3 * aa + bb] = a2.data.iter().map(|v| v * mean[aa][bb]).collect();
                }
            }
        }
        rhs = rhs.add(&m.scaled(g2 - 1.0));
    }
    // velocity interactions over the union, magnetic over the magnetic set
    let all_flows: Vec<(&BlockFlow, &ScalarField)> = ctx
        .vel_flows
        .iter()
        .enumerate()
        .map(|(k, f)| (f, &slice.amps_u.per_k[k]))
        .chain(
            ctx.mag_flows
                .iter()
                .enumerate()
                .map(|(k, f)| (f, &slice.amps_b.per_k[k])),
        )
        .collect();
    for (i, (flow_i, amp_i)) in all_flows.iter().enumerate() {
        let w_i = flow_i.w_field(grid, t)?;
        for (j, (flow_j, amp_j)) in all_flows.iter().enumerate() {
            if i == j {
                continue;
            }
            let w_j = flow_j.w_field(grid, t)?;
            let a = amp_i.mul(amp_j);
            rhs = rhs.add(&w_i.outer(&w_j).mul_scalar(&a).scaled(g2));
        }
    }
    for (i, flow_i) in ctx.mag_flows.iter().enumerate() {
        let d_i = flow_i.d_field(grid, t)?;
        for (j, flow_j) in ctx.mag_flows.iter().enumerate() {
            if i == j {
                continue;
            }
            let d_j = flow_j.d_field(grid, t)?;
            let a = slice.amps_b.per_k[i].mul(&slice.amps_b.per_k[j]);
            rhs = rhs.sub(&d_i.outer(&d_j).mul_scalar(&a).scaled(g2));
        }
    }
    let scale = lhs.linf().max(rhs.linf()).max(1e-300);
    let resid = tensor_linf_diff(&lhs, &rhs) / scale;
    Ok(IdentityReport {
        identity: "velocity_cancellation".into(),
        regime: regime_name(ctx.regime),
        max_residual: resid,
        fd_order: None,
        pass: resid <= 1e-8,
    })
}

fn regime_name(k: FlowKind) -> &'static str {
    match k {
        FlowKind::Shear => "shear",
        FlowKind::TravelingBox => "box",
    }
}

/// Verifies div and mean of the assembled totals.
pub fn incompressibility_report(ctx: &LevelContext, slice: &PerturbationSlice) -> Vec<IdentityReport> {
    let mut out = Vec::new();
    for (name, f) in [("w_total", slice.w_total()), ("d_total", slice.d_total())] {
        let scale = f.l2_mean().max(1e-300);
        let div = divergence(&f).l2_mean() / scale;
        let m = f.mean();
        let mean = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt() / scale;
        out.push(IdentityReport {
            identity: format!("div_{name}"),
            regime: regime_name(ctx.regime),
            max_residual: div,
            fd_order: None,
            pass: div <= 1e-10,
        });
        out.push(IdentityReport {
            identity: format!("mean_{name}"),
            regime: regime_name(ctx.regime),
            max_residual: mean,
            fd_order: None,
            pass: mean <= 1e-10,
        });
    }
    out
}

/// Verifies the double-curl representation of principal + incompressibility
/// corrector: w_p + w_c = curl curl sum(a g W^c), likewise for d.
pub fn curl_representation(ctx: &LevelContext, slice: &PerturbationSlice) -> Result<Vec<IdentityReport>> {
    let grid = ctx.grid;
    let t = slice.t;
    let g = ctx.temporal.g_at(t);
    let mut acc_w = Field3::zeros(grid);
    for (k, flow) in ctx.vel_flows.iter().enumerate() {
        let pot = flow.w_potential(grid, t)?;
        acc_w = acc_w.add(&pot.mul_scalar(&slice.amps_u.per_k[k]).scaled(g));
    }
    for (k, flow) in ctx.mag_flows.iter().enumerate() {
        let pot = flow.w_potential(grid, t)?;
        acc_w = acc_w.add(&pot.mul_scalar(&slice.amps_b.per_k[k]).scaled(g));
    }
    let lhs = slice.w_p.add(&slice.w_c);
    let rhs = curl(&curl(&acc_w));
    let scale = lhs.l2_mean().max(1e-300);
    let res_w = lhs.sub(&rhs).l2_mean() / scale;

    let mut acc_d = Field3::zeros(grid);
    for (k, flow) in ctx.mag_flows.iter().enumerate() {
        let pot = flow.d_potential(grid, t)?;
        acc_d = acc_d.add(&pot.mul_scalar(&slice.amps_b.per_k[k]).scaled(g));
    }
    let lhs_d = slice.d_p.add(&slice.d_c);
    let rhs_d = curl(&curl(&acc_d));
    let res_d = lhs_d.sub(&rhs_d).l2_mean() / lhs_d.l2_mean().max(1e-300);

    Ok(vec![
        IdentityReport {
            identity: "curl_curl_representation_w".into(),
            regime: regime_name(ctx.regime),
            max_residual: res_w,
            fd_order: None,
            pass: res_w <= 1e-8,
        },
        IdentityReport {
            identity: "curl_curl_representation_d".into(),
            regime: regime_name(ctx.regime),
            max_residual: res_d,
            fd_order: None,
            pass: res_d <= 1e-8,
        },
    ])
}

/// Centered finite difference of a time-indexed field.
pub fn fd_time(mut f: impl FnMut(f64) -> Result<Field3>, t: f64, dt: f64) -> Result<Field3> {
    let plus = f(t + dt)?;
    let minus = f(t - dt)?;
    Ok(plus.sub(&minus).scaled(0.5 / dt))
}

/// Residual of the oscillation-balance identity at one FD step: the defining
/// property of the corrector built from h and the mean tensors.
pub fn oscillation_balance_residual(
    ctx: &LevelContext,
    t: f64,
    dt: f64,
    magnetic: bool,
) -> Result<f64> {
    let grid = ctx.grid;
    let pick = |s: (Field3, Field3)| if magnetic { s.1 } else { s.0 };
    // dt of the corrector itself
    let d_corr = fd_time(
        |tt| {
            let (au, ab, _) = ctx.amplitude_slices(tt)?;
            Ok(pick(ctx.oscillation_correctors(tt, &au, &ab)?))
        },
        t,
        dt,
    )?;
    let (amps_u, amps_b, _) = ctx.amplitude_slices(t)?;
    let g2m1 = ctx.temporal.g_at(t).powi(2) - 1.0;
    let h = ctx.temporal.h_at(t);

    // P_neq0((g^2-1) mean grad(a^2)) at the center time
    let mut low = Field3::zeros(grid);
    let mut fd_grad_terms = Field3::zeros(grid);
    let mut mean_terms: Vec<([[f64; 3]; 3], usize, bool)> = Vec::new();
    if !magnetic {
        for (k, flow) in ctx.vel_flows.iter().enumerate() {
            mean_terms.push((mean_ww_tensor(flow), k, false));
        }
        for (k, flow) in ctx.mag_flows.iter().enumerate() {
            mean_terms.push((mean_ww_minus_dd_tensor(flow), k, true));
        }
    } else {
        for (k, flow) in ctx.mag_flows.iter().enumerate() {
            mean_terms.push((mean_skew_tensor(flow), k, true));
        }
    }
    for (m, k, is_mag) in &mean_terms {
        let amp = if *is_mag { &amps_b.per_k[*k] } else { &amps_u.per_k[*k] };
        let ga = grad_amp_sq(amp);
        low = low.add(&apply_const_tensor(m, &ga));
        // d/dt grad(a^2) by the same centered stencil
        let dga = fd_time(
            |tt| {
                let (au, ab, _) = ctx.amplitude_slices(tt)?;
                let a = if *is_mag { &ab.per_k[*k] } else { &au.per_k[*k] };
                Ok(grad_amp_sq(a))
            },
            t,
            dt,
        )?;
        fd_grad_terms = fd_grad_terms.add(&apply_const_tensor(m, &dga));
    }
    let low = remove_mean_vec(&low).scaled(g2m1);
    let lhs = d_corr.add(&low);

    // gradient-part of the projector applied to d/dt(h mean grad a^2),
    // plus the -sigma^-1 h mean d/dt grad(a^2) remainder
    let dt_product = {
        let mut acc = Field3::zeros(grid);
        let hp = ctx.temporal.h_at(t + dt);
        let hm = ctx.temporal.h_at(t - dt);
        let (aup, abp, _) = ctx.amplitude_slices(t + dt)?;
        let (aum, abm, _) = ctx.amplitude_slices(t - dt)?;
        for (m, k, is_mag) in &mean_terms {
            let gp = grad_amp_sq(if *is_mag { &abp.per_k[*k] } else { &aup.per_k[*k] });
            let gm = grad_amp_sq(if *is_mag { &abm.per_k[*k] } else { &aum.per_k[*k] });
            let diff = gp.scaled(hp).sub(&gm.scaled(hm)).scaled(0.5 / dt);
            acc = acc.add(&apply_const_tensor(m, &diff));
        }
        remove_mean_vec(&acc)
    };
    let grad_part = {
        let proj = leray_project(&dt_product);
        dt_product.sub(&proj).scaled(1.0 / ctx.sigma)
    };
    let remainder = remove_mean_vec(&fd_grad_terms).scaled(-h / ctx.sigma);
    let rhs = grad_part.add(&remainder);

    let scale = lhs.l2_mean().max(rhs.l2_mean()).max(low.l2_mean()).max(1e-300);
    Ok(lhs.sub(&rhs).l2_mean() / scale)
}

/// Residual of the traveling-oscillation balance (box flows):
/// dt w_t + sum P_neq0(a^2 g^2 div(W (x) W)) = grad-part + commutator remainder.
pub fn traveling_balance_residual(
    ctx: &LevelContext,
    t: f64,
    dt: f64,
    magnetic: bool,
) -> Result<f64> {
    if ctx.regime != FlowKind::TravelingBox {
        return Err(Error::Regime("traveling balance exists only for box flows".into()));
    }
    let grid = ctx.grid;
    let mu = ctx.mu.unwrap();
    let pick = |s: (Field3, Field3)| if magnetic { s.1 } else { s.0 };
    let d_corr = fd_time(
        |tt| {
            let (au, ab, _) = ctx.amplitude_slices(tt)?;
            Ok(pick(ctx.traveling_correctors(tt, &au, &ab)?))
        },
        t,
        dt,
    )?;
    let (amps_u, amps_b, _) = ctx.amplitude_slices(t)?;
    let g2 = ctx.temporal.g_at(t).powi(2);

    let terms: Vec<(usize, bool)> = if magnetic {
        ctx.mag_flows.iter().enumerate().map(|(k, _)| (k, true)).collect()
    } else {
        ctx.vel_flows
            .iter()
            .enumerate()
            .map(|(k, _)| (k, false))
            .chain(ctx.mag_flows.iter().enumerate().map(|(k, _)| (k, true)))
            .collect()
    };

    let mut osc = Field3::zeros(grid);
    for &(k, is_mag) in &terms {
        let (flow, amp) = if is_mag {
            (&ctx.mag_flows[k], &amps_b.per_k[k])
        } else {
            (&ctx.vel_flows[k], &amps_u.per_k[k])
        };
        let divv = if magnetic {
            flow.div_dw_minus_wd(grid, t)?
        } else {
            flow.div_ww(grid, t)?
        };
        let a2 = amp.mul(amp);
        osc = osc.add(&divv.mul_scalar(&a2).scaled(g2));
    }
    let osc = remove_mean_vec(&osc);
    let lhs = d_corr.add(&osc);

    // gradient part of the projector on d/dt(a^2 g^2 psi^2 phi^2 dir)
    let product_at = |tt: f64| -> Result<Field3> {
        let (au, ab, _) = ctx.amplitude_slices(tt)?;
        let g2t = ctx.temporal.g_at(tt).powi(2);
        let mut acc = Field3::zeros(grid);
        for &(k, is_mag) in &terms {
            let (flow, amp) = if is_mag {
                (&ctx.mag_flows[k], &ab.per_k[k])
            } else {
                (&ctx.vel_flows[k], &au.per_k[k])
            };
            let prof = flow.amplitude_scalar(grid, tt)?;
            let s = prof.mul(&prof).mul(&amp.mul(amp)).scaled(g2t);
            let dir = if magnetic {
                to_f64_vec(&flow.frame.k2)
            } else {
                to_f64_vec(&flow.frame.k1)
            };
            acc = acc.add(&Field3 {
                grid,
                comps: [
                    s.data.iter().map(|v| v * dir[0]).collect(),
                    s.data.iter().map(|v| v * dir[1]).collect(),
                    s.data.iter().map(|v| v * dir[2]).collect(),
                ],
            });
        }
        Ok(remove_mean_vec(&acc))
    };
    let dt_product = fd_time(product_at, t, dt)?;
    let grad_part = {
        let proj = leray_project(&dt_product);
        dt_product.sub(&proj).scaled(1.0 / mu)
    };
    // -mu^-1 P_neq0( d/dt(a^2 g^2) psi^2 phi^2 dir )
    let mut rem = Field3::zeros(grid);
    {
        let (aup, abp, _) = ctx.amplitude_slices(t + dt)?;
        let (aum, abm, _) = ctx.amplitude_slices(t - dt)?;
        let g2p = ctx.temporal.g_at(t + dt).powi(2);
        let g2m = ctx.temporal.g_at(t - dt).powi(2);
        for &(k, is_mag) in &terms {
            let (flow, ap, am) = if is_mag {
                (&ctx.mag_flows[k], &abp.per_k[k], &abm.per_k[k])
            } else {
                (&ctx.vel_flows[k], &aup.per_k[k], &aum.per_k[k])
            };
            let da2g2 = ScalarField {
                grid,
                data: ap
                    .data
                    .iter()
                    .zip(&am.data)
                    .map(|(p, m)| (p * p * g2p - m * m * g2m) * 0.5 / dt)
                    .collect(),
            };
            let prof = flow.amplitude_scalar(grid, t)?;
            let s = prof.mul(&prof).mul(&da2g2);
            let dir = if magnetic {
                to_f64_vec(&flow.frame.k2)
            } else {
                to_f64_vec(&flow.frame.k1)
            };
            rem = rem.add(&Field3 {
                grid,
                comps: [
                    s.data.iter().map(|v| v * dir[0]).collect(),
                    s.data.iter().map(|v| v * dir[1]).collect(),
                    s.data.iter().map(|v| v * dir[2]).collect(),
                ],
            });
        }
    }
    let rem = remove_mean_vec(&rem).scaled(-1.0 / mu);
    let rhs = grad_part.add(&rem);
    let scale = lhs.l2_mean().max(rhs.l2_mean()).max(osc.l2_mean()).max(1e-300);
    Ok(lhs.sub(&rhs).l2_mean() / scale)
}

fn remove_mean_vec(f: &Field3) -> Field3 {
    crate::spectral::ops::remove_mean(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::BlockFlow;
    use crate::fit::convergence_orders;
    use crate::geometry::{toy_run_frames_box, toy_run_frames_shear};
    use crate::rat::rat;
    use crate::synth;

    pub fn shear_context(grid: Grid, seed: u64) -> LevelContext {
        let sets = toy_run_frames_shear();
        let gu = sets.gamma_u.unwrap();
        let gb = sets.gamma_b.unwrap();
        let vel_flows: Vec<BlockFlow> = gu
            .frames
            .iter()
            .map(|f| BlockFlow::shear(f.clone(), 8, &rat(1, 8), grid).unwrap())
            .collect();
        let mag_flows: Vec<BlockFlow> = gb
            .frames
            .iter()
            .map(|f| BlockFlow::shear(f.clone(), 8, &rat(1, 8), grid).unwrap())
            .collect();
        let stresses = Arc::new(SyntheticStress {
            pattern_u: synth::synthetic_symmetric_traceless(grid, 2, 0.03, seed),
            pattern_b: synth::synthetic_skew(grid, 2, 0.03, seed + 1),
            window: (0.3, 0.7),
        });
        let temporal = TemporalPair::new(16, 2, 1.0).unwrap();
        LevelContext::builders(
            grid,
            FlowKind::Shear,
            gu,
            gb,
            vel_flows,
            mag_flows,
            temporal,
            None,
            0.5,
            0.5,
            0.05,
            stresses,
        )
        .unwrap()
    }

    pub fn box_context(grid: Grid, seed: u64) -> LevelContext {
        let sets = toy_run_frames_box();
        let gu = sets.gamma_u.unwrap();
        let gb = sets.gamma_b.unwrap();
        let mu = 4.0;
        let vel_flows: Vec<BlockFlow> = gu
            .frames
            .iter()
            .map(|f| {
                BlockFlow::traveling_box(f.clone(), 8, &rat(1, 8), &rat(1, 4), mu, grid).unwrap()
            })
            .collect();
        let mag_flows: Vec<BlockFlow> = gb
            .frames
            .iter()
            .map(|f| {
                BlockFlow::traveling_box(f.clone(), 8, &rat(1, 8), &rat(1, 4), mu, grid).unwrap()
            })
            .collect();
        let stresses = Arc::new(SyntheticStress {
            pattern_u: synth::synthetic_diagonal_traceless(grid, 2, 0.03, seed),
            pattern_b: synth::synthetic_skew(grid, 2, 0.03, seed + 1),
            window: (0.3, 0.7),
        });
        let temporal = TemporalPair::new(16, 2, 1.0).unwrap();
        LevelContext::builders(
            grid,
            FlowKind::TravelingBox,
            gu,
            gb,
            vel_flows,
            mag_flows,
            temporal,
            Some(mu),
            0.5,
            0.5,
            0.05,
            stresses,
        )
        .unwrap()
    }

    #[test]
    fn shear_slice_incompressible() {
        let grid = Grid::new(32).unwrap();
        let ctx = shear_context(grid, 100);
        let slice = ctx.slice(0.5).unwrap();
        for rep in incompressibility_report(&ctx, &slice) {
            assert!(rep.pass, "{}: {:.3e}", rep.identity, rep.max_residual);
        }
        for rep in curl_representation(&ctx, &slice).unwrap() {
            assert!(rep.pass, "{}: {:.3e}", rep.identity, rep.max_residual);
        }
    }

    #[test]
    fn shear_cancellations() {
        let grid = Grid::new(32).unwrap();
        let ctx = shear_context(grid, 200);
        let slice = ctx.slice(0.5).unwrap();
        let m = magnetic_cancellation(&ctx, &slice).unwrap();
        assert!(m.pass, "magnetic: {:.3e}", m.max_residual);
        let v = velocity_cancellation(&ctx, &slice).unwrap();
        assert!(v.pass, "velocity: {:.3e}", v.max_residual);
    }

    #[test]
    fn box_slice_identities() {
        let grid = Grid::new(32).unwrap();
        let ctx = box_context(grid, 300);
        let slice = ctx.slice(0.5).unwrap();
        for rep in incompressibility_report(&ctx, &slice) {
            assert!(rep.pass, "{}: {:.3e}", rep.identity, rep.max_residual);
        }
        for rep in curl_representation(&ctx, &slice).unwrap() {
            assert!(rep.pass, "{}: {:.3e}", rep.identity, rep.max_residual);
        }
        let m = magnetic_cancellation(&ctx, &slice).unwrap();
        assert!(m.pass, "magnetic: {:.3e}", m.max_residual);
        let v = velocity_cancellation(&ctx, &slice).unwrap();
        assert!(v.pass, "velocity: {:.3e}", v.max_residual);
    }

    #[test]
    fn oscillation_balance_second_order() {
        let grid = Grid::new(32).unwrap();
        let ctx = shear_context(grid, 400);
        let t = 0.5 + 1.0 / 64.0;
        let resids: Vec<f64> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&dt| oscillation_balance_residual(&ctx, t, dt, false).unwrap())
            .collect();
        let (_, orders) = convergence_orders(&resids);
        assert!(
            orders.iter().all(|&o| o > 1.5),
            "orders {orders:?} resids {resids:?}"
        );
        let m_resids: Vec<f64> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&dt| oscillation_balance_residual(&ctx, t, dt, true).unwrap())
            .collect();
        let (_, m_orders) = convergence_orders(&m_resids);
        assert!(m_orders.iter().all(|&o| o > 1.5), "{m_orders:?} {m_resids:?}");
    }

    #[test]
    fn traveling_balance_second_order() {
        let grid = Grid::new(32).unwrap();
        let ctx = box_context(grid, 500);
        // mid-bump probe time: the oscillation profile is alive here
        let t = 0.5 + 1.0 / 64.0;
        let resids: Vec<f64> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&dt| traveling_balance_residual(&ctx, t, dt, false).unwrap())
            .collect();
        let (_, orders) = convergence_orders(&resids);
        assert!(orders.iter().all(|&o| o > 1.5), "{orders:?} {resids:?}");
    }

    #[test]
    fn support_confined_to_cutoffs() {
        let grid = Grid::new(32).unwrap();
        let ctx = shear_context(grid, 600);
        // outside the padded support window everything vanishes
        let slice = ctx.slice(0.1).unwrap();
        assert_eq!(slice.w_total().l2_mean(), 0.0);
        assert_eq!(slice.d_total().l2_mean(), 0.0);
    }
}
