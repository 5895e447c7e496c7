//! Shared construction of toy levels from a run configuration.

use crate::config::RunConfig;
use anyhow::{anyhow, Result};
use mhdkit_core::blocks::{BlockFlow, FlowKind};
use mhdkit_core::geometry::{toy_run_frames_box, toy_run_frames_shear, FrameSets, GammaSolver};
use mhdkit_core::perturb::{LevelContext, StressSource, SyntheticStress};
use mhdkit_core::planner::Regime;
use mhdkit_core::profiles::TemporalPair;
use mhdkit_core::rat::rat_to_f64;
use mhdkit_core::spectral::{Field3, Grid};
use mhdkit_core::stress::{Background, LevelZeroStress, SemigroupBackground, StressAssembly};
use mhdkit_core::synth;
use std::sync::Arc;

pub fn flow_kind(regime: Regime) -> FlowKind {
    match regime {
        Regime::S1 => FlowKind::Shear,
        Regime::S2 => FlowKind::TravelingBox,
    }
}

pub fn toy_frame_sets(regime: Regime) -> FrameSets {
    match regime {
        Regime::S1 => toy_run_frames_shear(),
        Regime::S2 => toy_run_frames_box(),
    }
}

pub struct ToySolvers {
    pub gamma_u: GammaSolver,
    pub gamma_b: GammaSolver,
}

pub fn toy_solvers(regime: Regime) -> Result<ToySolvers> {
    let sets = toy_frame_sets(regime);
    Ok(ToySolvers {
        gamma_u: sets.gamma_u.map_err(|e| anyhow!("velocity directions: {e}"))?,
        gamma_b: sets.gamma_b.map_err(|e| anyhow!("magnetic directions: {e}"))?,
    })
}

pub fn toy_flows(cfg: &RunConfig, grid: Grid, solvers: &ToySolvers) -> Result<(Vec<BlockFlow>, Vec<BlockFlow>)> {
    let lam = cfg.lambda;
    let make = |frame: &mhdkit_core::geometry::WaveFrame| -> Result<BlockFlow> {
        Ok(match cfg.regime {
            Regime::S1 => BlockFlow::shear(frame.clone(), lam, &cfg.r_perp, grid)?,
            Regime::S2 => BlockFlow::traveling_box(
                frame.clone(),
                lam,
                &cfg.r_perp,
                &cfg.r_par,
                cfg.mu,
                grid,
            )?,
        })
    };
    let vel = solvers.gamma_u.frames.iter().map(&make).collect::<Result<Vec<_>>>()?;
    let mag = solvers.gamma_b.frames.iter().map(&make).collect::<Result<Vec<_>>>()?;
    Ok((vel, mag))
}

/// Analytic seed pair with shear structure: the velocity stress of its
/// level-zero relaxation stays diagonal, which every toy direction set can
/// reconstruct. An envelope confines the temporal support for the shear runs.
pub fn toy_background(cfg: &RunConfig, grid: Grid, enveloped: bool) -> Arc<SemigroupBackground> {
    Arc::new(SemigroupBackground {
        u0: Field3::from_fn(grid, |_, _, z| [0.25 * (2.0 * z).sin(), 0.0, 0.0]),
        b0: Field3::from_fn(grid, |x, _, _| [0.0, 0.2 * (2.0 * x).sin(), 0.0]),
        nu1: cfg.nu1,
        nu2: cfg.nu2,
        alpha: rat_to_f64(&cfg.alpha),
        envelope: if enveloped { Some((0.25, 0.75)) } else { None },
        t_horizon: rat_to_f64(&cfg.t_horizon),
    })
}

pub fn level_context(
    cfg: &RunConfig,
    grid: Grid,
    stresses: Arc<dyn StressSource>,
    scale: f64,
) -> Result<LevelContext> {
    let solvers = toy_solvers(cfg.regime)?;
    let (vel, mag) = toy_flows(cfg, grid, &solvers)?;
    let temporal = TemporalPair::new(cfg.tau, cfg.sigma, rat_to_f64(&cfg.t_horizon))?;
    let mu = match cfg.regime {
        Regime::S1 => None,
        Regime::S2 => Some(cfg.mu),
    };
    Ok(LevelContext::builders(
        grid,
        flow_kind(cfg.regime),
        solvers.gamma_u,
        solvers.gamma_b,
        vel,
        mag,
        temporal,
        mu,
        scale,
        scale,
        cfg.theta,
        stresses,
    )?)
}

/// Full analytic level: background + its level-zero stresses + assembly.
pub fn analytic_level(cfg: &RunConfig, grid: Grid) -> Result<StressAssembly> {
    let enveloped = cfg.regime == Regime::S1;
    let background = toy_background(cfg, grid, enveloped);
    let stresses = Arc::new(LevelZeroStress {
        background: background.clone() as Arc<dyn Background>,
        nu1: cfg.nu1,
        nu2: cfg.nu2,
        alpha: rat_to_f64(&cfg.alpha),
    });
    // amplitude scale: cover the observed stress size so the growth cutoff
    // stays in its flat region (toy surrogate for the planner amplitude)
    let scale = stress_sup(&*stresses, grid, rat_to_f64(&cfg.t_horizon))? * 1.25;
    let ctx = level_context(cfg, grid, stresses, scale.max(1e-6))?;
    Ok(StressAssembly {
        ctx: Arc::new(ctx),
        background,
        nu1: cfg.nu1,
        nu2: cfg.nu2,
        alpha: rat_to_f64(&cfg.alpha),
        dt_fd: 1e-4,
    })
}

/// Negative control: the same level with every temporal corrector removed
/// from both the perturbation and the matching stress terms.
pub fn analytic_level_without_temporal_correctors(
    cfg: &RunConfig,
    grid: Grid,
) -> Result<StressAssembly> {
    let asm = analytic_level(cfg, grid)?;
    let mut ctx = match Arc::try_unwrap(asm.ctx) {
        Ok(c) => c,
        Err(_) => return Err(anyhow!("context unexpectedly shared")),
    };
    ctx.temporal_correctors = false;
    Ok(StressAssembly { ctx: Arc::new(ctx), ..asm })
}

pub fn stress_sup(src: &dyn StressSource, grid: Grid, t_horizon: f64) -> Result<f64> {
    let mut sup = 0.0f64;
    for j in 0..=16 {
        let t = t_horizon * j as f64 / 16.0;
        sup = sup.max(src.stress_u(grid, t)?.linf());
        sup = sup.max(src.stress_b(grid, t)?.linf());
    }
    Ok(sup)
}

/// Sup of the stress magnitude over the given support intervals.
pub fn stress_sup_over(
    src: &dyn StressSource,
    grid: Grid,
    intervals: &[(f64, f64)],
) -> Result<f64> {
    let mut sup = 0.0f64;
    for &(a, b) in intervals {
        for j in 0..=8 {
            let t = a + (b - a) * j as f64 / 8.0;
            sup = sup.max(src.stress_u(grid, t)?.linf());
            sup = sup.max(src.stress_b(grid, t)?.linf());
        }
    }
    Ok(sup)
}

/// Seeded synthetic-stress level for the isolated module suites.
pub fn synthetic_level(cfg: &RunConfig, grid: Grid, amplitude: f64) -> Result<LevelContext> {
    let pattern_u = match cfg.regime {
        Regime::S1 => synth::synthetic_symmetric_traceless(grid, 2, amplitude, cfg.seed),
        // the box direction set reconstructs the diagonal class only
        Regime::S2 => synth::synthetic_diagonal_traceless(grid, 2, amplitude, cfg.seed),
    };
    let pattern_b = synth::synthetic_skew(grid, 2, amplitude, cfg.seed + 1);
    let stresses = Arc::new(SyntheticStress { pattern_u, pattern_b, window: (0.3, 0.7) });
    level_context(cfg, grid, stresses, amplitude * 12.0)
}
