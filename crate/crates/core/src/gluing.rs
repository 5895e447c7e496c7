//! Temporal partition of unity, gluing of local solutions, glued-stress
//! assembly, well-preparedness bookkeeping and the covering-sum verdicts.

use crate::amplitude::smoothstep9_deriv;
use crate::error::{Error, Result};
use crate::rat::{format_rat, rat_pow_exact, rat_to_f64, Rat};
use crate::spectral::ops::{inv_div_b, inv_div_u, leray_project, remove_mean};
use crate::spectral::{Field3, SymmetryClass, TensorField3};

#[derive(Clone, Debug)]
pub struct GlueConfig {
    pub m: usize,
    pub theta: f64,
    pub t_horizon: f64,
}

impl GlueConfig {
    pub fn new(m: usize, theta: f64, t_horizon: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain("need at least two subintervals".into()));
        }
        let seg = t_horizon / m as f64;
        if !(theta > 0.0 && 5.0 * theta < seg) {
            return Err(Error::Domain(format!(
                "plateau violation: need 5 theta < T/m, got theta = {theta}, T/m = {seg}"
            )));
        }
        Ok(GlueConfig { m, theta, t_horizon })
    }

    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.t_horizon * i as f64 / self.m as f64
    }

    /// Local solution i lives on [t_i, t_{i+1} + theta].
    pub fn segment(&self, i: usize) -> (f64, f64) {
        let hi = if i + 1 >= self.m {
            self.t_horizon
        } else {
            self.node(i + 1) + self.theta
        };
        (self.node(i), hi)
    }

    /// Value of the i-th partition member at time t.
    pub fn chi(&self, i: usize, t: f64) -> f64 {
        self.chi_deriv(i, t, 0)
    }

    /// Exact piecewise derivative of the i-th partition member.
    pub fn chi_deriv(&self, i: usize, t: f64, order: usize) -> f64 {
        let theta = self.theta;
        let up_lo = self.node(i); // ramp [t_i, t_i + theta] (absent for i = 0)
        let down_lo = if i + 1 < self.m { self.node(i + 1) } else { f64::INFINITY };
        let one = if order == 0 { 1.0 } else { 0.0 };
        let zero = 0.0;
        if i > 0 {
            if t < up_lo {
                return zero;
            }
            if t < up_lo + theta {
                let s = (1.0 / theta).powi(order as i32);
                return s * smoothstep9_deriv((t - up_lo) / theta, order);
            }
        }
        if t <= down_lo {
            return one;
        }
        if t < down_lo + theta {
            let s = (1.0 / theta).powi(order as i32);
            let d = smoothstep9_deriv((t - down_lo) / theta, order);
            return if order == 0 { 1.0 - d } else { -s * d };
        }
        zero
    }

    /// Indices with chi_i(t) != 0 (at most two).
    pub fn active(&self, t: f64) -> Vec<usize> {
        (0..self.m).filter(|&i| self.chi(i, t) != 0.0).collect()
    }

    /// The ramp index at time t: Some(i) when t lies in (t_i, t_i + theta)
    /// for 1 <= i <= m-1, where adjacent locals overlap.
    pub fn ramp_index(&self, t: f64) -> Option<usize> {
        for i in 1..self.m {
            let lo = self.node(i);
            if t > lo && t < lo + self.theta {
                return Some(i);
            }
        }
        None
    }

    /// Max over a dense grid of |sum_i chi_i - 1|.
    pub fn partition_residual(&self, samples: usize) -> f64 {
        (0..=samples)
            .map(|j| {
                let t = self.t_horizon * j as f64 / samples as f64;
                let s: f64 = (0..self.m).map(|i| self.chi(i, t)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Measured sup |d^M chi_i| over a dense grid.
    pub fn chi_seminorm(&self, i: usize, order: usize, samples: usize) -> f64 {
        (0..=samples)
            .map(|j| {
                let t = self.t_horizon * j as f64 / samples as f64;
                self.chi_deriv(i, t, order).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Access to the family of local solutions: fields of local solution i at
/// time t (defined on the i-th segment).
pub trait LocalFamily {
    fn fields(&self, i: usize, t: f64) -> Result<(Field3, Field3)>;
}

impl<F> LocalFamily for F
where
    F: Fn(usize, f64) -> Result<(Field3, Field3)>,
{
    fn fields(&self, i: usize, t: f64) -> Result<(Field3, Field3)> {
        self(i, t)
    }
}

/// Glued pair sum_i chi_i (v_i, D_i) at time t.
pub fn glued_fields(
    cfg: &GlueConfig,
    locals: &dyn LocalFamily,
    t: f64,
) -> Result<(Field3, Field3)> {
    let active = cfg.active(t);
    if active.is_empty() {
        return Err(Error::CoverageGap(format!("no active partition member at t = {t}")));
    }
    let mut u_acc: Option<Field3> = None;
    let mut b_acc: Option<Field3> = None;
    for i in active {
        let w = cfg.chi(i, t);
        let (v, d) = locals.fields(i, t)?;
        u_acc = Some(match u_acc {
            None => v.scaled(w),
            Some(acc) => acc.add(&v.scaled(w)),
        });
        b_acc = Some(match b_acc {
            None => d.scaled(w),
            Some(acc) => acc.add(&d.scaled(w)),
        });
    }
    Ok((u_acc.unwrap(), b_acc.unwrap()))
}

/// Glued stresses: supported on the ramps, where adjacent locals disagree:
/// R_u = chi' R^u(v_i - v_{i-1})
///       - chi(1-chi) ((v_i-v_{i-1}) (x)o (v_i-v_{i-1}) - (D_i-D_{i-1}) (x)o (D_i-D_{i-1})),
/// R_B = chi' R^B(D_i - D_{i-1})
///       - chi(1-chi) ((D_i-D_{i-1}) (x) (v_i-v_{i-1}) - (v_i-v_{i-1}) (x) (D_i-D_{i-1})).
pub fn glued_stresses(
    cfg: &GlueConfig,
    locals: &dyn LocalFamily,
    t: f64,
) -> Result<(TensorField3, TensorField3)> {
    let Some(i) = cfg.ramp_index(t) else {
        // plateau: exact zero
        let grid = locals.fields(0, cfg.node(0))?.0.grid;
        return Ok((
            TensorField3::zeros(grid, SymmetryClass::SymmetricTraceless),
            TensorField3::zeros(grid, SymmetryClass::Skew),
        ));
    };
    let chi = cfg.chi(i, t);
    let dchi = cfg.chi_deriv(i, t, 1);
    let (v_i, d_i) = locals.fields(i, t)?;
    let (v_p, d_p) = locals.fields(i - 1, t)?;
    // the local differences are mean-free and divergence-free up to solver
    // noise; project before inverting the divergence
    let dv = remove_mean(&v_i.sub(&v_p));
    let dd = leray_project(&d_i.sub(&d_p));
    let w = chi * (1.0 - chi);

    let ru = if dv.l2_mean() + dd.l2_mean() < 1e-300 {
        TensorField3::zeros(dv.grid, SymmetryClass::SymmetricTraceless)
    } else {
        let lin = inv_div_u(&dv)?.scaled(dchi);
        let quad = dv
            .outer_traceless(&dv)
            .sub(&dd.outer_traceless(&dd))
            .scaled(w);
        lin.sub(&quad)
    };
    let rb = if dd.l2_mean() + dv.l2_mean() < 1e-300 {
        TensorField3::zeros(dv.grid, SymmetryClass::Skew)
    } else {
        let lin = inv_div_b(&dd)?.scaled(dchi);
        let quad = dd.outer(&dv).sub(&dv.outer(&dd)).scaled(w);
        lin.sub(&quad)
    };
    Ok((ru, rb))
}

// ---------------------------------------------------------------------------
// well-preparedness bookkeeping
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct WellPreparedSet {
    pub index_set: Vec<usize>,
    pub intervals: Vec<(f64, f64)>,
    pub theta: f64,
    /// Interval-count bound theta^(-eta) and whether it holds.
    pub count_bound: f64,
    pub count_ok: bool,
}

fn dist_to_complement(intervals: &[(f64, f64)], t: f64, horizon: f64) -> f64 {
    // distance from t to the complement of the union within [0, horizon]
    let mut inside: Option<(f64, f64)> = None;
    for &(a, b) in intervals {
        if t >= a && t <= b {
            inside = Some((a, b));
            break;
        }
    }
    match inside {
        None => 0.0,
        Some((a, b)) => {
            let left = if a <= 0.0 { f64::INFINITY } else { t - a };
            let right = if b >= horizon { f64::INFINITY } else { b - t };
            left.min(right)
        }
    }
}

/// Builds the active index set and the padded interval union from the old
/// stress magnitude: i is active when the stress is not numerically zero on
/// [t_{i-1}, t_i + theta].
pub fn well_prepared_sets(
    cfg: &GlueConfig,
    eta: f64,
    old_stress_max: &dyn Fn(f64) -> f64,
    global_max: f64,
    samples_per_segment: usize,
) -> WellPreparedSet {
    let tol = 1e-12 * global_max.max(1e-300);
    let mut index_set = Vec::new();
    for i in 1..cfg.m {
        let lo = cfg.node(i - 1);
        let hi = (cfg.node(i) + cfg.theta).min(cfg.t_horizon);
        let mut biggest = 0.0f64;
        for j in 0..=samples_per_segment {
            let t = lo + (hi - lo) * j as f64 / samples_per_segment as f64;
            biggest = biggest.max(old_stress_max(t));
        }
        if biggest > tol {
            index_set.push(i);
        }
    }
    let mut intervals: Vec<(f64, f64)> = index_set
        .iter()
        .map(|&i| (cfg.node(i) - 2.0 * cfg.theta, cfg.node(i) + 3.0 * cfg.theta))
        .collect();
    // merge touching intervals for the distance bookkeeping
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for iv in intervals {
        match merged.last_mut() {
            Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
            _ => merged.push(iv),
        }
    }
    let count_bound = cfg.theta.powf(-eta);
    let count_ok = (index_set.len() as f64) <= count_bound;
    WellPreparedSet { index_set, intervals: merged, theta: cfg.theta, count_bound, count_ok }
}

impl WellPreparedSet {
    /// Checks the support predicate: the glued stress vanishes (relative to
    /// `global_max`) wherever dist(t, complement) <= 3 theta / 2. Returns the
    /// offending times.
    pub fn support_predicate_violations(
        &self,
        cfg: &GlueConfig,
        glued_stress_max: &dyn Fn(f64) -> f64,
        global_max: f64,
        samples: usize,
    ) -> Vec<f64> {
        let tol = 1e-10 * global_max.max(1e-300);
        let mut bad = Vec::new();
        for j in 0..=samples {
            let t = cfg.t_horizon * j as f64 / samples as f64;
            if dist_to_complement(&self.intervals, t, cfg.t_horizon) <= 1.5 * self.theta
                && glued_stress_max(t) > tol
            {
                bad.push(t);
            }
        }
        bad
    }

    /// Interval containment I_new subseteq I_old (up to tolerance).
    pub fn contained_in(&self, older: &WellPreparedSet) -> bool {
        self.intervals.iter().all(|&(a, b)| {
            older
                .intervals
                .iter()
                .any(|&(oa, ob)| oa <= a + 1e-12 && b <= ob + 1e-12)
        })
    }
}

// ---------------------------------------------------------------------------
// covering sums
// ---------------------------------------------------------------------------

/// One level of the covering sum m (5 theta)^kappa with exact bookkeeping:
/// value = rational_part * 5^kappa when theta^kappa is rational.
#[derive(Clone, Debug)]
pub struct CoverSum {
    pub value: f64,
    /// exact m * theta^kappa when representable
    pub rational_part: Option<Rat>,
    pub five_exponent: Rat,
}

/// m (5 theta)^kappa for exact rational inputs; kappa > eta is required for
/// the sums to vanish along the schedule.
pub fn hausdorff_sum(m: &Rat, theta: &Rat, kappa: &Rat, eta: &Rat) -> Result<CoverSum> {
    if kappa <= eta {
        return Err(Error::Domain(format!(
            "kappa = {} must exceed eta = {}",
            format_rat(kappa),
            format_rat(eta)
        )));
    }
    let rational_part = rat_pow_exact(theta, kappa).map(|p| p * m);
    let value = rat_to_f64(m)
        * 5.0f64.powf(rat_to_f64(kappa))
        * crate::rat::rat_pow_f64(rat_to_f64(theta), kappa)
            .powf(1.0)
            .max(0.0);
    Ok(CoverSum { value, rational_part, five_exponent: kappa.clone() })
}

/// Per-level covering-sum exponents for a schedule: the a-exponent of
/// m_{q+1} theta_{q+1}^kappa is 12 b^q (1 - kappa/eta); strictly decreasing
/// levels certify the vanishing Hausdorff measure.
pub fn hausdorff_schedule_exponents(
    schedule: &crate::planner::ParamSchedule,
    kappa: &Rat,
) -> Result<Vec<Rat>> {
    if *kappa <= schedule.eta {
        return Err(Error::Domain("kappa must exceed eta".into()));
    }
    Ok(schedule
        .levels
        .iter()
        .map(|lv| lv.m_exp.clone() + kappa.clone() * &lv.theta_exp)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use crate::spectral::Grid;
    use crate::synth;
    use num_bigint::BigInt;
    use num_rational::Ratio;

    #[test]
    fn partition_sums_to_one() {
        let cfg = GlueConfig::new(8, 0.01, 1.0).unwrap();
        assert!(cfg.partition_residual(4096) < 1e-12);
        // plateau template: chi_i = 1 on [t_i + theta, t_{i+1}]
        for i in 1..7 {
            let lo = cfg.node(i) + cfg.theta;
            let hi = cfg.node(i + 1);
            for j in 0..=16 {
                let t = lo + (hi - lo) * j as f64 / 16.0;
                assert_eq!(cfg.chi(i, t), 1.0);
            }
        }
        // seminorm * theta^M stable across a theta ladder
        for order in 1..=4usize {
            let mut consts = Vec::new();
            for theta in [0.01, 0.005, 0.0025] {
                let cfg = GlueConfig::new(8, theta, 1.0).unwrap();
                consts.push(cfg.chi_seminorm(3, order, 40000) * theta.powi(order as i32));
            }
            let cmax = consts.iter().cloned().fold(0.0, f64::max);
            let cmin = consts.iter().cloned().fold(f64::INFINITY, f64::min);
            assert!(cmax / cmin < 1.1, "order {order}: {consts:?}");
        }
    }

    #[test]
    fn plateau_violation_rejected() {
        assert!(GlueConfig::new(8, 0.1, 1.0).is_err());
    }

    #[test]
    fn gluing_identical_locals_is_identity() {
        let grid = Grid::new(8).unwrap();
        let cfg = GlueConfig::new(4, 0.02, 1.0).unwrap();
        let u = synth::synthetic_divfree(grid, 2, 1.0, 5);
        let b = synth::synthetic_divfree(grid, 2, 1.0, 6);
        let locals = |_i: usize, t: f64| {
            Ok((u.scaled(1.0 + 0.1 * t), b.scaled(1.0 - 0.1 * t)))
        };
        let t = 0.3;
        let (gu, gb) = glued_fields(&cfg, &locals, t).unwrap();
        assert!(gu.sub(&u.scaled(1.0 + 0.1 * t)).l2_mean() < 1e-13);
        assert!(gb.sub(&b.scaled(1.0 - 0.1 * t)).l2_mean() < 1e-13);
        // identical adjacent locals leave zero glued stress
        let (ru, rb) = glued_stresses(&cfg, &locals, 0.26).unwrap();
        assert!(ru.linf() < 1e-12 && rb.linf() < 1e-12);
    }

    #[test]
    fn glued_stress_plateau_vanishing_and_classes() {
        let grid = Grid::new(8).unwrap();
        let cfg = GlueConfig::new(4, 0.02, 1.0).unwrap();
        // distinct locals: piecewise-constant-in-time div-free fields
        let fields: Vec<(crate::spectral::Field3, crate::spectral::Field3)> = (0..4)
            .map(|i| {
                (
                    synth::synthetic_divfree(grid, 2, 1.0, 10 + i),
                    synth::synthetic_divfree(grid, 2, 1.0, 20 + i),
                )
            })
            .collect();
        let locals = |i: usize, _t: f64| Ok(fields[i].clone());
        // on a plateau the stress vanishes exactly
        let (ru, rb) = glued_stresses(&cfg, &locals, 0.3).unwrap();
        assert_eq!(ru.linf(), 0.0);
        assert_eq!(rb.linf(), 0.0);
        // on a ramp the classes hold pointwise
        let (ru, rb) = glued_stresses(&cfg, &locals, 0.255).unwrap();
        assert!(ru.class_residual(SymmetryClass::SymmetricTraceless) < 1e-12);
        assert!(rb.class_residual(SymmetryClass::Skew) < 1e-12);
    }

    #[test]
    fn well_prepared_bookkeeping() {
        let cfg = GlueConfig::new(16, 0.005, 1.0).unwrap();
        // stress supported inside one subinterval
        let center = cfg.node(7) + 0.03;
        let stress = |t: f64| if (t - center).abs() < 0.01 { 1.0 } else { 0.0 };
        let wps = well_prepared_sets(&cfg, 0.5, &stress, 1.0, 64);
        assert!(wps.index_set.len() <= 2, "{:?}", wps.index_set);
        assert!(wps.count_ok);
        // zero stress: empty set
        let wps0 = well_prepared_sets(&cfg, 0.5, &|_| 0.0, 1.0, 64);
        assert!(wps0.index_set.is_empty() && wps0.intervals.is_empty());
        // nesting: a wider stress support gives a superset
        let wide = |t: f64| if (t - center).abs() < 0.1 { 1.0 } else { 0.0 };
        let wps_wide = well_prepared_sets(&cfg, 0.5, &wide, 1.0, 64);
        assert!(wps.contained_in(&wps_wide));
    }

    #[test]
    fn cover_sum_exact_value() {
        // m = 4096, theta = 2^-24, kappa = 3/4, eta = 1/2:
        // 4096 * (5 theta)^(3/4) = 5^(3/4)/64
        let m = rat(4096, 1);
        let theta = Ratio::new(BigInt::from(1), BigInt::from(1u64 << 24));
        let s = hausdorff_sum(&m, &theta, &rat(3, 4), &rat(1, 2)).unwrap();
        assert_eq!(s.rational_part, Some(rat(1, 64)));
        let expect = 5.0f64.powf(0.75) / 64.0;
        assert!((s.value - expect).abs() < 1e-12, "{} vs {expect}", s.value);
        assert!((s.value - 0.05225).abs() < 1e-4);
        // kappa = eta rejected
        assert!(hausdorff_sum(&m, &theta, &rat(1, 2), &rat(1, 2)).is_err());
    }

    #[test]
    fn schedule_cover_exponents_decrease() {
        let sched = crate::planner::build_schedule(crate::planner::ScheduleInput {
            a: 2,
            b: 2,
            beta: rat(1, 8),
            epsilon: rat(1, 60),
            epsilon_r: rat(1, 100),
            eta: rat(1, 2),
            t_horizon: rat(1, 1),
            q_max: 3,
            mode: crate::planner::ScheduleMode::Toy { time_grid: 256 },
            regime: crate::planner::Regime::S1,
            alpha: rat(1, 1),
        })
        .unwrap();
        let exps = hausdorff_schedule_exponents(&sched, &rat(3, 4)).unwrap();
        for w in exps.windows(2) {
            assert!(w[1] < w[0], "exponents must strictly decrease: {w:?}");
        }
        // all negative: each level sum vanishes as a grows
        assert!(exps.iter().all(|e| e < &rat(0, 1)));
    }
}
