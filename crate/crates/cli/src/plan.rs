//! The `plan` command: membership, admissible small parameter, schedule and
//! constraint verdicts, with exact exponents in the emitted tables.

use crate::config::{Mode, RunConfig};
use anyhow::{anyhow, Result};
use mhdkit_core::planner::{
    build_schedule, check_constraints, lps_criticality, pick_epsilon, regime_membership,
    Membership, ParamSchedule, RegimePoint, ScheduleInput, ScheduleMode,
};
use mhdkit_core::rat::{format_rat, rat_int, rat_to_f64, Rat};

pub struct PlanOutcome {
    pub report: String,
    pub csv: String,
    pub all_pass: bool,
    pub schedule: ParamSchedule,
}

pub fn run_plan(cfg: &RunConfig) -> Result<PlanOutcome> {
    let pt = RegimePoint::new(cfg.s.clone(), cfg.gamma.clone(), cfg.p.clone(), cfg.alpha.clone())?;
    let (membership, slack1, slack2) = regime_membership(&pt);
    let mut report = String::new();
    report.push_str(&format!(
        "point: s = {}, gamma = {}, p = {}, alpha = {}\n",
        format_rat(&pt.s),
        pt.gamma,
        pt.p,
        format_rat(&pt.alpha)
    ));
    report.push_str(&format!(
        "membership: {membership:?} (slacks {} | {})\n",
        format_rat(&slack1),
        format_rat(&slack2)
    ));
    report.push_str(&format!(
        "scaling-critical defect: {}\n",
        format_rat(&lps_criticality(&pt))
    ));

    let in_requested = match (cfg.regime, &membership) {
        (mhdkit_core::planner::Regime::S1, Membership::S1 | Membership::Both) => true,
        (mhdkit_core::planner::Regime::S2, Membership::S2 | Membership::Both) => true,
        _ => false,
    };
    if !in_requested {
        return Err(anyhow!(
            "point is not in the requested regime {} (membership {membership:?})",
            cfg.regime
        ));
    }

    let choice = pick_epsilon(&pt, cfg.regime)?;
    let epsilon = cfg.epsilon.clone().unwrap_or_else(|| choice.epsilon.clone());
    report.push_str(&format!(
        "epsilon: {} (cap {}), side conditions:\n",
        format_rat(&epsilon),
        format_rat(&choice.cap)
    ));
    for c in &choice.conditions {
        report.push_str(&format!("  {} (b divisible by {})\n", c.description, c.required_divisor_of_b));
    }

    let epsilon_r: Rat = cfg
        .epsilon_r
        .clone()
        .unwrap_or_else(|| rat_int(cfg.b as i64) * cfg.beta.clone() / rat_int(20));
    let mode = match cfg.mode {
        Mode::PaperStrict => ScheduleMode::PaperStrict,
        Mode::Toy => ScheduleMode::Toy { time_grid: cfg.n_t },
    };
    let schedule = build_schedule(ScheduleInput {
        a: cfg.a,
        b: cfg.b,
        beta: cfg.beta.clone(),
        epsilon: epsilon.clone(),
        epsilon_r,
        eta: cfg.eta.clone(),
        t_horizon: cfg.t_horizon.clone(),
        q_max: cfg.q_max,
        mode,
        regime: cfg.regime,
        alpha: cfg.alpha.clone(),
    })?;
    if !schedule.violations.is_empty() {
        report.push_str("strict-inequality violations (accepted in toy mode):\n");
        for v in &schedule.violations {
            report.push_str(&format!("  {v}\n"));
        }
    }

    let blocks = mhdkit_core::planner::block_exponents(cfg.regime, &cfg.alpha, &epsilon);
    let mut all_pass = true;
    report.push_str("constraints (exponent of the level frequency; PASS iff < 0):\n");
    for c in check_constraints(&pt, &blocks) {
        all_pass &= c.pass;
        report.push_str(&format!(
            "  {:<22} {}  ({:.6})  {}\n",
            c.name,
            format_rat(&c.exponent),
            rat_to_f64(&c.exponent),
            if c.pass { "PASS" } else { "FAIL" }
        ));
    }
    let csv = schedule.csv();
    Ok(PlanOutcome { report, csv, all_pass, schedule })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_str;

    #[test]
    fn default_plan_passes() {
        let cfg = parse_str("").unwrap();
        let out = run_plan(&cfg).unwrap();
        assert!(out.all_pass, "{}", out.report);
        assert!(out.csv.lines().count() >= 2);
    }

    #[test]
    fn non_regime_point_fails() {
        let cfg = parse_str("regime = S2\ngamma = inf\np = 2\n").unwrap();
        assert!(run_plan(&cfg).is_err());
    }

    #[test]
    fn strict_mode_rejects_small_b() {
        let cfg = parse_str("mode = paper-strict\n").unwrap();
        assert!(run_plan(&cfg).is_err());
    }

    #[test]
    fn strict_mode_accepts_large_parameters() {
        let cfg = parse_str(
            "mode = paper-strict\nb = 360000\nbeta = 1/100000000000000\nepsilon_r = 1/10000000000\nq_max = 2\n",
        )
        .unwrap();
        let out = run_plan(&cfg).unwrap();
        assert!(out.all_pass);
        assert!(out.schedule.violations.is_empty());
    }
}
