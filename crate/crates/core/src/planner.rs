//! Exact-rational regime membership, admissible-parameter selection, per-level
//! schedules and leading-order constraint verification.
//!
//! All verdicts are computed in exact rational arithmetic; floating point only
//! appears in the optional decimal columns of reports.

use crate::error::{Error, Result};
use crate::rat::*;
use num_bigint::BigInt;
use num_traits::{One, Signed};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    S1,
    S2,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::S1 => write!(f, "S1"),
            Regime::S2 => write!(f, "S2"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Membership {
    S1,
    S2,
    Both,
    None,
}

/// Exponent triple (s, gamma, p) together with the dissipation order alpha.
#[derive(Clone, Debug)]
pub struct RegimePoint {
    pub s: Rat,
    pub gamma: RatOrInf,
    pub p: RatOrInf,
    pub alpha: Rat,
}

impl RegimePoint {
    pub fn new(s: Rat, gamma: RatOrInf, p: RatOrInf, alpha: Rat) -> Result<Self> {
        if s.is_negative() {
            return Err(Error::Domain(format!("s = {} must be >= 0", format_rat(&s))));
        }
        let one = Rat::one();
        if !gamma.is_at_least(&one) {
            return Err(Error::Domain(format!("gamma = {gamma} must be >= 1")));
        }
        if !p.is_at_least(&one) {
            return Err(Error::Domain(format!("p = {p} must be >= 1")));
        }
        if alpha < one || alpha >= rat(3, 2) {
            return Err(Error::Domain(format!(
                "alpha = {} must lie in [1, 3/2)",
                format_rat(&alpha)
            )));
        }
        Ok(RegimePoint { s, gamma, p, alpha })
    }

    /// Supercriticality margin for one regime: bound - s, membership iff it is > 0.
    pub fn slack(&self, regime: Regime) -> Rat {
        let inv_gamma = self.gamma.reciprocal();
        let inv_p = self.p.reciprocal();
        let a = &self.alpha;
        let bound = match regime {
            Regime::S1 => {
                rat_int(2) * a.clone() * &inv_gamma
                    + (rat_int(2) * a.clone() - rat_int(2)) * &inv_p
                    + Rat::one()
                    - rat_int(2) * a.clone()
            }
            Regime::S2 => {
                (rat_int(4) * a.clone() - rat_int(4)) * &inv_gamma
                    + rat_int(2) * &inv_p
                    + Rat::one()
                    - rat_int(2) * a.clone()
            }
        };
        bound - self.s.clone()
    }
}

/// Strict-inequality membership test plus the two exact slack values.
pub fn regime_membership(pt: &RegimePoint) -> (Membership, Rat, Rat) {
    let s1 = pt.slack(Regime::S1);
    let s2 = pt.slack(Regime::S2);
    let m = match (s1.is_positive(), s2.is_positive()) {
        (true, true) => Membership::Both,
        (true, false) => Membership::S1,
        (false, true) => Membership::S2,
        (false, false) => Membership::None,
    };
    (m, s1, s2)
}

/// Defect of the scaling-critical relation 2a/gamma + 3/p = 2a - 1 + s.
/// Zero on the critical surface, positive on the supercritical side.
pub fn lps_criticality(pt: &RegimePoint) -> Rat {
    let inv_gamma = pt.gamma.reciprocal();
    let inv_p = pt.p.reciprocal();
    rat_int(2) * pt.alpha.clone() * inv_gamma + rat_int(3) * inv_p
        - (rat_int(2) * pt.alpha.clone() - Rat::one() + pt.s.clone())
}

/// An integrality requirement of the form `b * value in N`, satisfied exactly
/// when `required_divisor_of_b` divides b.
#[derive(Clone, Debug)]
pub struct SideCondition {
    pub description: String,
    pub required_divisor_of_b: BigInt,
}

fn divisor_for(value: &Rat) -> BigInt {
    value.denom().clone()
}

#[derive(Clone, Debug)]
pub struct EpsilonChoice {
    pub epsilon: Rat,
    pub cap: Rat,
    pub conditions: Vec<SideCondition>,
}

/// Largest unit fraction eps = 1/n below the admissibility cap
/// (1/20) * min(3/2 - alpha, slack), with the integrality conditions on b.
pub fn pick_epsilon(pt: &RegimePoint, regime: Regime) -> Result<EpsilonChoice> {
    let slack = pt.slack(regime);
    if !slack.is_positive() {
        return Err(Error::NoRegime(format!(
            "slack for {regime} is {} <= 0",
            format_rat(&slack)
        )));
    }
    let margin = rat(3, 2) - pt.alpha.clone();
    let cap = std::cmp::min(margin, slack) / rat_int(20);
    // smallest n with 1/n <= cap
    let n = cap.recip().ceil().to_integer();
    let epsilon = Rat::new(BigInt::one(), n.clone());
    let conditions = match regime {
        Regime::S1 => {
            let value = rat_int(2) - pt.alpha.clone() - rat_int(8) * epsilon.clone();
            vec![SideCondition {
                description: format!("b*({}) in N", format_rat(&value)),
                required_divisor_of_b: divisor_for(&value),
            }]
        }
        Regime::S2 => vec![SideCondition {
            description: format!("b*({}) in N", format_rat(&epsilon)),
            required_divisor_of_b: divisor_for(&epsilon),
        }],
    };
    Ok(EpsilonChoice { epsilon, cap, conditions })
}

/// Block-parameter exponents, all measured in powers of the level-(q+1) frequency.
#[derive(Clone, Debug)]
pub struct BlockExponents {
    pub regime: Regime,
    pub r_perp: Rat,
    pub r_par: Option<Rat>,
    pub tau: Rat,
    pub sigma: Rat,
    pub mu: Option<Rat>,
}

pub fn block_exponents(regime: Regime, alpha: &Rat, epsilon: &Rat) -> BlockExponents {
    let a2 = rat_int(2) * alpha.clone();
    match regime {
        Regime::S1 => BlockExponents {
            regime,
            r_perp: rat_int(2) - a2.clone() - rat_int(10) * epsilon.clone(),
            r_par: None,
            tau: a2,
            sigma: rat_int(2) * epsilon.clone(),
            mu: None,
        },
        Regime::S2 => BlockExponents {
            regime,
            r_perp: rat_int(-1) + rat_int(2) * epsilon.clone(),
            r_par: Some(rat_int(-1) + rat_int(6) * epsilon.clone()),
            tau: rat_int(4) * alpha.clone() - rat_int(4) + rat_int(12) * epsilon.clone(),
            sigma: rat_int(2) * epsilon.clone(),
            mu: Some(a2 - Rat::one() + rat_int(3) * epsilon.clone()),
        },
    }
}

#[derive(Clone, Debug)]
pub struct ConstraintReport {
    pub name: &'static str,
    pub exponent: Rat,
    pub pass: bool,
}

/// Reduces every leading-order constraint of the chosen regime to an exact
/// power of the level frequency; PASS iff the exponent is strictly negative.
pub fn check_constraints(pt: &RegimePoint, blocks: &BlockExponents) -> Vec<ConstraintReport> {
    let half = rat(1, 2);
    let inv_p = pt.p.reciprocal();
    let inv_gamma = pt.gamma.reciprocal();
    let a2m1 = rat_int(2) * pt.alpha.clone() - Rat::one();
    let mut out = Vec::new();
    let mut push = |name: &'static str, exponent: Rat| {
        let pass = exponent.is_negative();
        out.push(ConstraintReport { name, exponent, pass });
    };
    match blocks.regime {
        Regime::S1 => {
            let rp = &blocks.r_perp;
            let tau = &blocks.tau;
            let sig = &blocks.sigma;
            push(
                "sobolev_membership",
                pt.s.clone()
                    + rp.clone() * (inv_p.clone() - half.clone())
                    + tau.clone() * (half.clone() - inv_gamma.clone()),
            );
            push(
                "time_derivative",
                sig.clone() - Rat::one() + rp.clone() * half.clone() + tau.clone() * half.clone(),
            );
            push(
                "hyperdissipativity_p",
                a2m1.clone() + rp.clone() * half.clone() - tau.clone() * half.clone(),
            );
            push("oscillation_p", -Rat::one() - rp.clone());
        }
        Regime::S2 => {
            let rp = &blocks.r_perp;
            let rl = blocks.r_par.as_ref().expect("r_par in S2");
            let tau = &blocks.tau;
            let sig = &blocks.sigma;
            let mu = blocks.mu.as_ref().expect("mu in S2");
            push(
                "sobolev_membership",
                pt.s.clone()
                    + (rp.clone() + rl.clone()) * (inv_p.clone() - half.clone())
                    + tau.clone() * (half.clone() - inv_gamma.clone()),
            );
            push(
                "time_derivative",
                mu.clone() + rat(3, 2) * rp.clone()
                    - half.clone() * rl.clone()
                    - half.clone() * tau.clone(),
            );
            push(
                "hyperdissipativity_p",
                a2m1.clone() + half.clone() * (rp.clone() + rl.clone()) - half.clone() * tau.clone(),
            );
            push("hyperdissipativity_t", a2m1.clone() - mu.clone());
            push("oscillation_p", -Rat::one() - rp.clone());
            push("oscillation_t", -mu.clone() + sig.clone() + tau.clone());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleMode {
    PaperStrict,
    /// Accepts strict-mode violations (they are flagged in the report) and
    /// rounds subinterval counts to a divisor of the time grid.
    Toy { time_grid: usize },
}

/// Per-level parameters. Frequencies and amplitudes are carried as exact
/// exponents of the base integer `a`; numeric values are materialized on
/// demand and may overflow to infinity in paper-strict scales.
#[derive(Clone, Debug)]
pub struct LevelParams {
    pub q: u32,
    /// lambda_q = a^lambda_exp
    pub lambda_exp: Rat,
    /// delta_q = a^delta_exp
    pub delta_exp: Rat,
    /// Ideal subinterval count for the next level: T * a^m_exp.
    pub m_exp: Rat,
    /// Toy-mode rounded subinterval count (divides the time grid), with the
    /// deviation factor actual/(ideal) recorded.
    pub m_rounded: Option<(u64, f64)>,
    /// theta_{q+1} = (T/m_{q+1})^(1/eta) as an exponent of a (ideal value).
    pub theta_exp: Rat,
    pub blocks: BlockExponents,
}

impl LevelParams {
    pub fn lambda_f64(&self, a: u64) -> f64 {
        rat_pow_f64(a as f64, &self.lambda_exp)
    }
    pub fn delta_f64(&self, a: u64) -> f64 {
        rat_pow_f64(a as f64, &self.delta_exp)
    }
}

#[derive(Clone, Debug)]
pub struct ParamSchedule {
    pub a: u64,
    pub b: u64,
    pub beta: Rat,
    pub epsilon: Rat,
    pub epsilon_r: Rat,
    pub eta: Rat,
    pub t_horizon: Rat,
    pub mode: ScheduleMode,
    pub regime: Regime,
    pub levels: Vec<LevelParams>,
    /// Strict-mode inequalities that failed (empty in an accepted strict schedule).
    pub violations: Vec<String>,
}

pub struct ScheduleInput {
    pub a: u64,
    pub b: u64,
    pub beta: Rat,
    pub epsilon: Rat,
    pub epsilon_r: Rat,
    pub eta: Rat,
    pub t_horizon: Rat,
    pub q_max: u32,
    pub mode: ScheduleMode,
    pub regime: Regime,
    pub alpha: Rat,
}

fn divisors_of(n: u64) -> Vec<u64> {
    let mut d = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            d.push(i);
            if i != n / i {
                d.push(n / i);
            }
        }
        i += 1;
    }
    d.sort_unstable();
    d
}

/// Builds the per-level schedule lambda_q = a^(b^q), delta_q, subinterval
/// counts and concentration lengths, verifying the strict-mode inequalities.
pub fn build_schedule(input: ScheduleInput) -> Result<ParamSchedule> {
    if input.a < 2 {
        return Err(Error::Domain("a must be >= 2".into()));
    }
    if input.b == 0 || input.b % 2 != 0 {
        return Err(Error::Domain("b must be a positive even integer".into()));
    }
    if !input.eta.is_positive() || input.eta >= Rat::one() {
        return Err(Error::Domain("eta must lie in (0,1)".into()));
    }
    if !input.beta.is_positive() {
        return Err(Error::Domain("beta must be positive".into()));
    }
    if !input.t_horizon.is_positive() {
        return Err(Error::Domain("T must be positive".into()));
    }

    let b_rat = rat_int(input.b as i64);
    let mut violations = Vec::new();

    // b > 1500/(eps*eta); the planner exposes eta and uses it here in place of
    // the target Hausdorff bound, which is the conservative direction.
    let lhs = rat_int(1500) / (input.epsilon.clone() * input.eta.clone());
    if b_rat <= lhs {
        violations.push(format!(
            "b > 1500/(eps*eta) fails: {} <= {}",
            input.b,
            format_rat(&lhs)
        ));
    }
    let beta_cap = Rat::new(BigInt::one(), BigInt::from(100 * input.b * input.b));
    if input.beta >= beta_cap {
        violations.push(format!(
            "beta < 1/(100 b^2) fails: {} >= {}",
            format_rat(&input.beta),
            format_rat(&beta_cap)
        ));
    }
    let er_cap = b_rat.clone() * input.beta.clone() / rat_int(10);
    if input.epsilon_r >= er_cap {
        violations.push(format!(
            "eps_R < b*beta/10 fails: {} >= {}",
            format_rat(&input.epsilon_r),
            format_rat(&er_cap)
        ));
    }

    let mut levels = Vec::new();
    let mut b_pow = Rat::one(); // b^q
    for q in 0..=input.q_max {
        let lambda_exp = b_pow.clone();
        // delta_q = lambda_1^{3 beta} lambda_q^{-2 beta}
        let delta_exp =
            input.beta.clone() * (rat_int(3) * b_rat.clone() - rat_int(2) * b_pow.clone());
        let m_exp = rat_int(12) * b_pow.clone();
        let theta_exp = -rat_int(12) * b_pow.clone() / input.eta.clone();
        // lambda_q^{-eps_R} delta_{q+1} < 1 for q >= 1 in strict schedules
        if q >= 1 {
            let e = -input.epsilon_r.clone() * b_pow.clone()
                + input.beta.clone()
                    * (rat_int(3) * b_rat.clone() - rat_int(2) * b_pow.clone() * b_rat.clone());
            if !e.is_negative() {
                violations.push(format!(
                    "lambda_q^(-eps_R) delta_(q+1) < 1 fails at q={q}: exponent {}",
                    format_rat(&e)
                ));
            }
        }
        let m_rounded = match &input.mode {
            ScheduleMode::Toy { time_grid } => {
                // ideal m = T * a^m_exp, rounded down to a divisor of the grid
                // so every subinterval boundary lands on a sample.
                let ideal = rat_to_f64(&input.t_horizon) * rat_pow_f64(input.a as f64, &m_exp);
                let divs = divisors_of(*time_grid as u64);
                let pick = divs
                    .iter()
                    .copied()
                    .filter(|d| (*d as f64) <= ideal)
                    .next_back()
                    .unwrap_or(1);
                Some((pick, pick as f64 / ideal))
            }
            ScheduleMode::PaperStrict => None,
        };
        levels.push(LevelParams {
            q,
            lambda_exp,
            delta_exp,
            m_exp,
            m_rounded,
            theta_exp,
            blocks: block_exponents(input.regime, &input.alpha, &input.epsilon),
        });
        b_pow *= b_rat.clone();
    }

    // delta strictly decreasing for q >= 1
    for w in levels.windows(2) {
        if w[0].q >= 1 && w[1].delta_exp >= w[0].delta_exp {
            violations.push(format!(
                "delta_(q+1) < delta_q fails at q={}",
                w[0].q
            ));
        }
    }

    match input.mode {
        ScheduleMode::PaperStrict if !violations.is_empty() => Err(Error::StrictMode(violations)),
        mode => Ok(ParamSchedule {
            a: input.a,
            b: input.b,
            beta: input.beta,
            epsilon: input.epsilon,
            epsilon_r: input.epsilon_r,
            eta: input.eta,
            t_horizon: input.t_horizon,
            mode,
            regime: input.regime,
            levels,
            violations,
        }),
    }
}

impl ParamSchedule {
    /// CSV table with exact exponents rendered as num/den strings.
    pub fn csv(&self) -> String {
        let mut s = String::from(
            "q,lambda_exp,delta_exp,m,theta_exp,r_perp_exp,r_par_exp,tau_exp,sigma_exp,mu_exp\n",
        );
        for lv in &self.levels {
            let m_repr = match &lv.m_rounded {
                Some((m, dev)) => format!("{m} (dev {dev:.3e})"),
                None => format!("T*a^{}", format_rat(&lv.m_exp)),
            };
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                lv.q,
                format_rat(&lv.lambda_exp),
                format_rat(&lv.delta_exp),
                m_repr,
                format_rat(&lv.theta_exp),
                format_rat(&lv.blocks.r_perp),
                lv.blocks.r_par.as_ref().map(format_rat).unwrap_or_default(),
                format_rat(&lv.blocks.tau),
                format_rat(&lv.blocks.sigma),
                lv.blocks.mu.as_ref().map(format_rat).unwrap_or_default(),
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(s: (i64, i64), gamma: Option<(i64, i64)>, p: Option<(i64, i64)>, alpha: (i64, i64)) -> RegimePoint {
        RegimePoint::new(
            rat(s.0, s.1),
            gamma.map(|(n, d)| RatOrInf::finite(n, d)).unwrap_or(RatOrInf::Inf),
            p.map(|(n, d)| RatOrInf::finite(n, d)).unwrap_or(RatOrInf::Inf),
            rat(alpha.0, alpha.1),
        )
        .unwrap()
    }

    #[test]
    fn membership_examples() {
        let (m, s1, _) = regime_membership(&pt((0, 1), Some((3, 2)), None, (1, 1)));
        assert_eq!(m, Membership::S1);
        assert_eq!(s1, rat(1, 3));

        let (m, s1, s2) = regime_membership(&pt((0, 1), None, Some((2, 1)), (1, 1)));
        assert_eq!(m, Membership::None);
        assert_eq!(s1, rat(-1, 1));
        assert_eq!(s2, rat(0, 1));

        let (m, _, s2) = regime_membership(&pt((0, 1), None, Some((1, 1)), (1, 1)));
        assert_eq!(m, Membership::S2);
        assert_eq!(s2, rat(1, 1));
    }

    #[test]
    fn alpha_domain_error() {
        assert!(RegimePoint::new(rat(0, 1), RatOrInf::Inf, RatOrInf::Inf, rat(3, 2)).is_err());
        assert!(RegimePoint::new(rat(0, 1), RatOrInf::Inf, RatOrInf::Inf, rat(1, 2)).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let c = pick_epsilon(&pt((0, 1), Some((3, 2)), None, (1, 1)), Regime::S1).unwrap();
        assert_eq!(c.epsilon, rat(1, 60));
        // b*(2 - 1 - 8/60) = b*13/15 integral iff 15 | b
        assert_eq!(c.conditions[0].required_divisor_of_b, BigInt::from(15));

        let c = pick_epsilon(&pt((0, 1), None, Some((1, 1)), (1, 1)), Regime::S2).unwrap();
        assert_eq!(c.epsilon, rat(1, 40));
        assert_eq!(c.conditions[0].required_divisor_of_b, BigInt::from(40));

        assert!(pick_epsilon(&pt((0, 1), None, Some((2, 1)), (1, 1)), Regime::S2).is_err());
    }

    #[test]
    fn lps_examples() {
        assert_eq!(lps_criticality(&pt((0, 1), Some((2, 1)), None, (1, 1))), rat(0, 1));
        assert_eq!(lps_criticality(&pt((0, 1), None, Some((3, 1)), (1, 1))), rat(0, 1));
        assert_eq!(lps_criticality(&pt((1, 1), None, None, (1, 1))), rat(-2, 1));
    }

    #[test]
    fn schedule_example_values() {
        let sched = build_schedule(ScheduleInput {
            a: 2,
            b: 2,
            beta: rat(1, 8),
            epsilon: rat(1, 60),
            epsilon_r: rat(1, 100),
            eta: rat(1, 2),
            t_horizon: rat(1, 1),
            q_max: 2,
            mode: ScheduleMode::Toy { time_grid: 256 },
            regime: Regime::S1,
            alpha: rat(1, 1),
        })
        .unwrap();
        let l2 = &sched.levels[2];
        assert_eq!(l2.lambda_exp, rat(4, 1)); // lambda_2 = 2^4 = 16
        // delta_2 = 2^(beta*(3b - 2 b^2)) = 2^(1/8 * (6-8)) = 2^(-1/4)
        assert_eq!(l2.delta_exp, rat(-1, 4));
        assert!((l2.delta_f64(2) - 0.84090).abs() < 1e-4);
        // m_1 ideal = 2^12 = 4096, theta_1 = 2^(-24)
        let l0 = &sched.levels[0];
        assert_eq!(l0.m_exp, rat(12, 1));
        assert_eq!(l0.theta_exp, rat(-24, 1));
        assert!(!sched.violations.is_empty()); // flagged, not fatal, in toy mode
    }

    #[test]
    fn strict_mode_rejects_small_b() {
        let err = build_schedule(ScheduleInput {
            a: 2,
            b: 2,
            beta: rat(1, 8),
            epsilon: rat(1, 60),
            epsilon_r: rat(1, 100),
            eta: rat(1, 2),
            t_horizon: rat(1, 1),
            q_max: 1,
            mode: ScheduleMode::PaperStrict,
            regime: Regime::S1,
            alpha: rat(1, 1),
        })
        .unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("1500"));
    }

    #[test]
    fn constraint_exponents_s1() {
        let alpha = rat(1, 1);
        let eps = rat(1, 60);
        let blocks = block_exponents(Regime::S1, &alpha, &eps);
        let point = pt((0, 1), Some((3, 2)), None, (1, 1));
        let reps = check_constraints(&point, &blocks);
        assert!(reps.iter().all(|r| r.pass));
        let td = reps.iter().find(|r| r.name == "time_derivative").unwrap();
        assert_eq!(td.exponent, -rat_int(3) * eps.clone());
        let osc = reps.iter().find(|r| r.name == "oscillation_p").unwrap();
        // 2 alpha - 3 + 10 eps
        assert_eq!(osc.exponent, rat_int(2) * alpha - rat_int(3) + rat_int(10) * eps);
    }

    #[test]
    fn constraint_exponents_s2() {
        let alpha = rat(1, 1);
        let eps = rat(1, 40);
        let blocks = block_exponents(Regime::S2, &alpha, &eps);
        let point = pt((0, 1), None, Some((1, 1)), (1, 1));
        let reps = check_constraints(&point, &blocks);
        assert!(reps.iter().all(|r| r.pass), "{reps:?}");
        let hd = reps.iter().find(|r| r.name == "hyperdissipativity_t").unwrap();
        assert_eq!(hd.exponent, -rat_int(3) * eps);
    }

    #[test]
    fn planner_epsilon_passes_all_constraints_all_alphas() {
        for (an, ad) in [(1i64, 1i64), (9, 8), (5, 4), (11, 8)] {
            for regime in [Regime::S1, Regime::S2] {
                // pick a point comfortably inside each regime for this alpha
                let point = match regime {
                    Regime::S1 => pt((0, 1), Some((1, 1)), None, (an, ad)),
                    Regime::S2 => pt((0, 1), None, Some((1, 1)), (an, ad)),
                };
                let choice = pick_epsilon(&point, regime).unwrap();
                let blocks = block_exponents(regime, &point.alpha, &choice.epsilon);
                for rep in check_constraints(&point, &blocks) {
                    assert!(
                        rep.pass,
                        "alpha {an}/{ad} {regime} {}: exponent {}",
                        rep.name,
                        format_rat(&rep.exponent)
                    );
                }
            }
        }
    }
}
