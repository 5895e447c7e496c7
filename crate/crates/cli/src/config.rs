//! Line-oriented `key = value` configuration.

use anyhow::{anyhow, bail, Context, Result};
use mhdkit_core::planner::Regime;
use mhdkit_core::rat::{parse_rat, Rat, RatOrInf};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub mode: Mode,
    pub regime: Regime,
    pub s: Rat,
    pub gamma: RatOrInf,
    pub p: RatOrInf,
    pub alpha: Rat,
    pub a: u64,
    pub b: u64,
    pub beta: Rat,
    pub eta: Rat,
    pub epsilon: Option<Rat>,
    pub epsilon_r: Option<Rat>,
    pub t_horizon: Rat,
    pub q_max: u32,
    /// Spatial grid size (power of two).
    pub n: usize,
    /// Time grid size for reports and quadrature.
    pub n_t: usize,
    pub frames: FrameChoice,
    /// Toy block parameters.
    pub lambda: u64,
    pub r_perp: Rat,
    pub r_par: Rat,
    pub tau: u64,
    pub sigma: u64,
    pub mu: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub dt: f64,
    pub theta: f64,
    pub m_subintervals: usize,
    pub seed: u64,
    pub suite: String,
    pub q_steps: u32,
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    PaperStrict,
    Toy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameChoice {
    Paper,
    Toy,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Toy,
            regime: Regime::S1,
            s: Rat::from_integer(0.into()),
            gamma: RatOrInf::finite(3, 2),
            p: RatOrInf::Inf,
            alpha: Rat::from_integer(1.into()),
            a: 2,
            b: 2,
            beta: parse_rat("1/8").unwrap(),
            eta: parse_rat("1/2").unwrap(),
            epsilon: None,
            epsilon_r: None,
            t_horizon: Rat::from_integer(1.into()),
            q_max: 2,
            n: 64,
            n_t: 256,
            frames: FrameChoice::Toy,
            lambda: 8,
            r_perp: parse_rat("1/8").unwrap(),
            r_par: parse_rat("1/4").unwrap(),
            tau: 16,
            sigma: 2,
            mu: 4.0,
            nu1: 0.05,
            nu2: 0.05,
            dt: 1e-3,
            theta: 0.02,
            m_subintervals: 8,
            seed: 7,
            suite: "all".into(),
            q_steps: 1,
            out: PathBuf::from("out"),
        }
    }
}

pub fn parse_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<RunConfig> {
    let mut kv = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected key = value, got {raw:?}", lineno + 1))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut cfg = RunConfig::default();
    for (k, v) in kv {
        apply(&mut cfg, &k, &v).with_context(|| format!("config key {k:?}"))?;
    }
    if !cfg.n.is_power_of_two() {
        bail!("n = {} must be a power of two", cfg.n);
    }
    Ok(cfg)
}

fn apply(cfg: &mut RunConfig, key: &str, value: &str) -> Result<()> {
    let rat = |v: &str| parse_rat(v).map_err(|e| anyhow!(e));
    match key {
        "mode" => {
            cfg.mode = match value {
                "toy" => Mode::Toy,
                "paper-strict" | "strict" => Mode::PaperStrict,
                _ => bail!("unknown mode {value:?}"),
            }
        }
        "regime" => {
            cfg.regime = match value.to_ascii_uppercase().as_str() {
                "S1" => Regime::S1,
                "S2" => Regime::S2,
                _ => bail!("unknown regime {value:?}"),
            }
        }
        "s" => cfg.s = rat(value)?,
        "gamma" => cfg.gamma = value.parse().map_err(|e: String| anyhow!(e))?,
        "p" => cfg.p = value.parse().map_err(|e: String| anyhow!(e))?,
        "alpha" => cfg.alpha = rat(value)?,
        "a" => cfg.a = value.parse()?,
        "b" => cfg.b = value.parse()?,
        "beta" => cfg.beta = rat(value)?,
        "eta" => cfg.eta = rat(value)?,
        "epsilon" => cfg.epsilon = Some(rat(value)?),
        "epsilon_r" => cfg.epsilon_r = Some(rat(value)?),
        "T" | "t_horizon" => cfg.t_horizon = rat(value)?,
        "q_max" => cfg.q_max = value.parse()?,
        "n" => cfg.n = value.parse()?,
        "n_t" => cfg.n_t = value.parse()?,
        "frames" => {
            cfg.frames = match value {
                "paper" => FrameChoice::Paper,
                "toy" => FrameChoice::Toy,
                _ => bail!("unknown frame set {value:?}"),
            }
        }
        "lambda" => cfg.lambda = value.parse()?,
        "r_perp" => cfg.r_perp = rat(value)?,
        "r_par" => cfg.r_par = rat(value)?,
        "tau" => cfg.tau = value.parse()?,
        "sigma" => cfg.sigma = value.parse()?,
        "mu" => cfg.mu = value.parse()?,
        "nu1" => cfg.nu1 = value.parse()?,
        "nu2" => cfg.nu2 = value.parse()?,
        "dt" => cfg.dt = value.parse()?,
        "theta" => cfg.theta = value.parse()?,
        "m" | "m_subintervals" => cfg.m_subintervals = value.parse()?,
        "seed" => cfg.seed = value.parse()?,
        "suite" => cfg.suite = value.into(),
        "q_steps" => cfg.q_steps = value.parse()?,
        "out" => cfg.out = PathBuf::from(value),
        _ => bail!("unknown key"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_defaults() {
        let cfg = parse_str("# comment\nregime = S2\nn = 32\nalpha = 9/8\n").unwrap();
        assert_eq!(cfg.regime, Regime::S2);
        assert_eq!(cfg.n, 32);
        assert_eq!(cfg.alpha, parse_rat("9/8").unwrap());
        assert_eq!(cfg.seed, 7);
        assert!(parse_str("nonsense = 1").is_err());
        assert!(parse_str("n = 33").is_err());
    }
}
