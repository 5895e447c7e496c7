use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use mhdkit::{config, iterate, plan, report, suites, summarize, write_checks_csv};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mhdkit", about = "Construction kit and verifier for intermittent convex-integration fields on the 3-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to a line-oriented key = value configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override for synthetic data.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Regime membership, admissible parameters, schedule and constraints.
    Plan,
    /// Run a verification suite.
    Verify {
        /// spectral | geometry | blocks | perturbations | stresses | solver | glue | all
        #[arg(default_value = "all")]
        suite: String,
    },
    /// Toy convex-integration iteration with the gluing stage.
    Iterate,
    /// Gluing stage alone: glued fields, stresses and interval bookkeeping.
    Glue,
    /// Consolidate the CSV artifacts of a run directory.
    Report,
}

fn load_config(cli: &Cli) -> Result<config::RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => config::parse_file(path)?,
        None => config::RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("MHDKIT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
        }
    }
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    let cfg = load_config(&cli)?;
    std::fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    match &cli.command {
        Command::Plan => {
            let outcome = plan::run_plan(&cfg)?;
            print!("{}", outcome.report);
            std::fs::write(cfg.out.join("plan.txt"), &outcome.report)?;
            std::fs::write(cfg.out.join("plan.csv"), &outcome.csv)?;
            println!("wrote {}", cfg.out.join("plan.csv").display());
            Ok(outcome.all_pass)
        }
        Command::Verify { suite } => {
            let rows = suites::run_suite(&cfg, suite)?;
            let (summary, ok) = summarize(&rows);
            print!("{summary}");
            write_checks_csv(&cfg.out.join("checks.csv"), &rows)?;
            Ok(ok)
        }
        Command::Iterate => {
            let outcome = iterate::run_iteration(&cfg)?;
            let mut csv = String::from("q,stress_l1,increment_l2\n");
            for r in &outcome.reports {
                csv.push_str(&format!("{},{:.12e},{:.12e}\n", r.q, r.stress_l1, r.increment_l2));
            }
            std::fs::write(cfg.out.join("decay.csv"), &csv)?;
            println!(
                "glued stress L1 = {:.6e}; decay {:.6e} -> {:.6e}; increment {:.6e}",
                outcome.glued_stress_l1,
                outcome.reports[0].stress_l1,
                outcome.reports[1].stress_l1,
                outcome.reports[1].increment_l2
            );
            println!(
                "residual orders {:?}, extrapolated ({:.3e}, {:.3e})",
                outcome.residual_orders,
                outcome.residual_extrapolated.0,
                outcome.residual_extrapolated.1
            );
            let decayed = outcome.reports[1].stress_l1 < outcome.reports[0].stress_l1;
            println!("stress decay: {}", if decayed { "PASS" } else { "FAIL" });
            Ok(decayed)
        }
        Command::Glue => {
            let (csv_intervals, csv_hausdorff, ok) = run_glue(&cfg)?;
            std::fs::write(cfg.out.join("glue_intervals.csv"), &csv_intervals)?;
            std::fs::write(cfg.out.join("hausdorff.csv"), &csv_hausdorff)?;
            println!("support predicate: {}", if ok { "PASS" } else { "FAIL" });
            Ok(ok)
        }
        Command::Report => {
            let merged = report::run_report(&cfg.out)?;
            std::fs::write(cfg.out.join("consolidated.csv"), &merged)?;
            println!("wrote {}", cfg.out.join("consolidated.csv").display());
            Ok(true)
        }
    }
}

fn run_glue(cfg: &config::RunConfig) -> Result<(String, String, bool)> {
    use mhdkit_core::gluing::{hausdorff_sum, well_prepared_sets, GlueConfig};
    use mhdkit_core::perturb::StressSource;
    use mhdkit_core::rat::{rat, rat_to_f64, Rat};
    use mhdkit_core::spectral::dump;

    let grid = mhdkit_core::spectral::Grid::new(cfg.n.min(32))?;
    let t_h = rat_to_f64(&cfg.t_horizon);
    let mut c = cfg.clone();
    c.n = grid.n;
    let seed = mhdkit::setup::toy_background(&c, grid, true);
    let alpha = rat_to_f64(&cfg.alpha);
    let level0 = mhdkit_core::stress::LevelZeroStress {
        background: seed.clone(),
        nu1: cfg.nu1,
        nu2: cfg.nu2,
        alpha,
    };
    let glue_cfg = GlueConfig::new(cfg.m_subintervals, cfg.theta, t_h)?;
    let solver_cfg = mhdkit_core::solver::SolverConfig::new(cfg.nu1, cfg.nu2, alpha, cfg.dt, grid)?;
    let glued = iterate::GluedLevel::build(glue_cfg.clone(), solver_cfg, &*seed, 16)?;

    // old-stress magnitude drives the index set
    let old_max = |t: f64| {
        level0
            .stress_u(grid, t)
            .map(|s| s.linf())
            .unwrap_or(0.0)
            .max(level0.stress_b(grid, t).map(|s| s.linf()).unwrap_or(0.0))
    };
    let global = (0..=32)
        .map(|j| old_max(t_h * j as f64 / 32.0))
        .fold(0.0f64, f64::max);
    let wps = well_prepared_sets(&glue_cfg, rat_to_f64(&cfg.eta), &old_max, global, 32);

    let glued_max = |t: f64| {
        glued
            .stresses(t)
            .map(|(u, b)| u.linf().max(b.linf()))
            .unwrap_or(f64::INFINITY)
    };
    let glued_global = (0..=64)
        .map(|j| glued_max(t_h * j as f64 / 64.0))
        .fold(0.0f64, f64::max);
    let violations =
        wps.support_predicate_violations(&glue_cfg, &glued_max, glued_global.max(global), 256);

    let mut intervals_csv = String::from("i,in_C,interval\n");
    for i in 0..glue_cfg.m {
        let in_c = wps.index_set.contains(&i);
        let iv = if in_c {
            format!(
                "[{:.6};{:.6}]",
                glue_cfg.node(i) - 2.0 * glue_cfg.theta,
                glue_cfg.node(i) + 3.0 * glue_cfg.theta
            )
        } else {
            String::new()
        };
        intervals_csv.push_str(&format!("{i},{in_c},{iv}\n"));
    }

    let mut hausdorff_csv = String::from("m,theta,kappa,eta,value,rational_part\n");
    let m_rat = rat(glue_cfg.m as i64, 1);
    let theta_rat = Rat::new(1.into(), ((1.0 / glue_cfg.theta).round() as i64).into());
    for kappa in [rat(3, 4), rat(7, 8)] {
        if let Ok(s) = hausdorff_sum(&m_rat, &theta_rat, &kappa, &cfg.eta) {
            hausdorff_csv.push_str(&format!(
                "{},{},{},{},{:.12e},{}\n",
                glue_cfg.m,
                rat_to_f64(&theta_rat),
                mhdkit_core::rat::format_rat(&kappa).replace('/', ":"),
                mhdkit_core::rat::format_rat(&cfg.eta).replace('/', ":"),
                s.value,
                s.rational_part
                    .map(|r| mhdkit_core::rat::format_rat(&r).replace('/', ":"))
                    .unwrap_or_default()
            ));
        }
    }

    // glued field dumps at a few plateau times
    for (i, t) in [0.25 * t_h, 0.5 * t_h, 0.75 * t_h].iter().enumerate() {
        let (u, b) = glued.fields(*t)?;
        dump::write_field3(&cfg.out.join(format!("glued_u_{i}.mhdf")), &u, dump::FLAG_MEAN_FREE)?;
        dump::write_field3(&cfg.out.join(format!("glued_b_{i}.mhdf")), &b, dump::FLAG_MEAN_FREE)?;
    }
    Ok((intervals_csv, hausdorff_csv, violations.is_empty()))
}
