//! The `report` command: consolidates the per-command CSV artifacts of a run
//! directory into one stable-schema table.

use anyhow::{bail, Result};
use std::path::Path;

/// Known artifact names, in merge order.
pub const EXPECTED: &[&str] = &[
    "plan.csv",
    "checks.csv",
    "decay.csv",
    "glue_intervals.csv",
    "hausdorff.csv",
    "solver_log.csv",
    "stress_report.csv",
];

pub fn run_report(dir: &Path) -> Result<String> {
    let mut out = String::from("source,line\n");
    let mut found = 0;
    for name in EXPECTED {
        let path = dir.join(name);
        if !path.exists() {
            continue;
        }
        found += 1;
        let text = std::fs::read_to_string(&path)?;
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                continue; // headers are per-artifact; schema carries the source
            }
            out.push_str(&format!("{name},{line}\n"));
        }
    }
    if found == 0 {
        bail!(
            "no artifacts found in {}; expected any of: {}",
            dir.display(),
            EXPECTED.join(", ")
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dir_errors_with_expectations() {
        let dir = std::env::temp_dir().join(format!("mhdkit-report-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let err = run_report(&dir).unwrap_err().to_string();
        assert!(err.contains("plan.csv"));
        std::fs::write(dir.join("plan.csv"), "h\nrow1\n").unwrap();
        let merged = run_report(&dir).unwrap();
        assert!(merged.contains("plan.csv,row1"));
        // idempotent byte-for-byte
        assert_eq!(merged, run_report(&dir).unwrap());
        std::fs::remove_dir_all(&dir).ok();
    }
}
