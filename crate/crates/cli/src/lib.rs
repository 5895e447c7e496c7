//! Command-line driver: configuration, planning, verification suites, toy
//! iterations, gluing runs and report consolidation.

pub mod config;
pub mod iterate;
pub mod plan;
pub mod report;
pub mod setup;
pub mod suites;

use anyhow::Result;
use std::path::Path;

pub fn write_checks_csv(path: &Path, rows: &[suites::CheckRow]) -> Result<()> {
    let mut out = String::from("suite,check,value,threshold,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.12e},{},{}\n",
            r.suite,
            r.check,
            r.value,
            r.threshold.replace(',', ";"),
            r.pass
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn summarize(rows: &[suites::CheckRow]) -> (String, bool) {
    let mut ok = true;
    let mut s = String::new();
    for r in rows {
        ok &= r.pass;
        s.push_str(&format!(
            "[{}] {:<48} {:>14.6e}  {}\n",
            if r.pass { "PASS" } else { "FAIL" },
            format!("{}/{}", r.suite, r.check),
            r.value,
            r.threshold
        ));
    }
    let total = rows.len();
    let passed = rows.iter().filter(|r| r.pass).count();
    s.push_str(&format!("{passed}/{total} checks passed\n"));
    (s, ok)
}
