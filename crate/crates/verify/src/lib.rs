//! Acceptance harness for the m2 reproduction suite.
//!
//! The suite itself lives in [`filiform::suite`]; this crate renders it one line per
//! criterion and turns failures into a nonzero exit.

use filiform::suite::SuiteReport;

/// One `PASS`/`FAIL` line per criterion, each followed by its indented checks.
pub fn render(report: &SuiteReport) -> String {
    let mut out = String::new();
    for c in &report.criteria {
        out.push_str(&format!("criterion {:>2} {} {}\n", c.id, if c.passed { "PASS" } else { "FAIL" }, c.anchor));
        for x in &c.checks {
            let mark = if x.passed { "ok  " } else { "FAIL" };
            if x.detail.is_empty() {
                out.push_str(&format!("      {mark} {}\n", x.name));
            } else {
                out.push_str(&format!("      {mark} {}: {}\n", x.name, x.detail));
            }
        }
    }
    out
}
