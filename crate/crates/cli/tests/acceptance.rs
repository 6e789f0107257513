//! The thirteen acceptance criteria, one PASS/FAIL line each.
//!
//! Criterion 3 cannot be met as stated: with the table limited to n + 2g − 2 ≤ 2, perturbing
//! the genus-one entries moves no KdV coefficient. It is evaluated in full and reported,
//! and the test requires that its failure is exactly that and nothing else.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use tauwork_cli::suite::{Level, Workbench, CRITERIA};
use tauwork_cli::RunConfig;

/// Runtime ceilings per criterion.
fn limit(id: u32) -> Duration {
    Duration::from_secs(match id {
        1 => 5,
        2 | 13 => 120,
        3 | 6 | 7 | 9 => 60,
        4 | 5 | 8 => 10,
        _ => 30,
    })
}

const UNATTAINABLE: [u32; 1] = [3];

fn line(text: &str) {
    // written past the test harness capture so the lines always appear
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").unwrap();
    out.flush().unwrap();
}

fn quick_suite() -> (Option<i32>, Vec<u8>, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_tauwork"))
        .args(["suite", "quick"])
        .env_remove(tauwork_cli::CONFIG_ENV)
        .output()
        .unwrap();
    (out.status.code(), out.stdout, start.elapsed())
}

#[test]
fn acceptance_criteria() {
    let mut wb = Workbench::new(Level::Quick, &RunConfig::default());
    let mut failures = Vec::new();
    for (id, name) in CRITERIA {
        let start = Instant::now();
        let (pass, detail) = if id == 13 {
            let (code_a, a, ta) = quick_suite();
            let (code_b, b, tb) = quick_suite();
            let identical = a == b && !a.is_empty();
            let fast = ta.max(tb) <= limit(13);
            let self_check = wb.run(13);
            let report: serde_json::Value = serde_json::from_slice(&a).unwrap_or_default();
            let failed = report["failed"].clone();
            (
                identical && fast && code_a == code_b && self_check.pass,
                format!("identical={identical} runtime={:.1}s,{:.1}s exit={code_a:?} failed={failed}", ta.as_secs_f64(), tb.as_secs_f64()),
            )
        } else {
            let r = wb.run(id);
            (r.pass, r.detail.to_string())
        };
        let elapsed = start.elapsed();
        let in_time = elapsed <= limit(id);
        let ok = pass && in_time;
        let short: String = detail.chars().take(160).collect();
        line(&format!(
            "criterion {id:>2} {name}: {} ({:.2}s) {short}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        ));
        if !ok {
            failures.push((id, detail));
        }
    }
    for (id, detail) in &failures {
        if UNATTAINABLE.contains(id) {
            continue;
        }
        panic!("criterion {id} failed: {detail}");
    }
    // the known failure must be the mutation half only: the residual itself is exactly zero,
    // and the undetected perturbations are precisely the three genus-one entries
    let r = wb.run(3);
    assert_eq!(r.detail["residual_zero"], true);
    let undetected: Vec<&str> = r.detail["mutations_undetected"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(undetected, ["1:(1)", "1:(1,1)", "1:(2,0)"]);
}
