use std::process::ExitCode;

use magnetic_ncg::report::{verify_all, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::default();
    let report = match verify_all(&config) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance suite could not start: {e}");
            return ExitCode::FAILURE;
        }
    };
    for (i, c) in report.checks.iter().enumerate() {
        println!(
            "[{}] {} {}: error {:.3e} (tolerance {:.1e}); {}",
            i + 1,
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.error,
            c.tolerance,
            c.detail
        );
    }
    let reproducible = verify_all(&config)
        .and_then(|again| Ok(again.deterministic_json()? == report.deterministic_json()?))
        .unwrap_or(false);
    println!("report reproducible: {reproducible}");
    let passed = report.checks.iter().filter(|c| c.pass).count();
    println!("{passed}/9 acceptance checks passed");
    if report.checks.len() == 9 && report.pass && reproducible {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
