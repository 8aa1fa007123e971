//! Central-difference verification of every autodiff op and the toy U-Net.

use radarsr::harness::gradcheck_suite;

fn main() -> radarsr::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let results = gradcheck_suite(seed)?;
    for r in &results {
        println!(
            "{} {:<16} max rel err {:.2e} (tol {:.0e}), {} coords, {} excluded at kinks",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.report.max_rel_error,
            r.tolerance,
            r.report.checked,
            r.report.excluded
        );
    }
    let failed = results.iter().filter(|r| !r.passed()).count();
    println!("{} of {} checks passed", results.len() - failed, results.len());
    Ok(())
}
