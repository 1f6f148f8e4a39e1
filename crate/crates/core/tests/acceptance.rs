//! Runs the acceptance matrix and prints one PASS/FAIL line per criterion.

use sparse_cover::suite::run_acceptance;

fn main() {
    let results = run_acceptance(|r| println!("{}", r.line()));
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
