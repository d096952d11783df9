//! One line per acceptance criterion; the target fails if any criterion does.

use nevlab::acceptance::{run_suite, SUITES};

#[test]
fn acceptance() {
    let start = std::time::Instant::now();
    let results = run_suite("all").expect("all suites resolve");
    assert_eq!(results.len(), SUITES.len());
    println!();
    for c in &results {
        println!("{c}");
    }
    let secs = start.elapsed().as_secs_f64();
    println!("verify all: {secs:.1}s (limit 300s)");
    let failed: Vec<_> = results.iter().filter(|c| !c.passed).map(|c| c.suite).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
    assert!(secs < 300.0);
}
