//! Runs every acceptance criterion at its pinned tolerance and prints one line per criterion.

use fzeta::verify::{criterion_count, run_criterion};

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    println!();
    for id in 1..=criterion_count() as u32 {
        let r = run_criterion(id).expect("criterion exists");
        println!("{}", r.line());
        if !r.passed {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
