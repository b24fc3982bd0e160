//! Acceptance gate: one pass/fail line per criterion, non-zero exit if any
//! criterion fails. Honors CETLAB_THREADS like the binary.

use cetlab::acceptance::{run_criterion, table, CRITERIA};

fn main() {
    let pool = cetlab::commands::thread_pool().expect("worker pool");
    let outcomes = pool.install(|| {
        (1..=CRITERIA)
            .map(|id| {
                let o = run_criterion(id);
                println!("{}", o.line());
                o
            })
            .collect::<Vec<_>>()
    });
    println!("{}", table(&outcomes).lines().last().unwrap_or_default());
    if outcomes.iter().any(|o| !o.passed) {
        std::process::exit(1);
    }
}
