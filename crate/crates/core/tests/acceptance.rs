//! Acceptance criteria, one line per criterion.
//!
//! Tolerances: closed-form consistency 1e-10 relative in under 5 s; extreme
//! identities 1e-12 relative; figure settings with 1e-12 dominance slack,
//! 0.2% endpoint error at grid 201, under 10 s; gap below 5% of D_w at 20 dB;
//! separation gap at most M/K bits; analog ratio within 0.5%; Monte-Carlo
//! within max(1%, 4 standard errors) at n = 1e6 in under 60 s; water-filling
//! rate within 1e-12 relative.

use hda_core::checks::{run_suite, Suite};

#[test]
fn acceptance() {
    let results = run_suite(Suite::All, 1_000_000);
    for r in &results {
        println!("{r}");
    }
    assert_eq!(results.len(), 8);
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
