//! Fixtures shared by the kernel benchmarks.

use locc_core::catalog::build;
use locc_core::{CatalogEntry, ComplexMatrix, C64};

pub fn entry(name: &str) -> CatalogEntry {
    build(name, &[]).expect("catalog entry builds")
}

/// Deterministic dense matrix with no special structure.
pub fn dense(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |r, c| {
        let x = (r * 7 + c * 13 + 1) as f64;
        C64::new((x * 0.37).sin(), (x * 0.11).cos())
    })
}
