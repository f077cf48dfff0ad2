//! Benchmarks live in `benches/`; this library only holds shared fixtures.

use qgband_core::{apply_floquet, CompactGraph, Preset};

/// The first family graph at a generic quasimomentum.
pub fn floquet_gamma1() -> CompactGraph {
    let g = Preset::Gamma1Equilateral.graph().expect("preset has a graph");
    let b = g.vertex_id("B").expect("vertex B");
    apply_floquet(&g, b, [0.4, -1.3, 2.2], 1.0).expect("degree 4")
}
