//! Floquet-Bloch band structure of periodic quantum graphs.
//!
//! A periodic graph is described by its compact fundamental domain
//! ([`CompactGraph`]); the fiber operator at quasimomentum `k` replaces the
//! condition at one vertex by quasi-Neumann-Kirchhoff conditions with phases
//! `e^{ik_j}` ([`apply_floquet`]). Eigenvalues come from an exact counting
//! function combined with the secular (boundary-condition) matrix, and
//! [`oracle`] provides an independent finite-difference check.

pub mod band_edge;
pub mod dispersion;
pub mod error;
pub mod format;
pub mod graph;
pub mod oracle;
pub mod polygon;
pub mod presets;
pub mod secular;
pub mod transfer;

pub use band_edge::{
    check_gap, degenerate_curve, perturb_and_verify, quant_condition, CurveOptions,
    DegeneracyReport, GapReport, PerturbSpec, QuantCheck, RobustnessReport,
};
pub use dispersion::{band_sweep, discrete_diamond_bands, spectrum_report, BandTable, SpectrumReport};
pub use error::{Error, GraphError, OracleError, PolygonError, Result, SolverError};
pub use graph::{
    apply_floquet, build_gamma1, build_gamma2, dirichlet_perturbation, CompactGraph, Edge,
    Gamma1Params, Gamma2Params, GraphConfig, Potential, Segment, Vertex, VertexCondition,
    VertexId,
};
pub use oracle::{discretize, oracle_eigenvalues, DiscreteOperator};
pub use polygon::{classify, curve_samples, Classification, PolygonCurve, PolygonSpec, Topology};
pub use presets::Preset;
pub use secular::{eigenfunction, eigenvalues_in, EigenSolution, Eigenvalue, SolverOptions};
pub use transfer::{basis_eval, transfer_matrix, BasisEval, TransferMatrix};
