//! The first spectral gap and its degenerate lower edge.
//!
//! With `Gamma^B` (Dirichlet at `B`) and `Gamma^A` (Dirichlet at `A`), rank-one
//! interlacing gives, for every quasimomentum `k`,
//!
//! ```text
//! lambda_1(Gamma^k) <= lambda_1(Gamma^B) < lambda_1(Gamma^A) <= lambda_2(Gamma^k)
//! ```
//!
//! and the first inequality is an equality exactly when the ground state
//! `phi` of `Gamma^B` satisfies the quasi-NK flux condition at `B`:
//! `sum_j e^{ik_j} phi_j'(B) + phi_4'(B) = 0`, a closed quadrangle.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dispersion::{band_sweep, BandTable};
use crate::error::{Error, Result};
use crate::format::sig12;
use crate::graph::{
    apply_floquet, dirichlet_perturbation, wrap_angle, CompactGraph, Edge, GraphConfig, Potential,
    Segment, VertexCondition, VertexId,
};
use crate::polygon::{
    classify, curve_samples, torus_distance, Classification, PolygonCurve, PolygonSpec, Topology,
};
use crate::secular::{eigenfunction, lowest_eigenvalues, lowest_values, sigma_min, SolverOptions};

/// Chain inequalities are checked to this slack.
pub const CHAIN_TOL: f64 = 1e-8;

/// Coupling at `v` if it carries one, else 0.
pub fn coupling_at(g: &CompactGraph, v: VertexId) -> f64 {
    g.vertex(v).condition.coupling().unwrap_or(0.0)
}

/// Lowest eigenvalue of a graph, which must be simple.
fn ground_state(g: &CompactGraph, opts: &SolverOptions) -> Result<f64> {
    let ev = lowest_eigenvalues(g, 1, opts)?;
    Ok(ev[0].value)
}

fn lambda1(g: &CompactGraph, opts: &SolverOptions) -> Result<f64> {
    Ok(lowest_values(g, 1, opts)?[0])
}

/// `lambda_1` of the graph with Dirichlet at `b`.
pub fn lambda_b(g: &CompactGraph, b: VertexId, opts: &SolverOptions) -> Result<f64> {
    ground_state(&dirichlet_perturbation(g, b)?, opts)
}

/// `lambda_1` of the graph with coupling `gamma_b` at `b` and Dirichlet at `a`.
pub fn lambda_a(
    g: &CompactGraph,
    a: VertexId,
    b: VertexId,
    gamma_b: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    let gb = g.with_condition(b, VertexCondition::DeltaType { gamma: gamma_b })?;
    lambda1(&dirichlet_perturbation(&gb, a)?, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub lambda_b: f64,
    pub lambda_a: f64,
    /// `lambda_a - lambda_b`.
    pub edge_margin: f64,
    pub grid: [usize; 3],
    pub max_lambda1: f64,
    pub argmax_k: [f64; 3],
    pub min_lambda2: f64,
    pub argmin_k: [f64; 3],
    /// Observed gap `(max lambda_1, min lambda_2)`.
    pub gap: [f64; 2],
    pub gap_open: bool,
    pub config_hash: String,
}

/// Checks the gap chain on an existing band table of the same graph.
pub fn gap_from_table(
    g: &CompactGraph,
    a: VertexId,
    b: VertexId,
    gamma_b: f64,
    table: &BandTable,
    opts: &SolverOptions,
) -> Result<GapReport> {
    let lb = lambda_b(g, b, opts)?;
    let la = lambda_a(g, a, b, gamma_b, opts)?;
    if !(lb < la) {
        return Err(Error::GapChainViolated {
            k: [0.0; 3],
            detail: format!("lambda_1(B) = {lb} is not below lambda_1(A) = {la}"),
        });
    }
    let mut max1 = (f64::NEG_INFINITY, [0.0; 3]);
    let mut min2 = (f64::INFINITY, [0.0; 3]);
    for (k, v) in table.k.iter().zip(&table.values) {
        if v[0] > lb + CHAIN_TOL {
            return Err(Error::GapChainViolated {
                k: *k,
                detail: format!("lambda_1 = {} above lambda_1(B) = {lb}", v[0]),
            });
        }
        if v[1] < la - CHAIN_TOL {
            return Err(Error::GapChainViolated {
                k: *k,
                detail: format!("lambda_2 = {} below lambda_1(A) = {la}", v[1]),
            });
        }
        if v[0] > max1.0 {
            max1 = (v[0], *k);
        }
        if v[1] < min2.0 {
            min2 = (v[1], *k);
        }
    }
    Ok(GapReport {
        lambda_b: lb,
        lambda_a: la,
        edge_margin: la - lb,
        grid: table.grid,
        max_lambda1: max1.0,
        argmax_k: max1.1,
        min_lambda2: min2.0,
        argmin_k: min2.1,
        gap: [max1.0, min2.0],
        gap_open: max1.0 < min2.0,
        config_hash: table.config_hash.clone(),
    })
}

pub fn check_gap(
    g: &CompactGraph,
    a: VertexId,
    b: VertexId,
    gamma_b: f64,
    grid: [usize; 3],
    opts: &SolverOptions,
) -> Result<GapReport> {
    let table = band_sweep(g, b, gamma_b, grid, 2, opts)?;
    gap_from_table(g, a, b, gamma_b, &table, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveOptions {
    pub on_curve: usize,
    pub off_curve: usize,
    pub seed: u64,
    pub tol_curve: f64,
    /// Off-curve points keep at least this torus distance from the curve.
    pub min_distance: f64,
    /// Samples per arc of the quadrangle curve.
    pub polygon_samples: usize,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            on_curve: 100,
            off_curve: 100,
            seed: 0,
            tol_curve: 1e-8,
            min_distance: 0.3,
            polygon_samples: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub lambda_edge: f64,
    /// Inward derivatives of the ground state of `Gamma^B` at the copies of `B`.
    pub derivatives: [f64; 4],
    /// Quadrangle sides `|phi_j'(B)|`.
    pub sides: [f64; 4],
    /// Sign of `phi_j'(B) / phi_4'(B)`.
    pub signs: [i8; 4],
    pub classification: Classification,
    pub smooth: bool,
    pub topology: Topology,
    /// Sampled curve in quasimomentum coordinates.
    pub curve: Vec<Vec<[f64; 3]>>,
    pub on_curve_samples: usize,
    pub on_curve_max_deviation: f64,
    /// Largest `sigma_min(Gamma^k, lambda_edge)` over the on-curve samples.
    pub on_curve_max_sigma: f64,
    pub off_curve_samples: usize,
    /// Smallest `lambda_edge - lambda_1(Gamma^k)` off the curve; absent
    /// when no off-curve point could be drawn.
    pub off_curve_min_margin: Option<f64>,
    pub tol_curve: f64,
    pub verdict: bool,
}

impl DegeneracyReport {
    fn shifts(&self) -> [f64; 3] {
        [0, 1, 2].map(|j| if self.signs[j] < 0 { PI } else { 0.0 })
    }

    /// `|sum_j e^{ik_j} phi_j'(B) + phi_4'(B)|`.
    pub fn flux_residual(&self, k: [f64; 3]) -> f64 {
        let spec = PolygonSpec { a: self.sides };
        let s = self.shifts();
        spec.residual([k[0] + s[0], k[1] + s[1], k[2] + s[2]])
    }
}

/// Inward derivatives at the edge ends of `b`, from the ground state of the
/// graph with Dirichlet at `b`.
pub fn boundary_derivatives(
    g: &CompactGraph,
    b: VertexId,
    opts: &SolverOptions,
) -> Result<(f64, [f64; 4])> {
    if g.degree(b) != 4 {
        return Err(crate::error::GraphError::WrongDegree {
            vertex: g.vertex(b).id.clone(),
            expected: 4,
            found: g.degree(b),
        }
        .into());
    }
    let gb = dirichlet_perturbation(g, b)?;
    let lam = ground_state(&gb, opts)?;
    let phi = eigenfunction(&gb, lam, opts)?;
    let mut d = [0.0; 4];
    for (j, p) in g.incident(b).iter().enumerate() {
        d[j] = phi.at_end(&gb, *p).1.re;
    }
    Ok((lam, d))
}

pub fn degenerate_curve(
    g: &CompactGraph,
    b: VertexId,
    gamma_b: f64,
    curve_opts: &CurveOptions,
    opts: &SolverOptions,
) -> Result<DegeneracyReport> {
    let (lambda_edge, d) = boundary_derivatives(g, b, opts)?;
    let sides = d.map(f64::abs);
    let sum: f64 = sides.iter().sum();
    for (j, s) in sides.iter().enumerate() {
        if 2.0 * s >= sum {
            return Err(Error::NoCurve { index: j + 1, twice: 2.0 * s, sum });
        }
    }
    let signs = d.map(|x| if x * d[3] < 0.0 { -1 } else { 1 });
    let spec = PolygonSpec::new(sides)?;
    let classification = classify(&spec);
    let polygon: PolygonCurve = curve_samples(&spec, curve_opts.polygon_samples)?;
    let shift = [0, 1, 2].map(|j| if signs[j] < 0 { PI } else { 0.0 });
    let curve: Vec<Vec<[f64; 3]>> = polygon
        .branches
        .iter()
        .map(|br| br.iter().map(|p| [0, 1, 2].map(|j| wrap_angle(p[j] - shift[j]))).collect())
        .collect();

    let points: Vec<[f64; 3]> = curve.iter().flatten().copied().collect();
    let n_on = curve_opts.on_curve.min(points.len());
    let mut max_dev: f64 = 0.0;
    let mut max_sigma: f64 = 0.0;
    for i in 0..n_on {
        let k = points[i * points.len() / n_on];
        let gk = apply_floquet(g, b, k, gamma_b)?;
        max_dev = max_dev.max((lambda1(&gk, opts)? - lambda_edge).abs());
        max_sigma = max_sigma.max(sigma_min(&gk, lambda_edge)?);
    }

    let step = polygon
        .branches
        .iter()
        .flat_map(|br| br.windows(2).map(|w| torus_distance(&w[0], &w[1])))
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(curve_opts.seed);
    let mut min_margin = f64::INFINITY;
    let mut n_off = 0;
    let mut attempts = 0;
    while n_off < curve_opts.off_curve && attempts < 1000 * curve_opts.off_curve.max(1) {
        attempts += 1;
        let k: [f64; 3] = [0; 3].map(|_| rng.gen_range(-PI..PI));
        let dist = points.iter().map(|p| torus_distance(p, &k)).fold(f64::INFINITY, f64::min);
        if dist <= curve_opts.min_distance + step {
            continue;
        }
        let gk = apply_floquet(g, b, k, gamma_b)?;
        min_margin = min_margin.min(lambda_edge - lambda1(&gk, opts)?);
        n_off += 1;
    }
    let min_margin = (n_off > 0).then_some(min_margin);
    let verdict = classification == Classification::Curve
        && max_dev <= curve_opts.tol_curve
        && n_off == curve_opts.off_curve
        && min_margin.is_none_or(|m| m > 0.0);
    Ok(DegeneracyReport {
        lambda_edge,
        derivatives: d,
        sides,
        signs,
        classification,
        smooth: polygon.smooth,
        topology: polygon.topology,
        curve,
        on_curve_samples: n_on,
        on_curve_max_deviation: max_dev,
        on_curve_max_sigma: max_sigma,
        off_curve_samples: n_off,
        off_curve_min_margin: min_margin,
        tol_curve: curve_opts.tol_curve,
        verdict,
    })
}

/// `branch_id,k1,k2,k3,residual,lambda1_at_k` for the sampled curve.
pub fn curve_csv(
    g: &CompactGraph,
    b: VertexId,
    gamma_b: f64,
    report: &DegeneracyReport,
    opts: &SolverOptions,
) -> Result<String> {
    let mut out = String::from("branch_id,k1,k2,k3,residual,lambda1_at_k\n");
    for (id, branch) in report.curve.iter().enumerate() {
        for k in branch {
            let gk = apply_floquet(g, b, *k, gamma_b)?;
            let lam = lambda1(&gk, opts)?;
            let _ = writeln!(
                out,
                "{id},{},{},{},{},{}",
                sig12(k[0]),
                sig12(k[1]),
                sig12(k[2]),
                sig12(report.flux_residual(*k)),
                sig12(lam)
            );
        }
    }
    Ok(out)
}

/// Root of `rho^2 - rho^3 / 3 = pi^2 / 24` in `(2, 3)`.
pub fn rho0() -> f64 {
    let f = |r: f64| r * r - r * r * r / 3.0 - PI * PI / 24.0;
    let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantCheck {
    pub rho0: f64,
    /// `|rho0^2 - rho0^3 / 3 - pi^2 / 24|`.
    pub rho_residual: f64,
    /// `min(rho0 * min l_j, l_0) >= max l_j` over `j = 1..4`.
    pub hypothesis: bool,
    pub derivatives: [f64; 4],
    /// `sum_i |phi_i'(B)| - 2 |phi_j'(B)|`.
    pub margins: [f64; 4],
    pub quadrangle_holds: bool,
    /// Hypothesis holds but some margin is not positive.
    pub counterexample: bool,
}

/// Length condition guaranteeing the quadrangle inequalities for the graph
/// with a tail; `lengths = [l_0, l_1, ..., l_4]`.
pub fn quant_condition(lengths: [f64; 5], opts: &SolverOptions) -> Result<QuantCheck> {
    use crate::graph::{build_gamma2, Gamma2Params};
    let r = rho0();
    let rho_residual = (r * r - r * r * r / 3.0 - PI * PI / 24.0).abs();
    let inner = &lengths[1..];
    let min = inner.iter().copied().fold(f64::INFINITY, f64::min);
    let max = inner.iter().copied().fold(0.0, f64::max);
    let hypothesis = (r * min).min(lengths[0]) >= max;
    let g = build_gamma2(&Gamma2Params { lengths, potentials: Default::default() })?;
    let b = g.vertex_id("B")?;
    let (_, d) = boundary_derivatives(&g, b, opts)?;
    let sum: f64 = d.iter().map(|x| x.abs()).sum();
    let margins = d.map(|x| sum - 2.0 * x.abs());
    let quadrangle_holds = margins.iter().all(|&m| m > 0.0);
    Ok(QuantCheck {
        rho0: r,
        rho_residual,
        hypothesis,
        derivatives: d,
        margins,
        quadrangle_holds,
        counterexample: hypothesis && !quadrangle_holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbSpec {
    /// Relative length jitter, e.g. `0.02` for 2%.
    pub length_jitter: f64,
    /// Absolute jitter of every vertex coupling.
    pub gamma_jitter: f64,
    /// Bound on the two-piece potential added to each edge.
    pub potential_amplitude: f64,
}

impl Default for PerturbSpec {
    fn default() -> Self {
        PerturbSpec { length_jitter: 0.02, gamma_jitter: 0.1, potential_amplitude: 0.1 }
    }
}

impl PerturbSpec {
    pub fn zero() -> Self {
        PerturbSpec { length_jitter: 0.0, gamma_jitter: 0.0, potential_amplitude: 0.0 }
    }
}

/// Adds `q_left` before and `q_right` after `split` (a position along the edge).
fn add_step(edge: &Edge, split: f64, q_left: f64, q_right: f64, length: f64) -> Potential {
    let scale = length / edge.length;
    let mut out = Vec::new();
    let mut start = 0.0;
    for seg in edge.segments() {
        let end = start + seg.length;
        if split > start && split < end {
            out.push(Segment::new((split - start) * scale, seg.q + q_left));
            out.push(Segment::new((end - split) * scale, seg.q + q_right));
        } else {
            let q = if end <= split { q_left } else { q_right };
            out.push(Segment::new(seg.length * scale, seg.q + q));
        }
        start = end;
    }
    // Absorb rounding so the pieces sum to the new length.
    let sum: f64 = out.iter().map(|s| s.length).sum();
    if let Some(last) = out.last_mut() {
        last.length += length - sum;
    }
    Potential(out)
}

/// A random nearby graph: every length scaled by `1 + U(-p, p)`, every
/// non-Dirichlet coupling shifted by `U(-g, g)`, and a two-piece potential with
/// values in `[-amp, amp]` and a break in `(0.3, 0.7) l` added to each edge.
pub fn perturb_graph(g: &CompactGraph, spec: &PerturbSpec, seed: u64) -> Result<CompactGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |w: f64| if w > 0.0 { rng.gen_range(-w..w) } else { 0.0 };
    let mut edges = Vec::with_capacity(g.edges().len());
    for edge in g.edges() {
        let length = edge.length * (1.0 + uniform(spec.length_jitter));
        let potential = if spec.potential_amplitude > 0.0 {
            let frac = 0.5 + uniform(0.2);
            let (ql, qr) = (uniform(spec.potential_amplitude), uniform(spec.potential_amplitude));
            add_step(edge, frac * edge.length, ql, qr, length)
        } else {
            let scale = length / edge.length;
            Potential(edge.segments().iter().map(|s| Segment::new(s.length * scale, s.q)).collect())
        };
        edges.push(Edge::new(edge.id.clone(), edge.from, edge.to, length, potential)?);
    }
    let mut out = g.with_edges(edges)?;
    for v in 0..g.vertices().len() {
        let shift = uniform(spec.gamma_jitter);
        let condition = match &g.vertex(v).condition {
            VertexCondition::Dirichlet => continue,
            VertexCondition::DeltaType { gamma } => VertexCondition::DeltaType { gamma: gamma + shift },
            VertexCondition::QuasiNK { phases, gamma } => {
                VertexCondition::QuasiNK { phases: phases.clone(), gamma: gamma + shift }
            }
        };
        out = out.with_condition(v, condition)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub seed: u64,
    pub spec: PerturbSpec,
    pub config: GraphConfig,
    pub gap: GapReport,
    pub curve: Option<DegeneracyReport>,
    /// Why no curve was produced, when `curve` is absent.
    pub curve_failure: Option<String>,
    pub gap_open: bool,
    pub curve_exists: bool,
}

/// Perturbs `g`, then reruns the gap check and the curve verification.
/// The coupling at `b` of the perturbed graph is used for the Floquet vertex.
pub fn perturb_and_verify(
    g: &CompactGraph,
    a: VertexId,
    b: VertexId,
    spec: &PerturbSpec,
    seed: u64,
    grid: [usize; 3],
    curve_opts: &CurveOptions,
    opts: &SolverOptions,
) -> Result<RobustnessReport> {
    let p = perturb_graph(g, spec, seed)?;
    let gamma_b = coupling_at(&p, b);
    let gap = check_gap(&p, a, b, gamma_b, grid, opts)?;
    let (curve, curve_failure) = match degenerate_curve(&p, b, gamma_b, curve_opts, opts) {
        Ok(r) => (Some(r), None),
        Err(e @ Error::NoCurve { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let curve_exists = curve.as_ref().is_some_and(|c| c.verdict);
    Ok(RobustnessReport {
        seed,
        spec: *spec,
        config: GraphConfig::from_graph(&p),
        gap_open: gap.gap_open,
        gap,
        curve,
        curve_failure,
        curve_exists,
    })
}
