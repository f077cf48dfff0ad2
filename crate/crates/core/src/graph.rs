//! Compact metric graphs with vertex conditions.
//!
//! A [`CompactGraph`] is the fundamental domain of a periodic quantum graph:
//! a finite set of edges `[0, l_e]`, each carrying a piecewise-constant
//! potential, joined at vertices that impose Dirichlet, delta-type or
//! quasi-Neumann-Kirchhoff (magnetic) conditions. Edge orientation fixes
//! the coordinate `x`; derivatives at a vertex are always taken into the edge.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::GraphError;

pub type VertexId = usize;

const PHASE_TOL: f64 = 1e-12;
const SEGMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum VertexCondition {
    Dirichlet,
    /// Continuity plus `sum_e u_e'(v) = gamma u(v)`; `gamma = 0` is Neumann-Kirchhoff.
    DeltaType { gamma: f64 },
    /// `z_1 u_1(v) = ... = z_d u_d(v)` and `sum_j z_j u_j'(v) = gamma z_d u_d(v)`,
    /// one unit phase per incident edge end in adjacency order.
    QuasiNK { phases: Vec<Complex64>, gamma: f64 },
}

impl VertexCondition {
    pub fn neumann() -> Self {
        VertexCondition::DeltaType { gamma: 0.0 }
    }

    pub fn coupling(&self) -> Option<f64> {
        match self {
            VertexCondition::Dirichlet => None,
            VertexCondition::DeltaType { gamma } | VertexCondition::QuasiNK { gamma, .. } => {
                Some(*gamma)
            }
        }
    }

    /// Phase attached to the `slot`-th incident edge end (1 unless quasi-NK).
    pub fn phase(&self, slot: usize) -> Complex64 {
        match self {
            VertexCondition::QuasiNK { phases, .. } => phases[slot],
            _ => Complex64::new(1.0, 0.0),
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, VertexCondition::Dirichlet)
    }
}

/// A piece of constant potential `q` on an interval of the given length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub length: f64,
    pub q: f64,
}

impl Segment {
    pub fn new(length: f64, q: f64) -> Self {
        Segment { length, q }
    }
}

/// Piecewise-constant potential, listed from `x = 0`. Empty means `q = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Potential(pub Vec<Segment>);

impl Potential {
    pub fn zero() -> Self {
        Potential(Vec::new())
    }

    /// Two constant pieces split at `fraction * length`.
    pub fn two_piece(length: f64, fraction: f64, q_left: f64, q_right: f64) -> Self {
        let left = fraction * length;
        Potential(vec![Segment::new(left, q_left), Segment::new(length - left, q_right)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum End {
    /// `x = 0`
    Start,
    /// `x = l`
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeEnd {
    pub edge: usize,
    pub end: End,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub from: VertexId,
    pub to: VertexId,
    pub length: f64,
    segments: Vec<Segment>,
}

impl Edge {
    pub fn new(
        id: impl Into<String>,
        from: VertexId,
        to: VertexId,
        length: f64,
        potential: Potential,
    ) -> Result<Self, GraphError> {
        let id = id.into();
        if !(length > 0.0 && length.is_finite()) {
            return Err(GraphError::NonPositiveLength { edge: id, length });
        }
        let segments = if potential.0.is_empty() {
            vec![Segment::new(length, 0.0)]
        } else {
            potential.0
        };
        let mut sum = 0.0;
        for s in &segments {
            if !(s.length > 0.0 && s.length.is_finite()) {
                return Err(GraphError::NonPositiveLength { edge: id, length: s.length });
            }
            sum += s.length;
        }
        if (sum - length).abs() > SEGMENT_TOL * length {
            return Err(GraphError::SegmentMismatch { edge: id, sum, length });
        }
        Ok(Edge { id, from, to, length, segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn max_abs_potential(&self) -> f64 {
        self.segments.iter().map(|s| s.q.abs()).fold(0.0, f64::max)
    }

    pub fn vertex_at(&self, end: End) -> VertexId {
        match end {
            End::Start => self.from,
            End::End => self.to,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: String,
    pub condition: VertexCondition,
}

/// Finite metric graph with vertex conditions. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<EdgeEnd>>,
}

impl CompactGraph {
    /// Assembles a graph. Adjacency lists follow edge order, with the start
    /// of a loop listed before its end.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].iter().any(|w| w.id == v.id) {
                return Err(GraphError::DuplicateVertex(v.id.clone()));
            }
        }
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (e, edge) in edges.iter().enumerate() {
            for (end, v) in [(End::Start, edge.from), (End::End, edge.to)] {
                let list = adjacency
                    .get_mut(v)
                    .ok_or_else(|| GraphError::UnknownVertex(format!("#{v}")))?;
                list.push(EdgeEnd { edge: e, end });
            }
        }
        for (v, vertex) in vertices.iter().enumerate() {
            match &vertex.condition {
                VertexCondition::Dirichlet => {}
                VertexCondition::DeltaType { gamma } => check_gamma(&vertex.id, *gamma)?,
                VertexCondition::QuasiNK { phases, gamma } => {
                    check_gamma(&vertex.id, *gamma)?;
                    if phases.len() != adjacency[v].len() {
                        return Err(GraphError::PhaseCount {
                            vertex: vertex.id.clone(),
                            found: phases.len(),
                            degree: adjacency[v].len(),
                        });
                    }
                    for (index, z) in phases.iter().enumerate() {
                        let modulus = z.norm();
                        if !((modulus - 1.0).abs() <= PHASE_TOL) {
                            return Err(GraphError::PhaseNotUnit {
                                vertex: vertex.id.clone(),
                                index,
                                modulus,
                            });
                        }
                    }
                }
            }
        }
        Ok(CompactGraph { vertices, edges, adjacency })
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: VertexId) -> &Vertex {
        &self.vertices[v]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Incident edge ends of `v`, in the order used by quasi-NK phases.
    pub fn incident(&self, v: VertexId) -> &[EdgeEnd] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    pub fn vertex_id(&self, name: &str) -> Result<VertexId, GraphError> {
        self.vertices
            .iter()
            .position(|v| v.id == name)
            .ok_or_else(|| GraphError::UnknownVertex(name.to_string()))
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == name)
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn min_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    /// Slot of an edge end in its vertex's adjacency list.
    pub fn slot_of(&self, end: EdgeEnd) -> usize {
        let v = self.edges[end.edge].vertex_at(end.end);
        self.adjacency[v]
            .iter()
            .position(|&x| x == end)
            .expect("edge end is registered at its vertex")
    }

    /// True if any vertex carries a quasi-NK condition with a non-real phase.
    pub fn is_complex(&self) -> bool {
        self.vertices.iter().any(|v| match &v.condition {
            VertexCondition::QuasiNK { phases, .. } => phases.iter().any(|z| z.im != 0.0),
            _ => false,
        })
    }

    /// Conservative guess for a level below the whole spectrum.
    pub fn spectral_floor_guess(&self) -> f64 {
        let max_gamma = self
            .vertices
            .iter()
            .filter_map(|v| v.condition.coupling())
            .map(f64::abs)
            .fold(0.0, f64::max);
        let max_q = self.edges.iter().map(Edge::max_abs_potential).fold(0.0, f64::max);
        let t = max_gamma / self.min_length().min(1.0) + max_q;
        -(t * t) - 1.0
    }

    /// Same graph with the condition at `v` replaced.
    pub fn with_condition(
        &self,
        v: VertexId,
        condition: VertexCondition,
    ) -> Result<Self, GraphError> {
        let mut vertices = self.vertices.clone();
        vertices
            .get_mut(v)
            .ok_or_else(|| GraphError::UnknownVertex(format!("#{v}")))?
            .condition = condition;
        CompactGraph::new(vertices, self.edges.clone())
    }

    pub fn with_edges(&self, edges: Vec<Edge>) -> Result<Self, GraphError> {
        CompactGraph::new(self.vertices.clone(), edges)
    }
}

fn check_gamma(vertex: &str, gamma: f64) -> Result<(), GraphError> {
    if gamma.is_finite() {
        Ok(())
    } else {
        Err(GraphError::NonFiniteCoupling { vertex: vertex.to_string(), gamma })
    }
}

/// Parameters of the two-vertex graph with four parallel edges A -> B.
#[derive(Debug, Clone, PartialEq)]
pub struct Gamma1Params {
    pub lengths: [f64; 4],
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub potentials: [Potential; 4],
}

impl Gamma1Params {
    pub fn equilateral(gamma_a: f64, gamma_b: f64) -> Self {
        Gamma1Params {
            lengths: [1.0; 4],
            gamma_a,
            gamma_b,
            potentials: Default::default(),
        }
    }
}

/// Parameters of the graph with four parallel edges A -> B and a tail C -> A.
#[derive(Debug, Clone, PartialEq)]
pub struct Gamma2Params {
    /// `[l_0, l_1, l_2, l_3, l_4]`, `l_0` being the tail.
    pub lengths: [f64; 5],
    pub potentials: [Potential; 5],
}

impl Gamma2Params {
    pub fn equilateral() -> Self {
        Gamma2Params { lengths: [1.0; 5], potentials: Default::default() }
    }
}

/// Vertices `A`, `B` with delta couplings `gamma_a < gamma_b`; edges `e1..e4`
/// oriented from A (`x = 0`) to B (`x = l`).
pub fn build_gamma1(p: &Gamma1Params) -> Result<CompactGraph, GraphError> {
    if !(p.gamma_a < p.gamma_b) {
        return Err(GraphError::CouplingOrderViolated { gamma_a: p.gamma_a, gamma_b: p.gamma_b });
    }
    let vertices = vec![
        Vertex { id: "A".into(), condition: VertexCondition::DeltaType { gamma: p.gamma_a } },
        Vertex { id: "B".into(), condition: VertexCondition::DeltaType { gamma: p.gamma_b } },
    ];
    let edges = (0..4)
        .map(|j| Edge::new(format!("e{}", j + 1), 0, 1, p.lengths[j], p.potentials[j].clone()))
        .collect::<Result<Vec<_>, _>>()?;
    CompactGraph::new(vertices, edges)
}

/// Neumann-Kirchhoff vertices `A`, `B`, `C`; edges `e1..e4` from A to B, then
/// the tail `e0` from C to A.
pub fn build_gamma2(p: &Gamma2Params) -> Result<CompactGraph, GraphError> {
    let vertices = ["A", "B", "C"]
        .iter()
        .map(|id| Vertex { id: id.to_string(), condition: VertexCondition::neumann() })
        .collect();
    let mut edges = (1..5)
        .map(|j| Edge::new(format!("e{j}"), 0, 1, p.lengths[j], p.potentials[j].clone()))
        .collect::<Result<Vec<_>, _>>()?;
    edges.push(Edge::new("e0", 2, 0, p.lengths[0], p.potentials[0].clone())?);
    CompactGraph::new(vertices, edges)
}

/// Imposes Dirichlet at `v`, splitting it into one degree-1 Dirichlet vertex
/// per incident edge end. The first copy keeps the index `v`.
pub fn dirichlet_perturbation(g: &CompactGraph, v: VertexId) -> Result<CompactGraph, GraphError> {
    if v >= g.vertices.len() {
        return Err(GraphError::UnknownVertex(format!("#{v}")));
    }
    let mut vertices = g.vertices.clone();
    let mut edges = g.edges.clone();
    let base = g.vertices[v].id.clone();
    let ends = g.incident(v);
    let name = |j: usize| {
        if ends.len() == 1 {
            base.clone()
        } else {
            format!("{base}:{}", j + 1)
        }
    };
    vertices[v] = Vertex { id: name(0), condition: VertexCondition::Dirichlet };
    for (j, end) in ends.iter().enumerate() {
        let target = if j == 0 {
            v
        } else {
            vertices.push(Vertex { id: name(j), condition: VertexCondition::Dirichlet });
            vertices.len() - 1
        };
        let edge = &mut edges[end.edge];
        match end.end {
            End::Start => edge.from = target,
            End::End => edge.to = target,
        }
    }
    CompactGraph::new(vertices, edges)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(t: f64) -> f64 {
    let mut r = t.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Replaces the condition at the degree-4 vertex `b` by quasi-NK conditions
/// with phases `(e^{ik_1}, e^{ik_2}, e^{ik_3}, 1)` and coupling `gamma_b`.
/// Quasimomenta are taken modulo `2 pi`.
pub fn apply_floquet(
    g: &CompactGraph,
    b: VertexId,
    k: [f64; 3],
    gamma_b: f64,
) -> Result<CompactGraph, GraphError> {
    if b >= g.vertices.len() {
        return Err(GraphError::UnknownVertex(format!("#{b}")));
    }
    let degree = g.degree(b);
    if degree != 4 {
        return Err(GraphError::WrongDegree {
            vertex: g.vertices[b].id.clone(),
            expected: 4,
            found: degree,
        });
    }
    for (index, &value) in k.iter().enumerate() {
        if !value.is_finite() {
            return Err(GraphError::QuasimomentumRange { index, value });
        }
    }
    let mut phases: Vec<Complex64> =
        k.iter().map(|&kj| Complex64::from_polar(1.0, wrap_angle(kj))).collect();
    phases.push(Complex64::new(1.0, 0.0));
    g.with_condition(b, VertexCondition::QuasiNK { phases, gamma: gamma_b })
}

/// Version tag of the JSON graph schema.
pub const CONFIG_SCHEMA: &str = "qgband-config-1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub schema: String,
    pub vertices: Vec<VertexConfig>,
    pub edges: Vec<EdgeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexConfig {
    pub id: String,
    pub condition: ConditionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    pub kind: ConditionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// `[re, im]` per incident edge end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionKind {
    Dirichlet,
    DeltaType,
    QuasiNK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
    /// `[segment length, q]` pairs; empty means `q = 0`.
    #[serde(default)]
    pub potential: Vec<[f64; 2]>,
}

impl GraphConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let cfg: GraphConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if cfg.schema != CONFIG_SCHEMA {
            return Err(format!(
                "field `schema`: expected \"{CONFIG_SCHEMA}\", found \"{}\"",
                cfg.schema
            ));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn build(&self) -> Result<CompactGraph, String> {
        let mut vertices = Vec::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            let gamma = v.condition.gamma.unwrap_or(0.0);
            let condition = match v.condition.kind {
                ConditionKind::Dirichlet => {
                    if v.condition.gamma.is_some() || v.condition.phases.is_some() {
                        return Err(format!(
                            "vertices[{i}].condition: Dirichlet takes no gamma or phases"
                        ));
                    }
                    VertexCondition::Dirichlet
                }
                ConditionKind::DeltaType => {
                    if v.condition.phases.is_some() {
                        return Err(format!("vertices[{i}].condition: DeltaType takes no phases"));
                    }
                    VertexCondition::DeltaType { gamma }
                }
                ConditionKind::QuasiNK => {
                    let phases = v
                        .condition
                        .phases
                        .as_ref()
                        .ok_or_else(|| format!("vertices[{i}].condition.phases: required for QuasiNK"))?
                        .iter()
                        .map(|&[re, im]| Complex64::new(re, im))
                        .collect();
                    VertexCondition::QuasiNK { phases, gamma }
                }
            };
            vertices.push(Vertex { id: v.id.clone(), condition });
        }
        let lookup = |name: &str, field: String| {
            vertices
                .iter()
                .position(|v: &Vertex| v.id == name)
                .ok_or_else(|| format!("{field}: unknown vertex `{name}`"))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let from = lookup(&e.from, format!("edges[{i}].from"))?;
            let to = lookup(&e.to, format!("edges[{i}].to"))?;
            let potential =
                Potential(e.potential.iter().map(|&[len, q]| Segment::new(len, q)).collect());
            let edge = Edge::new(e.id.clone(), from, to, e.length, potential)
                .map_err(|err| format!("edges[{i}]: {err}"))?;
            edges.push(edge);
        }
        CompactGraph::new(vertices, edges).map_err(|e| e.to_string())
    }

    pub fn from_graph(g: &CompactGraph) -> Self {
        let vertices = g
            .vertices()
            .iter()
            .map(|v| {
                let condition = match &v.condition {
                    VertexCondition::Dirichlet => ConditionConfig {
                        kind: ConditionKind::Dirichlet,
                        gamma: None,
                        phases: None,
                    },
                    VertexCondition::DeltaType { gamma } => ConditionConfig {
                        kind: ConditionKind::DeltaType,
                        gamma: Some(*gamma),
                        phases: None,
                    },
                    VertexCondition::QuasiNK { phases, gamma } => ConditionConfig {
                        kind: ConditionKind::QuasiNK,
                        gamma: Some(*gamma),
                        phases: Some(phases.iter().map(|z| [z.re, z.im]).collect()),
                    },
                };
                VertexConfig { id: v.id.clone(), condition }
            })
            .collect();
        let edges = g
            .edges()
            .iter()
            .map(|e| EdgeConfig {
                id: e.id.clone(),
                from: g.vertex(e.from).id.clone(),
                to: g.vertex(e.to).id.clone(),
                length: e.length,
                potential: e.segments().iter().map(|s| [s.length, s.q]).collect(),
            })
            .collect();
        GraphConfig { schema: CONFIG_SCHEMA.to_string(), vertices, edges }
    }

    /// SHA-256 of the compact JSON serialization.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma1_structure() {
        let g = build_gamma1(&Gamma1Params::equilateral(0.0, 1.0)).unwrap();
        assert_eq!(g.vertices().len(), 2);
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.degree(0), 4);
        assert_eq!(g.degree(1), 4);
        assert!(g
            .incident(1)
            .iter()
            .enumerate()
            .all(|(j, end)| end.edge == j && end.end == End::End));
    }

    #[test]
    fn gamma1_rejects_coupling_order() {
        let err = build_gamma1(&Gamma1Params::equilateral(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, GraphError::CouplingOrderViolated { .. }));
        let err = build_gamma1(&Gamma1Params::equilateral(1.0, 1.0)).unwrap_err();
        assert!(matches!(err, GraphError::CouplingOrderViolated { .. }));
    }

    #[test]
    fn gamma1_rejects_bad_length() {
        let mut p = Gamma1Params::equilateral(0.0, 1.0);
        p.lengths[2] = 0.0;
        assert!(matches!(build_gamma1(&p), Err(GraphError::NonPositiveLength { .. })));
    }

    #[test]
    fn gamma1_perturbed_lengths_valid() {
        let mut p = Gamma1Params::equilateral(0.0, 1.0);
        p.lengths = [1.02, 0.98, 1.01, 0.99];
        let g = build_gamma1(&p).unwrap();
        assert!((g.total_length() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gamma2_structure() {
        let g = build_gamma2(&Gamma2Params::equilateral()).unwrap();
        assert_eq!(g.vertices().len(), 3);
        assert_eq!(g.edges().len(), 5);
        let c = g.vertex_id("C").unwrap();
        assert_eq!(g.degree(c), 1);
        assert_eq!(g.degree(g.vertex_id("A").unwrap()), 5);
        assert_eq!(g.degree(g.vertex_id("B").unwrap()), 4);
        assert!(g.vertices().iter().all(|v| v.condition == VertexCondition::neumann()));
        let tail = g.edge(g.edge_index("e0").unwrap());
        assert_eq!((tail.from, tail.to), (c, 0));
    }

    #[test]
    fn segments_must_sum_to_length() {
        let bad = Potential(vec![Segment::new(0.5, 0.0), Segment::new(0.4, 1.0)]);
        assert!(matches!(
            Edge::new("e", 0, 1, 1.0, bad),
            Err(GraphError::SegmentMismatch { .. })
        ));
        let good = Potential::two_piece(1.0, 0.5, 0.0, 2.0);
        assert_eq!(Edge::new("e", 0, 1, 1.0, good).unwrap().segments().len(), 2);
    }

    #[test]
    fn dirichlet_at_b_gives_star() {
        let g = build_gamma1(&Gamma1Params::equilateral(0.0, 1.0)).unwrap();
        let gb = dirichlet_perturbation(&g, 1).unwrap();
        assert_eq!(gb.vertices().len(), 5);
        assert_eq!(gb.degree(0), 4);
        for v in 1..5 {
            assert_eq!(gb.degree(v), 1);
            assert!(gb.vertex(v).condition.is_dirichlet());
        }
        assert_eq!(gb.vertex(0).condition, VertexCondition::DeltaType { gamma: 0.0 });
    }

    #[test]
    fn dirichlet_at_a_splits_gamma2() {
        let g = build_gamma2(&Gamma2Params::equilateral()).unwrap();
        let ga = dirichlet_perturbation(&g, 0).unwrap();
        // A had degree 5: four ends toward B plus the tail end.
        assert_eq!(ga.vertices().len(), 3 + 4);
        let b = ga.vertex_id("B").unwrap();
        assert_eq!(ga.degree(b), 4);
        let tail = ga.edge(ga.edge_index("e0").unwrap());
        assert!(ga.vertex(tail.to).condition.is_dirichlet());
        assert_eq!(ga.degree(tail.to), 1);
    }

    #[test]
    fn dirichlet_unknown_vertex() {
        let g = build_gamma1(&Gamma1Params::equilateral(0.0, 1.0)).unwrap();
        assert!(matches!(dirichlet_perturbation(&g, 7), Err(GraphError::UnknownVertex(_))));
    }

    #[test]
    fn floquet_phases() {
        let g = build_gamma1(&Gamma1Params::equilateral(0.0, 1.0)).unwrap();
        let expect = |k: [f64; 3], z: [Complex64; 4]| {
            let gk = apply_floquet(&g, 1, k, 1.0).unwrap();
            match &gk.vertex(1).condition {
                VertexCondition::QuasiNK { phases, gamma } => {
                    assert_eq!(*gamma, 1.0);
                    for (a, b) in phases.iter().zip(z.iter()) {
                        assert!((a - b).norm() < 1e-15, "{a} vs {b}");
                    }
                }
                other => panic!("unexpected {other:?}"),
            }
        };
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        expect([0.0; 3], [one; 4]);
        expect([PI; 3], [-one, -one, -one, one]);
        expect([PI / 2.0, 0.0, -PI / 2.0], [i, one, -i, one]);
    }

    #[test]
    fn floquet_requires_degree_four() {
        let g = build_gamma2(&Gamma2Params::equilateral()).unwrap();
        let err = apply_floquet(&g, 0, [0.0; 3], 0.0).unwrap_err();
        assert!(matches!(err, GraphError::WrongDegree { found: 5, .. }));
    }

    #[test]
    fn phases_must_be_unit() {
        let g = build_gamma1(&Gamma1Params::equilateral(0.0, 1.0)).unwrap();
        let mut phases = vec![Complex64::new(1.0, 0.0); 4];
        phases[2] = Complex64::new(1.0, 1e-5);
        let err = g.with_condition(1, VertexCondition::QuasiNK { phases, gamma: 0.0 }).unwrap_err();
        assert!(matches!(err, GraphError::PhaseNotUnit { index: 2, .. }));
        let err = g
            .with_condition(1, VertexCondition::QuasiNK { phases: vec![], gamma: 0.0 })
            .unwrap_err();
        assert!(matches!(err, GraphError::PhaseCount { found: 0, degree: 4, .. }));
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn config_round_trip() {
        let mut p = Gamma1Params::equilateral(0.0, 1.0);
        p.potentials[0] = Potential::two_piece(1.0, 0.5, 0.0, 2.0);
        let g = build_gamma1(&p).unwrap();
        let gk = apply_floquet(&g, 1, [0.3, -1.2, 2.0], 1.0).unwrap();
        let cfg = GraphConfig::from_graph(&gk);
        let parsed = GraphConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(parsed.build().unwrap(), gk);
        assert_eq!(parsed.content_hash(), cfg.content_hash());
    }

    #[test]
    fn config_diagnostics() {
        let err = GraphConfig::from_json("{\"schema\": \"qgband-config-1\", \"vertices\": [}")
            .unwrap_err();
        assert!(err.contains("line 1"), "{err}");
        let text = r#"{"schema":"qgband-config-1",
            "vertices":[{"id":"A","condition":{"kind":"DeltaType"}}],
            "edges":[{"id":"e","from":"A","to":"Z","length":1.0}]}"#;
        let err = GraphConfig::from_json(text).unwrap().build().unwrap_err();
        assert!(err.contains("edges[0].to"), "{err}");
        let text = r#"{"schema":"other","vertices":[],"edges":[]}"#;
        assert!(GraphConfig::from_json(text).unwrap_err().contains("schema"));
    }
}
