//! Finite-difference reference solver.
//!
//! The graph is discretized through its quadratic form
//!
//! ```text
//! h[u] = sum_e int |u'|^2 + q |u|^2  +  sum_v gamma_v |U_v|^2
//! ```
//!
//! with piecewise-linear elements and a lumped (diagonal) mass. Grid nodes sit
//! on every potential breakpoint, so each element sees a constant `q`. At a
//! vertex the edge values are `u_p = conj(z_p) U_v`, which is how quasi-NK
//! phases enter; Dirichlet ends are simply dropped. The stiffness and mass are
//! Hermitian by construction and the operator is `M^{-1/2} K M^{-1/2}`.
//! On a uniform interval this is the classical three-point scheme.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::OracleError;
use crate::graph::{CompactGraph, End, EdgeEnd};

/// Smallest accepted number of grid points per unit length.
pub const MIN_POINTS_PER_UNIT: usize = 16;

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    /// `M^{-1/2} K M^{-1/2}`.
    pub h: DMatrix<Complex64>,
    /// Lumped mass per row.
    pub mass: DVector<f64>,
    /// Row of each grid point along each edge, `None` at Dirichlet ends.
    pub index: Vec<Vec<Option<usize>>>,
    /// Grid spacing of each potential segment, per edge.
    pub spacing: Vec<Vec<f64>>,
}

#[derive(Clone, Copy)]
struct Node {
    row: Option<usize>,
    coef: Complex64,
}

fn add_element(k: &mut DMatrix<Complex64>, a: Node, b: Node, w: f64) {
    // w |ca x_a - cb x_b|^2
    match (a.row, b.row) {
        (Some(i), Some(j)) if i == j => {
            k[(i, i)] += w * (a.coef - b.coef).norm_sqr();
        }
        (ia, ib) => {
            if let Some(i) = ia {
                k[(i, i)] += w * a.coef.norm_sqr();
            }
            if let Some(j) = ib {
                k[(j, j)] += w * b.coef.norm_sqr();
            }
            if let (Some(i), Some(j)) = (ia, ib) {
                let off = -w * a.coef.conj() * b.coef;
                k[(i, j)] += off;
                k[(j, i)] += off.conj();
            }
        }
    }
}

pub fn discretize(g: &CompactGraph, n: usize) -> Result<DiscreteOperator, OracleError> {
    if n < MIN_POINTS_PER_UNIT {
        return Err(OracleError::GridTooCoarse(n));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut rows = 0;
    let mut vertex_row = vec![None; g.vertices().len()];
    for (v, vertex) in g.vertices().iter().enumerate() {
        if !vertex.condition.is_dirichlet() {
            vertex_row[v] = Some(rows);
            rows += 1;
        }
    }
    let end_node = |e: usize, end: End| {
        let p = EdgeEnd { edge: e, end };
        let v = g.edge(e).vertex_at(end);
        Node { row: vertex_row[v], coef: g.vertex(v).condition.phase(g.slot_of(p)).conj() }
    };

    // Layout: per edge, the list of nodes with element spacing and potential.
    let mut index = Vec::with_capacity(g.edges().len());
    let mut spacing = Vec::with_capacity(g.edges().len());
    let mut layouts = Vec::with_capacity(g.edges().len());
    for (e, edge) in g.edges().iter().enumerate() {
        let mut nodes = vec![end_node(e, End::Start)];
        let mut elements = Vec::new();
        let mut hs = Vec::new();
        let segs = edge.segments();
        for (s, seg) in segs.iter().enumerate() {
            let cells = ((n as f64 * seg.length).ceil() as usize).max(2);
            let h = seg.length / cells as f64;
            hs.push(h);
            for c in 0..cells {
                let last = s + 1 == segs.len() && c + 1 == cells;
                let node = if last {
                    end_node(e, End::End)
                } else {
                    let node = Node { row: Some(rows), coef: one };
                    rows += 1;
                    node
                };
                elements.push((nodes.len() - 1, nodes.len(), h, seg.q));
                nodes.push(node);
            }
        }
        index.push(nodes.iter().map(|nd| nd.row).collect());
        spacing.push(hs);
        layouts.push((nodes, elements));
    }

    let mut k = DMatrix::from_element(rows, rows, Complex64::new(0.0, 0.0));
    let mut mass = DVector::zeros(rows);
    for (nodes, elements) in &layouts {
        for &(a, b, h, q) in elements {
            add_element(&mut k, nodes[a], nodes[b], 1.0 / h);
            // Lumped mass and potential: half an element to each end node.
            for node in [nodes[a], nodes[b]] {
                if let Some(i) = node.row {
                    mass[i] += 0.5 * h;
                    k[(i, i)] += 0.5 * h * q;
                }
            }
        }
    }
    for (v, vertex) in g.vertices().iter().enumerate() {
        if let (Some(i), Some(gamma)) = (vertex_row[v], vertex.condition.coupling()) {
            k[(i, i)] += gamma;
        }
    }
    let scale = mass.map(|m: f64| 1.0 / m.sqrt());
    let mut h = k;
    for j in 0..rows {
        for i in 0..rows {
            h[(i, j)] *= scale[i] * scale[j];
        }
    }
    // Symmetrize away rounding so H = H^* holds bit for bit.
    for j in 0..rows {
        h[(j, j)].im = 0.0;
        for i in 0..j {
            h[(j, i)] = h[(i, j)].conj();
        }
    }
    Ok(DiscreteOperator { h, mass, index, spacing })
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn is_real(&self) -> bool {
        self.h.iter().all(|c| c.im == 0.0)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        self.h.clone()
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = if self.is_real() {
            self.h.map(|c| c.re).symmetric_eigenvalues().iter().copied().collect()
        } else {
            self.h.clone().symmetric_eigenvalues().iter().copied().collect()
        };
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// The lowest `count` eigenvalues of the discretization with `n` points per unit length.
pub fn oracle_eigenvalues(
    g: &CompactGraph,
    n: usize,
    count: usize,
) -> Result<Vec<f64>, OracleError> {
    let op = discretize(g, n)?;
    let mut ev = op.eigenvalues();
    ev.truncate(count);
    Ok(ev)
}
