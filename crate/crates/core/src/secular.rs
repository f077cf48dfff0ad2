//! Eigenvalues and eigenfunctions of a compact quantum graph.
//!
//! On edge `e` a solution is `u_e = A_e c_e + B_e s_e`, so `(A_e, B_e)` are
//! the value and slope at `x = 0`. Each vertex contributes one linear equation
//! per incident edge end, giving a square `2E x 2E` secular matrix that is
//! singular exactly at eigenvalues; its right null vectors are eigenfunctions.
//!
//! Eigenvalues are isolated by bisection on the counting function
//!
//! ```text
//! N(lambda) = #{eigenvalues < lambda} = N_D(lambda) + n_+(L(lambda))
//! ```
//!
//! where `N_D` counts eigenvalues of the edges decoupled with Dirichlet ends
//! (Sturm oscillation on each edge) and `L(lambda)` is the Hermitian
//! vertex-level Dirichlet-to-Neumann matrix (inward derivatives, phases and
//! couplings folded in). The count is exact away from the edge Dirichlet
//! spectrum, so close or degenerate eigenvalues are never skipped.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SolverError;
use crate::graph::{CompactGraph, End, EdgeEnd, VertexCondition};
use crate::transfer::{basis_eval, dirichlet_count_below, transfer_matrix, TransferMatrix};

/// Largest spectral parameter the solver accepts.
pub const LAMBDA_MAX: f64 = 1e6;

/// Edges with `|m01 m10|` below this are near a Dirichlet pole and get the
/// augmented treatment; then `m00 m11 = 1 + m01 m10` keeps one of `m00`, `m11`
/// at least `1/sqrt(2)` in size. Otherwise `1/|m01| <= 2 |m10|`.
const POLE_SPLIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Acceptance threshold on the scaled smallest singular value.
    pub tol_eig: f64,
    /// Relative width at which bisection stops.
    pub rel_width: f64,
    /// Check `sigma_min <= tol_eig` at every located eigenvalue.
    pub verify: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol_eig: 1e-8, rel_width: 1e-13, verify: true }
    }
}

impl SolverOptions {
    pub fn fast() -> Self {
        SolverOptions { verify: false, ..Self::default() }
    }

    /// Singular values at or below this count toward the null space.
    pub fn nullity_tol(&self) -> f64 {
        10.0 * self.tol_eig
    }
}

/// Boundary-condition matrix with each row scaled by the norm of its terms.
/// The slope unknowns are stored as `B_e / column_scale` so both column blocks are `O(1)`.
#[derive(Debug, Clone)]
pub struct SecularMatrix {
    pub matrix: DMatrix<Complex64>,
    pub column_scale: f64,
}

/// A located eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub value: f64,
    /// Jump of the counting function.
    pub multiplicity: usize,
    /// Scaled smallest singular value of the secular matrix at `value`.
    pub residual: f64,
    /// Number of singular values within the nullity tolerance.
    pub nullity: usize,
}

/// Linear forms for the value and inward derivative at an edge end, as
/// coefficients of `(A_e, B_e / scale)`.
struct EndForms {
    value: [f64; 2],
    deriv: [f64; 2],
}

fn end_forms(m: &TransferMatrix, end: End, scale: f64) -> EndForms {
    match end {
        End::Start => EndForms { value: [1.0, 0.0], deriv: [0.0, scale] },
        End::End => {
            let t = &m.0;
            EndForms {
                value: [t[0][0], scale * t[0][1]],
                deriv: [-t[1][0], -scale * t[1][1]],
            }
        }
    }
}

fn check_lambda(lambda: f64) -> Result<(), SolverError> {
    if lambda.is_finite() && lambda <= LAMBDA_MAX {
        Ok(())
    } else {
        Err(SolverError::LambdaOutOfRange(lambda))
    }
}

pub fn secular_matrix(g: &CompactGraph, lambda: f64) -> Result<SecularMatrix, SolverError> {
    check_lambda(lambda)?;
    let n = 2 * g.edges().len();
    let scale = lambda.abs().max(1.0).sqrt();
    let transfers: Vec<TransferMatrix> =
        g.edges().iter().map(|e| transfer_matrix(lambda, e)).collect();
    let forms = |p: EdgeEnd| end_forms(&transfers[p.edge], p.end, scale);
    // Each row keeps, next to its entries, the magnitudes of the terms that
    // were summed into them, so cancellation is not undone by row scaling.
    let zero_row = || (vec![Complex64::new(0.0, 0.0); n], vec![0.0_f64; n]);
    let mut rows: Vec<(Vec<Complex64>, Vec<f64>)> = Vec::with_capacity(n);
    let put = |row: &mut (Vec<Complex64>, Vec<f64>), p: EdgeEnd, coef: [f64; 2], w: Complex64| {
        for (j, c) in coef.iter().enumerate() {
            row.0[2 * p.edge + j] += w * c;
            row.1[2 * p.edge + j] += w.norm() * c.abs();
        }
    };
    for (v, vertex) in g.vertices().iter().enumerate() {
        let ends = g.incident(v);
        match &vertex.condition {
            VertexCondition::Dirichlet => {
                for &p in ends {
                    let mut row = zero_row();
                    put(&mut row, p, forms(p).value, Complex64::new(1.0, 0.0));
                    rows.push(row);
                }
            }
            cond => {
                let gamma = cond.coupling().unwrap_or(0.0);
                let z = |slot: usize| cond.phase(slot);
                for i in 0..ends.len().saturating_sub(1) {
                    let mut row = zero_row();
                    put(&mut row, ends[i], forms(ends[i]).value, z(i));
                    put(&mut row, ends[i + 1], forms(ends[i + 1]).value, -z(i + 1));
                    rows.push(row);
                }
                if !ends.is_empty() {
                    let mut row = zero_row();
                    for (slot, &p) in ends.iter().enumerate() {
                        put(&mut row, p, forms(p).deriv, z(slot));
                    }
                    let last = ends.len() - 1;
                    put(&mut row, ends[last], forms(ends[last]).value, -gamma * z(last));
                    rows.push(row);
                }
            }
        }
    }
    debug_assert_eq!(rows.len(), n);
    let mut matrix = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (i, (row, mag)) in rows.iter().enumerate() {
        let norm = mag.iter().map(|m| m * m).sum::<f64>().sqrt();
        let inv = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        for (j, c) in row.iter().enumerate() {
            matrix[(i, j)] = c * inv;
        }
    }
    Ok(SecularMatrix { matrix, column_scale: scale })
}

/// Singular values of the scaled secular matrix, ascending.
pub fn singular_values(g: &CompactGraph, lambda: f64) -> Result<Vec<f64>, SolverError> {
    let sm = secular_matrix(g, lambda)?;
    if sm.matrix.is_empty() {
        return Ok(Vec::new());
    }
    let mut sv: Vec<f64> = sm.matrix.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    Ok(sv)
}

/// Smallest singular value of the scaled secular matrix.
pub fn sigma_min(g: &CompactGraph, lambda: f64) -> Result<f64, SolverError> {
    Ok(singular_values(g, lambda)?.first().copied().unwrap_or(f64::INFINITY))
}

/// Number of eigenvalues strictly below `lambda`, counted with multiplicity.
pub fn count_below(g: &CompactGraph, lambda: f64) -> Result<usize, SolverError> {
    check_lambda(lambda)?;
    let mut lam = lambda;
    for _ in 0..8 {
        if let Some(n) = try_count(g, lam) {
            return Ok(n);
        }
        // Exactly on an edge Dirichlet eigenvalue; the count is locally constant
        // on either side, so step off by a few ulps.
        lam += lam.abs().max(1.0) * 4.0 * f64::EPSILON;
    }
    Err(SolverError::IsolationFailed { lambda })
}

fn try_count(g: &CompactGraph, lambda: f64) -> Option<usize> {
    let mut index = vec![usize::MAX; g.vertices().len()];
    let mut nv = 0;
    for (v, vertex) in g.vertices().iter().enumerate() {
        if !vertex.condition.is_dirichlet() {
            index[v] = nv;
            nv += 1;
        }
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut dirichlet = 0;
    let mut regular = DMatrix::from_element(nv, nv, zero);
    // Rank-one pole parts of the edge maps: (vertex vector w, d) contributes
    // -w w^* / d to L.
    let mut poles: Vec<(Vec<Complex64>, f64)> = Vec::new();
    for (e, edge) in g.edges().iter().enumerate() {
        dirichlet += dirichlet_count_below(lambda, edge);
        let ends = [EdgeEnd { edge: e, end: End::Start }, EdgeEnd { edge: e, end: End::End }];
        let free: Vec<(usize, usize, Complex64)> = ends
            .iter()
            .enumerate()
            .filter_map(|(a, &p)| {
                let v = edge.vertex_at(p.end);
                (index[v] != usize::MAX)
                    .then(|| (a, index[v], g.vertex(v).condition.phase(g.slot_of(p))))
            })
            .collect();
        if free.is_empty() {
            continue;
        }
        let t = transfer_matrix(lambda, edge).0;
        let (m00, m01, m10, m11) = (t[0][0], t[0][1], t[1][0], t[1][1]);
        if (m01 * m10).abs() < POLE_SPLIT {
            // Inward-derivative map (1/m01)[[-m00, 1], [1, -m11]] written as
            // -w w^T / (p m01) plus a bounded diagonal, p the larger of m00, m11.
            let (w, diag, d) = if m00.abs() >= m11.abs() {
                ([m00, -1.0], [0.0, -m10 / m00], m00 * m01)
            } else {
                ([-1.0, m11], [-m10 / m11, 0.0], m11 * m01)
            };
            if d == 0.0 {
                return None;
            }
            let mut col = vec![zero; nv];
            for &(a, i, z) in &free {
                regular[(i, i)] += diag[a];
                col[i] += z * w[a];
            }
            poles.push((col, d));
        } else {
            if m01 == 0.0 {
                return None;
            }
            let inv = 1.0 / m01;
            let dtn = [[-m00 * inv, inv], [inv, -m11 * inv]];
            for &(a, i, za) in &free {
                for &(b, j, zb) in &free {
                    regular[(i, j)] += za * zb.conj() * dtn[a][b];
                }
            }
        }
    }
    for (v, vertex) in g.vertices().iter().enumerate() {
        if let Some(gamma) = vertex.condition.coupling() {
            regular[(index[v], index[v])] -= gamma;
        }
    }
    // Haynsworth: inertia([[R, W], [W^*, D]]) = inertia(D) + inertia(R - W D^-1 W^*),
    // and the Schur complement is exactly L.
    let size = nv + poles.len();
    if size == 0 {
        return Some(dirichlet);
    }
    let mut aug = DMatrix::from_element(size, size, zero);
    aug.view_mut((0, 0), (nv, nv)).copy_from(&regular);
    let mut positive_d = 0;
    for (j, (col, d)) in poles.iter().enumerate() {
        let c = nv + j;
        aug[(c, c)] = Complex64::new(*d, 0.0);
        if *d > 0.0 {
            positive_d += 1;
        }
        for (i, w) in col.iter().enumerate() {
            aug[(i, c)] = *w;
            aug[(c, i)] = w.conj();
        }
    }
    if !aug.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        return None;
    }
    let positive = aug.symmetric_eigenvalues().iter().filter(|&&x| x > 0.0).count();
    (dirichlet + positive).checked_sub(positive_d)
}

/// Bisection on the counting function. Collects `(lambda, multiplicity)` for
/// eigenvalues in `[lo, hi)` whose index (0-based) is below `max_index`.
fn isolate(
    g: &CompactGraph,
    (lo, n_lo): (f64, usize),
    (hi, n_hi): (f64, usize),
    max_index: usize,
    opts: &SolverOptions,
    out: &mut Vec<(f64, usize)>,
) -> Result<(), SolverError> {
    if n_hi <= n_lo || n_lo >= max_index {
        return Ok(());
    }
    let mid = 0.5 * (lo + hi);
    if hi - lo <= opts.rel_width * mid.abs().max(1.0) || mid <= lo || mid >= hi {
        out.push((mid, n_hi - n_lo));
        return Ok(());
    }
    let n_mid = count_below(g, mid)?;
    if n_mid < n_lo || n_mid > n_hi {
        return Err(SolverError::IsolationFailed { lambda: mid });
    }
    isolate(g, (lo, n_lo), (mid, n_mid), max_index, opts, out)?;
    isolate(g, (mid, n_mid), (hi, n_hi), max_index, opts, out)
}

fn finish(
    g: &CompactGraph,
    found: Vec<(f64, usize)>,
    opts: &SolverOptions,
) -> Result<Vec<Eigenvalue>, SolverError> {
    found
        .into_iter()
        .map(|(value, multiplicity)| {
            let (residual, nullity) = if opts.verify {
                let sv = singular_values(g, value)?;
                let residual = sv.first().copied().unwrap_or(0.0);
                if residual > opts.tol_eig {
                    return Err(SolverError::ResidualTooLarge {
                        lambda: value,
                        sigma_min: residual,
                        tol: opts.tol_eig,
                    });
                }
                (residual, sv.iter().filter(|&&s| s <= opts.nullity_tol()).count())
            } else {
                (f64::NAN, 0)
            };
            Ok(Eigenvalue { value, multiplicity, residual, nullity })
        })
        .collect()
}

/// All eigenvalues in the half-open interval `[lo, hi)`.
pub fn eigenvalues_in(
    g: &CompactGraph,
    lo: f64,
    hi: f64,
    opts: &SolverOptions,
) -> Result<Vec<Eigenvalue>, SolverError> {
    if !(lo < hi) || !lo.is_finite() {
        return Err(SolverError::InvalidInterval { lo, hi });
    }
    check_lambda(hi)?;
    let n_lo = count_below(g, lo)?;
    let n_hi = count_below(g, hi)?;
    let mut found = Vec::new();
    isolate(g, (lo, n_lo), (hi, n_hi), usize::MAX, opts, &mut found)?;
    finish(g, found, opts)
}

/// A level with no eigenvalue below it.
pub fn spectral_floor(g: &CompactGraph) -> Result<f64, SolverError> {
    let mut lo = g.spectral_floor_guess();
    while count_below(g, lo)? > 0 {
        lo = 2.0 * lo - 1.0;
        if lo < -LAMBDA_MAX {
            return Err(SolverError::LambdaOutOfRange(lo));
        }
    }
    Ok(lo)
}

/// The lowest `count` eigenvalues, grouped with multiplicity. The last group
/// may extend past `count` when it is degenerate.
pub fn lowest_eigenvalues(
    g: &CompactGraph,
    count: usize,
    opts: &SolverOptions,
) -> Result<Vec<Eigenvalue>, SolverError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let lo = spectral_floor(g)?;
    let mut hi = 1.0_f64;
    let mut n_hi = count_below(g, hi)?;
    while n_hi < count {
        hi = 2.0 * hi + 1.0;
        if hi > LAMBDA_MAX {
            return Err(SolverError::LambdaOutOfRange(hi));
        }
        n_hi = count_below(g, hi)?;
    }
    let mut found = Vec::new();
    isolate(g, (lo, 0), (hi, n_hi), count, opts, &mut found)?;
    finish(g, found, opts)
}

/// The lowest `count` eigenvalues listed with repetition, ascending.
pub fn lowest_values(
    g: &CompactGraph,
    count: usize,
    opts: &SolverOptions,
) -> Result<Vec<f64>, SolverError> {
    let mut out = Vec::with_capacity(count);
    for ev in lowest_eigenvalues(g, count, opts)? {
        out.extend(std::iter::repeat_n(ev.value, ev.multiplicity));
    }
    out.truncate(count);
    Ok(out)
}

/// Normalized eigenfunction with boundary data at every edge end.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub lambda: f64,
    /// Dimension of the null space found at `lambda`.
    pub multiplicity: usize,
    /// `(u_e(0), u_e'(0))` per edge.
    pub coefficients: Vec<[Complex64; 2]>,
    /// Inward derivatives per vertex, in adjacency order.
    pub vertex_derivatives: Vec<Vec<Complex64>>,
    /// Values per vertex, in adjacency order.
    pub vertex_values: Vec<Vec<Complex64>>,
    pub residual: f64,
}

impl EigenSolution {
    /// `(u(x), u'(x))` on edge `e`.
    pub fn eval(&self, g: &CompactGraph, e: usize, x: f64) -> (Complex64, Complex64) {
        let m = crate::transfer::partial_transfer(self.lambda, g.edge(e), x).0;
        let [a, b] = self.coefficients[e];
        (a * m[0][0] + b * m[0][1], a * m[1][0] + b * m[1][1])
    }

    /// Value and inward derivative at an edge end.
    pub fn at_end(&self, g: &CompactGraph, p: EdgeEnd) -> (Complex64, Complex64) {
        let v = g.edge(p.edge).vertex_at(p.end);
        let slot = g.slot_of(p);
        (self.vertex_values[v][slot], self.vertex_derivatives[v][slot])
    }
}

/// Orthonormal basis of the eigenspace at `lambda`.
pub fn eigenspace(
    g: &CompactGraph,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<Vec<EigenSolution>, SolverError> {
    let sm = secular_matrix(g, lambda)?;
    let n = sm.matrix.nrows();
    let (sigmas, vectors) = null_vectors(&sm.matrix, !g.is_complex());
    let residual = sigmas.first().copied().unwrap_or(0.0);
    if n > 0 && residual > opts.tol_eig {
        return Err(SolverError::NotAnEigenvalue { lambda, sigma_min: residual });
    }
    let nullity = sigmas.iter().filter(|&&s| s <= opts.nullity_tol()).count().max(1);
    let mut out = Vec::with_capacity(nullity);
    for (k, x) in vectors.into_iter().take(nullity).enumerate() {
        let coefficients: Vec<[Complex64; 2]> = (0..n / 2)
            .map(|e| [x[2 * e], x[2 * e + 1] * sm.column_scale])
            .collect();
        let mut sol = EigenSolution {
            lambda,
            multiplicity: nullity,
            coefficients,
            vertex_derivatives: Vec::new(),
            vertex_values: Vec::new(),
            residual: sigmas[k],
        };
        normalize(g, &mut sol);
        fill_vertex_data(g, &mut sol);
        out.push(sol);
    }
    Ok(out)
}

/// The eigenfunction at a simple eigenvalue.
pub fn eigenfunction(
    g: &CompactGraph,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<EigenSolution, SolverError> {
    let mut basis = eigenspace(g, lambda, opts)?;
    if basis.len() > 1 {
        return Err(SolverError::MultiplicityAmbiguous { lambda, multiplicity: basis.len() });
    }
    Ok(basis.remove(0))
}

/// Singular values ascending and the matching right singular vectors.
fn null_vectors(m: &DMatrix<Complex64>, real: bool) -> (Vec<f64>, Vec<Vec<Complex64>>) {
    let n = m.ncols();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    let mut pairs: Vec<(f64, Vec<Complex64>)> = if real {
        let mr = m.map(|c| c.re);
        let svd = mr.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        (0..n)
            .map(|i| {
                let v = (0..n).map(|j| Complex64::new(vt[(i, j)], 0.0)).collect();
                (svd.singular_values[i], v)
            })
            .collect()
    } else {
        let svd = m.clone().svd(false, true);
        let vt = svd.v_t.expect("requested V^H");
        (0..n)
            .map(|i| (svd.singular_values[i], (0..n).map(|j| vt[(i, j)].conj()).collect()))
            .collect()
    };
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362_0),
    (0.525_532_409_916_329_0, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_2, 0.101_228_536_290_376_26),
];

/// `(integral of |u|^2, integral of u)` over an edge.
fn edge_moments(g: &CompactGraph, e: usize, lambda: f64, coef: [Complex64; 2]) -> (f64, Complex64) {
    let edge = g.edge(e);
    let mut state = (coef[0], coef[1]);
    let mut norm2 = 0.0;
    let mut mean = Complex64::new(0.0, 0.0);
    for seg in edge.segments() {
        let omega = (lambda - seg.q).abs();
        let pieces = (seg.length * (1.0 + omega.sqrt()) * 2.0).ceil().max(1.0) as usize;
        let h = seg.length / pieces as f64;
        for p in 0..pieces {
            for &(t, w) in &GAUSS8 {
                let x = h * (p as f64 + 0.5 * (t + 1.0));
                let b = basis_eval(lambda, x, seg.q);
                let u = state.0 * b.c + state.1 * b.s;
                norm2 += 0.5 * h * w * u.norm_sqr();
                mean += 0.5 * h * w * u;
            }
        }
        let b = basis_eval(lambda, seg.length, seg.q);
        state = (state.0 * b.c + state.1 * b.s, state.0 * b.dc + state.1 * b.ds);
    }
    (norm2, mean)
}

fn normalize(g: &CompactGraph, sol: &mut EigenSolution) {
    let real = !g.is_complex();
    if real {
        for c in sol.coefficients.iter_mut() {
            c[0].im = 0.0;
            c[1].im = 0.0;
        }
    } else {
        // Fix the global phase on the largest coefficient.
        let pivot = sol
            .coefficients
            .iter()
            .flatten()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(Complex64::new(1.0, 0.0));
        if pivot.norm() > 0.0 {
            let rot = pivot.conj() / pivot.norm();
            for c in sol.coefficients.iter_mut().flatten() {
                *c *= rot;
            }
        }
    }
    let mut norm2 = 0.0;
    let mut mean = Complex64::new(0.0, 0.0);
    for e in 0..g.edges().len() {
        let (n2, m) = edge_moments(g, e, sol.lambda, sol.coefficients[e]);
        norm2 += n2;
        mean += m;
    }
    let mut factor = if norm2 > 0.0 { 1.0 / norm2.sqrt() } else { 1.0 };
    if real && mean.re < 0.0 {
        factor = -factor;
    }
    for c in sol.coefficients.iter_mut().flatten() {
        *c *= factor;
    }
}

fn fill_vertex_data(g: &CompactGraph, sol: &mut EigenSolution) {
    let ends: Vec<[(Complex64, Complex64); 2]> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let [a, b] = sol.coefficients[e];
            let m = transfer_matrix(sol.lambda, edge).0;
            let at_end = a * m[0][0] + b * m[0][1];
            let slope_end = a * m[1][0] + b * m[1][1];
            [(a, b), (at_end, -slope_end)]
        })
        .collect();
    sol.vertex_values = Vec::with_capacity(g.vertices().len());
    sol.vertex_derivatives = Vec::with_capacity(g.vertices().len());
    for v in 0..g.vertices().len() {
        let mut vals = Vec::new();
        let mut ders = Vec::new();
        for p in g.incident(v) {
            let (val, der) = ends[p.edge][match p.end {
                End::Start => 0,
                End::End => 1,
            }];
            vals.push(val);
            ders.push(der);
        }
        sol.vertex_values.push(vals);
        sol.vertex_derivatives.push(ders);
    }
}

/// Residual of the vertex conditions for a candidate solution, relative to
/// the size of the boundary data. Independent of the secular assembly.
pub fn condition_residual(g: &CompactGraph, sol: &EigenSolution) -> f64 {
    let mut worst: f64 = 0.0;
    let mut size: f64 = 0.0;
    for v in 0..g.vertices().len() {
        for (val, der) in sol.vertex_values[v].iter().zip(&sol.vertex_derivatives[v]) {
            size = size.max(val.norm()).max(der.norm());
        }
    }
    for (v, vertex) in g.vertices().iter().enumerate() {
        let vals = &sol.vertex_values[v];
        let ders = &sol.vertex_derivatives[v];
        match &vertex.condition {
            VertexCondition::Dirichlet => {
                for val in vals {
                    worst = worst.max(val.norm());
                }
            }
            cond => {
                let z = |i: usize| cond.phase(i);
                let common = z(vals.len() - 1) * vals[vals.len() - 1];
                let mut flux = -cond.coupling().unwrap_or(0.0) * common;
                for i in 0..vals.len() {
                    worst = worst.max((z(i) * vals[i] - common).norm());
                    flux += z(i) * ders[i];
                }
                worst = worst.max(flux.norm());
            }
        }
    }
    if size > 0.0 {
        worst / size
    } else {
        worst
    }
}

/// `DVector` view of the stacked coefficients, handy for linear-algebra checks.
pub fn stacked_coefficients(sol: &EigenSolution) -> DVector<Complex64> {
    DVector::from_iterator(
        2 * sol.coefficients.len(),
        sol.coefficients.iter().flat_map(|c| c.iter().copied()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        apply_floquet, build_gamma1, build_gamma2, dirichlet_perturbation, Edge, Gamma1Params,
        Gamma2Params, Potential, Vertex,
    };
    use std::f64::consts::PI;

    fn neumann_interval(len: f64) -> CompactGraph {
        CompactGraph::new(
            vec![
                Vertex { id: "a".into(), condition: VertexCondition::neumann() },
                Vertex { id: "b".into(), condition: VertexCondition::neumann() },
            ],
            vec![Edge::new("e", 0, 1, len, Potential::zero()).unwrap()],
        )
        .unwrap()
    }

    fn gamma1_b() -> CompactGraph {
        let g = build_gamma1(&Gamma1Params::equilateral(0.0, 1.0)).unwrap();
        dirichlet_perturbation(&g, 1).unwrap()
    }

    fn gamma1_a() -> CompactGraph {
        let g = build_gamma1(&Gamma1Params::equilateral(0.0, 1.0)).unwrap();
        dirichlet_perturbation(&g, 0).unwrap()
    }

    /// Root of 4 b cos b + sin b = 0 in (pi/2, pi) by plain bisection.
    fn gamma1_a_ground() -> f64 {
        let f = |b: f64| 4.0 * b * b.cos() + b.sin();
        let (mut lo, mut hi) = (PI / 2.0, PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let beta = 0.5 * (lo + hi);
        beta * beta
    }

    #[test]
    fn secular_matrix_shape() {
        let g = build_gamma2(&Gamma2Params::equilateral()).unwrap();
        let sm = secular_matrix(&g, 3.0).unwrap();
        assert_eq!(sm.matrix.shape(), (10, 10));
        assert!(matches!(secular_matrix(&g, 2e6), Err(SolverError::LambdaOutOfRange(_))));
    }

    #[test]
    fn neumann_interval_ground_state_singular() {
        let g = neumann_interval(1.0);
        assert!(sigma_min(&g, 0.0).unwrap() < 1e-14);
        assert!(sigma_min(&g, 0.5).unwrap() > 1e-2);
    }

    #[test]
    fn star_ground_state_singular() {
        let g = gamma1_b();
        assert!(sigma_min(&g, PI * PI / 4.0).unwrap() < 1e-12);
        assert!(sigma_min(&g, 1.0).unwrap() > 0.01);
    }

    #[test]
    fn sigma_positive_between_eigenvalues() {
        let g = gamma1_b();
        let evs = eigenvalues_in(&g, 0.0, 30.0, &SolverOptions::default()).unwrap();
        for w in evs.windows(2) {
            let mid = 0.5 * (w[0].value + w[1].value);
            assert!(sigma_min(&g, mid).unwrap() > 1e-4);
        }
    }

    #[test]
    fn neumann_interval_spectrum() {
        let g = neumann_interval(1.0);
        let evs = eigenvalues_in(&g, -0.5, 50.0, &SolverOptions::default()).unwrap();
        let values: Vec<f64> = evs.iter().map(|e| e.value).collect();
        let expected = [0.0, PI * PI, 4.0 * PI * PI];
        assert_eq!(values.len(), 3);
        for (a, b) in values.iter().zip(expected) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!(evs.iter().all(|e| e.multiplicity == 1 && e.nullity == 1));
    }

    #[test]
    fn half_open_interval() {
        let g = neumann_interval(1.0);
        assert!(eigenvalues_in(&g, -1.0, 0.0, &SolverOptions::default()).unwrap().is_empty());
        assert!(matches!(
            eigenvalues_in(&g, 1.0, 0.0, &SolverOptions::default()),
            Err(SolverError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn star_ground_state() {
        let evs = eigenvalues_in(&gamma1_b(), 0.0, 5.0, &SolverOptions::default()).unwrap();
        assert_eq!(evs.len(), 1);
        assert!((evs[0].value - PI * PI / 4.0).abs() < 1e-12);
        assert_eq!(evs[0].multiplicity, 1);
    }

    #[test]
    fn dirichlet_at_a_ground_state() {
        let expected = gamma1_a_ground();
        assert!(expected > 2.9 && expected < 3.0);
        let evs = lowest_eigenvalues(&gamma1_a(), 1, &SolverOptions::default()).unwrap();
        assert!((evs[0].value - expected).abs() < 1e-11, "{} vs {expected}", evs[0].value);
    }

    #[test]
    fn equilateral_degeneracy_counted() {
        // Four equal edges with both ends shared: sin(pi x) vanishing at A and B
        // with zero net flux gives a three-dimensional eigenspace at pi^2.
        let g = build_gamma1(&Gamma1Params::equilateral(0.0, 1.0)).unwrap();
        let evs = eigenvalues_in(&g, 9.0, 10.5, &SolverOptions::default()).unwrap();
        let at_pi2: Vec<_> = evs.iter().filter(|e| (e.value - PI * PI).abs() < 1e-9).collect();
        assert_eq!(at_pi2.len(), 1);
        assert_eq!(at_pi2[0].multiplicity, 3);
        assert_eq!(at_pi2[0].nullity, 3);
        let basis = eigenspace(&g, at_pi2[0].value, &SolverOptions::default()).unwrap();
        assert_eq!(basis.len(), 3);
        assert!(matches!(
            eigenfunction(&g, at_pi2[0].value, &SolverOptions::default()),
            Err(SolverError::MultiplicityAmbiguous { multiplicity: 3, .. })
        ));
    }

    #[test]
    fn star_eigenfunction_symmetric_and_positive() {
        let g = gamma1_b();
        let lambda = PI * PI / 4.0;
        let sol = eigenfunction(&g, lambda, &SolverOptions::default()).unwrap();
        // phi = a cos(pi x / 2) on each edge, a = 1/sqrt(2) for unit L2 norm.
        let a = 0.5f64.sqrt();
        for e in 0..4 {
            let (u0, du0) = (sol.coefficients[e][0], sol.coefficients[e][1]);
            assert!((u0.re - a).abs() < 1e-9 && du0.norm() < 1e-9);
            let (val, der) = sol.at_end(&g, EdgeEnd { edge: e, end: End::End });
            assert!(val.norm() < 1e-9);
            assert!((der.re - a * PI / 2.0).abs() < 1e-9, "{der}");
        }
        assert!(condition_residual(&g, &sol) < 1e-10);
    }

    #[test]
    fn neumann_constant_eigenfunction() {
        let g = neumann_interval(2.0);
        let sol = eigenfunction(&g, 0.0, &SolverOptions::default()).unwrap();
        let c = (0.5f64).sqrt();
        assert!((sol.coefficients[0][0].re - c).abs() < 1e-12);
        for ders in &sol.vertex_derivatives {
            assert!(ders.iter().all(|d| d.norm() < 1e-12));
        }
    }

    #[test]
    fn gamma2_star_derivatives_equal() {
        let g = build_gamma2(&Gamma2Params::equilateral()).unwrap();
        let b = g.vertex_id("B").unwrap();
        let gb = dirichlet_perturbation(&g, b).unwrap();
        let evs = lowest_eigenvalues(&gb, 1, &SolverOptions::default()).unwrap();
        // tan(beta) = 2 from the closed form on the star plus tail.
        let beta = 2f64.atan();
        assert!((evs[0].value - beta * beta).abs() < 1e-11);
        let sol = eigenfunction(&gb, evs[0].value, &SolverOptions::default()).unwrap();
        let ders: Vec<f64> = g
            .incident(b)
            .iter()
            .map(|&p| sol.at_end(&gb, p).1.re)
            .collect();
        for d in &ders {
            assert!(*d > 0.0);
            assert!((d - ders[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn not_an_eigenvalue() {
        let err = eigenfunction(&gamma1_b(), 1.0, &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, SolverError::NotAnEigenvalue { .. }));
    }

    #[test]
    fn floquet_conjugate_symmetry() {
        let g = build_gamma1(&Gamma1Params::equilateral(0.0, 1.0)).unwrap();
        let k = [0.7, -2.1, 1.3];
        let plus = apply_floquet(&g, 1, k, 1.0).unwrap();
        let minus = apply_floquet(&g, 1, [-k[0], -k[1], -k[2]], 1.0).unwrap();
        let a = lowest_values(&plus, 6, &SolverOptions::default()).unwrap();
        let b = lowest_values(&minus, 6, &SolverOptions::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn floquet_eigenfunction_satisfies_conditions() {
        let g = build_gamma1(&Gamma1Params::equilateral(0.0, 1.0)).unwrap();
        let gk = apply_floquet(&g, 1, [0.4, 1.9, -2.5], 1.0).unwrap();
        let evs = lowest_eigenvalues(&gk, 3, &SolverOptions::default()).unwrap();
        for ev in evs.iter().filter(|e| e.multiplicity == 1) {
            let sol = eigenfunction(&gk, ev.value, &SolverOptions::default()).unwrap();
            assert!(condition_residual(&gk, &sol) < 1e-9);
        }
    }

    #[test]
    fn loop_graph_floquet_spectrum() {
        // One edge closed on itself with phase e^{ik}: eigenvalues (k + 2 pi n)^2.
        let k = 0.9;
        let g = CompactGraph::new(
            vec![Vertex {
                id: "v".into(),
                condition: VertexCondition::QuasiNK {
                    phases: vec![Complex64::from_polar(1.0, k), Complex64::new(1.0, 0.0)],
                    gamma: 0.0,
                },
            }],
            vec![Edge::new("e", 0, 0, 1.0, Potential::zero()).unwrap()],
        )
        .unwrap();
        let got = lowest_values(&g, 4, &SolverOptions::default()).unwrap();
        let mut expected: Vec<f64> =
            (-3..=3).map(|n| (k + 2.0 * PI * n as f64).powi(2)).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn attractive_coupling_gives_negative_eigenvalue() {
        // Single edge, Neumann at one end and delta(-3) at the other: the ground
        // state solves r tanh(r) = 3 with lambda = -r^2.
        let g = CompactGraph::new(
            vec![
                Vertex { id: "a".into(), condition: VertexCondition::neumann() },
                Vertex { id: "b".into(), condition: VertexCondition::DeltaType { gamma: -3.0 } },
            ],
            vec![Edge::new("e", 0, 1, 1.0, Potential::zero()).unwrap()],
        )
        .unwrap();
        let f = |r: f64| r * r.tanh() - 3.0;
        let (mut lo, mut hi) = (0.1, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let expected = -(0.5 * (lo + hi)).powi(2);
        let got = lowest_values(&g, 1, &SolverOptions::default()).unwrap()[0];
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }
}
