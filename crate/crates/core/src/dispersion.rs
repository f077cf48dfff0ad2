//! Band functions over the quasimomentum torus.

use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, SolverError};
use crate::format::sig12;
use crate::graph::{apply_floquet, CompactGraph, GraphConfig, VertexId};
use crate::secular::{lowest_values, SolverOptions};

/// Grid nodes `-pi + 2 pi (i + 1) / n`, `i = 0..n`: `pi` included, `-pi` not.
pub fn grid_axis(n: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    (0..n).map(|i| -PI + 2.0 * PI * (i + 1) as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandTable {
    pub grid: [usize; 3],
    pub bands: usize,
    /// Grid points in lexicographic order (`k1` slowest).
    pub k: Vec<[f64; 3]>,
    /// `values[i][j]` is `lambda_{j+1}` at `k[i]`, ascending in `j`.
    pub values: Vec<Vec<f64>>,
    pub config_hash: String,
    pub tol_eig: f64,
}

impl BandTable {
    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.grid[1] + i[1]) * self.grid[2] + i[2]
    }

    pub fn band_range(&self, j: usize) -> (f64, f64) {
        self.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v[j]), hi.max(v[j]))
        })
    }

    /// `k1,k2,k3,lambda_1,...,lambda_J`, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k1,k2,k3");
        for j in 1..=self.bands {
            let _ = write!(out, ",lambda_{j}");
        }
        out.push('\n');
        for (k, vals) in self.k.iter().zip(&self.values) {
            let row: Vec<String> = k.iter().chain(vals).map(|x| sig12(*x)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Largest change of band `j` between grid neighbours (periodic).
    pub fn max_adjacent_jump(&self, j: usize) -> f64 {
        let [n1, n2, n3] = self.grid;
        let mut jump: f64 = 0.0;
        for a in 0..n1 {
            for b in 0..n2 {
                for c in 0..n3 {
                    let here = self.values[self.index([a, b, c])][j];
                    for next in [[(a + 1) % n1, b, c], [a, (b + 1) % n2, c], [a, b, (c + 1) % n3]] {
                        jump = jump.max((self.values[self.index(next)][j] - here).abs());
                    }
                }
            }
        }
        jump
    }
}

/// Evaluates `f` at every grid point in parallel; rows come back in grid order.
pub fn sweep_with<F>(grid: [usize; 3], bands: usize, f: F) -> Result<Vec<([f64; 3], Vec<f64>)>, Error>
where
    F: Fn([f64; 3]) -> Result<Vec<f64>, SolverError> + Sync,
{
    if grid.iter().any(|&n| n < 4) || bands < 2 {
        return Err(Error::Config(format!(
            "sweep needs grid sizes >= 4 and at least 2 bands, got {grid:?} and {bands}"
        )));
    }
    let axes = grid.map(grid_axis);
    let points: Vec<[f64; 3]> = axes[0]
        .iter()
        .flat_map(|&k1| {
            let axes = &axes;
            axes[1].iter().flat_map(move |&k2| axes[2].iter().map(move |&k3| [k1, k2, k3]))
        })
        .collect();
    points
        .into_par_iter()
        .map(|k| {
            f(k).map(|v| (k, v)).map_err(|e| {
                Error::Solver(SolverError::AtQuasimomentum { k, source: Box::new(e) })
            })
        })
        .collect()
}

/// The first `bands` eigenvalues of `apply_floquet(g, b, k, gamma_b)` on the grid.
pub fn band_sweep(
    g: &CompactGraph,
    b: VertexId,
    gamma_b: f64,
    grid: [usize; 3],
    bands: usize,
    opts: &SolverOptions,
) -> Result<BandTable, Error> {
    apply_floquet(g, b, [0.0; 3], gamma_b)?;
    let rows = sweep_with(grid, bands, |k| {
        let gk = apply_floquet(g, b, k, gamma_b).expect("degree checked above");
        lowest_values(&gk, bands, opts)
    })?;
    let (k, values) = rows.into_iter().unzip();
    Ok(BandTable {
        grid,
        bands,
        k,
        values,
        config_hash: GraphConfig::from_graph(g).content_hash(),
        tol_eig: opts.tol_eig,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    /// Band below the gap (1-based).
    pub below: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgmaxCell {
    pub index: [usize; 3],
    pub k: [f64; 3],
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// `[min_k lambda_j, max_k lambda_j]` per band.
    pub bands: Vec<[f64; 2]>,
    pub gaps: Vec<Gap>,
    /// Grid cells where band 1 is within `tol` of its maximum.
    pub argmax_cells: Vec<ArgmaxCell>,
    pub config_hash: String,
    /// Whether bands 1 and 2 are separated by an open gap.
    pub first_gap_open: bool,
}

impl SpectrumReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn spectrum_report(t: &BandTable, tol: f64) -> SpectrumReport {
    let bands: Vec<[f64; 2]> = (0..t.bands)
        .map(|j| {
            let (lo, hi) = t.band_range(j);
            [lo, hi]
        })
        .collect();
    let gaps: Vec<Gap> = bands
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0][1] < w[1][0])
        .map(|(j, w)| Gap { below: j + 1, lo: w[0][1], hi: w[1][0] })
        .collect();
    let top = bands.first().map_or(f64::NAN, |b| b[1]);
    let [n1, n2, n3] = t.grid;
    let mut argmax_cells = Vec::new();
    for a in 0..n1 {
        for b in 0..n2 {
            for c in 0..n3 {
                let i = t.index([a, b, c]);
                if t.values[i][0] >= top - tol {
                    argmax_cells.push(ArgmaxCell { index: [a, b, c], k: t.k[i], lambda: t.values[i][0] });
                }
            }
        }
    }
    let first_gap_open = gaps.first().is_some_and(|g| g.below == 1);
    SpectrumReport { bands, gaps, argmax_cells, config_hash: t.config_hash.clone(), first_gap_open }
}

/// Both eigenvalues of the discrete Laplacian on the `d`-dimensional diamond
/// at quasimomentum `k`: `(d + 1) -+ |1 + sum_j e^{i k_j}|`.
pub fn discrete_diamond_bands(d: usize, k: &[f64]) -> Result<(f64, f64), Error> {
    if d < 2 || k.len() != d {
        return Err(Error::Config(format!(
            "diamond needs d >= 2 and d quasimomenta, got d = {d} with {} values",
            k.len()
        )));
    }
    let w: Complex64 = k.iter().map(|&kj| Complex64::from_polar(1.0, kj)).sum::<Complex64>() + 1.0;
    let center = (d + 1) as f64;
    // Round |w| onto the grid of `center` so both branches are exact mirrors.
    let r = (center + w.norm()) - center;
    Ok((center - r, center + r))
}
