use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use qgband_core::band_edge::{coupling_at, curve_csv, gap_from_table, CurveOptions, PerturbSpec};
use qgband_core::format::sig12;
use qgband_core::graph::GraphConfig;
use qgband_core::polygon::{point_solution, smoothness};
use qgband_core::secular::{count_below, lowest_eigenvalues};
use qgband_core::{
    band_sweep, classify, curve_samples, degenerate_curve, dirichlet_perturbation, eigenvalues_in,
    oracle_eigenvalues, perturb_and_verify, spectrum_report, BandTable, Classification,
    CompactGraph, SolverOptions,
};
use serde::Serialize;

use crate::error::CliError;
use crate::{cache, input, Cli, Command};

/// What a command prints, plus the files it writes under `--out`.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub files: Vec<(&'static str, String)>,
}

impl Output {
    pub fn emit(&self, out: Option<&Path>) -> Result<(), CliError> {
        if let Some(dir) = out {
            fs::create_dir_all(dir)?;
            for (name, body) in &self.files {
                fs::write(dir.join(name), body)?;
            }
        }
        print!("{}", self.stdout);
        Ok(())
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// `value` as JSON with the sampled curve replaced by its size.
fn without_curve<T: Serialize>(value: &T, path: &[&str]) -> String {
    let mut v = serde_json::to_value(value).expect("report serializes");
    let mut node = &mut v;
    for key in path {
        match node.get_mut(*key) {
            Some(next) => node = next,
            None => return json(&v),
        }
    }
    if let Some(obj) = node.as_object_mut() {
        if let Some(curve) = obj.remove("curve") {
            let n: usize = curve.as_array().map_or(0, |b| {
                b.iter().map(|branch| branch.as_array().map_or(0, Vec::len)).sum()
            });
            obj.insert("curve_points".into(), n.into());
        }
    }
    json(&v)
}

fn graph(cli: &Cli) -> Result<CompactGraph, CliError> {
    input::graph(cli.config.as_deref(), cli.preset.as_deref())
}

fn table(
    g: &CompactGraph,
    vertex: &str,
    grid: [usize; 3],
    bands: usize,
    use_cache: bool,
    opts: &SolverOptions,
) -> Result<BandTable, CliError> {
    let b = g.vertex_id(vertex)?;
    let hash = GraphConfig::from_graph(g).content_hash();
    if use_cache {
        if let Some(t) = cache::load(&hash, vertex, grid, bands) {
            eprintln!("using cached band table");
            return Ok(t);
        }
    }
    let t = band_sweep(g, b, coupling_at(g, b), grid, bands, opts)?;
    if use_cache {
        cache::store(vertex, &t);
    }
    Ok(t)
}

pub fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    let opts = SolverOptions::default();
    match &cli.command {
        Command::Validate => validate(cli),
        Command::Spectrum { range, bands, dirichlet_at } => {
            let mut g = graph(cli)?;
            if let Some(v) = dirichlet_at {
                g = dirichlet_perturbation(&g, g.vertex_id(v)?)?;
            }
            spectrum(&g, range.as_deref(), *bands, &opts)
        }
        Command::Sweep { grid, bands, no_cache } => {
            let g = graph(cli)?;
            let grid = input::grid(grid.grid.as_deref(), 16);
            let t = table(&g, &cli.vertex, grid, *bands, !no_cache, &opts)?;
            let report = json(&spectrum_report(&t, opts.tol_eig));
            Ok(Output {
                stdout: report.clone(),
                files: vec![("bands.csv", t.to_csv()), ("spectrum.json", report)],
            })
        }
        Command::Gap { grid, a_vertex, no_cache } => {
            let g = graph(cli)?;
            let (a, b) = (g.vertex_id(a_vertex)?, g.vertex_id(&cli.vertex)?);
            let grid = input::grid(grid.grid.as_deref(), 16);
            let t = table(&g, &cli.vertex, grid, 2, !no_cache, &opts)?;
            let report = json(&gap_from_table(&g, a, b, coupling_at(&g, b), &t, &opts)?);
            Ok(Output { stdout: report.clone(), files: vec![("gap.json", report)] })
        }
        Command::Curve { on_curve, off_curve, seed } => {
            let g = graph(cli)?;
            let b = g.vertex_id(&cli.vertex)?;
            let gamma_b = coupling_at(&g, b);
            let curve_opts = CurveOptions {
                on_curve: *on_curve,
                off_curve: *off_curve,
                seed: *seed,
                ..CurveOptions::default()
            };
            let report = degenerate_curve(&g, b, gamma_b, &curve_opts, &opts)?;
            let mut files = vec![("degeneracy.json", json(&report))];
            if cli.out.is_some() {
                files.push(("curve.csv", curve_csv(&g, b, gamma_b, &report, &opts)?));
            }
            Ok(Output { stdout: without_curve(&report, &[]), files })
        }
        Command::Polygon { sides, samples } => {
            let spec = input::polygon(sides.as_deref(), cli.preset.as_deref())?;
            polygon(spec, *samples)
        }
        Command::Perturb {
            seed,
            grid,
            a_vertex,
            length_jitter,
            gamma_jitter,
            potential_amplitude,
        } => {
            let g = graph(cli)?;
            let (a, b) = (g.vertex_id(a_vertex)?, g.vertex_id(&cli.vertex)?);
            let spec = PerturbSpec {
                length_jitter: *length_jitter,
                gamma_jitter: *gamma_jitter,
                potential_amplitude: *potential_amplitude,
            };
            let grid = input::grid(grid.grid.as_deref(), 8);
            let report =
                perturb_and_verify(&g, a, b, &spec, *seed, grid, &CurveOptions::default(), &opts)?;
            Ok(Output {
                stdout: without_curve(&report, &["curve"]),
                files: vec![("robustness.json", json(&report))],
            })
        }
        Command::Oracle { points, bands, dirichlet_at } => {
            let mut g = graph(cli)?;
            if let Some(v) = dirichlet_at {
                g = dirichlet_perturbation(&g, g.vertex_id(v)?)?;
            }
            oracle(&g, *points, *bands, &opts)
        }
    }
}

fn validate(cli: &Cli) -> Result<Output, CliError> {
    let mut out = String::new();
    if cli.config.is_none() {
        if let Some(spec) = cli.preset.as_deref().map(input::preset).transpose()?.and_then(|p| p.polygon()) {
            let a: Vec<String> = spec.a.iter().map(|x| sig12(*x)).collect();
            let _ = writeln!(out, "valid quadrangle\nsides: {}", a.join(" "));
            return Ok(Output { stdout: out, files: Vec::new() });
        }
    }
    let g = graph(cli)?;
    let _ = writeln!(out, "valid configuration");
    let _ = writeln!(out, "vertices: {}", g.vertices().len());
    let _ = writeln!(out, "edges: {}", g.edges().len());
    let _ = writeln!(out, "total_length: {}", sig12(g.total_length()));
    let _ = writeln!(out, "config_hash: {}", GraphConfig::from_graph(&g).content_hash());
    Ok(Output { stdout: out, files: Vec::new() })
}

#[derive(Serialize)]
struct SpectrumListing {
    /// Index of the first listed eigenvalue, counted with multiplicity from 1.
    first_index: usize,
    eigenvalues: Vec<qgband_core::Eigenvalue>,
    config_hash: String,
}

fn spectrum(
    g: &CompactGraph,
    range: Option<&[f64]>,
    bands: usize,
    opts: &SolverOptions,
) -> Result<Output, CliError> {
    let (first_index, eigenvalues) = match range {
        Some(r) => (count_below(g, r[0])? + 1, eigenvalues_in(g, r[0], r[1], opts)?),
        None => (1, lowest_eigenvalues(g, bands, opts)?),
    };
    let mut out = String::new();
    let mut n = first_index;
    for ev in &eigenvalues {
        let _ = writeln!(out, "lambda_{n} = {}  (multiplicity {})", sig12(ev.value), ev.multiplicity);
        n += ev.multiplicity;
    }
    if eigenvalues.is_empty() {
        out.push_str("no eigenvalues\n");
    }
    let listing = SpectrumListing {
        first_index,
        eigenvalues,
        config_hash: GraphConfig::from_graph(g).content_hash(),
    };
    Ok(Output { stdout: out, files: vec![("spectrum.json", json(&listing))] })
}

#[derive(Serialize)]
struct PolygonSummary {
    sides: [f64; 4],
    classification: Classification,
    smooth: bool,
    topology: Option<qgband_core::Topology>,
    point: Option<[f64; 3]>,
    branches: usize,
    samples: usize,
    max_residual: Option<f64>,
}

fn polygon(spec: qgband_core::PolygonSpec, samples: usize) -> Result<Output, CliError> {
    let classification = classify(&spec);
    let mut summary = PolygonSummary {
        sides: spec.a,
        classification,
        smooth: smoothness(&spec),
        topology: None,
        point: None,
        branches: 0,
        samples: 0,
        max_residual: None,
    };
    let mut csv = None;
    match classification {
        Classification::Empty => {}
        Classification::Point => summary.point = point_solution(&spec),
        Classification::Curve => {
            if samples < 2 {
                return Err(CliError::Config("--samples must be at least 2".into()));
            }
            let curve = curve_samples(&spec, samples).map_err(qgband_core::Error::from)?;
            summary.smooth = curve.smooth;
            summary.topology = Some(curve.topology);
            summary.branches = curve.branches.len();
            summary.samples = curve.points().count();
            summary.max_residual = Some(curve.max_residual());
            csv = Some(curve.to_csv());
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "# classification: {:?}", summary.classification);
    let _ = writeln!(out, "# smooth: {}", summary.smooth);
    if let Some(t) = summary.topology {
        let _ = writeln!(out, "# topology: {t:?}");
        let _ = writeln!(out, "# branches: {}", summary.branches);
        let _ = writeln!(out, "# max_residual: {}", sig12(summary.max_residual.unwrap_or(0.0)));
    }
    if let Some(p) = summary.point {
        let _ = writeln!(out, "# point: {},{},{}", sig12(p[0]), sig12(p[1]), sig12(p[2]));
    }
    let mut files = vec![("polygon.json", json(&summary))];
    if let Some(csv) = csv {
        out.push_str(&csv);
        files.push(("branches.csv", csv));
    }
    Ok(Output { stdout: out, files })
}

fn oracle(g: &CompactGraph, points: usize, bands: usize, opts: &SolverOptions) -> Result<Output, CliError> {
    let fd = oracle_eigenvalues(g, points, bands).map_err(|e| CliError::Config(format!("--points: {e}")))?;
    let exact = qgband_core::secular::lowest_values(g, fd.len(), opts)?;
    let mut out = String::from("j,secular,oracle,difference\n");
    for (j, (s, o)) in exact.iter().zip(&fd).enumerate() {
        let _ = writeln!(out, "{},{},{},{}", j + 1, sig12(*s), sig12(*o), sig12(o - s));
    }
    Ok(Output { stdout: out.clone(), files: vec![("oracle.csv", out)] })
}
