//! Resolving `--config` / `--preset` into a graph or a quadrangle.

use std::path::Path;

use qgband_core::graph::GraphConfig;
use qgband_core::{CompactGraph, PolygonSpec, Preset};

use crate::error::CliError;

pub fn preset(name: &str) -> Result<Preset, CliError> {
    Preset::from_name(name).ok_or_else(|| {
        let known: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
        CliError::Config(format!("--preset: unknown preset `{name}` (known: {})", known.join(", ")))
    })
}

pub fn load_config(path: &Path) -> Result<GraphConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    GraphConfig::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn graph(config: Option<&Path>, preset_name: Option<&str>) -> Result<CompactGraph, CliError> {
    match (config, preset_name) {
        (Some(path), _) => {
            let cfg = load_config(path)?;
            cfg.build().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        }
        (None, Some(name)) => preset(name)?.graph().ok_or_else(|| {
            CliError::Config(format!("--preset: `{name}` describes a quadrangle, not a graph"))
        }),
        (None, None) => Err(CliError::Config("one of --config or --preset is required".into())),
    }
}

pub fn polygon(sides: Option<&[f64]>, preset_name: Option<&str>) -> Result<PolygonSpec, CliError> {
    let a = match (sides, preset_name) {
        (Some(s), _) => [s[0], s[1], s[2], s[3]],
        (None, Some(name)) => {
            preset(name)?
                .polygon()
                .ok_or_else(|| CliError::Config(format!("--preset: `{name}` has no quadrangle")))?
                .a
        }
        (None, None) => return Err(CliError::Config("give four side lengths or --preset".into())),
    };
    PolygonSpec::new(a).map_err(|e| CliError::Config(e.to_string()))
}

pub fn grid(values: Option<&[usize]>, default: usize) -> [usize; 3] {
    match values {
        Some(v) => [v[0], v[1], v[2]],
        None => [default; 3],
    }
}
