//! Deterministic result files: CSV tables, JSON reports, a metadata echo
//! with the config hash, and optional SVG plots.
//!
//! Nothing here embeds timestamps or machine identifiers; identical resolved
//! configs byte-reproduce every file.

use crate::config::RunConfig;
use anyhow::{Context, Result};
use holonomy::evolve::PinnedConstant;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// Fixed-precision float formatting: enough digits to round-trip f64.
pub fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

/// CSV with a leading `# config_sha256: ...` comment so replayed tables are
/// traceable to the exact configuration that produced them.
pub fn write_csv(
    path: &Path,
    config_sha256: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut text = format!("# config_sha256: {config_sha256}\n");
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// sha256 of the canonical TOML serialization of the resolved config.
pub fn config_hash(config: &RunConfig) -> String {
    let canonical = config.to_toml();
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    hex::encode(hasher.finalize())
}

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub experiment: &'static str,
    pub config_sha256: String,
    pub pinned_constants: BTreeMap<&'static str, PinnedConstant>,
    pub conventions: BTreeMap<&'static str, &'static str>,
    pub config: &'a RunConfig,
}

pub fn conventions() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        (
            "phase_sign",
            "counterclockwise loops (increasing phi) enclose positive solid angle and \
             produce phase = c * solid_angle with the recorded constant c",
        ),
        (
            "heating_condition",
            "the heating smallness condition is implemented as gamma_h << delta and \
             reported as the ratio gamma_h / |delta|",
        ),
        (
            "u3_intensity_ratio",
            "tan(theta/2) is the ratio of the squared Rabi magnitudes, which are the \
             effective couplings of the two-ion interaction; this reproduces the \
             cos(theta/2)|11> + sin(theta/2) e^{i phi} |aa> dark path exactly",
        ),
        (
            "omega_t",
            "traversal durations are configured as dimensionless gap * T products and \
             converted to seconds with the configured Rabi magnitude",
        ),
    ])
}

pub fn write_metadata(
    dir: &Path,
    config: &RunConfig,
    pinned: BTreeMap<&'static str, PinnedConstant>,
) -> Result<()> {
    let metadata = Metadata {
        experiment: config.experiment.name(),
        config_sha256: config_hash(config),
        pinned_constants: pinned,
        conventions: conventions(),
        config,
    };
    write_json(&dir.join("metadata.json"), &metadata)
}

pub fn ensure_output_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Log-log leakage plot with a slope -2 reference line.
pub fn plot_sweep_svg(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    use plotters::prelude::*;
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, leakage)| *t > 0.0 && *leakage > 0.0)
        .map(|&(t, leakage)| (t.log10(), leakage.log10()))
        .collect();
    if usable.len() < 2 {
        return Ok(());
    }
    let (x_min, x_max) = usable
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        });
    let (y_min, y_max) = usable
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.1), hi.max(p.1))
        });
    let root = SVGBackend::new(path, (800, 600)).into_drawing_area();
    root.fill(&WHITE)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .caption("leakage vs gap*T (log-log)", ("sans-serif", 20))
        .build_cartesian_2d(x_min - 0.1..x_max + 0.1, y_min - 0.3..y_max + 0.3)?;
    chart
        .configure_mesh()
        .x_desc("log10(gap*T)")
        .y_desc("log10(leakage)")
        .draw()?;
    chart.draw_series(LineSeries::new(usable.iter().copied(), &BLUE))?;
    chart.draw_series(usable.iter().map(|p| Circle::new(*p, 3, BLUE.filled())))?;
    // Reference slope -2 through the first point.
    let (x0, y0) = usable[0];
    chart.draw_series(LineSeries::new(
        [(x0, y0), (x_max, y0 - 2.0 * (x_max - x0))],
        RED.stroke_width(1),
    ))?;
    root.present()?;
    Ok(())
}
