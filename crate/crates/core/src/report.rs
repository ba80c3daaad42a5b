//! CSV artifacts with manifest sidecars. Formatting is fixed so identical
//! configs and seeds reproduce byte-identical files.

use crate::error::Result;
use crate::gibbs::DiscreteMeasure;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Deterministic float formatting for artifacts.
pub fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{v:.12e}")
    }
}

/// Everything needed to reproduce an artifact.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub subcommand: String,
    pub config_hash: String,
    pub config_text: String,
    pub seed: u64,
    pub wall_ms: u128,
}

impl Manifest {
    pub fn new(subcommand: &str, config_hash: String, config_text: String, seed: u64) -> Self {
        Manifest {
            subcommand: subcommand.to_string(),
            config_hash,
            config_text,
            seed,
            wall_ms: 0,
        }
    }

    fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("tool = lsqlab {}\n", env!("CARGO_PKG_VERSION")));
        s.push_str(&format!("subcommand = {}\n", self.subcommand));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("config_hash = sha256:{}\n", self.config_hash));
        s.push_str(&format!("wall_ms = {}\n", self.wall_ms));
        s.push_str("config = <<EOF\n");
        s.push_str(&self.config_text);
        if !self.config_text.ends_with('\n') {
            s.push('\n');
        }
        s.push_str("EOF\n");
        s
    }
}

/// Writes one CSV artifact plus its `.manifest` sidecar; returns the path.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
    footer: Option<&str>,
    manifest: &Manifest,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.csv"));
    let mut out = std::fs::File::create(&path)?;
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    if let Some(f) = footer {
        writeln!(out, "{f}")?;
    }
    let mpath = dir.join(format!("{name}.csv.manifest"));
    std::fs::write(&mpath, manifest.render())?;
    Ok(path)
}

/// Exports a marginal as CSV: one node-coordinate column per site plus the
/// density value against quadrature.
pub fn write_marginal_csv(
    dir: &Path,
    name: &str,
    mu: &DiscreteMeasure,
    manifest: &Manifest,
) -> Result<PathBuf> {
    let sites = mu.sites();
    let header: Vec<String> = sites
        .iter()
        .map(|s| format!("x{s}"))
        .chain(std::iter::once("density".to_string()))
        .collect();
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let density = mu.density();
    let nodes = mu.grid().nodes();
    let mut rows = Vec::with_capacity(density.values().len());
    for (idx, v) in density.values().indexed_iter() {
        let mut row: Vec<String> = Vec::with_capacity(sites.len() + 1);
        for a in 0..sites.len() {
            row.push(fmt_f(nodes[idx[a]]));
        }
        row.push(fmt_f(*v));
        rows.push(row);
    }
    write_csv(dir, name, &header_refs, &rows, None, manifest)
}
