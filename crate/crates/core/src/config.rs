//! Flat experiment configuration: `section.key = value` lines with dotted
//! sections, chosen over nested formats for diff-friendliness. Unknown keys
//! are rejected with the offending line number, and every numeric range is
//! validated before any computation starts.

use crate::error::{Error, Result};
use crate::grid::{build_grid_with_budget, Grid, Scheme, DEFAULT_ELEMENT_BUDGET};
use crate::model::{
    BoundaryCondition, BoundaryValue, Couplings, EdgeConvention, InteractionSpec, LatticeModel,
    PhaseSpec,
};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct ModelConfig {
    pub n_sites: usize,
    pub q: f64,
    pub phase_kind: String,
    pub phase_t: f64,
    pub interaction_kind: String,
    pub interaction_r: f64,
    pub coupling_j: f64,
    pub coupling_table: Option<BTreeMap<(usize, usize), f64>>,
    pub boundary_left: BoundaryValue,
    pub boundary_right: BoundaryValue,
    pub edge_convention: EdgeConvention,
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub l: f64,
    pub m: usize,
    pub scheme: Scheme,
    pub element_budget: usize,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub tolerance: f64,
    pub n_max: usize,
    pub epsilon: f64,
    pub k: Option<usize>,
    pub n_random: usize,
    pub scan_points: usize,
    pub omega_radius: f64,
    pub ascent_iters: usize,
    pub ascent_seeds: usize,
    pub keep_iterates: bool,
    pub fitted: bool,
    pub axis: String,
    pub ladder: Vec<f64>,
    pub target: String,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: String,
    pub formats: String,
}

/// Overrides for the constant calculus inputs.
#[derive(Debug, Clone)]
pub struct ConstantsConfig {
    pub c: f64,
    pub big_c: Option<f64>,
    pub k: Option<f64>,
    pub epsilon: Option<f64>,
    pub j: Option<f64>,
    pub d: Option<f64>,
    pub t: Option<f64>,
    pub sweep: Option<(f64, f64, usize)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub raw: String,
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub run: RunConfig,
    pub output: OutputConfig,
    pub constants: ConstantsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            raw: String::new(),
            model: ModelConfig {
                n_sites: 5,
                q: 2.0,
                phase_kind: "power".into(),
                phase_t: 4.0,
                interaction_kind: "power_difference".into(),
                interaction_r: 2.0,
                coupling_j: 0.05,
                coupling_table: None,
                boundary_left: BoundaryValue::Free,
                boundary_right: BoundaryValue::Free,
                edge_convention: EdgeConvention::Directed,
            },
            grid: GridConfig {
                l: 2.5,
                m: 8,
                scheme: Scheme::UniformTrapezoid,
                element_budget: DEFAULT_ELEMENT_BUDGET,
            },
            run: RunConfig {
                seed: 42,
                tolerance: 1e-8,
                n_max: 12,
                epsilon: 0.05,
                k: None,
                n_random: 20,
                scan_points: 3,
                omega_radius: 1.0,
                ascent_iters: 500,
                ascent_seeds: 12,
                keep_iterates: false,
                fitted: false,
                axis: "L".into(),
                ladder: vec![],
                target: "gauss_integral".into(),
                threads: 1,
            },
            output: OutputConfig { dir: "out".into(), formats: "csv".into() },
            constants: ConstantsConfig {
                c: 1.0,
                big_c: None,
                k: None,
                epsilon: None,
                j: None,
                d: None,
                t: None,
                sweep: None,
            },
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse::<T>().map_err(|_| Error::ConfigAt {
        line,
        msg: format!("key `{key}` expects a number, got `{v}`"),
    })
}

fn parse_boundary(line: usize, key: &str, v: &str) -> Result<BoundaryValue> {
    if v == "free" {
        Ok(BoundaryValue::Free)
    } else {
        Ok(BoundaryValue::Fixed(parse_num::<f64>(line, key, v)?))
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig { raw: text.to_string(), ..Default::default() };
        let mut chain_sites: Option<(usize, usize)> = None; // (line, value)
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let stripped = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            };
            let stripped = stripped.trim();
            if stripped.is_empty() {
                continue;
            }
            let Some((key, value)) = stripped.split_once('=') else {
                return Err(Error::ConfigAt {
                    line,
                    msg: format!("expected `key = value`, got `{stripped}`"),
                });
            };
            let key = key.trim();
            let v = value.trim();
            match key {
                "model.n_sites" => cfg.model.n_sites = parse_num(line, key, v)?,
                "chain.n_sites" => chain_sites = Some((line, parse_num(line, key, v)?)),
                "model.q" => cfg.model.q = parse_num(line, key, v)?,
                "model.phase.kind" => cfg.model.phase_kind = v.to_string(),
                "model.phase.t" => cfg.model.phase_t = parse_num(line, key, v)?,
                "model.interaction.kind" => cfg.model.interaction_kind = v.to_string(),
                "model.interaction.r" => cfg.model.interaction_r = parse_num(line, key, v)?,
                "model.coupling.J" => cfg.model.coupling_j = parse_num(line, key, v)?,
                "model.coupling.table" => {
                    let mut table = BTreeMap::new();
                    for entry in v.split(',') {
                        let entry = entry.trim();
                        if entry.is_empty() {
                            continue;
                        }
                        let parse_err = || Error::ConfigAt {
                            line,
                            msg: format!("coupling entry `{entry}` is not `i:j=value`"),
                        };
                        let (pair, val) = entry.split_once('=').ok_or_else(parse_err)?;
                        let (a, b) = pair.split_once(':').ok_or_else(parse_err)?;
                        let i: usize = a.trim().parse().map_err(|_| parse_err())?;
                        let j: usize = b.trim().parse().map_err(|_| parse_err())?;
                        let val: f64 = val.trim().parse().map_err(|_| parse_err())?;
                        table.insert((i, j), val);
                    }
                    cfg.model.coupling_table = Some(table);
                }
                "model.boundary.left" | "chain.boundary.left" => {
                    cfg.model.boundary_left = parse_boundary(line, key, v)?
                }
                "model.boundary.right" | "chain.boundary.right" => {
                    cfg.model.boundary_right = parse_boundary(line, key, v)?
                }
                "chain.boundary" => {
                    if v == "free" {
                        cfg.model.boundary_left = BoundaryValue::Free;
                        cfg.model.boundary_right = BoundaryValue::Free;
                    } else {
                        let (l, r) = v.split_once(',').ok_or_else(|| Error::ConfigAt {
                            line,
                            msg: format!("chain.boundary expects `free` or `left,right`, got `{v}`"),
                        })?;
                        cfg.model.boundary_left = parse_boundary(line, key, l.trim())?;
                        cfg.model.boundary_right = parse_boundary(line, key, r.trim())?;
                    }
                }
                "model.edge_convention" => {
                    cfg.model.edge_convention = match v {
                        "directed" => EdgeConvention::Directed,
                        "per_edge" => EdgeConvention::PerEdge,
                        other => {
                            return Err(Error::ConfigAt {
                                line,
                                msg: format!("unknown edge convention `{other}`"),
                            })
                        }
                    }
                }
                "grid.L" => cfg.grid.l = parse_num(line, key, v)?,
                "grid.m" => cfg.grid.m = parse_num(line, key, v)?,
                "grid.scheme" => {
                    cfg.grid.scheme = Scheme::parse(v).map_err(|e| Error::ConfigAt {
                        line,
                        msg: e.to_string(),
                    })?
                }
                "grid.element_budget" => cfg.grid.element_budget = parse_num(line, key, v)?,
                "run.seed" => cfg.run.seed = parse_num(line, key, v)?,
                "run.tolerance" => cfg.run.tolerance = parse_num(line, key, v)?,
                "run.n_max" => cfg.run.n_max = parse_num(line, key, v)?,
                "run.epsilon" => cfg.run.epsilon = parse_num(line, key, v)?,
                "run.k" => cfg.run.k = Some(parse_num(line, key, v)?),
                "run.n_random" => cfg.run.n_random = parse_num(line, key, v)?,
                "run.scan_points" => cfg.run.scan_points = parse_num(line, key, v)?,
                "run.omega_radius" => cfg.run.omega_radius = parse_num(line, key, v)?,
                "run.ascent_iters" => cfg.run.ascent_iters = parse_num(line, key, v)?,
                "run.ascent_seeds" => cfg.run.ascent_seeds = parse_num(line, key, v)?,
                "run.keep_iterates" => cfg.run.keep_iterates = parse_bool(line, key, v)?,
                "run.fitted" => cfg.run.fitted = parse_bool(line, key, v)?,
                "run.axis" => cfg.run.axis = v.to_string(),
                "run.ladder" => {
                    cfg.run.ladder = v
                        .split(',')
                        .map(|s| parse_num::<f64>(line, key, s.trim()))
                        .collect::<Result<Vec<f64>>>()?
                }
                "run.target" => cfg.run.target = v.to_string(),
                "run.threads" => cfg.run.threads = parse_num(line, key, v)?,
                "output.dir" => cfg.output.dir = v.to_string(),
                "output.formats" => cfg.output.formats = v.to_string(),
                "constants.c" => cfg.constants.c = parse_num(line, key, v)?,
                "constants.C" => cfg.constants.big_c = Some(parse_num(line, key, v)?),
                "constants.K" => cfg.constants.k = Some(parse_num(line, key, v)?),
                "constants.epsilon" => cfg.constants.epsilon = Some(parse_num(line, key, v)?),
                "constants.J" => cfg.constants.j = Some(parse_num(line, key, v)?),
                "constants.D" => cfg.constants.d = Some(parse_num(line, key, v)?),
                "constants.T" => cfg.constants.t = Some(parse_num(line, key, v)?),
                "constants.sweep" => {
                    let parts: Vec<&str> = v.split(':').collect();
                    if parts.len() != 3 {
                        return Err(Error::ConfigAt {
                            line,
                            msg: format!("constants.sweep expects `start:end:count`, got `{v}`"),
                        });
                    }
                    cfg.constants.sweep = Some((
                        parse_num(line, key, parts[0])?,
                        parse_num(line, key, parts[1])?,
                        parse_num(line, key, parts[2])?,
                    ));
                }
                other => {
                    return Err(Error::ConfigAt {
                        line,
                        msg: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        if let Some((line, n)) = chain_sites {
            if cfg
                .raw
                .lines()
                .any(|l| l.trim_start().starts_with("model.n_sites"))
                && n != cfg.model.n_sites
            {
                return Err(Error::ConfigAt {
                    line,
                    msg: format!(
                        "chain.n_sites = {n} disagrees with model.n_sites = {}",
                        cfg.model.n_sites
                    ),
                });
            }
            cfg.model.n_sites = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let m = &self.model;
        if m.n_sites == 0 {
            return Err(Error::Config("model.n_sites must be at least 1".into()));
        }
        if !(m.q > 1.0 && m.q <= 2.0) {
            return Err(Error::Config(format!("model.q must lie in (1, 2], got {}", m.q)));
        }
        match m.phase_kind.as_str() {
            "power" => {
                if !(m.phase_t > 1.0) {
                    return Err(Error::Config(format!(
                        "model.phase.t must exceed 1, got {}",
                        m.phase_t
                    )));
                }
            }
            other => {
                return Err(Error::Config(format!(
                    "config files support phase kind `power`; custom phases are library-only (got `{other}`)"
                )))
            }
        }
        match m.interaction_kind.as_str() {
            "power_difference" => {
                if !(m.interaction_r >= 1.0) {
                    return Err(Error::Config(format!(
                        "model.interaction.r must be at least 1, got {}",
                        m.interaction_r
                    )));
                }
            }
            "quadratic" => {}
            other => {
                return Err(Error::Config(format!(
                    "config files support interaction kinds `power_difference` and `quadratic` (got `{other}`)"
                )))
            }
        }
        if m.coupling_j.abs() >= 1.0 {
            return Err(Error::Config(format!(
                "model.coupling.J must have magnitude below 1, got {}",
                m.coupling_j
            )));
        }
        if !(self.grid.l > 0.0) {
            return Err(Error::Config(format!("grid.L must be positive, got {}", self.grid.l)));
        }
        for b in [m.boundary_left, m.boundary_right] {
            if let BoundaryValue::Fixed(v) = b {
                if v.abs() > self.grid.l {
                    return Err(Error::Config(format!(
                        "boundary value {v} lies outside the truncation interval [-{l}, {l}]",
                        l = self.grid.l
                    )));
                }
            }
        }
        if let Some(k) = self.run.k {
            if k < 1 || k > m.n_sites {
                return Err(Error::Config(format!(
                    "run.k = {k} is outside the chain 1..={}",
                    m.n_sites
                )));
            }
        }
        if !(self.run.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "run.epsilon must be positive, got {}",
                self.run.epsilon
            )));
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<LatticeModel> {
        let m = &self.model;
        let phase = PhaseSpec::power(m.phase_t)?;
        let interaction = match m.interaction_kind.as_str() {
            "quadratic" => InteractionSpec::Quadratic,
            _ => InteractionSpec::power_difference(m.interaction_r)?,
        };
        let couplings = match &m.coupling_table {
            Some(t) => Couplings::Table(t.clone()),
            None => Couplings::Uniform(m.coupling_j),
        };
        let boundary = BoundaryCondition { left: m.boundary_left, right: m.boundary_right };
        let model = LatticeModel::with_options(
            m.n_sites,
            m.q,
            phase,
            interaction,
            couplings,
            boundary,
            m.edge_convention,
            1.0,
        )?;
        Ok(model)
    }

    pub fn build_grid(&self) -> Result<Arc<Grid>> {
        let grid = build_grid_with_budget(
            self.grid.l,
            self.grid.m,
            self.grid.scheme,
            self.grid.element_budget,
        )?;
        self.build_model()?.validate_interaction_on(&grid)?;
        Ok(grid)
    }

    /// Window center: configured or the middle of the chain.
    pub fn window_center(&self) -> usize {
        self.run.k.unwrap_or((self.model.n_sites + 1) / 2)
    }

    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.raw.as_bytes());
        hex::encode(hasher.finalize())
    }
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::ConfigAt {
            line,
            msg: format!("key `{key}` expects a boolean, got `{other}`"),
        }),
    }
}
