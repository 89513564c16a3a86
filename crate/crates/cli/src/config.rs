//! Run configuration: an optional config file overlaid by command-line flags, then
//! resolved against per-command defaults and validated before any solve.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use rotlattice::diagnostics::{ScanAxis, ScanConfig, Thresholds};
use rotlattice::eigensolver::{SolverOptions, DEFAULT_SEED, DEFAULT_TOL};
use rotlattice::hamiltonian::UNIT_MASS_SPACING;
use rotlattice::{LatticeGeometry, ModelKind, ModelParams, RotationCoupling};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const DEFAULT_LATTICE_SIZE: usize = 150;
pub const DEFAULT_EXTENT: f64 = 40.0;
pub const DEFAULT_FERMIONS: usize = 50;

#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    fn new(field: &str, reason: impl Into<String>) -> Self {
        ConfigError { field: field.to_string(), reason: reason.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid value for `{}`: {}", self.field, self.reason)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AxisKind {
    Mesh,
    #[serde(alias = "lattice")]
    #[value(alias = "lattice")]
    LatticeSize,
}

/// `NXxNY`, e.g. `150x100`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridSize {
    pub nx: usize,
    pub ny: usize,
}

impl FromStr for GridSize {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected NXxNY, got `{s}`"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad grid size `{s}`: {e}"));
        Ok(GridSize { nx: parse(a)?, ny: parse(b)? })
    }
}

impl TryFrom<String> for GridSize {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<GridSize> for String {
    fn from(g: GridSize) -> String {
        format!("{}x{}", g.nx, g.ny)
    }
}

/// Every run setting, all optional. Used both for flags and for the config file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// hubbard | continuum
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub ny: Option<usize>,
    /// Grid spacing (lattice constant d or mesh size h)
    #[arg(long, visible_aliases = ["h", "d"], allow_negative_numbers = true)]
    pub spacing: Option<f64>,
    /// Physical side length; sets nx = ny from the spacing when they are not given
    #[arg(long, allow_negative_numbers = true)]
    pub extent: Option<f64>,
    /// Hopping energy (lattice only)
    #[arg(long = "t", allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Trap frequency
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Rotation frequency
    #[arg(long, allow_negative_numbers = true)]
    pub bigomega: Option<f64>,
    /// Ascending rotation frequencies for `sweep`
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub bigomegas: Option<Vec<f64>>,
    /// lz-matched | bare-k
    #[arg(long)]
    pub coupling: Option<RotationCoupling>,
    #[arg(long)]
    pub n_states: Option<usize>,
    #[arg(long)]
    pub n_fermions: Option<usize>,
    /// Eigenstate index for `currents` and `density`
    #[arg(long)]
    pub state: Option<usize>,
    /// Also write each member of the selected multiplet (`density`)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub members: Option<bool>,
    /// Relative residual target of the eigensolver
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps_e: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps_rho: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub eps_b: Option<f64>,
    /// Boundary width in sites
    #[arg(long)]
    pub margin: Option<usize>,
    /// Refinement axis for `contain`
    #[arg(long, value_enum)]
    pub axis: Option<AxisKind>,
    /// Mesh levels for `contain --axis mesh`
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub spacings: Option<Vec<f64>>,
    /// Grid levels for `contain --axis lattice-size`, e.g. 100x100,150x150
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<GridSize>>,
    /// `lo,hi`: run an escape-threshold bisection instead of a refinement scan
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub bracket: Option<Vec<f64>>,
    /// Bracket width at which the bisection stops
    #[arg(long, allow_negative_numbers = true)]
    pub bisect_tol: Option<f64>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        Overrides { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Overrides {
    /// Fields set in `top` win.
    pub fn overlay(self, top: Overrides) -> Overrides {
        overlay_fields!(self, top;
            model, nx, ny, spacing, extent, t, omega, bigomega, bigomegas, coupling, n_states,
            n_fermions, state, members, tol, seed, output_dir, eps_e, eps_rho, eps_b, margin, axis,
            spacings, sizes, bracket, bisect_tol)
    }

    /// Reads a JSON object or `key = value` lines (`#` comments, comma-separated lists).
    pub fn from_file(path: &Path) -> Result<Overrides, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        let map = if text.trim_start().starts_with('{') {
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(ConfigError::new("config", "JSON config must be an object")),
                Err(e) => return Err(ConfigError::new("config", format!("bad JSON: {e}"))),
            }
        } else {
            parse_key_values(&text)?
        };
        let map: Map<String, Value> = map.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect();
        serde_json::from_value(Value::Object(map)).map_err(|e| ConfigError::new("config", e.to_string()))
    }
}

const LIST_KEYS: [&str; 4] = ["bigomegas", "spacings", "sizes", "bracket"];

fn scalar_value(raw: &str) -> Value {
    serde_json::from_str::<Value>(raw)
        .ok()
        .filter(|v| !v.is_object() && !v.is_array())
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn parse_key_values(text: &str) -> Result<Map<String, Value>, ConfigError> {
    let mut map = Map::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, raw) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::new("config", format!("line {}: expected key = value", n + 1)))?;
        let key = key.trim().replace('-', "_");
        let raw = raw.trim();
        let value = if LIST_KEYS.contains(&key.as_str()) {
            Value::Array(raw.split(',').map(|v| scalar_value(v.trim())).collect())
        } else {
            scalar_value(raw)
        };
        map.insert(key, value);
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Spectrum,
    Density,
    Currents,
    Fermions,
    Contain,
    Sweep,
}

impl CommandKind {
    pub fn label(self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::Density => "density",
            CommandKind::Currents => "currents",
            CommandKind::Fermions => "fermions",
            CommandKind::Contain => "contain",
            CommandKind::Sweep => "sweep",
        }
    }
}

/// Fully resolved and validated settings; embedded in every JSON sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub model: ModelKind,
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub t: f64,
    pub omega: f64,
    pub bigomega: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bigomegas: Option<Vec<f64>>,
    pub coupling: RotationCoupling,
    pub n_states: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_fermions: Option<usize>,
    pub state: usize,
    pub members: bool,
    pub tol: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub thresholds: Thresholds,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanAxis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bisect_tol: Option<f64>,
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be positive, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be non-negative, got {v}")))
    }
}

fn grid_dim(field: &str, n: usize) -> Result<usize, ConfigError> {
    if n >= 2 {
        Ok(n)
    } else {
        Err(ConfigError::new(field, format!("must be at least 2, got {n}")))
    }
}

impl RunConfig {
    pub fn resolve(command: CommandKind, o: Overrides) -> Result<RunConfig, ConfigError> {
        let model = o.model.unwrap_or(ModelKind::Hubbard);
        let spacing = positive("spacing", o.spacing.unwrap_or(UNIT_MASS_SPACING))?;
        let t = positive("t", o.t.unwrap_or(1.0))?;
        let omega = non_negative("omega", o.omega.unwrap_or(0.1))?;
        let bigomega = non_negative("bigomega", o.bigomega.unwrap_or(0.0))?;

        let (nx, ny) = match (o.nx, o.ny, o.extent) {
            (None, None, extent) if extent.is_some() || model == ModelKind::DiscretizedContinuum => {
                let extent = positive("extent", extent.unwrap_or(DEFAULT_EXTENT))?;
                let n = (extent / spacing).round() as usize + 1;
                (grid_dim("extent", n)?, n)
            }
            (nx, ny, _) => {
                let nx = nx.or(ny).unwrap_or(DEFAULT_LATTICE_SIZE);
                let ny = ny.unwrap_or(nx);
                (grid_dim("nx", nx)?, grid_dim("ny", ny)?)
            }
        };
        let sites = nx * ny;

        let n_fermions = match command {
            CommandKind::Fermions => {
                let n = o.n_fermions.unwrap_or(DEFAULT_FERMIONS);
                if n == 0 || n > sites {
                    return Err(ConfigError::new("n_fermions", format!("need 1 <= n_fermions <= {sites}, got {n}")));
                }
                Some(n)
            }
            _ => None,
        };
        let state = o.state.unwrap_or(0);
        let default_states = match command {
            CommandKind::Spectrum => 12,
            CommandKind::Fermions => (n_fermions.unwrap_or(0) + 8).max(12),
            CommandKind::Density | CommandKind::Currents => (state + 5).max(8),
            CommandKind::Contain | CommandKind::Sweep => 4,
        };
        let n_states = o.n_states.unwrap_or(default_states).min(sites);
        if n_states == 0 {
            return Err(ConfigError::new("n_states", "must be at least 1"));
        }
        if let Some(n) = o.n_states {
            if n > sites {
                return Err(ConfigError::new("n_states", format!("grid has only {sites} sites, got {n}")));
            }
        }
        if state >= n_states {
            return Err(ConfigError::new("state", format!("must be below n_states = {n_states}, got {state}")));
        }

        let tol = positive("tol", o.tol.unwrap_or(DEFAULT_TOL))?;
        let defaults = Thresholds::default();
        let thresholds = Thresholds {
            energy: non_negative("eps_e", o.eps_e.unwrap_or(defaults.energy))?,
            density: non_negative("eps_rho", o.eps_rho.unwrap_or(defaults.density))?,
            boundary: non_negative("eps_b", o.eps_b.unwrap_or(defaults.boundary))?,
            margin: o.margin.unwrap_or(defaults.margin),
        };
        if thresholds.margin == 0 || 2 * thresholds.margin >= nx.min(ny) {
            return Err(ConfigError::new(
                "margin",
                format!("need 1 <= margin < {} for a {nx}x{ny} grid, got {}", nx.min(ny).div_ceil(2), thresholds.margin),
            ));
        }

        let bigomegas = match command {
            CommandKind::Sweep => {
                let list = o.bigomegas.ok_or_else(|| ConfigError::new("bigomegas", "sweep needs a list of values"))?;
                if list.is_empty() {
                    return Err(ConfigError::new("bigomegas", "sweep needs at least one value"));
                }
                for &v in &list {
                    non_negative("bigomegas", v)?;
                }
                if list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(ConfigError::new("bigomegas", "values must be strictly ascending"));
                }
                Some(list)
            }
            _ => None,
        };

        let bracket = match (command, o.bracket) {
            (CommandKind::Contain, Some(b)) => {
                if b.len() != 2 || b[0].partial_cmp(&b[1]) != Some(std::cmp::Ordering::Less) {
                    return Err(ConfigError::new("bracket", "expected `lo,hi` with lo < hi"));
                }
                non_negative("bracket", b[0])?;
                Some((b[0], b[1]))
            }
            _ => None,
        };
        let bisect_tol = match bracket {
            Some(_) => Some(positive("bisect_tol", o.bisect_tol.unwrap_or(1e-3))?),
            None => None,
        };

        let scan = match command {
            CommandKind::Contain if bracket.is_none() => {
                let axis = o.axis.unwrap_or(match model {
                    ModelKind::Hubbard => AxisKind::LatticeSize,
                    ModelKind::DiscretizedContinuum => AxisKind::Mesh,
                });
                Some(match axis {
                    AxisKind::Mesh => {
                        let spacings = o.spacings.unwrap_or_else(|| vec![UNIT_MASS_SPACING, 0.5, 0.25]);
                        if spacings.len() < 2 {
                            return Err(ConfigError::new("spacings", "need at least two levels"));
                        }
                        for &h in &spacings {
                            positive("spacings", h)?;
                        }
                        let extent = positive("extent", o.extent.unwrap_or(DEFAULT_EXTENT))?;
                        for &h in &spacings {
                            let n = (extent / h).round() as usize + 1;
                            if 2 * thresholds.margin >= n {
                                return Err(ConfigError::new("spacings", format!("level h = {h} gives only {n} sites per side")));
                            }
                        }
                        ScanAxis::Mesh { extent, spacings }
                    }
                    AxisKind::LatticeSize => {
                        let sizes = o.sizes.unwrap_or_else(|| {
                            vec![GridSize { nx: 100, ny: 100 }, GridSize { nx: 150, ny: 150 }]
                        });
                        if sizes.len() < 2 {
                            return Err(ConfigError::new("sizes", "need at least two levels"));
                        }
                        for s in &sizes {
                            if s.nx.min(s.ny) <= 2 * thresholds.margin {
                                return Err(ConfigError::new("sizes", format!("level {}x{} is too small for margin {}", s.nx, s.ny, thresholds.margin)));
                            }
                        }
                        ScanAxis::LatticeSize { spacing, sizes: sizes.iter().map(|s| (s.nx, s.ny)).collect() }
                    }
                })
            }
            _ => None,
        };

        Ok(RunConfig {
            command,
            model,
            nx,
            ny,
            spacing,
            t,
            omega,
            bigomega,
            bigomegas,
            coupling: o.coupling.unwrap_or_default(),
            n_states,
            n_fermions,
            state,
            members: o.members.unwrap_or(false),
            tol,
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            output_dir: o.output_dir.unwrap_or_else(|| PathBuf::from(".")),
            thresholds,
            scan,
            bracket,
            bisect_tol,
        })
    }

    pub fn params(&self) -> ModelParams {
        ModelParams {
            kind: self.model,
            t: self.t,
            omega: self.omega,
            bigomega: self.bigomega,
            coupling: self.coupling,
        }
    }

    pub fn geometry(&self) -> LatticeGeometry {
        LatticeGeometry::new(self.nx, self.ny, self.spacing).expect("validated")
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions::default().with_tol(self.tol).with_seed(self.seed)
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig { params: self.params(), n_states: self.n_states, solver: self.solver(), thresholds: self.thresholds }
    }

    /// `<command>_<model>_nx<..>_ny<..>_om<..>_Om<..>` with 4-decimal frequencies.
    pub fn stem(&self) -> String {
        let (nx, ny) = match &self.scan {
            Some(ScanAxis::LatticeSize { sizes, .. }) => sizes.iter().copied().max().unwrap_or((self.nx, self.ny)),
            Some(ScanAxis::Mesh { extent, spacings }) => {
                let h = spacings.iter().copied().fold(f64::INFINITY, f64::min);
                let n = (extent / h).round() as usize + 1;
                (n, n)
            }
            None => (self.nx, self.ny),
        };
        let om = match &self.bigomegas {
            Some(list) => format!("{:.4}-{:.4}", list[0], list[list.len() - 1]),
            None => match self.bracket {
                Some((lo, hi)) => format!("{lo:.4}-{hi:.4}"),
                None => format!("{:.4}", self.bigomega),
            },
        };
        format!(
            "{}_{}_nx{nx}_ny{ny}_om{:.4}_Om{om}",
            self.command.label(),
            self.model.label(),
            self.omega
        )
    }
}
