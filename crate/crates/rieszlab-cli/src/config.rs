//! JSON experiment configurations, one struct per subcommand.

use crate::CliError;
use rieszlab::lattice::Lattice;
use rieszlab::transport::{GridMarginal, PiecewiseDensity};
use rieszlab::{CubeDomain, PointConfiguration, RieszKernel};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Parses a config document into `T`, reporting the JSON path of the first bad field.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let field = match inner.classify() {
            serde_json::error::Category::Syntax | serde_json::error::Category::Eof => "<document>".to_string(),
            _ if path == "." => "<root>".to_string(),
            _ => path,
        };
        CliError::config(field, inner.to_string())
    })
}

fn check(ok: bool, field: &str, msg: impl Into<String>) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::config(field, msg))
    }
}

fn positive(x: f64, field: &str) -> Result<(), CliError> {
    check(x.is_finite() && x > 0.0, field, format!("must be a positive finite number, got {x}"))
}

/// Resolves a path in a config relative to the config file's directory.
pub fn resolve(base: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub s: f64,
    pub d: usize,
}

impl KernelSpec {
    pub fn build(&self, field: &str) -> Result<RieszKernel, CliError> {
        check(self.d >= 1, &format!("{field}.d"), "dimension must be at least 1")?;
        check(
            self.s.is_finite() && self.s > 0.0 && self.s < self.d as f64,
            &format!("{field}.s"),
            format!("need 0 < s < d = {}, got {}", self.d, self.s),
        )?;
        RieszKernel::new(self.s, self.d).map_err(|e| CliError::config(format!("{field}.s"), e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeSpec {
    pub side: f64,
    /// Defaults to the cube [0, side)^d.
    #[serde(default)]
    pub center: Option<Vec<f64>>,
}

impl CubeSpec {
    pub fn build(&self, d: usize, field: &str) -> Result<CubeDomain, CliError> {
        positive(self.side, &format!("{field}.side"))?;
        match &self.center {
            Some(c) => {
                check(c.len() == d, &format!("{field}.center"), format!("expected {d} coordinates, got {}", c.len()))?;
                CubeDomain::new(c.clone(), self.side).map_err(|e| CliError::config(format!("{field}.center"), e.to_string()))
            }
            None => CubeDomain::anchored(d, self.side).map_err(|e| CliError::config(field, e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl DensitySpec {
    pub fn build(&self, field: &str) -> Result<PiecewiseDensity, CliError> {
        PiecewiseDensity::new(self.breaks.clone(), self.values.clone()).map_err(|e| CliError::config(field, e.to_string()))
    }
}

/// A discrete marginal.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalSpec {
    UniformInterval { a: f64, b: f64, m: usize },
    UniformCube { side: f64, per_side: usize, #[serde(default)] center: Option<Vec<f64>> },
    Density { breaks: Vec<f64>, values: Vec<f64>, m: usize },
    Sites { sites: Vec<Vec<f64>>, weights: Vec<f64>, #[serde(default)] cell: Option<f64> },
    Csv { path: String, #[serde(default)] cell: Option<f64> },
}

impl MarginalSpec {
    pub fn build(&self, d: usize, base: &Path, field: &str) -> Result<GridMarginal, CliError> {
        let err = |sub: &str| {
            let f = format!("{field}.{sub}");
            move |e: rieszlab::Error| CliError::config(f.clone(), e.to_string())
        };
        let g = match self {
            MarginalSpec::UniformInterval { a, b, m } => {
                check(*m >= 1, &format!("{field}.uniform_interval.m"), "need at least one site")?;
                check(a < b, &format!("{field}.uniform_interval.b"), "need a < b")?;
                GridMarginal::uniform_interval(*a, *b, *m).map_err(err("uniform_interval"))?
            }
            MarginalSpec::UniformCube { side, per_side, center } => {
                let cube = CubeSpec { side: *side, center: center.clone() }.build(d, &format!("{field}.uniform_cube"))?;
                check(*per_side >= 1, &format!("{field}.uniform_cube.per_side"), "need at least one site per side")?;
                GridMarginal::uniform_cube(&cube, *per_side).map_err(err("uniform_cube"))?
            }
            MarginalSpec::Density { breaks, values, m } => {
                let rho = DensitySpec { breaks: breaks.clone(), values: values.clone() }.build(&format!("{field}.density"))?;
                check(*m >= 1, &format!("{field}.density.m"), "need at least one site")?;
                GridMarginal::from_density(&rho, *m).map_err(err("density"))?
            }
            MarginalSpec::Sites { sites, weights, cell } => {
                GridMarginal::new(sites.clone(), weights.clone(), *cell).map_err(err("sites"))?
            }
            MarginalSpec::Csv { path, cell } => GridMarginal::load(resolve(base, path), *cell).map_err(err("csv.path"))?,
        };
        check(g.dim() == d, field, format!("marginal has dimension {}, kernel has d = {d}", g.dim()))?;
        Ok(g)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub basis: Option<Vec<Vec<f64>>>,
    /// Path to a `{name, basis}` JSON file.
    #[serde(default)]
    pub file: Option<String>,
}

impl LatticeSpec {
    pub fn build(&self, d: usize, base: &Path, field: &str) -> Result<Lattice, CliError> {
        let l = match (&self.file, &self.basis, &self.name) {
            (Some(f), None, None) => {
                Lattice::load(&resolve(base, f)).map_err(|e| CliError::config(format!("{field}.file"), e.to_string()))?
            }
            (None, Some(b), name) => Lattice::normalized(name.clone().unwrap_or_else(|| "custom".into()), b.clone())
                .map_err(|e| CliError::config(format!("{field}.basis"), e.to_string()))?,
            (None, None, Some(n)) => Lattice::by_name(n, d).map_err(|e| CliError::config(format!("{field}.name"), e.to_string()))?,
            _ => return Err(CliError::config(field, "give exactly one of `name`, `basis` (with optional name) or `file`")),
        };
        check(l.dim() == d, field, format!("lattice has dimension {}, kernel has d = {d}", l.dim()))?;
        Ok(l)
    }
}

pub fn points(d: usize, pts: &[Vec<f64>], field: &str) -> Result<PointConfiguration, CliError> {
    for (i, p) in pts.iter().enumerate() {
        check(p.len() == d, &format!("{field}[{i}]"), format!("expected {d} coordinates, got {}", p.len()))?;
        check(p.iter().all(|x| x.is_finite()), &format!("{field}[{i}]"), "coordinates must be finite")?;
    }
    PointConfiguration::new(d, pts.to_vec()).map_err(|e| CliError::config(field, e.to_string()))
}

/// Reads points from a CSV file with one coordinate per column.
pub fn points_csv(d: usize, path: &Path, field: &str) -> Result<PointConfiguration, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::config(field, e.to_string()))?;
    let mut pts = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::config(field, e.to_string()))?;
        let row: Result<Vec<f64>, _> = rec.iter().map(|x| x.parse::<f64>()).collect();
        match row {
            Ok(r) => pts.push(r),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(CliError::config(field, format!("row {}: {e}", i + 1))),
        }
    }
    points(d, &pts, field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    Jellium,
    Ueg,
    #[default]
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub kernel: KernelSpec,
    /// Defaults to [0, N^{1/d})^d.
    #[serde(default)]
    pub domain: Option<CubeSpec>,
    #[serde(default)]
    pub points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub points_csv: Option<String>,
    #[serde(default)]
    pub mode: EnergyKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub kernel: KernelSpec,
    pub ns: Vec<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
    #[serde(default)]
    pub anneal_stages: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// ε for the separation check in d ≥ 3; defaults to d − s when admissible.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Also write `<name>.points.csv` with the minimizers.
    #[serde(default)]
    pub write_points: bool,
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check(!self.ns.is_empty(), "ns", "need at least one N")?;
        for (i, &n) in self.ns.iter().enumerate() {
            check(n >= 1, &format!("ns[{i}]"), "N must be at least 1")?;
        }
        if let Some(r) = self.restarts {
            check(r >= 1, "restarts", "need at least one restart")?;
        }
        if let Some(t) = self.tolerance {
            positive(t, "tolerance")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSpec {
    Ewald,
    Windowed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub kernel: KernelSpec,
    pub lattice: LatticeSpec,
    #[serde(default)]
    pub method: Option<MethodSpec>,
    /// Window multiples of the cubic period for the windowed method.
    #[serde(default)]
    pub windows: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MmotConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub kernel: KernelSpec,
    pub n: usize,
    pub marginal: MarginalSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monotone1dConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub s: f64,
    pub ns: Vec<usize>,
    /// Defaults to the uniform density on [0, 1].
    #[serde(default)]
    pub density: Option<DensitySpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwissCheeseConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub d: usize,
    pub cube: CubeSpec,
    pub ladder: Vec<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub seed_budget: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PackingSource {
    /// A packing JSON file written by `swiss-cheese`.
    File(String),
    Generate { cube: CubeSpec, ladder: Vec<f64>, #[serde(default)] seed_budget: Option<usize> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PointSource {
    Explicit(Vec<Vec<f64>>),
    Csv(String),
    /// N points drawn uniformly in the packing cube.
    Random(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FgSplitConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub kernel: KernelSpec,
    pub packing: PackingSource,
    pub points: PointSource,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub c_const: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScanProblemSpec {
    Jellium {
        d: usize,
        #[serde(default)]
        restarts: Option<usize>,
        #[serde(default)]
        max_iterations: Option<usize>,
    },
    Ot { d: usize, marginal: MarginalSpec },
    Monotone { #[serde(default)] density: Option<DensitySpec> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub problem: ScanProblemSpec,
    pub n: usize,
    pub s_grid: Vec<f64>,
    /// Also evaluate on the grid with midpoints inserted.
    #[serde(default = "yes")]
    pub refine: bool,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub kernel: KernelSpec,
    #[serde(default)]
    pub jellium_ns: Option<Vec<usize>>,
    #[serde(default)]
    pub ot_ns: Option<Vec<usize>>,
    #[serde(default)]
    pub grid_per_side: Option<usize>,
    #[serde(default)]
    pub lattice: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub restarts: Option<usize>,
    #[serde(default)]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CellSpec {
    /// Conventional cubic cell of a named lattice.
    Lattice(String),
    Explicit {
        side: f64,
        points: Vec<Vec<f64>>,
        #[serde(default)]
        center: Option<Vec<f64>>,
        /// Reflect the cell through its lower faces first.
        #[serde(default)]
        reflect: bool,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub kernel: KernelSpec,
    pub cell: CellSpec,
    pub multiples: Vec<usize>,
}
