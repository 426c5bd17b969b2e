use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ball_ergodic::ergodicity::{FunctionDictionary, TestFunction, DEFAULT_EPSILON, DEFAULT_J_MAX, DEFAULT_TOL};
use ball_ergodic::geometry::Point;
use ball_ergodic::interpolation::NodeSequence;
use ball_ergodic::linalg::vector::basis;
use ball_ergodic::maps::{GridSpec, HoloMap, DEFAULT_DIRECTIONS, DEFAULT_LEVELS};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Everything one run needs. Every field except the command-specific inputs
/// has a default, and the canonical form prints all of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<HoloMap>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_j_max")]
    pub j_max: usize,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub dictionary: DictionaryChoice,
    /// Rows of the triangular array built by `witness`.
    #[serde(default = "default_rows")]
    pub rows: usize,
    /// Starting point for `iterate`; the origin when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<Complex64>>,
    /// The two points compared by `metric`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<Complex64>>,
    /// Bergman ball radius for the membership test in `metric`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Inline node sequence for `interp`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Vec<Vec<Complex64>>>,
    /// Node sequence CSV for `interp`, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence_csv: Option<PathBuf>,
    /// Ratio bound `a` tested by `interp`.
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub levels: u32,
    pub directions: usize,
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            levels: DEFAULT_LEVELS,
            directions: DEFAULT_DIRECTIONS,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DictionaryChoice {
    /// Constants, coordinates, low-degree monomials and involution factors.
    #[default]
    Standard,
    /// The constant 1 and the coordinate functions.
    Coordinates,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_j_max() -> usize {
    DEFAULT_J_MAX
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_rows() -> usize {
    20
}

fn default_ratio() -> f64 {
    0.5
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub j_max: Option<usize>,
    pub grid_levels: Option<u32>,
    pub dirs: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Parses the JSON text; errors name the offending field path.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("field `{path}`: {}", e.inner())
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if let (Some(csv), Some(dir)) = (&cfg.sequence_csv, path.parent()) {
            if csv.is_relative() {
                cfg.sequence_csv = Some(dir.join(csv));
            }
        }
        Ok(cfg)
    }

    /// Pretty JSON with every default filled in; `parse(canonical(c)) == c`.
    pub fn canonical(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(t) = o.tol {
            self.tol = t;
        }
        if let Some(j) = o.j_max {
            self.j_max = j;
        }
        if let Some(l) = o.grid_levels {
            self.grid.levels = l;
        }
        if let Some(d) = o.dirs {
            self.grid.directions = d;
        }
        if let Some(s) = o.seed {
            self.grid.seed = s;
        }
        if o.out.is_some() {
            self.out = o.out.clone();
        }
        self.check()
    }

    fn check(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            bail!("field `tol`: must be positive, got {}", self.tol);
        }
        if self.j_max == 0 {
            bail!("field `j_max`: must be at least 1");
        }
        if !(1..=52).contains(&self.grid.levels) {
            bail!("field `grid.levels`: must lie in 1..=52, got {}", self.grid.levels);
        }
        if self.grid.directions == 0 {
            bail!("field `grid.directions`: must be at least 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            bail!("field `epsilon`: must lie in (0, 1), got {}", self.epsilon);
        }
        if self.rows == 0 {
            bail!("field `rows`: must be at least 1");
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            bail!("field `ratio`: must lie in (0, 1), got {}", self.ratio);
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) {
                bail!("field `radius`: must be positive, got {r}");
            }
        }
        if self.sequence.is_some() && self.sequence_csv.is_some() {
            bail!("fields `sequence` and `sequence_csv` are mutually exclusive");
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::geometric(self.grid.levels, self.grid.directions, self.grid.seed)
    }

    pub fn require_map(&self, command: &str) -> Result<&HoloMap> {
        self.map
            .as_ref()
            .with_context(|| format!("field `map`: required by `{command}`"))
    }

    pub fn dictionary(&self, n: usize) -> FunctionDictionary {
        match self.dictionary {
            DictionaryChoice::Standard => FunctionDictionary::standard(n),
            DictionaryChoice::Coordinates => {
                let mut d = FunctionDictionary::new();
                d.push("one", TestFunction::Constant(Complex64::new(1.0, 0.0)))
                    .expect("constant entry");
                for k in 0..n {
                    d.push(format!("z{}", k + 1), TestFunction::Coordinate(basis(n, k)))
                        .expect("coordinate entry");
                }
                d
            }
        }
    }

    pub fn start_point(&self, n: usize) -> Result<Point> {
        match &self.point {
            None => Ok(Point::origin(n)),
            Some(p) if p.len() != n => bail!("field `point`: has {} coordinates, map acts on B_{n}", p.len()),
            Some(p) => Point::new(p.clone()).map_err(|e| anyhow::anyhow!("field `point`: {e}")),
        }
    }

    pub fn metric_points(&self) -> Result<(Point, Point)> {
        let [z, w] = self.points.as_slice() else {
            bail!("field `points`: `metric` needs exactly two points, got {}", self.points.len());
        };
        let p = |i: usize, v: &Vec<Complex64>| {
            Point::new(v.clone()).map_err(|e| anyhow::anyhow!("field `points[{i}]`: {e}"))
        };
        Ok((p(0, z)?, p(1, w)?))
    }

    pub fn node_sequence(&self) -> Result<NodeSequence> {
        if let Some(rows) = &self.sequence {
            let pts = rows
                .iter()
                .enumerate()
                .map(|(i, v)| Point::new(v.clone()).map_err(|e| anyhow::anyhow!("field `sequence[{i}]`: {e}")))
                .collect::<Result<Vec<_>>>()?;
            return NodeSequence::new(pts, "config").map_err(|e| anyhow::anyhow!("field `sequence`: {e}"));
        }
        let Some(path) = &self.sequence_csv else {
            bail!("field `sequence`: `interp` needs `sequence` or `sequence_csv`");
        };
        let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        NodeSequence::read_csv(file, path.display().to_string()).with_context(|| format!("reading {}", path.display()))
    }
}
