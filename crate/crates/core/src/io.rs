//! Point-set files and experiment configuration.
//!
//! Point files are CSV with two numeric columns. An optional header names
//! the coordinates: `re,im` (default), `r,theta` (radians) or
//! `r,theta_deg`. Lines starting with `#` are ignored.

use log::info;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disc::{DiscPoint, QWeight};
use crate::error::{Error, Result};
use crate::extremal::{PointSet, DEFAULT_EXHAUSTIVE_BUDGET};
use crate::models::HardyModel;
use crate::recovery::PIndex;
use crate::stability::{Budgets, PolarGrid};

/// Version stamped into every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFormat {
    Cartesian,
    Polar,
    PolarDegrees,
}

impl PointFormat {
    fn from_header(a: &str, b: &str) -> Option<Self> {
        match (a.to_ascii_lowercase().as_str(), b.to_ascii_lowercase().as_str()) {
            ("re", "im") | ("x", "y") => Some(PointFormat::Cartesian),
            ("r", "theta") => Some(PointFormat::Polar),
            ("r", "theta_deg") => Some(PointFormat::PolarDegrees),
            _ => None,
        }
    }

    fn point(self, a: f64, b: f64) -> Complex64 {
        match self {
            PointFormat::Cartesian => Complex64::new(a, b),
            PointFormat::Polar => Complex64::from_polar(a, b),
            PointFormat::PolarDegrees => Complex64::from_polar(a, b.to_radians()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointFile {
    pub format: PointFormat,
    /// Points in file order, duplicates removed (first occurrence kept).
    pub set: PointSet,
    pub duplicates: usize,
}

fn parse_err(line: u64, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Parses a point file. Points must satisfy `|z| < 1` unless
/// `allow_closure` admits the unit circle as well.
pub fn parse_point_set(text: &str, label: &str, allow_closure: bool) -> Result<PointFile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let line_of = |pos: Option<&csv::Position>| {
        pos.map_or(0, |p| {
            // the reported offset can precede skipped blank and comment lines
            let bytes = text.as_bytes();
            let mut at = (p.byte() as usize).min(bytes.len());
            while at < bytes.len() {
                match bytes[at] {
                    b'\n' | b'\r' => at += 1,
                    b'#' => {
                        while at < bytes.len() && bytes[at] != b'\n' {
                            at += 1;
                        }
                    }
                    _ => break,
                }
            }
            bytes[..at].iter().filter(|&&c| c == b'\n').count() as u64 + 1
        })
    };
    let mut format = None;
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(line_of(e.position()), e.to_string()))?;
        let line = line_of(record.position());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        let (a, b) = (&record[0], &record[1]);
        let nums = (a.parse::<f64>(), b.parse::<f64>());
        let (x, y) = match nums {
            (Ok(x), Ok(y)) => (x, y),
            _ if format.is_none() && points.is_empty() => {
                format = Some(PointFormat::from_header(a, b).ok_or_else(|| {
                    parse_err(line, format!("unrecognized header '{a},{b}'"))
                })?);
                continue;
            }
            _ => return Err(parse_err(line, format!("non-numeric row '{a},{b}'"))),
        };
        if !(x.is_finite() && y.is_finite()) {
            return Err(parse_err(line, "non-finite coordinate"));
        }
        let fmt = *format.get_or_insert(PointFormat::Cartesian);
        if fmt != PointFormat::Cartesian && x < 0.0 {
            return Err(parse_err(line, format!("negative radius {x}")));
        }
        let z = fmt.point(x, y);
        let p = DiscPoint::new(z).map_err(|e| parse_err(line, e.to_string()))?;
        if !allow_closure && !p.is_interior() {
            return Err(parse_err(line, format!("{z} is not inside the open unit disc")));
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(parse_err(0, "no points"));
    }
    let (set, duplicates) = PointSet::with_closure_counted(points, label)?;
    if duplicates > 0 {
        info!("{label}: removed {duplicates} duplicate point(s)");
    }
    Ok(PointFile {
        format: format.unwrap_or(PointFormat::Cartesian),
        set,
        duplicates,
    })
}

/// Writes points as `re,im` rows with 17 significant digits.
pub fn write_point_set(points: &[Complex64]) -> String {
    let mut out = String::from("re,im\n");
    for z in points {
        out.push_str(&format!("{},{}\n", fmt17(z.re), fmt17(z.im)));
    }
    out
}

/// Scientific notation with 17 significant digits (round-trips).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    pub n_max: usize,
    pub s_max: u32,
    pub exhaustive: u64,
    pub grid: GridConfig,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        let b = Budgets::default();
        BudgetConfig {
            n_max: b.n_max,
            s_max: b.s_max,
            exhaustive: b.exhaustive as u64,
            grid: GridConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub radii: usize,
    pub angles: usize,
    pub rim: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = PolarGrid::default();
        GridConfig {
            radii: g.radii,
            angles: g.angles,
            rim: g.rim,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Exhaustive while within budget, greedy beyond.
    Auto,
    Exhaustive,
    Greedy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtremalConfig {
    pub n_max: usize,
    pub budget: u64,
    pub method: MethodChoice,
}

impl Default for ExtremalConfig {
    fn default() -> Self {
        ExtremalConfig {
            n_max: 8,
            budget: DEFAULT_EXHAUSTIVE_BUDGET as u64,
            method: MethodChoice::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    /// Build an envelope from the extremal records and report `phi(eps)`.
    pub envelope: bool,
    /// Extend the envelope past its horizon by this power law.
    pub power_law_sigma: Option<f64>,
    /// Fit `M_n <= C n^{-sigma}` from this `n` on and report exponents.
    pub rate_fit_n_min: Option<usize>,
    pub r_max: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            envelope: false,
            power_law_sigma: None,
            rate_fit_n_min: None,
            r_max: crate::stability::DEFAULT_R_MAX,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverConfig {
    pub probe_radius: f64,
    pub probe_count: usize,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        RecoverConfig {
            probe_radius: 0.9,
            probe_count: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniquenessConfig {
    pub probe: DiscPoint,
}

impl Default for UniquenessConfig {
    fn default() -> Self {
        UniquenessConfig {
            probe: DiscPoint::ORIGIN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub r_list: Vec<f64>,
    /// Stolz vertices as angles on the circle.
    pub stolz_vertices: Vec<f64>,
    pub stolz_k: f64,
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        DiagnoseConfig {
            r_list: vec![0.5, 0.8, 0.9],
            stolz_vertices: vec![0.0],
            stolz_k: 1.0,
        }
    }
}

/// Everything a subcommand needs besides the point file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub p: PIndex,
    #[serde(alias = "R")]
    pub radius: f64,
    pub eps_list: Vec<f64>,
    pub budgets: BudgetConfig,
    /// Angles of the boundary zeros of the weight; empty for `q ≡ 1`.
    pub q_anchors: Vec<f64>,
    pub seed: u64,
    pub model: Option<HardyModel>,
    pub extremal: ExtremalConfig,
    pub stability: StabilityConfig,
    pub recover: RecoverConfig,
    pub uniqueness: UniquenessConfig,
    pub diagnose: DiagnoseConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            p: PIndex::TWO,
            radius: 0.5,
            eps_list: vec![0.1, 0.01],
            budgets: BudgetConfig::default(),
            q_anchors: Vec::new(),
            seed: 0,
            model: None,
            extremal: ExtremalConfig::default(),
            stability: StabilityConfig::default(),
            recover: RecoverConfig::default(),
            uniqueness: UniquenessConfig::default(),
            diagnose: DiagnoseConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses and checks field types and basic ranges. Module-specific
    /// ranges (such as admissible `R`) are checked where they are used.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line() as u64,
            msg: e.to_string(),
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parse { line: 0, msg });
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        if !self.radius.is_finite() {
            return bad("radius must be finite".into());
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return bad(format!("eps_list entries must be positive, got {e}"));
        }
        if let Some(t) = self.q_anchors.iter().find(|t| !t.is_finite()) {
            return bad(format!("non-finite anchor angle {t}"));
        }
        let g = &self.budgets.grid;
        if g.radii == 0 || g.angles == 0 || g.rim == 0 {
            return bad("grid sizes must be positive".into());
        }
        if self.budgets.n_max == 0 || self.budgets.s_max == 0 || self.extremal.n_max == 0 {
            return bad("n_max and s_max must be positive".into());
        }
        if let Some(m) = &self.model {
            m.validate()?;
        }
        Ok(())
    }

    pub fn q_weight(&self) -> Result<QWeight> {
        QWeight::from_angles(&self.q_anchors)
    }

    pub fn budgets(&self) -> Budgets {
        Budgets {
            n_max: self.budgets.n_max,
            s_max: self.budgets.s_max,
            exhaustive: self.budgets.exhaustive as u128,
            grid: PolarGrid {
                radii: self.budgets.grid.radii,
                angles: self.budgets.grid.angles,
                rim: self.budgets.grid.rim,
            },
        }
    }
}
