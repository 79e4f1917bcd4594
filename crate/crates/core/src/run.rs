//! Sweep configuration, orchestration and result files.
//!
//! A run sweeps one photon state family over lists of mean photon numbers and
//! detector efficiencies. Every sweep point gets its own random substream, so
//! `(config, seed)` fixes every output byte regardless of thread count.
//!
//! Files written to the output directory:
//!
//! * `results.csv`: one row per `(state, nbar, efficiency)`, Monte Carlo
//!   columns next to the discrete and continuous theory.
//! * `summary.json`: config, config hash, conventions and geometry moments.
//! * `frames.rle` (opt-in): every frame of the main experiments.
//! * `plot_<quantity>.csv` (opt-in): long-format series for plotting.
//!
//! Config precedence is built-in defaults, then the TOML file, then command
//! line flags.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::detector::{DetectorModel, FrameCounts};
use crate::error::{Error, Result};
use crate::estimators::{repeat_with_error_bars, Experiment, ExperimentSetup, RepetitionStats, Seeding};
use crate::geometry::PixelGrid;
use crate::modes::{pixel_probabilities, PlaneMoments, ProbabilityMethod, SpatialMode};
use crate::photon_stats::{PhotonNumberDistribution, PhotonState, TAIL_EPS};
use crate::rng::Substream;
use crate::theory::{continuous_predictions, discrete_moments, lossy_predictions, DiscreteMoments, Normalization};

/// Version tag written at the top of `results.csv`.
pub const RESULTS_SCHEMA: &str = "multipixel-results/1";
/// Version tag written at the top of `frames.rle`.
pub const FRAMES_SCHEMA: &str = "multipixel-frames/1";
/// Version tag of `summary.json`.
pub const SUMMARY_SCHEMA: &str = "multipixel-summary/1";

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Photon state family swept over `nbar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    Fock,
    Coherent,
    Thermal,
    Squeezed,
}

impl StateKind {
    pub const ALL: [StateKind; 4] = [Self::Fock, Self::Coherent, Self::Thermal, Self::Squeezed];

    /// The state of this family with mean photon number `nbar`.
    pub fn with_mean(self, nbar: f64) -> Result<PhotonState> {
        match self {
            Self::Fock => {
                if nbar < 0.0 || nbar.fract() != 0.0 || nbar > u64::MAX as f64 {
                    return Err(config_err(format!("Fock states need an integer photon number, got {nbar}")));
                }
                Ok(PhotonState::fock(nbar as u64))
            }
            Self::Coherent => PhotonState::coherent(nbar),
            Self::Thermal => PhotonState::thermal(nbar),
            Self::Squeezed => PhotonState::squeezed_with_mean(nbar),
        }
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Fock => "fock",
            Self::Coherent => "coherent",
            Self::Thermal => "thermal",
            Self::Squeezed => "squeezed",
        })
    }
}

impl FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| config_err(format!("unknown state `{s}` (fock, coherent, thermal, squeezed)")))
    }
}

/// Transverse mode family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ModeKind {
    #[default]
    Gaussian,
    HermiteGauss,
    /// Flat square of half-width `waist`.
    Uniform,
}

/// Which long-format plot series to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotQuantity {
    WidthNoise,
    PositionNoise,
    Means,
}

impl fmt::Display for PlotQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::WidthNoise => "width-noise",
            Self::PositionNoise => "position-noise",
            Self::Means => "means",
        })
    }
}

impl FromStr for PlotQuantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "width-noise" => Ok(Self::WidthNoise),
            "position-noise" => Ok(Self::PositionNoise),
            "means" => Ok(Self::Means),
            other => Err(config_err(format!(
                "unknown plot quantity `{other}` (width-noise, position-noise, means)"
            ))),
        }
    }
}

/// Everything a sweep needs. Field names double as TOML keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub state: StateKind,
    pub nbar: Vec<f64>,
    pub efficiency: Vec<f64>,
    /// Dark counts per second over the whole detector.
    pub dark_rate: f64,
    /// Exposure per frame in seconds.
    pub exposure: f64,
    /// Pixels per side (`2M`).
    pub pixels: usize,
    pub pixel_size: f64,
    pub mode: ModeKind,
    pub waist: f64,
    pub mode_n: u32,
    pub mode_m: u32,
    pub offset_x: f64,
    pub offset_y: f64,
    pub runs: usize,
    /// 0 disables the error-bar repetitions.
    pub repetitions: usize,
    pub seed: Option<u64>,
    pub prob_method: ProbabilityMethod,
    pub out: PathBuf,
    pub frames: bool,
    pub plots: Vec<PlotQuantity>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            state: StateKind::Coherent,
            nbar: vec![16.0, 64.0, 256.0],
            efficiency: vec![1.0],
            dark_rate: 10.0,
            exposure: 300e-9,
            pixels: 10,
            pixel_size: 1.0,
            mode: ModeKind::Gaussian,
            waist: 2.0,
            mode_n: 0,
            mode_m: 0,
            offset_x: 0.0,
            offset_y: 0.0,
            runs: 100_000,
            repetitions: 200,
            seed: None,
            prob_method: ProbabilityMethod::Amplitude,
            out: PathBuf::from("results"),
            frames: false,
            plots: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn grid(&self) -> Result<PixelGrid> {
        PixelGrid::with_side(self.pixels, self.pixel_size).map_err(|e| config_err(e.to_string()))
    }

    pub fn spatial_mode(&self) -> Result<SpatialMode> {
        let mode = match self.mode {
            ModeKind::Gaussian => SpatialMode::gaussian_at(self.waist, self.offset_x, self.offset_y),
            ModeKind::HermiteGauss => {
                SpatialMode::hermite_gauss_at(self.mode_n, self.mode_m, self.waist, self.offset_x, self.offset_y)
            }
            ModeKind::Uniform => SpatialMode::uniform(self.waist),
        };
        mode.map_err(|e| config_err(e.to_string()))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| config_err("a master seed is required"))
    }

    /// Checks every parameter before any sampling happens.
    pub fn validate(&self) -> Result<()> {
        if self.nbar.is_empty() {
            return Err(config_err("nbar list is empty"));
        }
        for &n in &self.nbar {
            if !(n > 0.0 && n.is_finite()) {
                return Err(config_err(format!("mean photon numbers must be positive, got {n}")));
            }
            self.state.with_mean(n).map_err(|e| config_err(e.to_string()))?;
        }
        if self.efficiency.is_empty() {
            return Err(config_err("efficiency list is empty"));
        }
        for &eta in &self.efficiency {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(config_err(format!("efficiencies must lie in (0, 1], got {eta}")));
            }
        }
        DetectorModel::new(1.0, self.dark_rate, self.exposure).map_err(|e| config_err(e.to_string()))?;
        self.grid()?;
        self.spatial_mode()?;
        if !(self.offset_x.is_finite() && self.offset_y.is_finite()) {
            return Err(config_err("mode offsets must be finite"));
        }
        if self.runs == 0 {
            return Err(config_err("runs must be at least 1"));
        }
        if self.repetitions == 1 {
            return Err(config_err("repetitions must be 0 (off) or at least 2"));
        }
        self.seed()?;
        Ok(())
    }

    /// `sha256:<hex>` over the canonical JSON form, ignoring `out`.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("out");
        }
        let digest = Sha256::digest(value.to_string().as_bytes());
        format!("sha256:{digest:x}")
    }
}

/// One sweep point. Length units follow `pixel_size`; widths are squared lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub state: StateKind,
    pub nbar: f64,
    pub efficiency: f64,
    pub runs: usize,
    pub mean_count: f64,
    pub width_mean_mc: f64,
    pub width_mean_mc_se: f64,
    pub width_mean_discrete: f64,
    pub width_mean_discrete_raw: f64,
    pub width_mean_continuous: f64,
    pub width_var_mc: f64,
    pub width_var_mc_se: f64,
    pub width_var_discrete: f64,
    pub width_var_discrete_raw: f64,
    pub width_var_continuous: f64,
    pub width_nvar_mc: f64,
    pub width_nvar_mc_se: f64,
    pub width_nvar_discrete: f64,
    pub width_nvar_continuous: f64,
    pub pos_x_var_mc: f64,
    pub pos_x_var_mc_se: f64,
    pub pos_x_var_discrete: f64,
    pub pos_x_var_discrete_raw: f64,
    pub pos_x_var_continuous: f64,
    pub pos_y_var_mc: f64,
    pub pos_y_var_mc_se: f64,
    pub pos_y_var_discrete: f64,
    pub pos_y_var_discrete_raw: f64,
    pub pos_y_var_continuous: f64,
    pub repetitions: usize,
    /// Spread (population std) of the per-repetition values.
    pub width_mean_rep_sd: Option<f64>,
    pub width_nvar_rep_sd: Option<f64>,
    pub pos_x_var_rep_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub config_hash: String,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {RESULTS_SCHEMA}")?;
        writeln!(out, "# config_hash {}", self.config_hash)?;
        writeln!(
            out,
            "# units: positions in pixel_size units, widths in squared units; nvar = Var[W]/mean(W)^2; _se = standard error; _rep_sd = spread over repetitions"
        )?;
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(result_columns())
                .map_err(|e| Error::Io(e.into()))?;
        }
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Io(e.into()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Parses text produced by [`ResultTable::write_csv`].
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(&format!("# {RESULTS_SCHEMA}")) {
            return Err(config_err(format!("not a {RESULTS_SCHEMA} table")));
        }
        let config_hash = lines
            .next()
            .and_then(|l| l.strip_prefix("# config_hash "))
            .ok_or_else(|| config_err("missing config hash line"))?
            .to_string();
        let body: String = text.lines().skip(3).map(|l| format!("{l}\n")).collect();
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let rows = reader
            .deserialize()
            .collect::<std::result::Result<Vec<ResultRow>, _>>()
            .map_err(|e| config_err(e.to_string()))?;
        Ok(Self { config_hash, rows })
    }
}

/// Column names of `results.csv`, in order.
pub fn result_columns() -> Vec<&'static str> {
    vec![
        "state",
        "nbar",
        "efficiency",
        "runs",
        "mean_count",
        "width_mean_mc",
        "width_mean_mc_se",
        "width_mean_discrete",
        "width_mean_discrete_raw",
        "width_mean_continuous",
        "width_var_mc",
        "width_var_mc_se",
        "width_var_discrete",
        "width_var_discrete_raw",
        "width_var_continuous",
        "width_nvar_mc",
        "width_nvar_mc_se",
        "width_nvar_discrete",
        "width_nvar_continuous",
        "pos_x_var_mc",
        "pos_x_var_mc_se",
        "pos_x_var_discrete",
        "pos_x_var_discrete_raw",
        "pos_x_var_continuous",
        "pos_y_var_mc",
        "pos_y_var_mc_se",
        "pos_y_var_discrete",
        "pos_y_var_discrete_raw",
        "pos_y_var_continuous",
        "repetitions",
        "width_mean_rep_sd",
        "width_nvar_rep_sd",
        "pos_x_var_rep_sd",
    ]
}

/// Conventions recorded in `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Conventions {
    pub variance_divisor: &'static str,
    pub error_bars: &'static str,
    pub zero_count_frames: &'static str,
    pub probability_method: ProbabilityMethod,
    pub escape_bin: &'static str,
    pub pixel_centers: &'static str,
    pub thermal_weights: &'static str,
    pub squeezed_weights: &'static str,
    pub lossy_joint_pmf: &'static str,
    pub dark_counts: &'static str,
    pub theory_columns: &'static str,
    pub truncation_tail: f64,
}

impl Conventions {
    fn new(method: ProbabilityMethod) -> Self {
        Self {
            variance_divisor: "R (population)",
            error_bars: "population standard deviation over repetitions",
            zero_count_frames: "retained with W = P = 0",
            probability_method: method,
            escape_bin: "1 - sum p, photons landing there are never recorded",
            pixel_centers: "x_i = -L + (i - 1/2) d, y_j = L - (j - 1/2) d",
            thermal_weights: "nbar^n / (1 + nbar)^(n + 1)",
            squeezed_weights: "sech(s) (2m)! / (4^m m!^2) tanh(s)^(2m) on n = 2m",
            lossy_joint_pmf: "reflectance raised to the lost count m",
            dark_counts: "Poisson, mean dark_rate * exposure / N per pixel",
            theory_columns: "p / sum p with detected-count moments; *_raw use p unchanged",
            truncation_tail: TAIL_EPS,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub pixels: usize,
    pub captured: f64,
    pub escape: f64,
    pub discrete: DiscreteMoments,
    pub continuous: PlaneMoments,
    pub f_over_d2_discrete: f64,
    pub f_over_d2_continuous: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub schema: &'static str,
    pub crate_version: &'static str,
    pub config_hash: String,
    pub config: RunConfig,
    pub conventions: Conventions,
    pub geometry: GeometryReport,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub table: ResultTable,
    pub summary: RunSummary,
}

/// Identifies a sweep point in `frames.rle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: u64,
    pub state: StateKind,
    pub nbar: f64,
    pub efficiency: f64,
}

/// Runs the sweep without touching the file system.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    sweep(config, None)
}

/// Runs the sweep and writes all outputs into `config.out`.
///
/// Nothing is moved into place until every file is complete, so a failed
/// run leaves no partial results behind.
pub fn run_to_dir(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let dir = &config.out;
    fs::create_dir_all(dir)?;

    let mut frames_file = None;
    let report = if config.frames {
        let tmp = NamedTempFile::new_in(dir)?;
        let mut writer = FrameWriter::new(BufWriter::new(tmp), config.pixels * config.pixels)?;
        let report = sweep(config, Some(&mut writer))?;
        let tmp = writer.into_inner()?.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        frames_file = Some(tmp);
        report
    } else {
        sweep(config, None)?
    };

    let mut staged = Vec::new();
    staged.push((stage(dir, report.table.to_csv_string()?.as_bytes())?, "results.csv".to_string()));
    let mut json = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    json.push('\n');
    staged.push((stage(dir, json.as_bytes())?, "summary.json".to_string()));
    for &q in &config.plots {
        staged.push((stage(dir, emit_plot_data(&report.table, q)?.as_bytes())?, format!("plot_{q}.csv")));
    }
    if let Some(tmp) = frames_file {
        staged.push((tmp, "frames.rle".to_string()));
    }
    for (tmp, name) in staged {
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644))?;
        }
        tmp.persist(dir.join(name)).map_err(|e| Error::Io(e.error))?;
    }
    Ok(report)
}

fn stage(dir: &Path, bytes: &[u8]) -> Result<NamedTempFile> {
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    Ok(tmp)
}

fn sweep(config: &RunConfig, mut frames: Option<&mut FrameWriter<BufWriter<NamedTempFile>>>) -> Result<RunReport> {
    config.validate()?;
    let grid = config.grid()?;
    let mode = config.spatial_mode()?;
    let probs = pixel_probabilities(&mode, &grid, config.prob_method)?;
    let dm = discrete_moments(&probs, &grid)?;
    let plane = mode.continuous_moments();
    let master = Substream::new(config.seed()?);

    let mut rows = Vec::with_capacity(config.nbar.len() * config.efficiency.len());
    for (ie, &eta) in config.efficiency.iter().enumerate() {
        for (inb, &nbar) in config.nbar.iter().enumerate() {
            let index = (ie * config.nbar.len() + inb) as u64;
            let stream = master.child(index);
            let state = config.state.with_mean(nbar)?;
            let detector = DetectorModel::new(eta, config.dark_rate, config.exposure)?;
            let setup = ExperimentSetup::new(grid, PhotonNumberDistribution::new(state), &probs, &detector, config.runs)?;

            let main = stream.child(0);
            let experiment = match frames.as_deref_mut() {
                Some(writer) => {
                    let fr = setup.frames(&main);
                    let point = SweepPoint {
                        index,
                        state: config.state,
                        nbar,
                        efficiency: eta,
                    };
                    writer.write_point(&point, &fr)?;
                    Experiment::from_frames(grid, &fr)?
                }
                None => setup.run(&main),
            };
            let mc = experiment.summarize()?;
            let reps = if config.repetitions >= 2 {
                Some(repeat_with_error_bars(&setup, config.repetitions, &stream.child(1), Seeding::Independent)?.0)
            } else {
                None
            };

            let moments = state.moments();
            let ren = lossy_predictions(&moments, eta, &dm, Normalization::Renormalized)?;
            let raw = lossy_predictions(&moments, eta, &dm, Normalization::Raw)?;
            let cont = continuous_predictions(&moments.thinned(eta)?, &mode)?;
            let sd = |f: fn(&RepetitionStats) -> f64| reps.as_ref().map(f);

            rows.push(ResultRow {
                state: config.state,
                nbar,
                efficiency: eta,
                runs: config.runs,
                mean_count: mc.mean_count,
                width_mean_mc: mc.width_mean.value,
                width_mean_mc_se: mc.width_mean.se,
                width_mean_discrete: ren.width.mean,
                width_mean_discrete_raw: raw.width.mean,
                width_mean_continuous: cont.width.mean,
                width_var_mc: mc.width_variance.value,
                width_var_mc_se: mc.width_variance.se,
                width_var_discrete: ren.width.variance,
                width_var_discrete_raw: raw.width.variance,
                width_var_continuous: cont.width.variance,
                width_nvar_mc: mc.width_normalized_variance.value,
                width_nvar_mc_se: mc.width_normalized_variance.se,
                width_nvar_discrete: ren.width.normalized_variance,
                width_nvar_continuous: cont.width.normalized_variance,
                pos_x_var_mc: mc.position_x_variance.value,
                pos_x_var_mc_se: mc.position_x_variance.se,
                pos_x_var_discrete: ren.position.variance_x,
                pos_x_var_discrete_raw: raw.position.variance_x,
                pos_x_var_continuous: cont.position.variance_x,
                pos_y_var_mc: mc.position_y_variance.value,
                pos_y_var_mc_se: mc.position_y_variance.se,
                pos_y_var_discrete: ren.position.variance_y,
                pos_y_var_discrete_raw: raw.position.variance_y,
                pos_y_var_continuous: cont.position.variance_y,
                repetitions: config.repetitions,
                width_mean_rep_sd: sd(|r| r.width_mean.variance.sqrt()),
                width_nvar_rep_sd: sd(|r| r.width_normalized_variance.variance.sqrt()),
                pos_x_var_rep_sd: sd(|r| r.position_x_variance.variance.sqrt()),
            });
        }
    }

    let config_hash = config.hash();
    let summary = RunSummary {
        schema: SUMMARY_SCHEMA,
        crate_version: env!("CARGO_PKG_VERSION"),
        config_hash: config_hash.clone(),
        config: config.clone(),
        conventions: Conventions::new(config.prob_method),
        geometry: GeometryReport {
            pixels: grid.len(),
            captured: probs.captured(),
            escape: probs.escape(),
            discrete: dm,
            continuous: plane,
            f_over_d2_discrete: dm.f * dm.captured / (dm.d * dm.d),
            f_over_d2_continuous: plane.f / (plane.d * plane.d),
        },
    };
    Ok(RunReport {
        table: ResultTable { config_hash, rows },
        summary,
    })
}

/// Plot series for one quantity as long-format CSV with columns
/// `series,nbar,value,error,discrete,continuous`.
///
/// Noise quantities are standard deviations (`sqrt` of the variance
/// columns). `error` is the repetition spread when repetitions ran and the
/// standard error otherwise.
pub fn emit_plot_data(table: &ResultTable, quantity: PlotQuantity) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::InvalidArgument("cannot plot an empty result table".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.into());
    w.write_record(["series", "nbar", "value", "error", "discrete", "continuous"])
        .map_err(io)?;
    for row in &table.rows {
        let (value, error, discrete, continuous) = match quantity {
            PlotQuantity::WidthNoise => {
                let v = row.width_nvar_mc.sqrt();
                let spread = row.width_nvar_rep_sd.unwrap_or(row.width_nvar_mc_se);
                (v, spread / (2.0 * v), row.width_nvar_discrete.sqrt(), row.width_nvar_continuous.sqrt())
            }
            PlotQuantity::PositionNoise => {
                let v = row.pos_x_var_mc.sqrt();
                let spread = row.pos_x_var_rep_sd.unwrap_or(row.pos_x_var_mc_se);
                (v, spread / (2.0 * v), row.pos_x_var_discrete.sqrt(), row.pos_x_var_continuous.sqrt())
            }
            PlotQuantity::Means => (
                row.width_mean_mc,
                row.width_mean_rep_sd.unwrap_or(row.width_mean_mc_se),
                row.width_mean_discrete,
                row.width_mean_continuous,
            ),
        };
        let series = format!("{} eta={}", row.state, row.efficiency);
        w.write_record([
            series,
            row.nbar.to_string(),
            value.to_string(),
            error.to_string(),
            discrete.to_string(),
            continuous.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Run-length encoding of one frame: equal neighbouring counts collapse to
/// `value*repeat`, so a sparse frame reads like `0*44 1 0*10 2 0*44`.
pub fn encode_frame(counts: &[u32]) -> String {
    let mut out = String::new();
    let mut k = 0;
    while k < counts.len() {
        let v = counts[k];
        let mut end = k + 1;
        while end < counts.len() && counts[end] == v {
            end += 1;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        if end - k == 1 {
            out.push_str(&v.to_string());
        } else {
            out.push_str(&format!("{v}*{}", end - k));
        }
        k = end;
    }
    out
}

/// Inverse of [`encode_frame`].
pub fn decode_frame(line: &str) -> Result<Vec<u32>> {
    let bad = |tok: &str| Error::InvalidArgument(format!("bad run-length token `{tok}`"));
    let mut counts = Vec::new();
    for tok in line.split_whitespace() {
        let (v, n) = match tok.split_once('*') {
            Some((v, n)) => (v, n.parse::<usize>().map_err(|_| bad(tok))?),
            None => (tok, 1),
        };
        let v = v.parse::<u32>().map_err(|_| bad(tok))?;
        if n == 0 {
            return Err(bad(tok));
        }
        counts.extend(std::iter::repeat_n(v, n));
    }
    Ok(counts)
}

/// Streams frames as
///
/// ```text
/// # multipixel-frames/1 pixels=100
/// # point 0 state=coherent nbar=16 efficiency=1
/// 0 0*44 1 0*55
/// 1 ...
/// ```
pub struct FrameWriter<W: Write> {
    out: W,
}

impl<W: Write> FrameWriter<W> {
    pub fn new(mut out: W, pixels: usize) -> Result<Self> {
        writeln!(out, "# {FRAMES_SCHEMA} pixels={pixels}")?;
        Ok(Self { out })
    }

    pub fn write_point(&mut self, point: &SweepPoint, frames: &[FrameCounts]) -> Result<()> {
        writeln!(
            self.out,
            "# point {} state={} nbar={} efficiency={}",
            point.index, point.state, point.nbar, point.efficiency
        )?;
        for (r, frame) in frames.iter().enumerate() {
            writeln!(self.out, "{r} {}", encode_frame(&frame.counts))?;
        }
        Ok(())
    }

    pub fn into_inner(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Reads a frames file back as `(point header, frames)` groups.
pub fn read_frames(text: &str) -> Result<Vec<(String, Vec<Vec<u32>>)>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let pixels: usize = header
        .strip_prefix(&format!("# {FRAMES_SCHEMA} pixels="))
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| config_err(format!("not a {FRAMES_SCHEMA} file")))?;
    let mut groups: Vec<(String, Vec<Vec<u32>>)> = Vec::new();
    for line in lines {
        if let Some(point) = line.strip_prefix("# point ") {
            groups.push((point.to_string(), Vec::new()));
            continue;
        }
        let (_, body) = line.split_once(' ').unwrap_or((line, ""));
        let counts = decode_frame(body)?;
        if counts.len() != pixels {
            return Err(Error::Inconsistent(format!("frame has {} pixels, expected {pixels}", counts.len())));
        }
        groups
            .last_mut()
            .ok_or_else(|| config_err("frame before any point header"))?
            .1
            .push(counts);
    }
    Ok(groups)
}
