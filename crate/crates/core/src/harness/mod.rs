//! Experiment sweeps over `(n, B, c)` cells.
//!
//! A sweep expands its configuration into a fixed, ordered list of
//! `(cell, trial)` tasks. Each trial's seed comes from
//! [`trial_seed`](crate::rng::trial_seed) of the master seed and the cell
//! coordinates, so results do not depend on the number of workers or on
//! completion order. Workers write into slots keyed by task index and
//! aggregation runs over that ordered list.

mod stats;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristics::{run_trial_until, Algorithm, HeuristicsError, StopAt, DEFAULT_MAX_ITERS};
use crate::instances::{BitString, Instance, InstanceError};
use crate::rng::{derive_seed, trial_seed};

pub use stats::{fit_scaling, moments, Moments, ScalingFit};

/// Header of the per-trial CSV.
pub const RAW_HEADER: &str = "n,B,rate_num,algo,instance,run,seed,iterations,feasibility_hit,hit_cap";
/// Header of the per-cell CSV.
pub const SUMMARY_HEADER: &str = "n,B,rate_num,algo,instance,runs,mean,stderr,median,min,max,censored";

/// Default upper limit for weights of the `random` family.
pub const DEFAULT_RANDOM_W_MAX: u64 = 100;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Heuristics(#[from] HeuristicsError),
    #[error("scaling fit: {0}")]
    Fit(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Named instance generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InstanceFamily {
    Iota,
    LowerBound,
    OnemaxLike,
    Random,
    File(PathBuf),
}

impl InstanceFamily {
    /// Builds the instance of this family for `(n, B)`. The lower-bound family
    /// fixes `B = n/4` and the file family ignores both arguments. Random
    /// weights are seeded from `master_seed` and `(n, B)`.
    pub fn build(&self, n: usize, bound: usize, w_max: u64, master_seed: u64) -> Result<Instance, HarnessError> {
        Ok(match self {
            InstanceFamily::Iota => Instance::iota(n, bound)?,
            InstanceFamily::LowerBound => Instance::lower_bound(n)?,
            InstanceFamily::OnemaxLike => Instance::onemax_like(n, bound)?,
            InstanceFamily::Random => {
                Instance::random(n, bound, w_max, derive_seed(master_seed, &[n as u64, bound as u64, 0x5eed]))?
            }
            InstanceFamily::File(path) => Instance::load(path)?,
        })
    }

    /// Short label used in CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            InstanceFamily::Iota => "iota",
            InstanceFamily::LowerBound => "lower-bound",
            InstanceFamily::OnemaxLike => "onemax-like",
            InstanceFamily::Random => "random",
            InstanceFamily::File(_) => "file",
        }
    }
}

impl fmt::Display for InstanceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceFamily::File(p) => write!(f, "file:{}", p.display()),
            other => f.write_str(other.label()),
        }
    }
}

impl FromStr for InstanceFamily {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "iota" => InstanceFamily::Iota,
            "lower-bound" | "lower_bound" => InstanceFamily::LowerBound,
            "onemax-like" | "onemax_like" => InstanceFamily::OnemaxLike,
            "random" => InstanceFamily::Random,
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => InstanceFamily::File(PathBuf::from(path)),
                _ => return Err(HarnessError::Config(format!("unknown instance family {other:?}"))),
            },
        })
    }
}

impl TryFrom<String> for InstanceFamily {
    type Error = HarnessError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<InstanceFamily> for String {
    fn from(f: InstanceFamily) -> Self {
        f.to_string()
    }
}

/// Endpoint of a `B` range: a constant, `n`, or `floor(n / k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundExpr {
    Const(usize),
    N,
    FloorDiv(usize),
}

impl BoundExpr {
    pub fn eval(self, n: usize) -> usize {
        match self {
            BoundExpr::Const(c) => c,
            BoundExpr::N => n,
            BoundExpr::FloorDiv(k) => n / k,
        }
    }
}

impl FromStr for BoundExpr {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::Config(format!("bad bound expression {s:?}"));
        let t = s.trim();
        if t == "n" {
            return Ok(BoundExpr::N);
        }
        let inner = t
            .strip_prefix("floor(")
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(t);
        if let Some(k) = inner.strip_prefix("n/") {
            let k: usize = k.trim().parse().map_err(|_| bad())?;
            return if k == 0 { Err(bad()) } else { Ok(BoundExpr::FloorDiv(k)) };
        }
        t.parse().map(BoundExpr::Const).map_err(|_| bad())
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundExpr::Const(c) => write!(f, "{c}"),
            BoundExpr::N => f.write_str("n"),
            BoundExpr::FloorDiv(k) => write!(f, "floor(n/{k})"),
        }
    }
}

/// Which constraint bounds to run for each `n`.
///
/// Accepted forms: `"7"`, `"1,5,10"`, an inclusive range `"0..floor(n/3)"`,
/// and `"frac:0.25"` meaning `floor(0.25 n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BoundSpec {
    List(Vec<usize>),
    Range(BoundExpr, BoundExpr),
    Fraction(f64),
}

impl BoundSpec {
    pub fn values(&self, n: usize) -> Vec<usize> {
        match self {
            BoundSpec::List(v) => v.clone(),
            BoundSpec::Range(lo, hi) => (lo.eval(n)..=hi.eval(n)).collect(),
            BoundSpec::Fraction(f) => vec![(f * n as f64).floor() as usize],
        }
    }
}

impl FromStr for BoundSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(f) = s.strip_prefix("frac:") {
            let f: f64 = f
                .parse()
                .map_err(|_| HarnessError::Config(format!("bad fraction {f:?}")))?;
            if !(0.0..=1.0).contains(&f) {
                return Err(HarnessError::Config(format!("fraction {f} outside [0, 1]")));
            }
            return Ok(BoundSpec::Fraction(f));
        }
        if let Some((lo, hi)) = s.split_once("..") {
            return Ok(BoundSpec::Range(lo.parse()?, hi.parse()?));
        }
        s.split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| HarnessError::Config(format!("bad bound {t:?}")))
            })
            .collect::<Result<_, _>>()
            .map(BoundSpec::List)
    }
}

impl fmt::Display for BoundSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(|b| b.to_string()).collect();
                f.write_str(&parts.join(","))
            }
            BoundSpec::Range(lo, hi) => write!(f, "{lo}..{hi}"),
            BoundSpec::Fraction(x) => write!(f, "frac:{x}"),
        }
    }
}

impl TryFrom<String> for BoundSpec {
    type Error = HarnessError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<BoundSpec> for String {
    fn from(b: BoundSpec) -> Self {
        b.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoKind {
    Rls,
    Ea,
}

/// Initial search point of every trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartMode {
    #[default]
    Uniform,
    Zeros,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopMode {
    #[default]
    Optimum,
    Feasible,
}

/// A full experiment design; also the schema of `--config` files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub instance: InstanceFamily,
    pub n: Vec<usize>,
    #[serde(rename = "B", default = "default_bounds")]
    pub bounds: BoundSpec,
    pub algo: AlgoKind,
    /// Mutation numerators; ignored for RLS.
    #[serde(default = "default_rates")]
    pub rate_nums: Vec<u32>,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_max_iters")]
    pub max_iters: u64,
    #[serde(default = "default_w_max")]
    pub w_max: u64,
    #[serde(default)]
    pub start: StartMode,
    #[serde(default)]
    pub stop: StopMode,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_bounds() -> BoundSpec {
    BoundSpec::Range(BoundExpr::Const(0), BoundExpr::FloorDiv(3))
}
fn default_rates() -> Vec<u32> {
    vec![1, 2, 3]
}
fn default_runs() -> u64 {
    500
}
fn default_max_iters() -> u64 {
    DEFAULT_MAX_ITERS
}
fn default_w_max() -> u64 {
    DEFAULT_RANDOM_W_MAX
}
fn default_jobs() -> usize {
    1
}

impl SweepConfig {
    /// Design with defaults for everything but the family, sizes and algorithm.
    pub fn new(instance: InstanceFamily, n: Vec<usize>, algo: AlgoKind) -> Self {
        Self {
            instance,
            n,
            bounds: default_bounds(),
            algo,
            rate_nums: default_rates(),
            runs: default_runs(),
            master_seed: 0,
            max_iters: default_max_iters(),
            w_max: default_w_max(),
            start: StartMode::Uniform,
            stop: StopMode::Optimum,
            jobs: default_jobs(),
            out: None,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    fn algorithms(&self) -> Vec<Algorithm> {
        match self.algo {
            AlgoKind::Rls => vec![Algorithm::Rls],
            AlgoKind::Ea => self.rate_nums.iter().map(|&rate_num| Algorithm::Ea { rate_num }).collect(),
        }
    }

    /// Expands the design into cells, validating every one.
    pub fn cells(&self) -> Result<Vec<Cell>, HarnessError> {
        if self.runs == 0 {
            return Err(HarnessError::Config("runs must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(HarnessError::Config("max_iters must be at least 1".into()));
        }
        if self.jobs == 0 {
            return Err(HarnessError::Config("jobs must be at least 1".into()));
        }
        let algos = self.algorithms();
        if algos.is_empty() {
            return Err(HarnessError::Config("no mutation rates given".into()));
        }
        let mut instances = Vec::new();
        match &self.instance {
            InstanceFamily::File(_) => instances.push(self.instance.build(0, 0, self.w_max, self.master_seed)?),
            InstanceFamily::LowerBound => {
                for &n in &self.n {
                    instances.push(self.instance.build(n, n / 4, self.w_max, self.master_seed)?);
                }
            }
            family => {
                if self.n.is_empty() {
                    return Err(HarnessError::Config("no sizes given".into()));
                }
                for &n in &self.n {
                    for b in self.bounds.values(n) {
                        if b > n {
                            return Err(HarnessError::Config(format!("B = {b} exceeds n = {n}")));
                        }
                        instances.push(family.build(n, b, self.w_max, self.master_seed)?);
                    }
                }
            }
        }
        let mut cells = Vec::new();
        for inst in instances {
            for &algo in &algos {
                algo.validate(inst.n())?;
                cells.push(Cell { instance: inst.clone(), algo });
            }
        }
        Ok(cells)
    }
}

/// One `(instance, algorithm)` combination of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub instance: Instance,
    pub algo: Algorithm,
}

/// One trial, as written to the raw CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub n: usize,
    #[serde(rename = "B")]
    pub bound: usize,
    pub rate_num: u32,
    pub algo: String,
    pub instance: String,
    pub run: u64,
    pub seed: u64,
    pub iterations: u64,
    pub feasibility_hit: Option<u64>,
    pub hit_cap: bool,
}

/// Aggregate of one cell, as written to the summary CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    #[serde(rename = "B")]
    pub bound: usize,
    pub rate_num: u32,
    pub algo: String,
    pub instance: String,
    pub runs: u64,
    pub mean: f64,
    pub stderr: f64,
    pub median: u64,
    pub min: u64,
    pub max: u64,
    /// Some trial hit the iteration cap.
    pub censored: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub raw: Vec<RawRow>,
    pub summary: Vec<SummaryRow>,
}

impl SweepOutput {
    pub fn censored(&self) -> bool {
        self.summary.iter().any(|s| s.censored)
    }
}

/// Runs every trial of the design.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput, HarnessError> {
    let cells = config.cells()?;
    let label = config.instance.label();
    let stop = match config.stop {
        StopMode::Optimum => StopAt::Optimum,
        StopMode::Feasible => StopAt::Feasible,
    };
    let tasks: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..config.runs).map(move |t| (c, t)))
        .collect();

    let run_task = |&(c, trial): &(usize, u64)| -> Result<RawRow, HarnessError> {
        let cell = &cells[c];
        let inst = &cell.instance;
        let seed = trial_seed(config.master_seed, inst.n(), inst.bound(), cell.algo.rate_num(), trial);
        let zeros;
        let start = match config.start {
            StartMode::Uniform => None,
            StartMode::Zeros => {
                zeros = BitString::zeros(inst.n());
                Some(&zeros)
            }
        };
        let r = run_trial_until(inst, cell.algo, seed, config.max_iters, start, stop)?;
        Ok(RawRow {
            n: inst.n(),
            bound: inst.bound(),
            rate_num: cell.algo.rate_num(),
            algo: cell.algo.name().to_string(),
            instance: label.to_string(),
            run: trial,
            seed,
            iterations: r.iterations,
            feasibility_hit: r.feasibility_hit,
            hit_cap: r.hit_cap,
        })
    };

    let raw: Vec<RawRow> = if config.jobs == 1 {
        tasks.iter().map(run_task).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?;
        pool.install(|| tasks.par_iter().map(run_task).collect::<Result<_, _>>())?
    };
    let summary = summarize(&raw);
    Ok(SweepOutput { raw, summary })
}

/// Groups consecutive rows of the same cell and aggregates their iterations.
pub fn summarize(raw: &[RawRow]) -> Vec<SummaryRow> {
    let same_cell = |a: &RawRow, b: &RawRow| {
        (a.n, a.bound, a.rate_num, &a.algo, &a.instance) == (b.n, b.bound, b.rate_num, &b.algo, &b.instance)
    };
    raw.chunk_by(same_cell)
        .map(|rows| {
            let its: Vec<u64> = rows.iter().map(|r| r.iterations).collect();
            let m = moments(&its);
            let first = &rows[0];
            SummaryRow {
                n: first.n,
                bound: first.bound,
                rate_num: first.rate_num,
                algo: first.algo.clone(),
                instance: first.instance.clone(),
                runs: rows.len() as u64,
                mean: m.mean,
                stderr: m.stderr,
                median: m.median,
                min: m.min,
                max: m.max,
                censored: rows.iter().any(|r| r.hit_cap),
            }
        })
        .collect()
}

pub fn write_csv<W: Write, R: Serialize>(rows: &[R], header: &str, out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_raw_csv(path: &Path) -> Result<Vec<RawRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Writes `raw.csv` and `summary.csv` into `dir`, creating it if needed.
pub fn write_outputs(output: &SweepOutput, dir: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
    std::fs::create_dir_all(dir)?;
    let raw = dir.join("raw.csv");
    let summary = dir.join("summary.csv");
    write_csv(&output.raw, RAW_HEADER, std::fs::File::create(&raw)?)?;
    write_csv(&output.summary, SUMMARY_HEADER, std::fs::File::create(&summary)?)?;
    Ok((raw, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_bound_specs() {
        assert_eq!("0..floor(n/3)".parse::<BoundSpec>().unwrap().values(100), (0..=33).collect::<Vec<_>>());
        assert_eq!("1..n/4".parse::<BoundSpec>().unwrap().values(8), vec![1, 2]);
        assert_eq!("2..n".parse::<BoundSpec>().unwrap().values(4), vec![2, 3, 4]);
        assert_eq!("1, 5,10".parse::<BoundSpec>().unwrap(), BoundSpec::List(vec![1, 5, 10]));
        assert_eq!("frac:0.25".parse::<BoundSpec>().unwrap().values(10), vec![2]);
        assert!("frac:2".parse::<BoundSpec>().is_err());
        assert!("0..floor(n/0)".parse::<BoundSpec>().is_err());
        assert!("x".parse::<BoundSpec>().is_err());
        let s = BoundSpec::Range(BoundExpr::Const(0), BoundExpr::FloorDiv(3));
        assert_eq!(s.to_string().parse::<BoundSpec>().unwrap(), s);
    }

    #[test]
    fn parse_families() {
        assert_eq!("lower-bound".parse::<InstanceFamily>().unwrap(), InstanceFamily::LowerBound);
        assert_eq!(
            "file:/tmp/x.json".parse::<InstanceFamily>().unwrap(),
            InstanceFamily::File("/tmp/x.json".into())
        );
        assert!("file:".parse::<InstanceFamily>().is_err());
        assert!("nope".parse::<InstanceFamily>().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let c: SweepConfig = serde_json::from_str(r#"{"instance":"iota","n":[100],"algo":"ea"}"#).unwrap();
        assert_eq!(c, SweepConfig::new(InstanceFamily::Iota, vec![100], AlgoKind::Ea));
        assert_eq!(c.cells().unwrap().len(), 34 * 3);
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<SweepConfig>(&text).unwrap(), c);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"instance":"iota","n":[1],"algo":"ea","bogus":1}"#).is_err());
    }

    #[test]
    fn invalid_cells_are_rejected() {
        let mut c = SweepConfig::new(InstanceFamily::Iota, vec![4], AlgoKind::Ea);
        c.bounds = BoundSpec::List(vec![5]);
        assert!(matches!(c.cells(), Err(HarnessError::Config(_))));
        c.bounds = BoundSpec::List(vec![1]);
        c.rate_nums = vec![5];
        assert!(matches!(c.cells(), Err(HarnessError::Heuristics(_))));
        c.rate_nums = vec![1];
        c.runs = 0;
        assert!(c.cells().is_err());
    }

    #[test]
    fn lower_bound_family_fixes_b() {
        let mut c = SweepConfig::new(InstanceFamily::LowerBound, vec![8, 16], AlgoKind::Rls);
        c.bounds = BoundSpec::List(vec![0, 1, 2]);
        let cells = c.cells().unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[1].instance.bound(), 4);
    }

    fn small_config() -> SweepConfig {
        let mut c = SweepConfig::new(InstanceFamily::Iota, vec![12, 16], AlgoKind::Ea);
        c.bounds = "0..floor(n/3)".parse().unwrap();
        c.rate_nums = vec![1, 2];
        c.runs = 5;
        c.master_seed = 17;
        c
    }

    #[test]
    fn sweep_is_reproducible_and_order_independent() {
        let mut c = small_config();
        let a = run_sweep(&c).unwrap();
        let b = run_sweep(&c).unwrap();
        assert_eq!(a, b);
        c.jobs = 4;
        assert_eq!(run_sweep(&c).unwrap(), a);
        assert_eq!(a.raw.len(), (5 + 6) * 2 * 5);
        assert!(!a.censored());
        let baseline = a.summary.iter().find(|s| s.bound == 0).unwrap();
        assert!(baseline.mean > 0.0);
    }

    #[test]
    fn csv_files_are_consistent() {
        let out = run_sweep(&small_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (raw_path, summary_path) = write_outputs(&out, dir.path()).unwrap();
        let text = std::fs::read_to_string(&raw_path).unwrap();
        assert_eq!(text.lines().next().unwrap(), RAW_HEADER);
        let text = std::fs::read_to_string(&summary_path).unwrap();
        assert_eq!(text.lines().next().unwrap(), SUMMARY_HEADER);

        let raw = read_raw_csv(&raw_path).unwrap();
        assert_eq!(raw, out.raw);
        let recomputed = summarize(&raw);
        let written = read_summary_csv(&summary_path).unwrap();
        assert_eq!(recomputed.len(), written.len());
        for (a, b) in recomputed.iter().zip(&written) {
            assert!((a.mean - b.mean).abs() <= 1e-12 * a.mean.abs());
            assert!((a.stderr - b.stderr).abs() <= 1e-12 * a.stderr.abs().max(1.0));
            assert_eq!((a.median, a.min, a.max, a.runs), (b.median, b.min, b.max, b.runs));
            assert!(a.min as f64 <= a.mean && a.mean <= a.max as f64);
            assert!(a.min <= a.median && a.median <= a.max);
        }

        // Same design, same bytes.
        let dir2 = tempfile::tempdir().unwrap();
        write_outputs(&run_sweep(&small_config()).unwrap(), dir2.path()).unwrap();
        for name in ["raw.csv", "summary.csv"] {
            assert_eq!(
                std::fs::read(dir.path().join(name)).unwrap(),
                std::fs::read(dir2.path().join(name)).unwrap()
            );
        }
    }

    #[test]
    fn censored_cells_are_flagged() {
        let mut c = small_config();
        c.max_iters = 2;
        c.start = StartMode::Zeros;
        let out = run_sweep(&c).unwrap();
        assert!(out.censored());
        assert!(out.summary.iter().filter(|s| s.bound == 0).all(|s| !s.censored && s.max == 0));
    }
}
