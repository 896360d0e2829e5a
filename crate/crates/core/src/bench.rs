//! Benchmark harness: a grid of generated instances, each solved greedily and
//! exactly, written as CSV rows.
//!
//! Seeds: row `i` of the grid (enumerated distribution, then `n`, then `c`,
//! then replicate) is generated with `derive_seed(master, i)`, one SplitMix64
//! output step from `master + (i + 1) * 0x9E3779B97F4A7C15`.

use std::fmt;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::mpsc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::candidates::{build_candidate_set_with, CandidateConfig};
use crate::exact::{solve_exact_candidates, ExactConfig};
use crate::greedy::solve_greedy_candidates;
use crate::instance::{generate_gaussian, generate_uniform, RpfaInstance};

pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 19] = [
    "schema_version",
    "distribution",
    "n",
    "c",
    "replicate",
    "seed",
    "candidates",
    "edges",
    "candidate_secs",
    "greedy_secs",
    "greedy_cardinality",
    "greedy_coverage",
    "exact_status",
    "exact_timed_out",
    "exact_secs",
    "exact_cardinality",
    "exact_coverage",
    "ratio",
    "error",
];

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distribution {
    Uniform,
    Gaussian,
}

impl Distribution {
    pub fn generate(self, n: usize, c: usize, seed: u64) -> RpfaInstance {
        match self {
            Self::Uniform => generate_uniform(n, c, seed),
            Self::Gaussian => generate_gaussian(n, c, seed),
        }
    }
}

impl FromStr for Distribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Self::Uniform),
            "gaussian" => Ok(Self::Gaussian),
            _ => Err(format!(
                "unknown distribution {s:?} (expected uniform or gaussian)"
            )),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Gaussian => "gaussian",
        })
    }
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub distributions: Vec<Distribution>,
    pub ns: Vec<usize>,
    pub cs: Vec<usize>,
    pub replicates: usize,
    pub master_seed: u64,
    pub budget: Duration,
    pub candidates: CandidateConfig,
    /// Skip the exact solver above this many candidates.
    pub exact_max_candidates: Option<usize>,
    pub workers: usize,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            distributions: vec![Distribution::Gaussian],
            ns: (20..=100).step_by(10).collect(),
            cs: vec![2, 4],
            replicates: 3,
            master_seed: 0,
            budget: Duration::from_secs(60),
            candidates: CandidateConfig::default(),
            exact_max_candidates: None,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridPoint {
    pub index: usize,
    pub distribution: Distribution,
    pub n: usize,
    pub c: usize,
    pub replicate: usize,
    pub seed: u64,
}

impl BenchSpec {
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &distribution in &self.distributions {
            for &n in &self.ns {
                for &c in &self.cs {
                    for replicate in 0..self.replicates {
                        let index = out.len();
                        out.push(GridPoint {
                            index,
                            distribution,
                            n,
                            c,
                            replicate,
                            seed: derive_seed(self.master_seed, index as u64),
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactStatus {
    Finished,
    Timeout,
    Skipped,
    Failed,
}

impl fmt::Display for ExactStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Finished => "finished",
            Self::Timeout => "timeout",
            Self::Skipped => "skipped",
            Self::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub point: GridPoint,
    pub candidates: Option<usize>,
    pub edges: Option<usize>,
    pub candidate_secs: f64,
    pub greedy_secs: Option<f64>,
    pub greedy_cardinality: Option<usize>,
    pub greedy_coverage: Option<usize>,
    pub exact_status: ExactStatus,
    pub exact_secs: Option<f64>,
    pub exact_cardinality: Option<usize>,
    pub exact_coverage: Option<usize>,
    pub error: Option<String>,
}

impl BenchRow {
    /// Greedy over exact cardinality, when the exact solver finished.
    pub fn ratio(&self) -> Option<f64> {
        match (self.greedy_cardinality, self.exact_cardinality) {
            (Some(g), Some(e)) if e > 0 => Some(g as f64 / e as f64),
            _ => None,
        }
    }

    pub fn fields(&self) -> Vec<String> {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let secs = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        vec![
            SCHEMA_VERSION.to_string(),
            self.point.distribution.to_string(),
            self.point.n.to_string(),
            self.point.c.to_string(),
            self.point.replicate.to_string(),
            self.point.seed.to_string(),
            opt(self.candidates),
            opt(self.edges),
            format!("{:.6}", self.candidate_secs),
            secs(self.greedy_secs),
            opt(self.greedy_cardinality),
            opt(self.greedy_coverage),
            self.exact_status.to_string(),
            (self.exact_status == ExactStatus::Timeout).to_string(),
            secs(self.exact_secs),
            opt(self.exact_cardinality),
            opt(self.exact_coverage),
            self.ratio().map(|r| format!("{r:.6}")).unwrap_or_default(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Generates and solves one grid point. Failures end up in the row.
pub fn run_point(spec: &BenchSpec, point: GridPoint) -> BenchRow {
    let mut row = BenchRow {
        point,
        candidates: None,
        edges: None,
        candidate_secs: 0.0,
        greedy_secs: None,
        greedy_cardinality: None,
        greedy_coverage: None,
        exact_status: ExactStatus::Skipped,
        exact_secs: None,
        exact_cardinality: None,
        exact_coverage: None,
        error: None,
    };
    let inst = point.distribution.generate(point.n, point.c, point.seed);
    let t = Instant::now();
    let cands = match build_candidate_set_with(&inst, &spec.candidates) {
        Ok(c) => c,
        Err(e) => {
            row.candidate_secs = t.elapsed().as_secs_f64();
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.candidate_secs = t.elapsed().as_secs_f64();
    row.candidates = Some(cands.len());

    let t = Instant::now();
    let s = solve_greedy_candidates(&cands);
    row.greedy_secs = Some(t.elapsed().as_secs_f64());
    row.greedy_cardinality = Some(s.cardinality);
    row.greedy_coverage = Some(s.covered_points);

    if spec.exact_max_candidates.is_some_and(|m| cands.len() > m) {
        return row;
    }
    let t = Instant::now();
    match solve_exact_candidates(cands, &ExactConfig::with_budget(spec.budget)) {
        Ok((g, Some(s), _)) => {
            row.edges = Some(g.edge_count());
            row.exact_status = ExactStatus::Finished;
            row.exact_cardinality = Some(s.cardinality);
            row.exact_coverage = Some(s.covered_points);
        }
        Ok((g, None, _)) => {
            row.edges = Some(g.edge_count());
            row.exact_status = ExactStatus::Timeout;
        }
        Err(e) => {
            row.exact_status = ExactStatus::Failed;
            row.error = Some(e.to_string());
        }
    }
    row.exact_secs = Some(t.elapsed().as_secs_f64());
    row
}

/// Runs the whole grid, handing rows to `sink` from the calling thread as they
/// complete. With one worker, rows arrive in grid order.
pub fn run_benchmark(spec: &BenchSpec, mut sink: impl FnMut(&BenchRow)) -> Vec<BenchRow> {
    let grid = spec.grid();
    let mut rows = Vec::with_capacity(grid.len());
    if spec.workers <= 1 {
        for p in grid {
            let row = run_point(spec, p);
            sink(&row);
            rows.push(row);
        }
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .expect("thread pool");
        let (tx, rx) = mpsc::channel();
        std::thread::scope(|scope| {
            scope.spawn(|| {
                pool.install(|| {
                    grid.into_par_iter().for_each_with(tx, |tx, p| {
                        let _ = tx.send(run_point(spec, p));
                    })
                })
            });
            for row in rx {
                sink(&row);
                rows.push(row);
            }
        });
        rows.sort_by_key(|r| r.point.index);
    }
    rows
}

/// Appending CSV writer. A new file gets the header; an existing one must
/// carry the same header, so results from different schema versions never mix.
pub struct CsvSink {
    writer: csv::Writer<std::fs::File>,
}

impl CsvSink {
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref();
        let expected = COLUMNS.join(",");
        let existing = match std::fs::File::open(path) {
            Ok(f) => {
                let mut first = String::new();
                BufReader::new(f).read_line(&mut first)?;
                Some(first.trim_end().to_string())
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(e),
        };
        let needs_header = match existing.as_deref() {
            None | Some("") => true,
            Some(h) if h == expected => false,
            Some(h) => {
                return Err(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("{} has a different header: {h}", path.display()),
                ))
            }
        };
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(file);
        if needs_header {
            writer.write_record(COLUMNS)?;
            writer.flush()?;
        }
        Ok(Self { writer })
    }

    pub fn write(&mut self, row: &BenchRow) -> std::io::Result<()> {
        self.writer.write_record(row.fields())?;
        self.writer.flush()
    }
}

/// Writes rows to any `io::Write` with a header, e.g. for stdout.
pub fn write_rows(mut out: impl Write, rows: &[BenchRow]) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(&mut out);
    w.write_record(COLUMNS)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()
}
