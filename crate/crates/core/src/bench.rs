//! Method dispatch and the benchmark harness comparing every method against the oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::graph::{weighted_degree_order, ConstrainedInstance, CutSolution, VertexSet};
use crate::io::{read_instance, InstanceFile};
use crate::matroid::{solve_matroid, Matroid, MatroidOracle};
use crate::oracle::{oracle_constrained, oracle_matroid};
use crate::pipeline::{solve_greedy, solve_multi};

/// Bumped whenever a field of [`BenchRow`] or [`BenchReport`] changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sdp,
    Pipage,
    Greedy,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Sdp, Method::Pipage, Method::Greedy, Method::Oracle];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sdp => "sdp",
            Method::Pipage => "pipage",
            Method::Greedy => "greedy",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown method `{s}` (expected sdp, pipage, greedy or oracle)")))
    }
}

/// Partition constraints of a file: its own parts, or those of a uniform/partition matroid.
fn partition_view(file: &InstanceFile) -> Result<ConstrainedInstance> {
    let g = file.instance.graph().clone();
    match &file.matroid {
        None => Ok(file.instance.clone()),
        Some(Matroid::Uniform { k, .. }) => Ok(ConstrainedInstance::single(g, *k)),
        Some(Matroid::Partition { parts, capacities }) => ConstrainedInstance::new(g, parts.clone(), capacities.clone()),
        Some(_) => Err(Error::Precondition("this method needs partition constraints, not a graphic or explicit matroid".into())),
    }
}

/// The matroid whose bases are the feasible sets of a file.
pub fn feasibility_matroid(file: &InstanceFile) -> Result<Matroid> {
    match &file.matroid {
        Some(m) => Ok(m.clone()),
        None => Matroid::partition(file.instance.parts().to_vec(), file.instance.budgets().to_vec()),
    }
}

/// Greedy basis by decreasing weighted degree.
fn greedy_base(file: &InstanceFile, m: &Matroid) -> Result<CutSolution> {
    let g = file.instance.graph();
    let mut set = VertexSet::empty();
    for v in weighted_degree_order(g) {
        let with = set.with(v);
        if m.is_independent(&with) {
            set = with;
        }
    }
    let value = crate::graph::delta(g, &set)?;
    let feasible = set.len() == m.rank() && m.has_base();
    Ok(CutSolution { set, value, feasible, stage_trace: vec!["greedy".into()] })
}

/// Runs one method on a file. Feasibility means the file's matroid bases when a matroid
/// section is present and the partition budgets otherwise.
pub fn run_method(file: &InstanceFile, method: Method, cfg: &Config, seed: u64) -> Result<CutSolution> {
    let g = file.instance.graph();
    match method {
        Method::Oracle => {
            let r = match &file.matroid {
                Some(m) => oracle_matroid(g, m, &cfg.oracle_limits())?,
                None => oracle_constrained(&file.instance, &VertexSet::empty(), &cfg.oracle_limits())?,
            };
            Ok(CutSolution { set: r.set, value: r.opt_value, feasible: true, stage_trace: vec!["oracle".into()] })
        }
        Method::Pipage => {
            let m = feasibility_matroid(file)?;
            if !m.has_base() {
                return Err(Error::Infeasible("matroid constraints admit no base".into()));
            }
            Ok(solve_matroid(g, &m)?.solution)
        }
        Method::Greedy => match &file.matroid {
            Some(m) => greedy_base(file, m),
            None => solve_greedy(&file.instance),
        },
        Method::Sdp => {
            let inst = partition_view(file)?;
            if inst.parts().iter().zip(inst.budgets()).any(|(p, &k)| k > p.len()) {
                return Err(Error::Infeasible("a budget exceeds its part".into()));
            }
            let mut params = cfg.rounding_params();
            params.rng_seed = seed;
            solve_multi(&inst, &params)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowStatus {
    Ok,
    /// Over a configured capacity, or the method does not apply; not counted as a failure.
    Skipped,
    Infeasible,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub method: Method,
    pub seed: u64,
    pub status: RowStatus,
    pub value: Option<f64>,
    pub oracle_value: Option<f64>,
    /// `value / oracle_value`, present when the oracle value is positive.
    pub ratio: Option<f64>,
    pub feasible: bool,
    pub note: String,
    /// Seconds; excluded from the serialized report so reruns compare byte for byte.
    #[serde(skip)]
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodAggregate {
    pub rows: usize,
    pub ok: usize,
    pub min_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub seeds: Vec<u64>,
    pub rows: Vec<BenchRow>,
    pub aggregates: BTreeMap<Method, MethodAggregate>,
}

impl BenchReport {
    pub fn from_rows(seeds: Vec<u64>, mut rows: Vec<BenchRow>) -> Self {
        rows.sort_by(|a, b| (&a.instance, a.method, a.seed).cmp(&(&b.instance, b.method, b.seed)));
        let mut aggregates = BTreeMap::new();
        for method in Method::ALL {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.method == method).collect();
            if mine.is_empty() {
                continue;
            }
            let ratios: Vec<f64> = mine.iter().filter_map(|r| r.ratio).collect();
            aggregates.insert(
                method,
                MethodAggregate {
                    rows: mine.len(),
                    ok: mine.iter().filter(|r| r.status == RowStatus::Ok).count(),
                    min_ratio: ratios.iter().copied().reduce(f64::min),
                    mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
                },
            );
        }
        BenchReport { schema_version: SCHEMA_VERSION, seeds, rows, aggregates }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| Error::Input(format!("csv: {e}")))?;
        }
        if self.rows.is_empty() {
            w.write_record(["instance", "method", "seed", "status", "value", "oracle_value", "ratio", "feasible", "note"])
                .map_err(|e| Error::Input(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Input(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Writes `<stem>.csv` and `<stem>.json`; returns both paths.
    pub fn write(&self, stem: &Path) -> Result<(PathBuf, PathBuf)> {
        let csv_path = stem.with_extension("csv");
        let json_path = stem.with_extension("json");
        std::fs::write(&csv_path, self.to_csv()?)?;
        std::fs::write(&json_path, self.to_json()?)?;
        Ok((csv_path, json_path))
    }

    /// Every row that ran, with its wall time; kept apart from the deterministic report.
    pub fn timings_csv(&self) -> String {
        let mut out = String::from("instance,method,seed,wall_time\n");
        for r in &self.rows {
            out += &format!("{},{},{},{:.6}\n", r.instance, r.method, r.seed, r.wall_time);
        }
        out
    }
}

/// Instance files (`.txt`, `.inst`, `.json`) of a directory, by file name; ids are file stems.
pub fn load_corpus(dir: &Path) -> Result<Vec<(String, InstanceFile)>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt" || e == "inst" || e == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let file = read_instance(&p).map_err(|e| match e {
                Error::Parse { line, column, message } => Error::Parse {
                    line,
                    column,
                    message: format!("{}: {message}", p.display()),
                },
                other => other,
            })?;
            Ok((id, file.normalized()?))
        })
        .collect()
}

fn classify(e: &Error) -> RowStatus {
    match e {
        Error::Capacity(_) | Error::Precondition(_) => RowStatus::Skipped,
        Error::Infeasible(_) => RowStatus::Infeasible,
        _ => RowStatus::Error,
    }
}

/// Runs every `(instance, method, seed)` combination on a pool of scoped worker threads.
pub fn run_bench(corpus: &[(String, InstanceFile)], methods: &[Method], seeds: &[u64], cfg: &Config) -> BenchReport {
    let oracle: Vec<std::result::Result<f64, String>> = {
        let slots = Mutex::new(vec![Err(String::new()); corpus.len()]);
        pool(corpus.len(), cfg.workers, |i| {
            let r = run_method(&corpus[i].1, Method::Oracle, cfg, 0).map(|s| s.value).map_err(|e| e.to_string());
            slots.lock().expect("no poisoned workers")[i] = r;
        });
        slots.into_inner().expect("no poisoned workers")
    };
    let jobs: Vec<(usize, Method, u64)> = (0..corpus.len())
        .flat_map(|i| methods.iter().flat_map(move |&m| seeds.iter().map(move |&s| (i, m, s))))
        .collect();
    let rows = Mutex::new(Vec::with_capacity(jobs.len()));
    pool(jobs.len(), cfg.workers, |j| {
        let (i, method, seed) = jobs[j];
        let (id, file) = &corpus[i];
        let started = Instant::now();
        let outcome = run_method(file, method, cfg, seed);
        let wall_time = started.elapsed().as_secs_f64();
        let oracle_value = oracle[i].as_ref().ok().copied();
        let row = match outcome {
            Ok(sol) => BenchRow {
                instance: id.clone(),
                method,
                seed,
                status: RowStatus::Ok,
                value: Some(sol.value),
                oracle_value,
                ratio: oracle_value.filter(|&o| o > 0.0).map(|o| sol.value / o),
                feasible: sol.feasible,
                note: sol.stage_trace.join(">"),
                wall_time,
            },
            Err(e) => BenchRow {
                instance: id.clone(),
                method,
                seed,
                status: classify(&e),
                value: None,
                oracle_value,
                ratio: None,
                feasible: false,
                note: e.to_string(),
                wall_time,
            },
        };
        rows.lock().expect("no poisoned workers").push(row);
    });
    BenchReport::from_rows(seeds.to_vec(), rows.into_inner().expect("no poisoned workers"))
}

/// Calls `job(0..count)` on `workers` scoped threads (0 = available parallelism).
fn pool(count: usize, workers: usize, job: impl Fn(usize) + Sync) {
    let workers = if workers == 0 {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        workers
    }
    .min(count.max(1));
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                job(i);
            });
        }
    });
}
