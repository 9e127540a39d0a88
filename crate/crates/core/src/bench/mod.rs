//! Measurement harness: end-to-end plus per-stage timing, cold vs warm,
//! batch and worker sweeps, packed-record ingestion, environment capture.
//!
//! Timing discipline:
//! - throughput comes from end-to-end wall time, never from stage sums;
//! - the first iteration of a cell is the cold start and never enters the
//!   warm statistics;
//! - digests must be identical whatever the worker count; parallelism is
//!   not allowed to change results.

mod env;
mod rpak;
mod stats;
mod timing;

pub use env::{capture_environment, EnvInfo};
pub use rpak::{iter_records, pack_records, RecordIter, RPAK_MAGIC};
pub use stats::{summarize, Stats};
pub use timing::{harness_overhead, timer_resolution};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::imaging::AdapterRegistry;
use crate::manifest::{parse_manifest, Manifest, ManifestError};
use crate::pipeline::{digest, fnv1a64_continue, run_pipeline, FNV_OFFSET_BASIS};

/// Environment variable overriding the configured worker-count list,
/// comma-separated (the analog of intra/inter-op thread variables).
pub const WORKERS_ENV_VAR: &str = "PIXELPROOF_WORKERS";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot summarize an empty sample set")]
    EmptySamples,
    #[error("cannot pack an empty record list")]
    EmptyRecordList,
    #[error("record {index} is empty")]
    EmptyRecord { index: usize },
    #[error("pack header truncated: {got} bytes")]
    PackTruncatedHeader { got: usize },
    #[error("bad magic, not an RPAK file")]
    BadPackMagic,
    #[error("pack truncated at record {index}")]
    PackTruncated { index: usize },
    #[error("invalid bench config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("manifest error: {0}")]
    Manifest(#[from] ManifestError),
    #[error("input corpus is empty")]
    EmptyCorpus,
    #[error("pipeline failed on corpus item {index} ({name}): {message}")]
    Pipeline {
        index: usize,
        name: String,
        message: String,
    },
    #[error("corpus item {index} produced different digests across runs")]
    NondeterministicDigest { index: usize },
    #[error(
        "cannot parse {WORKERS_ENV_VAR}=`{value}`: expected comma-separated positive integers"
    )]
    InvalidWorkerOverride { value: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    /// Every regular file in the directory, in sorted filename order.
    Directory(PathBuf),
    /// Records of an RPAK pack, in pack order.
    Pack(PathBuf),
}

impl InputSource {
    fn describe(&self) -> String {
        match self {
            InputSource::Directory(p) => format!("dir:{}", p.display()),
            InputSource::Pack(p) => format!("pack:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub manifest_path: PathBuf,
    pub source: InputSource,
    pub batch_sizes: Vec<u32>,
    pub worker_counts: Vec<u32>,
    pub warmup_iterations: u32,
    pub measured_iterations: u32,
    pub seed: u64,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.measured_iterations < 1 {
            return Err(BenchError::Config(
                "measured iterations must be >= 1".into(),
            ));
        }
        if self.batch_sizes.is_empty() || self.batch_sizes.iter().any(|&b| b < 1) {
            return Err(BenchError::Config("batch sizes must be >= 1".into()));
        }
        if self.worker_counts.is_empty() || self.worker_counts.iter().any(|&w| w < 1) {
            return Err(BenchError::Config("worker counts must be >= 1".into()));
        }
        if self.warmup_iterations == 0 && self.measured_iterations < 2 {
            return Err(BenchError::Config(
                "with warmup 0 the first measured iteration is the cold start; \
                 need at least 2 iterations for warm statistics"
                    .into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageStatsEntry {
    pub stage: String,
    pub stats: Stats,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchCell {
    pub batch_size: u32,
    pub workers: u32,
    pub cold_start_ns: u64,
    pub stage_stats: Vec<StageStatsEntry>,
    pub end_to_end: Stats,
    pub throughput_items_per_sec: f64,
    /// FNV-1a-64 fold of per-item tensor digests over the whole corpus,
    /// invariant to batch size and worker count.
    pub digest: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub manifest: String,
    pub source: String,
    pub batch_sizes: Vec<u32>,
    pub worker_counts: Vec<u32>,
    pub warmup_iterations: u32,
    pub measured_iterations: u32,
    pub seed: u64,
    pub corpus_items: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub schema: &'static str,
    pub env: EnvInfo,
    pub config: ConfigEcho,
    pub cells: Vec<BenchCell>,
    pub harness_overhead_ns_per_call: f64,
    pub timer_resolution_ns: u64,
}

struct CorpusItem {
    name: String,
    bytes: Vec<u8>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn load_corpus(source: &InputSource) -> Result<Vec<CorpusItem>, BenchError> {
    let items = match source {
        InputSource::Directory(dir) => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(io_err(dir))?
                .filter_map(|e| e.ok())
                .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
                .map(|e| e.path())
                .collect();
            paths.sort();
            let mut items = Vec::with_capacity(paths.len());
            for path in paths {
                let bytes = std::fs::read(&path).map_err(io_err(&path))?;
                items.push(CorpusItem {
                    name: path
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default(),
                    bytes,
                });
            }
            items
        }
        InputSource::Pack(path) => {
            let packed = std::fs::read(path).map_err(io_err(path))?;
            let mut items = Vec::new();
            for (i, record) in iter_records(&packed)?.enumerate() {
                items.push(CorpusItem {
                    name: format!("record[{i}]"),
                    bytes: record?.to_vec(),
                });
            }
            items
        }
    };
    if items.is_empty() {
        return Err(BenchError::EmptyCorpus);
    }
    Ok(items)
}

/// Worker list actually in effect: the `PIXELPROOF_WORKERS` override when
/// set, the configured list otherwise.
pub fn effective_worker_counts(cfg: &BenchConfig) -> Result<Vec<u32>, BenchError> {
    match std::env::var(WORKERS_ENV_VAR) {
        Err(_) => Ok(cfg.worker_counts.clone()),
        Ok(value) => {
            let parsed: Result<Vec<u32>, _> =
                value.split(',').map(|s| s.trim().parse::<u32>()).collect();
            match parsed {
                Ok(list) if !list.is_empty() && list.iter().all(|&w| w >= 1) => Ok(list),
                _ => Err(BenchError::InvalidWorkerOverride { value }),
            }
        }
    }
}

struct ItemOutcome {
    corpus_index: usize,
    digest_hash: u64,
    stages: Vec<(&'static str, u64)>,
}

fn process_one(
    manifest: &Manifest,
    registry: &AdapterRegistry,
    corpus: &[CorpusItem],
    corpus_index: usize,
) -> Result<ItemOutcome, BenchError> {
    let item = &corpus[corpus_index];
    let run = run_pipeline(manifest, &item.bytes, registry).map_err(|e| BenchError::Pipeline {
        index: corpus_index,
        name: item.name.clone(),
        message: e.to_string(),
    })?;
    Ok(ItemOutcome {
        corpus_index,
        digest_hash: digest(&run.tensor).hash,
        stages: run
            .trace
            .stages
            .iter()
            .map(|s| (s.stage, s.duration_ns))
            .collect(),
    })
}

/// Process one batch worth of corpus indices with `workers` threads.
/// Work items are immutable; results are merged in slot order.
fn process_batch(
    manifest: &Manifest,
    registry: &AdapterRegistry,
    corpus: &[CorpusItem],
    indices: &[usize],
    workers: u32,
) -> Result<Vec<ItemOutcome>, BenchError> {
    if workers <= 1 || indices.len() <= 1 {
        return indices
            .iter()
            .map(|&i| process_one(manifest, registry, corpus, i))
            .collect();
    }
    let workers = (workers as usize).min(indices.len());
    let chunks: Vec<Vec<(usize, usize)>> = (0..workers)
        .map(|w| {
            indices
                .iter()
                .enumerate()
                .filter(|(slot, _)| slot % workers == w)
                .map(|(slot, &idx)| (slot, idx))
                .collect()
        })
        .collect();
    let mut merged: Vec<Option<ItemOutcome>> = Vec::new();
    merged.resize_with(indices.len(), || None);
    std::thread::scope(|scope| -> Result<(), BenchError> {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                scope.spawn(move || -> Result<Vec<(usize, ItemOutcome)>, BenchError> {
                    chunk
                        .iter()
                        .map(|&(slot, idx)| {
                            process_one(manifest, registry, corpus, idx).map(|o| (slot, o))
                        })
                        .collect()
                })
            })
            .collect();
        for handle in handles {
            for (slot, outcome) in handle.join().expect("worker thread panicked")? {
                merged[slot] = Some(outcome);
            }
        }
        Ok(())
    })?;
    Ok(merged
        .into_iter()
        .map(|o| o.expect("every slot is assigned to exactly one worker"))
        .collect())
}

struct CellAccumulator {
    cold_start_ns: Option<u64>,
    end_to_end: Vec<u64>,
    stage_order: Vec<&'static str>,
    stage_samples: BTreeMap<&'static str, Vec<u64>>,
    item_digests: BTreeMap<usize, u64>,
}

impl CellAccumulator {
    fn new() -> Self {
        Self {
            cold_start_ns: None,
            end_to_end: Vec::new(),
            stage_order: Vec::new(),
            stage_samples: BTreeMap::new(),
            item_digests: BTreeMap::new(),
        }
    }

    fn record_digests(&mut self, outcomes: &[ItemOutcome]) -> Result<(), BenchError> {
        for o in outcomes {
            match self.item_digests.get(&o.corpus_index) {
                Some(&h) if h != o.digest_hash => {
                    return Err(BenchError::NondeterministicDigest {
                        index: o.corpus_index,
                    })
                }
                Some(_) => {}
                None => {
                    self.item_digests.insert(o.corpus_index, o.digest_hash);
                }
            }
        }
        Ok(())
    }

    fn record_warm(&mut self, wall_ns: u64, outcomes: &[ItemOutcome]) {
        self.end_to_end.push(wall_ns);
        for o in outcomes {
            for &(stage, ns) in &o.stages {
                if !self.stage_samples.contains_key(stage) {
                    self.stage_order.push(stage);
                }
                self.stage_samples.entry(stage).or_default().push(ns);
            }
        }
    }
}

/// Everything shared by every cell of a sweep: the parsed manifest, the
/// adapter registry, the corpus, and the seed-shuffled processing order.
struct SweepContext<'a> {
    manifest: &'a Manifest,
    registry: &'a AdapterRegistry,
    corpus: &'a [CorpusItem],
    order: &'a [usize],
}

fn run_cell(
    ctx: &SweepContext<'_>,
    batch: u32,
    workers: u32,
    warmup: u32,
    measured: u32,
) -> Result<BenchCell, BenchError> {
    let len = ctx.corpus.len();
    let mut acc = CellAccumulator::new();
    let total_iters = warmup + measured;
    for iter in 0..total_iters {
        let indices: Vec<usize> = (0..batch)
            .map(|j| ctx.order[((iter as usize) * batch as usize + j as usize) % len])
            .collect();
        let t0 = Instant::now();
        let outcomes = process_batch(ctx.manifest, ctx.registry, ctx.corpus, &indices, workers)?;
        let wall_ns = t0.elapsed().as_nanos() as u64;
        acc.record_digests(&outcomes)?;
        if iter == 0 {
            acc.cold_start_ns = Some(wall_ns);
        }
        let is_warm = if warmup == 0 {
            iter > 0
        } else {
            iter >= warmup
        };
        if is_warm {
            acc.record_warm(wall_ns, &outcomes);
        }
    }

    // Items the sweep never touched still contribute to the corpus digest;
    // compute them outside the timed region.
    let missing: Vec<usize> = (0..len)
        .filter(|i| !acc.item_digests.contains_key(i))
        .collect();
    if !missing.is_empty() {
        let outcomes = process_batch(ctx.manifest, ctx.registry, ctx.corpus, &missing, workers)?;
        acc.record_digests(&outcomes)?;
    }

    // fold in original corpus order, so the digest identifies (manifest,
    // corpus) regardless of seed, batching, or worker count
    let mut fold = FNV_OFFSET_BASIS;
    for i in 0..len {
        let hash = acc.item_digests[&i];
        fold = fnv1a64_continue(fold, &hash.to_le_bytes());
    }

    let end_to_end = summarize(&acc.end_to_end)?;
    let warm_iters = acc.end_to_end.len() as u64;
    let total_warm_secs: f64 = acc.end_to_end.iter().map(|&ns| ns as f64 / 1e9).sum();
    let throughput = if total_warm_secs > 0.0 {
        (batch as u64 * warm_iters) as f64 / total_warm_secs
    } else {
        0.0
    };
    let stage_stats = acc
        .stage_order
        .iter()
        .map(|&stage| {
            Ok(StageStatsEntry {
                stage: stage.to_string(),
                stats: summarize(&acc.stage_samples[stage])?,
            })
        })
        .collect::<Result<Vec<_>, BenchError>>()?;

    Ok(BenchCell {
        batch_size: batch,
        workers,
        cold_start_ns: acc.cold_start_ns.expect("at least one iteration ran"),
        stage_stats,
        end_to_end,
        throughput_items_per_sec: throughput,
        digest: format!("{fold:016x}"),
    })
}

/// Run the full sweep described by `cfg` and assemble the report.
pub fn run_bench(cfg: &BenchConfig, registry: &AdapterRegistry) -> Result<BenchReport, BenchError> {
    cfg.validate()?;
    let manifest_text =
        std::fs::read_to_string(&cfg.manifest_path).map_err(io_err(&cfg.manifest_path))?;
    let manifest = parse_manifest(&manifest_text)?;
    let corpus = load_corpus(&cfg.source)?;
    // the seed shuffles processing order only; report identity is tied to
    // the corpus itself
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    order.shuffle(&mut rng);
    let worker_counts = effective_worker_counts(cfg)?;
    let ctx = SweepContext {
        manifest: &manifest,
        registry,
        corpus: &corpus,
        order: &order,
    };

    let mut cells = Vec::new();
    for &batch in &cfg.batch_sizes {
        for &workers in &worker_counts {
            cells.push(run_cell(
                &ctx,
                batch,
                workers,
                cfg.warmup_iterations,
                cfg.measured_iterations,
            )?);
        }
    }

    Ok(BenchReport {
        schema: "bench/1",
        env: capture_environment(),
        config: ConfigEcho {
            manifest: cfg.manifest_path.display().to_string(),
            source: cfg.source.describe(),
            batch_sizes: cfg.batch_sizes.clone(),
            worker_counts,
            warmup_iterations: cfg.warmup_iterations,
            measured_iterations: cfg.measured_iterations,
            seed: cfg.seed,
            corpus_items: corpus.len() as u64,
        },
        cells,
        harness_overhead_ns_per_call: harness_overhead(10_000),
        timer_resolution_ns: timer_resolution(),
    })
}
