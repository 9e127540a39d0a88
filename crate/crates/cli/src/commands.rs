//! Subcommand implementations. Every function returns the process exit
//! code; divergence is signalled with exit 1 so scripts can gate on it.

use std::path::{Path, PathBuf};

use serde::Serialize;

use pixelproof_core::bench::{run_bench, BenchConfig, BenchError};
use pixelproof_core::diff::{
    image_diff_with, tensor_diff_with, visualize_diff, DiffReport, ExtremeThresholds,
};
use pixelproof_core::imaging::{encode_ppm, AdapterRegistry};
use pixelproof_core::manifest::{parse_manifest, validate as validate_manifest, Issue, Manifest};
use pixelproof_core::pipeline::{
    digest as tensor_digest, rten, run_image_stages, run_pipeline, Digest, StageTrace,
};

use crate::output::{emit, fail, read_bytes, read_text};
use crate::{EXIT_DIVERGENCE, EXIT_RUNTIME, EXIT_SUCCESS, EXIT_USAGE};

pub struct Context {
    pub strict: bool,
    pub out: Option<PathBuf>,
    pub viz: Option<PathBuf>,
    pub thresholds: ExtremeThresholds,
}

fn load_manifest(path: &Path) -> Result<Manifest, String> {
    let text = read_text(path)?;
    parse_manifest(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[derive(Serialize)]
struct ValidateReport<'a> {
    manifest: String,
    issues: &'a [Issue],
}

pub fn validate(ctx: &Context, manifest_path: &Path) -> i32 {
    let manifest = match load_manifest(manifest_path) {
        Ok(m) => m,
        Err(e) => return fail("manifest", e, EXIT_USAGE),
    };
    let issues = validate_manifest(&manifest);
    for issue in &issues {
        eprintln!("{}: {issue}", manifest_path.display());
    }
    let report = ValidateReport {
        manifest: manifest_path.display().to_string(),
        issues: &issues,
    };
    if let Err(e) = emit(ctx.out.as_ref(), &report) {
        return fail("io", e, EXIT_RUNTIME);
    }
    if issues.is_empty() || !ctx.strict {
        EXIT_SUCCESS
    } else {
        EXIT_USAGE
    }
}

#[derive(Serialize)]
struct RunReport {
    digest: Digest,
    trace: StageTrace,
    output: String,
}

pub fn run(ctx: &Context, manifest_path: &Path, input: &Path, output: &Path) -> i32 {
    let manifest = match load_manifest(manifest_path) {
        Ok(m) => m,
        Err(e) => return fail("manifest", e, EXIT_USAGE),
    };
    let bytes = match read_bytes(input) {
        Ok(b) => b,
        Err(e) => return fail("io", e, EXIT_USAGE),
    };
    let registry = AdapterRegistry::with_builtins();
    let run = match run_pipeline(&manifest, &bytes, &registry) {
        Ok(r) => r,
        Err(e) => return fail("pipeline", e, EXIT_RUNTIME),
    };
    if let Err(e) = std::fs::write(output, rten::encode(&run.tensor)) {
        return fail("io", format!("{}: {e}", output.display()), EXIT_RUNTIME);
    }
    let report = RunReport {
        digest: tensor_digest(&run.tensor),
        trace: run.trace,
        output: output.display().to_string(),
    };
    match emit(ctx.out.as_ref(), &report) {
        Ok(()) => EXIT_SUCCESS,
        Err(e) => fail("io", e, EXIT_RUNTIME),
    }
}

#[derive(Serialize)]
struct DiffReportEnvelope {
    report: DiffReport,
    digest_a: Digest,
    digest_b: Digest,
}

#[derive(Serialize)]
struct ShapeMismatch<'a> {
    error: &'a str,
    dims_a: Vec<u32>,
    dims_b: Vec<u32>,
}

pub fn diff(ctx: &Context, manifest_a: &Path, manifest_b: &Path, input: &Path) -> i32 {
    let (ma, mb) = match (load_manifest(manifest_a), load_manifest(manifest_b)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail("manifest", e, EXIT_USAGE),
    };
    let bytes = match read_bytes(input) {
        Ok(b) => b,
        Err(e) => return fail("io", e, EXIT_USAGE),
    };
    let registry = AdapterRegistry::with_builtins();
    let run_a = match run_pipeline(&ma, &bytes, &registry) {
        Ok(r) => r,
        Err(e) => {
            return fail(
                "pipeline",
                format!("{}: {e}", manifest_a.display()),
                EXIT_RUNTIME,
            )
        }
    };
    let run_b = match run_pipeline(&mb, &bytes, &registry) {
        Ok(r) => r,
        Err(e) => {
            return fail(
                "pipeline",
                format!("{}: {e}", manifest_b.display()),
                EXIT_RUNTIME,
            )
        }
    };

    if run_a.tensor.dims() != run_b.tensor.dims() {
        let mismatch = ShapeMismatch {
            error: "shape_mismatch",
            dims_a: run_a.tensor.dims().to_vec(),
            dims_b: run_b.tensor.dims().to_vec(),
        };
        eprintln!(
            "pixelproof: output shapes differ: {:?} vs {:?}",
            run_a.tensor.dims(),
            run_b.tensor.dims()
        );
        let _ = emit(ctx.out.as_ref(), &mismatch);
        return EXIT_RUNTIME;
    }

    if let Some(viz_path) = &ctx.viz {
        // compare the byte-comparable images before convert/layout
        match (
            run_image_stages(&ma, &bytes, &registry),
            run_image_stages(&mb, &bytes, &registry),
        ) {
            (Ok((img_a, _)), Ok((img_b, _))) => match visualize_diff(&img_a, &img_b) {
                Ok(viz) => {
                    if let Err(e) = std::fs::write(viz_path, encode_ppm(&viz)) {
                        return fail("io", format!("{}: {e}", viz_path.display()), EXIT_RUNTIME);
                    }
                }
                Err(e) => eprintln!("pixelproof: skipping visualization: {e}"),
            },
            _ => eprintln!("pixelproof: skipping visualization: image stages failed"),
        }
    }

    let mut report = match tensor_diff_with(&run_a.tensor, &run_b.tensor, ctx.thresholds) {
        Ok(r) => r,
        Err(e) => return fail("diff", e, EXIT_RUNTIME),
    };
    report.provenance_a = format!("{}:{}", manifest_a.display(), ma.name);
    report.provenance_b = format!("{}:{}", manifest_b.display(), mb.name);
    let diverged = report.any_differ();
    let envelope = DiffReportEnvelope {
        report,
        digest_a: tensor_digest(&run_a.tensor),
        digest_b: tensor_digest(&run_b.tensor),
    };
    if let Err(e) = emit(ctx.out.as_ref(), &envelope) {
        return fail("io", e, EXIT_RUNTIME);
    }
    if diverged {
        EXIT_DIVERGENCE
    } else {
        EXIT_SUCCESS
    }
}

pub fn decode_diff(ctx: &Context, adapter_a: &str, adapter_b: &str, input: &Path) -> i32 {
    let registry = AdapterRegistry::with_builtins();
    // unknown adapters are usage errors; resolve both before decoding
    if let Err(e) = registry.get(adapter_a) {
        return fail("adapter", e, EXIT_USAGE);
    }
    if let Err(e) = registry.get(adapter_b) {
        return fail("adapter", e, EXIT_USAGE);
    }
    let bytes = match read_bytes(input) {
        Ok(b) => b,
        Err(e) => return fail("io", e, EXIT_USAGE),
    };
    let img_a = match registry.decode_with(adapter_a, &bytes) {
        Ok(i) => i,
        Err(e) => return fail("decode", e, EXIT_RUNTIME),
    };
    let img_b = match registry.decode_with(adapter_b, &bytes) {
        Ok(i) => i,
        Err(e) => return fail("decode", e, EXIT_RUNTIME),
    };
    if let Some(viz_path) = &ctx.viz {
        match visualize_diff(&img_a, &img_b) {
            Ok(viz) => {
                if let Err(e) = std::fs::write(viz_path, encode_ppm(&viz)) {
                    return fail("io", format!("{}: {e}", viz_path.display()), EXIT_RUNTIME);
                }
            }
            Err(e) => eprintln!("pixelproof: skipping visualization: {e}"),
        }
    }
    let report = match image_diff_with(&img_a, &img_b, ctx.thresholds) {
        Ok(r) => r,
        Err(e) => return fail("diff", e, EXIT_RUNTIME),
    };
    let diverged = report.any_differ();
    if let Err(e) = emit(ctx.out.as_ref(), &report) {
        return fail("io", e, EXIT_RUNTIME);
    }
    if diverged {
        EXIT_DIVERGENCE
    } else {
        EXIT_SUCCESS
    }
}

fn bench_exit_code(err: &BenchError) -> i32 {
    match err {
        BenchError::Config(_)
        | BenchError::Io { .. }
        | BenchError::Manifest(_)
        | BenchError::EmptyCorpus
        | BenchError::EmptyRecordList
        | BenchError::EmptyRecord { .. }
        | BenchError::PackTruncatedHeader { .. }
        | BenchError::BadPackMagic
        | BenchError::PackTruncated { .. }
        | BenchError::InvalidWorkerOverride { .. } => EXIT_USAGE,
        BenchError::Pipeline { .. }
        | BenchError::NondeterministicDigest { .. }
        | BenchError::EmptySamples => EXIT_RUNTIME,
    }
}

pub fn bench(ctx: &Context, cfg: &BenchConfig) -> i32 {
    let registry = AdapterRegistry::with_builtins();
    match run_bench(cfg, &registry) {
        Ok(report) => match emit(ctx.out.as_ref(), &report) {
            Ok(()) => EXIT_SUCCESS,
            Err(e) => fail("io", e, EXIT_RUNTIME),
        },
        Err(e) => {
            let code = bench_exit_code(&e);
            fail("bench", e, code)
        }
    }
}

#[derive(Serialize)]
struct PackReport {
    packed: usize,
    bytes: usize,
    output: String,
}

pub fn pack(ctx: &Context, dir: &Path, output: &Path) -> i32 {
    let mut paths: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
            .map(|e| e.path())
            .collect(),
        Err(e) => return fail("io", format!("{}: {e}", dir.display()), EXIT_USAGE),
    };
    paths.sort();
    let mut payloads = Vec::with_capacity(paths.len());
    for path in &paths {
        match read_bytes(path) {
            Ok(b) => payloads.push(b),
            Err(e) => return fail("io", e, EXIT_USAGE),
        }
    }
    let packed = match pixelproof_core::bench::pack_records(&payloads) {
        Ok(p) => p,
        Err(e) => return fail("pack", e, EXIT_USAGE),
    };
    if let Err(e) = std::fs::write(output, &packed) {
        return fail("io", format!("{}: {e}", output.display()), EXIT_RUNTIME);
    }
    let report = PackReport {
        packed: payloads.len(),
        bytes: packed.len(),
        output: output.display().to_string(),
    };
    match emit(ctx.out.as_ref(), &report) {
        Ok(()) => EXIT_SUCCESS,
        Err(e) => fail("io", e, EXIT_RUNTIME),
    }
}

pub fn digest(ctx: &Context, tensor_path: &Path) -> i32 {
    let bytes = match read_bytes(tensor_path) {
        Ok(b) => b,
        Err(e) => return fail("io", e, EXIT_USAGE),
    };
    let tensor = match rten::decode(&bytes) {
        Ok(t) => t,
        Err(e) => {
            return fail(
                "rten",
                format!("{}: {e}", tensor_path.display()),
                EXIT_USAGE,
            )
        }
    };
    match emit(ctx.out.as_ref(), &tensor_digest(&tensor)) {
        Ok(()) => EXIT_SUCCESS,
        Err(e) => fail("io", e, EXIT_RUNTIME),
    }
}
