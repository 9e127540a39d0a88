//! Reproducible, benchmarkable ML-inference preprocessing.
//!
//! An inference result is only comparable when every preprocessing choice
//! behind it is pinned: the decoder and its implementation, RGB vs BGR,
//! crop fraction, interpolation method, byte↔float conversion order,
//! normalization parameters and their value domain, and the tensor layout.
//! Each of these can silently change model inputs while everything still
//! "runs fine".
//!
//! The crate has five parts:
//!
//! - [`manifest`]: grammar, parser, canonical serializer, and semantic
//!   validator for the manifest format that pins those choices;
//! - [`imaging`]: image/tensor types, the reference PPM decoder, and the
//!   decode-adapter registry with provenance;
//! - [`pipeline`]: deterministic execution of a manifest over an image,
//!   with per-stage tracing and canonical tensor digests;
//! - [`diff`]: divergence metrics and visualization between two images or
//!   tensors;
//! - [`bench`]: the measurement harness for end-to-end and per-stage
//!   timing, cold vs warm phases, worker sweeps, packed-record ingestion,
//!   and environment capture.
//!
//! All values are immutable after construction and every operation outside
//! `bench` is a pure function, so everything is safe to share across
//! threads.

#![forbid(unsafe_code)]

pub mod bench;
pub mod diff;
pub mod imaging;
pub mod manifest;
pub mod pipeline;
