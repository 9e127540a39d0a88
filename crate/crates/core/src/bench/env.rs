//! Environment and build capture. Two reports are only comparable when
//! their environments are known, so OS, CPU, SIMD features, and the flags
//! the harness itself was compiled with travel inside every report.

use std::fs;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnvInfo {
    pub os: String,
    pub os_version: String,
    pub cpu_model: String,
    pub physical_cores: u32,
    pub logical_cores: u32,
    pub simd_features: Vec<String>,
    pub compiler: String,
    pub opt_flags: String,
    pub build_timestamp: String,
    pub harness_version: String,
}

fn read_trimmed(path: &str) -> Option<String> {
    fs::read_to_string(path).ok().map(|s| s.trim().to_string())
}

fn os_version() -> String {
    if let Some(s) = read_trimmed("/proc/sys/kernel/osrelease") {
        return s;
    }
    read_trimmed("/etc/os-release")
        .and_then(|content| {
            content.lines().find_map(|l| {
                l.strip_prefix("PRETTY_NAME=")
                    .map(|v| v.trim_matches('"').to_string())
            })
        })
        .unwrap_or_else(|| "unknown".into())
}

fn cpu_model() -> String {
    if let Ok(content) = fs::read_to_string("/proc/cpuinfo") {
        for line in content.lines() {
            if let Some((key, value)) = line.split_once(':') {
                let key = key.trim();
                if key == "model name" || key == "Processor" || key == "cpu" {
                    return value.trim().to_string();
                }
            }
        }
    }
    "unknown".into()
}

fn logical_cores() -> u32 {
    std::thread::available_parallelism()
        .map(|n| n.get() as u32)
        .unwrap_or(1)
}

/// Count distinct (physical id, core id) pairs; falls back to the logical
/// count when the kernel does not expose the topology.
fn physical_cores(logical: u32) -> u32 {
    let Ok(content) = fs::read_to_string("/proc/cpuinfo") else {
        return logical;
    };
    let mut pairs = std::collections::BTreeSet::new();
    let mut physical_id = None;
    let mut core_id = None;
    for line in content.lines() {
        if line.trim().is_empty() {
            if let (Some(p), Some(c)) = (physical_id.take(), core_id.take()) {
                pairs.insert((p, c));
            }
            continue;
        }
        if let Some((key, value)) = line.split_once(':') {
            match key.trim() {
                "physical id" => physical_id = value.trim().parse::<u32>().ok(),
                "core id" => core_id = value.trim().parse::<u32>().ok(),
                _ => {}
            }
        }
    }
    if let (Some(p), Some(c)) = (physical_id, core_id) {
        pairs.insert((p, c));
    }
    let n = pairs.len() as u32;
    if n == 0 || n > logical {
        logical
    } else {
        n
    }
}

#[cfg(target_arch = "x86_64")]
fn simd_features() -> Vec<String> {
    let mut features = Vec::new();
    let mut probe = |name: &str, detected: bool| {
        if detected {
            features.push(name.to_string());
        }
    };
    probe("sse2", std::arch::is_x86_feature_detected!("sse2"));
    probe("sse4.1", std::arch::is_x86_feature_detected!("sse4.1"));
    probe("sse4.2", std::arch::is_x86_feature_detected!("sse4.2"));
    probe("avx", std::arch::is_x86_feature_detected!("avx"));
    probe("avx2", std::arch::is_x86_feature_detected!("avx2"));
    probe("fma", std::arch::is_x86_feature_detected!("fma"));
    probe("avx512f", std::arch::is_x86_feature_detected!("avx512f"));
    features
}

#[cfg(target_arch = "aarch64")]
fn simd_features() -> Vec<String> {
    let mut features = Vec::new();
    if std::arch::is_aarch64_feature_detected!("neon") {
        features.push("neon".to_string());
    }
    if std::arch::is_aarch64_feature_detected!("sve") {
        features.push("sve".to_string());
    }
    features
}

#[cfg(not(any(target_arch = "x86_64", target_arch = "aarch64")))]
fn simd_features() -> Vec<String> {
    Vec::new()
}

pub fn capture_environment() -> EnvInfo {
    let logical = logical_cores();
    let physical = physical_cores(logical);
    EnvInfo {
        os: std::env::consts::OS.to_string(),
        os_version: os_version(),
        cpu_model: cpu_model(),
        physical_cores: physical.max(1),
        logical_cores: logical.max(physical).max(1),
        simd_features: simd_features(),
        compiler: env!("PIXELPROOF_BUILD_COMPILER").to_string(),
        opt_flags: env!("PIXELPROOF_BUILD_FLAGS").to_string(),
        build_timestamp: env!("PIXELPROOF_BUILD_TIMESTAMP").to_string(),
        harness_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_counts_are_sane() {
        let env = capture_environment();
        assert!(env.logical_cores >= 1);
        assert!(env.physical_cores >= 1);
        assert!(env.logical_cores >= env.physical_cores);
    }

    #[test]
    fn build_metadata_is_populated() {
        let env = capture_environment();
        assert!(!env.opt_flags.is_empty());
        assert!(!env.compiler.is_empty());
        assert!(!env.harness_version.is_empty());
    }

    #[test]
    fn capture_is_stable_within_a_process() {
        assert_eq!(capture_environment(), capture_environment());
    }
}
