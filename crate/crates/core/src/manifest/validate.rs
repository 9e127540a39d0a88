//! Semantic lints over a parsed manifest.
//!
//! These catch the configurations that parse cleanly but execute as silent
//! errors, above all the factor-255 domain mismatch between byte-scale and
//! unit-scale normalization parameters.

use serde::Serialize;

use super::{ConversionOrder, Manifest, NormDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueCode {
    DomainMismatch,
    OrderDomainConflict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    pub code: IssueCode,
    pub message: String,
}

impl std::fmt::Display for Issue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev}: {}", self.message)
    }
}

/// Magnitude boundary separating plausible unit-scale means from
/// byte-scale ones.
const UNIT_MAGNITUDE_LIMIT: f64 = 1.5;

/// Run all lints. Issues are data, not errors; an empty list means the
/// manifest raised no suspicion.
pub fn validate(m: &Manifest) -> Vec<Issue> {
    let mut issues = Vec::new();
    let norm = &m.normalization;
    let max_mean = norm.mean.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));

    match (m.conversion_order, norm.domain) {
        (ConversionOrder::ConvertFirst, NormDomain::ByteScale) => issues.push(Issue {
            severity: Severity::Warning,
            code: IssueCode::OrderDomainConflict,
            message: "conversion_order convert_first expects domain unit_scale; \
                      the pipeline will refuse to run this combination"
                .into(),
        }),
        (ConversionOrder::NormalizeFirst, NormDomain::UnitScale) => issues.push(Issue {
            severity: Severity::Warning,
            code: IssueCode::OrderDomainConflict,
            message: "conversion_order normalize_first expects domain byte_scale; \
                      the pipeline will refuse to run this combination"
                .into(),
        }),
        _ => {}
    }

    match norm.domain {
        NormDomain::UnitScale if max_mean > UNIT_MAGNITUDE_LIMIT => issues.push(Issue {
            severity: Severity::Warning,
            code: IssueCode::DomainMismatch,
            message: format!(
                "mean magnitude {max_mean} looks byte-scaled but domain is unit_scale: \
                 likely domain mismatch (values off by a factor of about 255)"
            ),
        }),
        NormDomain::ByteScale if max_mean > 0.0 && max_mean <= UNIT_MAGNITUDE_LIMIT => {
            issues.push(Issue {
                severity: Severity::Warning,
                code: IssueCode::DomainMismatch,
                message: format!(
                    "mean magnitude {max_mean} looks unit-scaled but domain is byte_scale: \
                     likely domain mismatch (values off by a factor of about 255)"
                ),
            })
        }
        _ => {}
    }

    issues
}
