//! Machine-readable check reports shared by the validation suites, the
//! matrix-oracle identity verifiers, and the CLI.

use serde::{Deserialize, Serialize};

/// One verified quantity. Exactly one of the z-score shape
/// (`exact_value`/`estimate`/`std_error`) or the KS shape (`p_value`) is
/// typically populated; `threshold` carries the acceptance bound that
/// produced `pass` (a z threshold, a significance level, or an absolute
/// tolerance, as stated in `quantity`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub quantity: String,
    pub exact_value: Option<f64>,
    pub estimate: Option<f64>,
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub n_samples: u64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckReport {
    /// z-score comparison of an estimate against an exact value.
    pub fn z_test(
        quantity: impl Into<String>,
        exact: f64,
        estimate: f64,
        std_error: f64,
        n_samples: u64,
        z_threshold: f64,
    ) -> Self {
        let pass = if std_error == 0.0 {
            estimate == exact
        } else {
            ((estimate - exact) / std_error).abs() <= z_threshold
        };
        CheckReport {
            quantity: quantity.into(),
            exact_value: Some(exact),
            estimate: Some(estimate),
            std_error: Some(std_error),
            p_value: None,
            n_samples,
            threshold: z_threshold,
            pass,
        }
    }

    /// KS-style check: pass iff the p-value exceeds the significance level.
    pub fn ks_test(
        quantity: impl Into<String>,
        statistic: f64,
        p_value: f64,
        n_samples: u64,
        significance: f64,
    ) -> Self {
        CheckReport {
            quantity: quantity.into(),
            exact_value: None,
            estimate: Some(statistic),
            std_error: None,
            p_value: Some(p_value),
            n_samples,
            threshold: significance,
            pass: p_value > significance,
        }
    }

    /// Absolute-tolerance comparison of two analytic values.
    pub fn analytic(
        quantity: impl Into<String>,
        exact: f64,
        got: f64,
        abs_tol: f64,
    ) -> Self {
        CheckReport {
            quantity: quantity.into(),
            exact_value: Some(exact),
            estimate: Some(got),
            std_error: None,
            p_value: None,
            n_samples: 0,
            threshold: abs_tol,
            pass: (got - exact).abs() <= abs_tol,
        }
    }

    /// A bare predicate with context numbers.
    pub fn predicate(quantity: impl Into<String>, observed: f64, threshold: f64, pass: bool) -> Self {
        CheckReport {
            quantity: quantity.into(),
            exact_value: None,
            estimate: Some(observed),
            std_error: None,
            p_value: None,
            n_samples: 0,
            threshold,
            pass,
        }
    }

    pub fn z_score(&self) -> Option<f64> {
        match (self.exact_value, self.estimate, self.std_error) {
            (Some(e), Some(m), Some(se)) if se > 0.0 => Some((m - e) / se),
            _ => None,
        }
    }
}

/// A named bundle of checks. `warnings` carries caveats that do not affect
/// the verdict, e.g. low sample counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckReport>,
    pub n_failed: usize,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, checks: Vec<CheckReport>) -> Self {
        let n_failed = checks.iter().filter(|c| !c.pass).count();
        SuiteReport {
            suite: suite.into(),
            checks,
            n_failed,
            passed: n_failed == 0,
            warnings: Vec::new(),
        }
    }
}
