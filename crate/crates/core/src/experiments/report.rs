use std::collections::BTreeMap;

use serde::Serialize;

use super::ExperimentConfig;
use crate::stat_tests::{Estimate, KsThreshold};

/// How a statistic is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rule {
    pub fn apply(self, statistic: f64, threshold: f64) -> bool {
        match self {
            Rule::Le => statistic <= threshold,
            Rule::Lt => statistic < threshold,
            Rule::Ge => statistic >= threshold,
            Rule::Gt => statistic > threshold,
        }
    }
}

/// A verdict that can be recomputed from its own fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestVerdict {
    pub statistic: f64,
    pub threshold: f64,
    pub rule: Rule,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_seed: Option<u64>,
}

impl TestVerdict {
    pub fn new(statistic: f64, rule: Rule, threshold: f64) -> Self {
        TestVerdict { statistic, threshold, rule, pass: rule.apply(statistic, threshold), null_seed: None }
    }

    pub fn le(statistic: f64, threshold: f64) -> Self {
        Self::new(statistic, Rule::Le, threshold)
    }

    pub fn ge(statistic: f64, threshold: f64) -> Self {
        Self::new(statistic, Rule::Ge, threshold)
    }

    pub fn gt(statistic: f64, threshold: f64) -> Self {
        Self::new(statistic, Rule::Gt, threshold)
    }

    pub fn lt(statistic: f64, threshold: f64) -> Self {
        Self::new(statistic, Rule::Lt, threshold)
    }

    /// Goodness of fit accepted: `D <= threshold`.
    pub fn ks_accept(d: f64, t: &KsThreshold) -> Self {
        TestVerdict { null_seed: Some(t.seed), ..Self::le(d, t.value) }
    }

    /// Goodness of fit rejected: `D > threshold`.
    pub fn ks_reject(d: f64, t: &KsThreshold) -> Self {
        TestVerdict { null_seed: Some(t.seed), ..Self::gt(d, t.value) }
    }

    /// `|value - target| <= k * stderr`.
    pub fn within(e: &Estimate, target: f64, k: f64) -> Self {
        Self::le((e.value - target).abs(), k * e.stderr)
    }

    pub fn recompute(&self) -> bool {
        self.rule.apply(self.statistic, self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: ExperimentConfig,
    pub estimates: BTreeMap<String, Estimate>,
    pub tests: BTreeMap<String, TestVerdict>,
    pub runtime_seconds: f64,
    /// Per-path samples, written as CSV rather than JSON.
    #[serde(skip)]
    pub samples: BTreeMap<String, Vec<f64>>,
}

impl ExperimentReport {
    pub fn new(name: &str, config: &ExperimentConfig) -> Self {
        ExperimentReport {
            name: name.to_string(),
            config: config.clone(),
            estimates: BTreeMap::new(),
            tests: BTreeMap::new(),
            runtime_seconds: 0.0,
            samples: BTreeMap::new(),
        }
    }

    pub fn estimate(&mut self, key: &str, e: Estimate) {
        self.estimates.insert(key.to_string(), e);
    }

    pub fn exact(&mut self, key: &str, value: f64) {
        self.estimate(key, Estimate::exact(value));
    }

    pub fn test(&mut self, key: &str, v: TestVerdict) {
        self.tests.insert(key.to_string(), v);
    }

    pub fn sample(&mut self, key: &str, values: Vec<f64>) {
        self.samples.insert(key.to_string(), values);
    }

    pub fn all_pass(&self) -> bool {
        self.tests.values().all(|t| t.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.tests.iter().filter(|(_, t)| !t.pass).map(|(k, _)| k.as_str()).collect()
    }

    /// Pretty JSON including the runtime.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Pretty JSON without `runtime_seconds`; identical configs give
    /// identical bodies.
    pub fn body_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let serde_json::Value::Object(map) = &mut v {
            map.remove("runtime_seconds");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn summary_line(&self) -> String {
        let n = self.tests.len();
        let passed = self.tests.values().filter(|t| t.pass).count();
        let status = if self.all_pass() { "PASS" } else { "FAIL" };
        let mut line = format!("{status} {:<16} {passed}/{n} tests  {:.1}s", self.name, self.runtime_seconds);
        let failed = self.failures();
        if !failed.is_empty() {
            line.push_str(&format!("  failed: {}", failed.join(", ")));
        }
        line
    }
}
