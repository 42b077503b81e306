//! Experiment reports and their on-disk layout.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::stats::TestResult;
use crate::error::Result;

/// Default p-value floor.
pub const P_FLOOR: f64 = 0.001;

/// One sub-test of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `p > floor`.
    pub fn p_value(name: &str, r: TestResult, floor: f64) -> Self {
        Check {
            name: name.into(),
            statistic: r.statistic,
            p_value: r.p_value,
            pass: r.p_value > floor,
            detail: format!("df={}", r.df),
        }
    }

    /// Passes when `|error| <= tol`. The reported p-value is that of the
    /// z-score `error / se` when a standard error is known.
    pub fn tolerance(name: &str, error: f64, tol: f64, se: Option<f64>) -> Self {
        let p = match se {
            Some(se) => super::stats::z_test(error, se, 0.0).p_value,
            None => {
                if error.abs() <= tol {
                    1.0
                } else {
                    0.0
                }
            }
        };
        Check {
            name: name.into(),
            statistic: error,
            p_value: p,
            pass: error.abs() <= tol,
            detail: format!("tol={tol}"),
        }
    }

    /// Passes when `mismatches == 0`.
    pub fn exact(name: &str, mismatches: usize, total: usize) -> Self {
        Check {
            name: name.into(),
            statistic: mismatches as f64,
            p_value: if mismatches == 0 { 1.0 } else { 0.0 },
            pass: mismatches == 0,
            detail: format!("{mismatches} of {total} differ"),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
    pub seed: u64,
    pub config_hash: String,
    pub runtime_s: f64,
    #[serde(skip)]
    pub checks: Vec<Check>,
}

impl TestReport {
    /// Summarizes `checks` by the one with the smallest p-value; the report
    /// passes when all checks pass.
    pub fn from_checks(name: &str, n: usize, seed: u64, config_hash: String, checks: Vec<Check>) -> Self {
        let worst = checks
            .iter()
            .min_by(|a, b| a.p_value.total_cmp(&b.p_value))
            .expect("an experiment has at least one check");
        TestReport {
            name: name.into(),
            n,
            statistic: worst.statistic,
            p_value: worst.p_value,
            pass: checks.iter().all(|c| c.pass),
            seed,
            config_hash,
            runtime_s: 0.0,
            checks,
        }
    }

    /// One line per check, then the verdict.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "  {:<28} stat={:<12.6} p={:<10.4e} {} ({})\n",
                c.name,
                c.statistic,
                c.p_value,
                if c.pass { "ok" } else { "FAIL" },
                c.detail
            ));
        }
        s.push_str(&format!(
            "{} {} n={} p={:.4e} seed={}",
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.n,
            self.p_value,
            self.seed
        ));
        s
    }

    /// Writes `report.json` and `checks.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let json = serde_json::to_string_pretty(self)?;
        write_atomic(&dir.join("report.json"), json.as_bytes())?;
        let mut csv = Vec::new();
        writeln!(csv, "name,statistic,p_value,pass,detail")?;
        for c in &self.checks {
            writeln!(
                csv,
                "{},{:?},{:?},{},\"{}\"",
                c.name, c.statistic, c.p_value, c.pass, c.detail
            )?;
        }
        write_atomic(&dir.join("checks.csv"), &csv)?;
        Ok(())
    }
}

/// Writes to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Hex SHA-256 of the canonical JSON of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let canonical = serde_json::to_value(value).map(|v| v.to_string()).unwrap_or_default();
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> TestReport {
        let checks = vec![
            Check::tolerance("mean", 0.1, 0.3, Some(0.1)),
            Check::exact("identity", 0, 10),
        ];
        TestReport::from_checks("demo", 10, 3, config_hash(&serde_json::json!({"a": 1})), checks)
    }

    #[test]
    fn worst_check_leads() {
        let r = report();
        assert!(r.pass);
        assert!((r.p_value - 0.3173).abs() < 1e-3);
        assert_eq!(r.statistic, 0.1);
        let failing = TestReport::from_checks("x", 1, 0, String::new(), vec![Check::exact("e", 2, 5)]);
        assert!(!failing.pass);
        assert_eq!(failing.p_value, 0.0);
    }

    #[test]
    fn json_schema() {
        let dir = tempfile::tempdir().unwrap();
        report().write(dir.path()).unwrap();
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "config_hash",
                "n",
                "name",
                "p_value",
                "pass",
                "runtime_s",
                "seed",
                "statistic"
            ]
        );
        let csv = fs::read_to_string(dir.path().join("checks.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(!dir.path().join("report.json.tmp").exists());
    }

    #[test]
    fn hash_is_stable() {
        let a = config_hash(&serde_json::json!({"b": 1.0, "a": 2}));
        let b = config_hash(&serde_json::json!({"a": 2, "b": 1.0}));
        assert_eq!(a, b);
        assert_eq!(a.len(), 64);
        assert_ne!(a, config_hash(&serde_json::json!({"a": 3, "b": 1.0})));
    }
}
