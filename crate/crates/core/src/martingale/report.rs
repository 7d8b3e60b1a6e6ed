use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::convergence::ConvergenceProfile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub value: bool,
    /// Name of the profile or scalar the verdict is read from.
    pub subject: String,
}

/// Named profiles, scalars and boolean verdicts of one experiment. Maps are
/// ordered so that serialization is deterministic.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub profiles: BTreeMap<String, ConvergenceProfile>,
    pub scalars: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, VerdictEntry>,
    pub notes: Vec<String>,
    /// Set when a weak-topology hypothesis was replaced by its finite-dimensional
    /// norm counterpart.
    pub surrogate: bool,
}

impl ExperimentReport {
    pub fn new(name: impl Into<String>) -> Self {
        ExperimentReport { name: name.into(), ..Default::default() }
    }

    pub fn profile(&mut self, name: &str, profile: ConvergenceProfile) {
        self.profiles.insert(name.to_string(), profile);
    }

    pub fn scalar(&mut self, name: &str, value: f64) {
        self.scalars.insert(name.to_string(), value);
    }

    /// Records a verdict; panics if `subject` names neither a profile nor a scalar.
    pub fn verdict(&mut self, name: &str, value: bool, subject: &str) {
        assert!(
            self.profiles.contains_key(subject) || self.scalars.contains_key(subject),
            "verdict {name} references unknown subject {subject}"
        );
        self.verdicts.insert(name.to_string(), VerdictEntry { value, subject: subject.to_string() });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn get(&self, verdict: &str) -> Option<bool> {
        self.verdicts.get(verdict).map(|v| v.value)
    }

    /// Merges `other` under the prefix `prefix.`.
    pub fn absorb(&mut self, prefix: &str, other: ExperimentReport) {
        for (k, v) in other.profiles {
            self.profiles.insert(format!("{prefix}.{k}"), v);
        }
        for (k, v) in other.scalars {
            self.scalars.insert(format!("{prefix}.{k}"), v);
        }
        for (k, mut v) in other.verdicts {
            v.subject = format!("{prefix}.{}", v.subject);
            self.verdicts.insert(format!("{prefix}.{k}"), v);
        }
        self.notes.extend(other.notes.into_iter().map(|n| format!("{prefix}: {n}")));
        self.surrogate |= other.surrogate;
    }

    /// Flat `(metric, value)` rows: scalars, profile entries `profile.<name>.c_<k>`
    /// and verdicts `verdict.<name>` as 1 or 0.
    pub fn metrics(&self) -> Vec<(String, f64)> {
        let mut rows: Vec<(String, f64)> = self.scalars.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for (name, p) in &self.profiles {
            for (k, c) in p.c.iter().enumerate() {
                rows.push((format!("profile.{name}.c_{}", k + 1), *c));
            }
        }
        for (name, v) in &self.verdicts {
            rows.push((format!("verdict.{name}"), if v.value { 1.0 } else { 0.0 }));
        }
        rows
    }
}

/// Writes `experiment,metric,value` rows for every report.
pub fn write_summary_csv<W: Write>(reports: &[ExperimentReport], writer: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["experiment", "metric", "value"])?;
    for r in reports {
        for (metric, value) in r.metrics() {
            w.write_record([r.name.as_str(), metric.as_str(), value.to_string().as_str()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convergence::Mode;

    #[test]
    fn metrics_and_csv() {
        let mut r = ExperimentReport::new("demo");
        r.profile("p", ConvergenceProfile::new(Mode::Order, vec![0.5, 0.1], None, 0.2));
        r.scalar("s", 2.5);
        r.verdict("ok", true, "p");
        let mut buf = Vec::new();
        write_summary_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "experiment,metric,value\ndemo,s,2.5\ndemo,profile.p.c_1,0.5\ndemo,profile.p.c_2,0.1\ndemo,verdict.ok,1\n"
        );
    }

    #[test]
    #[should_panic(expected = "unknown subject")]
    fn verdict_requires_subject() {
        ExperimentReport::new("x").verdict("v", true, "missing");
    }
}
