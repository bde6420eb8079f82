//! Machine-readable verification reports.
//!
//! A report is assembled from numeric trial outcomes; values are rendered
//! once, at assembly time, so serialization is deterministic: the same
//! (check, seed, config) always produces the same bytes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qarith::Rat;
use crate::value::DensityValue;

/// One trial with its numbers still numeric.
pub struct Trial {
    pub sub_seed: u64,
    pub instance: String,
    pub lhs: DensityValue,
    pub rhs: DensityValue,
    pub margin: DensityValue,
    pub pass: bool,
}

/// A trial as serialized: values in wire form (`p/q` exact,
/// `f<bits>:<decimal>` float).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub sub_seed: u64,
    pub instance: String,
    pub lhs: String,
    pub rhs: String,
    pub margin: String,
    pub pass: bool,
}

impl From<&Trial> for TrialRecord {
    fn from(t: &Trial) -> Self {
        TrialRecord {
            sub_seed: t.sub_seed,
            instance: t.instance.clone(),
            lhs: t.lhs.to_wire(),
            rhs: t.rhs.to_wire(),
            margin: t.margin.to_wire(),
            pass: t.pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub seed: u64,
    pub trials: usize,
    pub records: Vec<TrialRecord>,
    pub min_margin: String,
    pub pass: bool,
}

impl VerificationReport {
    /// Aggregates numerically, then freezes everything into strings. The
    /// minimum margin is reported in the wire form of the trial attaining
    /// it; `trials` is the requested trial count (soundness records may
    /// push `records` past it).
    pub fn from_trials(check: &str, seed: u64, trials: usize, outcomes: &[Trial]) -> Self {
        let min = outcomes
            .iter()
            .min_by(|a, b| {
                a.margin
                    .to_rational()
                    .cmp(&b.margin.to_rational())
            })
            .map(|t| t.margin.to_wire())
            .unwrap_or_else(|| "0".to_string());
        VerificationReport {
            check: check.to_string(),
            seed,
            trials,
            records: outcomes.iter().map(TrialRecord::from).collect(),
            min_margin: min,
            pass: outcomes.iter().all(|t| t.pass),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per record with the report metadata repeated; an empty
    /// record list yields just the header.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "check",
            "seed",
            "trials",
            "sub_seed",
            "instance",
            "lhs",
            "rhs",
            "margin",
            "pass",
            "min_margin",
            "overall_pass",
        ])?;
        for r in &self.records {
            w.write_record([
                self.check.as_str(),
                &self.seed.to_string(),
                &self.trials.to_string(),
                &r.sub_seed.to_string(),
                &r.instance,
                &r.lhs,
                &r.rhs,
                &r.margin,
                &r.pass.to_string(),
                &self.min_margin,
                &self.pass.to_string(),
            ])?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::invalid("report", e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::invalid("report", e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut meta: Option<(String, u64, usize, String, bool)> = None;
        let mut records = Vec::new();
        for row in reader.records() {
            let row = row?;
            if row.len() != 11 {
                return Err(Error::invalid("report", "csv row must have 11 fields"));
            }
            let field = |i: usize| row.get(i).unwrap_or_default().to_string();
            let parse_u64 = |i: usize| -> Result<u64> {
                row.get(i)
                    .unwrap_or_default()
                    .parse()
                    .map_err(|_| Error::invalid("report", format!("bad integer in column {i}")))
            };
            let parse_bool = |i: usize| -> Result<bool> {
                match row.get(i).unwrap_or_default() {
                    "true" => Ok(true),
                    "false" => Ok(false),
                    other => Err(Error::invalid("report", format!("bad bool {other:?}"))),
                }
            };
            if meta.is_none() {
                meta = Some((
                    field(0),
                    parse_u64(1)?,
                    parse_u64(2)? as usize,
                    field(9),
                    parse_bool(10)?,
                ));
            }
            records.push(TrialRecord {
                sub_seed: parse_u64(3)?,
                instance: field(4),
                lhs: field(5),
                rhs: field(6),
                margin: field(7),
                pass: parse_bool(8)?,
            });
        }
        let (check, seed, trials, min_margin, pass) =
            meta.ok_or_else(|| Error::invalid("report", "csv has no data rows"))?;
        Ok(VerificationReport {
            check,
            seed,
            trials,
            records,
            min_margin,
            pass,
        })
    }
}

/// Whether a margin clears the slack for its arithmetic. Exact margins must
/// be nonnegative outright; float margins get one-sided room of
/// `relative_tolerance * max(1, |lhs|)`.
pub fn margin_passes(margin: &DensityValue, lhs: &DensityValue, relative_tolerance: &Rat) -> bool {
    let slack = match margin {
        DensityValue::Exact(_) => Rat::from_integer(0.into()),
        DensityValue::Float(_) => {
            let scale = lhs.abs().to_rational().max(Rat::from_integer(1.into()));
            relative_tolerance * scale
        }
    };
    margin.to_rational() >= -slack
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::{parse_decimal_rat, rat, rat_int};

    fn sample_report() -> VerificationReport {
        let outcomes = vec![
            Trial {
                sub_seed: 11,
                instance: "n=2, instance with, comma".into(),
                lhs: DensityValue::exact(rat(1, 2)),
                rhs: DensityValue::exact(rat(1, 4)),
                margin: DensityValue::exact(rat(1, 4)),
                pass: true,
            },
            Trial {
                sub_seed: 12,
                instance: "n=3".into(),
                lhs: DensityValue::exact(rat_int(1)),
                rhs: DensityValue::exact(rat_int(1)),
                margin: DensityValue::exact(rat(-1, 1_000_000)),
                pass: false,
            },
        ];
        VerificationReport::from_trials("demo", 7, 2, &outcomes)
    }

    #[test]
    fn aggregates_minimum_and_pass() {
        let report = sample_report();
        assert_eq!(report.min_margin, "-1/1000000");
        assert!(!report.pass);
        assert_eq!(report.records.len(), 2);
    }

    #[test]
    fn json_round_trip_is_stable() {
        let report = sample_report();
        let js = report.to_json().unwrap();
        let again = VerificationReport::from_json(&js).unwrap();
        assert_eq!(again, report);
        assert_eq!(again.to_json().unwrap(), js);
    }

    #[test]
    fn csv_round_trip_preserves_margins() {
        let report = sample_report();
        let csv_text = report.to_csv().unwrap();
        let back = VerificationReport::from_csv(&csv_text).unwrap();
        assert_eq!(back, report);

        // json -> csv -> json keeps every margin string.
        let js = back.to_json().unwrap();
        let from_json = VerificationReport::from_json(&js).unwrap();
        for (a, b) in from_json.records.iter().zip(&report.records) {
            assert_eq!(a.margin, b.margin);
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let report = VerificationReport::from_trials("demo", 1, 0, &[]);
        let csv_text = report.to_csv().unwrap();
        assert_eq!(csv_text.lines().count(), 1);
        assert!(VerificationReport::from_csv(&csv_text).is_err());
    }

    #[test]
    fn slack_is_one_sided_and_mode_aware() {
        let tol = parse_decimal_rat("1e-9").unwrap();
        let lhs = DensityValue::exact(rat(1, 2));

        // Exact margins pass only when truly nonnegative.
        let tiny_exact = DensityValue::exact(rat(-1, 1_000_000_000_000_i64));
        assert!(!margin_passes(&tiny_exact, &lhs, &tol));
        assert!(margin_passes(&DensityValue::exact(rat_int(0)), &lhs, &tol));

        // Float margins absorb sub-tolerance noise but not real violations.
        let noise = DensityValue::from_rat(&rat(-1, 1_000_000_000_000_i64), crate::value::EvalMode::float_default());
        assert!(margin_passes(&noise, &lhs, &tol));
        let real = DensityValue::from_rat(&rat(-1, 1_000), crate::value::EvalMode::float_default());
        assert!(!margin_passes(&real, &lhs, &tol));
    }
}
