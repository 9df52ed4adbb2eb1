//! Campaign reports: one margin record per (trial, functional, side), plus
//! counters and margin summaries.
//!
//! Every inequality is stored as `lhs ≤ rhs` with `margin = rhs − lhs`, so a
//! negative margin beyond the slack is a violation.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use qentropy::entropy::nats_to_bits;
use serde::Serialize;

/// Margin below which a nontrivial trial is counted as near-trivial rather
/// than strict.
pub const NEAR_TRIVIAL_MARGIN: f64 = 1e-7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginRecord {
    pub trial: u64,
    pub dim: usize,
    pub functional: String,
    pub side: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: f64,
    pub trivial: bool,
    pub violation: bool,
}

impl MarginRecord {
    pub fn new(trial: u64, dim: usize, functional: impl Into<String>, side: impl Into<String>) -> Self {
        Self {
            trial,
            dim,
            functional: functional.into(),
            side: side.into(),
            lhs: None,
            rhs: None,
            margin: 0.0,
            trivial: false,
            violation: false,
        }
    }

    /// Records `lhs ≤ rhs` with an explicit margin (callers handle sentinels).
    pub fn inequality(mut self, lhs: f64, rhs: f64, margin: f64, tol: f64) -> Self {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self.margin = margin;
        self.violation = margin < -tol;
        self
    }

    pub fn trivial(mut self, trivial: bool) -> Self {
        self.trivial = trivial;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginSummary {
    pub count: usize,
    /// Margins that are `±∞` (log-determinant sentinel) are counted here and
    /// left out of min/max/mean.
    pub infinite: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
}

impl MarginSummary {
    fn of<'a>(margins: impl Iterator<Item = &'a f64>) -> Self {
        let (mut count, mut infinite, mut sum) = (0, 0, 0.0);
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &m in margins {
            count += 1;
            if !m.is_finite() {
                infinite += 1;
                continue;
            }
            sum += m;
            min = min.min(m);
            max = max.max(m);
        }
        let finite = count - infinite;
        Self {
            count,
            infinite,
            min: (finite > 0).then_some(min),
            max: (finite > 0).then_some(max),
            mean: (finite > 0).then(|| sum / finite as f64),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub seed: Option<u64>,
    pub flags: serde_json::Value,
    pub units: Units,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
    pub pass: bool,
    pub hard_violations: usize,
    pub counters: BTreeMap<String, u64>,
    /// Keyed by `functional/side`, plus `all`.
    pub summary: BTreeMap<String, MarginSummary>,
    pub records: Vec<MarginRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl Report {
    /// Assembles a report; `pass` is true iff no record is a violation and
    /// `extra_violations` is zero.
    pub fn build(
        command: &str,
        seed: Option<u64>,
        flags: serde_json::Value,
        mut records: Vec<MarginRecord>,
        mut counters: BTreeMap<String, u64>,
        extra_violations: usize,
    ) -> Self {
        records.sort_by_key(|r| r.trial);
        let hard_violations = records.iter().filter(|r| r.violation).count() + extra_violations;
        counters.insert("records".into(), records.len() as u64);
        counters.insert("violations".into(), hard_violations as u64);
        let mut report = Self {
            command: command.to_string(),
            seed,
            flags,
            units: Units::Nats,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            pass: hard_violations == 0,
            hard_violations,
            counters,
            summary: BTreeMap::new(),
            records,
            details: None,
        };
        report.summarize();
        report
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = Some(details);
        self
    }

    fn summarize(&mut self) {
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in &self.records {
            groups
                .entry(format!("{}/{}", r.functional, r.side))
                .or_default()
                .push(r.margin);
        }
        self.summary = groups
            .iter()
            .map(|(k, v)| (k.clone(), MarginSummary::of(v.iter())))
            .collect();
        self.summary
            .insert("all".into(), MarginSummary::of(self.records.iter().map(|r| &r.margin)));
    }

    /// Converts logarithmic entropies (von Neumann, log-det) to bits.
    /// Verdicts are already fixed in nats and are not revisited.
    pub fn into_units(mut self, units: Units) -> Self {
        if units == Units::Bits && self.units == Units::Nats {
            for r in &mut self.records {
                if r.functional == "von-neumann" || r.functional == "log-det" {
                    r.lhs = r.lhs.map(nats_to_bits);
                    r.rhs = r.rhs.map(nats_to_bits);
                    r.margin = nats_to_bits(r.margin);
                }
            }
            self.units = Units::Bits;
            self.summarize();
        }
        self
    }

    pub fn count(&self, counter: &str) -> u64 {
        self.counters.get(counter).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trial", "dim", "functional", "side", "lhs", "rhs", "margin", "trivial"])?;
        // Debug formatting switches to exponent form for tiny margins.
        let num = |x: Option<f64>| x.map(|v| format!("{v:?}")).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                r.trial.to_string(),
                r.dim.to_string(),
                r.functional.clone(),
                r.side.clone(),
                num(r.lhs),
                num(r.rhs),
                num(Some(r.margin)),
                r.trivial.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => {
                let mut buf = Vec::new();
                self.write_csv(&mut buf).expect("writing to memory");
                String::from_utf8(buf).expect("csv is utf-8")
            }
        }
    }
}

/// Adds one to a named counter.
pub(crate) fn bump(counters: &mut BTreeMap<String, u64>, name: &str) {
    *counters.entry(name.to_string()).or_insert(0) += 1;
}
