//! Versioned reports, bound checks and JSON/CSV output.

use std::fs;
use std::io::Write;
use std::path::Path;

use ctxlab::mc::RateEstimate;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: u32 = 1;

/// How a value is compared with its bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// Value at least the bound, up to three binomial sigmas.
    Ge,
    /// Value at most the bound, up to three binomial sigmas.
    Le,
}

/// Parameters a report was produced with. Fields that do not apply to a
/// command are null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub game: Option<String>,
    pub compiler: Option<String>,
    pub prover: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub lambda: Option<usize>,
    pub tcf: Option<String>,
    pub fhe: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub prover: String,
    pub metric: String,
    pub value: f64,
    pub exact: Option<String>,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
    pub bound: Option<f64>,
    pub relation: Option<Relation>,
    pub formula: Option<String>,
    pub within_bound: Option<bool>,
}

impl Row {
    /// A value with nothing to compare against.
    pub fn plain(prover: &str, metric: &str, value: f64) -> Self {
        Row {
            prover: prover.into(),
            metric: metric.into(),
            value,
            exact: None,
            stderr: None,
            trials: None,
            bound: None,
            relation: None,
            formula: None,
            within_bound: None,
        }
    }

    /// An exact value checked against `bound` with a `1e-9` slack.
    pub fn exact(prover: &str, metric: &str, value: f64, bound: f64, relation: Relation, formula: &str) -> Self {
        Row {
            bound: Some(bound),
            relation: Some(relation),
            formula: Some(formula.into()),
            within_bound: Some(holds(value, bound, relation, 1e-9)),
            ..Row::plain(prover, metric, value)
        }
    }

    /// A Monte Carlo estimate checked against `bound` with three binomial
    /// sigmas taken at the bound.
    pub fn estimate(
        prover: &str,
        metric: &str,
        estimate: &RateEstimate,
        bound: f64,
        relation: Relation,
        formula: &str,
    ) -> Self {
        let p = bound.clamp(0.0, 1.0);
        let slack = 3.0 * (p * (1.0 - p) / estimate.trials as f64).sqrt() + 1e-9;
        Row {
            stderr: Some(estimate.stderr),
            trials: Some(estimate.trials),
            bound: Some(bound),
            relation: Some(relation),
            formula: Some(formula.into()),
            within_bound: Some(holds(estimate.rate, bound, relation, slack)),
            ..Row::plain(prover, metric, estimate.rate)
        }
    }
}

fn holds(value: f64, bound: f64, relation: Relation, slack: f64) -> bool {
    match relation {
        Relation::Ge => value >= bound - slack,
        Relation::Le => value <= bound + slack,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub config: RunConfig,
    pub rows: Vec<Row>,
}

fn cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

impl Relation {
    fn name(self) -> &'static str {
        match self {
            Relation::Ge => "ge",
            Relation::Le => "le",
        }
    }
}

impl Report {
    pub fn new(command: &str, config: RunConfig, rows: Vec<Row>) -> Self {
        Report {
            schema: SCHEMA,
            command: command.into(),
            config,
            rows,
        }
    }

    /// False when some checked row lies outside its bound.
    pub fn all_within_bounds(&self) -> bool {
        self.rows.iter().all(|r| r.within_bound != Some(false))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(vec![]);
        w.write_record(CSV_HEADER).map_err(csv_error)?;
        let c = &self.config;
        for r in &self.rows {
            let record = [
                self.schema.to_string(),
                self.command.clone(),
                cell(&c.game),
                cell(&c.compiler),
                cell(&c.trials),
                cell(&c.seed),
                cell(&c.lambda),
                cell(&c.tcf),
                cell(&c.fhe),
                r.prover.clone(),
                r.metric.clone(),
                r.value.to_string(),
                cell(&r.exact),
                cell(&r.stderr),
                cell(&r.trials),
                cell(&r.bound),
                r.relation.map(|x| x.name().to_string()).unwrap_or_default(),
                cell(&r.formula),
                cell(&r.within_bound),
            ];
            w.write_record(&record).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Write to `path`, choosing CSV for a `.csv` extension.
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let body = if path.extension().is_some_and(|e| e == "csv") {
            self.to_csv()?
        } else {
            self.to_json()
        };
        fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    /// Aligned text table for terminals.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let bound = match (r.relation, r.bound) {
                (Some(Relation::Ge), Some(b)) => format!(">= {b:.4}"),
                (Some(Relation::Le), Some(b)) => format!("<= {b:.4}"),
                _ => String::new(),
            };
            let mark = match r.within_bound {
                Some(true) => "ok",
                Some(false) => "VIOLATED",
                None => "",
            };
            let stderr = r.stderr.map(|s| format!("± {s:.4}")).unwrap_or_default();
            out.push_str(&format!(
                "{:<18} {:<18} {:>8.4} {:<10} {:<10} {}\n",
                r.prover, r.metric, r.value, stderr, bound, mark
            ));
        }
        out
    }
}

const CSV_HEADER: [&str; 19] = [
    "schema",
    "command",
    "game",
    "compiler",
    "trials_requested",
    "seed",
    "lambda",
    "tcf",
    "fhe",
    "prover",
    "metric",
    "value",
    "exact",
    "stderr",
    "trials",
    "bound",
    "relation",
    "formula",
    "within_bound",
];

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Append sessions as JSON lines, one object per line.
pub fn write_jsonl<T: Serialize>(
    out: &mut impl Write,
    prover: &str,
    items: impl IntoIterator<Item = T>,
) -> Result<(), CliError> {
    #[derive(Serialize)]
    struct Line<'a, T> {
        prover: &'a str,
        transcript: T,
    }
    for transcript in items {
        serde_json::to_writer(&mut *out, &Line { prover, transcript })
            .map_err(|e| CliError::Io(e.to_string()))?;
        out.write_all(b"\n").map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}
