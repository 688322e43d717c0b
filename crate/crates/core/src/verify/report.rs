use std::fmt;

use serde::Serialize;

use super::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(x) => write!(f, "{x:?}"),
            Value::Int(x) => write!(f, "{x}"),
            Value::Bool(x) => write!(f, "{x}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x)
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

/// One CSV line: `(experiment, p, n, seed, statistic, value)`. A missing seed
/// marks a summary over all replicas.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub p: String,
    pub n: Option<usize>,
    pub seed: Option<u64>,
    pub statistic: String,
    pub value: Value,
}

impl Row {
    pub fn new(
        experiment: &str,
        p: impl ToString,
        n: Option<usize>,
        seed: Option<u64>,
        statistic: &str,
        value: impl Into<Value>,
    ) -> Self {
        Row {
            experiment: experiment.to_string(),
            p: p.to_string(),
            n,
            seed,
            statistic: statistic.to_string(),
            value: value.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    BoundFailed,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub outcome: Outcome,
    pub notes: Vec<String>,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub fn find(&self, p: &str, n: Option<usize>, seed: Option<u64>, statistic: &str) -> Option<&Value> {
        self.rows
            .iter()
            .find(|r| r.p == p && r.n == n && r.seed == seed && r.statistic == statistic)
            .map(|r| &r.value)
    }

    pub fn float(&self, p: &str, n: Option<usize>, seed: Option<u64>, statistic: &str) -> Option<f64> {
        match self.find(p, n, seed, statistic)? {
            Value::Float(x) => Some(*x),
            Value::Int(x) => Some(*x as f64),
            _ => None,
        }
    }

    /// Rows only, with the column header line.
    pub fn csv_body(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "p", "n", "seed", "statistic", "value"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.experiment.clone(),
                r.p.clone(),
                r.n.map_or_else(String::new, |n| n.to_string()),
                r.seed.map_or_else(|| "all".to_string(), |s| s.to_string()),
                r.statistic.clone(),
                r.value.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 fields")
    }

    /// `#`-prefixed header with the resolved config, seeds and outcome, then the body.
    pub fn to_csv(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        let mut out = format!(
            "# experiment: {}\n# config: {}\n# seeds: {}\n# outcome: {}\n",
            self.experiment,
            self.config.to_json(),
            seeds.join(" "),
            serde_json::to_string(&self.outcome).expect("outcome serializes").trim_matches('"'),
        );
        for note in &self.notes {
            out.push_str(&format!("# note: {note}\n"));
        }
        out.push_str(&self.csv_body());
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
