use serde_json::{json, Map, Value};

/// One named result line.
#[derive(Debug, Clone)]
pub struct Record {
    pub name: String,
    pub value: Value,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

impl Record {
    /// A value with no tolerance attached.
    pub fn info(name: impl Into<String>, value: Value) -> Self {
        Record { name: name.into(), value, residual: None, tolerance: None, pass: true }
    }

    /// A residual compared against `tolerance`; NaN never passes.
    pub fn check(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Record { name: name.into(), value: Value::Null, residual: Some(residual), tolerance: Some(tolerance), pass: residual <= tolerance }
    }

    pub fn with_value(mut self, value: Value) -> Self {
        self.value = value;
        self
    }

    /// A computation that could not finish.
    pub fn failed(name: impl Into<String>, message: String) -> Self {
        Record { name: name.into(), value: json!({ "error": message }), residual: None, tolerance: None, pass: false }
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), json!(self.name));
        m.insert("value".into(), self.value.clone());
        m.insert("residual".into(), self.residual.map_or(Value::Null, number));
        m.insert("tolerance".into(), self.tolerance.map_or(Value::Null, number));
        m.insert("pass".into(), json!(self.pass));
        Value::Object(m)
    }
}

/// Finite floats as numbers, everything else as a string so the output stays valid JSON.
pub fn number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

pub fn numbers(vs: &[f64]) -> Value {
    Value::Array(vs.iter().copied().map(number).collect())
}

pub fn matrix(rows: &[Vec<f64>]) -> Value {
    Value::Array(rows.iter().map(|r| numbers(r)).collect())
}

pub struct Report {
    pub command: String,
    pub echo: Value,
    pub manifest_sha256: String,
    pub seed: u64,
    pub records: Vec<Record>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn to_json(&self, wall_time: Option<f64>) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        m.insert("arguments".into(), self.echo.clone());
        m.insert("manifest_sha256".into(), json!(self.manifest_sha256));
        m.insert("seed".into(), json!(self.seed));
        m.insert("results".into(), Value::Array(self.records.iter().map(Record::to_json).collect()));
        m.insert("pass".into(), json!(self.passed()));
        if let Some(t) = wall_time {
            m.insert("wall_time_s".into(), json!(t));
        }
        Value::Object(m)
    }
}
