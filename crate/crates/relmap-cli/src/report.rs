//! Report assembly: ordered JSON documents with explicit units per numeric
//! field, plus a flat key,value CSV rendering of the same content.

use serde_json::{Map, Value};

/// A report document with the fixed top-level shape
/// `{"meta": .., "inputs": .., "results": ..}`. Field order is insertion
/// order, so identical invocations serialize byte-identically.
pub struct Report {
    meta: Map<String, Value>,
    inputs: Map<String, Value>,
    results: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut meta = Map::new();
        meta.insert("tool".into(), "relmap".into());
        meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        meta.insert("command".into(), command.into());
        let argv: Vec<Value> = std::env::args().skip(1).map(Value::from).collect();
        meta.insert("invocation".into(), Value::Array(argv));
        Report {
            meta,
            inputs: Map::new(),
            results: Map::new(),
        }
    }

    /// Record the RNG contract for a randomized run.
    pub fn rng(&mut self, algorithm: &str, seed: u64) {
        self.meta.insert("rng_algorithm".into(), algorithm.into());
        self.meta.insert("rng_seed".into(), seed.into());
    }

    pub fn input(&mut self, key: &str, value: f64, unit: &str) {
        push_number(&mut self.inputs, key, value, unit);
    }

    pub fn input_count(&mut self, key: &str, value: u64) {
        self.inputs.insert(key.into(), value.into());
        self.inputs.insert(format!("{key}_unit"), "count".into());
    }

    pub fn input_text(&mut self, key: &str, value: &str) {
        self.inputs.insert(key.into(), value.into());
    }

    pub fn result(&mut self, key: &str, value: f64, unit: &str) {
        push_number(&mut self.results, key, value, unit);
    }

    /// A numeric result that may be absent (`null`) — e.g. a mean with no
    /// observations. The unit companion is always present.
    pub fn result_opt(&mut self, key: &str, value: Option<f64>, unit: &str) {
        match value {
            Some(v) => push_number(&mut self.results, key, v, unit),
            None => {
                self.results.insert(key.into(), Value::Null);
                self.results.insert(format!("{key}_unit"), unit.into());
            }
        }
    }

    /// A mean that may be finite (number) or unbounded (string marker).
    pub fn result_mean(&mut self, key: &str, value: Option<relmap::MeanCycles>, unit: &str) {
        let rendered = match value {
            Some(relmap::MeanCycles::Finite(v)) => json_number(v),
            Some(relmap::MeanCycles::Unbounded) => "unbounded".into(),
            None => Value::Null,
        };
        self.results.insert(key.into(), rendered);
        self.results.insert(format!("{key}_unit"), unit.into());
    }

    pub fn result_count(&mut self, key: &str, value: u64) {
        self.results.insert(key.into(), value.into());
        self.results.insert(format!("{key}_unit"), "count".into());
    }

    pub fn result_text(&mut self, key: &str, value: &str) {
        self.results.insert(key.into(), value.into());
    }

    pub fn result_value(&mut self, key: &str, value: Value) {
        self.results.insert(key.into(), value);
    }

    pub fn to_json(&self) -> String {
        let mut doc = Map::new();
        doc.insert("meta".into(), Value::Object(self.meta.clone()));
        doc.insert("inputs".into(), Value::Object(self.inputs.clone()));
        doc.insert("results".into(), Value::Object(self.results.clone()));
        let mut text =
            serde_json::to_string_pretty(&Value::Object(doc)).expect("report serializes");
        text.push('\n');
        text
    }

    /// Flat `key,value` rendering with section-prefixed keys.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for (section, map) in [
            ("meta", &self.meta),
            ("inputs", &self.inputs),
            ("results", &self.results),
        ] {
            for (key, value) in map {
                out.push_str(&format!("{section}.{key},{}\n", csv_cell(value)));
            }
        }
        out
    }
}

fn push_number(map: &mut Map<String, Value>, key: &str, value: f64, unit: &str) {
    map.insert(key.into(), json_number(value));
    map.insert(format!("{key}_unit"), unit.into());
}

/// `Value::from(f64)` maps non-finite numbers to null; reports never carry
/// non-finite values, so treat one as a bug.
fn json_number(value: f64) -> Value {
    assert!(value.is_finite(), "non-finite value in report: {value}");
    Value::from(value)
}

fn csv_cell(value: &Value) -> String {
    let raw = match value {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        Value::Array(items) => items
            .iter()
            .map(|v| match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            })
            .collect::<Vec<_>>()
            .join(" "),
        other => other.to_string(),
    };
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}
