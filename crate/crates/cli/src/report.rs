//! The JSON report. Field order and check order are fixed so repeated runs
//! produce identical bytes.

use serde_json::{json, Map, Value};

use tqft_algebra::report::{Check, Report};

pub struct RunReport {
    pub command: String,
    pub field: &'static str,
    pub order: u32,
    checks: Vec<(String, Check)>,
    pub data: Map<String, Value>,
}

impl RunReport {
    pub fn new(command: &str, field: &'static str, order: u32) -> Self {
        RunReport { command: command.to_string(), field, order, checks: Vec::new(), data: Map::new() }
    }

    pub fn add(&mut self, module: &str, prefix: &str, rep: Report) {
        for mut c in rep.checks {
            c.name = format!("{}{}", prefix, c.name);
            self.checks.push((module.to_string(), c));
        }
    }

    pub fn check(&mut self, module: &str, name: &str, ok: bool, note: &str) {
        let mut r = Report::new();
        if ok {
            r.pass(name);
        } else {
            r.fail(name, note);
        }
        self.add(module, "", r);
    }

    pub fn data(&mut self, key: &str, v: Value) {
        self.data.insert(key.to_string(), v);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, c)| c.passed())
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|(m, c)| {
                json!({
                    "module": m,
                    "name": c.name,
                    "passed": c.passed(),
                    "residual": c.residual.iter().map(|(r, k, v)| json!([r, k, v])).collect::<Vec<_>>(),
                    "note": c.note,
                })
            })
            .collect();
        json!({
            "command": self.command,
            "field": self.field,
            "order": self.order,
            "passed": self.passed(),
            "checks": checks,
            "data": Value::Object(self.data.clone()),
        })
    }

    /// One line per check, for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for (m, c) in &self.checks {
            let status = if c.passed() { "ok  " } else { "FAIL" };
            s.push_str(&format!("{} {}: {}", status, m, c.name));
            if let Some(n) = &c.note {
                s.push_str(&format!(" ({})", n));
            } else if !c.residual.is_empty() {
                s.push_str(&format!(" ({} nonzero residual entries)", c.residual.len()));
            }
            s.push('\n');
        }
        s.push_str(if self.passed() { "all checks passed\n" } else { "some checks failed\n" });
        s
    }
}
