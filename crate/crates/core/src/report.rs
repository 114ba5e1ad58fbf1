use std::fmt;

use serde::Serialize;

use crate::model::UnitSchedule;

/// Outcome of one numerical check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub id: String,
    pub pass: bool,
    /// Informational checks never fail a report.
    pub required: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<UnitSchedule>,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConditionCheck {
    pub fn new(id: impl Into<String>, pass: bool, required: bool, lhs: f64, rhs: f64) -> Self {
        Self {
            id: id.into(),
            pass,
            required,
            unit: None,
            witness: None,
            lhs,
            rhs,
            note: None,
        }
    }

    pub fn unit(mut self, id: &str) -> Self {
        self.unit = Some(id.to_string());
        self
    }

    pub fn witness(mut self, x: UnitSchedule) -> Self {
        self.witness = Some(x);
        self
    }

    pub fn maybe_witness(mut self, x: Option<UnitSchedule>) -> Self {
        self.witness = x;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub subject: String,
    pub checks: Vec<ConditionCheck>,
}

impl VerificationReport {
    pub fn new(subject: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, check: ConditionCheck) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.checks.extend(other.checks);
    }

    /// True when every required check passed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass || !c.required)
    }

    /// First check with the given id.
    pub fn get(&self, id: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    /// True when every check with the given id passed (and at least one exists).
    pub fn holds(&self, id: &str) -> bool {
        let mut any = false;
        for c in self.checks.iter().filter(|c| c.id == id) {
            any = true;
            if !c.pass {
                return false;
            }
        }
        any
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| c.required && !c.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serialization is infallible")
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.subject)?;
        for c in &self.checks {
            let verdict = match (c.pass, c.required) {
                (true, _) => "pass",
                (false, true) => "FAIL",
                (false, false) => "info",
            };
            write!(
                f,
                "  {verdict} {:<18} lhs={:.4} rhs={:.4}",
                c.id, c.lhs, c.rhs
            )?;
            if let Some(unit) = &c.unit {
                write!(f, " unit={unit}")?;
            }
            if let Some(w) = &c.witness {
                let g: Vec<String> = w.g.iter().map(|v| format!("{v:.4}")).collect();
                write!(f, " at u={:?} g=[{}]", w.u, g.join(", "))?;
            }
            if let Some(note) = &c.note {
                write!(f, " ({note})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
