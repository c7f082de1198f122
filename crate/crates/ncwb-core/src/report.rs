//! Machine-readable pass/fail reports.

use serde::Serialize;

/// One named check with its verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

/// A named bundle of checks plus free-form scope notes.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub title: String,
    pub items: Vec<CheckItem>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            items: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, passed: bool, details: impl Into<String>) {
        self.items.push(CheckItem {
            name: name.into(),
            passed,
            details: details.into(),
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// True iff every item passed.
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("== {} ==\n", self.title);
        for item in &self.items {
            let tag = if item.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("[{tag}] {}: {}\n", item.name, item.details));
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}
