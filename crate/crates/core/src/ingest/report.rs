use serde::{Deserialize, Serialize};

/// One rejected or suspicious input row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowIssue {
    pub line: u64,
    pub field: String,
    pub message: String,
}

/// Per-row outcome of a parse. Serialized as the parse-report JSON.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub errors: Vec<RowIssue>,
    #[serde(default)]
    pub warnings: Vec<RowIssue>,
}

impl ParseReport {
    pub(crate) fn error(&mut self, line: u64, field: &str, message: impl Into<String>) {
        self.errors.push(RowIssue {
            line,
            field: field.to_string(),
            message: message.into(),
        });
    }

    pub(crate) fn warn(&mut self, line: u64, field: &str, message: impl Into<String>) {
        self.warnings.push(RowIssue {
            line,
            field: field.to_string(),
            message: message.into(),
        });
    }

    pub fn merge(&mut self, other: ParseReport) {
        self.errors.extend(other.errors);
        self.warnings.extend(other.warnings);
    }

    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
