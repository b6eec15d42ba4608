use std::fmt::Write as _;
use std::path::Path;

use curvjet::report::Report;
use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::commands::CliError;

/// The document printed by every subcommand.
#[derive(Debug, Serialize)]
pub struct Document {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub pass: bool,
    #[serde(flatten)]
    pub report: Report,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
}

impl Document {
    pub fn new(command: &'static str, config: Value, report: Report) -> Self {
        Document {
            tool: "curvjet",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            pass: report.pass(),
            report,
            result: None,
        }
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Text => Ok(self.text()),
        }
    }

    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.tool, self.version, self.command);
        let _ = writeln!(s, "config {}", self.config);
        for c in &self.report.checks {
            let tag = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{tag} {} residual={:.3e} threshold={:.1e}", c.name, c.residual, c.threshold);
        }
        for (k, v) in &self.report.info {
            let _ = writeln!(s, "info {k} = {v}");
        }
        if let Some(r) = &self.result {
            let _ = writeln!(s, "result {r}");
        }
        let failed = self.report.failures().count();
        let _ = writeln!(
            s,
            "summary {} ({} checks, {failed} failed)",
            if self.pass { "PASS" } else { "FAIL" },
            self.report.checks.len()
        );
        s
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    std::fs::write(path, serde_json::to_string(value)? + "\n")?;
    Ok(())
}
