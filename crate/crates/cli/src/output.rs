//! Report writers.
//!
//! JSON is the primary format: one pretty-printed object with sorted keys
//! and a trailing newline. CSV carries the same numbers (identical
//! 12-significant-digit rendering) behind a comment preamble recording the
//! canonical command line, the resolved configuration, the generator name
//! and the seed. Neither format embeds timestamps, so a repeated run writes
//! byte-identical files.

use std::path::Path;

use serde_json::Value;

use cltcert::distributions::GENERATOR_NAME;
use cltcert::report::fmt_sig12;

use crate::Failure;

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn format_name(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

/// One CSV cell: canonical number rendering, shared with JSON.
pub fn cell(x: f64) -> String {
    fmt_sig12(x)
}

/// Labels may carry commas; numbers never do.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub struct CsvTable {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

#[cfg(test)]
mod tests {
    #[test]
    fn fields_with_commas_or_quotes_get_quoted() {
        assert_eq!(super::csv_field("plain"), "plain");
        assert_eq!(super::csv_field("a, b"), "\"a, b\"");
        assert_eq!(super::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
    }
}

pub fn write_report(
    out: &Path,
    format: Format,
    command_line: &str,
    config: &Value,
    seed: u64,
    body: &Value,
    csv: &CsvTable,
) -> Result<(), Failure> {
    let text = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(body)
                .map_err(|e| Failure::Run(format!("cannot serialize the report: {e}")))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&format!("# command: {command_line}\n"));
            s.push_str(&format!(
                "# config: {}\n",
                serde_json::to_string(config)
                    .map_err(|e| Failure::Run(format!("cannot serialize the config: {e}")))?
            ));
            s.push_str(&format!("# generator: {GENERATOR_NAME}\n"));
            s.push_str(&format!("# seed: {seed}\n"));
            s.push_str(&csv.header.join(","));
            s.push('\n');
            for row in &csv.rows {
                debug_assert_eq!(row.len(), csv.header.len());
                let fields: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
                s.push_str(&fields.join(","));
                s.push('\n');
            }
            s
        }
    };
    std::fs::write(out, text)
        .map_err(|e| Failure::Run(format!("cannot write {}: {e}", out.display())))
}
