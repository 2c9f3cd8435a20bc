//! Writing artifacts: every file carries the tool version and config hash.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ProjectConfig;
use crate::error::{CliError, CliResult};

pub const TOOL: &str = "fractune";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Name of the resolved configuration written beside each run's outputs.
pub const RESOLVED_CONFIG: &str = "config.resolved.toml";

/// Output context for one command invocation.
#[derive(Debug)]
pub struct Run {
    pub config: ProjectConfig,
    pub command: &'static str,
    hash: String,
    out_dir: PathBuf,
    written: Vec<PathBuf>,
    warnings: Vec<String>,
}

impl Run {
    pub fn new(config: ProjectConfig, command: &'static str, out_dir: &Path) -> CliResult<Self> {
        let hash = config.hash()?;
        std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
            path: out_dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            config,
            command,
            hash,
            out_dir: out_dir.to_path_buf(),
            written: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// One line identifying the producer of a file.
    pub fn banner(&self) -> String {
        format!(
            "{TOOL} {VERSION} command={} config_hash={}",
            self.command, self.hash
        )
    }

    pub fn meta(&self) -> Value {
        json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "config_hash": self.hash,
        })
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> CliResult<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Serialize `value` as a JSON object with a leading `meta` member.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<PathBuf> {
        let body = serde_json::to_value(value)
            .map_err(|e| CliError::Input(format!("serialize {name}: {e}")))?;
        let Value::Object(fields) = body else {
            return Err(CliError::Input(format!(
                "{name}: top-level value must be an object"
            )));
        };
        let mut doc = serde_json::Map::new();
        doc.insert("meta".into(), self.meta());
        doc.extend(fields);
        let mut text = serde_json::to_string_pretty(&Value::Object(doc))
            .expect("JSON values always serialize");
        text.push('\n');
        self.write_text(name, &text)
    }

    /// CSV with `#` comment lines naming the producer.
    pub fn write_csv(&mut self, name: &str, table: &Table) -> CliResult<PathBuf> {
        let text = table.to_csv(&self.banner());
        self.write_text(name, &text)
    }

    pub fn write_resolved_config(&mut self) -> CliResult<PathBuf> {
        let text = format!("# {}\n{}", self.banner(), self.config.to_toml()?);
        self.write_text(RESOLVED_CONFIG, &text)
    }
}

/// Shortest round-trip decimal, `nan`/`inf` spelled out, missing cells empty.
pub fn fmt_num(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) if x.is_nan() => "nan".into(),
        Some(x) if x.is_infinite() => if x > 0.0 { "inf" } else { "-inf" }.into(),
        Some(x) => format!("{x:?}"),
    }
}

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Extra `#` comment lines after the banner.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Self {
            header,
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, banner: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {banner}");
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.push_str(
            &String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8"),
        );
        out
    }
}

/// Make a label safe to use inside a file name.
pub fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
