//! Output directory handling: CSV with a provenance comment line, JSON
//! summaries, gnuplot tables and SVG.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use crate::config::Settings;
use crate::error::CliResult;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct OutputDir {
    dir: PathBuf,
    config_hash: String,
    written: Vec<String>,
}

/// One whitespace-separated table, blocks separated by blank lines.
pub struct Table {
    pub columns: Vec<String>,
    pub blocks: Vec<(String, Vec<Vec<f64>>)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            blocks: Vec::new(),
        }
    }

    pub fn block(&mut self, label: impl Into<String>, rows: Vec<Vec<f64>>) {
        self.blocks.push((label.into(), rows));
    }
}

fn gnuplot_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "Inf" } else { "-Inf" }.into()
    } else {
        format!("{x:e}")
    }
}

impl OutputDir {
    pub fn create(settings: &Settings) -> CliResult<Self> {
        let dir = PathBuf::from(settings.str_or("out", "out"));
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            config_hash: settings.hash(),
            written: Vec::new(),
        })
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        std::fs::write(self.path(name), bytes)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn comment(&self, schema: &str, resolution: &str) -> String {
        format!(
            "# rlocspace {VERSION} schema={schema} config={} resolution={resolution}\n",
            self.config_hash
        )
    }

    /// `body` is the CSV (header row first); one comment line goes on top.
    pub fn csv(&mut self, name: &str, schema: &str, resolution: &str, body: &[u8]) -> CliResult<()> {
        let mut bytes = self.comment(schema, resolution).into_bytes();
        bytes.extend_from_slice(body);
        self.put(name, &bytes)
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.put(name, &bytes)
    }

    pub fn gnuplot(
        &mut self,
        name: &str,
        schema: &str,
        resolution: &str,
        table: &Table,
    ) -> CliResult<()> {
        let mut text = self.comment(schema, resolution);
        let _ = writeln!(text, "# {}", table.columns.join(" "));
        for (i, (label, rows)) in table.blocks.iter().enumerate() {
            if i > 0 {
                text.push_str("\n\n");
            }
            if !label.is_empty() {
                let _ = writeln!(text, "# {label}");
            }
            for r in rows {
                let cells: Vec<String> = r.iter().map(|v| gnuplot_number(*v)).collect();
                let _ = writeln!(text, "{}", cells.join(" "));
            }
        }
        self.put(name, text.as_bytes())
    }

    pub fn raw(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        self.put(name, bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gnuplot_blocks_and_header() {
        let tmp = tempfile::tempdir().unwrap();
        let settings = Settings::resolve(
            "probe",
            None,
            vec![("out".into(), tmp.path().display().to_string())],
            &["out".to_string()],
        )
        .unwrap();
        let mut out = OutputDir::create(&settings).unwrap();
        let mut t = Table::new(&["x", "y"]);
        t.block("a", vec![vec![1.0, f64::INFINITY]]);
        t.block("b", vec![vec![2.0, 0.5]]);
        out.gnuplot("t.dat", "probe/1", "2^-4", &t).unwrap();
        let text = std::fs::read_to_string(tmp.path().join("t.dat")).unwrap();
        assert!(text.starts_with("# rlocspace "));
        assert!(text.contains("1e0 Inf\n\n\n# b\n2e0 5e-1\n"));
        out.csv("c.csv", "probe/1", "none", b"a,b\n1,2\n").unwrap();
        let text = std::fs::read_to_string(tmp.path().join("c.csv")).unwrap();
        assert_eq!(text.lines().nth(1), Some("a,b"));
        assert_eq!(out.written(), ["t.dat", "c.csv"]);
    }
}
