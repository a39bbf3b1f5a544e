//! CSV tables and run summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{BenchError, Result};

/// Shortest representation that parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Output directory of one run.
#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(io_error(root))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_csv<I, R>(&self, name: &str, header: &[&str], rows: I) -> Result<PathBuf>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush().map_err(io_error(&path))?;
        Ok(path)
    }

    pub fn write_summary(&self, summary: &Summary, config_source: &str) -> Result<PathBuf> {
        let path = self.path("summary.txt");
        fs::write(&path, summary.render(config_source)).map_err(io_error(&path))?;
        Ok(path)
    }
}

/// Ordered `key = value` metrics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    title: String,
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn add_num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.add(key, num(value))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self, config_source: &str) -> String {
        let mut s = format!("# {}\n", self.title);
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k} = {v}");
        }
        s.push_str("\n# config\n");
        s.push_str(config_source);
        if !config_source.ends_with('\n') {
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn summary_echoes_config() {
        let mut s = Summary::new("test");
        s.add_num("x", 0.5).add("n", 3);
        let text = s.render("a = 1");
        assert_eq!(text, "# test\nx = 0.5\nn = 3\n\n# config\na = 1\n");
        assert_eq!(s.get("n"), Some("3"));
    }
}
