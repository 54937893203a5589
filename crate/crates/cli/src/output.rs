//! Run directory layout: `<output_dir>/<label>/<name>.csv` plus
//! `summary.json` and the resolved `config.toml`.

use std::path::{Path, PathBuf};

use noonsim::Table;

use crate::failure::Failure;

pub struct RunDir {
    root: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    pub fn create(output_dir: &Path, label: &str) -> Result<Self, Failure> {
        let root = output_dir.join(label);
        std::fs::create_dir_all(&root)
            .map_err(|e| Failure::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root,
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Writes `<name>.csv`. Floats use the shortest representation that
    /// reads back to the same value.
    pub fn write_table(&mut self, name: &str, table: &Table) -> Result<(), Failure> {
        let file = format!("{name}.csv");
        let mut w = csv::Writer::from_path(self.root.join(&file))?;
        w.write_record(&table.columns)?;
        for row in &table.rows {
            w.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        w.flush()?;
        self.files.push(file);
        Ok(())
    }

    pub fn write_text(&mut self, file: &str, contents: &str) -> Result<(), Failure> {
        std::fs::write(self.root.join(file), contents)?;
        self.files.push(file.to_string());
        Ok(())
    }
}

/// Compact numeric tag for file names: `-0.025` stays `-0.025`.
pub fn tag(value: f64) -> String {
    format!("{value}")
}
