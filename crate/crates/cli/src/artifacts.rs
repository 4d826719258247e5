use std::fs;
use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ArtifactError {
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("writing {path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("serializing {path}: {source}")]
    Json { path: String, source: serde_json::Error },
}

/// Output directory of one run; remembers every file it wrote.
#[derive(Debug)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: PathBuf) -> Result<Self, ArtifactError> {
        fs::create_dir_all(&dir).map_err(|e| ArtifactError::Io { path: dir.display().to_string(), source: e })?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn record(&mut self, name: &str) {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<(), ArtifactError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| ArtifactError::Io { path: path.display().to_string(), source: e })?;
        self.record(name);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), ArtifactError> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| ArtifactError::Json { path: path.display().to_string(), source: e })?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| ArtifactError::Io { path: path.display().to_string(), source: e })?;
        self.record(name);
        Ok(())
    }

    /// Header row, then one serialized record per row (tuples or flat structs).
    pub fn csv<R: Serialize>(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<(), ArtifactError> {
        let path = self.dir.join(name);
        let err = |e| ArtifactError::Csv { path: path.display().to_string(), source: e };
        let mut w = csv::WriterBuilder::new().has_headers(false).from_path(&path).map_err(err)?;
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.serialize(r).map_err(err)?;
        }
        w.flush().map_err(|e| ArtifactError::Io { path: path.display().to_string(), source: e })?;
        self.record(name);
        Ok(())
    }
}
