//! Append-only record of finished per-query work, so an interrupted QC run
//! picks up where it stopped.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Entry {
    stage: String,
    query_id: String,
    data: Value,
}

pub struct Checkpoint {
    path: PathBuf,
    done: HashMap<(String, String), Value>,
    file: Mutex<File>,
}

impl Checkpoint {
    /// Opens (or creates) the checkpoint file. A torn final line from a crash
    /// is ignored.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut done = HashMap::new();
        if path.exists() {
            let reader =
                BufReader::new(File::open(&path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?);
            for line in reader.lines() {
                let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
                match serde_json::from_str::<Entry>(&line) {
                    Ok(e) => {
                        done.insert((e.stage, e.query_id), e.data);
                    }
                    Err(_) if !line.trim().is_empty() => {
                        tracing::warn!(path = %path.display(), "ignoring unreadable checkpoint line");
                    }
                    Err(_) => {}
                }
            }
        }
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        if !done.is_empty() {
            tracing::info!(path = %path.display(), entries = done.len(), "resuming from checkpoint");
        }
        Ok(Self {
            path,
            done,
            file: Mutex::new(file),
        })
    }

    pub fn len(&self) -> usize {
        self.done.len()
    }

    pub fn is_empty(&self) -> bool {
        self.done.is_empty()
    }

    pub fn get<T: DeserializeOwned>(&self, stage: &str, query_id: &str) -> Option<T> {
        self.done
            .get(&(stage.to_string(), query_id.to_string()))
            .and_then(|v| serde_json::from_value(v.clone()).ok())
    }

    pub fn record<T: Serialize>(&self, stage: &str, query_id: &str, data: &T) -> Result<()> {
        let entry = Entry {
            stage: stage.to_string(),
            query_id: query_id.to_string(),
            data: serde_json::to_value(data)?,
        };
        let mut line = serde_json::to_string(&entry)?;
        line.push('\n');
        let mut f = self.file.lock().unwrap();
        f.write_all(line.as_bytes())
            .and_then(|_| f.flush())
            .map_err(|e| Error::io(format!("writing {}", self.path.display()), e))
    }
}

/// Looks the result up in the checkpoint, or computes and records it.
pub(crate) fn cached<T, F>(checkpoint: Option<&Checkpoint>, stage: &str, query_id: &str, compute: F) -> Result<T>
where
    T: Serialize + DeserializeOwned,
    F: FnOnce() -> T,
{
    if let Some(hit) = checkpoint.and_then(|c| c.get(stage, query_id)) {
        return Ok(hit);
    }
    let value = compute();
    if let Some(c) = checkpoint {
        c.record(stage, query_id, &value)?;
    }
    Ok(value)
}
