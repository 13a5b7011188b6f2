use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub const FAILED_MARKER: &str = "FAILED";

/// A finished output file, held in memory until the whole run succeeds.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
        bytes.push(b'\n');
        Self {
            name: name.into(),
            bytes,
        }
    }
}

/// Builds a CSV file; numbers use the shortest round-trip representation.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, fields: &[&dyn std::fmt::Display]) {
        let line: Vec<String> = fields.iter().map(|f| f.to_string()).collect();
        self.buf.push_str(&line.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self, name: &str) -> Artifact {
        Artifact {
            name: name.into(),
            bytes: self.buf.into_bytes(),
        }
    }
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))
}

/// Drops a failure marker naming the error.
pub fn mark_failed(dir: &Path, msg: &str) {
    let _ = fs::create_dir_all(dir);
    let _ = write_atomic(dir, FAILED_MARKER, format!("{msg}\n").as_bytes());
}

/// Writes every artifact atomically, then clears any stale failure marker.
/// On error the directory is left with a failure marker.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    let res = (|| -> std::io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for a in artifacts {
            write_atomic(dir, &a.name, &a.bytes)?;
            out.push(dir.join(&a.name));
        }
        match fs::remove_file(dir.join(FAILED_MARKER)) {
            Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e),
            _ => {}
        }
        Ok(out)
    })();
    res.map_err(|e| {
        mark_failed(dir, &format!("writing outputs failed: {e}"));
        e.into()
    })
}
