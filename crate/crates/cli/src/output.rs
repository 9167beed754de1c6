use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::CliError;

/// Files of one run, written together once everything is computed.
#[derive(Default)]
pub struct Staged {
    files: Vec<(String, Vec<u8>)>,
}

impl Staged {
    pub fn add(&mut self, name: String, bytes: Vec<u8>) {
        self.files.push((name, bytes));
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Writes every file to a temporary sibling, then renames them all.
    pub fn commit(self, dir: &Path) -> Result<(), CliError> {
        let fail = |e: std::io::Error| CliError::validation(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(fail)?;
        let mut pending = Vec::with_capacity(self.files.len());
        for (name, bytes) in self.files {
            let mut tmp = NamedTempFile::new_in(dir).map_err(fail)?;
            tmp.write_all(&bytes).map_err(fail)?;
            tmp.as_file().sync_all().map_err(fail)?;
            pending.push((tmp, dir.join(name)));
        }
        for (tmp, dest) in pending {
            tmp.persist(&dest).map_err(|e| fail(e.error))?;
        }
        Ok(())
    }
}

pub fn json_bytes<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.push(b'\n');
    out
}
