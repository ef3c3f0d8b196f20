use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::CliError;

/// Output directory that has been created and probed for writability.
pub struct OutDir {
    path: PathBuf,
}

impl OutDir {
    pub fn prepare(path: &Path) -> Result<Self, CliError> {
        let fail = |e: std::io::Error| {
            CliError::Output(format!("output directory {} is not writable: {e}", path.display()))
        };
        std::fs::create_dir_all(path).map_err(fail)?;
        NamedTempFile::new_in(path).map_err(fail)?;
        Ok(Self { path: path.to_path_buf() })
    }

    /// Writes `name` through a temporary file in the same directory and a
    /// rename, so readers never see a partial file.
    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.path.join(name);
        let fail = |e: std::io::Error| CliError::Output(format!("cannot write {}: {e}", target.display()));
        let mut tmp = NamedTempFile::new_in(&self.path).map_err(fail)?;
        tmp.write_all(bytes).map_err(fail)?;
        tmp.as_file().sync_all().map_err(fail)?;
        tmp.persist(&target).map_err(|e| fail(e.error))?;
        Ok(())
    }
}
