//! Output directory resolution and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Environment variable that overrides the default output directory.
pub const OUT_DIR_ENV: &str = "SCALELOSS_OUT_DIR";

/// Where artifacts go: the `--out` flag, then [`OUT_DIR_ENV`], then `.`.
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("."),
    }
}

/// Fails early when `dir` is missing, not a directory, or not writable.
pub fn check_out_dir(dir: &Path) -> Result<()> {
    let meta = std::fs::metadata(dir).map_err(|e| CliError::io(dir, e))?;
    if !meta.is_dir() {
        return Err(CliError::io(dir, std::io::Error::new(std::io::ErrorKind::NotADirectory, "not a directory")));
    }
    tempfile::NamedTempFile::new_in(dir).map(drop).map_err(|e| CliError::io(dir, e))
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}
