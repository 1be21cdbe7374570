use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Advisory lock held while a mutating command runs. The lock is a sibling
/// file created exclusively and removed on drop.
#[derive(Debug)]
pub struct DataLock {
    path: PathBuf,
}

impl DataLock {
    pub fn path_for(data: &Path) -> PathBuf {
        let mut name = data.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".lock");
        data.with_file_name(name)
    }

    pub fn acquire(data: &Path) -> Result<DataLock, CliError> {
        let path = Self::path_for(data);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DataLock { path })
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(CliError::Lock(format!(
                "{} is locked by another prkg process (remove {} if it is stale)",
                data.display(),
                path.display()
            ))),
            Err(e) => Err(CliError::Lock(format!("cannot create {}: {e}", path.display()))),
        }
    }
}

impl Drop for DataLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
