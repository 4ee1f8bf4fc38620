use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Collects a run's files in a staging directory next to the destination and
/// moves them into place only on [`Staged::commit`]. Dropping without
/// committing removes the staging directory.
pub struct Staged {
    staging: PathBuf,
    dest: PathBuf,
    names: Vec<String>,
    committed: bool,
}

impl Staged {
    pub fn new(dest: &Path) -> io::Result<Self> {
        let name = dest
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into());
        let parent = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent)?;
        let staging = parent.join(format!(".{name}.staging-{}", std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir(&staging)?;
        Ok(Staged {
            staging,
            dest: dest.to_path_buf(),
            names: Vec::new(),
            committed: false,
        })
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> io::Result<()> {
        fs::write(self.staging.join(name), contents)?;
        self.names.push(name.to_string());
        Ok(())
    }

    /// Moves every staged file into the destination directory.
    pub fn commit(mut self) -> io::Result<PathBuf> {
        fs::create_dir_all(&self.dest)?;
        for name in &self.names {
            fs::rename(self.staging.join(name), self.dest.join(name))?;
        }
        fs::remove_dir_all(&self.staging)?;
        self.committed = true;
        Ok(self.dest.clone())
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}
