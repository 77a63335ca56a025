//! Artifact plumbing: every command writes its files through a [`Sink`],
//! which records path and content fingerprint and finishes by writing a
//! `manifest.json` next to the artifacts. Re-running a command with the same
//! inputs and seed reproduces the same hashes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use freelyap::io::RunManifest;

pub struct Sink {
    dir: PathBuf,
    primary_file: Option<PathBuf>,
    manifest: RunManifest,
}

impl Sink {
    /// `out` names a directory unless it ends in `.json`, in which case the
    /// primary document goes to exactly that path and secondary artifacts
    /// land next to it.
    pub fn new(out: &Path, command_line: Vec<String>, config: &[u8]) -> io::Result<Sink> {
        let is_file = out.extension().is_some_and(|e| e == "json");
        let (dir, primary_file) = if is_file {
            let parent = out
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
            (parent, Some(out.to_path_buf()))
        } else {
            (out.to_path_buf(), None)
        };
        fs::create_dir_all(&dir)?;
        Ok(Sink {
            dir,
            primary_file,
            manifest: RunManifest::new(command_line, config),
        })
    }

    /// Writes the command's main JSON document, honoring a `.json` target.
    pub fn write_primary(&mut self, default_name: &str, contents: &str) -> io::Result<PathBuf> {
        match self.primary_file.clone() {
            Some(path) => self.write_at(path, contents),
            None => self.write(default_name, contents),
        }
    }

    /// Writes a named artifact into the output directory.
    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<PathBuf> {
        self.write_at(self.dir.join(name), contents)
    }

    fn write_at(&mut self, path: PathBuf, contents: &str) -> io::Result<PathBuf> {
        fs::write(&path, contents)?;
        self.manifest
            .record(&path.to_string_lossy(), contents.as_bytes());
        Ok(path)
    }

    /// Writes `manifest.json` listing every artifact of the run.
    pub fn finish(self) -> io::Result<PathBuf> {
        let path = self.dir.join("manifest.json");
        fs::write(&path, self.manifest.to_json())?;
        Ok(path)
    }
}
