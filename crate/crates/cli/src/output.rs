use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Serialize)]
struct FileEntry {
    name: String,
    bytes: usize,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    schema_version: u32,
    config_sha256: String,
    config: &'a C,
    files: &'a [FileEntry],
}

fn sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Output directory with a checksum record of everything written to it.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::config("output_dir", format!("{}: {e}", dir.display())))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::config("output_dir", format!("{}: {e}", path.display())))?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: contents.len(),
            sha256: sha256(contents.as_bytes()),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let text = serde_json::to_string_pretty(value).expect("serializable summary") + "\n";
        self.write(name, &text)
    }

    /// Writes `manifest.json`; no timestamps, so reruns are bit-identical.
    pub fn finish<C: Serialize>(self, config: &C) -> Result<PathBuf, CliError> {
        let cfg = serde_json::to_string(config).expect("serializable config");
        let m = Manifest {
            tool: "flowout",
            version: env!("CARGO_PKG_VERSION"),
            schema_version: crate::config::SCHEMA_VERSION,
            config_sha256: sha256(cfg.as_bytes()),
            config,
            files: &self.files,
        };
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&m).expect("serializable manifest") + "\n";
        std::fs::write(&path, text).map_err(|e| CliError::config("output_dir", format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

/// Gnuplot script overlaying `files`, each a note line and a header line
/// followed by two numeric columns.
pub fn gnuplot_script(title: &str, xlabel: &str, ylabel: &str, output: &str, files: &[String]) -> String {
    let mut s = format!(
        "set terminal pngcairo size 900,700\nset output '{output}'\nset datafile separator ','\n\
         set title '{title}'\nset xlabel '{xlabel}'\nset ylabel '{ylabel}'\nset key outside right\n"
    );
    if files.is_empty() {
        s.push_str("# no infinity-curve samples to plot\n");
        return s;
    }
    let plots: Vec<String> = files
        .iter()
        .map(|f| {
            format!(
                "'{f}' skip 2 using 1:2 with lines title '{}'",
                f.trim_end_matches(".csv")
            )
        })
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}
