//! Output directory handling and the per-run manifest.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use wtp_core::rng::derive_seed;

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";

/// Tags for seeds derived from the run seed.
pub const SEED_DEBIAS: u64 = 1;
pub const SEED_BOOTSTRAP: u64 = 2;
pub const SEED_SIMULATE: u64 = 3;

pub struct Run {
    pub cfg: RunConfig,
    command: &'static str,
    outputs: Vec<String>,
    seeds: BTreeMap<String, u64>,
    warnings: Vec<String>,
}

impl Run {
    pub fn start(command: &'static str, cfg: RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.out).map_err(|e| CliError::Output {
            path: cfg.out.display().to_string(),
            source: e,
        })?;
        let mut run = Self {
            cfg,
            command,
            outputs: Vec::new(),
            seeds: BTreeMap::new(),
            warnings: Vec::new(),
        };
        run.note_seed("run", run.cfg.seed);
        Ok(run)
    }

    /// Seed derived from the run seed for one randomized step, echoed to stdout.
    pub fn seed_for(&mut self, name: &str, tag: u64) -> u64 {
        let s = derive_seed(self.cfg.seed, tag);
        self.note_seed(name, s);
        s
    }

    pub fn note_seed(&mut self, name: &str, seed: u64) {
        println!("seed {name}: {seed}");
        self.seeds.insert(name.to_string(), seed);
    }

    pub fn warn(&mut self, msg: String) {
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.cfg.out.join(name)
    }

    /// Lists a file written directly into the output directory.
    pub fn record(&mut self, name: &str) {
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
    }

    /// Creates `name` in the output directory and hands a writer to `f`.
    pub fn write_with<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    {
        let path = self.path(name);
        let io_err = |e| CliError::Output {
            path: path.display().to_string(),
            source: e,
        };
        let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
        f(&mut w)?;
        w.flush().map_err(io_err)?;
        self.record(name);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)
                .map_err(|e| CliError::usage(format!("cannot serialize {name}: {e}")))?;
            writeln!(w).map_err(|e| CliError::Output {
                path: name.to_string(),
                source: e,
            })
        })
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write_with(name, |w| {
            w.write_all(text.as_bytes()).map_err(|e| CliError::Output {
                path: name.to_string(),
                source: e,
            })
        })
    }

    /// Writes the manifest: enough to rerun and reproduce every output.
    pub fn finish(mut self) -> Result<(), CliError> {
        let manifest = json!({
            "manifest_version": 1,
            "tool": "wtp",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.cfg,
            "seeds": self.seeds,
            "outputs": self.outputs,
            "warnings": self.warnings,
        });
        self.write_json(MANIFEST, &manifest)?;
        println!(
            "wrote {} to {}",
            self.outputs.join(", "),
            self.cfg.out.display()
        );
        Ok(())
    }
}

/// File-name friendly version of a series label.
pub fn slug(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

pub fn file_stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}
