//! Output directory handling. JSON files wrap their payload with a provenance
//! block; CSV files start with a `#` provenance comment line.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::args::{Format, Options};
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub catalog_version: Option<String>,
    pub corpus_hash: Option<String>,
    pub config_digest: String,
}

/// Settings that influence results; paths and output options are excluded so
/// that reruns elsewhere digest identically.
#[derive(Serialize)]
struct DigestInput<'a> {
    window: usize,
    bins: usize,
    regex_weight: f64,
    high_conf: f64,
    low_conf: f64,
    seed: u64,
    cut: usize,
    components: usize,
    effect_group: usize,
    alpha: f64,
    neural: bool,
    gold: bool,
    format: Option<&'a Format>,
}

pub fn config_digest(opts: &Options) -> String {
    let input = DigestInput {
        window: opts.window,
        bins: opts.bins,
        regex_weight: opts.regex_weight,
        high_conf: opts.high_conf,
        low_conf: opts.low_conf,
        seed: opts.seed,
        cut: opts.cut,
        components: opts.components,
        effect_group: opts.effect_group,
        alpha: opts.alpha,
        neural: opts.neural.is_some(),
        gold: opts.gold.is_some(),
        format: opts.format.as_ref(),
    };
    let bytes = serde_json::to_vec(&input).expect("digest input serializes");
    hex::encode(Sha256::digest(bytes))
}

pub struct Output {
    dir: PathBuf,
    format: Option<Format>,
    pub provenance: Provenance,
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    provenance: &'a Provenance,
    data: &'a T,
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write { path: path.to_path_buf(), source }
}

impl Output {
    pub fn new(root: &Path, sub: &str, format: Option<Format>, provenance: Provenance) -> Result<Self, CliError> {
        let dir = root.join(sub);
        std::fs::create_dir_all(&dir).map_err(write_err(&dir))?;
        Ok(Output { dir, format, provenance })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn wants_csv(&self) -> bool {
        self.format != Some(Format::Json)
    }

    pub fn wants_json(&self) -> bool {
        self.format != Some(Format::Csv)
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(write_err(&path))
    }

    /// Always written, whatever `--format` says.
    pub fn json_always<T: Serialize>(&self, name: &str, data: &T) -> Result<(), CliError> {
        let body = serde_json::to_string_pretty(&Wrapped { provenance: &self.provenance, data })
            .map_err(|e| CliError::Internal(format!("serializing {name}: {e}")))?;
        self.write_bytes(name, (body + "\n").as_bytes())
    }

    pub fn json<T: Serialize>(&self, name: &str, data: &T) -> Result<(), CliError> {
        if self.wants_json() {
            self.json_always(name, data)?;
        }
        Ok(())
    }

    fn csv_header(&self) -> String {
        let p = &self.provenance;
        format!(
            "# {} {} command={} catalog={} corpus={} config={}\n",
            p.tool,
            p.version,
            p.command,
            p.catalog_version.as_deref().unwrap_or("-"),
            p.corpus_hash.as_deref().unwrap_or("-"),
            p.config_digest
        )
    }

    /// Writes a CSV through `fill` when CSV output is enabled.
    pub fn csv<F>(&self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), CliError>,
    {
        if !self.wants_csv() {
            return Ok(());
        }
        let mut buf = self.csv_header().into_bytes();
        fill(&mut buf)?;
        self.write_bytes(name, &buf)
    }

    /// CSV from rows of displayable cells.
    pub fn csv_rows(&self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
        self.csv(name, |buf| {
            let mut w = csv::Writer::from_writer(buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush().map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(())
        })
    }
}
