//! Run manifests: one TOML record per run with everything needed to repeat it.
//!
//! Top-level keys are `schema_version`, `tool`, `tool_version` and `command`.
//! Sections: `params` (command arguments), `seeds` (decimal strings, since
//! seeds span the full u64 range), `link` with `link.overrides`, `fading`,
//! `inputs.<name>` and `outputs.<name>` (path, format, length, rate) and
//! `results` (measurements, not needed for reproduction).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use toml::{Table, Value};

use bbfm::fading::FadingConfig;

use crate::config::ResolvedLink;

pub const SCHEMA_VERSION: i64 = 1;
pub const F32_FORMAT: &str = "f32le";
pub const PCM_FORMAT: &str = "s16le";
pub const CSV_FORMAT: &str = "csv";

#[derive(Debug, Clone)]
pub struct Manifest {
    root: Table,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut root = Table::new();
        root.insert("schema_version".into(), SCHEMA_VERSION.into());
        root.insert("tool".into(), env!("CARGO_PKG_NAME").into());
        root.insert("tool_version".into(), env!("CARGO_PKG_VERSION").into());
        root.insert("command".into(), command.into());
        Self { root }
    }

    fn table(&mut self, path: &[&str]) -> &mut Table {
        let mut t = &mut self.root;
        for key in path {
            t = t
                .entry(key.to_string())
                .or_insert_with(|| Value::Table(Table::new()))
                .as_table_mut()
                .expect("manifest sections are tables");
        }
        t
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.table(&["params"]).insert(key.into(), value.into());
        self
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.table(&["results"]).insert(key.into(), value.into());
        self
    }

    pub fn seed(&mut self, key: &str, seed: u64) -> &mut Self {
        self.table(&["seeds"])
            .insert(key.into(), seed.to_string().into());
        self
    }

    pub fn link(&mut self, link: &ResolvedLink) -> &mut Self {
        let t = self.table(&["link"]);
        t.insert("profile".into(), link.profile.name().into());
        for (k, v) in link.entries() {
            t.insert(k.into(), v.into());
        }
        t.insert(
            "modulation_index".into(),
            link.params.modulation_index().into(),
        );
        t.insert(
            "fm_gain_db".into(),
            bbfm::link::fm_gain_db(&link.params).into(),
        );
        t.insert(
            "threshold_dbm".into(),
            bbfm::link::threshold_dbm(&link.params).value().into(),
        );
        let o = self.table(&["link", "overrides"]);
        for (k, v) in &link.overrides {
            o.insert((*k).into(), (*v).into());
        }
        self
    }

    pub fn fading(&mut self, cfg: &FadingConfig) -> &mut Self {
        let t = self.table(&["fading"]);
        t.insert("carrier_freq_hz".into(), cfg.carrier_freq_hz.into());
        t.insert("velocity_kmh".into(), (cfg.velocity_mps * 3.6).into());
        t.insert("velocity_mps".into(), cfg.velocity_mps.into());
        t.insert("delay_us".into(), (cfg.delay_spread_s * 1e6).into());
        t.insert("rate_hz".into(), cfg.output_rate_hz.into());
        t.insert("doppler_spread_hz".into(), cfg.doppler_spread_hz().into());
        self.seed("fading", cfg.seed)
    }

    fn file(
        &mut self,
        kind: &str,
        name: &str,
        path: &Path,
        format: &str,
        len: usize,
        rate_hz: Option<f64>,
    ) -> &mut Self {
        let t = self.table(&[kind, name]);
        t.insert("path".into(), path.display().to_string().into());
        t.insert("format".into(), format.into());
        t.insert("len".into(), (len as i64).into());
        if let Some(r) = rate_hz {
            t.insert("rate_hz".into(), r.into());
        }
        self
    }

    pub fn input(
        &mut self,
        name: &str,
        path: &Path,
        format: &str,
        len: usize,
        rate_hz: Option<f64>,
    ) -> &mut Self {
        self.file("inputs", name, path, format, len, rate_hz)
    }

    pub fn output(
        &mut self,
        name: &str,
        path: &Path,
        format: &str,
        len: usize,
        rate_hz: Option<f64>,
    ) -> &mut Self {
        self.file("outputs", name, path, format, len, rate_hz)
    }

    pub fn render(&self) -> String {
        toml::to_string(&self.root).expect("manifest tables always serialise")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())
            .with_context(|| format!("writing manifest {}", path.display()))
    }

    /// Writes to `explicit` or else next to `primary`.
    pub fn write_for(&self, explicit: Option<&Path>, primary: &Path) -> Result<PathBuf> {
        let path = explicit
            .map(Path::to_path_buf)
            .unwrap_or_else(|| default_path(primary));
        self.write(&path)?;
        Ok(path)
    }
}

pub fn default_path(primary: &Path) -> PathBuf {
    let mut s = primary.as_os_str().to_owned();
    s.push(".manifest.toml");
    PathBuf::from(s)
}

/// Rate recorded for a fading file in its companion manifest, if there is one.
pub fn companion_fading_rate(file: &Path) -> Result<Option<f64>> {
    let path = default_path(file);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let root: Table =
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(root
        .get("fading")
        .and_then(|f| f.get("rate_hz"))
        .and_then(Value::as_float))
}
