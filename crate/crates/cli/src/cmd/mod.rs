pub mod baseline;
pub mod chsim;
pub mod curve;
pub mod fading;
pub mod golden;
pub mod modem;

use std::path::Path;

use anyhow::{Context, Result};

pub(crate) fn read_f32(path: &Path) -> Result<Vec<f32>> {
    bbfm::io::read_f32(path).with_context(|| format!("reading {}", path.display()))
}

pub(crate) fn write_f32(path: &Path, values: &[f32]) -> Result<()> {
    bbfm::io::write_f32(path, values).with_context(|| format!("writing {}", path.display()))
}
