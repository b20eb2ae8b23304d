use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use bbfm::link::{snr_db, ReceivedPowerDbm};

use crate::cli::{Profile, SnrCurveArgs};
use crate::config::require_finite;
use crate::failure::fail;
use crate::manifest::{Manifest, CSV_FORMAT};

/// Upper bound on the number of rows, to catch swapped or absurd ranges.
const MAX_POINTS: usize = 1_000_000;

/// Received powers from `from` to `to` inclusive in `step` increments.
pub fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    require_finite("from", from)?;
    require_finite("to", to)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(fail(
            "invalid-range",
            format!("step must be > 0, got {step}"),
        ));
    }
    if from > to {
        return Err(fail(
            "invalid-range",
            format!("from ({from}) is above to ({to})"),
        ));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    if n > MAX_POINTS {
        return Err(fail(
            "invalid-range",
            format!("{n} points exceeds {MAX_POINTS}"),
        ));
    }
    Ok((0..n).map(|i| from + i as f64 * step).collect())
}

pub fn run(args: &SnrCurveArgs, manifest_path: Option<&Path>) -> Result<()> {
    let link = args.link.resolve(Profile::AnalogFm)?;
    let fading_db = require_finite("fading-db", args.fading_db)?;
    let points = grid(args.from, args.to, args.step)?;
    let mut csv = String::from("r_dbm,snr_db\n");
    for &r in &points {
        let snr = snr_db(&link.params, ReceivedPowerDbm::new(r)?, fading_db);
        writeln!(csv, "{r:.2},{:.6}", snr.value()).expect("writing to a String");
    }
    let mut m = Manifest::new("snr-curve");
    m.link(&link)
        .param("from_dbm", args.from)
        .param("to_dbm", args.to)
        .param("step_db", args.step)
        .param("fading_db", fading_db);
    match &args.out {
        Some(out) => {
            fs::write(out, &csv).with_context(|| format!("writing {}", out.display()))?;
            m.output("curve", out, CSV_FORMAT, points.len(), None);
            m.write_for(manifest_path, out)?;
        }
        None => {
            print!("{csv}");
            if let Some(p) = manifest_path {
                m.write(p)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inclusive() {
        let g = grid(-123.0, -121.0, 0.5).unwrap();
        assert_eq!(g, vec![-123.0, -122.5, -122.0, -121.5, -121.0]);
        assert_eq!(grid(-1.0, -1.0, 0.5).unwrap(), vec![-1.0]);
    }

    #[test]
    fn bad_ranges_are_rejected() {
        for (f, t, s) in [
            (-100.0, -130.0, 0.5),
            (-130.0, -100.0, 0.0),
            (f64::NAN, 0.0, 0.5),
            (0.0, 1e9, 1e-6),
        ] {
            let e = grid(f, t, s).unwrap_err();
            let k = crate::failure::kind_of(&e);
            assert!(k == "invalid-range" || k == "invalid-argument", "{k}");
        }
    }
}
