use std::fs;

use anyhow::{Context, Result};
use toml::{Table, Value};

use bbfm::golden::{generate_golden, GoldenSpec};
use bbfm::link::{fm_gain_db, threshold_dbm};

use crate::cli::GoldenArgs;
use crate::cmd::write_f32;
use crate::manifest::{Manifest, F32_FORMAT, SCHEMA_VERSION};

pub fn run(args: &GoldenArgs) -> Result<()> {
    let dir = &args.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut names = Vec::new();
    for spec in GoldenSpec::reference_set() {
        let bundle = generate_golden(&spec)?;
        let sub = dir.join(&spec.name);
        fs::create_dir_all(&sub).with_context(|| format!("creating {}", sub.display()))?;

        let mut m = Manifest::new("golden");
        let link = &spec.link;
        m.param("name", spec.name.as_str())
            .param("set_point_dbm", spec.set_point_dbm)
            .param("num_symbols", spec.num_symbols as i64)
            .param("symbol_rate_hz", spec.symbol_rate_hz)
            .param(
                "channel",
                if spec.fading.is_some() { "lmr" } else { "awgn" },
            )
            .param("tx_distribution", "uniform[-A, A]")
            .seed("base", spec.seed)
            .seed("tx", spec.tx_seed())
            .seed("noise", spec.noise_seed());
        m.param("deviation_hz", link.deviation_hz())
            .param("max_mod_freq_hz", link.max_mod_freq_hz())
            .param("noise_figure_db", link.noise_figure_db())
            .param("temperature_k", link.temperature_k())
            .param("peak_amplitude", link.peak_amplitude())
            .param("mean_mod_power", link.mean_mod_power())
            .param("fm_gain_db", fm_gain_db(link))
            .param("threshold_dbm", threshold_dbm(link).value());
        if let Some(f) = &spec.fading {
            m.fading(f);
        }
        let arrays = [
            ("tx", &bundle.tx),
            ("fading", &bundle.fading),
            ("sigma", &bundle.sigma),
            ("noise", &bundle.noise),
            ("rx", &bundle.rx),
        ];
        for (name, data) in arrays {
            let file = format!("{name}.f32");
            write_f32(&sub.join(&file), data)?;
            m.output(
                name,
                file.as_ref(),
                F32_FORMAT,
                data.len(),
                Some(spec.symbol_rate_hz),
            );
        }
        m.write(&sub.join("manifest.toml"))?;
        log::info!(target: "golden", "wrote {}", sub.display());
        names.push(Value::from(spec.name.clone()));
    }
    let mut index = Table::new();
    index.insert("schema_version".into(), SCHEMA_VERSION.into());
    index.insert("bundles".into(), Value::Array(names));
    let path = dir.join("index.toml");
    fs::write(&path, toml::to_string(&index)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
