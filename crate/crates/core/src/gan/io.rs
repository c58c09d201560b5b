//! Model files: a `key=value` header block followed by the generator and
//! discriminator parameters in the layer text format.
//!
//! ```text
//! fraudgan-model 1
//! framework=wgan
//! ...
//! feature_dim=29
//! scaler_means=...
//! [generator]
//! layer 0 100 63
//! ...
//! [discriminator]
//! layer 0 29 63
//! ...
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::data::Scaler;
use crate::error::{Error, Result};
use crate::neural::{read_params, write_params};

use super::{GanConfig, GanModel};

const MAGIC: &str = "fraudgan-model 1";

fn join(values: impl Iterator<Item = String>) -> String {
    values.collect::<Vec<_>>().join(" ")
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::data(format!("bad entry {t:?} in {key}"))))
        .collect()
}

pub fn write_model(model: &GanModel, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    for (k, v) in model.config.to_pairs() {
        writeln!(out, "{k}={v}")?;
    }
    writeln!(out, "feature_dim={}", model.feature_dim)?;
    if let Some(s) = &model.scaler {
        writeln!(out, "scaler_means={}", join(s.means.iter().map(|v| format!("{v:.16e}"))))?;
        writeln!(out, "scaler_stds={}", join(s.stds.iter().map(|v| format!("{v:.16e}"))))?;
        writeln!(out, "scaler_constant={}", join(s.constant.iter().map(|&c| (c as u8).to_string())))?;
    }
    writeln!(out, "condition_counts={}", join(model.condition_counts.iter().map(|c| c.to_string())))?;
    writeln!(out, "[generator]")?;
    write_params(&model.generator.params, out)?;
    writeln!(out, "[discriminator]")?;
    write_params(&model.discriminator.params, out)?;
    Ok(())
}

pub fn read_model(input: impl BufRead) -> Result<GanModel> {
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(first)) if first.trim() == MAGIC => {}
        _ => return Err(Error::data("not a fraudgan model file")),
    }
    let mut config = GanConfig::preset(super::Framework::Gan);
    let mut feature_dim = None;
    let (mut means, mut stds, mut constant) = (None, None, None);
    let mut counts = Vec::new();
    loop {
        let line = lines
            .next()
            .ok_or_else(|| Error::data("model file ended inside the header"))??;
        let line = line.trim();
        if line == "[generator]" {
            break;
        }
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::data(format!("bad header line {line:?}")))?;
        match key {
            "feature_dim" => {
                feature_dim = Some(value.parse().map_err(|_| Error::data("bad feature_dim"))?)
            }
            "scaler_means" => means = Some(parse_list::<f64>(key, value)?),
            "scaler_stds" => stds = Some(parse_list::<f64>(key, value)?),
            "scaler_constant" => {
                constant = Some(parse_list::<u8>(key, value)?.into_iter().map(|c| c != 0).collect())
            }
            "condition_counts" => counts = parse_list(key, value)?,
            _ => config.set(key, value).map_err(|e| Error::data(e.to_string()))?,
        }
    }
    let feature_dim = feature_dim.ok_or_else(|| Error::data("model header lacks feature_dim"))?;
    let mut model = GanModel::new(config, feature_dim).map_err(|e| Error::data(e.to_string()))?;
    model.generator.params = read_params(&mut lines, model.generator.spec.n_layers())?;
    match lines.next() {
        Some(Ok(l)) if l.trim() == "[discriminator]" => {}
        _ => return Err(Error::data("missing [discriminator] section")),
    }
    model.discriminator.params = read_params(&mut lines, model.discriminator.spec.n_layers())?;
    if !model.generator.params.matches(&model.generator.spec)
        || !model.discriminator.params.matches(&model.discriminator.spec)
    {
        return Err(Error::data("parameter shapes do not match the header"));
    }
    model.scaler = match (means, stds) {
        (Some(means), Some(stds)) => {
            if means.len() != feature_dim || stds.len() != feature_dim {
                return Err(Error::data("scaler width does not match feature_dim"));
            }
            let constant = constant.unwrap_or_else(|| vec![false; feature_dim]);
            Some(Scaler { means, stds, constant })
        }
        (None, None) => None,
        _ => return Err(Error::data("scaler needs both means and stds")),
    };
    model.condition_counts = counts;
    Ok(model)
}

pub fn save_model(model: &GanModel, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_model(model, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<GanModel> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?;
    read_model(BufReader::new(file))
}
