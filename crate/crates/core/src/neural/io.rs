//! Plain-text parameter format.
//!
//! ```text
//! layer <i> <rows> <cols>
//! <rows lines of <cols> weights>
//! <one line of <cols> biases>
//! ```
//!
//! Values are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::{Dense, MlpParams};

fn write_row(out: &mut impl Write, values: &[f64]) -> Result<()> {
    let line: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    writeln!(out, "{}", line.join(" "))?;
    Ok(())
}

pub fn write_params(params: &MlpParams, out: &mut impl Write) -> Result<()> {
    for (i, layer) in params.layers.iter().enumerate() {
        let (rows, cols) = layer.weight.shape();
        writeln!(out, "layer {i} {rows} {cols}")?;
        for r in 0..rows {
            write_row(out, layer.weight.row(r))?;
        }
        write_row(out, layer.bias.as_slice())?;
    }
    Ok(())
}

/// Reads `n_layers` layers from a line iterator positioned at the first
/// `layer` header.
pub fn read_params<B: BufRead>(lines: &mut std::io::Lines<B>, n_layers: usize) -> Result<MlpParams> {
    let mut next_line = |what: &str| -> Result<String> {
        loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        return Ok(line);
                    }
                }
                None => return Err(Error::data(format!("unexpected end of parameters, wanted {what}"))),
            }
        }
    };
    let parse_row = |line: &str, cols: usize| -> Result<Vec<f64>> {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::data(format!("bad number {t:?}"))))
            .collect::<Result<_>>()?;
        if vals.len() != cols {
            return Err(Error::data(format!("expected {cols} values, got {}", vals.len())));
        }
        Ok(vals)
    };

    let mut layers = Vec::with_capacity(n_layers);
    for i in 0..n_layers {
        let header = next_line("layer header")?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            ["layer", idx, rows, cols] => idx
                .parse::<usize>()
                .ok()
                .zip(rows.parse::<usize>().ok())
                .zip(cols.parse::<usize>().ok())
                .map(|((a, b), c)| (a, b, c)),
            _ => None,
        };
        let (idx, rows, cols) = parsed.ok_or_else(|| Error::data(format!("bad layer header {header:?}")))?;
        if idx != i {
            return Err(Error::data(format!("layer {idx} found where layer {i} expected")));
        }
        let mut weights = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            weights.extend(parse_row(&next_line("weights")?, cols)?);
        }
        let bias = parse_row(&next_line("biases")?, cols)?;
        layers.push(Dense {
            weight: Matrix::new(rows, cols, weights)?,
            bias: Matrix::new(1, cols, bias)?,
        });
    }
    Ok(MlpParams { layers })
}
