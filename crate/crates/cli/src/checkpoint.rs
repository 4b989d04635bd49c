//! Policy checkpoint format: a flat text record.
//!
//! ```text
//! <feature_width> <action_count>
//! <temperature>
//! <row 0, space-separated weights>
//! ...
//! ```
//!
//! Weights and temperature use 17-significant-digit floats, so a checkpoint
//! reloads to bit-identical weights.

use std::io::Write;
use std::path::Path;

use dgrpo_core::matrix::Matrix;
use dgrpo_core::policy::SoftmaxPolicy;

use crate::bank_format::format_f64;
use crate::error::{CliError, Result};

pub fn save_policy(policy: &SoftmaxPolicy, path: &Path) -> Result<()> {
    let weights = policy.weights();
    let mut out = format!(
        "{} {}\n{}\n",
        weights.rows(),
        weights.cols(),
        format_f64(policy.temperature())
    );
    for row in 0..weights.rows() {
        let line = weights
            .row(row)
            .iter()
            .map(|&v| format_f64(v))
            .collect::<Vec<_>>()
            .join(" ");
        out.push_str(&line);
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

pub fn load_policy(path: &Path) -> Result<SoftmaxPolicy> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().enumerate();

    let (line_no, header) = lines
        .next()
        .ok_or_else(|| CliError::format(path, 1, "empty checkpoint"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(CliError::format(
            path,
            line_no + 1,
            "expected `rows cols` header",
        ));
    }
    let rows: usize = dims[0]
        .parse()
        .map_err(|_| CliError::format(path, line_no + 1, "invalid row count"))?;
    let cols: usize = dims[1]
        .parse()
        .map_err(|_| CliError::format(path, line_no + 1, "invalid column count"))?;

    let (line_no, temp_line) = lines
        .next()
        .ok_or_else(|| CliError::format(path, 2, "missing temperature"))?;
    let temperature: f64 = temp_line
        .trim()
        .parse()
        .map_err(|_| CliError::format(path, line_no + 1, "invalid temperature"))?;

    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (line_no, row_line) = lines
            .next()
            .ok_or_else(|| CliError::format(path, rows + 2, "missing weight rows"))?;
        for token in row_line.split_whitespace() {
            let value: f64 = token.parse().map_err(|_| {
                CliError::format(path, line_no + 1, format!("invalid weight `{token}`"))
            })?;
            data.push(value);
        }
    }
    if data.len() != rows * cols {
        return Err(CliError::format(
            path,
            rows + 2,
            format!("expected {} weights, found {}", rows * cols, data.len()),
        ));
    }
    let weights = Matrix::from_vec(rows, cols, data)?;
    Ok(SoftmaxPolicy::with_weights(weights, temperature)?)
}
