//! Line-delimited task-bank format.
//!
//! One task per line, seven tab-separated fields in fixed order:
//!
//! ```text
//! id <TAB> difficulty <TAB> target <TAB> features <TAB> hint <TAB> accuracy <TAB> rollouts
//! ```
//!
//! `target` is a comma-separated symbol list; `features` joins rows with `;`
//! and values with `,`; `hint` is `lower,upper,active` with a 0/1 flag;
//! `accuracy` is `-` when not yet estimated. Floating-point values are
//! written with 17 significant digits so files round-trip bit-exactly.

use std::io::Write;
use std::path::Path;

use dgrpo_core::taskbank::{HintBand, TaskRecord};

use crate::error::{CliError, Result};

/// 17 significant digits: enough to reconstruct any f64 exactly.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

fn parse_f64(path: &Path, line: usize, text: &str, what: &str) -> Result<f64> {
    text.parse()
        .map_err(|_| CliError::format(path, line, format!("invalid {what} `{text}`")))
}

fn parse_int<T: std::str::FromStr>(path: &Path, line: usize, text: &str, what: &str) -> Result<T> {
    text.parse()
        .map_err(|_| CliError::format(path, line, format!("invalid {what} `{text}`")))
}

fn encode_task(task: &TaskRecord) -> String {
    let target = task
        .target
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",");
    let features = task
        .features
        .iter()
        .map(|row| {
            row.iter()
                .map(|&v| format_f64(v))
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join(";");
    let hint = format!(
        "{},{},{}",
        format_f64(task.hint.lower),
        format_f64(task.hint.upper),
        u8::from(task.hint.active)
    );
    let accuracy = match task.accuracy_estimate {
        Some(value) => format_f64(value),
        None => "-".to_string(),
    };
    format!(
        "{}\t{}\t{target}\t{features}\t{hint}\t{accuracy}\t{}",
        task.id,
        format_f64(task.difficulty),
        task.rollout_count
    )
}

pub fn write_bank(tasks: &[TaskRecord], path: &Path) -> Result<()> {
    let mut out = String::new();
    for task in tasks {
        out.push_str(&encode_task(task));
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

pub fn read_bank(path: &Path) -> Result<Vec<TaskRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut tasks = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        tasks.push(decode_task(path, line_no, line)?);
    }
    Ok(tasks)
}

fn decode_task(path: &Path, line_no: usize, line: &str) -> Result<TaskRecord> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 7 {
        return Err(CliError::format(
            path,
            line_no,
            format!("expected 7 tab-separated fields, found {}", fields.len()),
        ));
    }
    let id = parse_int(path, line_no, fields[0], "task id")?;
    let difficulty = parse_f64(path, line_no, fields[1], "difficulty")?;
    let target = fields[2]
        .split(',')
        .map(|s| parse_int(path, line_no, s, "target symbol"))
        .collect::<Result<Vec<usize>>>()?;
    let features = fields[3]
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|s| parse_f64(path, line_no, s, "feature value"))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    if features.len() != target.len() {
        return Err(CliError::format(
            path,
            line_no,
            format!(
                "feature rows ({}) do not match target length ({})",
                features.len(),
                target.len()
            ),
        ));
    }
    let width = features.first().map_or(0, Vec::len);
    if features.iter().any(|row| row.len() != width) {
        return Err(CliError::format(path, line_no, "ragged feature rows"));
    }

    let hint_parts: Vec<&str> = fields[4].split(',').collect();
    if hint_parts.len() != 3 {
        return Err(CliError::format(
            path,
            line_no,
            "hint must be lower,upper,active",
        ));
    }
    let active: u8 = parse_int(path, line_no, hint_parts[2], "hint flag")?;
    let hint = HintBand {
        lower: parse_f64(path, line_no, hint_parts[0], "hint lower bound")?,
        upper: parse_f64(path, line_no, hint_parts[1], "hint upper bound")?,
        active: active != 0,
    };

    let accuracy_estimate = match fields[5] {
        "-" => None,
        text => Some(parse_f64(path, line_no, text, "accuracy estimate")?),
    };
    let rollout_count = parse_int(path, line_no, fields[6], "rollout count")?;

    Ok(TaskRecord {
        id,
        difficulty,
        target,
        features,
        hint,
        accuracy_estimate,
        rollout_count,
    })
}
