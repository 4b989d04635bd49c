//! Training-metrics CSV with the fixed header
//! `stage,step,mean_reward,acc_simple,acc_moderate,acc_hard,resp_len,entropy,kl,ratio_dev`.

use std::io::Write;
use std::path::Path;

use dgrpo_core::trainer::MetricsRow;

use crate::error::{CliError, Result};

pub const METRICS_HEADER: &str =
    "stage,step,mean_reward,acc_simple,acc_moderate,acc_hard,resp_len,entropy,kl,ratio_dev";

pub fn write_metrics(rows: &[MetricsRow], path: &Path) -> Result<()> {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.stage,
            row.step,
            row.mean_reward,
            row.acc_simple,
            row.acc_moderate,
            row.acc_hard,
            row.resp_len,
            row.entropy,
            row.kl,
            row.ratio_dev
        ));
    }
    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == METRICS_HEADER => {}
        _ => return Err(CliError::format(path, 1, "missing or wrong metrics header")),
    }
    let mut rows = Vec::new();
    for (index, line) in lines {
        let line_no = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            return Err(CliError::format(
                path,
                line_no,
                format!("expected 10 columns, found {}", fields.len()),
            ));
        }
        let float = |i: usize| -> Result<f64> {
            fields[i].parse().map_err(|_| {
                CliError::format(path, line_no, format!("invalid value `{}`", fields[i]))
            })
        };
        rows.push(MetricsRow {
            stage: fields[0]
                .parse()
                .map_err(|_| CliError::format(path, line_no, "invalid stage"))?,
            step: fields[1]
                .parse()
                .map_err(|_| CliError::format(path, line_no, "invalid step"))?,
            mean_reward: float(2)?,
            acc_simple: float(3)?,
            acc_moderate: float(4)?,
            acc_hard: float(5)?,
            resp_len: float(6)?,
            entropy: float(7)?,
            kl: float(8)?,
            ratio_dev: float(9)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_round_trip_including_nan_columns() {
        let rows = vec![
            MetricsRow {
                stage: 1,
                step: 1,
                mean_reward: 0.25,
                acc_simple: f64::NAN,
                acc_moderate: 0.5,
                acc_hard: 0.1,
                resp_len: 2.5,
                entropy: 2.19,
                kl: 0.0,
                ratio_dev: 0.01,
            },
            MetricsRow {
                stage: 2,
                step: 1,
                mean_reward: 1.0,
                acc_simple: 1.0,
                acc_moderate: f64::NAN,
                acc_hard: f64::NAN,
                resp_len: 7.0,
                entropy: 0.2,
                kl: 1.5,
                ratio_dev: 0.2,
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        write_metrics(&rows, &path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(METRICS_HEADER));

        let loaded = read_metrics(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        assert!(loaded[0].acc_simple.is_nan());
        assert_eq!(loaded[0].acc_moderate, 0.5);
        assert_eq!(loaded[1].mean_reward, 1.0);
    }
}
