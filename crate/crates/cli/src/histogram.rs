//! Histogram emission: `bin_lo,bin_hi,count` CSV rows plus a standalone SVG
//! bar chart.

use std::io::Write;
use std::path::Path;

use dgrpo_core::curation::HistogramBin;

use crate::bank_format::format_f64;
use crate::error::{CliError, Result};

pub const HISTOGRAM_HEADER: &str = "bin_lo,bin_hi,count";

pub fn write_histogram_csv(bins: &[HistogramBin], path: &Path) -> Result<()> {
    let mut out = String::from(HISTOGRAM_HEADER);
    out.push('\n');
    for bin in bins {
        out.push_str(&format!(
            "{},{},{}\n",
            format_f64(bin.lower),
            format_f64(bin.upper),
            bin.count
        ));
    }
    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

/// Minimal self-contained bar chart of the accuracy distribution.
pub fn write_histogram_svg(bins: &[HistogramBin], title: &str, path: &Path) -> Result<()> {
    const WIDTH: f64 = 720.0;
    const HEIGHT: f64 = 420.0;
    const MARGIN_LEFT: f64 = 56.0;
    const MARGIN_RIGHT: f64 = 16.0;
    const MARGIN_TOP: f64 = 40.0;
    const MARGIN_BOTTOM: f64 = 48.0;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let max_count = bins.iter().map(|b| b.count).max().unwrap_or(0).max(1) as f64;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(title)
    ));

    let bar_w = plot_w / bins.len().max(1) as f64;
    for (i, bin) in bins.iter().enumerate() {
        let h = plot_h * bin.count as f64 / max_count;
        let x = MARGIN_LEFT + i as f64 * bar_w;
        let y = MARGIN_TOP + (plot_h - h);
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"#4878a8\" stroke=\"white\" stroke-width=\"1\"/>\n",
            x, y, bar_w, h
        ));
        if bin.count > 0 {
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" \
                 text-anchor=\"middle\">{}</text>\n",
                x + bar_w / 2.0,
                y - 4.0,
                bin.count
            ));
        }
    }

    // Axes and tick labels on the accuracy axis.
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{:.2}\" \
         stroke=\"black\"/>\n",
        MARGIN_TOP + plot_h
    ));
    for tick in 0..=4 {
        let value = tick as f64 / 4.0;
        let x = MARGIN_LEFT + plot_w * value;
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{value:.2}</text>\n",
            MARGIN_TOP + plot_h + 18.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">empirical accuracy</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">tasks</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));
    svg.push_str("</svg>\n");

    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(svg.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use dgrpo_core::curation::build_histogram;

    #[test]
    fn csv_and_svg_are_emitted() {
        let bins = build_histogram(&[0.0, 0.05, 0.5, 0.96, 1.0], 20).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("hist.csv");
        let svg = dir.path().join("hist.svg");
        write_histogram_csv(&bins, &csv).unwrap();
        write_histogram_svg(&bins, "accuracy distribution", &svg).unwrap();

        let text = std::fs::read_to_string(&csv).unwrap();
        assert!(text.starts_with(HISTOGRAM_HEADER));
        assert_eq!(text.lines().count(), 21);

        let svg_text = std::fs::read_to_string(&svg).unwrap();
        assert!(svg_text.starts_with("<svg"));
        assert!(svg_text.contains("</svg>"));
    }
}
