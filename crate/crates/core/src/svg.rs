//! Deterministic SVG rendering of dimension-versus-level spectra: empirical
//! points with error bars for both estimators, closed-form overlay curves
//! (bands drawn as translucent ribbons), one color per model. The output is
//! plain shapes and text with fixed-precision coordinates, so identical
//! reports render byte-identical files.

use std::io::Write;

use crate::dimension::DimMethod;
use crate::error::Result;
use crate::sweep::{CompareReport, ModelSection, ReportLine};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 168.0;
const MARGIN_T: f64 = 42.0;
const MARGIN_B: f64 = 56.0;

const PALETTE: [&str; 7] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        MARGIN_L + x / self.x_max * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - y / self.y_max * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Largest step from a readable set that yields at least four ticks.
fn tick_step(range: f64) -> f64 {
    for step in [1.0, 0.5, 0.25, 0.2, 0.1, 0.05, 0.02, 0.01] {
        if range / step >= 4.0 {
            return step;
        }
    }
    0.01
}

fn polyline(points: &[(f64, f64)], style: &str) -> String {
    let coords: Vec<String> =
        points.iter().map(|&(x, y)| format!("{},{}", px(x), px(y))).collect();
    format!("<polyline fill=\"none\" {} points=\"{}\"/>\n", style, coords.join(" "))
}

fn line(x1: f64, y1: f64, x2: f64, y2: f64, style: &str) -> String {
    format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {}/>\n",
        px(x1),
        px(y1),
        px(x2),
        px(y2),
        style
    )
}

fn text(x: f64, y: f64, anchor: &str, size: u32, content: &str) -> String {
    let escaped = content.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"{}\" font-family=\"monospace\" \
         font-size=\"{}\">{}</text>\n",
        px(x),
        px(y),
        anchor,
        size,
        escaped
    )
}

/// Gammas of a section's covering lines, ascending (the line order).
fn section_gammas(section: &ModelSection) -> Vec<f64> {
    let mut gs: Vec<f64> = section
        .lines
        .iter()
        .filter(|l| l.estimator == DimMethod::Hausdorff)
        .map(|l| l.gamma)
        .collect();
    gs.sort_by(|a, b| a.total_cmp(b));
    gs.dedup();
    gs
}

fn series<'a>(section: &'a ModelSection, est: DimMethod) -> Vec<&'a ReportLine> {
    let mut lines: Vec<&ReportLine> =
        section.lines.iter().filter(|l| l.estimator == est).collect();
    lines.sort_by(|a, b| a.gamma.total_cmp(&b.gamma));
    lines
}

/// Render the report as a standalone SVG document.
pub fn render_spectrum_svg(report: &CompareReport) -> String {
    let mut x_max: f64 = 0.0;
    let mut y_max: f64 = 1.0;
    for s in &report.sections {
        y_max = y_max.max(s.ambient_dim as f64);
        for l in &s.lines {
            x_max = x_max.max(l.gamma);
            y_max = y_max.max(l.theory_hi);
            if let Some(v) = l.dim_hat {
                y_max = y_max.max(v + 2.0 * l.stderr.unwrap_or(0.0));
            }
        }
    }
    if x_max <= 0.0 {
        x_max = 1.0;
    }
    let frame = Frame { x_max: x_max * 1.08, y_max: y_max * 1.08 };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&text(
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        24.0,
        "middle",
        15,
        "tall-peak dimension spectrum",
    ));

    // Grid and ticks.
    let axis_style = "stroke=\"#333333\" stroke-width=\"1\"";
    let grid_style = "stroke=\"#dddddd\" stroke-width=\"1\"";
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let xstep = tick_step(frame.x_max);
    let mut t = xstep;
    while t <= frame.x_max {
        let sx = frame.sx(t);
        out.push_str(&line(sx, y0, sx, y1, grid_style));
        out.push_str(&text(sx, y0 + 18.0, "middle", 11, &format!("{t:.2}")));
        t += xstep;
    }
    let ystep = tick_step(frame.y_max);
    let mut t = 0.0;
    while t <= frame.y_max {
        let sy = frame.sy(t);
        out.push_str(&line(x0, sy, x1, sy, grid_style));
        out.push_str(&text(x0 - 8.0, sy + 4.0, "end", 11, &format!("{t:.2}")));
        t += ystep;
    }
    out.push_str(&line(x0, y0, x1, y0, axis_style));
    out.push_str(&line(x0, y0, x0, y1, axis_style));
    out.push_str(&text((x0 + x1) / 2.0, HEIGHT - 16.0, "middle", 13, "level gamma"));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"13\" transform=\"rotate(-90 18 {})\">estimated dimension</text>\n",
        px((y0 + y1) / 2.0),
        px((y0 + y1) / 2.0)
    ));

    for (i, section) in report.sections.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let gammas = section_gammas(section);
        let theory_of = |g: f64| -> Option<(f64, f64)> {
            section
                .lines
                .iter()
                .find(|l| l.gamma == g)
                .map(|l| (l.theory_lo, l.theory_hi))
        };

        // Closed-form overlay: ribbon when any level carries a band,
        // dotted curve otherwise.
        let bands: Vec<(f64, f64, f64)> = gammas
            .iter()
            .filter_map(|&g| theory_of(g).map(|(lo, hi)| (g, lo, hi)))
            .collect();
        if bands.len() >= 2 {
            if bands.iter().any(|&(_, lo, hi)| hi > lo) {
                let mut ring: Vec<String> = Vec::new();
                for &(g, lo, _) in &bands {
                    ring.push(format!("{},{}", px(frame.sx(g)), px(frame.sy(lo))));
                }
                for &(g, _, hi) in bands.iter().rev() {
                    ring.push(format!("{},{}", px(frame.sx(g)), px(frame.sy(hi))));
                }
                out.push_str(&format!(
                    "<polygon fill=\"{color}\" fill-opacity=\"0.10\" stroke=\"none\" \
                     points=\"{}\"/>\n",
                    ring.join(" ")
                ));
            }
            let mid: Vec<(f64, f64)> = bands
                .iter()
                .map(|&(g, lo, hi)| (frame.sx(g), frame.sy(0.5 * (lo + hi))))
                .collect();
            out.push_str(&polyline(
                &mid,
                &format!("stroke=\"{color}\" stroke-width=\"1.5\" stroke-dasharray=\"2,3\""),
            ));
        }

        // Empirical series, covering estimator solid with filled markers,
        // box-count dashed with open markers.
        for (est, dash, open) in [
            (DimMethod::Hausdorff, "", false),
            (DimMethod::Minkowski, " stroke-dasharray=\"6,4\"", true),
        ] {
            let lines_for = series(section, est);
            let live: Vec<(f64, f64, Option<f64>)> = lines_for
                .iter()
                .filter_map(|l| l.dim_hat.map(|v| (l.gamma, v, l.stderr)))
                .collect();
            if live.len() >= 2 {
                let pts: Vec<(f64, f64)> =
                    live.iter().map(|&(g, v, _)| (frame.sx(g), frame.sy(v))).collect();
                out.push_str(&polyline(
                    &pts,
                    &format!("stroke=\"{color}\" stroke-width=\"2\"{dash}"),
                ));
            }
            for &(g, v, se) in &live {
                let (cx, cy) = (frame.sx(g), frame.sy(v));
                if let Some(se) = se {
                    let lo = frame.sy(v - 1.96 * se);
                    let hi = frame.sy(v + 1.96 * se);
                    let bar = format!("stroke=\"{color}\" stroke-width=\"1\"");
                    out.push_str(&line(cx, lo, cx, hi, &bar));
                    out.push_str(&line(cx - 3.0, lo, cx + 3.0, lo, &bar));
                    out.push_str(&line(cx - 3.0, hi, cx + 3.0, hi, &bar));
                }
                let fill = if open { "white" } else { color };
                out.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\" stroke=\"{}\" \
                     stroke-width=\"1.5\"/>\n",
                    px(cx),
                    px(cy),
                    fill,
                    color
                ));
            }
            // Bounded levels: cross marker on the axis.
            for l in &lines_for {
                if l.dim_hat.is_none() {
                    let (cx, cy) = (frame.sx(l.gamma), frame.sy(0.0));
                    let style = format!("stroke=\"{color}\" stroke-width=\"1.5\"");
                    out.push_str(&line(cx - 3.0, cy - 3.0, cx + 3.0, cy + 3.0, &style));
                    out.push_str(&line(cx - 3.0, cy + 3.0, cx + 3.0, cy - 3.0, &style));
                }
            }
        }
    }

    // Legend: one row per model, then fixed style notes.
    let lx = WIDTH - MARGIN_R + 14.0;
    let mut ly = MARGIN_T + 8.0;
    for (i, section) in report.sections.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        out.push_str(&line(lx, ly - 4.0, lx + 22.0, ly - 4.0, &format!(
            "stroke=\"{color}\" stroke-width=\"2\""
        )));
        out.push_str(&text(
            lx + 28.0,
            ly,
            "start",
            12,
            &format!("{} ({})", section.model, section.verdict.as_str()),
        ));
        ly += 18.0;
    }
    ly += 6.0;
    for note in [
        "solid: covering estimate",
        "dashed: box-count estimate",
        "dotted: prediction",
        "x on axis: bounded",
    ] {
        out.push_str(&text(lx, ly, "start", 11, note));
        ly += 15.0;
    }

    out.push_str("</svg>\n");
    out
}

pub fn write_spectrum_svg<W: Write>(w: &mut W, report: &CompareReport) -> Result<()> {
    w.write_all(render_spectrum_svg(report).as_bytes())?;
    Ok(())
}
