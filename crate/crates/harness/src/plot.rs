//! Minimal self-contained SVG plots: metric curves with a ±1σ band, the
//! designed inputs over time, and the 2-D estimate trajectory with
//! posterior ellipses.

use std::fmt::Write as _;

use crate::run::RunRecord;
use crate::summary::SummaryRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 46.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn around(xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>) -> Frame {
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        for v in xs.filter(|v| v.is_finite()) {
            x_min = x_min.min(v);
            x_max = x_max.max(v);
        }
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for v in ys.filter(|v| v.is_finite()) {
            y_min = y_min.min(v);
            y_max = y_max.max(v);
        }
        if !x_min.is_finite() || x_min == x_max {
            x_min -= 0.5;
            x_max += 0.5;
        }
        if !y_min.is_finite() {
            y_min = 0.0;
            y_max = 1.0;
        }
        if y_min == y_max {
            y_min -= 0.5;
            y_max += 0.5;
        }
        let pad = 0.05 * (y_max - y_min);
        Frame {
            x_min,
            x_max,
            y_min: y_min - pad,
            y_max: y_max + pad,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT
            - MARGIN_B
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\">{title}</text>\n",
        WIDTH / 2.0
    )
}

fn axes(s: &mut String, frame: &Frame, xlabel: &str, ylabel: &str) {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    let _ = write!(
        s,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = frame.x_min + t * (frame.x_max - frame.x_min);
        let yv = frame.y_min + t * (frame.y_max - frame.y_min);
        let xp = frame.px(xv);
        let yp = frame.py(yv);
        let _ = write!(
            s,
            "<line x1=\"{xp}\" y1=\"{y0}\" x2=\"{xp}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{xp}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"10\">{}</text>\n",
            y0 + 4.0,
            y0 + 16.0,
            tick_label(xv, frame.x_max - frame.x_min)
        );
        let _ = write!(
            s,
            "<line x1=\"{}\" y1=\"{yp}\" x2=\"{x0}\" y2=\"{yp}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"10\">{}</text>\n",
            x0 - 4.0,
            x0 - 6.0,
            yp + 3.0,
            tick_label(yv, frame.y_max - frame.y_min)
        );
    }
    let _ = write!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"12\">{xlabel}</text>\n\
         <text x=\"14\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"12\" transform=\"rotate(-90 14 {})\">{ylabel}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 10.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
    );
}

/// Label a tick with just enough precision to distinguish neighbors one
/// quarter-span apart.
fn tick_label(v: f64, span: f64) -> String {
    let step = span.abs() / 4.0;
    if v == 0.0 {
        return "0".to_string();
    }
    if !step.is_finite() || step == 0.0 {
        return format!("{v:.3}");
    }
    if v.abs() >= 1e4 || v.abs() < 1e-3 {
        return format!("{v:.2e}");
    }
    let decimals = (1 - step.log10().floor() as i32).clamp(0, 10) as usize;
    format!("{v:.decimals$}")
}

fn polyline(s: &mut String, pts: &[(f64, f64)], color: &str) {
    if pts.is_empty() {
        return;
    }
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
        coords.join(" ")
    );
}

/// Mean curve with a shaded ±1σ band, e.g. the estimate error or the log
/// det of the model-error covariance over iterations.
pub fn mean_band_plot(
    title: &str,
    ylabel: &str,
    rows: &[SummaryRow],
    pick: impl Fn(&SummaryRow) -> (f64, f64),
) -> String {
    let series: Vec<(f64, f64, f64)> = rows
        .iter()
        .map(|r| {
            let (m, sd) = pick(r);
            (r.iter as f64, m, sd)
        })
        .filter(|(_, m, sd)| m.is_finite() && sd.is_finite())
        .collect();

    let frame = Frame::around(
        series.iter().map(|(i, _, _)| *i),
        series
            .iter()
            .flat_map(|(_, m, sd)| [m - sd, m + sd].into_iter()),
    );
    let mut s = svg_open(title);
    axes(&mut s, &frame, "iteration", ylabel);

    if !series.is_empty() {
        let mut band: Vec<(f64, f64)> = series
            .iter()
            .map(|(i, m, sd)| (frame.px(*i), frame.py(m + sd)))
            .collect();
        band.extend(
            series
                .iter()
                .rev()
                .map(|(i, m, sd)| (frame.px(*i), frame.py(m - sd))),
        );
        let coords: Vec<String> = band.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            s,
            "<polygon points=\"{}\" fill=\"steelblue\" fill-opacity=\"0.25\" stroke=\"none\"/>",
            coords.join(" ")
        );
        let mean_pts: Vec<(f64, f64)> = series
            .iter()
            .map(|(i, m, _)| (frame.px(*i), frame.py(*m)))
            .collect();
        polyline(&mut s, &mean_pts, "steelblue");
    }
    s.push_str("</svg>\n");
    s
}

/// Designed input coordinates over time for one seed.
pub fn inputs_plot(title: &str, records: &[RunRecord], seed: u64) -> String {
    let rows: Vec<&RunRecord> = records.iter().filter(|r| r.seed == seed).collect();
    let dim = rows.first().map_or(0, |r| r.input.len());
    let frame = Frame::around(
        rows.iter().map(|r| r.iter as f64),
        rows.iter().flat_map(|r| r.input.iter().copied()),
    );
    let mut s = svg_open(title);
    axes(&mut s, &frame, "iteration", "input coordinate");
    let colors = ["steelblue", "firebrick", "seagreen", "darkorange"];
    for d in 0..dim {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.input[d].is_finite())
            .map(|r| (frame.px(r.iter as f64), frame.py(r.input[d])))
            .collect();
        polyline(&mut s, &pts, colors[d % colors.len()]);
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" \
             fill=\"{}\">input_{d}</text>",
            WIDTH - MARGIN_R - 70.0,
            MARGIN_T + 16.0 * (d as f64 + 1.0),
            colors[d % colors.len()]
        );
    }
    s.push_str("</svg>\n");
    s
}

/// 2-D slice of the estimate trajectory with 1σ posterior ellipses.
pub fn trajectory_plot(title: &str, records: &[RunRecord], seed: u64) -> String {
    let rows: Vec<&RunRecord> = records.iter().filter(|r| r.seed == seed).collect();
    let frame = Frame::around(
        rows.iter().flat_map(|r| {
            let s = ellipse_extent(r);
            [r.ell_mean[0] - s.0, r.ell_mean[0] + s.0].into_iter()
        }),
        rows.iter().flat_map(|r| {
            let s = ellipse_extent(r);
            [r.ell_mean[1] - s.1, r.ell_mean[1] + s.1].into_iter()
        }),
    );
    let mut s = svg_open(title);
    axes(&mut s, &frame, "theta_0", "theta_1");

    for r in &rows {
        let (a, b, angle_deg) = ellipse_axes(r.ell_cov);
        let cx = frame.px(r.ell_mean[0]);
        let cy = frame.py(r.ell_mean[1]);
        // Data-to-pixel scaling differs per axis; scale semi-axes by x.
        let sx = (WIDTH - MARGIN_L - MARGIN_R) / (frame.x_max - frame.x_min);
        let sy = (HEIGHT - MARGIN_T - MARGIN_B) / (frame.y_max - frame.y_min);
        let _ = writeln!(
            s,
            "<ellipse cx=\"{cx:.2}\" cy=\"{cy:.2}\" rx=\"{:.2}\" ry=\"{:.2}\" \
             fill=\"none\" stroke=\"steelblue\" stroke-opacity=\"0.6\" \
             transform=\"rotate({:.2} {cx:.2} {cy:.2})\"/>",
            (a * sx).max(0.5),
            (b * sy).max(0.5),
            -angle_deg
        );
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (frame.px(r.ell_mean[0]), frame.py(r.ell_mean[1])))
        .collect();
    polyline(&mut s, &pts, "firebrick");
    for (x, y) in &pts {
        let _ = writeln!(
            s,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"2\" fill=\"firebrick\"/>"
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Semi-axes and rotation (degrees, counterclockwise) of the 1σ ellipse of
/// a 2×2 covariance (c00, c01, c11).
fn ellipse_axes(cov: [f64; 3]) -> (f64, f64, f64) {
    let [c00, c01, c11] = cov;
    let tr = c00 + c11;
    let det = c00 * c11 - c01 * c01;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let l1 = (tr / 2.0 + disc).max(0.0);
    let l2 = (tr / 2.0 - disc).max(0.0);
    let angle = if c01.abs() < 1e-300 && c00 >= c11 {
        0.0
    } else if c01.abs() < 1e-300 {
        90.0
    } else {
        (l1 - c00).atan2(c01).to_degrees()
    };
    (l1.sqrt(), l2.sqrt(), angle)
}

fn ellipse_extent(r: &RunRecord) -> (f64, f64) {
    (r.ell_cov[0].max(0.0).sqrt(), r.ell_cov[2].max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_axes_of_diagonal_covariance() {
        let (a, b, _) = ellipse_axes([4.0, 0.0, 1.0]);
        assert!((a - 2.0).abs() < 1e-12);
        assert!((b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plots_are_wellformed_svg() {
        let records = vec![RunRecord {
            seed: 0,
            iter: 1,
            linf_error: 0.5,
            logdet_model_err: -2.0,
            delta: 0.3,
            accepted: 5,
            input: vec![0.2, -0.1],
            ell_mean: [1.0, 2.0],
            ell_cov: [0.3, 0.05, 0.2],
        }];
        let rows = crate::summary::summarize(&records).unwrap();
        for svg in [
            mean_band_plot("err", "error", &rows, |r| (r.mean_linf, r.std_linf)),
            inputs_plot("inputs", &records, 0),
            trajectory_plot("trajectory", &records, 0),
        ] {
            assert!(svg.starts_with("<svg"));
            assert!(svg.trim_end().ends_with("</svg>"));
            assert!(svg.contains("polyline") || svg.contains("ellipse"));
        }
    }
}
