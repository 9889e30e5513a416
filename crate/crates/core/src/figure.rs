//! SVG timeline of one clip: cuts, downbeats and segment boundaries drawn as
//! ticks in three lanes over a shared time axis.

use std::fmt::Write as _;

use crate::duration::shot_boundaries;
use crate::error::ReportError;
use crate::model::ClipBundle;

pub const FIGURE_WIDTH: f64 = 1000.0;
pub const FIGURE_HEIGHT: f64 = 210.0;
pub const PLOT_LEFT: f64 = 100.0;
pub const PLOT_RIGHT: f64 = 970.0;

const LANE_HEIGHT: f64 = 40.0;
const LANE_GAP: f64 = 10.0;
const LANE_TOP: f64 = 20.0;
const AXIS_Y: f64 = LANE_TOP + 3.0 * (LANE_HEIGHT + LANE_GAP);

/// Lane names in drawing order, top to bottom.
pub const LANES: [&str; 3] = ["cuts", "downbeats", "segments"];

const LANE_COLORS: [&str; 3] = ["#c0392b", "#2c3e50", "#27ae60"];

const AXIS_STEPS: [f64; 12] = [
    0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 30.0, 60.0, 120.0, 300.0,
];

/// Horizontal position of time `t` for a window `[start, end]`.
pub fn x_of(t: f64, start_s: f64, end_s: f64) -> f64 {
    PLOT_LEFT + (t - start_s) / (end_s - start_s) * (PLOT_RIGHT - PLOT_LEFT)
}

fn mmss(t: f64) -> String {
    let minutes = (t / 60.0).floor();
    let seconds = t - 60.0 * minutes;
    if (seconds - seconds.round()).abs() < 1e-9 {
        format!("{:02}:{:02}", minutes as u64, seconds.round() as u64)
    } else {
        format!("{:02}:{:04.1}", minutes as u64, seconds)
    }
}

/// Renders the window `[start_s, end_s]` of a clip. Cuts are extracted from
/// the likelihood curve with threshold `tau`.
pub fn emit_timeline_figure(
    bundle: &ClipBundle,
    start_s: f64,
    end_s: f64,
    tau: f64,
) -> Result<String, ReportError> {
    let window_ok = start_s.is_finite()
        && end_s.is_finite()
        && start_s >= 0.0
        && end_s > start_s
        && end_s <= bundle.duration_s;
    if !window_ok {
        return Err(ReportError::InvalidWindow {
            start_s,
            end_s,
            duration_s: bundle.duration_s,
        });
    }
    let cuts = shot_boundaries(&bundle.curve, tau)?;
    let lanes = [&cuts.times_s, &bundle.downbeats.times_s, &bundle.segments.times_s];

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{FIGURE_WIDTH}" height="{FIGURE_HEIGHT}" viewBox="0 0 {FIGURE_WIDTH} {FIGURE_HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        "<title>{} {} to {}</title>",
        xml_escape(&bundle.clip_id),
        mmss(start_s),
        mmss(end_s)
    );
    let _ = writeln!(
        svg,
        r##"<rect x="0" y="0" width="{FIGURE_WIDTH}" height="{FIGURE_HEIGHT}" fill="#ffffff"/>"##
    );

    for (lane, (name, times)) in LANES.iter().zip(lanes).enumerate() {
        let top = LANE_TOP + lane as f64 * (LANE_HEIGHT + LANE_GAP);
        let color = LANE_COLORS[lane];
        let _ = writeln!(svg, r#"<g class="lane" id="{name}">"#);
        let _ = writeln!(
            svg,
            r##"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="#333333">{name}</text>"##,
            PLOT_LEFT - 10.0,
            top + LANE_HEIGHT / 2.0 + 4.0
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{PLOT_LEFT:.2}" y1="{mid:.2}" x2="{PLOT_RIGHT:.2}" y2="{mid:.2}" stroke="#dddddd"/>"##,
            mid = top + LANE_HEIGHT / 2.0
        );
        for &t in times.iter().filter(|&&t| t >= start_s && t <= end_s) {
            let x = x_of(t, start_s, end_s);
            let _ = writeln!(
                svg,
                r#"<line class="tick" data-t="{t}" x1="{x:.2}" y1="{top:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                top + LANE_HEIGHT
            );
        }
        svg.push_str("</g>\n");
    }

    let _ = writeln!(
        svg,
        r##"<g class="axis"><line x1="{PLOT_LEFT:.2}" y1="{AXIS_Y:.2}" x2="{PLOT_RIGHT:.2}" y2="{AXIS_Y:.2}" stroke="#000000"/>"##
    );
    let span = end_s - start_s;
    let step = AXIS_STEPS
        .iter()
        .copied()
        .find(|s| span / s <= 10.0)
        .unwrap_or(600.0);
    let mut k = (start_s / step).ceil() as i64;
    while (k as f64) * step <= end_s + 1e-9 {
        let t = k as f64 * step;
        let x = x_of(t, start_s, end_s);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{AXIS_Y:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000000"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            AXIS_Y + 5.0,
            AXIS_Y + 18.0,
            mmss(t)
        );
        k += 1;
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BeatGrid, BoundaryKind, BoundaryList, LikelihoodCurve};

    fn bundle(downbeats: Vec<f64>) -> ClipBundle {
        ClipBundle {
            clip_id: "fig<1>".into(),
            duration_s: 20.0,
            grid: BeatGrid::new(120.0, 4).unwrap(),
            downbeats: BoundaryList::new(BoundaryKind::Downbeat, downbeats).unwrap(),
            segments: BoundaryList::empty(BoundaryKind::Segment),
            beats_s: None,
            curve: LikelihoodCurve::zeros(25.0, 500),
            genres: None,
        }
    }

    fn ticks(svg: &str, lane: &str) -> Vec<f64> {
        let start = svg.find(&format!("id=\"{lane}\"")).unwrap();
        let body = &svg[start..start + svg[start..].find("</g>").unwrap()];
        body.lines()
            .filter(|l| l.contains("class=\"tick\""))
            .map(|l| {
                let rest = &l[l.find("x1=\"").unwrap() + 4..];
                rest[..rest.find('"').unwrap()].parse().unwrap()
            })
            .collect()
    }

    #[test]
    fn empty_window_draws_axis_only() {
        let svg = emit_timeline_figure(&bundle(vec![]), 2.0, 6.0, 0.5).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("class=\"axis\""));
        assert!(!svg.contains("class=\"tick\""));
        assert!(svg.contains("fig&lt;1&gt;"));
    }

    #[test]
    fn centered_downbeat_is_mid_plot() {
        let svg = emit_timeline_figure(&bundle(vec![4.0]), 2.0, 6.0, 0.5).unwrap();
        let xs = ticks(&svg, "downbeats");
        assert_eq!(xs.len(), 1);
        assert!((xs[0] - (PLOT_LEFT + PLOT_RIGHT) / 2.0).abs() < 0.01);
        assert!(ticks(&svg, "cuts").is_empty());
    }

    #[test]
    fn bad_windows_rejected() {
        let b = bundle(vec![]);
        for (s, e) in [(5.0, 5.0), (6.0, 2.0), (-1.0, 2.0), (10.0, 25.0)] {
            assert!(emit_timeline_figure(&b, s, e, 0.5).is_err(), "{s}..{e}");
        }
    }

    #[test]
    fn time_labels() {
        assert_eq!(mmss(140.0), "02:20");
        assert_eq!(mmss(61.5), "01:01.5");
    }
}
