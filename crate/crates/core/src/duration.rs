//! Shot extraction and shot-duration statistics, and agreement of the modal
//! shot duration with the beat, bar and pattern durations.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::MetricsError;
use crate::model::{BeatGrid, BoundaryKind, BoundaryList, LikelihoodCurve};

/// Default likelihood threshold for declaring a shot boundary.
pub const DEFAULT_TAU: f64 = 0.5;

const ZERO_LENGTH_S: f64 = 1e-9;

/// Extracts shot boundaries from a likelihood curve.
///
/// Frames with value `>= tau` are boundary candidates. A run of consecutive
/// candidates yields one boundary at its highest frame (earliest on ties).
pub fn shot_boundaries(curve: &LikelihoodCurve, tau: f64) -> Result<BoundaryList, MetricsError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(MetricsError::InvalidThreshold(tau));
    }
    let mut times = Vec::new();
    let mut run_peak: Option<(usize, f64)> = None;
    for (i, &v) in curve.values.iter().enumerate() {
        if v >= tau {
            run_peak = match run_peak {
                Some((_, best)) if v > best => Some((i, v)),
                Some(peak) => Some(peak),
                None => Some((i, v)),
            };
        } else if let Some((peak, _)) = run_peak.take() {
            times.push(curve.time_of(peak));
        }
    }
    if let Some((peak, _)) = run_peak {
        times.push(curve.time_of(peak));
    }
    Ok(BoundaryList {
        kind: BoundaryKind::Shot,
        times_s: times,
    })
}

/// Durations of the shots partitioned by `shots` over `[0, duration_s]`,
/// including the leading and trailing partial shots. Zero-length end
/// segments are dropped.
pub fn shot_durations(shots: &BoundaryList, duration_s: f64) -> Vec<f64> {
    let mut edges = Vec::with_capacity(shots.len() + 2);
    edges.push(0.0);
    edges.extend(shots.iter().filter(|&t| t > 0.0 && t < duration_s));
    edges.push(duration_s);
    // A boundary at 0 or at the end only closes a zero-length segment.
    edges
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > ZERO_LENGTH_S)
        .collect()
}

/// Number of whole frames nearest to a duration, never below one.
fn quantize_frames(duration_s: f64, frame_rate_hz: f64) -> i64 {
    ((duration_s * frame_rate_hz).round() as i64).max(1)
}

/// Histogram of durations at frame-period resolution: `(frames, count)`.
fn frame_histogram(durations: &[f64], frame_rate_hz: f64) -> BTreeMap<i64, usize> {
    let mut hist = BTreeMap::new();
    for &d in durations {
        *hist.entry(quantize_frames(d, frame_rate_hz)).or_insert(0) += 1;
    }
    hist
}

/// Most common shot duration, quantized to whole frames. Ties go to the
/// shorter duration.
pub fn modal_shot_duration(durations: &[f64], frame_rate_hz: f64) -> Result<f64, MetricsError> {
    if !(frame_rate_hz.is_finite() && frame_rate_hz > 0.0) {
        return Err(MetricsError::InvalidFrameRate(frame_rate_hz));
    }
    let hist = frame_histogram(durations, frame_rate_hz);
    // BTreeMap iterates ascending, so a strict `>` keeps the shortest on ties.
    let mut best: Option<(i64, usize)> = None;
    for (&frames, &count) in &hist {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((frames, count));
        }
    }
    best.map(|(frames, _)| frames as f64 / frame_rate_hz)
        .ok_or(MetricsError::EmptyDurations)
}

/// Shot durations of a clip with their frame-resolution histogram and mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShotDurationProfile {
    pub durations_s: Vec<f64>,
    pub modal_duration_s: f64,
    /// `(bin_center_s, count)`, ascending by bin.
    pub histogram: Vec<(f64, usize)>,
}

impl ShotDurationProfile {
    pub fn mean_duration_s(&self) -> f64 {
        self.durations_s.iter().sum::<f64>() / self.durations_s.len() as f64
    }
}

pub fn shot_duration_profile(
    shots: &BoundaryList,
    duration_s: f64,
    frame_rate_hz: f64,
) -> Result<ShotDurationProfile, MetricsError> {
    let durations_s = shot_durations(shots, duration_s);
    let modal_duration_s = modal_shot_duration(&durations_s, frame_rate_hz)?;
    let histogram = frame_histogram(&durations_s, frame_rate_hz)
        .into_iter()
        .map(|(frames, count)| (frames as f64 / frame_rate_hz, count))
        .collect();
    Ok(ShotDurationProfile {
        durations_s,
        modal_duration_s,
        histogram,
    })
}

/// Whether the modal shot duration falls strictly inside `(0.5x, 1.5x)` of
/// the beat, bar and pattern durations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DurationAgreement {
    pub beat_level: bool,
    pub bar_level: bool,
    pub pattern_level: bool,
}

fn agrees(modal: f64, reference: f64) -> bool {
    0.5 * reference < modal && modal < 1.5 * reference
}

pub fn classify_duration_agreement(modal_s: f64, grid: &BeatGrid) -> DurationAgreement {
    DurationAgreement {
        beat_level: agrees(modal_s, grid.delta_beat()),
        bar_level: agrees(modal_s, grid.delta_bar()),
        pattern_level: agrees(modal_s, grid.delta_pattern()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve_with(len: usize, spikes: &[(usize, f64)]) -> LikelihoodCurve {
        let mut c = LikelihoodCurve::zeros(25.0, len);
        for &(i, v) in spikes {
            c.values[i] = v;
        }
        c
    }

    #[test]
    fn zero_curve_has_no_shots() {
        assert!(shot_boundaries(&curve_with(100, &[]), 0.5).unwrap().is_empty());
    }

    #[test]
    fn single_spike() {
        let shots = shot_boundaries(&curve_with(100, &[(50, 0.9)]), 0.5).unwrap();
        assert_eq!(shots.times_s, vec![2.0]);
    }

    #[test]
    fn run_collapses_to_its_peak() {
        let shots =
            shot_boundaries(&curve_with(100, &[(10, 0.6), (11, 0.8), (12, 0.7)]), 0.5).unwrap();
        assert_eq!(shots.times_s, vec![0.44]);
        // Plateau ties resolve to the first frame; a run at the end still closes.
        let shots =
            shot_boundaries(&curve_with(20, &[(3, 0.7), (4, 0.7), (19, 0.5)]), 0.5).unwrap();
        assert_eq!(shots.times_s, vec![0.12, 0.76]);
    }

    #[test]
    fn threshold_must_be_open_unit() {
        let c = curve_with(10, &[]);
        assert_eq!(shot_boundaries(&c, 0.0), Err(MetricsError::InvalidThreshold(0.0)));
        assert!(shot_boundaries(&c, 1.0).is_err());
    }

    #[test]
    fn durations_partition_the_clip() {
        let shots = BoundaryList::new(BoundaryKind::Shot, vec![2.0, 5.0, 9.0]).unwrap();
        assert_eq!(shot_durations(&shots, 10.0), vec![2.0, 3.0, 4.0, 1.0]);
        assert_eq!(shot_durations(&BoundaryList::empty(BoundaryKind::Shot), 7.5), vec![7.5]);
        let at_end = BoundaryList::new(BoundaryKind::Shot, vec![4.0, 10.0]).unwrap();
        assert_eq!(shot_durations(&at_end, 10.0), vec![4.0, 6.0]);
        let at_start = BoundaryList::new(BoundaryKind::Shot, vec![0.0, 4.0]).unwrap();
        assert_eq!(shot_durations(&at_start, 10.0), vec![4.0, 6.0]);
    }

    #[test]
    fn mode_prefers_majority_then_shorter() {
        assert_eq!(modal_shot_duration(&[1.0, 1.0, 2.0], 25.0).unwrap(), 1.0);
        assert_eq!(modal_shot_duration(&[2.0, 1.0], 25.0).unwrap(), 1.0);
        assert_eq!(modal_shot_duration(&[], 25.0), Err(MetricsError::EmptyDurations));
    }

    #[test]
    fn mode_recovers_88_bpm_bar() {
        // 2.72 s = 68 frames; jitter of one frame either side.
        let durations = [2.72, 2.68, 2.72, 2.76, 2.72, 2.72, 2.68, 2.76, 2.72];
        let modal = modal_shot_duration(&durations, 25.0).unwrap();
        assert!((modal - 2.72).abs() < 1e-12);
    }

    #[test]
    fn mode_near_124_bpm_bar() {
        // 1.93 s is not a whole number of 25 Hz frames; the nearest bin is 1.92 s.
        let durations = [1.93, 1.93, 1.89, 1.97, 1.93];
        let modal = modal_shot_duration(&durations, 25.0).unwrap();
        assert!((modal - 1.92).abs() < 1e-12);
        assert!((modal - 1.93).abs() <= 0.04);
    }

    #[test]
    fn agreement_intervals() {
        let g88 = BeatGrid::new(88.0, 4).unwrap();
        let a = classify_duration_agreement(2.72, &g88);
        assert!(a.bar_level && !a.beat_level && !a.pattern_level);

        let g120 = BeatGrid::new(120.0, 4).unwrap();
        assert!(!classify_duration_agreement(3.0, &g120).bar_level);
        assert_eq!(
            classify_duration_agreement(0.6, &g120),
            DurationAgreement {
                beat_level: true,
                bar_level: false,
                pattern_level: false
            }
        );
        assert!(classify_duration_agreement(8.0, &g120).pattern_level);
    }

    #[test]
    fn profile_histogram_matches_durations() {
        let shots = BoundaryList::new(BoundaryKind::Shot, vec![2.0, 4.0, 7.0]).unwrap();
        let p = shot_duration_profile(&shots, 9.0, 25.0).unwrap();
        assert_eq!(p.histogram, vec![(2.0, 3), (3.0, 1)]);
        assert_eq!(p.modal_duration_s, 2.0);
        assert!((p.mean_duration_s() - 2.25).abs() < 1e-12);
    }
}
