//! Co-occurrence of cuts with music boundaries.
//!
//! Each music anchor `t_i` gets a score `S_i`: the shot-boundary likelihood
//! summed frame by frame under a Gaussian window centred on the anchor frame,
//! with unit peak (`w(0) = 1`) and `sigma` measured in frames. The clip-level
//! score `S` is the mean of `S_i` over anchors.

use std::cmp::Ordering;

use log::{debug, warn};
use serde::Serialize;

use crate::error::MetricsError;
use crate::model::{BoundaryKind, BoundaryList, LikelihoodCurve};

pub const DEFAULT_SIGMA_FRAMES: f64 = 2.0;
/// Window half-width in units of sigma. At 6 sigma the omitted tail mass
/// stays below 1e-8 even when every frame has likelihood 1.
pub const DEFAULT_TRUNCATION_SIGMAS: f64 = 6.0;

/// Gaussian window shape used by [`cooccurrence_score`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreWindow {
    pub sigma_frames: f64,
    pub truncation_sigmas: f64,
}

impl Default for ScoreWindow {
    fn default() -> Self {
        Self {
            sigma_frames: DEFAULT_SIGMA_FRAMES,
            truncation_sigmas: DEFAULT_TRUNCATION_SIGMAS,
        }
    }
}

impl ScoreWindow {
    pub fn with_sigma(sigma_frames: f64) -> Self {
        Self {
            sigma_frames,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), MetricsError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.sigma_frames) && ok(self.truncation_sigmas) {
            Ok(())
        } else {
            Err(MetricsError::InvalidWindow {
                sigma: self.sigma_frames,
                truncation: self.truncation_sigmas,
            })
        }
    }

    fn half_width_frames(&self) -> i64 {
        (self.truncation_sigmas * self.sigma_frames).floor() as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CooccurrenceResult {
    pub anchor_kind: BoundaryKind,
    pub per_anchor_scores: Vec<f64>,
    /// Mean of `per_anchor_scores`; 0 when there are no anchors.
    pub mean_score: f64,
    pub anchor_count: usize,
    /// Anchors whose raw window sum exceeded 1 and was clamped.
    pub clamped_count: usize,
}

impl CooccurrenceResult {
    /// False when there were no anchors and `mean_score` carries no information.
    pub fn is_defined(&self) -> bool {
        self.anchor_count > 0
    }

    pub fn mean(&self) -> Option<f64> {
        self.is_defined().then_some(self.mean_score)
    }
}

/// Scores every anchor against the curve.
///
/// Anchors must lie in `[0, curve duration]` (half a frame of slack at the
/// end); the window is clipped at the curve edges.
pub fn cooccurrence_score(
    curve: &LikelihoodCurve,
    anchors: &BoundaryList,
    window: ScoreWindow,
) -> Result<CooccurrenceResult, MetricsError> {
    window.validate()?;
    let duration_s = curve.duration_s();
    let slack = 0.5 * curve.frame_period_s();
    let half = window.half_width_frames();
    let two_sigma_sq = 2.0 * window.sigma_frames * window.sigma_frames;
    let last = curve.len() as i64 - 1;

    let mut scores = Vec::with_capacity(anchors.len());
    let mut clamped_count = 0;
    for t in anchors.iter() {
        if !(t >= 0.0 && t <= duration_s + slack) {
            return Err(MetricsError::AnchorOutsideCurve {
                time_s: t,
                duration_s,
            });
        }
        let center = curve.frame_of(t);
        let lo = (center - half).max(0);
        let hi = (center + half).min(last);
        let mut sum = 0.0;
        for k in lo..=hi {
            let d = (k - center) as f64;
            sum += (-d * d / two_sigma_sq).exp() * curve.values[k as usize];
        }
        if sum > 1.0 {
            clamped_count += 1;
            sum = 1.0;
        }
        scores.push(sum);
    }
    if clamped_count > 0 {
        debug!("clamped {clamped_count} of {} anchor scores to 1", scores.len());
    }
    let mean_score = if scores.is_empty() {
        0.0
    } else {
        scores.iter().sum::<f64>() / scores.len() as f64
    };
    Ok(CooccurrenceResult {
        anchor_kind: anchors.kind,
        anchor_count: scores.len(),
        per_anchor_scores: scores,
        mean_score,
        clamped_count,
    })
}

/// Signed offsets of the nearest cut around each downbeat.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OffsetProfile {
    /// `shot - anchor` for each matched anchor; negative means the cut comes first.
    pub offsets_s: Vec<f64>,
    pub median_offset_s: Option<f64>,
    /// Fraction of matched offsets that are negative.
    pub anticipation_fraction: f64,
    /// Fraction of anchors with a cut inside the search window.
    pub matched_fraction: f64,
    pub half_window_s: f64,
}

/// For each anchor, finds the nearest shot within `±half_window_s`. When two
/// shots are equally near, the earlier one wins.
pub fn offset_profile(
    anchors: &BoundaryList,
    shots: &BoundaryList,
    half_window_s: f64,
) -> Result<OffsetProfile, MetricsError> {
    if !(half_window_s.is_finite() && half_window_s > 0.0) {
        return Err(MetricsError::InvalidHalfWindow(half_window_s));
    }
    let shot_times = &shots.times_s;
    let mut offsets = Vec::with_capacity(anchors.len());
    for a in anchors.iter() {
        let idx = shot_times.partition_point(|&s| s < a);
        let before = idx.checked_sub(1).map(|i| shot_times[i] - a);
        let after = shot_times.get(idx).map(|&s| s - a);
        let nearest = match (before, after) {
            (Some(b), Some(f)) => Some(if -b <= f { b } else { f }),
            (b, f) => b.or(f),
        };
        if let Some(off) = nearest.filter(|o| o.abs() <= half_window_s) {
            offsets.push(off);
        }
    }
    let matched_fraction = if anchors.is_empty() {
        0.0
    } else {
        offsets.len() as f64 / anchors.len() as f64
    };
    let anticipation_fraction = if offsets.is_empty() {
        0.0
    } else {
        offsets.iter().filter(|&&o| o < 0.0).count() as f64 / offsets.len() as f64
    };
    Ok(OffsetProfile {
        median_offset_s: median(&offsets),
        offsets_s: offsets,
        anticipation_fraction,
        matched_fraction,
        half_window_s,
    })
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    })
}

/// A candidate music structure to be matched against one video.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub id: String,
    pub downbeats: BoundaryList,
    pub segments: BoundaryList,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCandidate {
    pub id: String,
    pub combined_score: f64,
    pub segment_score: f64,
    pub downbeat_score: f64,
}

/// Ranks candidates by `0.5 * S(segments) + 0.5 * S(downbeats)`, best first,
/// ties by id. Anchors past the end of the curve are dropped.
pub fn rank_candidates(
    curve: &LikelihoodCurve,
    candidates: &[Candidate],
    window: ScoreWindow,
) -> Result<Vec<RankedCandidate>, MetricsError> {
    if candidates.is_empty() {
        return Err(MetricsError::NoCandidates);
    }
    let limit = curve.duration_s();
    let mut ranked = Vec::with_capacity(candidates.len());
    for c in candidates {
        let score_of = |list: &BoundaryList| {
            let kept = list.truncated(limit);
            if kept.len() < list.len() {
                warn!(
                    "candidate {}: dropped {} {} anchor(s) past {limit} s",
                    c.id,
                    list.len() - kept.len(),
                    list.kind
                );
            }
            cooccurrence_score(curve, &kept, window).map(|r| r.mean_score)
        };
        let segment_score = score_of(&c.segments)?;
        let downbeat_score = score_of(&c.downbeats)?;
        ranked.push(RankedCandidate {
            id: c.id.clone(),
            combined_score: 0.5 * segment_score + 0.5 * downbeat_score,
            segment_score,
            downbeat_score,
        });
    }
    ranked.sort_by(|a, b| match b.combined_score.total_cmp(&a.combined_score) {
        Ordering::Equal => a.id.cmp(&b.id),
        other => other,
    });
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(len: usize, spikes: &[(usize, f64)]) -> LikelihoodCurve {
        let mut c = LikelihoodCurve::zeros(25.0, len);
        for &(i, v) in spikes {
            c.values[i] = v;
        }
        c
    }

    fn anchors(kind: BoundaryKind, t: &[f64]) -> BoundaryList {
        BoundaryList::new(kind, t.to_vec()).unwrap()
    }

    #[test]
    fn zero_curve_scores_zero() {
        let r = cooccurrence_score(
            &curve(100, &[]),
            &anchors(BoundaryKind::Downbeat, &[0.4, 2.0]),
            ScoreWindow::default(),
        )
        .unwrap();
        assert_eq!(r.per_anchor_scores, vec![0.0, 0.0]);
        assert_eq!(r.mean_score, 0.0);
    }

    #[test]
    fn impulse_on_and_near_anchor() {
        let a = anchors(BoundaryKind::Segment, &[2.0]);
        let on = cooccurrence_score(&curve(100, &[(50, 1.0)]), &a, ScoreWindow::default()).unwrap();
        assert_eq!(on.per_anchor_scores, vec![1.0]);
        let near = cooccurrence_score(&curve(100, &[(52, 1.0)]), &a, ScoreWindow::default()).unwrap();
        assert!((near.per_anchor_scores[0] - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn empty_anchor_list_is_flagged() {
        let r = cooccurrence_score(
            &curve(10, &[]),
            &BoundaryList::empty(BoundaryKind::Segment),
            ScoreWindow::default(),
        )
        .unwrap();
        assert_eq!(r.anchor_count, 0);
        assert!(!r.is_defined());
        assert_eq!(r.mean(), None);
    }

    #[test]
    fn anchor_outside_curve() {
        let err = cooccurrence_score(
            &curve(25, &[]),
            &anchors(BoundaryKind::Downbeat, &[1.5]),
            ScoreWindow::default(),
        )
        .unwrap_err();
        assert!(matches!(err, MetricsError::AnchorOutsideCurve { .. }));
        // Exactly at the end is allowed.
        assert!(cooccurrence_score(
            &curve(25, &[(24, 1.0)]),
            &anchors(BoundaryKind::Downbeat, &[1.0]),
            ScoreWindow::default()
        )
        .is_ok());
    }

    #[test]
    fn dense_window_is_clamped() {
        let c = curve(20, &[(9, 1.0), (10, 1.0), (11, 1.0)]);
        let r = cooccurrence_score(&c, &anchors(BoundaryKind::Downbeat, &[0.4]), ScoreWindow::default())
            .unwrap();
        assert_eq!(r.per_anchor_scores, vec![1.0]);
        assert_eq!(r.clamped_count, 1);
    }

    #[test]
    fn bad_window_rejected() {
        let err = cooccurrence_score(
            &curve(10, &[]),
            &BoundaryList::empty(BoundaryKind::Segment),
            ScoreWindow::with_sigma(0.0),
        );
        assert!(matches!(err, Err(MetricsError::InvalidWindow { .. })));
    }

    #[test]
    fn offsets_on_the_beat() {
        let db = anchors(BoundaryKind::Downbeat, &[2.0, 4.0, 6.0]);
        let shots = anchors(BoundaryKind::Shot, &[2.0, 4.0, 6.0]);
        let p = offset_profile(&db, &shots, 1.0).unwrap();
        assert_eq!(p.offsets_s, vec![0.0; 3]);
        assert_eq!(p.median_offset_s, Some(0.0));
        assert_eq!(p.anticipation_fraction, 0.0);
        assert_eq!(p.matched_fraction, 1.0);
    }

    #[test]
    fn offsets_anticipated() {
        let db = anchors(BoundaryKind::Downbeat, &[2.0, 4.0, 6.0, 8.0]);
        let shots = anchors(BoundaryKind::Shot, &[1.88, 3.88, 5.88, 7.88]);
        let p = offset_profile(&db, &shots, 1.0).unwrap();
        assert!((p.median_offset_s.unwrap() + 0.12).abs() < 1e-9);
        assert_eq!(p.anticipation_fraction, 1.0);
    }

    #[test]
    fn offsets_without_shots() {
        let db = anchors(BoundaryKind::Downbeat, &[2.0, 4.0]);
        let p = offset_profile(&db, &BoundaryList::empty(BoundaryKind::Shot), 1.0).unwrap();
        assert!(p.offsets_s.is_empty());
        assert_eq!(p.median_offset_s, None);
        assert_eq!(p.matched_fraction, 0.0);
    }

    #[test]
    fn offsets_window_and_ties() {
        let db = anchors(BoundaryKind::Downbeat, &[2.0, 10.0]);
        let shots = anchors(BoundaryKind::Shot, &[1.8, 2.2, 11.0]);
        let p = offset_profile(&db, &shots, 0.5).unwrap();
        assert_eq!(p.offsets_s.len(), 1);
        assert!((p.offsets_s[0] + 0.2).abs() < 1e-12);
        assert_eq!(p.matched_fraction, 0.5);
        assert!(offset_profile(&db, &shots, 0.0).is_err());
    }

    #[test]
    fn even_median_averages() {
        assert_eq!(median(&[3.0, -1.0, 1.0, 0.0]), Some(0.5));
    }

    #[test]
    fn ranking_prefers_aligned_candidates() {
        let c = curve(250, &[(50, 1.0), (100, 1.0), (150, 1.0)]);
        let aligned = Candidate {
            id: "z".into(),
            downbeats: anchors(BoundaryKind::Downbeat, &[2.0, 4.0, 6.0]),
            segments: anchors(BoundaryKind::Segment, &[4.0]),
        };
        let off = Candidate {
            id: "a".into(),
            downbeats: anchors(BoundaryKind::Downbeat, &[1.0, 3.0, 5.0]),
            segments: anchors(BoundaryKind::Segment, &[5.0]),
        };
        let ranked = rank_candidates(&c, &[off, aligned], ScoreWindow::default()).unwrap();
        assert_eq!(ranked[0].id, "z");
        assert!(ranked[0].combined_score >= ranked[1].combined_score);
        assert_eq!(ranked[0].combined_score, 1.0);
    }

    #[test]
    fn ranking_ties_break_by_id_and_drops_late_anchors() {
        let c = curve(100, &[(25, 1.0)]);
        let make = |id: &str| Candidate {
            id: id.into(),
            downbeats: anchors(BoundaryKind::Downbeat, &[1.0, 9.0]),
            segments: BoundaryList::empty(BoundaryKind::Segment),
        };
        let ranked = rank_candidates(&c, &[make("b"), make("a")], ScoreWindow::default()).unwrap();
        assert_eq!(ranked.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(ranked[0].downbeat_score, 1.0);
        assert_eq!(rank_candidates(&c, &[], ScoreWindow::default()), Err(MetricsError::NoCandidates));
    }
}
