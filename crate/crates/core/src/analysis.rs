//! Per-clip pipeline and dataset-level summary statistics.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::cooccurrence::{
    cooccurrence_score, offset_profile, CooccurrenceResult, OffsetProfile, ScoreWindow,
};
use crate::duration::{
    classify_duration_agreement, shot_boundaries, shot_duration_profile, shot_durations,
    DurationAgreement, DEFAULT_TAU,
};
use crate::error::MetricsError;
use crate::model::{BoundaryList, ClipBundle, GenreLabel};
use crate::report::{aggregate_counts, aggregate_scores, GenreTable, Grouping};

/// Search half-window for the offset profile.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfWindow {
    /// Half of the clip's bar duration.
    #[default]
    HalfBar,
    Seconds(f64),
}


#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub tau: f64,
    pub window: ScoreWindow,
    pub half_window: HalfWindow,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            window: ScoreWindow::default(),
            half_window: HalfWindow::HalfBar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub bpm: f64,
    pub meter: u8,
    pub delta_beat_s: f64,
    pub delta_bar_s: f64,
    pub delta_pattern_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShotSummary {
    pub boundaries_s: Vec<f64>,
    pub durations_s: Vec<f64>,
    pub mean_duration_s: f64,
    pub modal_duration_s: f64,
    pub histogram: Vec<(f64, usize)>,
}

/// Everything measured on one clip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClipReport {
    pub clip_id: String,
    pub duration_s: f64,
    pub genres: Option<GenreLabel>,
    pub grid: GridSummary,
    pub shots: ShotSummary,
    pub agreement: DurationAgreement,
    pub segment_score: CooccurrenceResult,
    pub downbeat_score: CooccurrenceResult,
    pub offsets: OffsetProfile,
}

impl ClipReport {
    pub fn s_seg(&self) -> Option<f64> {
        self.segment_score.mean()
    }

    pub fn s_bar(&self) -> Option<f64> {
        self.downbeat_score.mean()
    }
}

/// Anchors the curve cannot score (past its end by more than half a frame).
fn scorable(bundle: &ClipBundle, list: &BoundaryList) -> BoundaryList {
    let limit = bundle.curve.duration_s() + 0.5 * bundle.curve.frame_period_s();
    let kept = list.truncated(limit);
    if kept.len() < list.len() {
        warn!(
            "clip {}: {} {} anchor(s) past the end of the curve not scored",
            bundle.clip_id,
            list.len() - kept.len(),
            list.kind
        );
    }
    kept
}

/// Runs shot extraction, duration agreement, co-occurrence scoring and
/// offset profiling on a validated clip.
pub fn analyze_clip(bundle: &ClipBundle, config: &AnalysisConfig) -> Result<ClipReport, MetricsError> {
    let shots = shot_boundaries(&bundle.curve, config.tau)?;
    let profile = shot_duration_profile(&shots, bundle.duration_s, bundle.curve.frame_rate_hz)?;
    let agreement = classify_duration_agreement(profile.modal_duration_s, &bundle.grid);
    let segment_score =
        cooccurrence_score(&bundle.curve, &scorable(bundle, &bundle.segments), config.window)?;
    let downbeat_score =
        cooccurrence_score(&bundle.curve, &scorable(bundle, &bundle.downbeats), config.window)?;
    let half_window_s = match config.half_window {
        HalfWindow::HalfBar => 0.5 * bundle.grid.delta_bar(),
        HalfWindow::Seconds(s) => s,
    };
    let offsets = offset_profile(&bundle.downbeats, &shots, half_window_s)?;

    Ok(ClipReport {
        clip_id: bundle.clip_id.clone(),
        duration_s: bundle.duration_s,
        genres: bundle.genres.clone(),
        grid: GridSummary {
            bpm: bundle.grid.bpm(),
            meter: bundle.grid.meter(),
            delta_beat_s: bundle.grid.delta_beat(),
            delta_bar_s: bundle.grid.delta_bar(),
            delta_pattern_s: bundle.grid.delta_pattern(),
        },
        shots: ShotSummary {
            mean_duration_s: profile.mean_duration_s(),
            boundaries_s: shots.times_s,
            durations_s: profile.durations_s,
            modal_duration_s: profile.modal_duration_s,
            histogram: profile.histogram,
        },
        agreement,
        segment_score,
        downbeat_score,
        offsets,
    })
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementCounts {
    pub beat_level: usize,
    pub bar_level: usize,
    pub pattern_level: usize,
}

/// Dataset-wide averages. Shot durations are reported pooled over all shots
/// and as the mean of per-clip means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub n_clips: usize,
    pub mean_segment_duration_s: Option<f64>,
    pub mean_bar_duration_s: Option<f64>,
    pub mean_shot_duration_pooled_s: Option<f64>,
    pub mean_shot_duration_per_clip_s: Option<f64>,
    pub agreement_counts: AgreementCounts,
    pub mean_s_seg: Option<f64>,
    pub mean_s_bar: Option<f64>,
}

pub fn summarize_dataset(bundles: &[&ClipBundle], reports: &[&ClipReport]) -> DatasetSummary {
    let segment_durations = bundles
        .iter()
        .flat_map(|b| shot_durations(&b.segments, b.duration_s));
    DatasetSummary {
        n_clips: reports.len(),
        mean_segment_duration_s: mean(segment_durations),
        mean_bar_duration_s: mean(bundles.iter().map(|b| b.grid.delta_bar())),
        mean_shot_duration_pooled_s: mean(
            reports.iter().flat_map(|r| r.shots.durations_s.iter().copied()),
        ),
        mean_shot_duration_per_clip_s: mean(reports.iter().map(|r| r.shots.mean_duration_s)),
        agreement_counts: AgreementCounts {
            beat_level: reports.iter().filter(|r| r.agreement.beat_level).count(),
            bar_level: reports.iter().filter(|r| r.agreement.bar_level).count(),
            pattern_level: reports.iter().filter(|r| r.agreement.pattern_level).count(),
        },
        mean_s_seg: mean(reports.iter().filter_map(|r| r.s_seg())),
        mean_s_bar: mean(reports.iter().filter_map(|r| r.s_bar())),
    }
}

/// The four genre tables: agreement counts and scores, by music and by video genre.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenreTables {
    pub counts_by_music: GenreTable,
    pub counts_by_video: GenreTable,
    pub scores_by_music: GenreTable,
    pub scores_by_video: GenreTable,
}

impl GenreTables {
    /// `(file stem, table)` pairs in a fixed order.
    pub fn named(&self) -> [(&'static str, &GenreTable); 4] {
        [
            ("counts_by_music_genre", &self.counts_by_music),
            ("counts_by_video_genre", &self.counts_by_video),
            ("scores_by_music_genre", &self.scores_by_music),
            ("scores_by_video_genre", &self.scores_by_video),
        ]
    }
}

/// Builds the genre tables from reports that carry genres; others are skipped.
pub fn genre_tables(reports: &[&ClipReport], min_count: usize) -> GenreTables {
    let labelled: Vec<(&GenreLabel, &ClipReport)> = reports
        .iter()
        .filter_map(|r| r.genres.as_ref().map(|g| (g, *r)))
        .collect();
    let counts = |grouping| {
        aggregate_counts(
            labelled.iter().map(|(g, r)| (*g, r.agreement)),
            grouping,
            min_count,
        )
    };
    let scores = |grouping| {
        aggregate_scores(
            labelled
                .iter()
                .map(|(g, r)| (*g, &r.segment_score, &r.downbeat_score)),
            grouping,
            min_count,
        )
    };
    GenreTables {
        counts_by_music: counts(Grouping::MusicGenre),
        counts_by_video: counts(Grouping::VideoGenre),
        scores_by_music: scores(Grouping::MusicGenre),
        scores_by_video: scores(Grouping::VideoGenre),
    }
}
