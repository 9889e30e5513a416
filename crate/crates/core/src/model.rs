//! Domain types for one music video's structural description.
//!
//! Music side: a tempo/meter grid plus downbeat and segment boundary lists.
//! Video side: the per-frame shot-boundary likelihood curve. Values here are
//! plain data; [`validate_bundle`] reports every invariant violation instead
//! of failing on the first one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Default sampling rate of shot-boundary likelihood curves.
pub const DEFAULT_FRAME_RATE_HZ: f64 = 25.0;

/// Number of bars in one pattern.
pub const BARS_PER_PATTERN: f64 = 4.0;

/// Tempo and meter of a clip, with the durations derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BeatGrid {
    bpm: f64,
    meter: u8,
    delta_beat: f64,
    delta_bar: f64,
    delta_pattern: f64,
}

impl BeatGrid {
    /// Builds a grid from beats-per-minute and beats-per-bar (3 or 4).
    pub fn new(bpm: f64, meter: u8) -> Result<Self, ModelError> {
        if !bpm.is_finite() || bpm <= 0.0 {
            return Err(ModelError::InvalidBpm(bpm));
        }
        if meter != 3 && meter != 4 {
            return Err(ModelError::UnsupportedMeter(i64::from(meter)));
        }
        let delta_beat = 60.0 / bpm;
        let delta_bar = f64::from(meter) * delta_beat;
        Ok(Self {
            bpm,
            meter,
            delta_beat,
            delta_bar,
            delta_pattern: BARS_PER_PATTERN * delta_bar,
        })
    }

    pub fn bpm(&self) -> f64 {
        self.bpm
    }

    pub fn meter(&self) -> u8 {
        self.meter
    }

    /// Beat duration in seconds.
    pub fn delta_beat(&self) -> f64 {
        self.delta_beat
    }

    /// Bar duration in seconds.
    pub fn delta_bar(&self) -> f64 {
        self.delta_bar
    }

    /// Four-bar pattern duration in seconds.
    pub fn delta_pattern(&self) -> f64 {
        self.delta_pattern
    }
}

/// What a [`BoundaryList`] marks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Downbeat,
    Segment,
    Shot,
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryKind::Downbeat => "downbeat",
            BoundaryKind::Segment => "segment",
            BoundaryKind::Shot => "shot",
        })
    }
}

/// Ordered event times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryList {
    pub kind: BoundaryKind,
    pub times_s: Vec<f64>,
}

impl BoundaryList {
    /// Builds a list and checks ordering and sign. Duplicates are rejected.
    pub fn new(kind: BoundaryKind, times_s: Vec<f64>) -> Result<Self, ModelError> {
        let list = Self { kind, times_s };
        let mut violations = Vec::new();
        list.check_into(None, "times_s", &mut violations);
        match violations.into_iter().next() {
            Some(v) => Err(ModelError::Invalid(v)),
            None => Ok(list),
        }
    }

    pub fn empty(kind: BoundaryKind) -> Self {
        Self {
            kind,
            times_s: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.times_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_s.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.times_s.iter().copied()
    }

    /// Keeps only the times within `[0, limit_s]`.
    pub fn truncated(&self, limit_s: f64) -> Self {
        Self {
            kind: self.kind,
            times_s: self
                .times_s
                .iter()
                .copied()
                .filter(|&t| t <= limit_s)
                .collect(),
        }
    }

    fn check_into(&self, duration_s: Option<f64>, field: &str, out: &mut Vec<Violation>) {
        check_times(&self.times_s, duration_s, field, out);
    }
}

fn check_times(times: &[f64], duration_s: Option<f64>, field: &str, out: &mut Vec<Violation>) {
    for (i, &t) in times.iter().enumerate() {
        if !t.is_finite() {
            out.push(Violation::new(
                ViolationCode::NonFiniteValue,
                format!("{field}[{i}]"),
                format!("time {t} is not finite"),
            ));
            continue;
        }
        if t < 0.0 || duration_s.is_some_and(|d| t > d) {
            out.push(Violation::new(
                ViolationCode::BoundaryOutOfRange,
                format!("{field}[{i}]"),
                match duration_s {
                    Some(d) => format!("time {t} outside [0, {d}]"),
                    None => format!("time {t} is negative"),
                },
            ));
        }
    }
    for (i, pair) in times.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            out.push(Violation::new(
                ViolationCode::NonMonotonicBoundaries,
                format!("{field}[{}]", i + 1),
                format!("time {} does not follow {}", pair[1], pair[0]),
            ));
        }
    }
}

/// Uniformly sampled shot-boundary probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LikelihoodCurve {
    pub frame_rate_hz: f64,
    pub values: Vec<f64>,
}

impl LikelihoodCurve {
    pub fn new(frame_rate_hz: f64, values: Vec<f64>) -> Result<Self, ModelError> {
        let curve = Self {
            frame_rate_hz,
            values,
        };
        match curve.violations().into_iter().next() {
            Some(v) => Err(ModelError::Invalid(v)),
            None => Ok(curve),
        }
    }

    pub fn zeros(frame_rate_hz: f64, len: usize) -> Self {
        Self {
            frame_rate_hz,
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frame_period_s(&self) -> f64 {
        1.0 / self.frame_rate_hz
    }

    pub fn duration_s(&self) -> f64 {
        self.values.len() as f64 / self.frame_rate_hz
    }

    /// Nearest frame index for a time in seconds (may equal `len()`).
    pub fn frame_of(&self, t_s: f64) -> i64 {
        (t_s * self.frame_rate_hz).round() as i64
    }

    pub fn time_of(&self, frame: usize) -> f64 {
        frame as f64 / self.frame_rate_hz
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if !self.frame_rate_hz.is_finite() || self.frame_rate_hz <= 0.0 {
            out.push(Violation::new(
                ViolationCode::InvalidFrameRate,
                "video.frame_rate_hz",
                format!("frame rate {} must be positive", self.frame_rate_hz),
            ));
        }
        for (i, &v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                out.push(Violation::new(
                    ViolationCode::NonFiniteValue,
                    format!("video.shot_likelihood[{i}]"),
                    format!("value {v} is not finite"),
                ));
            } else if !(0.0..=1.0).contains(&v) {
                out.push(Violation::new(
                    ViolationCode::LikelihoodOutOfUnitInterval,
                    format!("video.shot_likelihood[{i}]"),
                    format!("value {v} outside [0, 1]"),
                ));
            }
        }
        out
    }
}

/// Visual style of a music video.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VideoGenre {
    Performance,
    Concept,
    Narrative,
    Dance,
    Other,
}

impl VideoGenre {
    pub const ALL: [VideoGenre; 5] = [
        VideoGenre::Performance,
        VideoGenre::Concept,
        VideoGenre::Narrative,
        VideoGenre::Dance,
        VideoGenre::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            VideoGenre::Performance => "performance",
            VideoGenre::Concept => "concept",
            VideoGenre::Narrative => "narrative",
            VideoGenre::Dance => "dance",
            VideoGenre::Other => "other",
        }
    }
}

impl fmt::Display for VideoGenre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VideoGenre {
    type Err = ModelError;

    /// Case-insensitive. Also accepts the long taxonomy labels
    /// ("concept/abstract", "narration").
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "performance" => Ok(VideoGenre::Performance),
            "concept" | "concept/abstract" | "abstract" => Ok(VideoGenre::Concept),
            "narrative" | "narration" => Ok(VideoGenre::Narrative),
            "dance" => Ok(VideoGenre::Dance),
            "other" => Ok(VideoGenre::Other),
            _ => Err(ModelError::UnknownVideoGenre(s.to_string())),
        }
    }
}

/// Music genre (free text, verbatim from metadata) and video genre.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenreLabel {
    pub music_genre: String,
    pub video_genre: VideoGenre,
}

/// One music video's full structural description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClipBundle {
    pub clip_id: String,
    pub duration_s: f64,
    pub grid: BeatGrid,
    pub downbeats: BoundaryList,
    pub segments: BoundaryList,
    /// Beat positions, when the producer supplied them. Not used by any metric.
    pub beats_s: Option<Vec<f64>>,
    pub curve: LikelihoodCurve,
    /// Attached from the dataset manifest; bundle files may also carry them.
    pub genres: Option<GenreLabel>,
}

/// Machine-readable violation code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCode {
    InvalidDuration,
    InvalidBpm,
    UnsupportedMeter,
    BoundaryOutOfRange,
    NonMonotonicBoundaries,
    NonFiniteValue,
    WrongBoundaryKind,
    InvalidFrameRate,
    LikelihoodOutOfUnitInterval,
    CurveDurationMismatch,
}

impl ViolationCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationCode::InvalidDuration => "invalid-duration",
            ViolationCode::InvalidBpm => "invalid-bpm",
            ViolationCode::UnsupportedMeter => "unsupported-meter",
            ViolationCode::BoundaryOutOfRange => "boundary-out-of-range",
            ViolationCode::NonMonotonicBoundaries => "non-monotonic-boundaries",
            ViolationCode::NonFiniteValue => "non-finite-value",
            ViolationCode::WrongBoundaryKind => "wrong-boundary-kind",
            ViolationCode::InvalidFrameRate => "invalid-frame-rate",
            ViolationCode::LikelihoodOutOfUnitInterval => "likelihood-out-of-unit-interval",
            ViolationCode::CurveDurationMismatch => "curve-duration-mismatch",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ViolationCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// A single broken invariant, located by field path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(code: ViolationCode, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code,
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.field, self.message)
    }
}

/// Every violation found in a bundle; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn codes(&self) -> Vec<ViolationCode> {
        self.violations.iter().map(|v| v.code).collect()
    }
}

/// Checks every bundle invariant. Never fails and never mutates.
pub fn validate_bundle(bundle: &ClipBundle) -> ValidationReport {
    let mut out = Vec::new();
    let duration_ok = bundle.duration_s.is_finite() && bundle.duration_s > 0.0;
    if !duration_ok {
        out.push(Violation::new(
            ViolationCode::InvalidDuration,
            "duration_s",
            format!("duration {} must be positive and finite", bundle.duration_s),
        ));
    }
    let limit = duration_ok.then_some(bundle.duration_s);

    for (list, expected, field) in [
        (&bundle.downbeats, BoundaryKind::Downbeat, "music.downbeats_s"),
        (&bundle.segments, BoundaryKind::Segment, "music.segment_boundaries_s"),
    ] {
        if list.kind != expected {
            out.push(Violation::new(
                ViolationCode::WrongBoundaryKind,
                field,
                format!("expected {expected} boundaries, found {}", list.kind),
            ));
        }
        list.check_into(limit, field, &mut out);
    }
    if let Some(beats) = &bundle.beats_s {
        check_times(beats, limit, "music.beats_s", &mut out);
    }

    let curve_violations = bundle.curve.violations();
    let rate_ok = !curve_violations
        .iter()
        .any(|v| v.code == ViolationCode::InvalidFrameRate);
    out.extend(curve_violations);
    if rate_ok && duration_ok {
        let period = bundle.curve.frame_period_s();
        let gap = (bundle.curve.duration_s() - bundle.duration_s).abs();
        if gap > period * (1.0 + 1e-9) {
            out.push(Violation::new(
                ViolationCode::CurveDurationMismatch,
                "video.shot_likelihood",
                format!(
                    "curve covers {:.4} s but clip lasts {:.4} s",
                    bundle.curve.duration_s(),
                    bundle.duration_s
                ),
            ));
        }
    }

    ValidationReport { violations: out }
}
