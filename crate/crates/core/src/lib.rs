//! Measures how music structure and video editing line up in music videos.
//!
//! A clip is described by its tempo grid, estimated downbeats and functional
//! segment boundaries, and a 25 Hz shot-boundary likelihood curve. From that
//! the crate derives:
//!
//! - shot boundaries and the modal shot duration, and whether that duration
//!   agrees with the beat, bar or four-bar pattern ([`duration`]);
//! - a Gaussian-windowed co-occurrence score of cuts around each downbeat or
//!   segment boundary, and the signed cut/downbeat offsets ([`cooccurrence`]);
//! - per-genre tables with 95% confidence intervals ([`report`]) and SVG
//!   timelines ([`figure`]).
//!
//! ```
//! use mvsync::synth::{synth_clip, CutPolicy, SynthSpec};
//! use mvsync::{analyze_clip, AnalysisConfig};
//!
//! let clip = synth_clip(&SynthSpec::new(120.0, 4, 60.0, CutPolicy::OnBar)).unwrap();
//! let report = analyze_clip(&clip, &AnalysisConfig::default()).unwrap();
//! assert_eq!(report.shots.modal_duration_s, 2.0);
//! assert!(report.agreement.bar_level);
//! ```

pub mod analysis;
pub mod cooccurrence;
pub mod duration;
pub mod error;
pub mod figure;
pub mod ingest;
pub mod model;
pub mod report;
pub mod synth;

pub use analysis::{analyze_clip, AnalysisConfig, ClipReport, DatasetSummary, HalfWindow};
pub use cooccurrence::{
    cooccurrence_score, offset_profile, rank_candidates, Candidate, CooccurrenceResult,
    OffsetProfile, RankedCandidate, ScoreWindow,
};
pub use duration::{
    classify_duration_agreement, modal_shot_duration, shot_boundaries, shot_durations,
    DurationAgreement, ShotDurationProfile,
};
pub use error::{IngestError, ManifestError, MetricsError, ModelError, ReportError, SynthError};
pub use ingest::{load_dataset, parse_clip_bundle, parse_manifest, serialize_clip_bundle, Manifest};
pub use model::{
    validate_bundle, BeatGrid, BoundaryKind, BoundaryList, ClipBundle, GenreLabel,
    LikelihoodCurve, ValidationReport, VideoGenre, Violation, ViolationCode,
};
pub use report::{ci95, emit_table, GenreTable, Grouping, TableFormat};
