//! On-disk interchange formats: per-clip bundle documents (JSON) and the
//! dataset manifest (CSV).

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{IngestError, ManifestError};
use crate::model::{
    validate_bundle, BeatGrid, BoundaryKind, BoundaryList, ClipBundle, GenreLabel,
    LikelihoodCurve, VideoGenre, Violation, ViolationCode, DEFAULT_FRAME_RATE_HZ,
};

const TOP_LEVEL_FIELDS: &[&str] = &["clip_id", "duration_s", "music", "video", "genres"];
const MUSIC_FIELDS: &[&str] = &[
    "bpm",
    "meter",
    "downbeats_s",
    "segment_boundaries_s",
    "beats_s",
];
const VIDEO_FIELDS: &[&str] = &["frame_rate_hz", "shot_likelihood"];

/// Exact manifest header.
pub const MANIFEST_HEADER: [&str; 4] = ["clip_id", "bundle_path", "music_genre", "video_genre"];

#[derive(Debug, Deserialize, Serialize)]
struct RawBundle {
    clip_id: String,
    duration_s: f64,
    music: RawMusic,
    video: RawVideo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    genres: Option<GenreLabel>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawMusic {
    bpm: f64,
    meter: i64,
    downbeats_s: Vec<f64>,
    segment_boundaries_s: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beats_s: Option<Vec<f64>>,
}

fn default_frame_rate() -> f64 {
    DEFAULT_FRAME_RATE_HZ
}

#[derive(Debug, Deserialize, Serialize)]
struct RawVideo {
    #[serde(default = "default_frame_rate")]
    frame_rate_hz: f64,
    shot_likelihood: Vec<f64>,
}

/// Parses and validates one clip bundle document.
///
/// Syntax errors carry the line, column and field path; invariant violations
/// come back as [`IngestError::Semantic`] with every violation found.
/// Unknown fields are logged and ignored.
pub fn parse_clip_bundle(bytes: &[u8]) -> Result<ClipBundle, IngestError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let raw: RawBundle = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        IngestError::Syntax {
            line: inner.line(),
            column: inner.column(),
            path,
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| IngestError::Syntax {
        line: e.line(),
        column: e.column(),
        path: ".".into(),
        message: e.to_string(),
    })?;

    // The document already parsed once, so this cannot fail.
    if let Ok(value) = serde_json::from_slice::<serde_json::Value>(bytes) {
        warn_unknown_fields(&raw.clip_id, &value);
    }

    let mut violations = Vec::new();
    let meter = u8::try_from(raw.music.meter).unwrap_or(0);
    let grid = match BeatGrid::new(raw.music.bpm, meter) {
        Ok(g) => g,
        Err(_) => {
            if !raw.music.bpm.is_finite() || raw.music.bpm <= 0.0 {
                violations.push(Violation::new(
                    ViolationCode::InvalidBpm,
                    "music.bpm",
                    format!("bpm {} must be positive", raw.music.bpm),
                ));
            }
            if meter != 3 && meter != 4 {
                violations.push(Violation::new(
                    ViolationCode::UnsupportedMeter,
                    "music.meter",
                    format!("meter {} is not 3 or 4", raw.music.meter),
                ));
            }
            // Placeholder so the remaining fields still get checked.
            BeatGrid::new(120.0, 4).expect("constant grid")
        }
    };

    let bundle = ClipBundle {
        clip_id: raw.clip_id,
        duration_s: raw.duration_s,
        grid,
        downbeats: BoundaryList {
            kind: BoundaryKind::Downbeat,
            times_s: raw.music.downbeats_s,
        },
        segments: BoundaryList {
            kind: BoundaryKind::Segment,
            times_s: raw.music.segment_boundaries_s,
        },
        beats_s: raw.music.beats_s,
        curve: LikelihoodCurve {
            frame_rate_hz: raw.video.frame_rate_hz,
            values: raw.video.shot_likelihood,
        },
        genres: raw.genres,
    };
    violations.extend(validate_bundle(&bundle).violations);
    if violations.is_empty() {
        Ok(bundle)
    } else {
        Err(IngestError::Semantic(violations))
    }
}

fn warn_unknown_fields(clip_id: &str, value: &serde_json::Value) {
    let check = |obj: Option<&serde_json::Map<String, serde_json::Value>>,
                 prefix: &str,
                 known: &[&str]| {
        for key in obj.into_iter().flat_map(|o| o.keys()) {
            if !known.contains(&key.as_str()) {
                warn!("clip {clip_id}: ignoring unknown field `{prefix}{key}`");
            }
        }
    };
    check(value.as_object(), "", TOP_LEVEL_FIELDS);
    check(value.get("music").and_then(|m| m.as_object()), "music.", MUSIC_FIELDS);
    check(value.get("video").and_then(|m| m.as_object()), "video.", VIDEO_FIELDS);
}

/// Writes a bundle in the interchange format.
pub fn serialize_clip_bundle(bundle: &ClipBundle) -> String {
    let raw = RawBundle {
        clip_id: bundle.clip_id.clone(),
        duration_s: bundle.duration_s,
        music: RawMusic {
            bpm: bundle.grid.bpm(),
            meter: i64::from(bundle.grid.meter()),
            downbeats_s: bundle.downbeats.times_s.clone(),
            segment_boundaries_s: bundle.segments.times_s.clone(),
            beats_s: bundle.beats_s.clone(),
        },
        video: RawVideo {
            frame_rate_hz: bundle.curve.frame_rate_hz,
            shot_likelihood: bundle.curve.values.clone(),
        },
        genres: bundle.genres.clone(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("bundle serializes");
    out.push('\n');
    out
}

/// Reads and parses a bundle file.
pub fn read_clip_bundle(path: &Path) -> Result<ClipBundle, IngestError> {
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_clip_bundle(&bytes)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestRow {
    pub clip_id: String,
    pub bundle_path: String,
    pub music_genre: String,
    pub video_genre: VideoGenre,
}

impl ManifestRow {
    pub fn genres(&self) -> GenreLabel {
        GenreLabel {
            music_genre: self.music_genre.clone(),
            video_genre: self.video_genre,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub rows: Vec<ManifestRow>,
}

impl Manifest {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Parses a manifest CSV. Header must be exactly
/// `clip_id,bundle_path,music_genre,video_genre`; LF and CRLF both work.
pub fn parse_manifest(bytes: &[u8]) -> Result<Manifest, ManifestError> {
    let bytes = bytes.strip_prefix(b"\xef\xbb\xbf").unwrap_or(bytes);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(bytes);
    let mut records = reader.records();

    let header = match records.next() {
        Some(h) => h?,
        None => return Err(ManifestError::BadHeader(String::new())),
    };
    let header_fields: Vec<&str> = header.iter().collect();
    if header_fields != MANIFEST_HEADER {
        if header_fields.len() < MANIFEST_HEADER.len()
            && MANIFEST_HEADER.starts_with(&header_fields)
        {
            return Err(ManifestError::MissingColumn {
                line: 1,
                column: MANIFEST_HEADER[header_fields.len()],
            });
        }
        return Err(ManifestError::BadHeader(header_fields.join(",")));
    }

    let mut seen = HashSet::new();
    let mut rows = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() < MANIFEST_HEADER.len() {
            return Err(ManifestError::MissingColumn {
                line,
                column: MANIFEST_HEADER[record.len()],
            });
        }
        if record.len() > MANIFEST_HEADER.len() {
            warn!("manifest line {line}: ignoring {} extra field(s)", record.len() - 4);
        }
        let clip_id = record[0].trim().to_string();
        if clip_id.is_empty() {
            return Err(ManifestError::EmptyClipId { line });
        }
        let video_genre =
            record[3]
                .parse::<VideoGenre>()
                .map_err(|_| ManifestError::UnknownVideoGenre {
                    line,
                    genre: record[3].to_string(),
                })?;
        if !seen.insert(clip_id.clone()) {
            return Err(ManifestError::DuplicateClipId { line, clip_id });
        }
        rows.push(ManifestRow {
            clip_id,
            bundle_path: record[1].trim().to_string(),
            music_genre: record[2].trim().to_string(),
            video_genre,
        });
    }
    Ok(Manifest { rows })
}

pub fn read_manifest(path: &Path) -> Result<Manifest, ManifestError> {
    let bytes = std::fs::read(path).map_err(|source| ManifestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_manifest(&bytes)
}

/// A successfully loaded clip together with its manifest row.
#[derive(Debug, Clone)]
pub struct LoadedClip {
    pub row: ManifestRow,
    pub bundle: ClipBundle,
}

#[derive(Debug)]
pub struct ClipFailure {
    pub clip_id: String,
    pub path: PathBuf,
    pub error: IngestError,
}

/// Result of loading a manifest: good clips and per-clip failures, both in
/// manifest order.
#[derive(Debug, Default)]
pub struct LoadedDataset {
    pub clips: Vec<LoadedClip>,
    pub failures: Vec<ClipFailure>,
}

/// Loads every bundle named in the manifest. Relative paths resolve against
/// `base_dir`. Runs on the current rayon pool; output order follows the
/// manifest regardless of completion order. Genres from the manifest replace
/// any genres stored in the bundle.
pub fn load_dataset(manifest: &Manifest, base_dir: &Path) -> LoadedDataset {
    let results: Vec<_> = manifest
        .rows
        .par_iter()
        .map(|row| {
            let path = resolve(base_dir, &row.bundle_path);
            let loaded = read_clip_bundle(&path).map(|mut bundle| {
                if bundle.clip_id != row.clip_id {
                    warn!(
                        "bundle {} declares clip id {:?}; using manifest id {:?}",
                        path.display(),
                        bundle.clip_id,
                        row.clip_id
                    );
                    bundle.clip_id = row.clip_id.clone();
                }
                bundle.genres = Some(row.genres());
                bundle
            });
            (row, path, loaded)
        })
        .collect();

    let mut out = LoadedDataset::default();
    for (row, path, loaded) in results {
        match loaded {
            Ok(bundle) => out.clips.push(LoadedClip {
                row: row.clone(),
                bundle,
            }),
            Err(error) => out.failures.push(ClipFailure {
                clip_id: row.clip_id.clone(),
                path,
                error,
            }),
        }
    }
    out
}

fn resolve(base_dir: &Path, bundle_path: &str) -> PathBuf {
    let p = Path::new(bundle_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(meter: i64, downbeats: &str) -> String {
        format!(
            r#"{{
  "clip_id": "c1",
  "duration_s": 10.0,
  "music": {{"bpm": 120, "meter": {meter}, "downbeats_s": {downbeats}, "segment_boundaries_s": []}},
  "video": {{"frame_rate_hz": 25, "shot_likelihood": [{}]}}
}}"#,
            vec!["0"; 250].join(",")
        )
    }

    #[test]
    fn minimal_document() {
        let b = parse_clip_bundle(doc(4, "[]").as_bytes()).unwrap();
        assert_eq!(b.duration_s, 10.0);
        assert_eq!(b.curve.duration_s(), 10.0);
        assert_eq!(b.grid.delta_bar(), 2.0);
        assert!(b.downbeats.is_empty());
        assert!(b.genres.is_none());
    }

    #[test]
    fn meter_five_is_semantic() {
        let err = parse_clip_bundle(doc(5, "[]").as_bytes()).unwrap_err();
        assert!(err.is_semantic());
        assert_eq!(err.code(), "unsupported-meter");
    }

    #[test]
    fn non_monotonic_downbeats() {
        let err = parse_clip_bundle(doc(4, "[1.0, 0.5]").as_bytes()).unwrap_err();
        assert_eq!(err.code(), "non-monotonic-boundaries");
    }

    #[test]
    fn syntax_error_has_location() {
        let err = parse_clip_bundle(b"{\n  \"clip_id\": \"x\",\n  \"duration_s\": \"ten\"\n}").unwrap_err();
        match err {
            IngestError::Syntax { line, path, .. } => {
                assert_eq!(line, 3);
                assert_eq!(path, "duration_s");
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_clip_bundle(b"{\"clip_id\": ").unwrap_err();
        assert_eq!(err.code(), "syntax-error");
    }

    #[test]
    fn missing_field_is_syntax_error() {
        let err = parse_clip_bundle(br#"{"clip_id":"x","duration_s":1,"music":{"bpm":120,"meter":4,"downbeats_s":[]},"video":{"shot_likelihood":[]}}"#).unwrap_err();
        match err {
            IngestError::Syntax { path, message, .. } => {
                assert_eq!(path, "music");
                assert!(message.contains("segment_boundaries_s"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_ignored() {
        let text = doc(4, "[0.0]").replacen("\"clip_id\"", "\"extra\": {\"a\": 1},\n  \"clip_id\"", 1);
        assert!(parse_clip_bundle(text.as_bytes()).is_ok());
    }

    #[test]
    fn frame_rate_defaults_to_25() {
        let text = doc(4, "[]").replace("\"frame_rate_hz\": 25, ", "");
        assert_eq!(parse_clip_bundle(text.as_bytes()).unwrap().curve.frame_rate_hz, 25.0);
    }

    const HEADER: &str = "clip_id,bundle_path,music_genre,video_genre\n";

    #[test]
    fn manifest_rows() {
        let text = format!("{HEADER}a,a.json,Pop,Dance\nb,b.json,R&B,concept\r\nc,c.json,\"Dance/Electro\",NARRATIVE\n");
        let m = parse_manifest(text.as_bytes()).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.rows[1].video_genre, VideoGenre::Concept);
        assert_eq!(m.rows[2].music_genre, "Dance/Electro");
    }

    #[test]
    fn manifest_errors() {
        let lyric = format!("{HEADER}a,a.json,Pop,Lyric\n");
        assert_eq!(parse_manifest(lyric.as_bytes()).unwrap_err().code(), "unknown-video-genre");
        let dup = format!("{HEADER}a,a.json,Pop,dance\na,b.json,Pop,other\n");
        let err = parse_manifest(dup.as_bytes()).unwrap_err();
        assert_eq!(err.code(), "duplicate-clip-id");
        let short = format!("{HEADER}a,a.json,Pop\n");
        assert_eq!(parse_manifest(short.as_bytes()).unwrap_err().code(), "missing-column");
        let short_header = "clip_id,bundle_path,music_genre\n";
        assert_eq!(parse_manifest(short_header.as_bytes()).unwrap_err().code(), "missing-column");
        assert_eq!(parse_manifest(b"id,path\n").unwrap_err().code(), "bad-header");
        assert_eq!(parse_manifest(b"").unwrap_err().code(), "bad-header");
    }

    #[test]
    fn header_only_manifest_is_empty() {
        assert!(parse_manifest(HEADER.as_bytes()).unwrap().is_empty());
    }
}
