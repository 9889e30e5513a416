use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use mvsync::analysis::{genre_tables, summarize_dataset, ClipReport, DatasetSummary};
use mvsync::figure::emit_timeline_figure;
use mvsync::ingest::{load_dataset, read_clip_bundle, read_manifest};
use mvsync::synth::{synth_clip, CutPolicy, PeakShape, SynthSpec};
use mvsync::{analyze_clip, emit_table, GenreLabel, IngestError, TableFormat};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::SynthArgs;

#[derive(Debug)]
pub struct CliError {
    pub exit_code: u8,
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn input(code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            exit_code: 1,
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn validation(code: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            exit_code: 2,
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn report(&self) {
        eprintln!(
            "{}",
            serde_json::json!({ "error": self.code, "message": self.message })
        );
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        let code = e.code();
        if e.is_semantic() {
            CliError::validation(code, e.to_string())
        } else {
            CliError::input(code, e.to_string())
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::input("io-error", format!("{}: {e}", path.display()))
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
            }
            fs::write(p, bytes).map_err(|e| io_error(p, e))
        }
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::input("io-error", e.to_string())),
    }
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("report serializes");
    out.push(b'\n');
    out
}

pub fn analyze(bundle_path: &Path, config: &RunConfig) -> Result<(), CliError> {
    let bundle = read_clip_bundle(bundle_path)?;
    let report = analyze_clip(&bundle, &config.analysis())
        .map_err(|e| CliError::input("analysis-error", e.to_string()))?;
    write_output(config.out.as_deref(), &to_json(&report))
}

#[derive(Serialize)]
struct FailureEntry {
    clip_id: String,
    path: PathBuf,
    code: String,
    message: String,
}

#[derive(Serialize)]
struct BatchSummary<'a> {
    config: &'a RunConfig,
    n_manifest_rows: usize,
    n_failed: usize,
    dataset: DatasetSummary,
    failures: Vec<FailureEntry>,
}

/// File-system-safe report name for a clip id.
fn report_file_name(clip_id: &str) -> String {
    let safe: String = clip_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.json")
}

/// Report names for clip ids in order. Ids that sanitize to the same name get
/// `-2`, `-3`, ... suffixes, so no report overwrites another.
fn unique_report_names<'a>(ids: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut used = std::collections::HashSet::new();
    ids.into_iter()
        .map(|id| {
            let base = report_file_name(id);
            let stem = base.trim_end_matches(".json").to_string();
            let mut name = base;
            let mut k = 2;
            while !used.insert(name.to_ascii_lowercase()) {
                name = format!("{stem}-{k}.json");
                k += 1;
            }
            name
        })
        .collect()
}

pub fn batch(manifest_path: &Path, config: &RunConfig) -> Result<(), CliError> {
    let manifest = read_manifest(manifest_path).map_err(|e| CliError::input(e.code(), e.to_string()))?;
    if manifest.is_empty() {
        return Err(CliError::validation("empty-manifest", "manifest lists no clips"));
    }
    let out_dir = config
        .out
        .clone()
        .ok_or_else(|| CliError::input("missing-output", "batch needs --out DIR"))?;
    let base_dir = manifest_path.parent().unwrap_or(Path::new("."));
    let analysis = config.analysis();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_threads())
        .build()
        .map_err(|e| CliError::input("thread-pool", e.to_string()))?;
    let (loaded, analyzed) = pool.install(|| {
        let loaded = load_dataset(&manifest, base_dir);
        let analyzed: Vec<_> = loaded
            .clips
            .par_iter()
            .map(|c| analyze_clip(&c.bundle, &analysis))
            .collect();
        (loaded, analyzed)
    });

    let mut failures: Vec<(usize, FailureEntry)> = Vec::new();
    let row_index = |id: &str| manifest.rows.iter().position(|r| r.clip_id == id).unwrap_or(usize::MAX);
    for f in &loaded.failures {
        failures.push((
            row_index(&f.clip_id),
            FailureEntry {
                clip_id: f.clip_id.clone(),
                path: f.path.clone(),
                code: f.error.code().to_string(),
                message: f.error.to_string(),
            },
        ));
    }
    let mut good = Vec::new();
    for (clip, result) in loaded.clips.iter().zip(analyzed) {
        match result {
            Ok(report) => good.push((clip, report)),
            Err(e) => failures.push((
                row_index(&clip.row.clip_id),
                FailureEntry {
                    clip_id: clip.row.clip_id.clone(),
                    path: base_dir.join(&clip.row.bundle_path),
                    code: "analysis-error".into(),
                    message: e.to_string(),
                },
            )),
        }
    }
    failures.sort_by_key(|(i, _)| *i);
    let failures: Vec<FailureEntry> = failures.into_iter().map(|(_, f)| f).collect();
    for f in &failures {
        eprintln!(
            "{}",
            serde_json::json!({ "error": f.code, "clip_id": f.clip_id, "message": f.message })
        );
    }
    if good.is_empty() {
        return Err(CliError::validation(
            "no-clips-analyzed",
            format!("all {} clip(s) failed", manifest.len()),
        ));
    }

    let clips_dir = out_dir.join("clips");
    let tables_dir = out_dir.join("tables");
    for dir in [&clips_dir, &tables_dir] {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let names = unique_report_names(good.iter().map(|(_, r)| r.clip_id.as_str()));
    for ((_, report), name) in good.iter().zip(&names) {
        let path = clips_dir.join(name);
        fs::write(&path, to_json(report)).map_err(|e| io_error(&path, e))?;
    }

    let reports: Vec<&ClipReport> = good.iter().map(|(_, r)| r).collect();
    let bundles: Vec<_> = good.iter().map(|(c, _)| &c.bundle).collect();
    let tables = genre_tables(&reports, config.min_genre_count);
    for (stem, table) in tables.named() {
        for format in [TableFormat::Csv, TableFormat::Markdown] {
            let path = tables_dir.join(format!("{stem}.{}", format.extension()));
            fs::write(&path, emit_table(table, format)).map_err(|e| io_error(&path, e))?;
        }
    }

    let summary = BatchSummary {
        config,
        n_manifest_rows: manifest.len(),
        n_failed: failures.len(),
        dataset: summarize_dataset(&bundles, &reports),
        failures,
    };
    let path = out_dir.join("summary.json");
    fs::write(&path, to_json(&summary)).map_err(|e| io_error(&path, e))?;
    info!(
        "analyzed {} of {} clip(s) into {}",
        reports.len(),
        manifest.len(),
        out_dir.display()
    );
    Ok(())
}

pub fn figure(bundle_path: &Path, from_s: f64, to_s: f64, config: &RunConfig) -> Result<(), CliError> {
    let bundle = read_clip_bundle(bundle_path)?;
    let svg = emit_timeline_figure(&bundle, from_s, to_s, config.tau)
        .map_err(|e| CliError::input("bad-window", e.to_string()))?;
    write_output(config.out.as_deref(), svg.as_bytes())
}

pub fn synth(args: &SynthArgs, config: &RunConfig) -> Result<(), CliError> {
    let mut spec = SynthSpec::new(args.bpm, args.meter, args.duration, args.policy)
        .with_id(args.clip_id.clone())
        .with_jitter(args.jitter)
        .with_seed(args.seed)
        .with_peak(args.peak);
    spec.impulse_value = args.impulse_value;
    match (&args.music_genre, args.video_genre) {
        (Some(music), Some(video)) => {
            spec = spec.with_genres(GenreLabel {
                music_genre: music.clone(),
                video_genre: video,
            })
        }
        (None, None) => {}
        _ => {
            return Err(CliError::input(
                "bad-arguments",
                "--music-genre and --video-genre go together",
            ))
        }
    }
    let bundle = synth_clip(&spec).map_err(|e| CliError::input("infeasible-spec", e.to_string()))?;
    write_output(
        config.out.as_deref(),
        mvsync::serialize_clip_bundle(&bundle).as_bytes(),
    )
}

/// Seconds (`140.5`) or `mm:ss(.s)` (`02:20`).
pub fn parse_timestamp(s: &str) -> Result<f64, String> {
    let value = match s.split_once(':') {
        Some((m, sec)) => {
            let m: u32 = m.trim().parse().map_err(|_| format!("bad minutes in {s:?}"))?;
            let sec: f64 = sec.trim().parse().map_err(|_| format!("bad seconds in {s:?}"))?;
            if !(0.0..60.0).contains(&sec) {
                return Err(format!("seconds out of range in {s:?}"));
            }
            f64::from(m) * 60.0 + sec
        }
        None => s.trim().parse().map_err(|_| format!("bad time {s:?}"))?,
    };
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(format!("time must be non-negative, got {s:?}"))
    }
}

pub fn parse_policy(s: &str) -> Result<CutPolicy, String> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let number = |a: Option<&str>| -> Result<f64, String> {
        a.ok_or_else(|| format!("policy {name} needs a value, e.g. {name}:0.12"))?
            .parse()
            .map_err(|_| format!("bad number in policy {s:?}"))
    };
    match (name, arg) {
        ("on-bar", None) => Ok(CutPolicy::OnBar),
        ("on-beat", None) => Ok(CutPolicy::OnBeat),
        ("anticipate", a) => Ok(CutPolicy::Anticipate { offset_s: number(a)? }),
        ("random", a) => Ok(CutPolicy::Random { rate_hz: number(a)? }),
        _ => Err(format!(
            "unknown policy {s:?} (on-bar, on-beat, anticipate:SECONDS, random:HZ)"
        )),
    }
}

pub fn parse_peak(s: &str) -> Result<PeakShape, String> {
    match s.split_once(':') {
        None if s == "impulse" => Ok(PeakShape::Impulse),
        Some(("triangular", w)) => w
            .parse()
            .map(|half_width_frames| PeakShape::Triangular { half_width_frames })
            .map_err(|_| format!("bad half-width in {s:?}")),
        _ => Err(format!("unknown peak shape {s:?} (impulse, triangular:N)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamps() {
        assert_eq!(parse_timestamp("02:20").unwrap(), 140.0);
        assert_eq!(parse_timestamp("1:05.5").unwrap(), 65.5);
        assert_eq!(parse_timestamp("12.25").unwrap(), 12.25);
        assert!(parse_timestamp("1:75").is_err());
        assert!(parse_timestamp("-3").is_err());
    }

    #[test]
    fn policies() {
        assert_eq!(parse_policy("on-bar").unwrap(), CutPolicy::OnBar);
        assert_eq!(
            parse_policy("anticipate:0.12").unwrap(),
            CutPolicy::Anticipate { offset_s: 0.12 }
        );
        assert_eq!(parse_policy("random:0.5").unwrap(), CutPolicy::Random { rate_hz: 0.5 });
        assert!(parse_policy("random").is_err());
        assert!(parse_policy("on-bar:1").is_err());
        assert!(parse_policy("sometimes").is_err());
    }

    #[test]
    fn peaks() {
        assert_eq!(parse_peak("impulse").unwrap(), PeakShape::Impulse);
        assert_eq!(
            parse_peak("triangular:3").unwrap(),
            PeakShape::Triangular { half_width_frames: 3 }
        );
        assert!(parse_peak("triangular:x").is_err());
    }

    #[test]
    fn report_names_are_path_safe() {
        assert_eq!(report_file_name("a/b c.mp4"), "a_b_c.mp4.json");
    }

    #[test]
    fn colliding_report_names_get_suffixes() {
        assert_eq!(
            unique_report_names(["a b", "a_b", "a/b", "c", "A_B"]),
            ["a_b.json", "a_b-2.json", "a_b-3.json", "c.json", "A_B-4.json"]
        );
    }
}
