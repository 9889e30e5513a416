//! Per-genre aggregation of clip metrics and table output.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::cooccurrence::CooccurrenceResult;
use crate::duration::DurationAgreement;
use crate::error::ReportError;
use crate::model::GenreLabel;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

/// Genres with fewer clips than this are left out of tables.
pub const DEFAULT_MIN_GENRE_COUNT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub mean: f64,
    pub halfwidth: f64,
}

/// Mean and normal-approximation 95% half-width `1.96 * s / sqrt(n)`, with
/// `s` the sample standard deviation. The half-width is exactly 0 for a
/// single value or a constant list.
pub fn ci95(values: &[f64]) -> Result<ConfidenceInterval, ReportError> {
    if values.is_empty() {
        return Err(ReportError::EmptyInput);
    }
    // Summing a constant list can drift by an ulp; report it exactly.
    if values.iter().all(|v| *v == values[0]) {
        return Ok(ConfidenceInterval {
            mean: values[0],
            halfwidth: 0.0,
        });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(ConfidenceInterval {
        mean,
        halfwidth: Z_95 * var.sqrt() / n.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    MusicGenre,
    VideoGenre,
}

impl Grouping {
    pub const ALL: [Grouping; 2] = [Grouping::MusicGenre, Grouping::VideoGenre];

    pub fn key(&self, genres: &GenreLabel) -> String {
        match self {
            Grouping::MusicGenre => genres.music_genre.clone(),
            Grouping::VideoGenre => genres.video_genre.to_string(),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Grouping::MusicGenre => "music_genre",
            Grouping::VideoGenre => "video_genre",
        }
    }

    fn title(&self) -> &'static str {
        match self {
            Grouping::MusicGenre => "Music genre",
            Grouping::VideoGenre => "Video genre",
        }
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelCount {
    pub n_matching: usize,
    pub percent: f64,
}

impl LevelCount {
    fn new(n_matching: usize, n_clips: usize) -> Self {
        Self {
            n_matching,
            percent: 100.0 * n_matching as f64 / n_clips as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRow {
    pub genre: String,
    pub n_clips: usize,
    pub bar: LevelCount,
    pub beat: LevelCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    /// Clips with a defined score for this metric.
    pub n: usize,
    pub mean: f64,
    pub ci95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub genre: String,
    pub n_clips: usize,
    pub segment: Option<MetricSummary>,
    pub bar: Option<MetricSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "rows", rename_all = "snake_case")]
pub enum TableRows {
    Counts(Vec<CountRow>),
    Scores(Vec<ScoreRow>),
}

/// Per-genre table. Rows are sorted by genre name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenreTable {
    pub grouping: Grouping,
    pub min_count: usize,
    pub rows: TableRows,
}

impl GenreTable {
    pub fn len(&self) -> usize {
        match &self.rows {
            TableRows::Counts(r) => r.len(),
            TableRows::Scores(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Counts clips whose modal shot duration agrees with the bar and with the
/// beat, per genre.
pub fn aggregate_counts<'a, I>(results: I, grouping: Grouping, min_count: usize) -> GenreTable
where
    I: IntoIterator<Item = (&'a GenreLabel, DurationAgreement)>,
{
    let mut groups: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    for (genres, agreement) in results {
        let entry = groups.entry(grouping.key(genres)).or_default();
        entry.0 += 1;
        entry.1 += usize::from(agreement.bar_level);
        entry.2 += usize::from(agreement.beat_level);
    }
    let rows = groups
        .into_iter()
        .filter(|(_, (n, _, _))| *n >= min_count.max(1))
        .map(|(genre, (n, bar, beat))| CountRow {
            genre,
            n_clips: n,
            bar: LevelCount::new(bar, n),
            beat: LevelCount::new(beat, n),
        })
        .collect();
    GenreTable {
        grouping,
        min_count,
        rows: TableRows::Counts(rows),
    }
}

fn summarize(values: &[f64]) -> Option<MetricSummary> {
    ci95(values).ok().map(|ci| MetricSummary {
        n: values.len(),
        mean: ci.mean,
        ci95: ci.halfwidth,
    })
}

/// Mean and 95% interval of the clip-level segment and downbeat scores per
/// genre. Clips without anchors of a kind do not contribute to that column.
pub fn aggregate_scores<'a, I>(results: I, grouping: Grouping, min_count: usize) -> GenreTable
where
    I: IntoIterator<Item = (&'a GenreLabel, &'a CooccurrenceResult, &'a CooccurrenceResult)>,
{
    let mut groups: BTreeMap<String, (usize, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for (genres, segment, downbeat) in results {
        let entry = groups.entry(grouping.key(genres)).or_default();
        entry.0 += 1;
        entry.1.extend(segment.mean());
        entry.2.extend(downbeat.mean());
    }
    let rows = groups
        .into_iter()
        .filter(|(_, (n, _, _))| *n >= min_count.max(1))
        .map(|(genre, (n, seg, bar))| ScoreRow {
            genre,
            n_clips: n,
            segment: summarize(&seg),
            bar: summarize(&bar),
        })
        .collect();
    GenreTable {
        grouping,
        min_count,
        rows: TableRows::Scores(rows),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl TableFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Markdown => "md",
        }
    }
}

pub const COUNT_CSV_HEADER: [&str; 5] = ["genre", "n_clips", "level", "n_matching", "percent"];
pub const SCORE_CSV_HEADER: [&str; 5] = ["genre", "n_clips", "metric", "value", "ci95"];

/// Renders a table. Output depends only on the table contents.
pub fn emit_table(table: &GenreTable, format: TableFormat) -> Vec<u8> {
    match format {
        TableFormat::Csv => emit_csv(table),
        TableFormat::Markdown => emit_markdown(table).into_bytes(),
    }
}

fn emit_csv(table: &GenreTable) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, rec: &[String]| {
        w.write_record(rec).expect("writing to memory");
    };
    match &table.rows {
        TableRows::Counts(rows) => {
            write(&mut w, &COUNT_CSV_HEADER.map(String::from));
            for r in rows {
                for (level, c) in [("bar", r.bar), ("beat", r.beat)] {
                    write(
                        &mut w,
                        &[
                            r.genre.clone(),
                            r.n_clips.to_string(),
                            level.to_string(),
                            c.n_matching.to_string(),
                            format!("{:.1}", c.percent),
                        ],
                    );
                }
            }
        }
        TableRows::Scores(rows) => {
            write(&mut w, &SCORE_CSV_HEADER.map(String::from));
            for r in rows {
                for (metric, m) in [("S_seg", r.segment), ("S_bar", r.bar)] {
                    let (n, value, ci) = match m {
                        Some(m) => (m.n, format!("{:.6}", m.mean), format!("{:.6}", m.ci95)),
                        None => (0, String::new(), String::new()),
                    };
                    write(
                        &mut w,
                        &[r.genre.clone(), n.to_string(), metric.to_string(), value, ci],
                    );
                }
            }
        }
    }
    w.into_inner().expect("in-memory writer")
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

fn emit_markdown(table: &GenreTable) -> String {
    let title = table.grouping.title();
    let mut out = String::new();
    match &table.rows {
        TableRows::Counts(rows) => {
            out.push_str(&format!(
                "| {title} | bar # tracks | bar % | beat # tracks | beat % | # tracks |\n"
            ));
            out.push_str("|---|---:|---:|---:|---:|---:|\n");
            for r in rows {
                out.push_str(&format!(
                    "| {} | {} | {:.1} | {} | {:.1} | {} |\n",
                    md_cell(&r.genre),
                    r.bar.n_matching,
                    r.bar.percent,
                    r.beat.n_matching,
                    r.beat.percent,
                    r.n_clips
                ));
            }
        }
        TableRows::Scores(rows) => {
            out.push_str(&format!("| {title} | S(l_seg) | S(l_bar) | # tracks |\n"));
            out.push_str("|---|---:|---:|---:|\n");
            let cell = |m: Option<MetricSummary>| match m {
                Some(m) => format!("{:.2} ± {:.2}", m.mean, m.ci95),
                None => "n/a".to_string(),
            };
            for r in rows {
                out.push_str(&format!(
                    "| {} | {} | {} | {} |\n",
                    md_cell(&r.genre),
                    cell(r.segment),
                    cell(r.bar),
                    r.n_clips
                ));
            }
        }
    }
    out
}
