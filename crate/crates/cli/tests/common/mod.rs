#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mvsync::synth::{synth_clip, CutPolicy, SynthSpec};
use mvsync::{serialize_clip_bundle, GenreLabel, VideoGenre};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mvsync"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).env("RUST_LOG", "error").output().expect("binary runs")
}

pub fn write_synth(dir: &Path, name: &str, spec: &SynthSpec) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serialize_clip_bundle(&synth_clip(spec).unwrap())).unwrap();
    path
}

pub struct PlantedClip {
    pub id: String,
    pub music_genre: &'static str,
    pub video_genre: VideoGenre,
    pub spec: SynthSpec,
}

/// Writes bundles plus a manifest and returns the manifest path.
pub fn write_dataset(dir: &Path, clips: &[PlantedClip]) -> PathBuf {
    let mut manifest = String::from("clip_id,bundle_path,music_genre,video_genre\n");
    for c in clips {
        let file = format!("{}.json", c.id);
        let spec = c.spec.clone().with_id(c.id.clone()).with_genres(GenreLabel {
            music_genre: c.music_genre.to_string(),
            video_genre: c.video_genre,
        });
        write_synth(dir, &file, &spec);
        manifest.push_str(&format!("{},{file},{},{}\n", c.id, c.music_genre, c.video_genre));
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest).unwrap();
    path
}

/// A mixed ten-clip dataset across two music and two video genres.
pub fn ten_clip_dataset() -> Vec<PlantedClip> {
    (0..10)
        .map(|i| {
            let policy = match i % 3 {
                0 => CutPolicy::OnBar,
                1 => CutPolicy::Anticipate { offset_s: 0.12 },
                _ => CutPolicy::Random { rate_hz: 0.5 },
            };
            PlantedClip {
                id: format!("clip{i:02}"),
                music_genre: if i < 6 { "Pop" } else { "Hip-Hop" },
                video_genre: if i % 2 == 0 { VideoGenre::Dance } else { VideoGenre::Narrative },
                spec: SynthSpec::new(100.0 + 4.0 * i as f64, 4, 45.0, policy)
                    .with_jitter(if i % 3 == 2 { 0.0 } else { 0.01 })
                    .with_seed(i as u64),
            }
        })
        .collect()
}

/// Every file under `dir`, relative path and contents, sorted by path.
pub fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
