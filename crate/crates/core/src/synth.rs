//! Synthetic clips with planted editing policies, plus a brute-force
//! reference for the co-occurrence score.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::SynthError;
use crate::model::{
    BeatGrid, BoundaryKind, BoundaryList, ClipBundle, GenreLabel, LikelihoodCurve,
    DEFAULT_FRAME_RATE_HZ,
};

/// Bars per synthetic functional segment.
pub const BARS_PER_SEGMENT: usize = 8;

/// Where the synthetic editor places cuts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutPolicy {
    OnBar,
    OnBeat,
    /// Cut `offset_s` seconds before every downbeat.
    Anticipate { offset_s: f64 },
    /// Poisson cuts independent of the music.
    Random { rate_hz: f64 },
}

/// Shape of one planted transition in the likelihood curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakShape {
    Impulse,
    /// Linear ramp over `half_width_frames` frames on each side of the peak.
    Triangular { half_width_frames: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub clip_id: String,
    pub bpm: f64,
    pub meter: u8,
    pub duration_s: f64,
    pub cut_policy: CutPolicy,
    /// Standard deviation of Gaussian timing noise added to each cut.
    pub jitter_s: f64,
    pub impulse_value: f64,
    pub peak: PeakShape,
    pub frame_rate_hz: f64,
    pub seed: u64,
    pub genres: Option<GenreLabel>,
}

impl SynthSpec {
    pub fn new(bpm: f64, meter: u8, duration_s: f64, cut_policy: CutPolicy) -> Self {
        Self {
            clip_id: "synth".into(),
            bpm,
            meter,
            duration_s,
            cut_policy,
            jitter_s: 0.0,
            impulse_value: 1.0,
            peak: PeakShape::Impulse,
            frame_rate_hz: DEFAULT_FRAME_RATE_HZ,
            seed: 0,
            genres: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_jitter(mut self, jitter_s: f64) -> Self {
        self.jitter_s = jitter_s;
        self
    }

    pub fn with_id(mut self, clip_id: impl Into<String>) -> Self {
        self.clip_id = clip_id.into();
        self
    }

    pub fn with_genres(mut self, genres: GenreLabel) -> Self {
        self.genres = Some(genres);
        self
    }

    pub fn with_peak(mut self, peak: PeakShape) -> Self {
        self.peak = peak;
        self
    }
}

fn infeasible(msg: impl Into<String>) -> SynthError {
    SynthError::Infeasible(msg.into())
}

/// Grid positions `k * step` for `k >= first` that fall strictly before `end`.
fn grid_times(step: f64, first: usize, end: f64) -> Vec<f64> {
    (first..)
        .map(|k| k as f64 * step)
        .take_while(|&t| t < end)
        .collect()
}

/// Generates a clip. Downbeats sit exactly on the bar grid from 0 s, segment
/// boundaries every eight bars, and the curve carries one peak per planted
/// cut. Output depends only on the spec.
pub fn synth_clip(spec: &SynthSpec) -> Result<ClipBundle, SynthError> {
    let grid = BeatGrid::new(spec.bpm, spec.meter)?;
    if !(spec.duration_s.is_finite() && spec.duration_s > 0.0) {
        return Err(infeasible(format!("duration {} must be positive", spec.duration_s)));
    }
    if !(spec.frame_rate_hz.is_finite() && spec.frame_rate_hz > 0.0) {
        return Err(infeasible(format!("frame rate {} must be positive", spec.frame_rate_hz)));
    }
    if !(spec.impulse_value > 0.0 && spec.impulse_value <= 1.0) {
        return Err(infeasible(format!("impulse value {} outside (0, 1]", spec.impulse_value)));
    }
    if !(spec.jitter_s >= 0.0 && spec.jitter_s < 0.25 * grid.delta_bar()) {
        return Err(infeasible(format!(
            "jitter {} s must be non-negative and below a quarter bar",
            spec.jitter_s
        )));
    }
    let frame_period = 1.0 / spec.frame_rate_hz;

    let downbeats = grid_times(grid.delta_bar(), 0, spec.duration_s);
    let segments = grid_times(
        BARS_PER_SEGMENT as f64 * grid.delta_bar(),
        1,
        spec.duration_s,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let planted: Vec<f64> = match spec.cut_policy {
        CutPolicy::OnBar => downbeats.clone(),
        CutPolicy::OnBeat => {
            if grid.delta_beat() < 2.0 * frame_period {
                return Err(infeasible("beats closer than two frames"));
            }
            grid_times(grid.delta_beat(), 0, spec.duration_s)
        }
        CutPolicy::Anticipate { offset_s } => {
            if !(offset_s.is_finite() && offset_s.abs() < 0.5 * grid.delta_bar()) {
                return Err(infeasible(format!(
                    "anticipation {offset_s} s must be under half a bar"
                )));
            }
            downbeats.iter().map(|t| t - offset_s).collect()
        }
        CutPolicy::Random { rate_hz } => {
            if !(rate_hz.is_finite() && rate_hz > 0.0) {
                return Err(infeasible(format!("cut rate {rate_hz} Hz must be positive")));
            }
            if rate_hz * 2.0 * frame_period > 1.0 {
                return Err(infeasible(format!(
                    "cut rate {rate_hz} Hz leaves under two frames between cuts"
                )));
            }
            let gaps = Exp::new(rate_hz).expect("positive rate");
            let mut t = gaps.sample(&mut rng);
            let mut cuts = Vec::new();
            while t < spec.duration_s {
                cuts.push(t);
                t += gaps.sample(&mut rng);
            }
            cuts
        }
    };

    let jitter = (spec.jitter_s > 0.0)
        .then(|| Normal::new(0.0, spec.jitter_s).expect("finite jitter"));
    let n_frames = ((spec.duration_s * spec.frame_rate_hz).round() as usize).max(1);
    let mut frames: Vec<usize> = Vec::with_capacity(planted.len());
    for t in planted {
        let t = match &jitter {
            Some(n) => t + n.sample(&mut rng),
            None => t,
        };
        let f = (t * spec.frame_rate_hz).round();
        if f >= 0.0 && (f as usize) < n_frames {
            frames.push(f as usize);
        }
    }
    frames.sort_unstable();
    let before = frames.len();
    frames.dedup();
    if frames.len() < before && jitter.is_none() && !matches!(spec.cut_policy, CutPolicy::Random { .. }) {
        return Err(infeasible("planted cuts collide within one frame"));
    }

    let mut values = vec![0.0; n_frames];
    for &f in &frames {
        match spec.peak {
            PeakShape::Impulse => values[f] = spec.impulse_value,
            PeakShape::Triangular { half_width_frames: h } => {
                let lo = f.saturating_sub(h);
                let hi = (f + h).min(n_frames - 1);
                for (k, v) in values.iter_mut().enumerate().take(hi + 1).skip(lo) {
                    let d = k.abs_diff(f) as f64;
                    let height = spec.impulse_value * (1.0 - d / (h as f64 + 1.0));
                    *v = f64::max(*v, height);
                }
            }
        }
    }

    Ok(ClipBundle {
        clip_id: spec.clip_id.clone(),
        duration_s: spec.duration_s,
        grid,
        downbeats: BoundaryList {
            kind: BoundaryKind::Downbeat,
            times_s: downbeats,
        },
        segments: BoundaryList {
            kind: BoundaryKind::Segment,
            times_s: segments,
        },
        beats_s: None,
        curve: LikelihoodCurve {
            frame_rate_hz: spec.frame_rate_hz,
            values,
        },
        genres: spec.genres.clone(),
    })
}

/// Reference co-occurrence scores: the Gaussian-weighted sum over every frame
/// of the curve (no truncation), clamped to 1 like the production path.
pub fn oracle_cooccurrence(curve: &LikelihoodCurve, anchors: &BoundaryList, sigma_frames: f64) -> Vec<f64> {
    anchors
        .iter()
        .map(|t| {
            let center = (t * curve.frame_rate_hz).round();
            let total: f64 = curve
                .values
                .iter()
                .enumerate()
                .map(|(k, &v)| {
                    let d = k as f64 - center;
                    v * (-(d * d) / (2.0 * sigma_frames * sigma_frames)).exp()
                })
                .sum();
            total.min(1.0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_bundle;

    #[test]
    fn on_bar_layout() {
        let b = synth_clip(&SynthSpec::new(120.0, 4, 60.0, CutPolicy::OnBar)).unwrap();
        assert!(validate_bundle(&b).is_valid());
        assert_eq!(b.downbeats.len(), 30);
        assert_eq!(b.downbeats.times_s[1], 2.0);
        assert_eq!(b.segments.times_s, vec![16.0, 32.0, 48.0]);
        assert_eq!(b.curve.len(), 1500);
        let ones: Vec<usize> = (0..1500).filter(|&i| b.curve.values[i] == 1.0).collect();
        assert_eq!(ones, (0..30).map(|k| k * 50).collect::<Vec<_>>());
    }

    #[test]
    fn random_policy_is_seeded() {
        let spec = SynthSpec::new(100.0, 4, 60.0, CutPolicy::Random { rate_hz: 0.5 }).with_seed(7);
        assert_eq!(synth_clip(&spec).unwrap(), synth_clip(&spec).unwrap());
        let other = synth_clip(&spec.clone().with_seed(8)).unwrap();
        assert_ne!(synth_clip(&spec).unwrap().curve, other.curve);
    }

    #[test]
    fn jitter_is_seeded_and_valid() {
        let spec = SynthSpec::new(120.0, 3, 30.0, CutPolicy::OnBeat).with_jitter(0.02).with_seed(3);
        let a = synth_clip(&spec).unwrap();
        assert!(validate_bundle(&a).is_valid());
        assert_eq!(a, synth_clip(&spec).unwrap());
    }

    #[test]
    fn triangular_peaks() {
        let spec = SynthSpec::new(120.0, 4, 10.0, CutPolicy::OnBar)
            .with_peak(PeakShape::Triangular { half_width_frames: 2 });
        let b = synth_clip(&spec).unwrap();
        let close = |got: &[f64], want: &[f64]| {
            got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() < 1e-12)
        };
        assert!(close(&b.curve.values[48..53], &[1.0 / 3.0, 2.0 / 3.0, 1.0, 2.0 / 3.0, 1.0 / 3.0]));
        assert!(close(&b.curve.values[0..3], &[1.0, 2.0 / 3.0, 1.0 / 3.0]));
    }

    #[test]
    fn infeasible_specs() {
        let base = SynthSpec::new(120.0, 4, 10.0, CutPolicy::Random { rate_hz: 20.0 });
        assert!(matches!(synth_clip(&base), Err(SynthError::Infeasible(_))));
        let fast_beats = SynthSpec::new(1000.0, 4, 10.0, CutPolicy::OnBeat);
        assert!(synth_clip(&fast_beats).is_err());
        let big_offset = SynthSpec::new(120.0, 4, 10.0, CutPolicy::Anticipate { offset_s: 1.5 });
        assert!(synth_clip(&big_offset).is_err());
        assert!(synth_clip(&SynthSpec::new(120.0, 5, 10.0, CutPolicy::OnBar)).is_err());
        assert!(synth_clip(&SynthSpec::new(120.0, 4, 10.0, CutPolicy::OnBar).with_jitter(-1.0)).is_err());
    }

    #[test]
    fn oracle_trivial_cases() {
        let anchors = BoundaryList::new(BoundaryKind::Downbeat, vec![1.0, 2.0]).unwrap();
        let zero = LikelihoodCurve::zeros(25.0, 100);
        assert_eq!(oracle_cooccurrence(&zero, &anchors, 2.0), vec![0.0, 0.0]);
        let mut spike = zero.clone();
        spike.values[25] = 1.0;
        let s = oracle_cooccurrence(&spike, &anchors, 2.0);
        assert_eq!(s[0], 1.0);
        assert!(s[1] < 1e-30);
    }
}
