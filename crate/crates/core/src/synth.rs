//! Seeded generators for three labeled sensor archetypes:
//!
//! * **power**: a week of consumption with five weekday humps and a low
//!   weekend; anomalies put a trough on a weekday or a peak on the weekend.
//! * **loop**: vehicle counts around a stadium event with a pre-event
//!   bump, a mid-event valley and a sharp post-event surge; anomalies drop
//!   the surge or turn the valley into a bump.
//! * **land**: band-limited AR(1) humidity with weak time dependence;
//!   anomalies are short spikes or level shifts that leave the band.
//!
//! Every value is clamped into `[0, 1]`, so generated windows already
//! satisfy the normalized-window invariant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Label, TimeSeries, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    Power,
    Loop,
    Land,
}

impl Archetype {
    pub const ALL: [Archetype; 3] = [Archetype::Power, Archetype::Loop, Archetype::Land];

    pub fn name(self) -> &'static str {
        match self {
            Archetype::Power => "power",
            Archetype::Loop => "loop",
            Archetype::Land => "land",
        }
    }
}

impl std::str::FromStr for Archetype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(Archetype::Power),
            "loop" => Ok(Archetype::Loop),
            "land" => Ok(Archetype::Land),
            other => Err(Error::Config(format!("unknown archetype '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub archetype: Archetype,
    pub n_normal: usize,
    pub n_abnormal: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Size of loop valley inversions and land excursions beyond the band.
    /// Defaults to three times `noise_sigma`.
    pub anomaly_amplitude: Option<f64>,
    /// Raw samples per day (power).
    pub points_per_day: usize,
    /// Weekday hump height (power) or post-event surge height (loop).
    pub peak_amplitude: f64,
    /// Depth of the mid-event valley below the baseline (loop).
    pub valley_depth: f64,
    /// Peak-time jitter: hours (power) or points (loop).
    pub jitter: f64,
    /// Per-window amplitude scale drawn from `1 +/- level_variation`.
    pub level_variation: f64,
    /// AR(1) coefficient (land).
    pub ar_coefficient: f64,
    pub band_low: f64,
    pub band_high: f64,
    /// Points per window (loop and land; power uses 7 days).
    pub window_len: usize,
}

impl GeneratorConfig {
    /// 15-minute power readings, one window per week.
    pub fn power() -> Self {
        Self {
            archetype: Archetype::Power,
            n_normal: 500,
            n_abnormal: 60,
            noise_sigma: 0.12,
            seed: 0,
            anomaly_amplitude: None,
            points_per_day: 96,
            peak_amplitude: 0.55,
            valley_depth: 0.0,
            jitter: 1.0,
            level_variation: 0.1,
            ar_coefficient: 0.0,
            band_low: 0.0,
            band_high: 1.0,
            window_len: 7 * 96,
        }
    }

    /// Event-day vehicle counts, 36 points per window.
    pub fn loop_sensor() -> Self {
        Self {
            archetype: Archetype::Loop,
            n_normal: 500,
            n_abnormal: 60,
            noise_sigma: 0.04,
            seed: 0,
            anomaly_amplitude: None,
            points_per_day: 0,
            peak_amplitude: 0.5,
            valley_depth: 0.1,
            jitter: 1.0,
            level_variation: 0.1,
            ar_coefficient: 0.0,
            band_low: 0.0,
            band_high: 1.0,
            window_len: 36,
        }
    }

    /// 12-minute humidity, 50 points (10 hours) per window.
    pub fn land() -> Self {
        Self {
            archetype: Archetype::Land,
            n_normal: 500,
            n_abnormal: 60,
            noise_sigma: 0.04,
            seed: 0,
            anomaly_amplitude: None,
            points_per_day: 0,
            peak_amplitude: 0.0,
            valley_depth: 0.0,
            jitter: 0.0,
            level_variation: 0.0,
            ar_coefficient: 0.3,
            band_low: 0.35,
            band_high: 0.65,
            window_len: 50,
        }
    }

    pub fn for_archetype(archetype: Archetype) -> Self {
        match archetype {
            Archetype::Power => Self::power(),
            Archetype::Loop => Self::loop_sensor(),
            Archetype::Land => Self::land(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn amplitude(&self) -> f64 {
        self.anomaly_amplitude.unwrap_or(3.0 * self.noise_sigma)
    }

    /// Seconds between raw samples.
    pub fn sample_interval(&self) -> f64 {
        match self.archetype {
            Archetype::Power => 86_400.0 / self.points_per_day.max(1) as f64,
            Archetype::Loop => 300.0,
            Archetype::Land => 720.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::Config(format!("noise_sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if self.level_variation < 0.0 || self.level_variation >= 1.0 {
            return Err(Error::Config("level_variation must lie in [0, 1)".into()));
        }
        match self.archetype {
            Archetype::Power if self.points_per_day < 4 => {
                Err(Error::Config("power generator needs at least 4 points per day".into()))
            }
            Archetype::Loop if self.window_len < 12 => {
                Err(Error::Config("loop generator needs windows of at least 12 points".into()))
            }
            Archetype::Land if !(0.0..=0.5).contains(&self.ar_coefficient) => Err(Error::Config(
                format!("AR coefficient {} outside [0, 0.5]", self.ar_coefficient),
            )),
            Archetype::Land if !(self.band_low < self.band_high) || self.window_len < 2 => {
                Err(Error::Config("land generator needs band_low < band_high and T >= 2".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Generates `n_normal` normal windows followed by `n_abnormal` abnormal
/// ones; `source_offset` is the position in that list.
pub fn generate(config: &GeneratorConfig) -> Result<Vec<Window>> {
    config.validate()?;
    match config.archetype {
        Archetype::Power => gen_power_like(config),
        Archetype::Loop => gen_loop_like(config),
        Archetype::Land => gen_land_like(config),
    }
}

fn gaussian_bump(x: f64, center: f64, width: f64) -> f64 {
    let z = (x - center) / width;
    (-0.5 * z * z).exp()
}

fn noise(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("sigma validated non-negative")
}

fn finish(points: Vec<f64>, label: Label, index: usize) -> Window {
    Window {
        points: points.into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        label: Some(label),
        source_offset: index,
    }
}

fn labels(config: &GeneratorConfig) -> impl Iterator<Item = (usize, Label)> {
    let n = config.n_normal;
    (0..n + config.n_abnormal).map(move |i| (i, if i < n { Label::Normal } else { Label::Abnormal }))
}

const POWER_BASE: f64 = 0.15;
const WEEKEND_FRACTION: f64 = 0.2;

/// Noise-free day profile: a midday hump of `height` with the given shift.
fn power_day(ppd: usize, height: f64, shift_hours: f64) -> impl Iterator<Item = f64> {
    (0..ppd).map(move |s| {
        let hour = 24.0 * s as f64 / ppd as f64;
        POWER_BASE + height * gaussian_bump(hour, 13.0 + shift_hours, 3.0)
    })
}

pub fn gen_power_like(config: &GeneratorConfig) -> Result<Vec<Window>> {
    config.validate()?;
    let ppd = config.points_per_day;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let eps = noise(config.noise_sigma);
    Ok(labels(config)
        .map(|(i, label)| {
            let scale = 1.0 + config.level_variation * rng.random_range(-1.0..=1.0);
            let odd_day = if label.is_abnormal() {
                // a weekday trough or a weekend crest
                if rng.random_bool(0.5) {
                    Some(rng.random_range(0..5))
                } else {
                    Some(rng.random_range(5..7))
                }
            } else {
                None
            };
            let mut points = Vec::with_capacity(7 * ppd);
            for day in 0..7 {
                let shift = config.jitter * rng.random_range(-1.0..=1.0);
                let weekday = (day < 5) != (odd_day == Some(day));
                let height = config.peak_amplitude * scale * if weekday { 1.0 } else { WEEKEND_FRACTION };
                points.extend(power_day(ppd, height, shift));
            }
            for p in points.iter_mut() {
                *p += eps.sample(&mut rng);
            }
            finish(points, label, i)
        })
        .collect())
}

const LOOP_BASE: f64 = 0.25;

/// Noise-free loop template: pre-event bump, mid valley, post-event surge.
pub fn loop_template(t_len: usize, peak: f64, valley: f64, shift: f64) -> Vec<f64> {
    let n = t_len as f64;
    (0..t_len)
        .map(|t| {
            let x = t as f64;
            LOOP_BASE + 0.35 * peak * gaussian_bump(x, 0.18 * n + shift, 0.07 * n)
                - valley * gaussian_bump(x, 0.5 * n + shift, 0.08 * n)
                + peak * gaussian_bump(x, 0.75 * n + shift, 0.06 * n)
        })
        .collect()
}

pub fn gen_loop_like(config: &GeneratorConfig) -> Result<Vec<Window>> {
    config.validate()?;
    let t_len = config.window_len;
    let n = t_len as f64;
    let amp = config.amplitude();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let eps = noise(config.noise_sigma);
    Ok(labels(config)
        .map(|(i, label)| {
            let scale = 1.0 + config.level_variation * rng.random_range(-1.0..=1.0);
            let shift = config.jitter * rng.random_range(-1.0..=1.0);
            let peak = config.peak_amplitude * scale;
            let mut points = loop_template(t_len, peak, config.valley_depth, shift);
            if label.is_abnormal() {
                if rng.random_bool(0.5) {
                    // no post-event surge
                    for (t, p) in points.iter_mut().enumerate() {
                        *p -= peak * gaussian_bump(t as f64, 0.75 * n + shift, 0.06 * n);
                    }
                } else {
                    // valley turned into a bump of the anomaly amplitude
                    for (t, p) in points.iter_mut().enumerate() {
                        let g = gaussian_bump(t as f64, 0.5 * n + shift, 0.08 * n);
                        *p += (config.valley_depth + amp) * g;
                    }
                }
            }
            for p in points.iter_mut() {
                *p += eps.sample(&mut rng);
            }
            finish(points, label, i)
        })
        .collect())
}

pub fn gen_land_like(config: &GeneratorConfig) -> Result<Vec<Window>> {
    config.validate()?;
    let t_len = config.window_len;
    let (lo, hi) = (config.band_low, config.band_high);
    let level = 0.5 * (lo + hi);
    let phi = config.ar_coefficient;
    let amp = config.amplitude();
    let stationary_sd = config.noise_sigma / (1.0 - phi * phi).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let eps = noise(config.noise_sigma);
    let start = noise(stationary_sd);
    Ok(labels(config)
        .map(|(i, label)| {
            let mut x = level + start.sample(&mut rng);
            let mut points = Vec::with_capacity(t_len);
            for _ in 0..t_len {
                x = x.clamp(lo, hi);
                points.push(x);
                x = level + phi * (x - level) + eps.sample(&mut rng);
            }
            if label.is_abnormal() {
                let up = rng.random_bool(0.5);
                let target = if up { hi + amp } else { lo - amp };
                let (start, len) = if rng.random_bool(0.5) {
                    // spike of 2..=4 points
                    let len = rng.random_range(2..=4).min(t_len);
                    (rng.random_range(0..=t_len - len), len)
                } else {
                    // level shift lasting at least a fifth of the window
                    let len = rng.random_range(t_len / 5..=t_len / 2).max(1);
                    (rng.random_range(0..=t_len - len), len)
                };
                for p in &mut points[start..start + len] {
                    let wobble = 0.25 * amp * rng.random_range(-1.0..=1.0);
                    *p = if up { (target + wobble).max(hi + 0.5 * amp) } else { (target + wobble).min(lo - 0.5 * amp) };
                }
            }
            finish(points, label, i)
        })
        .collect())
}

/// Concatenates the windows with the given label into one series.
pub fn concat_stream(windows: &[Window], label: Label, sample_interval: f64) -> Result<TimeSeries> {
    let values: Vec<f64> = windows
        .iter()
        .filter(|w| w.label == Some(label))
        .flat_map(|w| w.points.iter().copied())
        .collect();
    TimeSeries::new(format!("{label:?}-stream"), values, sample_interval)
}
