//! Seeded synthetic load and PV years.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`, with the word-stream selected by series kind
//! (load = 1, pv = 2). Only uniform `f64` draws in `[0, 1)` are used, in a
//! fixed order: one per day followed by one per slot of that day.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::series::{SeriesKind, YearSeries, DAYS_PER_YEAR, SLOTS_PER_DAY, SLOT_HOURS};

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("generator parameter {name} must be {requirement}, got {value}")]
    InvalidParam {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
}

/// Shape parameters for the synthetic household year.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    /// Lower bound of every load sample (kW).
    pub load_min_kw: f64,
    /// Upper bound of every load sample (kW).
    pub load_max_kw: f64,
    /// Relative height of the morning bump (~07:30).
    pub morning_peak: f64,
    /// Relative height of the evening bump (~19:00).
    pub evening_peak: f64,
    /// Extra winter demand as a fraction of the load band.
    pub winter_uplift: f64,
    /// Half-width of the per-slot load noise as a fraction of the load band.
    pub load_noise: f64,
    /// PV clear-sky peak power at midsummer (kW).
    pub pv_peak_kw: f64,
    /// Midwinter clear-sky peak as a fraction of the midsummer peak.
    pub pv_winter_fraction: f64,
    /// Shortest and longest day length (hours); daylight is centered on 12:30.
    pub daylight_min_hours: f64,
    pub daylight_max_hours: f64,
    /// Daily cloud attenuation is uniform in `[1 - cloudiness, 1]`.
    pub cloudiness: f64,
    /// Per-slot PV flicker, uniform in `[1 - pv_noise, 1]`.
    pub pv_noise: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            load_min_kw: 0.213,
            load_max_kw: 0.95,
            morning_peak: 0.45,
            evening_peak: 0.8,
            winter_uplift: 0.2,
            load_noise: 0.12,
            pv_peak_kw: 2.0,
            pv_winter_fraction: 0.3,
            daylight_min_hours: 8.0,
            daylight_max_hours: 16.0,
            cloudiness: 0.7,
            pv_noise: 0.2,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let positive = [
            (
                "load_max_kw - load_min_kw",
                self.load_max_kw - self.load_min_kw,
            ),
            ("morning_peak", self.morning_peak),
            ("evening_peak", self.evening_peak),
            ("pv_peak_kw", self.pv_peak_kw),
            ("pv_winter_fraction", self.pv_winter_fraction),
            ("daylight_min_hours", self.daylight_min_hours),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GeneratorError::InvalidParam {
                    name,
                    requirement: "positive",
                    value,
                });
            }
        }
        let unit = [
            ("winter_uplift", self.winter_uplift),
            ("load_noise", self.load_noise),
            ("pv_winter_fraction", self.pv_winter_fraction),
            ("cloudiness", self.cloudiness),
            ("pv_noise", self.pv_noise),
        ];
        for (name, value) in unit {
            if !(0.0..=1.0).contains(&value) {
                return Err(GeneratorError::InvalidParam {
                    name,
                    requirement: "in [0, 1]",
                    value,
                });
            }
        }
        if !(self.load_min_kw >= 0.0) {
            return Err(GeneratorError::InvalidParam {
                name: "load_min_kw",
                requirement: "non-negative",
                value: self.load_min_kw,
            });
        }
        // Night hours 00:00-04:00 stay dark: sunrise never earlier than 04:00.
        if !(self.daylight_max_hours >= self.daylight_min_hours && self.daylight_max_hours <= 17.0)
        {
            return Err(GeneratorError::InvalidParam {
                name: "daylight_max_hours",
                requirement: "between daylight_min_hours and 17",
                value: self.daylight_max_hours,
            });
        }
        Ok(())
    }
}

const SOLAR_NOON_HOUR: f64 = 12.5;

/// Seasonal factor in [0, 1]: 0 at midsummer (day 172), 1 at midwinter.
fn winterness(day: usize) -> f64 {
    0.5 * (1.0 - (2.0 * PI * (day as f64 - 172.0) / DAYS_PER_YEAR as f64).cos())
}

fn bump(hour: f64, center: f64, width: f64) -> f64 {
    let z = (hour - center) / width;
    (-0.5 * z * z).exp()
}

fn rng_for(seed: u64, kind: SeriesKind) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(match kind {
        SeriesKind::Load => 1,
        SeriesKind::Pv => 2,
    });
    rng
}

fn load_year(rng: &mut ChaCha8Rng, p: &GeneratorParams) -> Vec<f64> {
    let band = p.load_max_kw - p.load_min_kw;
    let shape_max = 0.35 + p.morning_peak.max(p.evening_peak) + p.winter_uplift + p.load_noise;
    let mut out = Vec::with_capacity(DAYS_PER_YEAR * SLOTS_PER_DAY);
    for day in 1..=DAYS_PER_YEAR {
        let w = winterness(day);
        let day_level: f64 = 0.8 + 0.4 * rng.gen::<f64>();
        for slot in 0..SLOTS_PER_DAY {
            let hour = (slot as f64 + 0.5) * SLOT_HOURS;
            let shape = 0.1
                + 0.25 * bump(hour, 13.0, 4.0)
                + p.morning_peak * bump(hour, 7.5, 1.0)
                + p.evening_peak * bump(hour, 19.0, 1.6) * (0.6 + 0.4 * w)
                + p.winter_uplift * w;
            let noise = p.load_noise * (2.0 * rng.gen::<f64>() - 1.0);
            let frac = ((shape * day_level + noise) / shape_max).clamp(0.0, 1.0);
            out.push(p.load_min_kw + band * frac);
        }
    }
    out
}

fn pv_year(rng: &mut ChaCha8Rng, p: &GeneratorParams) -> Vec<f64> {
    let mut out = Vec::with_capacity(DAYS_PER_YEAR * SLOTS_PER_DAY);
    for day in 1..=DAYS_PER_YEAR {
        let w = winterness(day);
        let daylight = p.daylight_max_hours - (p.daylight_max_hours - p.daylight_min_hours) * w;
        let sunrise = SOLAR_NOON_HOUR - daylight / 2.0;
        let amplitude = p.pv_peak_kw * (1.0 - (1.0 - p.pv_winter_fraction) * w);
        let cloud = 1.0 - p.cloudiness * rng.gen::<f64>();
        for slot in 0..SLOTS_PER_DAY {
            let flicker = 1.0 - p.pv_noise * rng.gen::<f64>();
            let hour = (slot as f64 + 0.5) * SLOT_HOURS;
            let phase = (hour - sunrise) / daylight;
            let v = if phase > 0.0 && phase < 1.0 {
                amplitude * cloud * flicker * (PI * phase).sin().powf(1.5)
            } else {
                0.0
            };
            out.push(v);
        }
    }
    out
}

/// Generates one synthetic year. Same `(seed, kind, params)` gives the same
/// series bit for bit.
pub fn generate_synthetic(
    seed: u64,
    kind: SeriesKind,
    params: &GeneratorParams,
) -> Result<YearSeries, GeneratorError> {
    params.validate()?;
    let mut rng = rng_for(seed, kind);
    let samples = match kind {
        SeriesKind::Load => load_year(&mut rng, params),
        SeriesKind::Pv => pv_year(&mut rng, params),
    };
    Ok(YearSeries::new(kind, samples).expect("generator emits finite non-negative samples"))
}

/// A year in which every day repeats `base + amplitude * sin(2π·slot/48)`.
/// Noise-free; used for forecaster learnability checks.
pub fn daily_sinusoid(kind: SeriesKind, base: f64, amplitude: f64) -> YearSeries {
    let day: Vec<f64> = (0..SLOTS_PER_DAY)
        .map(|s| base + amplitude * (2.0 * PI * s as f64 / SLOTS_PER_DAY as f64).sin())
        .collect();
    let samples = day
        .iter()
        .copied()
        .cycle()
        .take(DAYS_PER_YEAR * SLOTS_PER_DAY)
        .collect();
    YearSeries::new(kind, samples).expect("sinusoid must stay non-negative")
}
