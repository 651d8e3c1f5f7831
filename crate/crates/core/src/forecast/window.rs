use crate::series::{YearSeries, DAYS_PER_YEAR, SLOTS_PER_DAY};

use super::ForecastError;

/// Days of history fed to the network for each next-day target.
pub const HISTORY_DAYS: usize = 29;
/// Input sequence length in slots.
pub const HISTORY_SLOTS: usize = HISTORY_DAYS * SLOTS_PER_DAY;

/// Min-max scaling to `[0, 1]`, fitted on training data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizer {
    min: f64,
    max: f64,
}

impl Normalizer {
    pub fn new(min: f64, max: f64) -> Result<Self, ForecastError> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(ForecastError::Degenerate(format!(
                "normalizer needs max > min, got [{min}, {max}]"
            )));
        }
        Ok(Self { min, max })
    }

    pub fn fit(values: impl IntoIterator<Item = f64>) -> Result<Self, ForecastError> {
        let (lo, hi) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        Self::new(lo, hi)
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn normalize(&self, kw: f64) -> f64 {
        (kw - self.min) / (self.max - self.min)
    }

    pub fn denormalize(&self, y: f64) -> f64 {
        self.min + y * (self.max - self.min)
    }
}

/// 29 days of history (flattened, time order) and the following day.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub target_day: u16,
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// First day that has a full history behind it.
pub const FIRST_TARGET_DAY: u16 = HISTORY_DAYS as u16 + 1;

/// Number of window samples in a year.
pub const WINDOWS_PER_YEAR: usize = DAYS_PER_YEAR - HISTORY_DAYS;

/// All raw (un-normalized) days a window touches, inclusive.
pub fn window_days(target_day: u16) -> std::ops::RangeInclusive<u16> {
    (target_day - HISTORY_DAYS as u16)..=target_day
}

pub fn make_window(series: &YearSeries, normalizer: &Normalizer, target_day: u16) -> WindowSample {
    let first = target_day - HISTORY_DAYS as u16;
    let norm = |v: &f64| normalizer.normalize(*v);
    WindowSample {
        target_day,
        input: series
            .days(first, target_day - 1)
            .iter()
            .map(norm)
            .collect(),
        target: series.day(target_day).iter().map(norm).collect(),
    }
}

/// One sample per target day 30..=365, in day order.
pub fn make_windows(series: &YearSeries, normalizer: &Normalizer) -> Vec<WindowSample> {
    (FIRST_TARGET_DAY..=DAYS_PER_YEAR as u16)
        .map(|d| make_window(series, normalizer, d))
        .collect()
}
