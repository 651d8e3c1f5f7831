//! Two-rate time-of-use tariff (Economy 7 shape) with a flat export rate.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::{ConfigError, KeyValues};
use crate::series::{TimeSlot, SLOTS_PER_DAY};

/// Whether a slot falls in the cheap or the expensive part of the day.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateClass {
    Peak,
    OffPeak,
}

/// Import/export prices in £/kWh and the off-peak window `[start, end)` in
/// slots of the day. The window is a single range that does not wrap.
#[derive(Debug, Clone, PartialEq)]
pub struct TariffSchedule {
    rate_peak: f64,
    rate_offpeak: f64,
    rate_export: f64,
    offpeak_start: u8,
    offpeak_end: u8,
}

impl Default for TariffSchedule {
    /// 0.16 / 0.08 £/kWh import with a 7 hour night window (00:00-07:00) and
    /// 0.04 £/kWh export.
    fn default() -> Self {
        Self {
            rate_peak: 0.16,
            rate_offpeak: 0.08,
            rate_export: 0.04,
            offpeak_start: 0,
            offpeak_end: 14,
        }
    }
}

const KEYS: [&str; 5] = [
    "rate_peak",
    "rate_offpeak",
    "rate_export",
    "offpeak_start_slot",
    "offpeak_end_slot",
];

impl TariffSchedule {
    pub fn new(
        rate_peak: f64,
        rate_offpeak: f64,
        rate_export: f64,
        offpeak_start: u8,
        offpeak_end: u8,
    ) -> Result<Self, ConfigError> {
        for (name, r) in [
            ("rate_peak", rate_peak),
            ("rate_offpeak", rate_offpeak),
            ("rate_export", rate_export),
        ] {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(ConfigError::Invalid(format!(
                    "{name} must be a finite non-negative rate, got {r}"
                )));
            }
        }
        if rate_offpeak > rate_peak {
            return Err(ConfigError::Invalid(format!(
                "rate_offpeak ({rate_offpeak}) exceeds rate_peak ({rate_peak})"
            )));
        }
        if offpeak_start >= offpeak_end || offpeak_end as usize > SLOTS_PER_DAY {
            return Err(ConfigError::Invalid(format!(
                "off-peak window [{offpeak_start}, {offpeak_end}) must be non-empty within [0, 48)"
            )));
        }
        Ok(Self {
            rate_peak,
            rate_offpeak,
            rate_export,
            offpeak_start,
            offpeak_end,
        })
    }

    pub fn rate_peak(&self) -> f64 {
        self.rate_peak
    }

    pub fn rate_offpeak(&self) -> f64 {
        self.rate_offpeak
    }

    pub fn rate_export(&self) -> f64 {
        self.rate_export
    }

    pub fn offpeak_window(&self) -> (u8, u8) {
        (self.offpeak_start, self.offpeak_end)
    }

    /// Same windows with every rate multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self, ConfigError> {
        Self::new(
            self.rate_peak * k,
            self.rate_offpeak * k,
            self.rate_export * k,
            self.offpeak_start,
            self.offpeak_end,
        )
    }

    pub fn class_of(&self, slot: TimeSlot) -> RateClass {
        if (self.offpeak_start..self.offpeak_end).contains(&slot.slot()) {
            RateClass::OffPeak
        } else {
            RateClass::Peak
        }
    }

    pub fn is_peak(&self, slot: TimeSlot) -> bool {
        self.class_of(slot) == RateClass::Peak
    }

    pub fn import_rate(&self, slot: TimeSlot) -> f64 {
        match self.class_of(slot) {
            RateClass::Peak => self.rate_peak,
            RateClass::OffPeak => self.rate_offpeak,
        }
    }

    /// Price applied to whatever crosses the meter in this slot: the import
    /// rate when load exceeds PV, the export rate when PV exceeds load, and 0
    /// when they balance.
    pub fn slot_price(&self, slot: TimeSlot, p_load: f64, p_pv: f64) -> f64 {
        if p_load > p_pv {
            self.import_rate(slot)
        } else if p_pv > p_load {
            self.rate_export
        } else {
            0.0
        }
    }

    pub fn from_key_values(kv: &KeyValues) -> Result<Self, ConfigError> {
        kv.ensure_known(&KEYS)?;
        let d = Self::default();
        Self::new(
            kv.get("rate_peak")?.unwrap_or(d.rate_peak),
            kv.get("rate_offpeak")?.unwrap_or(d.rate_offpeak),
            kv.get("rate_export")?.unwrap_or(d.rate_export),
            kv.get("offpeak_start_slot")?.unwrap_or(d.offpeak_start),
            kv.get("offpeak_end_slot")?.unwrap_or(d.offpeak_end),
        )
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_key_values(&KeyValues::read(path)?)
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rate_peak={}", self.rate_peak);
        let _ = writeln!(s, "rate_offpeak={}", self.rate_offpeak);
        let _ = writeln!(s, "rate_export={}", self.rate_export);
        let _ = writeln!(s, "offpeak_start_slot={}", self.offpeak_start);
        let _ = writeln!(s, "offpeak_end_slot={}", self.offpeak_end);
        s
    }
}
