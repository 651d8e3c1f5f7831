//! Energy-reservoir battery with SoC window, power limits and one-way
//! efficiencies. All powers are AC-side kW held for one 30 minute slot.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::config::{ConfigError, KeyValues};
use crate::series::SLOT_HOURS;

/// Slack allowed when checking requested flows against the computed limits.
pub const LIMIT_TOLERANCE_KW: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum BatteryError {
    #[error("simultaneous charge ({charge_kw} kW) and discharge ({discharge_kw} kW)")]
    SimultaneousFlow { charge_kw: f64, discharge_kw: f64 },
    #[error("charge {requested_kw} kW exceeds limit {limit_kw} kW")]
    ChargeLimit { requested_kw: f64, limit_kw: f64 },
    #[error("discharge {requested_kw} kW exceeds limit {limit_kw} kW")]
    DischargeLimit { requested_kw: f64, limit_kw: f64 },
    #[error("negative flow request")]
    NegativeFlow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatterySpec {
    pub capacity: f64,
    pub p_charge_max: f64,
    pub p_discharge_max: f64,
    pub eta_charge: f64,
    pub eta_discharge: f64,
    pub soc_min_frac: f64,
    pub soc_max_frac: f64,
    pub soc_init_frac: f64,
}

impl Default for BatterySpec {
    fn default() -> Self {
        Self {
            capacity: 4.0,
            p_charge_max: 3.0,
            p_discharge_max: 3.0,
            eta_charge: 0.95,
            eta_discharge: 0.95,
            soc_min_frac: 0.1,
            soc_max_frac: 1.0,
            soc_init_frac: 0.5,
        }
    }
}

const KEYS: [&str; 8] = [
    "capacity",
    "p_charge_max",
    "p_discharge_max",
    "eta_charge",
    "eta_discharge",
    "soc_min_frac",
    "soc_max_frac",
    "soc_init_frac",
];

impl BatterySpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !(self.capacity > 0.0 && self.capacity.is_finite()) {
            return bad(format!("capacity must be positive, got {}", self.capacity));
        }
        for (name, p) in [
            ("p_charge_max", self.p_charge_max),
            ("p_discharge_max", self.p_discharge_max),
        ] {
            if !(p >= 0.0 && p.is_finite()) {
                return bad(format!("{name} must be non-negative, got {p}"));
            }
        }
        for (name, eta) in [
            ("eta_charge", self.eta_charge),
            ("eta_discharge", self.eta_discharge),
        ] {
            if !(eta > 0.0 && eta <= 1.0) {
                return bad(format!("{name} must be in (0, 1], got {eta}"));
            }
        }
        if !(0.0..1.0).contains(&self.soc_min_frac) {
            return bad(format!(
                "soc_min_frac must be in [0, 1), got {}",
                self.soc_min_frac
            ));
        }
        if !(self.soc_max_frac > 0.0 && self.soc_max_frac <= 1.0) {
            return bad(format!(
                "soc_max_frac must be in (0, 1], got {}",
                self.soc_max_frac
            ));
        }
        if self.soc_min_frac >= self.soc_max_frac {
            return bad("soc_min_frac must be below soc_max_frac".into());
        }
        if !(self.soc_min_frac..=self.soc_max_frac).contains(&self.soc_init_frac) {
            return bad(format!(
                "soc_init_frac {} outside [{}, {}]",
                self.soc_init_frac, self.soc_min_frac, self.soc_max_frac
            ));
        }
        Ok(())
    }

    pub fn soc_floor(&self) -> f64 {
        self.soc_min_frac * self.capacity
    }

    pub fn soc_ceiling(&self) -> f64 {
        self.soc_max_frac * self.capacity
    }

    pub fn initial_state(&self) -> BatteryState {
        BatteryState {
            soc: self.soc_init_frac * self.capacity,
        }
    }

    /// Largest charging power that fits under the SoC ceiling in one slot.
    pub fn max_charge_power(&self, state: BatteryState) -> f64 {
        let headroom = (self.soc_ceiling() - state.soc).max(0.0);
        self.p_charge_max
            .min(headroom / (self.eta_charge * SLOT_HOURS))
    }

    /// Largest discharging power that keeps SoC above the floor for one slot.
    pub fn max_discharge_power(&self, state: BatteryState) -> f64 {
        let available = (state.soc - self.soc_floor()).max(0.0);
        self.p_discharge_max
            .min(available * self.eta_discharge / SLOT_HOURS)
    }

    /// Advances the state by one slot. At most one of the flows may be
    /// positive and each must be within its limit (up to
    /// [`LIMIT_TOLERANCE_KW`]). The result is clamped into the SoC window to
    /// absorb rounding.
    pub fn apply(
        &self,
        state: BatteryState,
        charge_kw: f64,
        discharge_kw: f64,
    ) -> Result<BatteryState, BatteryError> {
        if charge_kw < 0.0 || discharge_kw < 0.0 {
            return Err(BatteryError::NegativeFlow);
        }
        if charge_kw > 0.0 && discharge_kw > 0.0 {
            return Err(BatteryError::SimultaneousFlow {
                charge_kw,
                discharge_kw,
            });
        }
        let charge_limit = self.max_charge_power(state);
        if charge_kw > charge_limit + LIMIT_TOLERANCE_KW {
            return Err(BatteryError::ChargeLimit {
                requested_kw: charge_kw,
                limit_kw: charge_limit,
            });
        }
        let discharge_limit = self.max_discharge_power(state);
        if discharge_kw > discharge_limit + LIMIT_TOLERANCE_KW {
            return Err(BatteryError::DischargeLimit {
                requested_kw: discharge_kw,
                limit_kw: discharge_limit,
            });
        }
        if charge_kw == 0.0 && discharge_kw == 0.0 {
            return Ok(state);
        }
        let soc = state.soc + self.eta_charge * charge_kw * SLOT_HOURS
            - discharge_kw * SLOT_HOURS / self.eta_discharge;
        Ok(BatteryState {
            soc: soc.clamp(self.soc_floor(), self.soc_ceiling()),
        })
    }

    pub fn from_key_values(kv: &KeyValues) -> Result<Self, ConfigError> {
        kv.ensure_known(&KEYS)?;
        let mut spec = Self::default();
        kv.override_f64("capacity", &mut spec.capacity)?;
        kv.override_f64("p_charge_max", &mut spec.p_charge_max)?;
        kv.override_f64("p_discharge_max", &mut spec.p_discharge_max)?;
        kv.override_f64("eta_charge", &mut spec.eta_charge)?;
        kv.override_f64("eta_discharge", &mut spec.eta_discharge)?;
        kv.override_f64("soc_min_frac", &mut spec.soc_min_frac)?;
        kv.override_f64("soc_max_frac", &mut spec.soc_max_frac)?;
        kv.override_f64("soc_init_frac", &mut spec.soc_init_frac)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_key_values(&KeyValues::read(path)?)
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        for (k, v) in KEYS.iter().zip([
            self.capacity,
            self.p_charge_max,
            self.p_discharge_max,
            self.eta_charge,
            self.eta_discharge,
            self.soc_min_frac,
            self.soc_max_frac,
            self.soc_init_frac,
        ]) {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

/// Energy currently stored, in kWh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryState {
    pub soc: f64,
}
