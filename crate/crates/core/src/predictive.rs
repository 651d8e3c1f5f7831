//! Forecast-driven scheduling evaluated against what actually happened.
//!
//! Each day, the PV + battery dispatcher is run on the day-ahead forecasts
//! from the battery's current (realized) state. Its battery flows are then
//! replayed against the actual load and PV, clamped to what is physically
//! possible: charging never exceeds the real PV surplus or the battery
//! headroom, discharging never exceeds the real deficit or the stored energy.
//! The grid covers or absorbs the remainder. The realized trace is priced
//! normally and compared with the perfect-information run over the same days.

use std::fmt::Write as _;

use thiserror::Error;

use crate::battery::{BatterySpec, BatteryState};
use crate::cost::{cost_of_trace, CostReport};
use crate::dispatch::{run_from, DispatchDecision, DispatchError, DispatchTrace, ScenarioCase};
use crate::forecast::{ForecastError, TrainedModel, HISTORY_DAYS};
use crate::metrics::{evaluate, FitReport};
use crate::series::{TimeSlot, YearSeries, DAYS_PER_YEAR, SLOTS_PER_DAY};
use crate::tariff::TariffSchedule;

#[derive(Debug, Error)]
pub enum PredictiveError {
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error("invalid day span {first}..={last}")]
    Span { first: u16, last: u16 },
    #[error("forecaster returned {0} values for a day")]
    ForecastLength(usize),
}

/// Produces 48 kW values for `day` of `series`. Implementations that model
/// real forecasting must only look at earlier days.
pub trait DayAheadForecaster {
    fn forecast_day(&self, series: &YearSeries, day: u16) -> Result<Vec<f64>, ForecastError>;
}

/// Trained LSTM fed with the 29 days before the target.
impl DayAheadForecaster for TrainedModel {
    fn forecast_day(&self, series: &YearSeries, day: u16) -> Result<Vec<f64>, ForecastError> {
        if (day as usize) <= HISTORY_DAYS {
            return Err(ForecastError::InsufficientHistory {
                needed_days: HISTORY_DAYS,
                got_slots: (day as usize - 1) * SLOTS_PER_DAY,
            });
        }
        self.predict_day(series.days(day - HISTORY_DAYS as u16, day - 1))
    }
}

/// Returns the actual day (perfect foresight).
pub struct OracleForecaster;

impl DayAheadForecaster for OracleForecaster {
    fn forecast_day(&self, series: &YearSeries, day: u16) -> Result<Vec<f64>, ForecastError> {
        Ok(series.day(day).to_vec())
    }
}

/// Always predicts zero.
pub struct ZeroForecaster;

impl DayAheadForecaster for ZeroForecaster {
    fn forecast_day(&self, _series: &YearSeries, _day: u16) -> Result<Vec<f64>, ForecastError> {
        Ok(vec![0.0; SLOTS_PER_DAY])
    }
}

/// Replays planned battery flows against actual power in one slot.
pub fn realize_slot(
    spec: &BatterySpec,
    state: BatteryState,
    slot: TimeSlot,
    planned: &DispatchDecision,
    p_pv: f64,
    p_load: f64,
) -> Result<(DispatchDecision, BatteryState), DispatchError> {
    let pv_to_load = p_pv.min(p_load);
    let excess = p_pv - pv_to_load;
    let deficit = p_load - pv_to_load;
    let pv_to_batt = planned
        .pv_to_batt
        .min(excess)
        .min(spec.max_charge_power(state));
    let batt_to_load = planned
        .batt_to_load
        .min(deficit)
        .min(spec.max_discharge_power(state));
    let d = DispatchDecision {
        pv_to_load,
        pv_to_batt,
        pv_to_grid: excess - pv_to_batt,
        batt_to_load,
        grid_to_load: deficit - batt_to_load,
    };
    let next = spec
        .apply(state, pv_to_batt, batt_to_load)
        .map_err(|source| DispatchError::Battery { slot, source })?;
    Ok((d, next))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayOutcome {
    pub day: u16,
    pub forecast_net_cost: f64,
    pub perfect_net_cost: f64,
    pub load_fit: Option<FitReport>,
    pub pv_fit: Option<FitReport>,
}

#[derive(Debug, Clone)]
pub struct PredictiveReport {
    pub first_day: u16,
    pub last_day: u16,
    pub days: Vec<DayOutcome>,
    pub forecast_trace: DispatchTrace,
    pub perfect_trace: DispatchTrace,
    pub forecast_cost: CostReport,
    pub perfect_cost: CostReport,
}

impl PredictiveReport {
    /// Forecast-scheduled net cost minus perfect-information net cost.
    pub fn gap(&self) -> f64 {
        self.forecast_cost.net_cost - self.perfect_cost.net_cost
    }

    /// Per-day rows plus a `total` row.
    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("day,forecast_net_cost,perfect_net_cost,gap,load_rmse_kw,pv_rmse_kw\n");
        let rmse = |f: &Option<FitReport>| f.map_or_else(String::new, |f| format!("{:.6}", f.rmse));
        for d in &self.days {
            let _ = writeln!(
                s,
                "{},{:.4},{:.4},{:.4},{},{}",
                d.day,
                d.forecast_net_cost,
                d.perfect_net_cost,
                d.forecast_net_cost - d.perfect_net_cost,
                rmse(&d.load_fit),
                rmse(&d.pv_fit)
            );
        }
        let _ = writeln!(
            s,
            "total,{:.4},{:.4},{:.4},,",
            self.forecast_cost.net_cost,
            self.perfect_cost.net_cost,
            self.gap()
        );
        s
    }
}

fn day_trace(trace: &DispatchTrace, offset_days: usize) -> DispatchTrace {
    let a = offset_days * SLOTS_PER_DAY;
    DispatchTrace {
        case: trace.case,
        start: trace.start + a,
        decisions: trace.decisions[a..a + SLOTS_PER_DAY].to_vec(),
        soc_series: trace.soc_series[a..=a + SLOTS_PER_DAY].to_vec(),
    }
}

/// Runs forecast-driven and perfect-information scheduling over
/// `first_day..=last_day`, both starting from the battery's initial SoC.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_predictive(
    first_day: u16,
    last_day: u16,
    load: &YearSeries,
    pv: &YearSeries,
    tariff: &TariffSchedule,
    spec: &BatterySpec,
    load_forecaster: &dyn DayAheadForecaster,
    pv_forecaster: &dyn DayAheadForecaster,
) -> Result<PredictiveReport, PredictiveError> {
    if first_day < 1 || first_day > last_day || last_day as usize > DAYS_PER_YEAR {
        return Err(PredictiveError::Span {
            first: first_day,
            last: last_day,
        });
    }
    let start = TimeSlot::new(first_day, 0).expect("checked span");
    let perfect_trace = run_from(
        ScenarioCase::PvGridBattery,
        tariff,
        spec,
        start,
        spec.initial_state(),
        load.days(first_day, last_day),
        pv.days(first_day, last_day),
    )?;

    let mut state = spec.initial_state();
    let mut decisions = Vec::with_capacity(perfect_trace.decisions.len());
    let mut soc_series = vec![state.soc];
    let mut fits = Vec::new();
    for day in first_day..=last_day {
        let f_load = load_forecaster.forecast_day(load, day)?;
        let f_pv = pv_forecaster.forecast_day(pv, day)?;
        for f in [&f_load, &f_pv] {
            if f.len() != SLOTS_PER_DAY {
                return Err(PredictiveError::ForecastLength(f.len()));
            }
        }
        let plan_start = TimeSlot::new(day, 0).expect("checked span");
        let plan = run_from(
            ScenarioCase::PvGridBattery,
            tariff,
            spec,
            plan_start,
            state,
            &f_load,
            &f_pv,
        )?;
        let (actual_load, actual_pv) = (load.day(day), pv.day(day));
        for (k, planned) in plan.decisions.iter().enumerate() {
            let (d, next) = realize_slot(
                spec,
                state,
                plan.slot_at(k),
                planned,
                actual_pv[k],
                actual_load[k],
            )?;
            decisions.push(d);
            soc_series.push(next.soc);
            state = next;
        }
        fits.push((
            evaluate(actual_load, &f_load).ok(),
            evaluate(actual_pv, &f_pv).ok(),
        ));
    }
    let forecast_trace = DispatchTrace {
        case: ScenarioCase::PvGridBattery,
        start: start.index(),
        decisions,
        soc_series,
    };

    let days = (first_day..=last_day)
        .zip(fits)
        .enumerate()
        .map(|(i, (day, (load_fit, pv_fit)))| DayOutcome {
            day,
            forecast_net_cost: cost_of_trace(&day_trace(&forecast_trace, i), tariff).net_cost,
            perfect_net_cost: cost_of_trace(&day_trace(&perfect_trace, i), tariff).net_cost,
            load_fit,
            pv_fit,
        })
        .collect();

    Ok(PredictiveReport {
        first_day,
        last_day,
        days,
        forecast_cost: cost_of_trace(&forecast_trace, tariff),
        perfect_cost: cost_of_trace(&perfect_trace, tariff),
        forecast_trace,
        perfect_trace,
    })
}
