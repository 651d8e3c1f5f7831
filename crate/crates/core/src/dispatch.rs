//! Rule-based per-slot power routing for the three household configurations.
//!
//! For the PV + battery case the order is fixed: PV serves the load first,
//! surplus charges the battery up to its limit and the rest is exported;
//! any shortfall is covered by the battery in peak slots only and by the
//! grid otherwise. The battery is never charged from the grid.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::battery::{BatteryError, BatterySpec, BatteryState};
use crate::series::{TimeSlot, YearSeries, SLOTS_PER_YEAR};
use crate::tariff::TariffSchedule;

/// Tolerance for the per-slot PV and load balance identities (kW).
pub const BALANCE_TOLERANCE_KW: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DispatchError {
    #[error("series length mismatch: load has {load} samples, pv has {pv}")]
    LengthMismatch { load: usize, pv: usize },
    #[error("battery rejected the flows at {slot}: {source}")]
    Battery {
        slot: TimeSlot,
        #[source]
        source: BatteryError,
    },
    #[error("invariant violated at {slot}: {message}")]
    Invariant { slot: TimeSlot, message: String },
    #[error("I/O error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("trace file row {row}: {message}")]
    Parse { row: u64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioCase {
    GridOnly,
    PvGrid,
    PvGridBattery,
}

impl ScenarioCase {
    pub const ALL: [ScenarioCase; 3] = [
        ScenarioCase::GridOnly,
        ScenarioCase::PvGrid,
        ScenarioCase::PvGridBattery,
    ];

    /// Short identifier used on the command line and in file names.
    pub fn key(self) -> &'static str {
        match self {
            ScenarioCase::GridOnly => "grid",
            ScenarioCase::PvGrid => "pv",
            ScenarioCase::PvGridBattery => "pv-batt",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ScenarioCase::GridOnly => "Utility grid only",
            ScenarioCase::PvGrid => "PV and utility grid",
            ScenarioCase::PvGridBattery => "PV, battery, and utility grid",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.key() == key)
    }

    pub fn uses_pv(self) -> bool {
        self != ScenarioCase::GridOnly
    }
}

impl fmt::Display for ScenarioCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Power routing for one slot, all in kW.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DispatchDecision {
    pub pv_to_load: f64,
    pub pv_to_batt: f64,
    pub pv_to_grid: f64,
    pub batt_to_load: f64,
    pub grid_to_load: f64,
}

impl DispatchDecision {
    /// Surplus PV leaving the household side of the meter or going into
    /// storage.
    pub fn pv_excess(&self) -> f64 {
        self.pv_to_batt + self.pv_to_grid
    }

    /// Checks non-negativity, both balance identities and the no
    /// simultaneous charge/discharge rule.
    pub fn check(&self, p_pv: f64, p_load: f64) -> Result<(), String> {
        let flows = [
            ("pv_to_load", self.pv_to_load),
            ("pv_to_batt", self.pv_to_batt),
            ("pv_to_grid", self.pv_to_grid),
            ("batt_to_load", self.batt_to_load),
            ("grid_to_load", self.grid_to_load),
        ];
        for (name, v) in flows {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} = {v} is not a non-negative power"));
            }
        }
        let pv_gap = self.pv_to_load + self.pv_to_batt + self.pv_to_grid - p_pv;
        if pv_gap.abs() > BALANCE_TOLERANCE_KW {
            return Err(format!("PV balance off by {pv_gap} kW"));
        }
        let load_gap = self.pv_to_load + self.batt_to_load + self.grid_to_load - p_load;
        if load_gap.abs() > BALANCE_TOLERANCE_KW {
            return Err(format!("load balance off by {load_gap} kW"));
        }
        if self.pv_to_batt > 0.0 && self.batt_to_load > 0.0 {
            return Err("battery charges and discharges in the same slot".into());
        }
        Ok(())
    }
}

/// Decisions for a run of consecutive slots plus the SoC before each slot and
/// after the last one. A full-year trace starts at index 0 and holds 17,520
/// decisions.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchTrace {
    pub case: ScenarioCase,
    /// Linear index of the first decision's slot.
    pub start: usize,
    pub decisions: Vec<DispatchDecision>,
    pub soc_series: Vec<f64>,
}

impl DispatchTrace {
    pub fn initial_soc(&self) -> f64 {
        self.soc_series[0]
    }

    pub fn terminal_soc(&self) -> f64 {
        *self.soc_series.last().expect("soc series is never empty")
    }

    /// Slot of the `i`-th decision.
    pub fn slot_at(&self, i: usize) -> TimeSlot {
        TimeSlot::from_index(self.start + i).expect("trace fits in a year")
    }

    /// Re-checks every invariant of the trace against its inputs, which are
    /// aligned with the decisions (not with the year).
    pub fn verify(
        &self,
        spec: &BatterySpec,
        load: &[f64],
        pv: &[f64],
    ) -> Result<(), DispatchError> {
        for (i, d) in self.decisions.iter().enumerate() {
            let slot = self.slot_at(i);
            let p_pv = if self.case.uses_pv() { pv[i] } else { 0.0 };
            d.check(p_pv, load[i])
                .map_err(|message| DispatchError::Invariant { slot, message })?;
            let next = spec
                .apply(
                    BatteryState {
                        soc: self.soc_series[i],
                    },
                    d.pv_to_batt,
                    d.batt_to_load,
                )
                .map_err(|source| DispatchError::Battery { slot, source })?;
            if next.soc != self.soc_series[i + 1] {
                return Err(DispatchError::Invariant {
                    slot,
                    message: "SoC series does not follow the battery model".into(),
                });
            }
        }
        let (lo, hi) = (spec.soc_floor(), spec.soc_ceiling());
        if let Some(i) = self.soc_series.iter().position(|&s| s < lo || s > hi) {
            return Err(DispatchError::Invariant {
                slot: self.slot_at(i.min(self.decisions.len().saturating_sub(1))),
                message: format!("SoC {} outside [{lo}, {hi}]", self.soc_series[i]),
            });
        }
        Ok(())
    }
}

/// Routes one slot and returns the decision with the battery state after it.
pub fn dispatch_slot(
    case: ScenarioCase,
    tariff: &TariffSchedule,
    spec: &BatterySpec,
    state: BatteryState,
    slot: TimeSlot,
    p_pv: f64,
    p_load: f64,
) -> Result<(DispatchDecision, BatteryState), DispatchError> {
    if case == ScenarioCase::GridOnly {
        let d = DispatchDecision {
            grid_to_load: p_load,
            ..Default::default()
        };
        return Ok((d, state));
    }

    let pv_to_load = p_pv.min(p_load);
    let excess = p_pv - pv_to_load;
    let deficit = p_load - pv_to_load;

    if case == ScenarioCase::PvGrid {
        let d = DispatchDecision {
            pv_to_load,
            pv_to_grid: excess,
            grid_to_load: deficit,
            ..Default::default()
        };
        return Ok((d, state));
    }

    let pv_to_batt = excess.min(spec.max_charge_power(state));
    let pv_to_grid = excess - pv_to_batt;
    let batt_to_load = if tariff.is_peak(slot) {
        deficit.min(spec.max_discharge_power(state))
    } else {
        0.0
    };
    let grid_to_load = deficit - batt_to_load;
    let next = spec
        .apply(state, pv_to_batt, batt_to_load)
        .map_err(|source| DispatchError::Battery { slot, source })?;
    Ok((
        DispatchDecision {
            pv_to_load,
            pv_to_batt,
            pv_to_grid,
            batt_to_load,
            grid_to_load,
        },
        next,
    ))
}

/// Runs the dispatcher over aligned slices whose first sample is `start`,
/// beginning from `initial`.
pub fn run_from(
    case: ScenarioCase,
    tariff: &TariffSchedule,
    spec: &BatterySpec,
    start: TimeSlot,
    initial: BatteryState,
    load: &[f64],
    pv: &[f64],
) -> Result<DispatchTrace, DispatchError> {
    if load.len() != pv.len() || start.index() + load.len() > SLOTS_PER_YEAR {
        return Err(DispatchError::LengthMismatch {
            load: load.len(),
            pv: pv.len(),
        });
    }
    let mut state = initial;
    let mut decisions = Vec::with_capacity(load.len());
    let mut soc_series = Vec::with_capacity(load.len() + 1);
    soc_series.push(state.soc);
    for (i, (&p_load, &p_pv)) in load.iter().zip(pv).enumerate() {
        let slot = TimeSlot::from_index(start.index() + i).expect("length checked");
        let (d, next) = dispatch_slot(case, tariff, spec, state, slot, p_pv, p_load)?;
        decisions.push(d);
        soc_series.push(next.soc);
        state = next;
    }
    Ok(DispatchTrace {
        case,
        start: start.index(),
        decisions,
        soc_series,
    })
}

/// Runs the dispatcher from day 1, slot 0 at the battery's initial SoC.
/// Slices may be shorter than a year.
pub fn run_slots(
    case: ScenarioCase,
    tariff: &TariffSchedule,
    spec: &BatterySpec,
    load: &[f64],
    pv: &[f64],
) -> Result<DispatchTrace, DispatchError> {
    let first = TimeSlot::new(1, 0).expect("valid slot");
    run_from(case, tariff, spec, first, spec.initial_state(), load, pv)
}

pub fn run_scenario(
    case: ScenarioCase,
    tariff: &TariffSchedule,
    spec: &BatterySpec,
    load: &YearSeries,
    pv: &YearSeries,
) -> Result<DispatchTrace, DispatchError> {
    run_slots(case, tariff, spec, load.samples(), pv.samples())
}

const TRACE_HEADER: &str =
    "day,slot,pv_to_load,pv_to_batt,pv_to_grid,batt_to_load,grid_to_load,soc_kwh";

/// Writes the plot-data CSV. `soc_kwh` is the state of charge at the end of
/// each slot.
pub fn write_trace(trace: &DispatchTrace, path: impl AsRef<Path>) -> Result<(), DispatchError> {
    let path = path.as_ref();
    let io = |source| DispatchError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let mut body = || -> std::io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for (i, d) in trace.decisions.iter().enumerate() {
            let ts = trace.slot_at(i);
            writeln!(
                w,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                ts.day(),
                ts.slot(),
                d.pv_to_load,
                d.pv_to_batt,
                d.pv_to_grid,
                d.batt_to_load,
                d.grid_to_load,
                trace.soc_series[i + 1]
            )?;
        }
        w.flush()
    };
    body().map_err(io)
}

/// Reads decisions back from a trace CSV. The SoC series is rebuilt from the
/// `soc_kwh` column with the first entry left unknown (NaN).
pub fn read_trace(
    case: ScenarioCase,
    path: impl AsRef<Path>,
) -> Result<DispatchTrace, DispatchError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DispatchError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let header_ok = reader
        .headers()
        .map(|h| h.iter().collect::<Vec<_>>().join(",") == TRACE_HEADER)
        .unwrap_or(false);
    if !header_ok {
        return Err(DispatchError::Parse {
            row: 1,
            message: format!("expected header '{TRACE_HEADER}'"),
        });
    }
    let mut decisions = Vec::new();
    let mut soc_series = vec![f64::NAN];
    for record in reader.records() {
        let record = record.map_err(|e| DispatchError::Parse {
            row: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(0, |p| p.line());
        let expected = TimeSlot::from_index(decisions.len()).ok_or(DispatchError::Parse {
            row,
            message: "more rows than slots in a year".into(),
        })?;
        let num = |i: usize| -> Result<f64, DispatchError> {
            record[i].parse::<f64>().map_err(|_| DispatchError::Parse {
                row,
                message: format!("non-numeric field '{}'", &record[i]),
            })
        };
        if num(0)? != expected.day() as f64 || num(1)? != expected.slot() as f64 {
            return Err(DispatchError::Parse {
                row,
                message: format!("expected {expected}"),
            });
        }
        decisions.push(DispatchDecision {
            pv_to_load: num(2)?,
            pv_to_batt: num(3)?,
            pv_to_grid: num(4)?,
            batt_to_load: num(5)?,
            grid_to_load: num(6)?,
        });
        soc_series.push(num(7)?);
    }
    Ok(DispatchTrace {
        case,
        start: 0,
        decisions,
        soc_series,
    })
}
