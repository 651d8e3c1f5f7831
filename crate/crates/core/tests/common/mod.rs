//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the dispatch, battery or cost
//! code under test; only plain numbers go in and out.

#![allow(dead_code, clippy::needless_range_loop)]

use dispatchkit::battery::BatterySpec;
use dispatchkit::dispatch::{DispatchDecision, DispatchTrace};
use dispatchkit::series::{SeriesKind, YearSeries, SLOTS_PER_DAY};
use dispatchkit::synth::{generate_synthetic, GeneratorParams};
use dispatchkit::tariff::TariffSchedule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain copy of the battery and tariff numbers.
#[derive(Debug, Clone, Copy)]
pub struct Plant {
    pub capacity: f64,
    pub p_ch: f64,
    pub p_dis: f64,
    pub eta_c: f64,
    pub eta_d: f64,
    pub soc_lo: f64,
    pub soc_hi: f64,
    pub soc0: f64,
    pub off_start: usize,
    pub off_end: usize,
    pub rate_peak: f64,
    pub rate_off: f64,
    pub rate_export: f64,
}

impl Plant {
    pub fn new(spec: &BatterySpec, tariff: &TariffSchedule) -> Self {
        let (s, e) = tariff.offpeak_window();
        Plant {
            capacity: spec.capacity,
            p_ch: spec.p_charge_max,
            p_dis: spec.p_discharge_max,
            eta_c: spec.eta_charge,
            eta_d: spec.eta_discharge,
            soc_lo: spec.soc_min_frac * spec.capacity,
            soc_hi: spec.soc_max_frac * spec.capacity,
            soc0: spec.soc_init_frac * spec.capacity,
            off_start: s as usize,
            off_end: e as usize,
            rate_peak: tariff.rate_peak(),
            rate_off: tariff.rate_offpeak(),
            rate_export: tariff.rate_export(),
        }
    }

    /// Slot-of-day `k` (0..48) is off-peak.
    pub fn offpeak(&self, k: usize) -> bool {
        self.off_start <= k && k < self.off_end
    }
}

/// Rule-by-rule dispatch with battery, written out longhand.
/// `first_slot_of_day` is the slot-of-day of element 0.
/// Returns decisions and the SoC after each slot.
pub fn oracle_pv_batt(
    p: &Plant,
    first_slot_of_day: usize,
    load: &[f64],
    pv: &[f64],
) -> (Vec<[f64; 5]>, Vec<f64>) {
    let mut soc = p.soc0;
    let mut out = Vec::new();
    let mut socs = Vec::new();
    for i in 0..load.len() {
        let k = (first_slot_of_day + i) % 48;
        let l = load[i];
        let g = pv[i];
        let mut pv_to_load = g;
        if l < g {
            pv_to_load = l;
        }
        let surplus = g - pv_to_load;
        let short = l - pv_to_load;

        let mut room = (p.soc_hi - soc) / (p.eta_c * 0.5);
        if room < 0.0 {
            room = 0.0;
        }
        let mut can_charge = p.p_ch;
        if room < can_charge {
            can_charge = room;
        }
        let mut pv_to_batt = surplus;
        if can_charge < pv_to_batt {
            pv_to_batt = can_charge;
        }
        let pv_to_grid = surplus - pv_to_batt;

        let mut batt_to_load = 0.0;
        if !p.offpeak(k) {
            let mut stored = (soc - p.soc_lo) * p.eta_d / 0.5;
            if stored < 0.0 {
                stored = 0.0;
            }
            let mut can_dis = p.p_dis;
            if stored < can_dis {
                can_dis = stored;
            }
            batt_to_load = short;
            if can_dis < batt_to_load {
                batt_to_load = can_dis;
            }
        }
        let grid_to_load = short - batt_to_load;

        if pv_to_batt != 0.0 || batt_to_load != 0.0 {
            soc = soc + p.eta_c * pv_to_batt * 0.5 - batt_to_load * 0.5 / p.eta_d;
            if soc < p.soc_lo {
                soc = p.soc_lo;
            }
            if soc > p.soc_hi {
                soc = p.soc_hi;
            }
        }
        out.push([
            pv_to_load,
            pv_to_batt,
            pv_to_grid,
            batt_to_load,
            grid_to_load,
        ]);
        socs.push(soc);
    }
    (out, socs)
}

pub fn fields(d: &DispatchDecision) -> [f64; 5] {
    [
        d.pv_to_load,
        d.pv_to_batt,
        d.pv_to_grid,
        d.batt_to_load,
        d.grid_to_load,
    ]
}

/// Net cost of a list of flows by direct summation, with the tariff decided
/// by slot-of-day. Returns (peak, offpeak, export, net).
pub fn reprice(p: &Plant, first_slot_of_day: usize, flows: &[[f64; 5]]) -> (f64, f64, f64, f64) {
    let (mut peak, mut off, mut exp) = (0.0, 0.0, 0.0);
    for (i, f) in flows.iter().enumerate() {
        let k = (first_slot_of_day + i) % 48;
        if p.offpeak(k) {
            off += f[4] * 0.5 * p.rate_off;
        } else {
            peak += f[4] * 0.5 * p.rate_peak;
        }
        exp += f[2] * 0.5 * p.rate_export;
    }
    (peak, off, exp, peak + off - exp)
}

pub fn trace_flows(trace: &DispatchTrace) -> Vec<[f64; 5]> {
    trace.decisions.iter().map(fields).collect()
}

pub fn year(seed: u64, params: &GeneratorParams) -> (YearSeries, YearSeries) {
    (
        generate_synthetic(seed, SeriesKind::Load, params).unwrap(),
        generate_synthetic(seed, SeriesKind::Pv, params).unwrap(),
    )
}

/// Random but valid generator shape.
pub fn random_params(rng: &mut ChaCha8Rng) -> GeneratorParams {
    let lo = rng.gen_range(0.05..0.5);
    GeneratorParams {
        load_min_kw: lo,
        load_max_kw: lo + rng.gen_range(0.3..3.0),
        morning_peak: rng.gen_range(0.0..1.0),
        evening_peak: rng.gen_range(0.0..1.0),
        winter_uplift: rng.gen_range(0.0..0.5),
        load_noise: rng.gen_range(0.0..0.3),
        pv_peak_kw: rng.gen_range(0.5..6.0),
        pv_winter_fraction: rng.gen_range(0.1..1.0),
        daylight_min_hours: rng.gen_range(6.0..10.0),
        daylight_max_hours: rng.gen_range(12.0..17.0),
        cloudiness: rng.gen_range(0.0..1.0),
        pv_noise: rng.gen_range(0.0..0.5),
    }
}

/// Random but valid battery.
pub fn random_battery(rng: &mut ChaCha8Rng) -> BatterySpec {
    let lo = rng.gen_range(0.0..0.3);
    let hi = rng.gen_range(0.7..1.0);
    BatterySpec {
        capacity: rng.gen_range(1.0..15.0),
        p_charge_max: rng.gen_range(0.5..6.0),
        p_discharge_max: rng.gen_range(0.5..6.0),
        eta_charge: rng.gen_range(0.8..1.0),
        eta_discharge: rng.gen_range(0.8..1.0),
        soc_min_frac: lo,
        soc_max_frac: hi,
        soc_init_frac: rng.gen_range(lo..hi),
    }
}

/// Random tariff with peak dearer than off-peak.
pub fn random_tariff(rng: &mut ChaCha8Rng) -> TariffSchedule {
    let off = rng.gen_range(0.03..0.15);
    let peak = off + rng.gen_range(0.01..0.3);
    let start = rng.gen_range(0..20u8);
    let end = start + rng.gen_range(4..20u8);
    TariffSchedule::new(peak, off, rng.gen_range(0.0..0.1), start, end).unwrap()
}

/// Copies `spec` with the battery starting at its floor.
pub fn floor_start(spec: &BatterySpec) -> BatterySpec {
    BatterySpec {
        soc_init_frac: spec.soc_min_frac,
        ..spec.clone()
    }
}

/// Makes the last `slots` samples dark with demand of at least `kw`, so a
/// battery discharges over every peak slot among them until it reaches its
/// floor.
pub fn add_dark_tail(load: &mut [f64], pv: &mut [f64], slots: usize, kw: f64) {
    let n = load.len();
    for i in n - slots..n {
        load[i] = load[i].max(kw);
        pv[i] = 0.0;
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const DAY: usize = SLOTS_PER_DAY;

/// Relative error floor for the gradient check. Below this magnitude
/// central differences are dominated by rounding of the loss.
pub const GRAD_REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct GradCheck {
    pub params: usize,
    pub max_rel: f64,
    pub max_abs: f64,
}

/// Compares BPTT gradients with central differences (step `eps`) on a
/// random small network. Every parameter is probed.
pub fn gradient_check(seed: u64, eps: f64) -> GradCheck {
    use dispatchkit::forecast::{backward, forward, LstmDims, LstmParams};

    let mut r = rng(seed);
    let dims = LstmDims {
        input: r.gen_range(1..=3),
        hidden: r.gen_range(1..=4),
        output: r.gen_range(1..=3),
    };
    let steps = r.gen_range(1..=8);
    let mut params = LstmParams::init(dims, seed);
    // Move away from the symmetric initialisation so every path carries
    // gradient.
    params.for_each_array_mut(|_, a| a.iter_mut().for_each(|v| *v += r.gen_range(-0.5..0.5)));
    let input: Vec<f64> = (0..steps * dims.input)
        .map(|_| r.gen_range(-1.0..1.0))
        .collect();
    let target: Vec<f64> = (0..dims.output).map(|_| r.gen_range(-1.0..1.0)).collect();

    let loss = |p: &LstmParams| {
        let y = forward(p, &input).unwrap();
        y.iter()
            .zip(&target)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / y.len() as f64
    };
    let analytic = backward(&params, &input, &target).unwrap().grads.flatten();
    let n = analytic.len();
    let (mut max_rel, mut max_abs) = (0.0f64, 0.0f64);
    for j in 0..n {
        let probe = |delta: f64| {
            let mut p = params.clone();
            let mut idx = 0;
            p.for_each_array_mut(|_, a| {
                for v in a.iter_mut() {
                    if idx == j {
                        *v += delta;
                    }
                    idx += 1;
                }
            });
            loss(&p)
        };
        let numeric = (probe(eps) - probe(-eps)) / (2.0 * eps);
        let abs = (analytic[j] - numeric).abs();
        let rel = abs / analytic[j].abs().max(numeric.abs()).max(GRAD_REL_FLOOR);
        max_abs = max_abs.max(abs);
        max_rel = max_rel.max(rel);
    }
    GradCheck {
        params: n,
        max_rel,
        max_abs,
    }
}

/// Two-day instance on a random day with the battery at its floor and a
/// dark, demanding evening at the end so the perfect run finishes at the
/// floor as well.
pub fn two_day_instance(seed: u64) -> (u16, YearSeries, YearSeries) {
    let mut r = rng(seed);
    let day: u16 = r.gen_range(1..=364);
    let (load, pv) = year(seed, &GeneratorParams::default());
    let (mut l, mut g) = (load.samples().to_vec(), pv.samples().to_vec());
    let end = (day as usize + 1) * DAY;
    add_dark_tail(&mut l[..end], &mut g[..end], 12, 4.0);
    (
        day,
        YearSeries::new(SeriesKind::Load, l).unwrap(),
        YearSeries::new(SeriesKind::Pv, g).unwrap(),
    )
}
