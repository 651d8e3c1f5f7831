mod common;

use common::*;
use dispatchkit::battery::BatterySpec;
use dispatchkit::predictive::{evaluate_predictive, OracleForecaster, ZeroForecaster};
use dispatchkit::tariff::TariffSchedule;

#[test]
fn oracle_injection_reproduces_perfect_information() {
    let spec = BatterySpec::default();
    let tariff = TariffSchedule::default();
    for seed in 0..20 {
        let (day, load, pv) = two_day_instance(seed);
        let r = evaluate_predictive(
            day,
            day + 1,
            &load,
            &pv,
            &tariff,
            &spec,
            &OracleForecaster,
            &OracleForecaster,
        )
        .unwrap();
        assert_eq!(r.forecast_cost, r.perfect_cost);
        assert_eq!(
            trace_flows(&r.forecast_trace),
            trace_flows(&r.perfect_trace)
        );
    }
}

#[test]
fn zero_pv_forecast_never_beats_perfect_information() {
    let spec = floor_start(&BatterySpec::default());
    let tariff = TariffSchedule::default();
    let p = Plant::new(&spec, &tariff);
    for seed in 0..20 {
        let (day, load, pv) = two_day_instance(seed);
        let r = evaluate_predictive(
            day,
            day + 1,
            &load,
            &pv,
            &tariff,
            &spec,
            &OracleForecaster,
            &ZeroForecaster,
        )
        .unwrap();
        let (l, g) = (load.days(day, day + 1), pv.days(day, day + 1));

        // Brute force: perfect information is the rule oracle on the actuals;
        // with no forecast surplus and an empty battery nothing is ever
        // stored, so the realized flows are PV to load, rest exported,
        // shortfall imported.
        let (perfect_flows, perfect_soc) = oracle_pv_batt(&p, 0, l, g);
        assert!(
            (perfect_soc.last().unwrap() - p.soc0).abs() <= 1e-9,
            "seed {seed}"
        );
        let idle: Vec<[f64; 5]> = l
            .iter()
            .zip(g)
            .map(|(&l, &g)| {
                let u = l.min(g);
                [u, 0.0, g - u, 0.0, l - u]
            })
            .collect();
        let perfect = reprice(&p, 0, &perfect_flows).3;
        assert_eq!(trace_flows(&r.forecast_trace), idle);
        let zero = reprice(&p, 0, &idle).3;
        assert!((r.perfect_cost.net_cost - perfect).abs() <= 1e-9);
        assert!((r.forecast_cost.net_cost - zero).abs() <= 1e-9);
        assert!(zero >= perfect - 1e-9, "seed {seed}: {zero} < {perfect}");
        assert!(r.gap() >= -1e-9);
    }
}

#[test]
fn per_day_costs_add_up() {
    let (day, load, pv) = two_day_instance(77);
    let r = evaluate_predictive(
        day,
        day + 1,
        &load,
        &pv,
        &TariffSchedule::default(),
        &BatterySpec::default(),
        &ZeroForecaster,
        &ZeroForecaster,
    )
    .unwrap();
    let f: f64 = r.days.iter().map(|d| d.forecast_net_cost).sum();
    let p: f64 = r.days.iter().map(|d| d.perfect_net_cost).sum();
    assert!((f - r.forecast_cost.net_cost).abs() < 1e-9);
    assert!((p - r.perfect_cost.net_cost).abs() < 1e-9);
}
