//! Electricity cost over a dispatch trace and the three-case comparison table.
//!
//! Net cost is the sum over slots of imported energy times the slot's import
//! rate minus exported energy times the export rate. Imports are bucketed by
//! the slot's rate class.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dispatch::{DispatchTrace, ScenarioCase};
use crate::series::SLOT_HOURS;
use crate::tariff::{RateClass, TariffSchedule};

/// Money in £, unrounded.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostReport {
    pub peak_import_cost: f64,
    pub offpeak_import_cost: f64,
    pub export_revenue: f64,
    pub net_cost: f64,
}

impl CostReport {
    /// Builds a report from its three components; `net_cost` follows from them.
    pub fn from_components(peak: f64, offpeak: f64, export: f64) -> Self {
        Self {
            peak_import_cost: peak,
            offpeak_import_cost: offpeak,
            export_revenue: export,
            net_cost: peak + offpeak - export,
        }
    }

    pub fn identity_gap(&self) -> f64 {
        self.peak_import_cost + self.offpeak_import_cost - self.export_revenue - self.net_cost
    }
}

pub fn cost_of_trace(trace: &DispatchTrace, tariff: &TariffSchedule) -> CostReport {
    let mut peak = 0.0;
    let mut offpeak = 0.0;
    let mut export = 0.0;
    for (i, d) in trace.decisions.iter().enumerate() {
        let slot = trace.slot_at(i);
        let import_cost = d.grid_to_load * SLOT_HOURS * tariff.import_rate(slot);
        match tariff.class_of(slot) {
            RateClass::Peak => peak += import_cost,
            RateClass::OffPeak => offpeak += import_cost,
        }
        export += d.pv_to_grid * SLOT_HOURS * tariff.rate_export();
    }
    CostReport::from_components(peak, offpeak, export)
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseRow {
    pub case: ScenarioCase,
    pub report: CostReport,
    /// `100 * (net_grid_only - net_case) / net_grid_only`; `None` for the
    /// baseline row itself, when the baseline is absent, or when its net cost
    /// is zero.
    pub reduction_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseComparison {
    pub rows: Vec<CaseRow>,
}

pub fn reduction_pct(baseline_net: f64, net: f64) -> Option<f64> {
    if baseline_net == 0.0 {
        None
    } else {
        Some(100.0 * (baseline_net - net) / baseline_net)
    }
}

/// Orders rows as grid-only, PV, PV + battery and attaches the reduction
/// relative to the grid-only net cost.
pub fn compare_cases(reports: &[(ScenarioCase, CostReport)]) -> CaseComparison {
    let baseline = reports
        .iter()
        .find(|(c, _)| *c == ScenarioCase::GridOnly)
        .map(|(_, r)| r.net_cost);
    let rows = ScenarioCase::ALL
        .iter()
        .filter_map(|case| reports.iter().find(|(c, _)| c == case))
        .map(|&(case, report)| CaseRow {
            case,
            report,
            reduction_pct: match (case, baseline) {
                (ScenarioCase::GridOnly, _) | (_, None) => None,
                (_, Some(base)) => reduction_pct(base, report.net_cost),
            },
        })
        .collect();
    CaseComparison { rows }
}

fn pct_text(p: Option<f64>) -> String {
    p.map_or_else(|| "n/a".to_string(), |v| format!("{v:.1}"))
}

impl CaseComparison {
    /// CSV with 2-decimal money and 1-decimal percentages.
    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("case,peak_cost,offpeak_cost,export_revenue,net_cost,reduction_pct\n");
        for row in &self.rows {
            let r = &row.report;
            let _ = writeln!(
                s,
                "{},{:.2},{:.2},{:.2},{:.2},{}",
                row.case.key(),
                r.peak_import_cost,
                r.offpeak_import_cost,
                r.export_revenue,
                r.net_cost,
                pct_text(row.reduction_pct)
            );
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        fs::write(path, self.to_csv())
    }

    /// Fixed-width text table for the terminal.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<32} {:>12} {:>14} {:>12} {:>10} {:>11}",
            "Case", "Peak (£)", "Off-peak (£)", "Export (£)", "Net (£)", "Reduction"
        );
        for row in &self.rows {
            let r = &row.report;
            let pct = row
                .reduction_pct
                .map_or_else(|| "-".to_string(), |v| format!("{v:.1}%"));
            let _ = writeln!(
                s,
                "{:<32} {:>12.2} {:>14.2} {:>12.2} {:>10.2} {:>11}",
                row.case.label(),
                r.peak_import_cost,
                r.offpeak_import_cost,
                r.export_revenue,
                r.net_cost,
                pct
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispatch::DispatchDecision;

    fn trace_of(decisions: Vec<DispatchDecision>) -> DispatchTrace {
        let n = decisions.len();
        DispatchTrace {
            case: ScenarioCase::PvGridBattery,
            start: 0,
            decisions,
            soc_series: vec![0.0; n + 1],
        }
    }

    #[test]
    fn zero_trace_costs_nothing() {
        let t = trace_of(vec![DispatchDecision::default(); 96]);
        assert_eq!(
            cost_of_trace(&t, &TariffSchedule::default()),
            CostReport::default()
        );
    }

    #[test]
    fn single_peak_import() {
        let mut decisions = vec![DispatchDecision::default(); 30];
        decisions[20].grid_to_load = 1.0;
        let r = cost_of_trace(&trace_of(decisions), &TariffSchedule::default());
        assert!((r.peak_import_cost - 0.08).abs() < 1e-12);
        assert_eq!(r.offpeak_import_cost, 0.0);
        assert_eq!(r.net_cost, r.peak_import_cost);
    }

    #[test]
    fn offpeak_and_export_buckets() {
        let mut decisions = vec![DispatchDecision::default(); 30];
        decisions[3].grid_to_load = 2.0;
        decisions[25].pv_to_grid = 1.5;
        decisions[25].pv_to_load = 0.2;
        let r = cost_of_trace(&trace_of(decisions), &TariffSchedule::default());
        assert!((r.offpeak_import_cost - 2.0 * 0.5 * 0.08).abs() < 1e-12);
        assert!((r.export_revenue - 1.5 * 0.5 * 0.04).abs() < 1e-12);
        assert!(r.identity_gap().abs() < 1e-12);
    }

    #[test]
    fn reference_case_one_components_sum_to_382_80() {
        // The printed net for the grid-only row is 384.24; its components give 382.80.
        let r = CostReport::from_components(259.96, 122.84, 0.0);
        assert!((r.net_cost - 382.80).abs() < 1e-9);
        assert!((384.24 - r.net_cost - 1.44).abs() < 1e-9);
        assert!(r.identity_gap().abs() < 1e-12);
    }

    #[test]
    fn reductions_from_reference_nets() {
        let reports = [
            (
                ScenarioCase::GridOnly,
                CostReport {
                    net_cost: 384.24,
                    ..Default::default()
                },
            ),
            (
                ScenarioCase::PvGrid,
                CostReport {
                    net_cost: 61.69,
                    ..Default::default()
                },
            ),
            (
                ScenarioCase::PvGridBattery,
                CostReport {
                    net_cost: 38.14,
                    ..Default::default()
                },
            ),
        ];
        let cmp = compare_cases(&reports);
        let pct: Vec<Option<String>> = cmp
            .rows
            .iter()
            .map(|r| r.reduction_pct.map(|p| format!("{p:.1}")))
            .collect();
        assert_eq!(pct, vec![None, Some("83.9".into()), Some("90.1".into())]);
    }

    #[test]
    fn reduction_edge_cases() {
        assert_eq!(reduction_pct(100.0, 50.0), Some(50.0));
        assert_eq!(reduction_pct(100.0, 100.0), Some(0.0));
        assert_eq!(reduction_pct(0.0, 10.0), None);
        let same = CostReport::from_components(1.0, 1.0, 0.5);
        let cmp = compare_cases(&[
            (ScenarioCase::PvGridBattery, same),
            (ScenarioCase::GridOnly, same),
        ]);
        assert_eq!(cmp.rows[0].case, ScenarioCase::GridOnly);
        assert_eq!(cmp.rows[1].reduction_pct, Some(0.0));
        let no_base = compare_cases(&[(ScenarioCase::PvGrid, same)]);
        assert_eq!(no_base.rows[0].reduction_pct, None);
    }

    #[test]
    fn csv_shape() {
        let cmp = compare_cases(&[
            (
                ScenarioCase::GridOnly,
                CostReport::from_components(259.96, 122.84, 0.0),
            ),
            (
                ScenarioCase::PvGrid,
                CostReport::from_components(111.68, 52.535, 102.5),
            ),
        ]);
        let csv = cmp.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "case,peak_cost,offpeak_cost,export_revenue,net_cost,reduction_pct"
        );
        assert_eq!(lines[1], "grid,259.96,122.84,0.00,382.80,n/a");
        assert!(lines[2].starts_with("pv,111.68,52."));
        assert!(cmp.to_table().contains("Utility grid only"));
    }
}
