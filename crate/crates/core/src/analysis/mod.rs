// Copyright 2026 The sqpc-sim Developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Reproduction tooling: circuit-scenario histograms, detection curves, the
//! qubit-efficiency table, and their text/CSV renderings.

mod detection;
mod efficiency;
mod scenarios;

pub use detection::{analytic_detection, detection_curve, detection_curve_with, DetectionPoint};
pub use efficiency::{
    efficiency_table, measured_efficiency, this_protocol_row, EfficiencyRow, LinearCost, Ratio,
};
pub use scenarios::{
    mixed_ops_consistency, run_scenario, run_scenario_report, Histogram, RelationReport, Scenario,
    ScenarioReport, ScenarioSpec,
};

pub const HISTOGRAM_SCHEMA: &str = "sqpc.histogram.v1";
pub const EFFICIENCY_SCHEMA: &str = "sqpc.efficiency.v1";

/// Sorted `outcome count` columns.
pub fn histogram_to_text(h: &Histogram) -> String {
    let mut out = String::from("outcome count\n");
    for (outcome, count) in &h.counts {
        out.push_str(&format!("{outcome} {count}\n"));
    }
    out
}

/// CSV with an `outcome,count` header.
pub fn histogram_to_csv(h: &Histogram) -> String {
    let mut out = String::from("outcome,count\n");
    for (outcome, count) in &h.counts {
        out.push_str(&format!("{outcome},{count}\n"));
    }
    out
}

pub fn efficiency_table_to_csv(rows: &[EfficiencyRow]) -> String {
    let mut out = String::from(
        "label,quantum_resource,transmission,entanglement_swapping,pre_shared_key,\
         pre_shared_cost,comparison_cost,eta,eta_n1\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.label,
            row.quantum_resource,
            row.transmission,
            row.entanglement_swapping,
            row.pre_shared_key,
            row.pre_shared_cost,
            row.comparison_cost,
            row.eta_formula(),
            row.eta(1),
        ));
    }
    out
}

pub fn efficiency_table_to_text(rows: &[EfficiencyRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<14} {:<30} {:<12} {:<5} {:<10} {:<10} {:<12} {}\n",
        "label",
        "quantum resource",
        "transmission",
        "swap",
        "pre-shared",
        "key cost",
        "cmp cost",
        "efficiency"
    ));
    for row in rows {
        out.push_str(&format!(
            "{:<14} {:<30} {:<12} {:<5} {:<10} {:<10} {:<12} {}\n",
            row.label,
            row.quantum_resource,
            row.transmission,
            if row.entanglement_swapping {
                "yes"
            } else {
                "no"
            },
            if row.pre_shared_key { "yes" } else { "no" },
            row.pre_shared_cost.to_string(),
            row.comparison_cost.to_string(),
            row.eta_formula(),
        ));
    }
    out
}
