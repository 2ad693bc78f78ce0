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

//! Detection scaling: a per-check violation probability `p` compounds over
//! `k` independent checks as `1 − (1−p)^k`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionPoint {
    pub checks: u64,
    pub analytic: f64,
    /// Empirical detection rate, when an experiment was run for this k.
    pub empirical: Option<f64>,
}

pub fn analytic_detection(per_check_p: f64, checks: u64) -> f64 {
    1.0 - (1.0 - per_check_p).powi(checks as i32)
}

/// Analytic curve over the given check counts.
pub fn detection_curve(per_check_p: f64, checks: &[u64]) -> Vec<DetectionPoint> {
    checks
        .iter()
        .map(|&k| DetectionPoint {
            checks: k,
            analytic: analytic_detection(per_check_p, k),
            empirical: None,
        })
        .collect()
}

/// Curve with an empirical rate per check count, from any experiment the
/// caller supplies (e.g. seeded dishonest-TP trials).
pub fn detection_curve_with<F>(
    per_check_p: f64,
    checks: &[u64],
    mut experiment: F,
) -> Vec<DetectionPoint>
where
    F: FnMut(u64) -> f64,
{
    checks
        .iter()
        .map(|&k| DetectionPoint {
            checks: k,
            analytic: analytic_detection(per_check_p, k),
            empirical: Some(experiment(k)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert!((analytic_detection(0.5, 1) - 0.5).abs() < 1e-15);
        let ten = analytic_detection(0.5, 10);
        assert!((ten - (1.0 - 2f64.powi(-10))).abs() < 1e-15);
        assert_eq!(analytic_detection(0.0, 1000), 0.0);
    }

    #[test]
    fn curve_carries_the_analytic_column() {
        let curve = detection_curve(0.25, &[1, 2, 4]);
        assert_eq!(curve.len(), 3);
        assert!((curve[2].analytic - (1.0 - 0.75f64.powi(4))).abs() < 1e-15);
        assert!(curve.iter().all(|p| p.empirical.is_none()));
    }
}
