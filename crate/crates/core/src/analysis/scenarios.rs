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

//! Circuit scenarios: small protocol fragments executed shot by shot and
//! binned into register-string histograms.
//!
//! Register formatting is centralized here and nowhere else: a classical
//! register lists measured qubits with the *highest* qubit index leftmost,
//! the reverse of the state vector's ket order. A Bell measurement on the
//! ordered pair (a, b) writes its phase bit into qubit a's slot and its flip
//! bit into qubit b's slot, which makes a register read exactly the two-bit
//! Bell encoding `00`/`01`/`10`/`11` for `φ+`/`φ−`/`ψ+`/`ψ−`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::protocol::{GroupPlan, ProtocolError};
use crate::statevector::{BellKind, StateVector};
use crate::streams::{names, SeedSplitter};

/// The four reproducible circuit scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "scenario")]
pub enum Scenario {
    /// Prepare one Bell state and measure it in the Bell basis.
    BellPrepMeasure { kind: BellKind },
    /// One group, both users reflect everything, TP restores and
    /// Bell-measures both pairs.
    ReflectReflect { swapped: bool },
    /// One group, both users measure all four qubits, TP restores and
    /// Bell-measures both pairs.
    MeasureAll { swapped: bool },
    /// One group, Alice measures the 1st and 3rd transit qubits, Bob the 1st
    /// and 2nd; TP restores and Z-measures the first three original qubits.
    MixedOps { swapped: bool },
}

/// A scenario plus shot count and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(flatten)]
    pub scenario: Scenario,
    pub shots: u64,
    pub seed: u64,
}

/// Outcome-string counts; counts always sum to the shot count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl Histogram {
    fn new(shots: u64) -> Histogram {
        Histogram {
            shots,
            counts: BTreeMap::new(),
        }
    }

    fn record(&mut self, outcome: String) {
        *self.counts.entry(outcome).or_insert(0) += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn frequency(&self, outcome: &str) -> f64 {
        if self.shots == 0 {
            return 0.0;
        }
        *self.counts.get(outcome).unwrap_or(&0) as f64 / self.shots as f64
    }
}

/// Per-shot agreement tallies for the mixed-operations scenario, with the
/// original qubit positions the relations live on (resolved through the
/// swap permutation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationReport {
    pub shots: u64,
    /// Original position whose TP bit must equal Alice's measurement.
    pub kta_position: usize,
    /// Original position whose TP bit must equal Bob's measurement.
    pub ktb_position: usize,
    /// Original position measured by all three parties.
    pub shared_position: usize,
    pub tp_alice_matches: u64,
    pub tp_bob_matches: u64,
    pub three_way_matches: u64,
}

/// Histogram plus the scenario's consistency tallies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub spec: ScenarioSpec,
    pub histogram: Histogram,
    /// MeasureAll only: shots where Alice's and Bob's bits agreed on every
    /// shared qubit.
    pub alice_bob_agreement: Option<u64>,
    /// MixedOps only.
    pub relations: Option<RelationReport>,
}

/// Register slots, written as (qubit index, bit), rendered with the highest
/// qubit leftmost.
fn format_register(slots: &[(usize, u8)]) -> String {
    let mut ordered: Vec<(usize, u8)> = slots.to_vec();
    ordered.sort_by_key(|&(qubit, _)| std::cmp::Reverse(qubit));
    ordered.iter().map(|(_, b)| char::from(b'0' + b)).collect()
}

fn bell_slots(pair: (usize, usize), kind: BellKind) -> [(usize, u8); 2] {
    [(pair.0, kind.phase_bit()), (pair.1, kind.flip_bit())]
}

/// Runs a scenario and returns its histogram.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<Histogram, ProtocolError> {
    run_scenario_report(spec).map(|r| r.histogram)
}

/// Verifies the mixed-operations agreement relations shot by shot.
pub fn mixed_ops_consistency(spec: &ScenarioSpec) -> Result<RelationReport, ProtocolError> {
    if !matches!(spec.scenario, Scenario::MixedOps { .. }) {
        return Err(ProtocolError::InvalidConfig(
            "consistency relations are defined for the mixed-ops scenario".into(),
        ));
    }
    Ok(run_scenario_report(spec)?
        .relations
        .expect("mixed-ops reports carry relations"))
}

/// Runs a scenario with full per-shot bookkeeping.
pub fn run_scenario_report(spec: &ScenarioSpec) -> Result<ScenarioReport, ProtocolError> {
    let mut rng = SeedSplitter::new(spec.seed).stream(names::SHOTS);
    let mut histogram = Histogram::new(spec.shots);
    let mut alice_bob_agreement: Option<u64> = None;
    let mut relations: Option<RelationReport> = None;

    for _ in 0..spec.shots {
        match spec.scenario {
            Scenario::BellPrepMeasure { kind } => {
                let mut state = StateVector::prepare_bell(kind);
                let (outcome, _) = state.measure_bell(0, 1, &mut rng)?;
                histogram.record(format_register(&bell_slots((0, 1), outcome)));
            }
            Scenario::ReflectReflect { swapped } => {
                let mut state = prepared_group(swapped)?;
                restore(&mut state, swapped)?;
                let (k1, _) = state.measure_bell(0, 1, &mut rng)?;
                let (k2, _) = state.measure_bell(2, 3, &mut rng)?;
                let mut slots = Vec::with_capacity(4);
                slots.extend(bell_slots((0, 1), k1));
                slots.extend(bell_slots((2, 3), k2));
                histogram.record(format_register(&slots));
            }
            Scenario::MeasureAll { swapped } => {
                let mut state = prepared_group(swapped)?;
                let mut alice = [0u8; 4];
                for (t, slot) in alice.iter_mut().enumerate() {
                    *slot = state.measure_z(t, &mut rng)?.0;
                }
                let mut bob = [0u8; 4];
                for (t, slot) in bob.iter_mut().enumerate() {
                    *slot = state.measure_z(t, &mut rng)?.0;
                }
                restore(&mut state, swapped)?;
                let (k1, _) = state.measure_bell(0, 1, &mut rng)?;
                let (k2, _) = state.measure_bell(2, 3, &mut rng)?;
                let mut slots = Vec::with_capacity(4);
                slots.extend(bell_slots((0, 1), k1));
                slots.extend(bell_slots((2, 3), k2));
                histogram.record(format_register(&slots));
                let agree = alice_bob_agreement.get_or_insert(0);
                if alice == bob {
                    *agree += 1;
                }
            }
            Scenario::MixedOps { swapped } => {
                let plan = GroupPlan {
                    group_index: 0,
                    swapped,
                };
                let mut state = prepared_group(swapped)?;
                // Alice measures the 1st and 3rd transit qubits.
                let a0 = state.measure_z(0, &mut rng)?.0;
                let a2 = state.measure_z(2, &mut rng)?.0;
                // Bob measures the 1st and 2nd.
                let b0 = state.measure_z(0, &mut rng)?.0;
                let b1 = state.measure_z(1, &mut rng)?.0;
                restore(&mut state, swapped)?;
                // TP Z-measures the first three original qubits.
                let t0 = state.measure_z(0, &mut rng)?.0;
                let t1 = state.measure_z(1, &mut rng)?.0;
                let t2 = state.measure_z(2, &mut rng)?.0;

                let tp_reg = format_register(&[(0, t0), (1, t1), (2, t2)]);
                let bob_reg = format_register(&[(0, b0), (1, b1)]);
                let alice_reg = format_register(&[(0, a0), (2, a2)]);
                histogram.record(format!("{tp_reg} {bob_reg} {alice_reg}"));

                // The swap permutation is self-inverse, so Alice's transit
                // qubit 2 sits at original position perm(2) and Bob's
                // transit qubit 1 at perm(1); the shared qubit is 0.
                let rel = relations.get_or_insert(RelationReport {
                    shots: spec.shots,
                    kta_position: plan.transit_for_original(2),
                    ktb_position: plan.transit_for_original(1),
                    shared_position: 0,
                    tp_alice_matches: 0,
                    tp_bob_matches: 0,
                    three_way_matches: 0,
                });
                let tp_bits = [t0, t1, t2];
                if tp_bits[rel.kta_position] == a2 {
                    rel.tp_alice_matches += 1;
                }
                if tp_bits[rel.ktb_position] == b1 {
                    rel.tp_bob_matches += 1;
                }
                if t0 == a0 && a0 == b0 {
                    rel.three_way_matches += 1;
                }
            }
        }
    }

    Ok(ScenarioReport {
        spec: *spec,
        histogram,
        alice_bob_agreement,
        relations,
    })
}

fn prepared_group(swapped: bool) -> Result<StateVector, ProtocolError> {
    let phi = StateVector::prepare_bell(BellKind::PhiPlus);
    let mut state = phi.tensor(&phi);
    if swapped {
        state.swap_pairing()?;
    }
    Ok(state)
}

fn restore(state: &mut StateVector, swapped: bool) -> Result<(), ProtocolError> {
    if swapped {
        state.swap_pairing()?;
    }
    Ok(())
}
