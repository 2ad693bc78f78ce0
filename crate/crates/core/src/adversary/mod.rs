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

//! The attack catalogue.
//!
//! External attacks implement [`AttackStrategy`] and are invoked per transit
//! qubit per channel leg; they may only touch the transit qubit and wires
//! they appended themselves (fakes, probes, ancillas). Dishonest-TP behavior
//! is a [`TpStrategy`] handled inside the protocol engine, since TP is a
//! protocol role rather than a channel interloper. [`evaluate`] Monte-Carlos
//! any of them into an [`AttackReport`].

mod collective;
mod evaluate;

pub use collective::{
    random_su2, reflect_pair_pass_probability, sample_constrained_collective, transit_diagonal,
    AdversaryError, CollectiveUnitary, DiagonalRotations, Mat2, Mat4, UNITARITY_TOL,
};
pub use evaluate::{
    ancilla_zero_deviation, dishonest_tp_check_pairs, evaluate, probe_info_metric,
    reflect_bell_check_experiment, AttackReport, AttackSpec, CheckPairStats, EvalOptions,
    RrCheckStats, ATTACK_REPORT_SCHEMA,
};

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::protocol::{AttackStrategy, ChannelLeg, OwnedWire, TransitSlot};
use crate::statevector::{BellKind, Gate, StateVector};

/// Marker for "no attack": every qubit passes untouched. Useful as the
/// baseline in reports and for stream-isolation checks.
#[derive(Debug, Default)]
pub struct NoAttack;

impl AttackStrategy for NoAttack {
    fn name(&self) -> String {
        "none".to_string()
    }

    fn intercept(
        &mut self,
        _leg: ChannelLeg,
        _slot: TransitSlot,
        _state: &mut StateVector,
        wire: usize,
        _rng: &mut ChaCha12Rng,
    ) -> usize {
        wire
    }
}

/// Which leg the intercept-resend eavesdropper cuts into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterceptVariant {
    /// Divert the genuine qubits on TP→Alice, feed Alice fresh Z-basis
    /// fakes, return the stored genuine qubits on the final leg.
    Leg1,
    /// Same pattern starting on Alice→Bob.
    Leg2,
}

/// Intercept-resend: stash the genuine qubit, hand the next party a random
/// Z-basis fake, Z-measure whatever exits Bob, and deliver the stored
/// genuine qubits to TP in original order.
#[derive(Debug)]
pub struct InterceptResend {
    variant: InterceptVariant,
    stashed: BTreeMap<(usize, usize), usize>,
    /// Eve's Z-readings of the qubits exiting Bob, by (group, position).
    pub observed_bits: BTreeMap<(usize, usize), u8>,
}

impl InterceptResend {
    pub fn new(variant: InterceptVariant) -> InterceptResend {
        InterceptResend {
            variant,
            stashed: BTreeMap::new(),
            observed_bits: BTreeMap::new(),
        }
    }

    fn cut_leg(&self) -> ChannelLeg {
        match self.variant {
            InterceptVariant::Leg1 => ChannelLeg::TpToAlice,
            InterceptVariant::Leg2 => ChannelLeg::AliceToBob,
        }
    }
}

impl AttackStrategy for InterceptResend {
    fn name(&self) -> String {
        match self.variant {
            InterceptVariant::Leg1 => "intercept-resend-leg1".to_string(),
            InterceptVariant::Leg2 => "intercept-resend-leg2".to_string(),
        }
    }

    fn intercept(
        &mut self,
        leg: ChannelLeg,
        slot: TransitSlot,
        state: &mut StateVector,
        wire: usize,
        rng: &mut ChaCha12Rng,
    ) -> usize {
        let key = (slot.group, slot.position);
        if leg == self.cut_leg() {
            self.stashed.insert(key, wire);
            let fake_bit = u8::from(rng.random::<bool>());
            return state.append_qubit(fake_bit);
        }
        if leg == ChannelLeg::BobToTp {
            // Measure the fake exiting Bob, deliver the genuine qubit to TP.
            if let Some(genuine) = self.stashed.remove(&key) {
                let (bit, _) = state.measure_z(wire, rng).expect("fake wire is in range");
                self.observed_bits.insert(key, bit);
                return genuine;
            }
        }
        wire
    }
}

/// Measure-resend in the Z basis: Eve measures every transit qubit on the
/// configured legs and forwards the collapsed state.
#[derive(Debug)]
pub struct MeasureResendZ {
    legs: Vec<ChannelLeg>,
    /// Last reading per (group, position).
    pub observed_bits: BTreeMap<(usize, usize), u8>,
}

impl MeasureResendZ {
    /// Eavesdrop on all three legs.
    pub fn new() -> MeasureResendZ {
        MeasureResendZ::on_legs(ChannelLeg::ALL.to_vec())
    }

    pub fn on_legs(legs: Vec<ChannelLeg>) -> MeasureResendZ {
        MeasureResendZ {
            legs,
            observed_bits: BTreeMap::new(),
        }
    }
}

impl Default for MeasureResendZ {
    fn default() -> Self {
        MeasureResendZ::new()
    }
}

impl AttackStrategy for MeasureResendZ {
    fn name(&self) -> String {
        "measure-resend-z".to_string()
    }

    fn intercept(
        &mut self,
        leg: ChannelLeg,
        slot: TransitSlot,
        state: &mut StateVector,
        wire: usize,
        rng: &mut ChaCha12Rng,
    ) -> usize {
        if self.legs.contains(&leg) {
            let (bit, _) = state
                .measure_z(wire, rng)
                .expect("transit wire is in range");
            self.observed_bits.insert((slot.group, slot.position), bit);
        }
        wire
    }
}

/// Eve's pairing guess for the Bell-basis measure-resend attack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvePairing {
    /// The naive consecutive pairing (0,1)(2,3) of transit positions.
    Consecutive,
    /// A uniformly random perfect matching of the four positions per group.
    Random,
}

/// Measure-resend in the Bell basis: Eve holds the group's qubits on one leg,
/// Bell-measures them under her pairing guess, and forwards the collapsed
/// states. She cannot know whether a group was re-paired, so her guess may
/// cut across the genuine pairs.
#[derive(Debug)]
pub struct MeasureResendBell {
    leg: ChannelLeg,
    pairing: EvePairing,
    held: BTreeMap<usize, [Option<usize>; 4]>,
    matchings: BTreeMap<usize, [(usize, usize); 2]>,
    /// Eve's outcomes by (group, her pair index).
    pub observed: BTreeMap<(usize, usize), BellKind>,
}

impl MeasureResendBell {
    /// Eavesdrop on TP→Alice with the given pairing guess.
    pub fn new(pairing: EvePairing) -> MeasureResendBell {
        MeasureResendBell {
            leg: ChannelLeg::TpToAlice,
            pairing,
            held: BTreeMap::new(),
            matchings: BTreeMap::new(),
            observed: BTreeMap::new(),
        }
    }

    fn matching_for<R: Rng>(&mut self, group: usize, rng: &mut R) -> [(usize, usize); 2] {
        let pairing = self.pairing;
        *self
            .matchings
            .entry(group)
            .or_insert_with(|| match pairing {
                EvePairing::Consecutive => [(0, 1), (2, 3)],
                EvePairing::Random => {
                    const MATCHINGS: [[(usize, usize); 2]; 3] =
                        [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];
                    MATCHINGS[rng.random_range(0..3)]
                }
            })
    }
}

impl AttackStrategy for MeasureResendBell {
    fn name(&self) -> String {
        match self.pairing {
            EvePairing::Consecutive => "measure-resend-bell".to_string(),
            EvePairing::Random => "measure-resend-bell-random".to_string(),
        }
    }

    fn intercept(
        &mut self,
        leg: ChannelLeg,
        slot: TransitSlot,
        state: &mut StateVector,
        wire: usize,
        rng: &mut ChaCha12Rng,
    ) -> usize {
        if leg != self.leg {
            return wire;
        }
        let matching = self.matching_for(slot.group, rng);
        self.held.entry(slot.group).or_default()[slot.position] = Some(wire);
        let held = self.held[&slot.group];
        for (idx, (a, b)) in matching.into_iter().enumerate() {
            let key = (slot.group, idx);
            if self.observed.contains_key(&key) {
                continue;
            }
            if let (Some(wa), Some(wb)) = (held[a], held[b]) {
                let (kind, _) = state
                    .measure_bell(wa, wb, rng)
                    .expect("held wires are in range");
                self.observed.insert(key, kind);
            }
        }
        wire
    }
}

/// The double-CNOT attack: one fresh `|0⟩` ancilla per transit qubit,
/// CNOT(transit → ancilla) on TP→Alice and again on Alice→Bob, ancillas
/// Z-measured at the end of the run.
#[derive(Debug, Default)]
pub struct DoubleCnot {
    ancillas: BTreeMap<(usize, usize), usize>,
}

impl DoubleCnot {
    pub fn new() -> DoubleCnot {
        DoubleCnot::default()
    }
}

impl AttackStrategy for DoubleCnot {
    fn name(&self) -> String {
        "double-cnot".to_string()
    }

    fn intercept(
        &mut self,
        leg: ChannelLeg,
        slot: TransitSlot,
        state: &mut StateVector,
        wire: usize,
        _rng: &mut ChaCha12Rng,
    ) -> usize {
        let key = (slot.group, slot.position);
        match leg {
            ChannelLeg::TpToAlice => {
                let ancilla = state.append_qubit(0);
                self.ancillas.insert(key, ancilla);
                state
                    .apply(Gate::Cnot {
                        control: wire,
                        target: ancilla,
                    })
                    .expect("ancilla wire is in range");
            }
            ChannelLeg::AliceToBob => {
                if let Some(&ancilla) = self.ancillas.get(&key) {
                    state
                        .apply(Gate::Cnot {
                            control: wire,
                            target: ancilla,
                        })
                        .expect("ancilla wire is in range");
                }
            }
            ChannelLeg::BobToTp => {}
        }
        wire
    }

    fn owned_wires(&self, group: usize) -> Vec<OwnedWire> {
        self.ancillas
            .iter()
            .filter(|((g, _), _)| *g == group)
            .map(|((_, position), &wire)| OwnedWire {
                position: *position,
                wire,
            })
            .collect()
    }
}

/// A collective attack: `U1`, `U2`, `U3` applied on the respective legs to
/// (transit qubit ⊗ probe qubit), one probe per transit qubit, retained for
/// information analysis.
#[derive(Debug)]
pub struct CollectiveAttack {
    unitary: CollectiveUnitary,
    label: String,
    probes: BTreeMap<(usize, usize), usize>,
}

impl CollectiveAttack {
    pub fn new(unitary: CollectiveUnitary) -> CollectiveAttack {
        CollectiveAttack::labeled(unitary, "collective")
    }

    pub fn labeled(unitary: CollectiveUnitary, label: &str) -> CollectiveAttack {
        CollectiveAttack {
            unitary,
            label: label.to_string(),
            probes: BTreeMap::new(),
        }
    }

    pub fn unitary(&self) -> &CollectiveUnitary {
        &self.unitary
    }
}

impl AttackStrategy for CollectiveAttack {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn intercept(
        &mut self,
        leg: ChannelLeg,
        slot: TransitSlot,
        state: &mut StateVector,
        wire: usize,
        _rng: &mut ChaCha12Rng,
    ) -> usize {
        let key = (slot.group, slot.position);
        let probe = *self
            .probes
            .entry(key)
            .or_insert_with(|| state.append_qubit(0));
        state
            .apply_two_qubit(self.unitary.leg_matrix(leg), wire, probe)
            .expect("transit and probe wires are in range");
        wire
    }

    fn owned_wires(&self, group: usize) -> Vec<OwnedWire> {
        self.probes
            .iter()
            .filter(|((g, _), _)| *g == group)
            .map(|((_, position), &wire)| OwnedWire {
                position: *position,
                wire,
            })
            .collect()
    }
}
