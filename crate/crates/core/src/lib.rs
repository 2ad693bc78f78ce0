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

//! Deterministic simulator and analysis toolkit for a two-party semi-quantum
//! private comparison (SQPC) protocol built on entanglement swapping of Bell
//! states.
//!
//! A quantum third party (TP) prepares groups of two `|φ+⟩` Bell pairs,
//! randomly re-pairs each group, and circulates the qubits TP → Alice → Bob →
//! TP. The two classical users either Z-measure-and-resend or reflect each
//! qubit. Sifting the announced operations yields three one-time-pad keys
//! (Alice↔Bob, TP↔Alice, TP↔Bob) which carry an XOR-encrypted equality
//! comparison of the users' secrets, while reflected pairs double as
//! eavesdropping checks.
//!
//! The crate is organized mirroring the moving parts of the protocol:
//!
//! - [`statevector`]: a small dense pure-state simulator (gates, Z- and
//!   Bell-basis measurement, tensor products, Bell-basis decompositions).
//! - [`streams`]: named, splittable random streams so every run is
//!   reproducible bit-for-bit from one root seed.
//! - [`protocol`]: the eight-step protocol engine with strict party-view
//!   separation, sifting, key assembly, encryption and comparison.
//! - [`adversary`]: the attack catalogue (intercept-resend, measure-resend,
//!   collective unitaries with probe registers, double-CNOT, dishonest TP)
//!   and Monte Carlo attack evaluation.
//! - [`analysis`]: circuit-scenario histograms, detection curves and the
//!   qubit-efficiency table.

pub mod adversary;
pub mod analysis;
pub mod protocol;
pub mod statevector;
pub mod streams;

pub use statevector::{Amplitude, BellKind, Gate, MeasurementRecord, SimError, StateVector};
