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

//! Minimal dense pure-state simulator.
//!
//! A [`StateVector`] holds the 2^k complex amplitudes of a k-qubit register.
//! Kets read left to right as qubit 0..k-1, so qubit 0 occupies the most
//! significant bit of the amplitude index: `|01⟩` on two qubits is amplitude
//! index `0b01`, with qubit 0 in state `|0⟩` and qubit 1 in state `|1⟩`.
//! Register-style string formatting (least significant qubit rightmost of the
//! *classical* register) is deliberately not done here; the analysis layer
//! owns that single reversal rule.
//!
//! Operations mutate in place and renormalize after every collapse; callers
//! that need the old state clone first. All sampling goes through a caller
//! supplied [`rand::Rng`] so runs are reproducible.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex probability amplitude.
pub type Amplitude = Complex64;

/// Absolute tolerance for exact-amplitude assertions.
pub const NORM_TOL: f64 = 1e-12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Errors from malformed state-vector operations.
#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("qubit index {qubit} out of range for {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("duplicate qubit index {0}")]
    DuplicateIndex(usize),
    #[error("qubit count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected a {expected}-qubit state, got {actual}")]
    WrongArity { expected: usize, actual: usize },
    #[error("pairing must cover qubits 0..4 exactly once")]
    InvalidPairing,
    #[error("composition of zero states")]
    EmptyComposition,
    #[error("amplitude vector of length {len} is not a power of two")]
    BadLength { len: usize },
    #[error("amplitude vector has squared norm {norm_sqr}, expected 1")]
    NotNormalized { norm_sqr: f64 },
}

/// The four Bell states; also used as the label of a Bell-basis measurement
/// outcome. The two-bit encoding (flip bit, phase bit) matches the classical
/// register values produced by the CNOT+H disentangling circuit: `00` for
/// `|φ+⟩`, `01` for `|φ−⟩`, `10` for `|ψ+⟩`, `11` for `|ψ−⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    /// 1 iff the second qubit is flipped relative to the first (`ψ±`).
    pub fn flip_bit(self) -> u8 {
        match self {
            BellKind::PhiPlus | BellKind::PhiMinus => 0,
            BellKind::PsiPlus | BellKind::PsiMinus => 1,
        }
    }

    /// 1 iff the superposition carries a relative minus sign (`φ−`, `ψ−`).
    pub fn phase_bit(self) -> u8 {
        match self {
            BellKind::PhiPlus | BellKind::PsiPlus => 0,
            BellKind::PhiMinus | BellKind::PsiMinus => 1,
        }
    }

    pub fn from_bits(flip: u8, phase: u8) -> BellKind {
        match (flip & 1, phase & 1) {
            (0, 0) => BellKind::PhiPlus,
            (0, 1) => BellKind::PhiMinus,
            (1, 0) => BellKind::PsiPlus,
            _ => BellKind::PsiMinus,
        }
    }

    /// Two-bit outcome string, flip bit first: `"01"` for `|φ−⟩`.
    pub fn bit_string(self) -> String {
        format!("{}{}", self.flip_bit(), self.phase_bit())
    }

    pub fn label(self) -> &'static str {
        match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        }
    }
}

/// Outcome payload of a projective measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementOutcome {
    Bits(Vec<u8>),
    Bell(BellKind),
}

/// Record of one projective measurement: where it acted, what came out, and
/// the Born probability the outcome had just before the collapse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub qubit_indices: Vec<usize>,
    pub outcome: MeasurementOutcome,
    pub probability: f64,
}

/// Gates available to the protocol and its circuit scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    X(usize),
    Cnot { control: usize, target: usize },
    Swap(usize, usize),
}

/// Dense pure state over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> StateVector {
        let mut amps = vec![Complex64::ZERO; 1 << num_qubits];
        amps[0] = Complex64::ONE;
        StateVector { num_qubits, amps }
    }

    /// Computational basis state for the given classical bits.
    pub fn from_bits(bits: &[u8]) -> StateVector {
        let num_qubits = bits.len();
        let mut index = 0usize;
        for &b in bits {
            index = (index << 1) | usize::from(b & 1);
        }
        let mut amps = vec![Complex64::ZERO; 1 << num_qubits];
        amps[index] = Complex64::ONE;
        StateVector { num_qubits, amps }
    }

    /// Builds a state from raw amplitudes, checking length and normalization.
    pub fn from_amplitudes(amps: Vec<Amplitude>) -> Result<StateVector, SimError> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(SimError::BadLength { len });
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > 1e-9 {
            return Err(SimError::NotNormalized { norm_sqr });
        }
        Ok(StateVector {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// The 2-qubit Bell state for `kind`, coefficients exactly `±1/√2`.
    pub fn prepare_bell(kind: BellKind) -> StateVector {
        let mut amps = vec![Complex64::ZERO; 4];
        let f = kind.flip_bit() as usize;
        let sign = if kind.phase_bit() == 0 { 1.0 } else { -1.0 };
        // (|0 f⟩ + (−1)^phase |1 (1−f)⟩)/√2
        amps[f] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[0b10 | (1 - f)] = Complex64::new(sign * FRAC_1_SQRT_2, 0.0);
        StateVector {
            num_qubits: 2,
            amps,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<(), SimError> {
        if qubit >= self.num_qubits {
            return Err(SimError::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    fn check_distinct_pair(&self, a: usize, b: usize) -> Result<(), SimError> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(SimError::DuplicateIndex(a));
        }
        Ok(())
    }

    /// Tensor product; `self`'s qubits keep their indices, `other`'s follow.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let shift = other.amps.len();
        let mut amps = vec![Complex64::ZERO; self.amps.len() * shift];
        for (i, a) in self.amps.iter().enumerate() {
            if *a == Complex64::ZERO {
                continue;
            }
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * shift + j] = a * b;
            }
        }
        StateVector {
            num_qubits: self.num_qubits + other.num_qubits,
            amps,
        }
    }

    /// Tensor product of a sequence of states; qubit indices concatenate
    /// left to right.
    pub fn compose(states: &[StateVector]) -> Result<StateVector, SimError> {
        let (first, rest) = states.split_first().ok_or(SimError::EmptyComposition)?;
        let mut out = first.clone();
        for s in rest {
            out = out.tensor(s);
        }
        Ok(out)
    }

    /// Appends one fresh qubit in `|bit⟩` and returns its index.
    pub fn append_qubit(&mut self, bit: u8) -> usize {
        let fresh = StateVector::from_bits(&[bit]);
        *self = self.tensor(&fresh);
        self.num_qubits - 1
    }

    /// Applies a gate in place. Unitary on the designated qubits, identity on
    /// all others.
    pub fn apply(&mut self, gate: Gate) -> Result<(), SimError> {
        match gate {
            Gate::H(q) => {
                self.check_qubit(q)?;
                let m = self.mask(q);
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let a = self.amps[i];
                        let b = self.amps[i | m];
                        self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                        self.amps[i | m] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::X(q) => {
                self.check_qubit(q)?;
                let m = self.mask(q);
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        self.amps.swap(i, i | m);
                    }
                }
            }
            Gate::Cnot { control, target } => {
                self.check_distinct_pair(control, target)?;
                let mc = self.mask(control);
                let mt = self.mask(target);
                for i in 0..self.amps.len() {
                    if i & mc != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
            Gate::Swap(a, b) => {
                self.check_distinct_pair(a, b)?;
                let ma = self.mask(a);
                let mb = self.mask(b);
                for i in 0..self.amps.len() {
                    if i & ma != 0 && i & mb == 0 {
                        self.amps.swap(i, (i & !ma) | mb);
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies an arbitrary two-qubit operator given as a 4×4 matrix over the
    /// ordered basis `|q_a q_b⟩ ∈ {00,01,10,11}`. The caller is responsible
    /// for unitarity.
    pub fn apply_two_qubit(
        &mut self,
        matrix: &[[Amplitude; 4]; 4],
        qubit_a: usize,
        qubit_b: usize,
    ) -> Result<(), SimError> {
        self.check_distinct_pair(qubit_a, qubit_b)?;
        let ma = self.mask(qubit_a);
        let mb = self.mask(qubit_b);
        for i in 0..self.amps.len() {
            if i & (ma | mb) != 0 {
                continue;
            }
            let idx = [i, i | mb, i | ma, i | ma | mb];
            let input = [
                self.amps[idx[0]],
                self.amps[idx[1]],
                self.amps[idx[2]],
                self.amps[idx[3]],
            ];
            for (row, slot) in idx.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for (col, v) in input.iter().enumerate() {
                    acc += matrix[row][col] * v;
                }
                self.amps[*slot] = acc;
            }
        }
        Ok(())
    }

    /// Probability that the given qubits would all read the given bits under
    /// a Z-basis measurement (no collapse).
    pub fn probability_of_bits(&self, qubits: &[usize], bits: &[u8]) -> Result<f64, SimError> {
        debug_assert_eq!(qubits.len(), bits.len());
        let mut mask = 0usize;
        let mut want = 0usize;
        for (&q, &b) in qubits.iter().zip(bits) {
            self.check_qubit(q)?;
            let m = self.mask(q);
            mask |= m;
            if b & 1 == 1 {
                want |= m;
            }
        }
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Z-basis measurement of one qubit: samples by the Born rule, collapses
    /// and renormalizes in place.
    pub fn measure_z<R: Rng>(
        &mut self,
        qubit: usize,
        rng: &mut R,
    ) -> Result<(u8, MeasurementRecord), SimError> {
        self.check_qubit(qubit)?;
        let m = self.mask(qubit);
        let p0: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & m == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        // u ∈ [0,1): zero-probability branches are never sampled.
        let u: f64 = rng.random();
        let (bit, prob) = if u < p0 { (0u8, p0) } else { (1u8, 1.0 - p0) };
        let keep_value = if bit == 0 { 0 } else { m };
        let scale = 1.0 / prob.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m == keep_value {
                *a *= scale;
            } else {
                *a = Complex64::ZERO;
            }
        }
        let record = MeasurementRecord {
            qubit_indices: vec![qubit],
            outcome: MeasurementOutcome::Bits(vec![bit]),
            probability: prob,
        };
        Ok((bit, record))
    }

    /// Amplitudes `⟨B ⊗ rest|ψ⟩` for Bell state `B` of `kind` on the ordered
    /// qubit pair `(i, j)`, written back per rest-configuration index
    /// (`rest` strips the two measured bits out of the amplitude index).
    fn bell_components(&self, i: usize, j: usize, kind: BellKind) -> Vec<Amplitude> {
        let mi = self.mask(i);
        let mj = self.mask(j);
        let f = kind.flip_bit();
        let sign = if kind.phase_bit() == 0 { 1.0 } else { -1.0 };
        let mut out = Vec::with_capacity(self.amps.len() / 4);
        for base in 0..self.amps.len() {
            if base & (mi | mj) != 0 {
                continue;
            }
            let lo = if f == 0 { base } else { base | mj };
            let hi = if f == 0 { base | mi | mj } else { base | mi };
            out.push((self.amps[lo] + sign * self.amps[hi]) * FRAC_1_SQRT_2);
        }
        out
    }

    /// Born probabilities of the four Bell outcomes on qubits `(i, j)`,
    /// ordered as [`BellKind::ALL`], without collapsing.
    pub fn bell_probabilities(&self, i: usize, j: usize) -> Result<[f64; 4], SimError> {
        self.check_distinct_pair(i, j)?;
        let mut probs = [0.0f64; 4];
        for (k, kind) in BellKind::ALL.iter().enumerate() {
            probs[k] = self
                .bell_components(i, j, *kind)
                .iter()
                .map(|a| a.norm_sqr())
                .sum();
        }
        Ok(probs)
    }

    /// Projective Bell-basis measurement of qubits `(i, j)`: Born-rule
    /// sampling over the four Bell outcomes, collapse and renormalize.
    pub fn measure_bell<R: Rng>(
        &mut self,
        i: usize,
        j: usize,
        rng: &mut R,
    ) -> Result<(BellKind, MeasurementRecord), SimError> {
        let probs = self.bell_probabilities(i, j)?;
        let mut u: f64 = rng.random();
        let mut chosen = None;
        for (k, &p) in probs.iter().enumerate() {
            if u < p {
                chosen = Some(k);
                break;
            }
            u -= p;
        }
        // Floating-point slack: fall back to the most probable outcome.
        let k = chosen.unwrap_or_else(|| {
            probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, _)| k)
                .unwrap()
        });
        let kind = BellKind::ALL[k];
        // Collapse onto |B⟩ ⊗ χ, χ the rest-register component.
        let prob = self.project_bell(i, j, kind)?;
        let record = MeasurementRecord {
            qubit_indices: vec![i, j],
            outcome: MeasurementOutcome::Bell(kind),
            probability: prob,
        };
        Ok((kind, record))
    }

    /// Projects qubits `(i, j)` onto the given Bell state and renormalizes,
    /// returning the outcome's Born probability. Supports exhaustive
    /// enumeration of measurement branches; if the returned probability is
    /// (numerically) zero the post-projection state is meaningless and must
    /// be discarded.
    pub fn project_bell(&mut self, i: usize, j: usize, kind: BellKind) -> Result<f64, SimError> {
        self.check_distinct_pair(i, j)?;
        let components = self.bell_components(i, j, kind);
        let prob: f64 = components.iter().map(|a| a.norm_sqr()).sum();
        if prob <= f64::MIN_POSITIVE {
            return Ok(0.0);
        }
        let mi = self.mask(i);
        let mj = self.mask(j);
        let f = kind.flip_bit();
        let sign = if kind.phase_bit() == 0 { 1.0 } else { -1.0 };
        let scale = 1.0 / prob.sqrt();
        let mut rest_idx = 0;
        let mut new_amps = vec![Complex64::ZERO; self.amps.len()];
        for base in 0..self.amps.len() {
            if base & (mi | mj) != 0 {
                continue;
            }
            let chi = components[rest_idx] * scale;
            rest_idx += 1;
            let lo = if f == 0 { base } else { base | mj };
            let hi = if f == 0 { base | mi | mj } else { base | mi };
            new_amps[lo] = chi * FRAC_1_SQRT_2;
            new_amps[hi] = chi * sign * FRAC_1_SQRT_2;
        }
        self.amps = new_amps;
        Ok(prob)
    }

    /// The re-pairing swap on a 4-qubit group: SWAP of positions 1 and 2.
    /// Involutive, so the same call also restores the original order.
    pub fn swap_pairing(&mut self) -> Result<(), SimError> {
        if self.num_qubits != 4 {
            return Err(SimError::WrongArity {
                expected: 4,
                actual: self.num_qubits,
            });
        }
        self.apply(Gate::Swap(1, 2))
    }

    /// Expands a 4-qubit state in the Bell⊗Bell basis of the given pairing.
    /// Entry `[k1][k2]` is `⟨B_{k1}(a,b) ⊗ B_{k2}(c,d) | ψ⟩`; the squared
    /// magnitudes sum to 1.
    pub fn bell_decomposition(
        &self,
        pairing: ((usize, usize), (usize, usize)),
    ) -> Result<[[Amplitude; 4]; 4], SimError> {
        if self.num_qubits != 4 {
            return Err(SimError::WrongArity {
                expected: 4,
                actual: self.num_qubits,
            });
        }
        let ((a, b), (c, d)) = pairing;
        let mut seen = [false; 4];
        for q in [a, b, c, d] {
            if q >= 4 {
                return Err(SimError::InvalidPairing);
            }
            if seen[q] {
                return Err(SimError::InvalidPairing);
            }
            seen[q] = true;
        }
        let masks = [self.mask(a), self.mask(b), self.mask(c), self.mask(d)];
        let mut out = [[Complex64::ZERO; 4]; 4];
        for (k1, kind1) in BellKind::ALL.iter().enumerate() {
            for (k2, kind2) in BellKind::ALL.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                // Sum over the two components of each Bell factor.
                for hi1 in 0..2usize {
                    for hi2 in 0..2usize {
                        let b1 = if hi1 == 0 {
                            (0, kind1.flip_bit() as usize)
                        } else {
                            (1, 1 - kind1.flip_bit() as usize)
                        };
                        let b2 = if hi2 == 0 {
                            (0, kind2.flip_bit() as usize)
                        } else {
                            (1, 1 - kind2.flip_bit() as usize)
                        };
                        let mut idx = 0usize;
                        for (bit, m) in [b1.0, b1.1, b2.0, b2.1].iter().zip(masks.iter()) {
                            if *bit == 1 {
                                idx |= m;
                            }
                        }
                        let s1 = if hi1 == 1 && kind1.phase_bit() == 1 {
                            -1.0
                        } else {
                            1.0
                        };
                        let s2 = if hi2 == 1 && kind2.phase_bit() == 1 {
                            -1.0
                        } else {
                            1.0
                        };
                        acc += self.amps[idx] * (s1 * s2 * 0.5);
                    }
                }
                out[k1][k2] = acc;
            }
        }
        Ok(out)
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &StateVector) -> Result<Amplitude, SimError> {
        if self.num_qubits != other.num_qubits {
            return Err(SimError::DimensionMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Reduced 2×2 density matrix of one qubit (row/column order `|0⟩,|1⟩`).
    pub fn qubit_density(&self, qubit: usize) -> Result<[[Amplitude; 2]; 2], SimError> {
        self.check_qubit(qubit)?;
        let m = self.mask(qubit);
        let mut rho = [[Complex64::ZERO; 2]; 2];
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let bit = usize::from(i & m != 0);
            rho[bit][bit] += a * a.conj();
            // Off-diagonal partner shares all other bits.
            let other = i ^ m;
            let partner = self.amps[other];
            if partner.norm_sqr() != 0.0 && bit == 1 {
                rho[1][0] += a * partner.conj();
                rho[0][1] += partner * a.conj();
            }
        }
        Ok(rho)
    }
}

/// Trace distance between two pure states: `sqrt(1 − |⟨a|b⟩|²)`.
pub fn trace_distance_pure(a: &StateVector, b: &StateVector) -> Result<f64, SimError> {
    let ov = a.overlap(b)?;
    Ok((1.0 - ov.norm_sqr()).max(0.0).sqrt())
}

/// Trace distance `½‖ρ−σ‖₁` between two single-qubit density matrices.
pub fn trace_distance_qubit(rho: &[[Amplitude; 2]; 2], sigma: &[[Amplitude; 2]; 2]) -> f64 {
    // δ is Hermitian traceless up to fp noise; its eigenvalues are ±√(det·−1).
    let d00 = rho[0][0] - sigma[0][0];
    let d01 = rho[0][1] - sigma[0][1];
    let d10 = rho[1][0] - sigma[1][0];
    let d11 = rho[1][1] - sigma[1][1];
    // ½(|λ1| + |λ2|) with λ from the 2×2 eigenvalue formula.
    let tr = d00 + d11;
    let det = d00 * d11 - d01 * d10;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = (tr + disc) * 0.5;
    let l2 = (tr - disc) * 0.5;
    0.5 * (l1.norm() + l2.norm())
}
