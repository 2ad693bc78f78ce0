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

//! The eight-step SQPC protocol engine.
//!
//! TP prepares `2n` groups of two `|φ+⟩` Bell pairs, randomly re-pairs each
//! group (a SWAP of the two middle qubits, undone after the round trip), and
//! circulates all qubits TP → Alice → Bob → TP. Each classical user either
//! Z-measures-and-resends or reflects each qubit. Half the groups, chosen by
//! a public coin, are consumed in step 5 (TP Bell-measures and publishes
//! *before* the users reveal their operations); the rest are consumed in
//! step 6 (users reveal first, TP measures in the announced-appropriate
//! basis). Sifting the operation table yields the three keys `K_AB`, `K_TA`,
//! `K_TB`, which one-time-pad the equality comparison of the two secrets.
//!
//! Check events and who sees what:
//!
//! - both-reflect pairs must Bell-measure to `|φ+⟩` (steps 5 and 6);
//! - step-6 both-measure qubits are announced and checked three ways, and a
//!   fully both-measured pair must additionally yield equal TP bits, the Z
//!   image of the pair's original `|φ+⟩` correlation;
//! - key bit values are never announced; each party assembles its own key
//!   copies, ordered by original (restored) qubit position, TP having
//!   published the position ordering of each key after step 6.

mod engine;
mod sift;

pub use engine::{
    finish_run, run_protocol, run_protocol_raw, select_check_groups, tp_prepare, tp_restore,
    user_act, KeyFragment, RawRun,
};
pub use sift::{sift, SiftClass};

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::statevector::{MeasurementRecord, SimError, StateVector};

/// Protocol-level failures.
#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("check-group selection needs an even group count, got {0}")]
    OddGroupCount(usize),
    #[error("bit sequences of lengths {left} and {right} cannot be combined")]
    LengthMismatch { left: usize, right: usize },
    #[error(
        "detection: {violations}/{events} checks violated at stage {stage:?} (rate {rate:.4} > threshold {threshold})"
    )]
    DetectionAbort {
        stage: ProtocolStage,
        violations: u64,
        events: u64,
        rate: f64,
        threshold: f64,
    },
    #[error("insufficient key material for {key:?}: have {have}, need {need}; rerun with fresh resources")]
    InsufficientKey {
        key: KeyName,
        have: usize,
        need: usize,
    },
    #[error("honest run produced disagreeing {key:?} bits at group {group} position {position}")]
    KeyConsistencyViolation {
        key: KeyName,
        group: usize,
        position: usize,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProtocolStage {
    Step5,
    Step6,
}

/// The three protocol roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Tp,
    Alice,
    Bob,
}

/// A classical user's per-qubit choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserOp {
    Measure,
    Reflect,
}

/// A private binary string of length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Secret {
    bits: Vec<u8>,
}

impl Secret {
    pub fn from_bits(bits: Vec<u8>) -> Secret {
        Secret {
            bits: bits.into_iter().map(|b| b & 1).collect(),
        }
    }

    /// Parses `"10110010"` or `"0xb2"` into an `n`-bit secret.
    pub fn parse(text: &str, n: usize) -> Result<Secret, ProtocolError> {
        let bits = if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
            if !n.is_multiple_of(4) || hex.len() != n / 4 {
                return Err(ProtocolError::InvalidConfig(format!(
                    "hex secret {text:?} must encode exactly {n} bits"
                )));
            }
            let mut bits = Vec::with_capacity(n);
            for ch in hex.chars() {
                let v = ch.to_digit(16).ok_or_else(|| {
                    ProtocolError::InvalidConfig(format!("bad hex digit {ch:?} in secret"))
                })?;
                for shift in (0..4).rev() {
                    bits.push(((v >> shift) & 1) as u8);
                }
            }
            bits
        } else {
            if text.len() != n {
                return Err(ProtocolError::InvalidConfig(format!(
                    "binary secret has {} bits, expected {n}",
                    text.len()
                )));
            }
            text.chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(ProtocolError::InvalidConfig(format!(
                        "bad binary digit {c:?} in secret"
                    ))),
                })
                .collect::<Result<_, _>>()?
        };
        Ok(Secret { bits })
    }

    pub fn random<R: Rng>(n: usize, rng: &mut R) -> Secret {
        Secret {
            bits: (0..n).map(|_| u8::from(rng.random::<bool>())).collect(),
        }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_binary_string(&self) -> String {
        self.bits.iter().map(|b| char::from(b'0' + b)).collect()
    }
}

/// TP's per-group preparation decision. The `swapped` coin stays TP-private
/// for the whole run; other parties and adversaries never see it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPlan {
    pub group_index: usize,
    pub swapped: bool,
}

impl GroupPlan {
    /// Transit position that carries original qubit `q` of this group.
    /// The re-pairing SWAP exchanges positions 1 and 2 and is self-inverse.
    pub fn transit_for_original(&self, q: usize) -> usize {
        if self.swapped {
            match q {
                1 => 2,
                2 => 1,
                other => other,
            }
        } else {
            q
        }
    }
}

/// Both users' recorded action on one transit qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerQubitOps {
    pub alice_op: UserOp,
    pub alice_bit: Option<u8>,
    pub bob_op: UserOp,
    pub bob_bit: Option<u8>,
}

/// Everything recorded about one group across the run. User operations are
/// indexed by transit position (what the users actually saw);
/// [`GroupRecord::original_ops`] maps them through the swap permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRecord {
    pub plan: GroupPlan,
    pub check_group: bool,
    pub transit_ops: [PerQubitOps; 4],
    /// TP's measurements after restoration, `qubit_indices` rewritten to
    /// original qubit positions 0..4 within the group.
    pub tp_measurements: Vec<MeasurementRecord>,
}

impl GroupRecord {
    /// User operations re-indexed by original (restored) qubit position.
    pub fn original_ops(&self) -> [PerQubitOps; 4] {
        std::array::from_fn(|q| self.transit_ops[self.plan.transit_for_original(q)])
    }
}

/// Which of the three sifted keys a bit belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyName {
    Kab,
    Kta,
    Ktb,
}

/// Where a key bit came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitOrigin {
    pub group: usize,
    /// Original (restored) qubit position within the group, 0..4.
    pub position: usize,
}

/// A sifted bit sequence with per-bit provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct KeyBits {
    pub bits: Vec<u8>,
    pub sources: Vec<BitOrigin>,
}

impl KeyBits {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn truncated(&self, n: usize) -> KeyBits {
        KeyBits {
            bits: self.bits[..n].to_vec(),
            sources: self.sources[..n].to_vec(),
        }
    }
}

/// The three sifted keys, each truncated to the first `n` bits in original
/// qubit-position order. `k_ab` is the copy held by Alice and Bob, `k_ta`
/// and `k_tb` the copies held by TP.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyTriple {
    pub k_ab: KeyBits,
    pub k_ta: KeyBits,
    pub k_tb: KeyBits,
}

/// God's-eye check that both holders of each key ended with identical bits.
/// Always all-true on honest runs; attacks may corrupt keys undetectably.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyAgreement {
    pub k_ab: bool,
    pub k_ta: bool,
    pub k_tb: bool,
}

/// XOR-encrypted secret, `Qʲ = k_abʲ ⊕ k_ownʲ ⊕ mʲ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ciphertext {
    pub bits: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equal,
    NotEqual,
}

/// TP's comparison output: `Rʲ = Q_Aʲ ⊕ Q_Bʲ ⊕ k_taʲ ⊕ k_tbʲ`, verdict Equal
/// iff every `Rʲ` is zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonOutcome {
    pub r_bits: Vec<u8>,
    pub verdict: Verdict,
}

/// What one role legitimately holds at the end of a run. The key map never
/// contains `k_ab` for TP, `k_tb` for Alice, or `k_ta` for Bob.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyView {
    pub role: Role,
    /// Keys this role holds, by name, as this role reconstructed them.
    pub keys: BTreeMap<String, KeyBits>,
    pub verdict: Verdict,
}

/// TP's behavior. The dishonest variants aim at learning `K_AB`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TpStrategy {
    #[default]
    Honest,
    /// Step 5: Z-measure the check groups instead of Bell-measuring, then
    /// publish `φ+`/`φ−` by coin toss. Step 6 is played honestly.
    ZMeasureThenRandomPublish,
    /// Step 1: emit uniformly random Z-basis product states instead of Bell
    /// pairs. Step-5 publications are coin tosses; step-6 both-reflect pairs
    /// are claimed `φ+` outright (operations are known by then).
    FakeZBasisStates,
}

impl TpStrategy {
    pub fn is_honest(&self) -> bool {
        matches!(self, TpStrategy::Honest)
    }
}

/// The three one-way channel legs, in transmission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelLeg {
    TpToAlice,
    AliceToBob,
    BobToTp,
}

impl ChannelLeg {
    pub const ALL: [ChannelLeg; 3] = [
        ChannelLeg::TpToAlice,
        ChannelLeg::AliceToBob,
        ChannelLeg::BobToTp,
    ];
}

/// Identifies one transit qubit: group index and transit position 0..4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TransitSlot {
    pub group: usize,
    pub position: usize,
}

/// A wire the adversary appended to a group register and still owns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OwnedWire {
    /// Transit position the wire is associated with.
    pub position: usize,
    /// Qubit index within the group's state vector.
    pub wire: usize,
}

/// An interception hook applied on each channel leg. A strategy may only
/// touch the transit qubit handed to it and wires it appended itself; it
/// never sees honest parties' records or TP's swap plans.
pub trait AttackStrategy {
    /// Name echoed into transcripts and reports.
    fn name(&self) -> String;

    /// Called once per transit qubit per leg, in group-major position-minor
    /// order, while the qubit is in flight. Returns the wire that continues
    /// toward the receiver (usually the one handed in).
    fn intercept(
        &mut self,
        leg: ChannelLeg,
        slot: TransitSlot,
        state: &mut StateVector,
        wire: usize,
        rng: &mut ChaCha12Rng,
    ) -> usize;

    /// Probe/ancilla wires retained in the given group's register, for
    /// post-run information analysis.
    fn owned_wires(&self, _group: usize) -> Vec<OwnedWire> {
        Vec::new()
    }
}

/// Full configuration of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub seed: u64,
    pub secret_a: Secret,
    pub secret_b: Secret,
    #[serde(default)]
    pub tp_strategy: TpStrategy,
    /// Violation-rate threshold above which the run aborts. The simulator is
    /// noiseless, so the default is 0: any violation aborts.
    #[serde(default)]
    pub threshold: f64,
    /// Collect full statistics instead of aborting on detection; used by
    /// attack evaluation where aborts would truncate sampling.
    #[serde(default)]
    pub continue_on_detection: bool,
}

impl RunConfig {
    pub fn honest(n: usize, seed: u64, secret_a: Secret, secret_b: Secret) -> RunConfig {
        RunConfig {
            n,
            seed,
            secret_a,
            secret_b,
            tp_strategy: TpStrategy::Honest,
            threshold: 0.0,
            continue_on_detection: false,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.n == 0 {
            return Err(ProtocolError::InvalidConfig("n must be at least 1".into()));
        }
        if self.secret_a.len() != self.n || self.secret_b.len() != self.n {
            return Err(ProtocolError::InvalidConfig(format!(
                "secret lengths ({}, {}) must equal n = {}",
                self.secret_a.len(),
                self.secret_b.len(),
                self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) || self.threshold.is_nan() {
            return Err(ProtocolError::InvalidConfig(
                "threshold must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Classes of public eavesdropping checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckClass {
    /// Step-5 both-reflect pair: published Bell result must be `φ+`.
    EcBellStep5,
    /// Step-6 both-reflect pair: measured Bell result must be `φ+`.
    EcBellStep6,
    /// Step-6 both-measure qubit: announced Alice, Bob and TP bits must agree.
    EcZThreeWay,
    /// Step-6 pair with both qubits both-measured: TP's two Z bits must agree
    /// (the `|φ+⟩` correlation in the Z basis).
    EcZPair,
}

impl CheckClass {
    pub const ALL: [CheckClass; 4] = [
        CheckClass::EcBellStep5,
        CheckClass::EcBellStep6,
        CheckClass::EcZThreeWay,
        CheckClass::EcZPair,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CheckTally {
    pub events: u64,
    pub violations: u64,
}

/// All check outcomes of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ViolationSummary {
    pub per_class: BTreeMap<CheckClass, CheckTally>,
}

impl ViolationSummary {
    pub(crate) fn record(&mut self, class: CheckClass, violated: bool) {
        let tally = self.per_class.entry(class).or_default();
        tally.events += 1;
        if violated {
            tally.violations += 1;
        }
    }

    pub fn events(&self) -> u64 {
        self.per_class.values().map(|t| t.events).sum()
    }

    pub fn violations(&self) -> u64 {
        self.per_class.values().map(|t| t.violations).sum()
    }

    pub fn rate(&self) -> f64 {
        let events = self.events();
        if events == 0 {
            0.0
        } else {
            self.violations() as f64 / events as f64
        }
    }

    pub fn tally(&self, class: CheckClass) -> CheckTally {
        self.per_class.get(&class).copied().unwrap_or_default()
    }

    pub(crate) fn merge(&mut self, other: &ViolationSummary) {
        for (class, tally) in &other.per_class {
            let entry = self.per_class.entry(*class).or_default();
            entry.events += tally.events;
            entry.violations += tally.violations;
        }
    }
}

/// One published Bell result: TP's claim for a restored pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellPublication {
    pub group: usize,
    /// 0 for the pair on original positions (0,1), 1 for (2,3).
    pub pair: usize,
    pub stage: ProtocolStage,
    pub kind: crate::statevector::BellKind,
}

/// Resource counters tallied during a run, the input to qubit-efficiency
/// accounting. Regeneration counts are the actual numbers of measure
/// operations; efficiency accounting values them at their mean, half the
/// received qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResourceCounters {
    pub tp_qubits_prepared: u64,
    pub alice_qubits_received: u64,
    pub bob_qubits_received: u64,
    pub alice_qubits_regenerated: u64,
    pub bob_qubits_regenerated: u64,
    /// Classical bits published for the comparison itself: both ciphertexts
    /// plus TP's one-bit verdict announcement.
    pub comparison_bits_published: u64,
    /// Shared classical bits produced: the compared secret length.
    pub secret_bits_compared: u64,
}

/// Versioned, serializable record of a completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub schema: String,
    pub config: RunConfig,
    /// Name of the channel attack in effect, if any.
    pub attack: Option<String>,
    pub plans: Vec<GroupPlan>,
    pub check_groups: Vec<usize>,
    pub groups: Vec<GroupRecord>,
    pub publications: Vec<BellPublication>,
    pub violations: ViolationSummary,
    pub keys: KeyTriple,
    pub key_agreement: KeyAgreement,
    pub ciphertext_a: Ciphertext,
    pub ciphertext_b: Ciphertext,
    pub comparison: ComparisonOutcome,
    pub views: Vec<PartyView>,
    pub counters: ResourceCounters,
}

pub const TRANSCRIPT_SCHEMA: &str = "sqpc.transcript.v1";

fn xor_bits(streams: &[&[u8]]) -> Result<Vec<u8>, ProtocolError> {
    let n = streams[0].len();
    for s in streams {
        if s.len() != n {
            return Err(ProtocolError::LengthMismatch {
                left: n,
                right: s.len(),
            });
        }
    }
    Ok((0..n)
        .map(|j| streams.iter().fold(0u8, |acc, s| acc ^ s[j]) & 1)
        .collect())
}

/// Encrypts a secret with the shared key and the own TP key:
/// `Qʲ = k_abʲ ⊕ k_ownʲ ⊕ mʲ`.
pub fn encrypt(secret: &Secret, k_ab: &[u8], k_own: &[u8]) -> Result<Ciphertext, ProtocolError> {
    Ok(Ciphertext {
        bits: xor_bits(&[secret.bits(), k_ab, k_own])?,
    })
}

/// TP's step-8 comparison: `Rʲ = Q_Aʲ ⊕ Q_Bʲ ⊕ k_taʲ ⊕ k_tbʲ`, Equal iff all
/// `Rʲ` vanish. Algebraically `Rʲ = m_Aʲ ⊕ m_Bʲ`.
pub fn compare(
    q_a: &Ciphertext,
    q_b: &Ciphertext,
    k_ta: &[u8],
    k_tb: &[u8],
) -> Result<ComparisonOutcome, ProtocolError> {
    let r_bits = xor_bits(&[&q_a.bits, &q_b.bits, k_ta, k_tb])?;
    let verdict = if r_bits.iter().all(|&b| b == 0) {
        Verdict::Equal
    } else {
        Verdict::NotEqual
    };
    Ok(ComparisonOutcome { r_bits, verdict })
}

/// Orders each fragment by original qubit position (the engine collects them
/// that way) and truncates to the first `n` bits.
pub fn assemble_keys(
    k_ab: KeyBits,
    k_ta: KeyBits,
    k_tb: KeyBits,
    n: usize,
) -> Result<KeyTriple, ProtocolError> {
    for (name, fragment) in [
        (KeyName::Kab, &k_ab),
        (KeyName::Kta, &k_ta),
        (KeyName::Ktb, &k_tb),
    ] {
        if fragment.len() < n {
            return Err(ProtocolError::InsufficientKey {
                key: name,
                have: fragment.len(),
                need: n,
            });
        }
    }
    Ok(KeyTriple {
        k_ab: k_ab.truncated(n),
        k_ta: k_ta.truncated(n),
        k_tb: k_tb.truncated(n),
    })
}
