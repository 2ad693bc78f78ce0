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

//! Protocol orchestration: state preparation, the three channel legs with
//! adversary hooks, restoration, the step 5/6 checks, and key assembly.
//!
//! Each group keeps its own state vector. A measured transit qubit collapses
//! in place and travels on as the regenerated `|b⟩` (the two are the same
//! state); attacks may append wires (probes, ancillas, fakes) to a group's
//! register and re-route which wire is in transit.
//!
//! Randomness is split into fixed named streams (see [`crate::streams`]):
//! TP's preparation coins, the users' choices and measurement draws, the
//! public selection coin, TP's measurement draws, and the adversary's
//! stream. Adding or removing an attack therefore never changes what the
//! honest parties do.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::sift::{sift, SiftClass};
use super::{
    assemble_keys, compare, encrypt, AttackStrategy, BellPublication, ChannelLeg, CheckClass,
    GroupPlan, GroupRecord, KeyBits, KeyName, PartyView, PerQubitOps, ProtocolError, ProtocolStage,
    ResourceCounters, Role, RunConfig, TpStrategy, Transcript, TransitSlot, UserOp,
    ViolationSummary, TRANSCRIPT_SCHEMA,
};
use crate::statevector::{BellKind, Gate, StateVector};
use crate::streams::{names, SeedSplitter};

/// One group's live quantum register and bookkeeping during a run.
struct GroupSim {
    plan: GroupPlan,
    state: StateVector,
    /// Wire currently occupying each transit position.
    transit: [usize; 4],
    alice: [Option<(UserOp, Option<u8>)>; 4],
    bob: [Option<(UserOp, Option<u8>)>; 4],
    check_group: bool,
    tp_measurements: Vec<crate::statevector::MeasurementRecord>,
}

impl GroupSim {
    fn transit_ops(&self) -> [PerQubitOps; 4] {
        std::array::from_fn(|p| {
            let (alice_op, alice_bit) = self.alice[p].expect("alice acted on every qubit");
            let (bob_op, bob_bit) = self.bob[p].expect("bob acted on every qubit");
            PerQubitOps {
                alice_op,
                alice_bit,
                bob_op,
                bob_bit,
            }
        })
    }

    fn record(&self) -> GroupRecord {
        GroupRecord {
            plan: self.plan,
            check_group: self.check_group,
            transit_ops: self.transit_ops(),
            tp_measurements: self.tp_measurements.clone(),
        }
    }
}

/// A sifted fragment with both holders' bit copies, in original-position
/// order. `primary` is the canonical holder (Alice for `K_AB`, TP for the
/// other two); `secondary` is the counterpart's copy.
#[derive(Debug, Clone, Default)]
pub struct KeyFragment {
    pub origins: Vec<super::BitOrigin>,
    pub primary: Vec<u8>,
    pub secondary: Vec<u8>,
}

impl KeyFragment {
    fn push(&mut self, group: usize, position: usize, primary: u8, secondary: u8) {
        self.origins.push(super::BitOrigin { group, position });
        self.primary.push(primary);
        self.secondary.push(secondary);
    }

    pub fn len(&self) -> usize {
        self.primary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primary.is_empty()
    }

    pub fn agree(&self) -> bool {
        self.primary == self.secondary
    }

    fn key_bits(&self, bits: &[u8]) -> KeyBits {
        KeyBits {
            bits: bits.to_vec(),
            sources: self.origins.clone(),
        }
    }

    pub fn primary_bits(&self) -> KeyBits {
        self.key_bits(&self.primary)
    }

    pub fn secondary_bits(&self) -> KeyBits {
        self.key_bits(&self.secondary)
    }
}

/// Everything collected while the quantum part of a run executes, before
/// detection thresholds and key sufficiency are enforced. Attack evaluation
/// consumes this directly so that aborts never truncate its statistics.
pub struct RawRun {
    pub records: Vec<GroupRecord>,
    pub check_groups: Vec<usize>,
    pub publications: Vec<BellPublication>,
    pub step5_violations: ViolationSummary,
    pub step6_violations: ViolationSummary,
    pub kab: KeyFragment,
    pub kta: KeyFragment,
    pub ktb: KeyFragment,
    pub counters: ResourceCounters,
    /// Final per-group registers (wires the adversary appended included).
    pub final_states: Vec<StateVector>,
    /// Final wire at each transit position, per group.
    pub final_transit: Vec<[usize; 4]>,
    /// Bits a dishonest TP extracted by Z-measuring, keyed by
    /// (group, original position).
    pub tp_learned_bits: BTreeMap<(usize, usize), u8>,
}

impl RawRun {
    pub fn all_violations(&self) -> ViolationSummary {
        let mut total = self.step5_violations.clone();
        total.merge(&self.step6_violations);
        total
    }
}

/// Draws the step-1 swap coin and prepares one group. Honest TP emits
/// `|φ+⟩⊗|φ+⟩`; a fake-state TP emits a random Z-basis product.
fn prepare_group(
    index: usize,
    strategy: TpStrategy,
    rng: &mut ChaCha12Rng,
) -> Result<GroupSim, ProtocolError> {
    let swapped = rng.random_bool(0.5);
    let mut state = match strategy {
        TpStrategy::FakeZBasisStates => {
            let bits: [u8; 4] = std::array::from_fn(|_| u8::from(rng.random::<bool>()));
            StateVector::from_bits(&bits)
        }
        _ => {
            let phi = StateVector::prepare_bell(BellKind::PhiPlus);
            phi.tensor(&phi)
        }
    };
    if swapped {
        state.swap_pairing()?;
    }
    Ok(GroupSim {
        plan: GroupPlan {
            group_index: index,
            swapped,
        },
        state,
        transit: [0, 1, 2, 3],
        alice: [None; 4],
        bob: [None; 4],
        check_group: false,
        tp_measurements: Vec::new(),
    })
}

/// Honest step-1 preparation, exposed for direct inspection: `2n` four-qubit
/// groups, each `|φ+⟩⊗|φ+⟩` with the swap applied per its plan.
pub fn tp_prepare<R: Rng>(
    n: usize,
    rng: &mut R,
) -> Result<Vec<(StateVector, GroupPlan)>, ProtocolError> {
    if n == 0 {
        return Err(ProtocolError::InvalidConfig("n must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(2 * n);
    for index in 0..2 * n {
        let swapped = rng.random_bool(0.5);
        let phi = StateVector::prepare_bell(BellKind::PhiPlus);
        let mut state = phi.tensor(&phi);
        if swapped {
            state.swap_pairing()?;
        }
        out.push((
            state,
            GroupPlan {
                group_index: index,
                swapped,
            },
        ));
    }
    Ok(out)
}

/// One classical user's action on one transit qubit: a fair coin picks
/// measure or reflect; measuring collapses the wire to `|b⟩`, which doubles
/// as the regenerated qubit sent onward.
pub fn user_act<R: Rng>(
    state: &mut StateVector,
    wire: usize,
    rng: &mut R,
) -> Result<(UserOp, Option<u8>), ProtocolError> {
    if rng.random_bool(0.5) {
        let (bit, _) = state.measure_z(wire, rng)?;
        Ok((UserOp::Measure, Some(bit)))
    } else {
        Ok((UserOp::Reflect, None))
    }
}

/// Step-4 restoration: undo the step-1 swap on whatever wires arrived at the
/// group's transit positions.
pub fn tp_restore(
    state: &mut StateVector,
    plan: &GroupPlan,
    transit: &[usize; 4],
) -> Result<(), ProtocolError> {
    if plan.swapped {
        state.apply(Gate::Swap(transit[1], transit[2]))?;
    }
    Ok(())
}

/// The step-5 public coin: exactly half of the groups, uniformly at random.
pub fn select_check_groups<R: Rng>(
    num_groups: usize,
    rng: &mut R,
) -> Result<BTreeSet<usize>, ProtocolError> {
    if !num_groups.is_multiple_of(2) {
        return Err(ProtocolError::OddGroupCount(num_groups));
    }
    let half = num_groups / 2;
    let mut indices: Vec<usize> = (0..num_groups).collect();
    for i in 0..half {
        let j = i + rng.random_range(0..num_groups - i);
        indices.swap(i, j);
    }
    Ok(indices[..half].iter().copied().collect())
}

fn user_pass(
    role: Role,
    groups: &mut [GroupSim],
    rng: &mut ChaCha12Rng,
    counters: &mut ResourceCounters,
) -> Result<(), ProtocolError> {
    for group in groups.iter_mut() {
        for pos in 0..4 {
            let wire = group.transit[pos];
            let acted = user_act(&mut group.state, wire, rng)?;
            match role {
                Role::Alice => {
                    counters.alice_qubits_received += 1;
                    if acted.0 == UserOp::Measure {
                        counters.alice_qubits_regenerated += 1;
                    }
                    group.alice[pos] = Some(acted);
                }
                Role::Bob => {
                    counters.bob_qubits_received += 1;
                    if acted.0 == UserOp::Measure {
                        counters.bob_qubits_regenerated += 1;
                    }
                    group.bob[pos] = Some(acted);
                }
                Role::Tp => unreachable!("TP does not take user passes"),
            }
        }
    }
    Ok(())
}

/// Runs the quantum phase of the protocol end to end and reports everything
/// observed, deferring the abort policy and key assembly to the caller.
pub fn run_protocol_raw(
    config: &RunConfig,
    mut attack: Option<&mut dyn AttackStrategy>,
) -> Result<RawRun, ProtocolError> {
    config.validate()?;
    let honest_world = attack.is_none() && config.tp_strategy.is_honest();
    let splitter = SeedSplitter::new(config.seed);
    let mut prep_rng = splitter.stream(names::PREPARE);
    let mut user_rng = splitter.stream(names::USER_OPS);
    let mut sel_rng = splitter.stream(names::SELECTION);
    let mut tp_rng = splitter.stream(names::TP);
    let mut adv_rng = splitter.stream(names::ADVERSARY);

    let num_groups = 2 * config.n;
    let mut counters = ResourceCounters {
        secret_bits_compared: config.n as u64,
        ..ResourceCounters::default()
    };

    // Step 1: prepare and (maybe) re-pair each group.
    let mut groups = (0..num_groups)
        .map(|g| prepare_group(g, config.tp_strategy, &mut prep_rng))
        .collect::<Result<Vec<_>, _>>()?;
    counters.tp_qubits_prepared = 4 * num_groups as u64;

    // Steps 2-3: circulate through the three legs, adversary hooks while the
    // qubits are in flight, each user acting once the leg completes.
    for leg in ChannelLeg::ALL {
        if let Some(strategy) = attack.as_deref_mut() {
            for (g, group) in groups.iter_mut().enumerate() {
                for pos in 0..4 {
                    let slot = TransitSlot {
                        group: g,
                        position: pos,
                    };
                    let wire = group.transit[pos];
                    group.transit[pos] =
                        strategy.intercept(leg, slot, &mut group.state, wire, &mut adv_rng);
                }
            }
        }
        match leg {
            ChannelLeg::TpToAlice => {
                user_pass(Role::Alice, &mut groups, &mut user_rng, &mut counters)?
            }
            ChannelLeg::AliceToBob => {
                user_pass(Role::Bob, &mut groups, &mut user_rng, &mut counters)?
            }
            ChannelLeg::BobToTp => {}
        }
    }

    // Step 4: restore original order.
    for group in &mut groups {
        let transit = group.transit;
        tp_restore(&mut group.state, &group.plan, &transit)?;
    }

    // Step 5: public selection, TP publishes Bell results, users reveal ops.
    let check_groups = select_check_groups(num_groups, &mut sel_rng)?;
    let mut publications = Vec::new();
    let mut step5_violations = ViolationSummary::default();
    let mut step6_violations = ViolationSummary::default();
    let mut tp_learned_bits = BTreeMap::new();
    let mut kab = KeyFragment::default();
    let mut kta = KeyFragment::default();
    let mut ktb = KeyFragment::default();

    for &g in &check_groups {
        let group = &mut groups[g];
        group.check_group = true;
        let mut published = [BellKind::PhiPlus; 2];
        match config.tp_strategy {
            TpStrategy::Honest => {
                for (pair, slot) in published.iter_mut().enumerate() {
                    let (w1, w2) = (group.transit[2 * pair], group.transit[2 * pair + 1]);
                    let (kind, mut rec) = group.state.measure_bell(w1, w2, &mut tp_rng)?;
                    rec.qubit_indices = vec![2 * pair, 2 * pair + 1];
                    group.tp_measurements.push(rec);
                    *slot = kind;
                }
            }
            TpStrategy::ZMeasureThenRandomPublish | TpStrategy::FakeZBasisStates => {
                // Z-measure everything (this is the eavesdropping payoff),
                // then publish phi+/phi- by coin toss.
                for q in 0..4 {
                    let (bit, mut rec) = group.state.measure_z(group.transit[q], &mut tp_rng)?;
                    rec.qubit_indices = vec![q];
                    group.tp_measurements.push(rec);
                    tp_learned_bits.insert((g, q), bit);
                }
                for slot in published.iter_mut() {
                    *slot = if tp_rng.random_bool(0.5) {
                        BellKind::PhiPlus
                    } else {
                        BellKind::PhiMinus
                    };
                }
            }
        }
        for (pair, kind) in published.into_iter().enumerate() {
            publications.push(BellPublication {
                group: g,
                pair,
                stage: ProtocolStage::Step5,
                kind,
            });
        }

        // Operations become public; sift per the table.
        let record = group.record();
        let classes = sift(&record);
        let ops = record.original_ops();
        for (pair, &claimed) in published.iter().enumerate() {
            let q1 = 2 * pair;
            if classes[q1] == SiftClass::EcBell {
                step5_violations.record(CheckClass::EcBellStep5, claimed != BellKind::PhiPlus);
            }
            for q in [q1, q1 + 1] {
                if classes[q] == SiftClass::KabBit {
                    let a = ops[q].alice_bit.expect("measure op carries a bit");
                    let b = ops[q].bob_bit.expect("measure op carries a bit");
                    if honest_world && a != b {
                        return Err(ProtocolError::KeyConsistencyViolation {
                            key: KeyName::Kab,
                            group: g,
                            position: q,
                        });
                    }
                    kab.push(g, q, a, b);
                }
            }
        }
    }

    // Step 6: users reveal first, TP measures in the announced basis.
    for (g, group) in groups.iter_mut().enumerate() {
        if check_groups.contains(&g) {
            continue;
        }
        let record = group.record();
        let classes = sift(&record);
        let ops = record.original_ops();
        for pair in 0..2 {
            let q1 = 2 * pair;
            if classes[q1] == SiftClass::EcBell {
                let kind = match config.tp_strategy {
                    TpStrategy::FakeZBasisStates => {
                        // TP knows these are reflect-reflect pairs and lies.
                        BellKind::PhiPlus
                    }
                    _ => {
                        let (w1, w2) = (group.transit[q1], group.transit[q1 + 1]);
                        let (kind, mut rec) = group.state.measure_bell(w1, w2, &mut tp_rng)?;
                        rec.qubit_indices = vec![q1, q1 + 1];
                        group.tp_measurements.push(rec);
                        kind
                    }
                };
                publications.push(BellPublication {
                    group: g,
                    pair,
                    stage: ProtocolStage::Step6,
                    kind,
                });
                step6_violations.record(CheckClass::EcBellStep6, kind != BellKind::PhiPlus);
                continue;
            }
            let mut pair_tp_bits = [None, None];
            for (idx, q) in [q1, q1 + 1].into_iter().enumerate() {
                match classes[q] {
                    SiftClass::KtaBit | SiftClass::KtbBit | SiftClass::EcZ => {
                        let (t, mut rec) = group.state.measure_z(group.transit[q], &mut tp_rng)?;
                        rec.qubit_indices = vec![q];
                        group.tp_measurements.push(rec);
                        match classes[q] {
                            SiftClass::KtaBit => {
                                let a = ops[q].alice_bit.expect("measure op carries a bit");
                                if honest_world && t != a {
                                    return Err(ProtocolError::KeyConsistencyViolation {
                                        key: KeyName::Kta,
                                        group: g,
                                        position: q,
                                    });
                                }
                                kta.push(g, q, t, a);
                            }
                            SiftClass::KtbBit => {
                                let b = ops[q].bob_bit.expect("measure op carries a bit");
                                if honest_world && t != b {
                                    return Err(ProtocolError::KeyConsistencyViolation {
                                        key: KeyName::Ktb,
                                        group: g,
                                        position: q,
                                    });
                                }
                                ktb.push(g, q, t, b);
                            }
                            SiftClass::EcZ => {
                                let a = ops[q].alice_bit.expect("measure op carries a bit");
                                let b = ops[q].bob_bit.expect("measure op carries a bit");
                                step6_violations
                                    .record(CheckClass::EcZThreeWay, !(a == b && b == t));
                                pair_tp_bits[idx] = Some(t);
                            }
                            _ => unreachable!(),
                        }
                    }
                    // Lone reflected qubit: discarded unmeasured.
                    SiftClass::Discard => {}
                    SiftClass::KabBit | SiftClass::EcBell => unreachable!("step-6 classes only"),
                }
            }
            if let (Some(t1), Some(t2)) = (pair_tp_bits[0], pair_tp_bits[1]) {
                step6_violations.record(CheckClass::EcZPair, t1 != t2);
            }
        }
    }

    let mut records = Vec::with_capacity(num_groups);
    let mut final_states = Vec::with_capacity(num_groups);
    let mut final_transit = Vec::with_capacity(num_groups);
    for group in groups {
        records.push(group.record());
        final_states.push(group.state);
        final_transit.push(group.transit);
    }

    Ok(RawRun {
        records,
        check_groups: check_groups.into_iter().collect(),
        publications,
        step5_violations,
        step6_violations,
        kab,
        kta,
        ktb,
        counters,
        final_states,
        final_transit,
        tp_learned_bits,
    })
}

fn stage_gate(
    stage: ProtocolStage,
    violations: &ViolationSummary,
    threshold: f64,
) -> Result<(), ProtocolError> {
    let events = violations.events();
    if events == 0 {
        return Ok(());
    }
    let rate = violations.rate();
    if rate > threshold {
        return Err(ProtocolError::DetectionAbort {
            stage,
            violations: violations.violations(),
            events,
            rate,
            threshold,
        });
    }
    Ok(())
}

/// Executes steps 1-8 under the given configuration and optional channel
/// attack. Returns the full transcript, or `DetectionAbort` when a stage's
/// violation rate exceeds the threshold, or `InsufficientKey` when a sifted
/// fragment is shorter than `n` (rerun with a fresh seed segment).
pub fn run_protocol(
    config: &RunConfig,
    attack: Option<&mut dyn AttackStrategy>,
) -> Result<Transcript, ProtocolError> {
    let attack_name = attack.as_ref().map(|a| a.name());
    let raw = run_protocol_raw(config, attack)?;
    finish_run(config, attack_name, raw)
}

/// Applies the detection policy to a raw run, assembles keys, and runs
/// steps 7-8. `run_protocol` is this composed with [`run_protocol_raw`];
/// callers that need the raw quantum state (probe analysis) can do the two
/// stages themselves.
pub fn finish_run(
    config: &RunConfig,
    attack_name: Option<String>,
    mut raw: RawRun,
) -> Result<Transcript, ProtocolError> {
    if !config.continue_on_detection {
        stage_gate(
            ProtocolStage::Step5,
            &raw.step5_violations,
            config.threshold,
        )?;
        stage_gate(
            ProtocolStage::Step6,
            &raw.step6_violations,
            config.threshold,
        )?;
    }

    let n = config.n;
    // Canonical copies: Alice's K_AB, TP's K_TA and K_TB.
    let keys = assemble_keys(
        raw.kab.primary_bits(),
        raw.kta.primary_bits(),
        raw.ktb.primary_bits(),
        n,
    )?;
    // Counterpart copies truncate identically (same ordering, same length).
    let counterpart = assemble_keys(
        raw.kab.secondary_bits(),
        raw.kta.secondary_bits(),
        raw.ktb.secondary_bits(),
        n,
    )?;

    let key_agreement = super::KeyAgreement {
        k_ab: keys.k_ab == counterpart.k_ab,
        k_ta: keys.k_ta == counterpart.k_ta,
        k_tb: keys.k_tb == counterpart.k_tb,
    };

    // Step 7: each party encrypts with its own copies.
    let alice_kab = &keys.k_ab;
    let bob_kab = &counterpart.k_ab;
    let alice_kta = &counterpart.k_ta;
    let tp_kta = &keys.k_ta;
    let bob_ktb = &counterpart.k_tb;
    let tp_ktb = &keys.k_tb;
    let ciphertext_a = encrypt(&config.secret_a, &alice_kab.bits, &alice_kta.bits)?;
    let ciphertext_b = encrypt(&config.secret_b, &bob_kab.bits, &bob_ktb.bits)?;

    // Step 8: TP compares and announces.
    let comparison = compare(&ciphertext_a, &ciphertext_b, &tp_kta.bits, &tp_ktb.bits)?;
    raw.counters.comparison_bits_published = 2 * n as u64 + 1;

    let verdict = comparison.verdict;
    let view = |role: Role, entries: Vec<(&str, KeyBits)>| PartyView {
        role,
        keys: entries
            .into_iter()
            .map(|(name, bits)| (name.to_string(), bits))
            .collect(),
        verdict,
    };
    let views = vec![
        view(
            Role::Tp,
            vec![("k_ta", tp_kta.clone()), ("k_tb", tp_ktb.clone())],
        ),
        view(
            Role::Alice,
            vec![("k_ab", alice_kab.clone()), ("k_ta", alice_kta.clone())],
        ),
        view(
            Role::Bob,
            vec![("k_ab", bob_kab.clone()), ("k_tb", bob_ktb.clone())],
        ),
    ];

    let mut violations = raw.step5_violations.clone();
    violations.merge(&raw.step6_violations);

    Ok(Transcript {
        schema: TRANSCRIPT_SCHEMA.to_string(),
        config: config.clone(),
        attack: attack_name,
        plans: raw.records.iter().map(|r| r.plan).collect(),
        check_groups: raw.check_groups,
        groups: raw.records,
        publications: raw.publications,
        violations,
        keys,
        key_agreement,
        ciphertext_a,
        ciphertext_b,
        comparison,
        views,
        counters: raw.counters,
    })
}
