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

//! Monte Carlo evaluation of attacks.
//!
//! [`evaluate`] runs independent seeded protocol rounds with the attack in
//! place (detection aborts disabled so sampling is never truncated) and
//! aggregates detection statistics, per-check-class violation rates, and the
//! attacker-information metric.
//!
//! The information metric follows the probe-independence idea: every key bit
//! whose transit qubit carries an adversary-owned probe contributes a sample
//! (key bit value, final reduced probe state); the metric is the largest
//! trace distance between probe states conditioned on opposite bit values.
//! It is zero exactly when the retained probes are independent of the key
//! material.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::collective::{sample_constrained_collective, AdversaryError, CollectiveUnitary};
use super::{
    CollectiveAttack, DoubleCnot, EvePairing, InterceptResend, InterceptVariant, MeasureResendBell,
    MeasureResendZ,
};
use crate::protocol::{
    run_protocol_raw, AttackStrategy, CheckClass, CheckTally, KeyFragment, ProtocolError, RawRun,
    RunConfig, Secret, TpStrategy, ViolationSummary,
};
use crate::statevector::{trace_distance_qubit, Amplitude, BellKind, StateVector};
use crate::streams::{names, SeedSplitter};

pub const ATTACK_REPORT_SCHEMA: &str = "sqpc.attack_report.v1";

/// Every attack the toolkit knows by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackSpec {
    None,
    InterceptResendLeg1,
    InterceptResendLeg2,
    MeasureResendZ,
    MeasureResendBell,
    MeasureResendBellRandom,
    DoubleCnot,
    CollectiveIdentity,
    /// Fresh transit-diagonal sample per trial, probe independence enforced.
    CollectiveConstrained,
    /// Fresh transit-diagonal sample per trial, independence not enforced.
    CollectiveUnconstrained,
    TpZmeasure,
    TpFakeStates,
}

impl AttackSpec {
    pub const ALL: [AttackSpec; 12] = [
        AttackSpec::None,
        AttackSpec::InterceptResendLeg1,
        AttackSpec::InterceptResendLeg2,
        AttackSpec::MeasureResendZ,
        AttackSpec::MeasureResendBell,
        AttackSpec::MeasureResendBellRandom,
        AttackSpec::DoubleCnot,
        AttackSpec::CollectiveIdentity,
        AttackSpec::CollectiveConstrained,
        AttackSpec::CollectiveUnconstrained,
        AttackSpec::TpZmeasure,
        AttackSpec::TpFakeStates,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AttackSpec::None => "none",
            AttackSpec::InterceptResendLeg1 => "intercept-resend-leg1",
            AttackSpec::InterceptResendLeg2 => "intercept-resend-leg2",
            AttackSpec::MeasureResendZ => "measure-resend-z",
            AttackSpec::MeasureResendBell => "measure-resend-bell",
            AttackSpec::MeasureResendBellRandom => "measure-resend-bell-random",
            AttackSpec::DoubleCnot => "double-cnot",
            AttackSpec::CollectiveIdentity => "collective-identity",
            AttackSpec::CollectiveConstrained => "collective-constrained",
            AttackSpec::CollectiveUnconstrained => "collective-unconstrained",
            AttackSpec::TpZmeasure => "tp-zmeasure",
            AttackSpec::TpFakeStates => "tp-fake-states",
        }
    }

    pub fn parse(name: &str) -> Result<AttackSpec, AdversaryError> {
        AttackSpec::ALL
            .into_iter()
            .find(|spec| spec.name() == name)
            .ok_or_else(|| AdversaryError::UnknownAttack(name.to_string()))
    }

    pub fn tp_strategy(&self) -> TpStrategy {
        match self {
            AttackSpec::TpZmeasure => TpStrategy::ZMeasureThenRandomPublish,
            AttackSpec::TpFakeStates => TpStrategy::FakeZBasisStates,
            _ => TpStrategy::Honest,
        }
    }

    /// Instantiates the channel strategy for one trial; collective variants
    /// sample a fresh unitary from `sampler`.
    pub fn build(&self, sampler: &mut ChaCha12Rng) -> Option<Box<dyn AttackStrategy>> {
        match self {
            AttackSpec::None | AttackSpec::TpZmeasure | AttackSpec::TpFakeStates => None,
            AttackSpec::InterceptResendLeg1 => {
                Some(Box::new(InterceptResend::new(InterceptVariant::Leg1)))
            }
            AttackSpec::InterceptResendLeg2 => {
                Some(Box::new(InterceptResend::new(InterceptVariant::Leg2)))
            }
            AttackSpec::MeasureResendZ => Some(Box::new(MeasureResendZ::new())),
            AttackSpec::MeasureResendBell => {
                Some(Box::new(MeasureResendBell::new(EvePairing::Consecutive)))
            }
            AttackSpec::MeasureResendBellRandom => {
                Some(Box::new(MeasureResendBell::new(EvePairing::Random)))
            }
            AttackSpec::DoubleCnot => Some(Box::new(DoubleCnot::new())),
            AttackSpec::CollectiveIdentity => Some(Box::new(CollectiveAttack::labeled(
                CollectiveUnitary::identity(),
                "collective-identity",
            ))),
            AttackSpec::CollectiveConstrained => Some(Box::new(CollectiveAttack::labeled(
                sample_constrained_collective(sampler, true).to_unitary(),
                "collective-constrained",
            ))),
            AttackSpec::CollectiveUnconstrained => Some(Box::new(CollectiveAttack::labeled(
                sample_constrained_collective(sampler, false).to_unitary(),
                "collective-unconstrained",
            ))),
        }
    }
}

/// Evaluation parameters: protocol size, root seed, trial count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub n: usize,
    pub seed: u64,
    pub trials: u64,
}

/// Aggregated Monte Carlo result for one attack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub schema: String,
    pub attack: String,
    pub n: usize,
    pub seed: u64,
    pub trials: u64,
    /// Trials with at least one check violation.
    pub detections: u64,
    pub detection_rate: f64,
    /// 95% Wilson interval for the detection rate.
    pub detection_ci_low: f64,
    pub detection_ci_high: f64,
    /// Max trace distance between probe states conditioned on opposite key
    /// bit values; 0 when the attack retains no probes.
    pub info_metric: f64,
    pub probe_states_compared: u64,
    /// Worst-case deviation of the adversary's retained register from
    /// `|0…0⟩`, as `1 − P(all owned wires read 0)`.
    pub ancilla_zero_deviation: f64,
    pub per_class: BTreeMap<CheckClass, CheckTally>,
    /// Key bits of `K_AB` a dishonest TP extracted (equal to the users'
    /// bits), over the total produced.
    pub tp_kab_bits_learned: u64,
    pub tp_kab_bits_total: u64,
}

impl AttackReport {
    pub fn class_rate(&self, class: CheckClass) -> Option<f64> {
        self.per_class
            .get(&class)
            .and_then(|t| (t.events > 0).then(|| t.violations as f64 / t.events as f64))
    }
}

/// 95% Wilson score interval.
fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Probe density matrices keyed by quantized entries so duplicates collapse.
#[derive(Default)]
struct ProbeBucket {
    seen: BTreeSet<[i64; 8]>,
    states: Vec<[[Amplitude; 2]; 2]>,
}

impl ProbeBucket {
    const QUANTUM: f64 = 1e-9;
    const CAP: usize = 4096;

    fn push(&mut self, rho: [[Amplitude; 2]; 2]) {
        if self.states.len() >= Self::CAP {
            return;
        }
        let mut key = [0i64; 8];
        let mut idx = 0;
        for row in &rho {
            for entry in row {
                key[idx] = (entry.re / Self::QUANTUM).round() as i64;
                key[idx + 1] = (entry.im / Self::QUANTUM).round() as i64;
                idx += 2;
            }
        }
        if self.seen.insert(key) {
            self.states.push(rho);
        }
    }
}

fn collect_probe_samples(
    raw: &RawRun,
    attack: &dyn AttackStrategy,
    buckets: &mut [ProbeBucket; 2],
    compared: &mut u64,
) {
    let mut wires_by_group: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    let fragments: [(&KeyFragment, bool); 3] = [
        // Condition on the measuring user's bit: the primary copy for K_AB
        // (Alice), the secondary copy for the TP keys.
        (&raw.kab, true),
        (&raw.kta, false),
        (&raw.ktb, false),
    ];
    for (fragment, use_primary) in fragments {
        for (i, origin) in fragment.origins.iter().enumerate() {
            let bit = if use_primary {
                fragment.primary[i]
            } else {
                fragment.secondary[i]
            };
            let record = &raw.records[origin.group];
            let transit_pos = record.plan.transit_for_original(origin.position);
            let wires = wires_by_group.entry(origin.group).or_insert_with(|| {
                attack
                    .owned_wires(origin.group)
                    .into_iter()
                    .map(|w| (w.position, w.wire))
                    .collect()
            });
            if let Some(&wire) = wires.get(&transit_pos) {
                let rho = raw.final_states[origin.group]
                    .qubit_density(wire)
                    .expect("owned wire is in range");
                buckets[usize::from(bit & 1)].push(rho);
                *compared += 1;
            }
        }
    }
}

/// Probe information metric of one completed run under the given attack:
/// max trace distance between reduced probe states conditioned on opposite
/// key-bit values, plus the number of probe states sampled.
pub fn probe_info_metric(raw: &RawRun, attack: &dyn AttackStrategy) -> (f64, u64) {
    let mut buckets = [ProbeBucket::default(), ProbeBucket::default()];
    let mut compared = 0u64;
    collect_probe_samples(raw, attack, &mut buckets, &mut compared);
    (max_cross_distance(&buckets), compared)
}

fn max_cross_distance(buckets: &[ProbeBucket; 2]) -> f64 {
    let mut max = 0.0f64;
    for rho0 in &buckets[0].states {
        for rho1 in &buckets[1].states {
            max = max.max(trace_distance_qubit(rho0, rho1));
        }
    }
    max
}

/// Worst-case deviation of the adversary's retained wires from `|0…0⟩`
/// across a run's groups, as `1 − P(all owned wires read 0)`.
pub fn ancilla_zero_deviation(raw: &RawRun, attack: &dyn AttackStrategy) -> f64 {
    let mut worst = 0.0f64;
    for (g, state) in raw.final_states.iter().enumerate() {
        let owned = attack.owned_wires(g);
        if owned.is_empty() {
            continue;
        }
        let wires: Vec<usize> = owned.iter().map(|w| w.wire).collect();
        let zeros = vec![0u8; wires.len()];
        let p = state
            .probability_of_bits(&wires, &zeros)
            .expect("owned wires are in range");
        worst = worst.max(1.0 - p);
    }
    worst
}

/// Monte Carlo evaluation: `trials` independent seeded runs, detection
/// aborts disabled, everything aggregated into one report.
pub fn evaluate(spec: AttackSpec, opts: &EvalOptions) -> Result<AttackReport, ProtocolError> {
    let splitter = SeedSplitter::new(opts.seed);
    let mut secrets_rng = splitter.stream(names::SECRETS);
    let mut sampler_rng = splitter.stream("attack-sampler");

    let mut detections = 0u64;
    let mut totals = ViolationSummary::default();
    let mut info_metric = 0.0f64;
    let mut probe_states_compared = 0u64;
    let mut ancilla_dev = 0.0f64;
    let mut kab_total = 0u64;
    let mut kab_learned = 0u64;

    for trial in 0..opts.trials {
        let config = RunConfig {
            n: opts.n,
            seed: splitter.derive_seed("trial", trial),
            secret_a: Secret::random(opts.n, &mut secrets_rng),
            secret_b: Secret::random(opts.n, &mut secrets_rng),
            tp_strategy: spec.tp_strategy(),
            threshold: 0.0,
            continue_on_detection: true,
        };
        let mut attack = spec.build(&mut sampler_rng);
        let raw = run_protocol_raw(
            &config,
            attack
                .as_mut()
                .map(|a| a.as_mut() as &mut dyn AttackStrategy),
        )?;
        let violations = raw.all_violations();
        if violations.violations() > 0 {
            detections += 1;
        }
        totals.merge(&violations);
        if let Some(attack) = &attack {
            // Conditioning is per attack instance: probes of one trial are
            // compared only with probes of the same trial, so sampled
            // attacks are never confused with one another.
            let (info, compared) = probe_info_metric(&raw, attack.as_ref());
            info_metric = info_metric.max(info);
            probe_states_compared += compared;
            ancilla_dev = ancilla_dev.max(ancilla_zero_deviation(&raw, attack.as_ref()));
        }
        for (i, origin) in raw.kab.origins.iter().enumerate() {
            kab_total += 1;
            if raw.tp_learned_bits.get(&(origin.group, origin.position))
                == Some(&raw.kab.primary[i])
            {
                kab_learned += 1;
            }
        }
    }

    let (ci_low, ci_high) = wilson_interval(detections, opts.trials);
    Ok(AttackReport {
        schema: ATTACK_REPORT_SCHEMA.to_string(),
        attack: spec.name().to_string(),
        n: opts.n,
        seed: opts.seed,
        trials: opts.trials,
        detections,
        detection_rate: if opts.trials == 0 {
            0.0
        } else {
            detections as f64 / opts.trials as f64
        },
        detection_ci_low: ci_low,
        detection_ci_high: ci_high,
        info_metric,
        probe_states_compared,
        ancilla_zero_deviation: ancilla_dev,
        per_class: totals.per_class,
        tp_kab_bits_learned: kab_learned,
        tp_kab_bits_total: kab_total,
    })
}

/// Result of the focused both-reflect Bell-check experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RrCheckStats {
    pub groups: u64,
    pub pair_checks: u64,
    pub violations: u64,
}

impl RrCheckStats {
    pub fn rate(&self) -> f64 {
        if self.pair_checks == 0 {
            0.0
        } else {
            self.violations as f64 / self.pair_checks as f64
        }
    }
}

/// Both-reflect groups under a collective attack, at pair granularity: with
/// every qubit reflected the step-1 swap and its restoration cancel, so each
/// original pair evolves independently as `φ+ ⊗ probes` under the three leg
/// operators before TP's Bell check. Two pair checks per group.
pub fn reflect_bell_check_experiment(
    unitary: &CollectiveUnitary,
    groups: u64,
    seed: u64,
) -> RrCheckStats {
    let mut rng = SeedSplitter::new(seed).stream("rr-bell-check");
    let mut violations = 0u64;
    for _ in 0..groups {
        for _ in 0..2 {
            let mut state = StateVector::prepare_bell(BellKind::PhiPlus);
            let e1 = state.append_qubit(0);
            let e2 = state.append_qubit(0);
            for u in [&unitary.u1, &unitary.u2, &unitary.u3] {
                state.apply_two_qubit(u, 0, e1).expect("probe in range");
                state.apply_two_qubit(u, 1, e2).expect("probe in range");
            }
            let (kind, _) = state.measure_bell(0, 1, &mut rng).expect("pair in range");
            if kind != BellKind::PhiPlus {
                violations += 1;
            }
        }
    }
    RrCheckStats {
        groups,
        pair_checks: 2 * groups,
        violations,
    }
}

/// Result of the focused dishonest-TP step-5 experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckPairStats {
    pub trials: u64,
    pub pairs_per_trial: usize,
    pub pair_events: u64,
    pub pair_violations: u64,
    /// Trials in which at least one pair check failed.
    pub detections: u64,
}

impl CheckPairStats {
    pub fn per_pair_rate(&self) -> f64 {
        if self.pair_events == 0 {
            0.0
        } else {
            self.pair_violations as f64 / self.pair_events as f64
        }
    }

    pub fn detection_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.detections as f64 / self.trials as f64
        }
    }
}

/// Step-5 both-reflect check pairs against a (possibly dishonest) TP: per
/// trial, `pairs_per_trial` reflected pairs go through preparation, the
/// round trip, TP's step-5 measurement and publication. Publications must be
/// `φ+`; a dishonest TP's coin publication fails each check with probability
/// one half.
pub fn dishonest_tp_check_pairs(
    strategy: TpStrategy,
    pairs_per_trial: usize,
    trials: u64,
    seed: u64,
) -> CheckPairStats {
    let mut rng = SeedSplitter::new(seed).stream("tp-check-pairs");
    let mut pair_violations = 0u64;
    let mut detections = 0u64;
    for _ in 0..trials {
        let mut any = false;
        for _ in 0..pairs_per_trial {
            let published = match strategy {
                TpStrategy::Honest => {
                    let mut state = StateVector::prepare_bell(BellKind::PhiPlus);
                    let (kind, _) = state.measure_bell(0, 1, &mut rng).expect("pair in range");
                    kind
                }
                TpStrategy::ZMeasureThenRandomPublish => {
                    let mut state = StateVector::prepare_bell(BellKind::PhiPlus);
                    let _ = state.measure_z(0, &mut rng).expect("in range");
                    let _ = state.measure_z(1, &mut rng).expect("in range");
                    coin_phi(&mut rng)
                }
                TpStrategy::FakeZBasisStates => {
                    let bits = [
                        u8::from(rng.random::<bool>()),
                        u8::from(rng.random::<bool>()),
                    ];
                    let mut state = StateVector::from_bits(&bits);
                    let _ = state.measure_z(0, &mut rng).expect("in range");
                    let _ = state.measure_z(1, &mut rng).expect("in range");
                    coin_phi(&mut rng)
                }
            };
            if published != BellKind::PhiPlus {
                pair_violations += 1;
                any = true;
            }
        }
        if any {
            detections += 1;
        }
    }
    CheckPairStats {
        trials,
        pairs_per_trial,
        pair_events: trials * pairs_per_trial as u64,
        pair_violations,
        detections,
    }
}

fn coin_phi<R: Rng>(rng: &mut R) -> BellKind {
    if rng.random_bool(0.5) {
        BellKind::PhiPlus
    } else {
        BellKind::PhiMinus
    }
}
