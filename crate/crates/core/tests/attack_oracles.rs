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

//! Attack detection probabilities checked against independent oracles.
//!
//! Every expected value asserted here is first computed by exhaustive branch
//! enumeration or direct state evolution on small registers, without going
//! through the protocol engine or the attack strategies, and then compared
//! with what the full pipeline produces.

use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;

use sqpc_core::adversary::{
    evaluate, reflect_bell_check_experiment, reflect_pair_pass_probability,
    sample_constrained_collective, AttackSpec, CollectiveAttack, CollectiveUnitary, EvalOptions,
    EvePairing, InterceptResend, InterceptVariant, Mat2, Mat4, MeasureResendBell, MeasureResendZ,
};
use sqpc_core::protocol::{run_protocol_raw, CheckClass, RunConfig, Secret, TpStrategy};
use sqpc_core::statevector::{BellKind, StateVector};
use sqpc_core::streams::SeedSplitter;

fn test_config(n: usize, seed: u64) -> RunConfig {
    use rand::SeedableRng;
    let mut rng = <ChaCha12Rng as SeedableRng>::seed_from_u64(seed ^ 0x0ddba11);
    RunConfig {
        n,
        seed,
        secret_a: Secret::random(n, &mut rng),
        secret_b: Secret::random(n, &mut rng),
        tp_strategy: TpStrategy::Honest,
        threshold: 0.0,
        continue_on_detection: true,
    }
}

fn swapped_group() -> StateVector {
    let phi = StateVector::prepare_bell(BellKind::PhiPlus);
    let mut group = phi.tensor(&phi);
    group.swap_pairing().unwrap();
    group
}

/// Enumerates Eve's Bell-basis measure-resend attack on a re-paired group
/// with the naive (0,1)(2,3) pairing guess: every outcome branch is
/// projected exactly, TP's restore applied, and the restored pair's
/// `φ+`-check failure probability accumulated. No sampling anywhere.
fn bell_resend_oracle_failure_probability(swapped: bool) -> (f64, f64) {
    let base = if swapped {
        swapped_group()
    } else {
        let phi = StateVector::prepare_bell(BellKind::PhiPlus);
        phi.tensor(&phi)
    };
    let mut fail = [0.0f64; 2];
    for first in BellKind::ALL {
        let mut s1 = base.clone();
        let p1 = s1.project_bell(0, 1, first).unwrap();
        if p1 == 0.0 {
            continue;
        }
        for second in BellKind::ALL {
            let mut s2 = s1.clone();
            let p2 = s2.project_bell(2, 3, second).unwrap();
            if p2 == 0.0 {
                continue;
            }
            if swapped {
                s2.swap_pairing().unwrap(); // TP's restore
            }
            for (pair, slot) in fail.iter_mut().enumerate() {
                let probs = s2.bell_probabilities(2 * pair, 2 * pair + 1).unwrap();
                *slot += p1 * p2 * (1.0 - probs[0]);
            }
        }
    }
    (fail[0], fail[1])
}

#[test]
fn bell_resend_oracle_gives_three_quarters_on_swapped_groups() {
    let (pair1, pair2) = bell_resend_oracle_failure_probability(true);
    assert!((pair1 - 0.75).abs() < 1e-12, "pair 1 failure {pair1}");
    assert!((pair2 - 0.75).abs() < 1e-12, "pair 2 failure {pair2}");

    // Matching pairing on an unswapped group disturbs nothing.
    let (clean1, clean2) = bell_resend_oracle_failure_probability(false);
    assert!(clean1.abs() < 1e-12 && clean2.abs() < 1e-12);
}

#[test]
fn bell_resend_protocol_failure_rate_matches_the_oracle() {
    // Full pipeline: reflected pairs in *swapped* groups fail their Bell
    // check at the oracle rate 3/4; unswapped groups stay silent.
    let mut swapped_events = 0u64;
    let mut swapped_violations = 0u64;
    let mut unswapped_violations = 0u64;
    for seed in 0..400u64 {
        let config = test_config(4, seed);
        let mut attack = MeasureResendBell::new(EvePairing::Consecutive);
        let raw = run_protocol_raw(&config, Some(&mut attack)).unwrap();
        for record in &raw.records {
            let g = record.plan.group_index;
            let classes = sqpc_core::protocol::sift(record);
            // Locate reflected pairs and their publication verdicts.
            for pair in 0..2 {
                if classes[2 * pair] != sqpc_core::protocol::SiftClass::EcBell {
                    continue;
                }
                let published = raw
                    .publications
                    .iter()
                    .find(|p| p.group == g && p.pair == pair)
                    .expect("reflected pairs are always published");
                let violated = published.kind != BellKind::PhiPlus;
                if record.plan.swapped {
                    swapped_events += 1;
                    swapped_violations += u64::from(violated);
                } else {
                    unswapped_violations += u64::from(violated);
                }
            }
        }
    }
    assert_eq!(unswapped_violations, 0, "matching pairing must be silent");
    assert!(swapped_events > 150, "want enough swapped reflected pairs");
    let rate = swapped_violations as f64 / swapped_events as f64;
    let sigma = (0.75 * 0.25 / swapped_events as f64).sqrt();
    assert!(
        (rate - 0.75).abs() < 4.0 * sigma + 1e-3,
        "swapped failure rate {rate} over {swapped_events} pairs"
    );
}

/// `cos α · I − i sin α · X` on the transit qubit, identity on the probe.
fn partial_flip_leg(alpha: f64) -> Mat4 {
    let c = Complex64::new(alpha.cos(), 0.0);
    let s = Complex64::new(0.0, -alpha.sin());
    let u: Mat2 = [[c, s], [s, c]];
    let z = Complex64::ZERO;
    [
        [u[0][0], z, u[0][1], z],
        [z, u[0][0], z, u[0][1]],
        [u[1][0], z, u[1][1], z],
        [z, u[1][0], z, u[1][1]],
    ]
}

#[test]
fn partial_flip_collective_attack_breaks_the_pair_correlation_only() {
    // Oracle: apply U to both halves of φ+ and read off the probability of
    // unequal Z results. For α = π/8 the ψ+ component carries weight 1/2.
    let alpha = std::f64::consts::PI / 8.0;
    let leg = partial_flip_leg(alpha);
    let mut oracle_state = StateVector::prepare_bell(BellKind::PhiPlus);
    let e1 = oracle_state.append_qubit(0);
    let e2 = oracle_state.append_qubit(0);
    oracle_state.apply_two_qubit(&leg, 0, e1).unwrap();
    oracle_state.apply_two_qubit(&leg, 1, e2).unwrap();
    let p_unequal = oracle_state.probability_of_bits(&[0, 1], &[0, 1]).unwrap()
        + oracle_state.probability_of_bits(&[0, 1], &[1, 0]).unwrap();
    assert!(
        (p_unequal - 0.5).abs() < 1e-12,
        "oracle mismatch {p_unequal}"
    );

    // Full pipeline: the per-qubit three-way chains stay consistent (the
    // disturbance happens before Alice measures), while the pair-level
    // Z-correlation check fires at the oracle rate.
    let unitary = CollectiveUnitary::new(
        leg,
        CollectiveUnitary::identity().u2,
        CollectiveUnitary::identity().u3,
    )
    .unwrap();
    let mut pair_events = 0u64;
    let mut pair_violations = 0u64;
    let mut threeway_violations = 0u64;
    for seed in 0..300u64 {
        let config = test_config(8, seed);
        let mut attack = CollectiveAttack::new(unitary.clone());
        let raw = run_protocol_raw(&config, Some(&mut attack)).unwrap();
        let all = raw.all_violations();
        let pair = all.tally(CheckClass::EcZPair);
        pair_events += pair.events;
        pair_violations += pair.violations;
        threeway_violations += all.tally(CheckClass::EcZThreeWay).violations;
    }
    assert_eq!(threeway_violations, 0, "three-way chains cannot break");
    assert!(pair_events > 200, "want enough both-measure pairs");
    let rate = pair_violations as f64 / pair_events as f64;
    let sigma = (0.25 / pair_events as f64).sqrt();
    assert!(
        (rate - p_unequal).abs() < 4.0 * sigma,
        "pair-violation rate {rate} vs oracle {p_unequal} over {pair_events}"
    );
}

#[test]
fn intercept_resend_detection_follows_the_ecz_compounding_law() {
    // Per both-measure qubit the three-way check fails with probability 1/2
    // (TP's genuine bit is independent of Eve's fake bit), pair-level TP
    // bits stay correlated, Bell checks stay clean; detection over a run
    // with k three-way checks is 1 - (1/2)^k.
    for variant in [InterceptVariant::Leg1, InterceptVariant::Leg2] {
        let mut by_k: std::collections::BTreeMap<u64, (u64, u64)> = Default::default();
        for seed in 0..1500u64 {
            let config = test_config(2, seed);
            let mut attack = InterceptResend::new(variant);
            let raw = run_protocol_raw(&config, Some(&mut attack)).unwrap();
            let all = raw.all_violations();
            assert_eq!(all.tally(CheckClass::EcBellStep5).violations, 0);
            assert_eq!(all.tally(CheckClass::EcBellStep6).violations, 0);
            assert_eq!(all.tally(CheckClass::EcZPair).violations, 0);
            let k = all.tally(CheckClass::EcZThreeWay).events;
            let detected = all.violations() > 0;
            let entry = by_k.entry(k).or_insert((0, 0));
            entry.0 += 1;
            entry.1 += u64::from(detected);
        }
        for (k, (runs, detected)) in by_k {
            if runs < 200 {
                continue;
            }
            let expected = 1.0 - 0.5f64.powi(k as i32);
            let rate = detected as f64 / runs as f64;
            let sigma = (expected * (1.0 - expected) / runs as f64).sqrt().max(1e-3);
            assert!(
                (rate - expected).abs() < 4.0 * sigma,
                "variant {variant:?}: detection at k={k} was {rate}, expected {expected} over {runs} runs"
            );
        }
    }
}

#[test]
fn measure_resend_z_never_touches_z_flows() {
    let mut bell_events = 0u64;
    let mut bell_violations = 0u64;
    let mut by_k: std::collections::BTreeMap<u64, (u64, u64)> = Default::default();
    for seed in 0..1200u64 {
        let config = test_config(4, seed);
        let mut attack = MeasureResendZ::new();
        let raw = run_protocol_raw(&config, Some(&mut attack)).unwrap();
        let all = raw.all_violations();
        assert_eq!(all.tally(CheckClass::EcZThreeWay).violations, 0);
        assert_eq!(all.tally(CheckClass::EcZPair).violations, 0);
        let mut run_events = 0;
        for class in [CheckClass::EcBellStep5, CheckClass::EcBellStep6] {
            let t = all.tally(class);
            bell_events += t.events;
            bell_violations += t.violations;
            run_events += t.events;
        }
        let entry = by_k.entry(run_events).or_insert((0, 0));
        entry.0 += 1;
        entry.1 += u64::from(all.violations() > 0);
    }
    // Z-collapse of φ+ then a Bell measurement: φ± each 1/2.
    assert!(bell_events > 200);
    let rate = bell_violations as f64 / bell_events as f64;
    let sigma = (0.25 / bell_events as f64).sqrt();
    assert!((rate - 0.5).abs() < 4.0 * sigma, "Bell failure rate {rate}");
    // Detection compounds over the k reflected-pair checks of a run.
    for (k, (runs, detected)) in by_k {
        if runs < 250 {
            continue;
        }
        let expected = 1.0 - 0.5f64.powi(k as i32);
        let observed = detected as f64 / runs as f64;
        let sigma = (expected * (1.0 - expected) / runs as f64).sqrt().max(1e-3);
        assert!(
            (observed - expected).abs() < 4.0 * sigma,
            "k={k}: detection {observed} vs {expected} over {runs} runs"
        );
    }
}

#[test]
fn constrained_collective_family_is_invisible_and_uninformed() {
    let report = evaluate(
        AttackSpec::CollectiveConstrained,
        &EvalOptions {
            n: 4,
            seed: 77,
            trials: 30,
        },
    )
    .unwrap();
    assert_eq!(report.detections, 0);
    assert!(report.info_metric < 1e-10, "info {}", report.info_metric);
    assert!(report.probe_states_compared > 0);
}

#[test]
fn zero_detection_implies_an_uninformed_probe() {
    // The theorem direction, literally testable: any sampled collective
    // attack whose reflect-check Monte Carlo over >= 10^3 groups shows no
    // violation must carry (nearly) no information in its probes.
    let splitter = SeedSplitter::new(0x7e0);
    let mut sampler = splitter.stream("sampler");
    let mut silent = 0u32;
    for i in 0..100u64 {
        let rotations = sample_constrained_collective(&mut sampler, i % 2 == 0);
        let unitary = rotations.to_unitary();
        let stats = reflect_bell_check_experiment(&unitary, 1000, 0x7e00 + i);
        if stats.violations == 0 {
            silent += 1;
            assert!(
                rotations.probe_trace_distance() < 1e-6,
                "sample {i}: silent attack with probe distance {}",
                rotations.probe_trace_distance()
            );
        }
    }
    // The constrained half is always silent, so the implication is
    // exercised at least 50 times.
    assert!(silent >= 50, "only {silent} silent samples");
}

#[test]
fn identity_belongs_to_the_error_free_family() {
    let identity = CollectiveUnitary::identity();
    assert!((reflect_pair_pass_probability(&identity) - 1.0).abs() < 1e-12);
    let report = evaluate(
        AttackSpec::CollectiveIdentity,
        &EvalOptions {
            n: 4,
            seed: 3,
            trials: 10,
        },
    )
    .unwrap();
    assert_eq!(report.detections, 0);
    assert!(report.info_metric <= 1e-12, "info {}", report.info_metric);
}

#[test]
fn adversarial_user_reduces_to_an_attack_on_the_final_leg() {
    // A dishonest Alice who wants K_TB can only eavesdrop Bob's leg to TP,
    // which is the external Z measure-resend restricted to that leg: caught
    // by the reflected-pair Bell checks at the usual rate.
    let mut bell_events = 0u64;
    let mut bell_violations = 0u64;
    for seed in 0..200u64 {
        let config = test_config(4, seed);
        let mut attack = MeasureResendZ::on_legs(vec![sqpc_core::protocol::ChannelLeg::BobToTp]);
        let raw = run_protocol_raw(&config, Some(&mut attack)).unwrap();
        let all = raw.all_violations();
        assert_eq!(all.tally(CheckClass::EcZThreeWay).violations, 0);
        for class in [CheckClass::EcBellStep5, CheckClass::EcBellStep6] {
            let t = all.tally(class);
            bell_events += t.events;
            bell_violations += t.violations;
        }
    }
    assert!(bell_events > 150);
    let rate = bell_violations as f64 / bell_events as f64;
    let sigma = (0.25 / bell_events as f64).sqrt();
    assert!((rate - 0.5).abs() < 4.0 * sigma, "failure rate {rate}");
}

#[test]
fn unconstrained_collective_attacks_leak_exactly_when_probes_separate() {
    // Per sampled transit-diagonal attack: detection possible only through
    // reflected-pair Bell checks, and the per-run info metric equals the
    // conditioned-probe trace distance.
    let splitter = SeedSplitter::new(4242);
    let mut sampler = splitter.stream("sampler");
    for i in 0..12u64 {
        let rotations = sqpc_core::adversary::sample_constrained_collective(&mut sampler, false);
        let distance = rotations.probe_trace_distance();
        let config = test_config(6, 9000 + i);
        let mut attack = CollectiveAttack::new(rotations.to_unitary());
        let raw = run_protocol_raw(&config, Some(&mut attack)).unwrap();
        let all = raw.all_violations();
        assert_eq!(all.tally(CheckClass::EcZThreeWay).violations, 0);
        assert_eq!(all.tally(CheckClass::EcZPair).violations, 0);
        let (info, compared) = sqpc_core::adversary::probe_info_metric(&raw, &attack);
        if compared > 0 {
            assert!(
                (info - distance).abs() < 1e-9,
                "info {info} vs trajectory distance {distance}"
            );
        }
    }
}
