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

//! Cross-module protocol invariants, property style.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use sqpc_core::protocol::{
    compare, encrypt, run_protocol, run_protocol_raw, ProtocolError, RunConfig, Secret, Verdict,
};
use sqpc_core::statevector::{Gate, StateVector, NORM_TOL};

fn random_state(num_qubits: usize, seed: u64) -> StateVector {
    use rand::Rng;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut amps: Vec<num_complex::Complex64> = (0..1usize << num_qubits)
        .map(|_| num_complex::Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    StateVector::from_amplitudes(amps).unwrap()
}

fn arb_gate(num_qubits: usize) -> impl Strategy<Value = Gate> {
    let q = 0..num_qubits;
    prop_oneof![
        q.clone().prop_map(Gate::H),
        q.clone().prop_map(Gate::X),
        (0..num_qubits, 0..num_qubits)
            .prop_filter("distinct", |(a, b)| a != b)
            .prop_map(|(control, target)| Gate::Cnot { control, target }),
        (0..num_qubits, 0..num_qubits)
            .prop_filter("distinct", |(a, b)| a != b)
            .prop_map(|(a, b)| Gate::Swap(a, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_normalization(seed in any::<u64>(), gates in prop::collection::vec(arb_gate(4), 1..12)) {
        let mut state = random_state(4, seed);
        for gate in gates {
            state.apply(gate).unwrap();
            prop_assert!((state.norm_sqr() - 1.0).abs() < NORM_TOL);
        }
    }

    #[test]
    fn measurement_records_carry_true_probabilities(seed in any::<u64>(), qubit in 0usize..3) {
        let mut state = random_state(3, seed);
        let expected_p0 = state.probability_of_bits(&[qubit], &[0]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0xfeed);
        let (bit, record) = state.measure_z(qubit, &mut rng).unwrap();
        let expected = if bit == 0 { expected_p0 } else { 1.0 - expected_p0 };
        prop_assert!((record.probability - expected).abs() < NORM_TOL);
        prop_assert!((state.norm_sqr() - 1.0).abs() < NORM_TOL);
        // The measured qubit is sharp afterwards.
        let sharp = state.probability_of_bits(&[qubit], &[bit]).unwrap();
        prop_assert!((sharp - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn composition_multiplies_norms(seed_a in any::<u64>(), seed_b in any::<u64>()) {
        let a = random_state(2, seed_a);
        let b = random_state(3, seed_b);
        let ab = a.tensor(&b);
        prop_assert_eq!(ab.num_qubits(), 5);
        prop_assert!((ab.norm_sqr() - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn comparison_verdict_depends_only_on_the_secret_xor(
        bits_a in prop::collection::vec(0u8..2, 6),
        bits_b in prop::collection::vec(0u8..2, 6),
        kab in prop::collection::vec(0u8..2, 6),
        kta in prop::collection::vec(0u8..2, 6),
        ktb in prop::collection::vec(0u8..2, 6),
    ) {
        let m_a = Secret::from_bits(bits_a.clone());
        let m_b = Secret::from_bits(bits_b.clone());
        let q_a = encrypt(&m_a, &kab, &kta).unwrap();
        let q_b = encrypt(&m_b, &kab, &ktb).unwrap();
        let out = compare(&q_a, &q_b, &kta, &ktb).unwrap();
        let xor: Vec<u8> = bits_a.iter().zip(&bits_b).map(|(a, b)| a ^ b).collect();
        prop_assert_eq!(&out.r_bits, &xor);
        prop_assert_eq!(out.verdict == Verdict::Equal, bits_a == bits_b);
    }
}

#[test]
fn honest_runs_are_clean_and_correct_across_seeds() {
    let mut rng = ChaCha12Rng::seed_from_u64(515);
    let mut verdicts = 0u32;
    for seed in 0..200u64 {
        let n = 8;
        let equal = seed % 2 == 0;
        let a = Secret::random(n, &mut rng);
        let b = if equal {
            a.clone()
        } else {
            Secret::random(n, &mut rng)
        };
        let config = RunConfig::honest(n, seed, a.clone(), b.clone());
        match run_protocol(&config, None) {
            Ok(t) => {
                verdicts += 1;
                assert_eq!(t.violations.violations(), 0, "seed {seed}");
                assert_eq!(
                    t.comparison.verdict == Verdict::Equal,
                    a == b,
                    "seed {seed}"
                );
                assert!(t.key_agreement.k_ab && t.key_agreement.k_ta && t.key_agreement.k_tb);
            }
            Err(ProtocolError::InsufficientKey { .. }) => {}
            Err(other) => panic!("seed {seed}: {other}"),
        }
    }
    assert!(verdicts > 10, "some runs must complete ({verdicts})");
}

#[test]
fn transcripts_round_trip_through_json() {
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    let mut seed = 0;
    let transcript = loop {
        seed += 1;
        let config = RunConfig::honest(
            4,
            seed,
            Secret::random(4, &mut rng),
            Secret::random(4, &mut rng),
        );
        match run_protocol(&config, None) {
            Ok(t) => break t,
            Err(ProtocolError::InsufficientKey { .. }) => continue,
            Err(other) => panic!("{other}"),
        }
    };
    assert_eq!(transcript.schema, sqpc_core::protocol::TRANSCRIPT_SCHEMA);
    let json = serde_json::to_string(&transcript).unwrap();
    let back: sqpc_core::protocol::Transcript = serde_json::from_str(&json).unwrap();
    assert_eq!(back, transcript);
}

#[test]
fn fragments_collect_in_original_position_order() {
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    for seed in 0..20u64 {
        let config = RunConfig::honest(
            6,
            seed,
            Secret::random(6, &mut rng),
            Secret::random(6, &mut rng),
        );
        let raw = run_protocol_raw(&config, None).unwrap();
        for fragment in [&raw.kab, &raw.kta, &raw.ktb] {
            let keys: Vec<(usize, usize)> = fragment
                .origins
                .iter()
                .map(|o| (o.group, o.position))
                .collect();
            let mut sorted = keys.clone();
            sorted.sort_unstable();
            assert_eq!(keys, sorted);
        }
    }
}

#[test]
fn tp_bell_publications_on_key_pairs_are_phase_coin_flips() {
    // Conditioned on the qubit carrying a K_AB bit, TP's published Bell
    // result is φ+ or φ− (never ψ±): the paired qubits reach TP in the same
    // Z state.
    let mut rng = ChaCha12Rng::seed_from_u64(7000);
    let mut phi_plus = 0u64;
    let mut phi_minus = 0u64;
    for seed in 300..500u64 {
        let config = RunConfig::honest(
            8,
            seed,
            Secret::random(8, &mut rng),
            Secret::random(8, &mut rng),
        );
        let raw = run_protocol_raw(&config, None).unwrap();
        for (i, origin) in raw.kab.origins.iter().enumerate() {
            let _ = i;
            let publication = raw
                .publications
                .iter()
                .find(|p| p.group == origin.group && p.pair == origin.position / 2)
                .expect("check-group pairs are published");
            match publication.kind {
                sqpc_core::statevector::BellKind::PhiPlus => phi_plus += 1,
                sqpc_core::statevector::BellKind::PhiMinus => phi_minus += 1,
                other => panic!("ψ outcome {other:?} on a key pair"),
            }
        }
    }
    let total = phi_plus + phi_minus;
    assert!(total > 1000);
    let rate = phi_plus as f64 / total as f64;
    assert!((rate - 0.5).abs() < 0.05, "φ+ share {rate}");
}
