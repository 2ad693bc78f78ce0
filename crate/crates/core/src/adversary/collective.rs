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

//! Collective-attack unitaries: one 4×4 operator per channel leg, acting on
//! (transit qubit ⊗ probe qubit), all three legs sharing one probe per
//! transit qubit initialized to `|0⟩`.
//!
//! The error-free family is transit-diagonal: `U|t,e⟩ = |t⟩ ⊗ V_t|e⟩`, a
//! probe rotation conditioned on the transit bit. Such attacks never touch
//! any Z-basis flow, so only the both-reflect Bell checks can see them, and
//! those pass exactly when the accumulated probe states for the two transit
//! values coincide (the probe-independence condition). The samplers below
//! produce that family with and without the independence condition enforced.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::statevector::{BellKind, StateVector};

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];

/// Tolerance for the unitarity check.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum AdversaryError {
    #[error("attack matrix {which} is not unitary within {UNITARITY_TOL}")]
    NonUnitary { which: &'static str },
    #[error("unknown attack {0:?}")]
    UnknownAttack(String),
}

fn is_unitary4(m: &Mat4) -> bool {
    for row in 0..4 {
        for col in 0..4 {
            let acc: Complex64 = m.iter().map(|r| r[row].conj() * r[col]).sum();
            let expected = if row == col { 1.0 } else { 0.0 };
            if (acc - expected).norm() > UNITARITY_TOL {
                return false;
            }
        }
    }
    true
}

/// The three per-leg attack operators with their shared-probe convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectiveUnitary {
    pub u1: Mat4,
    pub u2: Mat4,
    pub u3: Mat4,
}

impl CollectiveUnitary {
    /// Validates unitarity of all three operators within `1e-10`.
    pub fn new(u1: Mat4, u2: Mat4, u3: Mat4) -> Result<CollectiveUnitary, AdversaryError> {
        for (which, m) in [("U1", &u1), ("U2", &u2), ("U3", &u3)] {
            if !is_unitary4(m) {
                return Err(AdversaryError::NonUnitary { which });
            }
        }
        Ok(CollectiveUnitary { u1, u2, u3 })
    }

    pub fn identity() -> CollectiveUnitary {
        let mut id = [[Complex64::ZERO; 4]; 4];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = Complex64::ONE;
        }
        CollectiveUnitary {
            u1: id,
            u2: id,
            u3: id,
        }
    }

    pub fn leg_matrix(&self, leg: crate::protocol::ChannelLeg) -> &Mat4 {
        match leg {
            crate::protocol::ChannelLeg::TpToAlice => &self.u1,
            crate::protocol::ChannelLeg::AliceToBob => &self.u2,
            crate::protocol::ChannelLeg::BobToTp => &self.u3,
        }
    }
}

/// Builds the transit-diagonal operator `|0⟩⟨0|⊗V0 + |1⟩⟨1|⊗V1` over the
/// ordered basis `|t e⟩`.
pub fn transit_diagonal(v0: &Mat2, v1: &Mat2) -> Mat4 {
    let z = Complex64::ZERO;
    [
        [v0[0][0], v0[0][1], z, z],
        [v0[1][0], v0[1][1], z, z],
        [z, z, v1[0][0], v1[0][1]],
        [z, z, v1[1][0], v1[1][1]],
    ]
}

fn mat2_apply(m: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

fn gauss_pair<R: Rng>(rng: &mut R) -> (f64, f64) {
    // Box-Muller on open (0,1).
    let u1: f64 = loop {
        let u = rng.random::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Haar-random SU(2) element via a uniform unit quaternion.
pub fn random_su2<R: Rng>(rng: &mut R) -> Mat2 {
    loop {
        let (a, b) = gauss_pair(rng);
        let (c, d) = gauss_pair(rng);
        let norm = (a * a + b * b + c * c + d * d).sqrt();
        if norm < 1e-12 {
            continue;
        }
        let (a, b, c, d) = (a / norm, b / norm, c / norm, d / norm);
        let u = Complex64::new(a, b);
        let v = Complex64::new(c, d);
        return [[u, -v.conj()], [v, u.conj()]];
    }
}

/// The transit-diagonal probe rotations of a sampled attack, per leg and
/// transit value.
#[derive(Debug, Clone)]
pub struct DiagonalRotations {
    pub v: [[Mat2; 2]; 3],
}

impl DiagonalRotations {
    pub fn to_unitary(&self) -> CollectiveUnitary {
        CollectiveUnitary {
            u1: transit_diagonal(&self.v[0][0], &self.v[0][1]),
            u2: transit_diagonal(&self.v[1][0], &self.v[1][1]),
            u3: transit_diagonal(&self.v[2][0], &self.v[2][1]),
        }
    }

    /// Final probe state after all three legs for a transit bit stuck at
    /// `bit`: `V3_b V2_b V1_b |0⟩`.
    pub fn probe_trajectory(&self, bit: usize) -> [Complex64; 2] {
        let mut probe = [Complex64::ONE, Complex64::ZERO];
        for leg in 0..3 {
            probe = mat2_apply(&self.v[leg][bit], probe);
        }
        probe
    }

    /// `⟨P0|P1⟩` between the two conditioned probe trajectories.
    pub fn probe_overlap(&self) -> Complex64 {
        let p0 = self.probe_trajectory(0);
        let p1 = self.probe_trajectory(1);
        p0[0].conj() * p1[0] + p0[1].conj() * p1[1]
    }

    /// Trace distance between the conditioned probe trajectories.
    pub fn probe_trace_distance(&self) -> f64 {
        (1.0 - self.probe_overlap().norm_sqr()).max(0.0).sqrt()
    }
}

/// Samples a random transit-diagonal collective attack. With
/// `enforce_probe_independence` the last rotation is completed so that both
/// conditioned probe trajectories end in the same state, the condition under
/// which the attack induces no error at all.
pub fn sample_constrained_collective<R: Rng>(
    rng: &mut R,
    enforce_probe_independence: bool,
) -> DiagonalRotations {
    let mut v: [[Mat2; 2]; 3] = std::array::from_fn(|_| [random_su2(rng), random_su2(rng)]);
    if enforce_probe_independence {
        // Target: V3_1 V2_1 V1_1 |0⟩ = V3_0 V2_0 V1_0 |0⟩ =: ψ*.
        let partial = DiagonalRotations { v };
        let psi_star = partial.probe_trajectory(0);
        let mut chi = [Complex64::ONE, Complex64::ZERO];
        chi = mat2_apply(&v[0][1], chi);
        chi = mat2_apply(&v[1][1], chi);
        // Unitary sending χ → ψ*, with a random phase on the complement.
        let chi_perp = [-chi[1].conj(), chi[0].conj()];
        let psi_perp = [-psi_star[1].conj(), psi_star[0].conj()];
        let phase = Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>());
        let mut v31 = [[Complex64::ZERO; 2]; 2];
        for row in 0..2 {
            for col in 0..2 {
                v31[row][col] =
                    psi_star[row] * chi[col].conj() + phase * psi_perp[row] * chi_perp[col].conj();
            }
        }
        v[2][1] = v31;
    }
    DiagonalRotations { v }
}

/// Exact probability that a both-reflect pair still Bell-checks to `|φ+⟩`
/// after the attack hits both qubits on all three legs. Computed by direct
/// state evolution, no sampling.
pub fn reflect_pair_pass_probability(unitary: &CollectiveUnitary) -> f64 {
    let phi = StateVector::prepare_bell(BellKind::PhiPlus);
    let mut state = phi;
    let e1 = state.append_qubit(0);
    let e2 = state.append_qubit(0);
    for u in [&unitary.u1, &unitary.u2, &unitary.u3] {
        state.apply_two_qubit(u, 0, e1).unwrap();
        state.apply_two_qubit(u, 1, e2).unwrap();
    }
    state.bell_probabilities(0, 1).unwrap()[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn identity_is_accepted_and_harmless() {
        let id = CollectiveUnitary::identity();
        let checked = CollectiveUnitary::new(id.u1, id.u2, id.u3).unwrap();
        assert!((reflect_pair_pass_probability(&checked) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_unitary_matrices_are_rejected() {
        let mut u1 = CollectiveUnitary::identity().u1;
        u1[0][0] = Complex64::new(2.0, 0.0);
        let id = CollectiveUnitary::identity();
        assert_eq!(
            CollectiveUnitary::new(u1, id.u2, id.u3).unwrap_err(),
            AdversaryError::NonUnitary { which: "U1" }
        );
    }

    #[test]
    fn sampled_rotations_are_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for i in 0..32 {
            let rotations = sample_constrained_collective(&mut rng, i % 2 == 0);
            let u = rotations.to_unitary();
            CollectiveUnitary::new(u.u1, u.u2, u.u3).expect("sampled unitary");
        }
    }

    #[test]
    fn independence_condition_aligns_probe_trajectories() {
        let mut rng = ChaCha12Rng::seed_from_u64(20);
        for _ in 0..64 {
            let rotations = sample_constrained_collective(&mut rng, true);
            // The pure-state distance amplifies fp noise by a square root,
            // so assert tightly on the overlap and loosely on the distance.
            assert!((rotations.probe_overlap().norm_sqr() - 1.0).abs() < 1e-12);
            assert!(rotations.probe_trace_distance() < 1e-6);
        }
    }

    #[test]
    fn unconstrained_samples_generically_separate_probes() {
        let mut rng = ChaCha12Rng::seed_from_u64(30);
        let mut separated = 0;
        for _ in 0..64 {
            if sample_constrained_collective(&mut rng, false).probe_trace_distance() > 0.05 {
                separated += 1;
            }
        }
        assert!(separated > 32, "only {separated}/64 samples separated");
    }

    #[test]
    fn pass_probability_matches_the_probe_overlap_formula() {
        // For transit-diagonal attacks on a reflected φ+ pair the analytic
        // pass probability is (1 + Re⟨P0|P1⟩²)/2.
        let mut rng = ChaCha12Rng::seed_from_u64(40);
        for enforce in [false, true] {
            for _ in 0..16 {
                let rotations = sample_constrained_collective(&mut rng, enforce);
                let z = rotations.probe_overlap();
                let expected = 0.5 * (1.0 + (z * z).re);
                let got = reflect_pair_pass_probability(&rotations.to_unitary());
                assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
            }
        }
    }

    #[test]
    fn constrained_attacks_never_fail_the_reflect_check() {
        let mut rng = ChaCha12Rng::seed_from_u64(50);
        for _ in 0..32 {
            let rotations = sample_constrained_collective(&mut rng, true);
            let p = reflect_pair_pass_probability(&rotations.to_unitary());
            assert!((p - 1.0).abs() < 1e-10);
        }
    }
}
