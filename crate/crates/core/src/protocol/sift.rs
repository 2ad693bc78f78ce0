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

//! Sifting: classifying each qubit of a group by the operation pair both
//! users applied to it.
//!
//! Pair membership is by original (restored) pairing, positions (0,1) and
//! (2,3), so user operations recorded against transit positions are mapped
//! through the swap permutation first. Per restored pair:
//!
//! - check groups (step 5): a both-measure qubit contributes a `K_AB` bit; a
//!   pair reflected on both qubits is a Bell check; mixed qubits and lone
//!   reflected qubits are discarded;
//! - remaining groups (step 6): a fully reflected pair is a Bell check;
//!   Alice-measure/Bob-reflect contributes `K_TA`, the converse `K_TB`; a
//!   both-measure qubit is a Z-basis consistency check.

use serde::{Deserialize, Serialize};

use super::{GroupRecord, PerQubitOps, UserOp};

/// What one qubit contributes in its group's phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiftClass {
    KabBit,
    KtaBit,
    KtbBit,
    EcBell,
    EcZ,
    Discard,
}

fn classify(check_group: bool, ops: PerQubitOps, pair_fully_reflected: bool) -> SiftClass {
    match (ops.alice_op, ops.bob_op) {
        (UserOp::Measure, UserOp::Measure) => {
            if check_group {
                SiftClass::KabBit
            } else {
                SiftClass::EcZ
            }
        }
        (UserOp::Reflect, UserOp::Reflect) => {
            if pair_fully_reflected {
                SiftClass::EcBell
            } else {
                SiftClass::Discard
            }
        }
        (UserOp::Measure, UserOp::Reflect) => {
            if check_group {
                SiftClass::Discard
            } else {
                SiftClass::KtaBit
            }
        }
        (UserOp::Reflect, UserOp::Measure) => {
            if check_group {
                SiftClass::Discard
            } else {
                SiftClass::KtbBit
            }
        }
    }
}

/// Classifies the four qubits of a group, indexed by original position.
pub fn sift(record: &GroupRecord) -> [SiftClass; 4] {
    let ops = record.original_ops();
    std::array::from_fn(|q| {
        let partner = q ^ 1;
        let both_reflected =
            |o: PerQubitOps| o.alice_op == UserOp::Reflect && o.bob_op == UserOp::Reflect;
        let pair_fully_reflected = both_reflected(ops[q]) && both_reflected(ops[partner]);
        classify(record.check_group, ops[q], pair_fully_reflected)
    })
}
