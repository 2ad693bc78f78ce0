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

//! Named, splittable random streams.
//!
//! Every sampling site in the simulator draws from a stream derived from one
//! root seed and a stable name, so that adding or removing a consumer (say,
//! an attack) never perturbs the draws seen by anyone else. The derivation is
//! fixed and platform independent:
//!
//! ```text
//! h0 = fnv1a64(name) ^ root_seed
//! seed bytes = little-endian words splitmix64(h0), splitmix64²(h0), …
//! stream     = ChaCha12 seeded with those 32 bytes
//! ```
//!
//! Numbered substreams (per trial, per retry) extend the name with `#i`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// The concrete RNG behind every stream.
pub type StreamRng = ChaCha12Rng;

/// Stream names used by the protocol engine and the analysis tooling.
pub mod names {
    /// TP's preparation coins (the per-group swap choice).
    pub const PREPARE: &str = "prepare";
    /// Alice's and Bob's operation choices and measurement draws.
    pub const USER_OPS: &str = "user-ops";
    /// The public coin stream selecting check groups.
    pub const SELECTION: &str = "selection";
    /// TP's own measurement draws and publication coins.
    pub const TP: &str = "tp";
    /// Everything the adversary does.
    pub const ADVERSARY: &str = "adversary";
    /// Shot sampling in circuit scenarios.
    pub const SHOTS: &str = "shots";
    /// Random secrets when the caller asks for them.
    pub const SECRETS: &str = "secrets";
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives independent named ChaCha12 streams from a single root seed.
#[derive(Debug, Clone, Copy)]
pub struct SeedSplitter {
    root: u64,
}

impl SeedSplitter {
    pub fn new(root: u64) -> SeedSplitter {
        SeedSplitter { root }
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// The stream for `name`.
    pub fn stream(&self, name: &str) -> ChaCha12Rng {
        let mut state = fnv1a64(name.as_bytes()) ^ self.root;
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha12Rng::from_seed(seed)
    }

    /// Numbered substream, e.g. one per Monte Carlo trial.
    pub fn substream(&self, name: &str, index: u64) -> ChaCha12Rng {
        self.stream(&format!("{name}#{index}"))
    }

    /// A derived 64-bit seed (the first word of the named substream), for
    /// handing a whole run its own root.
    pub fn derive_seed(&self, name: &str, index: u64) -> u64 {
        self.substream(name, index).next_u64()
    }
}
