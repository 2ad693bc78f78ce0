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

//! Shared fixtures for the criterion benchmarks.

use sqpc_core::protocol::{RunConfig, Secret};
use sqpc_core::streams::SeedSplitter;

/// A deterministic configuration sized for benchmarking; detection aborts
/// are disabled so timings never depend on early exits.
pub fn bench_config(n: usize, seed: u64) -> RunConfig {
    let splitter = SeedSplitter::new(seed);
    let mut rng = splitter.stream("bench-secrets");
    RunConfig {
        n,
        seed,
        secret_a: Secret::random(n, &mut rng),
        secret_b: Secret::random(n, &mut rng),
        tp_strategy: Default::default(),
        threshold: 0.0,
        continue_on_detection: true,
    }
}
