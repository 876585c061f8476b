//! Counter-based seed derivation for reproducible parallel streams.
//!
//! Every random stream in the toolkit is derived from a 64-bit seed plus a
//! path of integer components (edge word, replica index, generation, ...).
//! The derivation is a fixed splitmix64 chain, stable across platforms and
//! releases, so replaying a seed reproduces every sample no matter how the
//! work is scheduled.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer (Steele, Lea, Flood).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds one component into a running seed.
pub fn mix(h: u64, v: u64) -> u64 {
    splitmix64(h ^ v.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Derives a child seed from a parent seed and a component path.
///
/// Components are mixed in order and the path length is folded in last, so
/// `[1]` and `[1, 0]` land on unrelated streams.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &p in path {
        h = mix(h, p);
    }
    mix(h, path.len() as u64)
}

/// Seed assigned to a tree edge, identified by the word of its outmost vertex.
pub fn edge_seed(global: u64, word: &[u32]) -> u64 {
    let mut h = splitmix64(global ^ 0x6265_6467_6565_6467); // domain tag
    for &w in word {
        h = mix(h, u64::from(w));
    }
    mix(h, word.len() as u64)
}

/// Incremental form of [`edge_seed`] for walkers that move one level at a
/// time: pushing and popping path indices costs O(1) instead of rehashing
/// the whole word, and produces exactly the same seeds.
#[derive(Clone, Debug)]
pub struct EdgeSeedPath {
    states: Vec<u64>,
}

impl EdgeSeedPath {
    pub fn new(global: u64) -> Self {
        EdgeSeedPath {
            states: vec![splitmix64(global ^ 0x6265_6467_6565_6467)],
        }
    }

    pub fn depth(&self) -> usize {
        self.states.len() - 1
    }

    fn top(&self) -> u64 {
        *self.states.last().expect("root state always present")
    }

    pub fn push(&mut self, index: u32) {
        self.states.push(mix(self.top(), u64::from(index)));
    }

    /// Drops the deepest index; at the root this is a no-op.
    pub fn pop(&mut self) {
        if self.states.len() > 1 {
            self.states.pop();
        }
    }

    /// Seed of the edge above the current vertex (depth >= 1).
    pub fn current_edge_seed(&self) -> u64 {
        debug_assert!(self.depth() >= 1);
        mix(self.top(), self.depth() as u64)
    }

    /// Seed of the edge above child `index` of the current vertex.
    pub fn child_edge_seed(&self, index: u32) -> u64 {
        mix(mix(self.top(), u64::from(index)), self.depth() as u64 + 1)
    }
}

/// Deterministic RNG for a derived seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for a seed plus component path; shorthand for `rng(derive(..))`.
pub fn rng_at(seed: u64, path: &[u64]) -> ChaCha8Rng {
    rng(derive(seed, path))
}
