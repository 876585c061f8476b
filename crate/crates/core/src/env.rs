//! Quenched random environments on tree edges.
//!
//! An [`Environment`] assigns one i.i.d. sample (a matrix or a rate vector)
//! to every edge of the infinite tree, lazily. Each edge's sample is drawn
//! from an RNG seeded by a stable hash of the global seed and the edge's
//! vertex word, so the environment is a pure function of the seed: replaying
//! it yields identical samples regardless of query order, caching, or the
//! number of concurrent callers.

use dashmap::DashMap;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::law::{rates_to_matrix, MatrixLaw, MatrixSampler, RateLaw, RateVector};
use crate::matrix::Matrix;
use crate::seed;
use crate::tree::Vertex;

/// A law that can dress tree edges.
pub trait EdgeLaw: Sync + Send {
    type Sample: Clone + Send + Sync;
    fn dim(&self) -> usize;
    fn sample_edge(&self, rng: &mut ChaCha8Rng) -> Self::Sample;
}

impl EdgeLaw for MatrixLaw {
    type Sample = Matrix;
    fn dim(&self) -> usize {
        MatrixSampler::dim(self)
    }
    fn sample_edge(&self, rng: &mut ChaCha8Rng) -> Matrix {
        self.sample_matrix(rng)
    }
}

impl EdgeLaw for RateLaw {
    type Sample = RateVector;
    fn dim(&self) -> usize {
        self.dim()
    }
    fn sample_edge(&self, rng: &mut ChaCha8Rng) -> RateVector {
        self.sample(rng)
    }
}

/// Lazy, seed-deterministic assignment of an i.i.d. sample to every edge.
///
/// Edges are indexed by their outmost vertex, so the root carries no sample.
/// The cache is shared-read with first-writer-wins semantics; by determinism
/// the value written is the same whichever caller gets there first. Beyond
/// `cache_cap` entries, samples are recomputed instead of stored — the value
/// is identical either way.
pub struct Environment<L: EdgeLaw> {
    global_seed: u64,
    law: L,
    cache: DashMap<Vertex, L::Sample>,
    cache_cap: usize,
}

impl<L: EdgeLaw> Environment<L> {
    pub fn new(global_seed: u64, law: L) -> Self {
        Environment {
            global_seed,
            law,
            cache: DashMap::new(),
            cache_cap: 1 << 20,
        }
    }

    pub fn with_cache_cap(mut self, cache_cap: usize) -> Self {
        self.cache_cap = cache_cap;
        self
    }

    pub fn global_seed(&self) -> u64 {
        self.global_seed
    }

    pub fn law(&self) -> &L {
        &self.law
    }

    pub fn dim(&self) -> usize {
        self.law.dim()
    }

    /// The sample attached to the edge above `v`, cached.
    pub fn edge_sample(&self, v: &Vertex) -> Result<L::Sample> {
        if v.is_root() {
            return Err(Error::domain(
                "the root has no incoming edge; edge samples are indexed by \
                 the edge's outmost vertex",
            ));
        }
        if let Some(hit) = self.cache.get(v) {
            return Ok(hit.clone());
        }
        let sample = self.derive(v);
        if self.cache.len() < self.cache_cap {
            // First writer wins; any concurrent writer inserts the same value.
            self.cache.entry(v.clone()).or_insert_with(|| sample.clone());
        }
        Ok(sample)
    }

    /// Same value as [`Environment::edge_sample`], never touching the cache.
    /// Used by streaming consumers that visit each edge exactly once.
    pub fn edge_sample_uncached(&self, v: &Vertex) -> Result<L::Sample> {
        if v.is_root() {
            return Err(Error::domain(
                "the root has no incoming edge; edge samples are indexed by \
                 the edge's outmost vertex",
            ));
        }
        Ok(self.derive(v))
    }

    fn derive(&self, v: &Vertex) -> L::Sample {
        let mut rng = seed::rng(seed::edge_seed(self.global_seed, v.word()));
        self.law.sample_edge(&mut rng)
    }
}

/// A source of edge matrices for the cascade, regardless of whether the
/// underlying environment carries matrices or rate vectors.
pub trait EdgeMatrixSource: Sync {
    fn dim(&self) -> usize;
    fn edge_matrix(&self, v: &Vertex) -> Result<Matrix>;
}

impl EdgeMatrixSource for Environment<MatrixLaw> {
    fn dim(&self) -> usize {
        EdgeLaw::dim(&self.law)
    }
    fn edge_matrix(&self, v: &Vertex) -> Result<Matrix> {
        self.edge_sample_uncached(v)
    }
}

// The cascade view of a rate environment, backed by the same underlying
// rate samples the walk sees.
//
// The stationary weight of a walk state chains ν_{xy}/μ_y factors with the
// symbol indices running old → new from the root down — a forward product —
// while the cascade composes deepest edge first. Summed against the all-ones
// vector these coincide exactly when each edge contributes the transpose
// ξᵀ (rows divided by μ), so that is what this view supplies; level masses
// then reproduce (χ, ψ_n χ) pathwise, not just in law.
impl EdgeMatrixSource for Environment<RateLaw> {
    fn dim(&self) -> usize {
        self.law.dim()
    }
    fn edge_matrix(&self, v: &Vertex) -> Result<Matrix> {
        Ok(rates_to_matrix(&self.edge_sample_uncached(v)?)?.transpose())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::EntryLaw;

    fn uniform_env(seed: u64) -> Environment<MatrixLaw> {
        let law = MatrixLaw::iid_entries(2, EntryLaw::uniform(0.0, 1.0).unwrap()).unwrap();
        Environment::new(seed, law)
    }

    #[test]
    fn repeated_queries_are_bitwise_identical() {
        let env = uniform_env(42);
        let v = Vertex::from_word(vec![1, 2, 1]);
        let a = env.edge_sample(&v).unwrap();
        let b = env.edge_sample(&v).unwrap();
        let c = env.edge_sample_uncached(&v).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn value_is_independent_of_query_order() {
        let env1 = uniform_env(42);
        let env2 = uniform_env(42);
        let u = Vertex::from_word(vec![1]);
        let v = Vertex::from_word(vec![2, 2]);
        let a1 = env1.edge_sample(&u).unwrap();
        let b1 = env1.edge_sample(&v).unwrap();
        let b2 = env2.edge_sample(&v).unwrap();
        let a2 = env2.edge_sample(&u).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
    }

    #[test]
    fn root_has_no_edge() {
        let env = uniform_env(1);
        assert!(env.edge_sample(&Vertex::root()).is_err());
    }

    #[test]
    fn different_global_seeds_give_different_samples() {
        let v = Vertex::from_word(vec![1]);
        let mut seen = std::collections::BTreeSet::new();
        for s in 0..10_000u64 {
            let env = uniform_env(s);
            let m = env.edge_sample(&v).unwrap();
            let key: Vec<u64> = m.entries().iter().map(|x| x.to_bits()).collect();
            assert!(seen.insert(key), "collision at seed {s}");
        }
    }

    #[test]
    fn sibling_samples_look_independent() {
        // Empirical correlation of first entries across sibling edges.
        let n = 10_000usize;
        let mut sum_a = 0.0;
        let mut sum_b = 0.0;
        let mut sum_ab = 0.0;
        for s in 0..n {
            let env = uniform_env(s as u64);
            let a = env.edge_sample(&Vertex::from_word(vec![1])).unwrap().get(0, 0);
            let b = env.edge_sample(&Vertex::from_word(vec![2])).unwrap().get(0, 0);
            sum_a += a;
            sum_b += b;
            sum_ab += a * b;
        }
        let nf = n as f64;
        let cov = sum_ab / nf - (sum_a / nf) * (sum_b / nf);
        let corr = cov / (1.0 / 12.0); // Var of U(0,1)
        assert!(corr.abs() < 3.0 / nf.sqrt(), "corr {corr}");
    }

    #[test]
    fn rate_view_commutes_with_caching() {
        let law = RateLaw::new(
            2,
            EntryLaw::uniform(0.5, 1.5).unwrap(),
            EntryLaw::uniform(1.0, 2.0).unwrap(),
        )
        .unwrap();
        let env = Environment::new(9, law);
        let v = Vertex::from_word(vec![1, 1]);
        let cached = env.edge_sample(&v).unwrap();
        let via_view = env.edge_matrix(&v).unwrap();
        assert_eq!(rates_to_matrix(&cached).unwrap().transpose(), via_view);
    }

    #[test]
    fn concurrent_queries_agree() {
        use rayon::prelude::*;
        let env = uniform_env(5);
        let v = Vertex::from_word(vec![3]);
        let law = MatrixLaw::iid_entries(2, EntryLaw::uniform(0.0, 1.0).unwrap()).unwrap();
        let reference = Environment::new(5, law).edge_sample(&v).unwrap();
        let all: Vec<Matrix> = (0..64)
            .into_par_iter()
            .map(|_| env.edge_sample(&v).unwrap())
            .collect();
        assert!(all.iter().all(|m| *m == reference));
    }
}
