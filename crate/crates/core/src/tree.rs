//! Rooted trees described by branching functions.
//!
//! A branching function assigns every vertex a child count; the tree it
//! generates is never materialized. All operations here are pure functions
//! of a [`BranchingSpec`] and a vertex word, because level sizes grow
//! exponentially and any stored representation would be the bottleneck.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A vertex of the tree, identified by the word of 1-based child indices
/// taken from the root. The empty word is the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(Vec<u32>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn from_word(word: Vec<u32>) -> Self {
        Vertex(word)
    }

    pub fn word(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// The ancestor one level up; `None` for the root.
    pub fn parent(&self) -> Option<Vertex> {
        if self.0.is_empty() {
            None
        } else {
            Some(Vertex(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Extends the word by one child index (1-based).
    pub fn child(&self, index: u32) -> Vertex {
        let mut word = self.0.clone();
        word.push(index);
        Vertex(word)
    }

    /// Renders as `ε` for the root, else dot-joined indices (`1.2.1`).
    pub fn display(&self) -> String {
        if self.0.is_empty() {
            "ε".to_string()
        } else {
            self.0
                .iter()
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }
}

/// Deterministic description of a rooted tree via its branching function.
///
/// Only branching without extinction is admitted: every vertex has at least
/// one child, so the boundary of the tree is nonempty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BranchingSpec {
    /// Every vertex has exactly `b` children.
    Constant(u32),
    /// Child count depends only on depth, cycling through `levels`.
    Periodic(Vec<u32>),
    /// Arbitrary child counts for finitely many vertices, `default` elsewhere.
    Explicit {
        default: u32,
        overrides: BTreeMap<Vertex, u32>,
    },
}

impl BranchingSpec {
    pub fn constant(b: u32) -> Result<Self> {
        if b == 0 {
            return Err(Error::domain("constant branching must be >= 1"));
        }
        Ok(BranchingSpec::Constant(b))
    }

    pub fn periodic(levels: Vec<u32>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::domain("periodic branching needs >= 1 level"));
        }
        if levels.iter().any(|&b| b == 0) {
            return Err(Error::domain("periodic branching must be >= 1 everywhere"));
        }
        Ok(BranchingSpec::Periodic(levels))
    }

    pub fn explicit(default: u32, overrides: BTreeMap<Vertex, u32>) -> Result<Self> {
        if default == 0 || overrides.values().any(|&b| b == 0) {
            return Err(Error::domain("explicit branching must be >= 1 everywhere"));
        }
        Ok(BranchingSpec::Explicit { default, overrides })
    }

    /// Child count of `v` (the branching function itself).
    pub fn branching(&self, v: &Vertex) -> u32 {
        match self {
            BranchingSpec::Constant(b) => *b,
            BranchingSpec::Periodic(levels) => levels[v.depth() % levels.len()],
            BranchingSpec::Explicit { default, overrides } => {
                overrides.get(v).copied().unwrap_or(*default)
            }
        }
    }

    /// Whether the child count depends only on depth.
    pub fn is_spherically_symmetric(&self) -> bool {
        matches!(self, BranchingSpec::Constant(_) | BranchingSpec::Periodic(_))
    }

    /// Checks that `v` is a vertex of the tree: every index fits the child
    /// count of its prefix.
    pub fn contains(&self, v: &Vertex) -> bool {
        let mut prefix = Vertex::root();
        for &ix in v.word() {
            if ix == 0 || ix > self.branching(&prefix) {
                return false;
            }
            prefix = prefix.child(ix);
        }
        true
    }

    fn max_branching(&self) -> u32 {
        match self {
            BranchingSpec::Constant(b) => *b,
            BranchingSpec::Periodic(levels) => *levels.iter().max().expect("nonempty"),
            BranchingSpec::Explicit { default, overrides } => overrides
                .values()
                .copied()
                .chain(std::iter::once(*default))
                .max()
                .expect("nonempty"),
        }
    }

    /// True when some override key lies at or below `v`, i.e. the subtree of
    /// `v` is not purely default-branching.
    fn subtree_has_override(&self, v: &Vertex) -> bool {
        match self {
            BranchingSpec::Explicit { overrides, .. } => overrides
                .range(v.clone()..)
                .next()
                .map(|(k, _)| k.word().starts_with(v.word()))
                .unwrap_or(false),
            _ => false,
        }
    }
}

/// Children of `v` in index order.
pub fn children(spec: &BranchingSpec, v: &Vertex) -> Result<Vec<Vertex>> {
    if !spec.contains(v) {
        return Err(Error::domain(format!(
            "vertex {} is not part of the tree",
            v.display()
        )));
    }
    Ok((1..=spec.branching(v)).map(|i| v.child(i)).collect())
}

/// Exact number of depth-`n` vertices, `κ_n`. Counts are exact integers;
/// exceeding `u128` is reported as an overflow instead of saturating.
pub fn level_size(spec: &BranchingSpec, n: usize) -> Result<u128> {
    match spec {
        BranchingSpec::Constant(b) => {
            let n: u32 = n
                .try_into()
                .map_err(|_| Error::overflow(format!("kappa_{n} exceeds u128")))?;
            (*b as u128)
                .checked_pow(n)
                .ok_or_else(|| Error::overflow(format!("kappa_{n} exceeds u128")))
        }
        BranchingSpec::Periodic(levels) => {
            let mut count: u128 = 1;
            for depth in 0..n {
                count = count
                    .checked_mul(levels[depth % levels.len()] as u128)
                    .ok_or_else(|| Error::overflow(format!("kappa_{n} exceeds u128")))?;
            }
            Ok(count)
        }
        BranchingSpec::Explicit { default, .. } => {
            count_descendants(spec, &Vertex::root(), n, *default)
        }
    }
}

fn count_descendants(
    spec: &BranchingSpec,
    v: &Vertex,
    depth_left: usize,
    default: u32,
) -> Result<u128> {
    if depth_left == 0 {
        return Ok(1);
    }
    if !spec.subtree_has_override(v) {
        // Everything below is default-branching.
        let e: u32 = depth_left
            .try_into()
            .map_err(|_| Error::overflow("level count exceeds u128".to_string()))?;
        return (default as u128)
            .checked_pow(e)
            .ok_or_else(|| Error::overflow("level count exceeds u128".to_string()));
    }
    let mut total: u128 = 0;
    for i in 1..=spec.branching(v) {
        let sub = count_descendants(spec, &v.child(i), depth_left - 1, default)?;
        total = total
            .checked_add(sub)
            .ok_or_else(|| Error::overflow("level count exceeds u128".to_string()))?;
    }
    Ok(total)
}

/// ln κ_n computed without forming the integer count, so it never overflows.
pub fn log_level_size(spec: &BranchingSpec, n: usize) -> f64 {
    match spec {
        BranchingSpec::Constant(b) => n as f64 * f64::from(*b).ln(),
        BranchingSpec::Periodic(levels) => (0..n)
            .map(|depth| f64::from(levels[depth % levels.len()]).ln())
            .sum(),
        BranchingSpec::Explicit { default, .. } => {
            log_count_descendants(spec, &Vertex::root(), n, *default)
        }
    }
}

fn log_count_descendants(
    spec: &BranchingSpec,
    v: &Vertex,
    depth_left: usize,
    default: u32,
) -> f64 {
    if depth_left == 0 {
        return 0.0;
    }
    if !spec.subtree_has_override(v) {
        return depth_left as f64 * f64::from(default).ln();
    }
    let logs: Vec<f64> = (1..=spec.branching(v))
        .map(|i| log_count_descendants(spec, &v.child(i), depth_left - 1, default))
        .collect();
    crate::numeric::log_sum_exp(&logs)
}

/// Min and max of κ_n^{1/n} over the tail window n ∈ [⌈n_max/2⌉, n_max].
///
/// For a constant branching `b` both values are `b` up to a few ulps.
pub fn growth_rates(spec: &BranchingSpec, n_max: usize) -> Result<(f64, f64)> {
    if n_max < 1 {
        return Err(Error::domain("growth_rates needs n_max >= 1"));
    }
    let lo = n_max.div_ceil(2);
    let mut lower = f64::INFINITY;
    let mut upper = f64::NEG_INFINITY;
    for n in lo..=n_max {
        let rate = (log_level_size(spec, n) / n as f64).exp();
        lower = lower.min(rate);
        upper = upper.max(rate);
    }
    Ok((lower, upper))
}

/// Estimate of the branching number `br`.
///
/// Spherically symmetric trees have `br = lim κ_n^{1/n}`, which is computed
/// in closed form. For explicit specs the cutset characterization
/// `br = sup{λ : inf_C Σ_{v∈C} λ^{-|v|} > 0}` is estimated on the depth
/// `n_max` truncation: a min-cut dynamic program evaluates the inner inf and
/// a binary search finds the largest λ keeping it at or above 1.
pub fn branching_number(spec: &BranchingSpec, n_max: usize, tol: f64) -> Result<f64> {
    if n_max < 1 {
        return Err(Error::domain("branching_number needs n_max >= 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("branching_number needs tol > 0"));
    }
    match spec {
        BranchingSpec::Constant(b) => Ok(f64::from(*b)),
        BranchingSpec::Periodic(levels) => {
            let mean_log =
                levels.iter().map(|&b| f64::from(b).ln()).sum::<f64>() / levels.len() as f64;
            Ok(mean_log.exp())
        }
        BranchingSpec::Explicit { .. } => {
            let hi = f64::from(spec.max_branching());
            if hi <= 1.0 {
                return Ok(1.0);
            }
            let budget = 5_000_000usize;
            let mut lo = 1.0f64;
            let mut hi = hi;
            if min_cut_at_least_one(spec, hi, n_max, budget)? {
                return Ok(hi);
            }
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if min_cut_at_least_one(spec, mid, n_max, budget)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(lo)
        }
    }
}

fn min_cut_at_least_one(
    spec: &BranchingSpec,
    lambda: f64,
    n_max: usize,
    budget: usize,
) -> Result<bool> {
    let mut visited = 0usize;
    let root = Vertex::root();
    let mut total = 0.0;
    for i in 1..=spec.branching(&root) {
        total += min_cut(spec, &root.child(i), 1, lambda, n_max, budget, &mut visited)?;
    }
    Ok(total >= 1.0)
}

// Cut value at v: either cut at v itself (λ^{-|v|}) or cut somewhere in every
// child subtree, whichever is cheaper. Truncation leaves must be cut at.
fn min_cut(
    spec: &BranchingSpec,
    v: &Vertex,
    depth: usize,
    lambda: f64,
    n_max: usize,
    budget: usize,
    visited: &mut usize,
) -> Result<f64> {
    *visited += 1;
    if *visited > budget {
        return Err(Error::capability(format!(
            "depth-{n_max} truncation has more than {budget} vertices; \
             branching_number is only estimated for enumerable explicit trees"
        )));
    }
    let here = lambda.powi(-(depth as i32));
    if depth == n_max {
        return Ok(here);
    }
    let mut below = 0.0;
    for i in 1..=spec.branching(v) {
        below += min_cut(spec, &v.child(i), depth + 1, lambda, n_max, budget, visited)?;
        if below >= here {
            break; // cutting here is already no worse
        }
    }
    Ok(here.min(below))
}

/// All depth-`n` vertices, capped at `max_vertices`.
pub fn enumerate_level(
    spec: &BranchingSpec,
    n: usize,
    max_vertices: usize,
) -> Result<Vec<Vertex>> {
    let mut level = vec![Vertex::root()];
    for _ in 0..n {
        let mut next = Vec::new();
        for v in &level {
            for i in 1..=spec.branching(v) {
                if next.len() >= max_vertices {
                    return Err(Error::capacity(format!(
                        "level enumeration exceeds {max_vertices} vertices"
                    )));
                }
                next.push(v.child(i));
            }
        }
        level = next;
    }
    Ok(level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit(default: u32, entries: &[(&[u32], u32)]) -> BranchingSpec {
        let overrides = entries
            .iter()
            .map(|(w, b)| (Vertex::from_word(w.to_vec()), *b))
            .collect();
        BranchingSpec::explicit(default, overrides).unwrap()
    }

    #[test]
    fn children_of_constant_and_periodic() {
        let c2 = BranchingSpec::constant(2).unwrap();
        let kids = children(&c2, &Vertex::root()).unwrap();
        assert_eq!(kids, vec![Vertex::from_word(vec![1]), Vertex::from_word(vec![2])]);

        let p = BranchingSpec::periodic(vec![2, 3]).unwrap();
        let kids = children(&p, &Vertex::from_word(vec![1])).unwrap();
        assert_eq!(
            kids,
            vec![
                Vertex::from_word(vec![1, 1]),
                Vertex::from_word(vec![1, 2]),
                Vertex::from_word(vec![1, 3])
            ]
        );
    }

    #[test]
    fn children_of_explicit_with_single_child_root() {
        let spec = explicit(2, &[(&[], 1)]);
        let kids = children(&spec, &Vertex::root()).unwrap();
        assert_eq!(kids, vec![Vertex::from_word(vec![1])]);
    }

    #[test]
    fn children_rejects_invalid_vertex() {
        let c2 = BranchingSpec::constant(2).unwrap();
        assert!(children(&c2, &Vertex::from_word(vec![3])).is_err());
        assert!(children(&c2, &Vertex::from_word(vec![0])).is_err());
    }

    #[test]
    fn level_sizes_match_closed_forms() {
        let c2 = BranchingSpec::constant(2).unwrap();
        assert_eq!(level_size(&c2, 5).unwrap(), 32);
        assert_eq!(level_size(&c2, 0).unwrap(), 1);

        let p = BranchingSpec::periodic(vec![2, 3]).unwrap();
        assert_eq!(level_size(&p, 4).unwrap(), 36);
        assert_eq!(level_size(&p, 0).unwrap(), 1);
    }

    #[test]
    fn level_size_of_explicit_counts_exactly() {
        // Root has 1 child, its child has 3, default 2 elsewhere.
        let spec = explicit(2, &[(&[], 1), (&[1], 3)]);
        assert_eq!(level_size(&spec, 0).unwrap(), 1);
        assert_eq!(level_size(&spec, 1).unwrap(), 1);
        assert_eq!(level_size(&spec, 2).unwrap(), 3);
        assert_eq!(level_size(&spec, 3).unwrap(), 6);
    }

    #[test]
    fn level_size_overflow_is_reported() {
        let c2 = BranchingSpec::constant(2).unwrap();
        assert!(matches!(level_size(&c2, 200), Err(Error::Overflow(_))));
        let e = explicit(3, &[(&[], 2)]);
        assert!(matches!(level_size(&e, 200), Err(Error::Overflow(_))));
    }

    #[test]
    fn children_counts_sum_to_next_level_size() {
        let specs = vec![
            BranchingSpec::constant(2).unwrap(),
            BranchingSpec::periodic(vec![2, 3]).unwrap(),
            explicit(2, &[(&[], 3), (&[2], 1), (&[3, 1], 4)]),
        ];
        for spec in specs {
            for n in 1..=5usize {
                let parents = enumerate_level(&spec, n - 1, 100_000).unwrap();
                let total: u128 = parents
                    .iter()
                    .map(|v| spec.branching(v) as u128)
                    .sum();
                assert_eq!(total, level_size(&spec, n).unwrap(), "level {n}");
            }
        }
    }

    #[test]
    fn growth_rates_of_constant_are_exact() {
        for b in [2u32, 3, 5] {
            let spec = BranchingSpec::constant(b).unwrap();
            let (lo, hi) = growth_rates(&spec, 10).unwrap();
            assert!((lo - f64::from(b)).abs() < 1e-12);
            assert!((hi - f64::from(b)).abs() < 1e-12);
        }
    }

    #[test]
    fn growth_rates_of_periodic_bracket_the_limit() {
        let spec = BranchingSpec::periodic(vec![2, 3]).unwrap();
        let sqrt6 = 6.0f64.sqrt();

        // Window [10, 20]: the min sits at n = 11, κ_11 = 2^6 · 3^5, and the
        // max at even n equals √6 exactly.
        let (lo, hi) = growth_rates(&spec, 20).unwrap();
        let expected_lo = ((6.0 * 2.0f64.ln() + 5.0 * 3.0f64.ln()) / 11.0).exp();
        assert!((lo - expected_lo).abs() < 1e-9);
        assert!((hi - sqrt6).abs() < 1e-9);

        // A deeper window pins both ends within 1% of √6.
        let (lo, hi) = growth_rates(&spec, 40).unwrap();
        assert!((lo - sqrt6).abs() / sqrt6 < 0.01);
        assert!((hi - sqrt6).abs() / sqrt6 < 0.01);
    }

    #[test]
    fn growth_rates_of_a_ray_are_one() {
        let ray = explicit(1, &[]);
        let (lo, hi) = growth_rates(&ray, 12).unwrap();
        assert_eq!((lo, hi), (1.0, 1.0));
    }

    #[test]
    fn branching_number_symmetric_cases() {
        let c2 = BranchingSpec::constant(2).unwrap();
        assert_eq!(branching_number(&c2, 10, 1e-6).unwrap(), 2.0);
        let p = BranchingSpec::periodic(vec![2, 3]).unwrap();
        let br = branching_number(&p, 10, 1e-6).unwrap();
        assert!((br - 6.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn branching_number_of_ray_is_one() {
        let ray = explicit(1, &[]);
        assert_eq!(branching_number(&ray, 10, 1e-3).unwrap(), 1.0);
    }

    #[test]
    fn min_cut_search_converges_to_constant_branching() {
        // Same tree as Constant(2) but routed through the cutset DP.
        let as_explicit = explicit(2, &[]);
        for n_max in [4, 6, 8] {
            let est = branching_number(&as_explicit, n_max, 1e-3).unwrap();
            assert!((est - 2.0).abs() <= 2e-3, "depth {n_max}: {est}");
        }
    }

    #[test]
    fn branching_number_below_lower_growth_rate() {
        let specs = vec![
            explicit(2, &[(&[], 3)]),
            explicit(1, &[(&[], 2), (&[1], 2)]),
            explicit(2, &[(&[1], 1), (&[1, 1], 1)]),
        ];
        for spec in specs {
            let tol = 1e-3;
            let br = branching_number(&spec, 8, tol).unwrap();
            let (lo, _) = growth_rates(&spec, 8).unwrap();
            assert!(br <= lo + tol, "br {br} vs lower growth {lo}");
        }
    }
}
