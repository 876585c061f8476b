//! Exact level streaming of the matrix multiplicative cascade.
//!
//! Each vertex v carries the reverse-order product of the edge matrices on
//! its root path: a new edge matrix multiplies on the left, so stepping from
//! level n to level n + 1 extends every path product by one factor. Whole
//! levels are streamed at once — nothing is sampled or pruned — up to an
//! explicit width cap, beyond which the run errors out rather than
//! approximating.
//!
//! Each entry is stored as a unit-l1-norm matrix plus a separate log scale,
//! because path products decay or grow exponentially with depth.

use rayon::prelude::*;

use crate::env::{EdgeLaw, EdgeMatrixSource, Environment};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::numeric::{fit_line, log_add_exp, log_sum_exp};
use crate::seed;
use crate::tree::{BranchingSpec, Vertex};

/// One vertex of the current level: ξ[v] = exp(log_scale) · unit.
#[derive(Clone, Debug)]
pub struct FrameEntry {
    pub vertex: Vertex,
    pub unit: Matrix,
    pub log_scale: f64,
}

/// A complete tree level of scaled path products.
#[derive(Clone, Debug)]
pub struct CascadeFrame {
    pub level: usize,
    pub entries: Vec<FrameEntry>,
}

impl CascadeFrame {
    /// Level 0: the root path product is the identity.
    pub fn root(d: usize) -> Self {
        CascadeFrame {
            level: 0,
            entries: vec![FrameEntry {
                vertex: Vertex::root(),
                unit: Matrix::identity(d),
                log_scale: 0.0,
            }],
        }
    }

    pub fn width(&self) -> usize {
        self.entries.len()
    }

    /// Reassembled ξ[v] for entry `i` (convenience for tests and small runs).
    pub fn product(&self, i: usize) -> Matrix {
        self.entries[i].unit.scaled(self.entries[i].log_scale.exp())
    }
}

/// Extends a complete level n to the complete level n + 1.
pub fn step_level(
    frame: &CascadeFrame,
    env: &impl EdgeMatrixSource,
    spec: &BranchingSpec,
    width_cap: usize,
) -> Result<CascadeFrame> {
    let next_width: usize = frame
        .entries
        .iter()
        .map(|e| spec.branching(&e.vertex) as usize)
        .sum();
    if next_width > width_cap {
        return Err(Error::capacity(format!(
            "level {} would hold {next_width} entries, above the width cap \
             {width_cap}; raise the cap or lower n_max",
            frame.level + 1
        )));
    }

    let blocks: Result<Vec<Vec<FrameEntry>>> = frame
        .entries
        .par_iter()
        .map(|parent| {
            let b = spec.branching(&parent.vertex);
            let mut kids = Vec::with_capacity(b as usize);
            for i in 1..=b {
                let v = parent.vertex.child(i);
                let g = env.edge_matrix(&v)?;
                // New edge matrix multiplies on the left: ξ[w] = ξ_{a(w)} ξ[u].
                let (unit, step) = g.mul(&parent.unit).l1_normalized();
                kids.push(FrameEntry {
                    vertex: v,
                    unit,
                    log_scale: parent.log_scale + step,
                });
            }
            Ok(kids)
        })
        .collect();

    Ok(CascadeFrame {
        level: frame.level + 1,
        entries: blocks?.into_iter().flatten().collect(),
    })
}

/// log (χ, ψ_n χ) for the frame's level: log-sum-exp over entries of
/// log_scale + log(χᵀ unit χ). Assumes nonnegative entries (strictly
/// positive laws); an empty frame gives -inf.
pub fn psi_quadform(frame: &CascadeFrame) -> f64 {
    let terms: Vec<f64> = frame
        .entries
        .iter()
        .map(|e| e.log_scale + e.unit.quadform_ones().ln())
        .collect();
    log_sum_exp(&terms)
}

/// Per-level statistics of one quenched cascade run.
#[derive(Clone, Debug)]
pub struct LevelStat {
    pub n: usize,
    pub kappa: u128,
    /// log (χ, ψ_n χ)
    pub log_psi: f64,
    /// log Z_n with Z_n = Σ_{k ≤ n} (χ, ψ_k χ), level 0 included.
    pub log_z: f64,
    /// Least-squares slope of log_psi over the tail window ⌈n/2⌉..=n;
    /// NaN while the window has fewer than two points.
    pub slope: f64,
}

/// The per-level series of one exact quenched run.
#[derive(Clone, Debug)]
pub struct CascadeSeries {
    pub levels: Vec<LevelStat>,
    /// Tail slope at the deepest level; exp(slope) estimates λ·gr.
    pub tail_slope: f64,
}

impl CascadeSeries {
    pub fn last_log_z(&self) -> f64 {
        self.levels.last().map(|l| l.log_z).unwrap_or(f64::NEG_INFINITY)
    }
}

fn tail_slope_at(log_psis: &[f64], n: usize) -> f64 {
    let lo = n.div_ceil(2);
    if n < lo + 1 {
        return f64::NAN;
    }
    let xs: Vec<f64> = (lo..=n).map(|k| k as f64).collect();
    let ys: Vec<f64> = log_psis[lo..=n].to_vec();
    fit_line(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN)
}

/// Streams the cascade from the root to `n_max` under a quenched
/// environment, recording (χ, ψ_n χ), the partial sums Z_n (level 0
/// included), and a running tail slope.
pub fn run_cascade(
    spec: &BranchingSpec,
    env: &impl EdgeMatrixSource,
    n_max: usize,
    width_cap: usize,
) -> Result<CascadeSeries> {
    if n_max < 1 {
        return Err(Error::domain("run_cascade needs n_max >= 1"));
    }
    let mut frame = CascadeFrame::root(env.dim());
    let mut log_psis = vec![psi_quadform(&frame)];
    let mut log_z = log_psis[0];
    let mut levels = vec![LevelStat {
        n: 0,
        kappa: 1,
        log_psi: log_psis[0],
        log_z,
        slope: f64::NAN,
    }];
    for n in 1..=n_max {
        frame = step_level(&frame, env, spec, width_cap)?;
        let log_psi = psi_quadform(&frame);
        log_psis.push(log_psi);
        log_z = log_add_exp(log_z, log_psi);
        levels.push(LevelStat {
            n,
            kappa: frame.width() as u128,
            log_psi,
            log_z,
            slope: tail_slope_at(&log_psis, n),
        });
    }
    let tail_slope = levels.last().expect("n_max >= 1").slope;
    Ok(CascadeSeries { levels, tail_slope })
}

/// Monte Carlo mean with standard error.
#[derive(Clone, Debug)]
pub struct McMeanPsi {
    pub mean: f64,
    pub std_err: f64,
    pub reps: usize,
}

const MC_STREAM_TAG: u64 = 0x6d63; // "mc"

/// Monte Carlo mean of (χ, ψ_n χ) over independent environments on a
/// constant-branching tree. The environment average has the closed form
/// (χ, (b·E ξ)ⁿ χ) by edge independence, which makes this an oracle for
/// both the sampler and the streamer.
pub fn mc_mean_psi<L>(
    spec: &BranchingSpec,
    law: &L,
    n: usize,
    reps: usize,
    mc_seed: u64,
    width_cap: usize,
) -> Result<McMeanPsi>
where
    L: EdgeLaw + Clone,
    Environment<L>: EdgeMatrixSource,
{
    let BranchingSpec::Constant(_) = spec else {
        return Err(Error::domain("mc_mean_psi needs a constant branching spec"));
    };
    if n < 1 || reps < 2 {
        return Err(Error::domain("mc_mean_psi needs n >= 1 and reps >= 2"));
    }

    let values: Result<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let env_seed = seed::derive(mc_seed, &[MC_STREAM_TAG, rep as u64]);
            let env = Environment::new(env_seed, law.clone()).with_cache_cap(0);
            let series = run_cascade(spec, &env, n, width_cap)?;
            Ok(series.levels[n].log_psi.exp())
        })
        .collect();
    let values = values?;

    let reps_f = reps as f64;
    let mean = values.iter().sum::<f64>() / reps_f;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps_f - 1.0);
    Ok(McMeanPsi {
        mean,
        std_err: (var / reps_f).sqrt(),
        reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::{EntryLaw, MatrixLaw, MatrixSampler};

    fn constant_scalar_env(c: f64, seed: u64) -> Environment<MatrixLaw> {
        let law = MatrixLaw::point_mass(Matrix::from_rows(1, vec![c]).unwrap());
        Environment::new(seed, law)
    }

    #[test]
    fn scalar_point_mass_levels_are_powers() {
        let spec = BranchingSpec::constant(2).unwrap();
        let env = constant_scalar_env(0.5, 1);
        let mut frame = CascadeFrame::root(1);
        for n in 1..=6 {
            frame = step_level(&frame, &env, &spec, 1 << 20).unwrap();
            assert_eq!(frame.width(), 1usize << n);
            for e in &frame.entries {
                assert!((e.log_scale - n as f64 * 0.5f64.ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_point_mass_keeps_identity_products() {
        let spec = BranchingSpec::periodic(vec![2, 3]).unwrap();
        let env = Environment::new(3, MatrixLaw::point_mass(Matrix::identity(2)));
        let mut frame = CascadeFrame::root(2);
        for _ in 0..4 {
            frame = step_level(&frame, &env, &spec, 1 << 20).unwrap();
            for i in 0..frame.width() {
                assert_eq!(frame.product(i), Matrix::identity(2));
            }
        }
    }

    #[test]
    fn streamed_products_match_direct_reverse_order_products() {
        // Noncommuting atoms; direct multiplication along each path is the
        // oracle for the streamed representation.
        let a = Matrix::from_rows(2, vec![0.6, 0.3, 0.1, 0.5]).unwrap();
        let b = Matrix::from_rows(2, vec![0.2, 0.7, 0.4, 0.1]).unwrap();
        let law = MatrixLaw::finite_support(vec![(a, 0.5), (b, 0.5)]).unwrap();
        let env = Environment::new(17, law);
        let spec = BranchingSpec::constant(2).unwrap();

        let mut frame = CascadeFrame::root(2);
        for _ in 0..3 {
            frame = step_level(&frame, &env, &spec, 1 << 10).unwrap();
        }
        for (i, entry) in frame.entries.iter().enumerate() {
            // Reverse order: deepest edge first.
            let mut direct = Matrix::identity(2);
            let word = entry.vertex.word();
            for depth in 1..=word.len() {
                let v = Vertex::from_word(word[..depth].to_vec());
                let g = env.edge_sample(&v).unwrap();
                direct = g.mul(&direct);
            }
            let streamed = frame.product(i);
            for (x, y) in streamed.entries().iter().zip(direct.entries()) {
                assert!((x - y).abs() <= 1e-12 * y.abs().max(f64::MIN_POSITIVE));
            }
        }
    }

    #[test]
    fn quadform_matches_closed_forms() {
        // d=1, ξ ≡ c, Constant(2): (χ, ψ_n χ) = (2c)^n.
        let spec = BranchingSpec::constant(2).unwrap();
        let env = constant_scalar_env(0.3, 5);
        let mut frame = CascadeFrame::root(1);
        for n in 1..=5 {
            frame = step_level(&frame, &env, &spec, 1 << 20).unwrap();
            let expected = n as f64 * (2.0 * 0.3f64).ln();
            assert!((psi_quadform(&frame) - expected).abs() < 1e-10);
        }

        // PointMass(I₂): each (χ, I χ) = 2, so level n gives 2ⁿ·2.
        let env = Environment::new(1, MatrixLaw::point_mass(Matrix::identity(2)));
        let mut frame = CascadeFrame::root(2);
        for n in 1..=4 {
            frame = step_level(&frame, &env, &spec, 1 << 20).unwrap();
            let expected = (2.0f64.powi(n) * 2.0).ln();
            assert!((psi_quadform(&frame) - expected).abs() < 1e-12);
        }

        // Single entry with unit matrix of all 0.5: χᵀMχ = 2.
        let frame = CascadeFrame {
            level: 1,
            entries: vec![FrameEntry {
                vertex: Vertex::from_word(vec![1]),
                unit: Matrix::from_rows(2, vec![0.5; 4]).unwrap(),
                log_scale: 0.0,
            }],
        };
        assert!((psi_quadform(&frame) - 2.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn run_cascade_partial_sums_converge_for_subcritical_scalar() {
        // ξ ≡ 0.25, b = 2: (χ,ψ_nχ) = 0.5ⁿ and Z_n → 2 (level 0 included).
        let spec = BranchingSpec::constant(2).unwrap();
        let env = constant_scalar_env(0.25, 9);
        let series = run_cascade(&spec, &env, 12, 1 << 20).unwrap();
        for stat in &series.levels {
            let expected = stat.n as f64 * 0.5f64.ln();
            assert!((stat.log_psi - expected).abs() < 1e-9);
        }
        assert!((series.last_log_z().exp() - 2.0).abs() < 1e-3);
        // Monotone partial sums.
        for w in series.levels.windows(2) {
            assert!(w[1].log_z >= w[0].log_z);
        }
    }

    #[test]
    fn run_cascade_tail_slope_detects_divergence() {
        // ξ ≡ 1, b = 2: Z_n = Σ 2^k diverges, slope → log 2.
        let spec = BranchingSpec::constant(2).unwrap();
        let env = constant_scalar_env(1.0, 2);
        let series = run_cascade(&spec, &env, 14, 1 << 20).unwrap();
        assert!((series.tail_slope - 2.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn width_cap_is_a_hard_error() {
        let spec = BranchingSpec::constant(2).unwrap();
        let env = constant_scalar_env(1.0, 2);
        let err = run_cascade(&spec, &env, 12, 32).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)), "{err}");
    }

    #[test]
    fn scaling_the_law_shifts_log_psi_by_n_log_c() {
        let law = MatrixLaw::iid_entries(2, EntryLaw::uniform(0.5, 1.5).unwrap()).unwrap();
        let scaled = law.scaled(0.3).unwrap();
        let spec = BranchingSpec::constant(2).unwrap();
        let base = run_cascade(&spec, &Environment::new(31, law), 6, 1 << 20).unwrap();
        let shifted = run_cascade(&spec, &Environment::new(31, scaled), 6, 1 << 20).unwrap();
        for (b, s) in base.levels.iter().zip(&shifted.levels) {
            let expected = b.log_psi + b.n as f64 * 0.3f64.ln();
            assert!((s.log_psi - expected).abs() < 1e-9, "level {}", b.n);
        }
    }

    #[test]
    fn mc_mean_matches_point_mass_exactly() {
        let g = Matrix::from_rows(2, vec![0.2, 0.1, 0.1, 0.2]).unwrap();
        let law = MatrixLaw::point_mass(g.clone());
        let spec = BranchingSpec::constant(2).unwrap();
        let est = mc_mean_psi(&spec, &law, 4, 8, 3, 1 << 20).unwrap();

        // Deterministic value: (χ, (2g)⁴ χ).
        let mut m = Matrix::identity(2);
        for _ in 0..4 {
            m = g.scaled(2.0).mul(&m);
        }
        assert!((est.mean - m.quadform_ones()).abs() < 1e-10);
        assert!(est.std_err < 1e-12);
    }

    #[test]
    fn mc_mean_scalar_two_point_is_unbiased() {
        // E ξ = 1, b = 2, n = 6: E (χ,ψ_6χ) = 2⁶ = 64.
        let law = MatrixLaw::scalar(EntryLaw::two_point(0.5, 0.5, 1.5).unwrap());
        let spec = BranchingSpec::constant(2).unwrap();
        let est = mc_mean_psi(&spec, &law, 6, 4_000, 12, 1 << 20).unwrap();
        assert!(
            (est.mean - 64.0).abs() <= 4.0 * est.std_err,
            "mean {} se {}",
            est.mean,
            est.std_err
        );
    }

    #[test]
    fn mc_mean_matrix_case_matches_mean_power() {
        let law = MatrixLaw::iid_entries(2, EntryLaw::uniform(0.05, 0.15).unwrap()).unwrap();
        let spec = BranchingSpec::constant(2).unwrap();
        let est = mc_mean_psi(&spec, &law, 5, 400, 21, 1 << 20).unwrap();

        let mut m = Matrix::identity(2);
        let two_mean = law.mean_matrix().scaled(2.0);
        for _ in 0..5 {
            m = two_mean.mul(&m);
        }
        let exact = m.quadform_ones();
        assert!(
            (est.mean - exact).abs() <= 4.0 * est.std_err,
            "mean {} exact {exact} se {}",
            est.mean,
            est.std_err
        );
    }

    #[test]
    fn mc_mean_requires_constant_branching() {
        let law = MatrixLaw::scalar(EntryLaw::constant(0.5).unwrap());
        let spec = BranchingSpec::periodic(vec![2, 3]).unwrap();
        assert!(mc_mean_psi(&spec, &law, 3, 4, 0, 1 << 20).is_err());
    }
}
