//! Estimation of the moment growth rate k(s) of random matrix products and
//! of the classification parameter λ = inf_{s∈[0,1]} k(s).
//!
//! k(s) is the limit of (E ‖ξ_n ⋯ ξ_1‖^s)^{1/n} in the operator norm
//! induced by the l1 vector norm. It has no closed form in general, so the
//! estimator here is Monte Carlo: for each depth n in a window it draws
//! independent products, forms y_n = log of the empirical mean of ‖·‖^s,
//! and reads log k off the slope of y_n against n. The regression over a
//! window cancels the subexponential prefactor and yields a standard error
//! in the same pass.
//!
//! Two numerical points matter at any depth:
//!
//! * partial products are renormalized to unit operator norm at every step,
//!   with the log of the scale carried separately, so products spanning
//!   hundreds of orders of magnitude neither overflow nor underflow;
//! * the empirical mean of ‖·‖^s is assembled by log-sum-exp over the
//!   per-replica accumulated log norms.
//!
//! Replicas derive their RNG streams from (seed, n, replica) — not from s —
//! so evaluations at different s reuse the same underlying matrix draws.
//! That makes the estimated curve s ↦ k̂(s) a smooth deterministic function
//! of the seed, which is what lets golden-section search minimize it.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::law::MatrixSampler;
use crate::matrix::Matrix;
use crate::numeric::{fit_line, log_sum_exp};
use crate::seed;

const KS_STREAM_TAG: u64 = 0x6b73; // "ks"

/// Operator norm induced by the l1 vector norm: the max column abs-sum.
pub fn operator_norm_l1(m: &Matrix) -> f64 {
    m.l1_operator_norm()
}

/// Point estimate of k(s).
#[derive(Clone, Debug)]
pub struct KsEstimate {
    pub s: f64,
    pub k_hat: f64,
    /// Standard error of k_hat (delta method from the slope's regression SE).
    pub std_err: f64,
    pub n_window: (usize, usize),
    pub replicas: usize,
}

/// Estimate of λ with the evaluated curve.
#[derive(Clone, Debug)]
pub struct LambdaEstimate {
    pub lambda_hat: f64,
    pub s_star: f64,
    /// Standard error of k̂ at the minimizer.
    pub std_err: f64,
    /// Every evaluated point, sorted by s.
    pub curve: Vec<KsEstimate>,
}

/// Log of the accumulated operator norm of one n-fold product, replica `r`.
fn product_log_norm<L: MatrixSampler>(law: &L, n: usize, stream_seed: u64, r: usize) -> f64 {
    let mut rng = seed::rng_at(stream_seed, &[KS_STREAM_TAG, n as u64, r as u64]);
    let d = law.dim();
    let mut unit = Matrix::identity(d);
    let mut log_scale = 0.0f64;
    for _ in 0..n {
        let g = law.sample_matrix(&mut rng);
        let prod = g.mul(&unit);
        let (next, step) = prod.l1_normalized();
        unit = next;
        log_scale += step;
    }
    // ‖product‖ = exp(log_scale) · ‖unit‖ and ‖unit‖ = 1 by construction.
    log_scale
}

/// Monte Carlo estimate of k(s) from a regression of log-mean-norm against
/// the product depth over `n_list`.
pub fn estimate_k<L: MatrixSampler>(
    law: &L,
    s: f64,
    n_list: &[usize],
    replicas: usize,
    stream_seed: u64,
) -> Result<KsEstimate> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::domain("estimate_k needs s >= 0"));
    }
    if replicas < 2 {
        return Err(Error::domain("estimate_k needs at least 2 replicas"));
    }
    if n_list.is_empty() {
        return Err(Error::domain("estimate_k needs a nonempty n_list"));
    }
    if n_list.iter().any(|&n| n == 0) {
        return Err(Error::domain("estimate_k needs every n >= 1"));
    }
    let mut distinct = n_list.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::domain(
            "estimate_k needs at least 2 distinct depths to fit a slope",
        ));
    }

    let mut xs = Vec::with_capacity(n_list.len());
    let mut ys = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let log_norms: Vec<f64> = (0..replicas)
            .into_par_iter()
            .map(|r| s * product_log_norm(law, n, stream_seed, r))
            .collect();
        let y = log_sum_exp(&log_norms) - (replicas as f64).ln();
        xs.push(n as f64);
        ys.push(y);
    }

    let fit = fit_line(&xs, &ys).expect("n_list has >= 2 distinct depths");
    let k_hat = fit.slope.exp();
    Ok(KsEstimate {
        s,
        k_hat,
        std_err: k_hat * fit.slope_std_err,
        n_window: (*distinct.first().unwrap(), *distinct.last().unwrap()),
        replicas,
    })
}

/// Estimates λ = inf_{s∈[0,1]} k(s): a coarse grid scan followed by
/// golden-section refinement of the bracketing interval down to width `tol`.
///
/// k is log-convex, so once the grid brackets the minimum the refinement is
/// safe; the endpoints s = 0 and s = 1 always stay in the candidate set.
pub fn estimate_lambda<L: MatrixSampler>(
    law: &L,
    grid: usize,
    tol: f64,
    replicas: usize,
    n_list: &[usize],
    stream_seed: u64,
) -> Result<LambdaEstimate> {
    if grid < 3 {
        return Err(Error::domain("estimate_lambda needs grid >= 3"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("estimate_lambda needs tol > 0"));
    }

    let mut curve: Vec<KsEstimate> = Vec::new();
    let eval = |s: f64, curve: &mut Vec<KsEstimate>| -> Result<f64> {
        // Common random numbers make k̂ a function of s alone; reuse hits.
        if let Some(existing) = curve.iter().find(|e| e.s == s) {
            return Ok(existing.k_hat);
        }
        let est = estimate_k(law, s, n_list, replicas, stream_seed)?;
        let k = est.k_hat;
        curve.push(est);
        Ok(k)
    };

    let mut best_s = 0.0;
    let mut best_k = f64::INFINITY;
    let mut best_ix = 0usize;
    let grid_points: Vec<f64> = (0..grid)
        .map(|i| i as f64 / (grid - 1) as f64)
        .collect();
    for (i, &s) in grid_points.iter().enumerate() {
        let k = eval(s, &mut curve)?;
        if k < best_k {
            best_k = k;
            best_s = s;
            best_ix = i;
        }
    }

    // Bracket around the grid minimum, then golden-section.
    let mut a = if best_ix == 0 { 0.0 } else { grid_points[best_ix - 1] };
    let mut b = if best_ix + 1 == grid_points.len() {
        1.0
    } else {
        grid_points[best_ix + 1]
    };
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1, &mut curve)?;
    let mut f2 = eval(x2, &mut curve)?;
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1, &mut curve)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2, &mut curve)?;
        }
    }

    curve.sort_by(|p, q| p.s.partial_cmp(&q.s).expect("finite s"));
    let best = curve
        .iter()
        .min_by(|p, q| p.k_hat.partial_cmp(&q.k_hat).expect("finite k"))
        .expect("curve nonempty");
    let _ = (best_s, best_k);
    Ok(LambdaEstimate {
        lambda_hat: best.k_hat,
        s_star: best.s,
        std_err: best.std_err,
        curve,
    })
}

/// Largest eigenvalue modulus of a nonnegative matrix by power iteration.
///
/// Starts from a strictly positive vector, so the estimate converges to the
/// Perron root on every irreducible block. Successive norm ratios are
/// combined as a geometric mean of pairs, which also settles period-2
/// oscillation on bipartite positivity patterns.
pub fn spectral_radius(m: &Matrix, tol: f64) -> Result<f64> {
    if !m.is_entrywise_nonnegative() {
        return Err(Error::domain("spectral_radius needs a nonnegative matrix"));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("spectral_radius needs tol > 0"));
    }
    let d = m.dim();
    let mut x = vec![1.0 / d as f64; d];
    let mut prev_ratio: Option<f64> = None;
    let mut prev_est = f64::NAN;
    for _ in 0..200_000 {
        let y = m.matvec(&x);
        let norm: f64 = y.iter().sum(); // l1 norm of a nonnegative vector
        if norm == 0.0 {
            return Ok(0.0); // nilpotent direction; spectral radius 0
        }
        let ratio = norm; // ‖y‖ / ‖x‖ with ‖x‖ = 1
        let est = match prev_ratio {
            Some(r) => (r * ratio).sqrt(),
            None => ratio,
        };
        if prev_est.is_finite() && (est - prev_est).abs() <= tol * est.abs().max(f64::MIN_POSITIVE)
        {
            return Ok(est);
        }
        prev_est = est;
        prev_ratio = Some(ratio);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    Ok(prev_est)
}

/// Exact λ for laws whose entries are almost surely below 1/d: in that
/// regime λ equals the spectral radius of the mean matrix E ξ.
pub fn lambda_shortcut<L: MatrixSampler>(law: &L) -> Result<f64> {
    let d = law.dim();
    let cutoff = 1.0 / d as f64;
    match law.entry_upper_bound() {
        None => Err(Error::capability(format!(
            "entries are unbounded; the eigenvalue shortcut needs every \
             entry < 1/d = {cutoff}"
        ))),
        Some(bound) if bound >= cutoff => Err(Error::capability(format!(
            "entry bound {bound} is not strictly below 1/d = {cutoff}; \
             the eigenvalue shortcut does not apply"
        ))),
        Some(_) => spectral_radius(&law.mean_matrix(), 1e-13),
    }
}

/// Worst log-convexity violation along the curve, in combined standard
/// errors. Soft diagnostic: log k̂ at an interior point should not exceed
/// the chord through its neighbours by much more than the noise.
pub fn log_convexity_excess(curve: &[KsEstimate]) -> f64 {
    let mut worst = 0.0f64;
    for w in curve.windows(3) {
        let (p, q, r) = (&w[0], &w[1], &w[2]);
        let span = r.s - p.s;
        if span <= 0.0 {
            continue;
        }
        let t = (q.s - p.s) / span;
        let chord = (1.0 - t) * p.k_hat.ln() + t * r.k_hat.ln();
        let excess = q.k_hat.ln() - chord;
        let noise = (p.std_err / p.k_hat + q.std_err / q.k_hat + r.std_err / r.k_hat)
            .max(f64::MIN_POSITIVE);
        worst = worst.max(excess / noise);
    }
    worst
}
