//! Probability laws on positive matrices and on jump-rate vectors.
//!
//! A [`MatrixLaw`] is the law μ of one random edge matrix; a [`RateLaw`] is
//! the law of one edge's jump-rate vector (ν_{yz}, μ_y). A rate law induces
//! a matrix law through ξ_{xy} = ν_{xy} / μ_y, and both kinds plug into the
//! estimators through the [`MatrixSampler`] trait.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Law of a single scalar entry.
#[derive(Clone, Debug, PartialEq)]
pub enum EntryLaw {
    /// Uniform on [lo, hi]; lo = hi is a point mass.
    Uniform { lo: f64, hi: f64 },
    /// Value `a` with probability `p`, else `b`.
    TwoPoint { a: f64, p: f64, b: f64 },
    /// exp(m + s·Z) with Z standard normal.
    LogNormal { m: f64, s: f64 },
}

impl EntryLaw {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::domain("uniform entry law needs finite lo <= hi"));
        }
        Ok(EntryLaw::Uniform { lo, hi })
    }

    pub fn two_point(a: f64, p: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::domain("two-point entry law needs finite atoms"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain("two-point probability must lie in [0, 1]"));
        }
        Ok(EntryLaw::TwoPoint { a, p, b })
    }

    pub fn log_normal(m: f64, s: f64) -> Result<Self> {
        if !(m.is_finite() && s.is_finite() && s >= 0.0) {
            return Err(Error::domain("log-normal entry law needs finite m, s >= 0"));
        }
        Ok(EntryLaw::LogNormal { m, s })
    }

    /// A deterministic entry (point mass at `c`).
    pub fn constant(c: f64) -> Result<Self> {
        EntryLaw::uniform(c, c)
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            EntryLaw::Uniform { lo, hi } => {
                let u: f64 = rng.gen();
                lo + u * (hi - lo)
            }
            EntryLaw::TwoPoint { a, p, b } => {
                let u: f64 = rng.gen();
                if u < p {
                    a
                } else {
                    b
                }
            }
            EntryLaw::LogNormal { m, s } => {
                let z: f64 = rng.sample(StandardNormal);
                (m + s * z).exp()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            EntryLaw::Uniform { lo, hi } => 0.5 * (lo + hi),
            EntryLaw::TwoPoint { a, p, b } => p * a + (1.0 - p) * b,
            EntryLaw::LogNormal { m, s } => (m + 0.5 * s * s).exp(),
        }
    }

    /// E[1/X]; requires strictly positive support.
    pub fn mean_reciprocal(&self) -> Result<f64> {
        if self.support_min() <= 0.0 {
            return Err(Error::domain(
                "mean reciprocal needs strictly positive support",
            ));
        }
        Ok(match *self {
            EntryLaw::Uniform { lo, hi } => {
                if lo == hi {
                    1.0 / lo
                } else {
                    (hi.ln() - lo.ln()) / (hi - lo)
                }
            }
            EntryLaw::TwoPoint { a, p, b } => p / a + (1.0 - p) / b,
            EntryLaw::LogNormal { m, s } => (-m + 0.5 * s * s).exp(),
        })
    }

    /// Infimum of the support (0 for log-normal, which is strictly positive
    /// but unbounded below away from zero).
    pub fn support_min(&self) -> f64 {
        match *self {
            EntryLaw::Uniform { lo, .. } => lo,
            EntryLaw::TwoPoint { a, p, b } => {
                if p >= 1.0 {
                    a
                } else if p <= 0.0 {
                    b
                } else {
                    a.min(b)
                }
            }
            EntryLaw::LogNormal { .. } => 0.0,
        }
    }

    /// Supremum of the support; `None` when unbounded.
    pub fn support_max(&self) -> Option<f64> {
        match *self {
            EntryLaw::Uniform { hi, .. } => Some(hi),
            EntryLaw::TwoPoint { a, p, b } => Some(if p >= 1.0 {
                a
            } else if p <= 0.0 {
                b
            } else {
                a.max(b)
            }),
            EntryLaw::LogNormal { .. } => None,
        }
    }

    /// Whether every point of the support is > 0. Log-normal qualifies even
    /// though its infimum is 0.
    pub fn strictly_positive(&self) -> bool {
        match *self {
            EntryLaw::LogNormal { .. } => true,
            _ => self.support_min() > 0.0,
        }
    }

    /// The law of c·X.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        match *self {
            EntryLaw::Uniform { lo, hi } => EntryLaw::uniform(c * lo, c * hi),
            EntryLaw::TwoPoint { a, p, b } => EntryLaw::two_point(c * a, p, c * b),
            EntryLaw::LogNormal { m, s } => {
                if c <= 0.0 {
                    return Err(Error::domain("log-normal scaling needs c > 0"));
                }
                EntryLaw::log_normal(m + c.ln(), s)
            }
        }
    }
}

/// Probability law μ on d×d matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixLaw {
    d: usize,
    variant: MatrixLawVariant,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MatrixLawVariant {
    PointMass(Matrix),
    FiniteSupport(Vec<(Matrix, f64)>),
    IidEntries(EntryLaw),
}

impl MatrixLaw {
    pub fn point_mass(matrix: Matrix) -> Self {
        MatrixLaw {
            d: matrix.dim(),
            variant: MatrixLawVariant::PointMass(matrix),
        }
    }

    pub fn finite_support(atoms: Vec<(Matrix, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::domain("finite support law needs >= 1 atom"));
        }
        let d = atoms[0].0.dim();
        if atoms.iter().any(|(m, _)| m.dim() != d) {
            return Err(Error::domain("finite support atoms must share a dimension"));
        }
        if atoms.iter().any(|(_, p)| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::domain("atom probabilities must be positive"));
        }
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "atom probabilities sum to {total}, expected 1 within 1e-12"
            )));
        }
        Ok(MatrixLaw {
            d,
            variant: MatrixLawVariant::FiniteSupport(atoms),
        })
    }

    pub fn iid_entries(d: usize, entry: EntryLaw) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("matrix law dimension must be >= 1"));
        }
        Ok(MatrixLaw {
            d,
            variant: MatrixLawVariant::IidEntries(entry),
        })
    }

    /// Scalar (1×1) law, handy for the d = 1 reductions.
    pub fn scalar(entry: EntryLaw) -> Self {
        MatrixLaw {
            d: 1,
            variant: MatrixLawVariant::IidEntries(entry),
        }
    }

    pub fn variant(&self) -> &MatrixLawVariant {
        &self.variant
    }

    /// The law of c·ξ.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let variant = match &self.variant {
            MatrixLawVariant::PointMass(m) => MatrixLawVariant::PointMass(m.scaled(c)),
            MatrixLawVariant::FiniteSupport(atoms) => MatrixLawVariant::FiniteSupport(
                atoms.iter().map(|(m, p)| (m.scaled(c), *p)).collect(),
            ),
            MatrixLawVariant::IidEntries(e) => MatrixLawVariant::IidEntries(e.scaled(c)?),
        };
        Ok(MatrixLaw {
            d: self.d,
            variant,
        })
    }
}

/// Anything that can produce i.i.d. d×d matrix samples, with enough exact
/// structure (mean, support bound) for the analytic shortcuts.
pub trait MatrixSampler: Sync {
    fn dim(&self) -> usize;
    fn sample_matrix(&self, rng: &mut ChaCha8Rng) -> Matrix;
    /// Exact entrywise mean E ξ.
    fn mean_matrix(&self) -> Matrix;
    /// Almost-sure upper bound on every entry; `None` when unbounded.
    fn entry_upper_bound(&self) -> Option<f64>;
}

impl MatrixSampler for MatrixLaw {
    fn dim(&self) -> usize {
        self.d
    }

    fn sample_matrix(&self, rng: &mut ChaCha8Rng) -> Matrix {
        match &self.variant {
            MatrixLawVariant::PointMass(m) => m.clone(),
            MatrixLawVariant::FiniteSupport(atoms) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (m, p) in atoms {
                    acc += p;
                    if u < acc {
                        return m.clone();
                    }
                }
                atoms.last().expect("nonempty").0.clone()
            }
            MatrixLawVariant::IidEntries(entry) => {
                // Entries drawn in row-major order.
                let mut data = Vec::with_capacity(self.d * self.d);
                for _ in 0..self.d * self.d {
                    data.push(entry.sample(rng));
                }
                Matrix::from_rows(self.d, data).expect("constructed square")
            }
        }
    }

    fn mean_matrix(&self) -> Matrix {
        match &self.variant {
            MatrixLawVariant::PointMass(m) => m.clone(),
            MatrixLawVariant::FiniteSupport(atoms) => {
                let mut mean = Matrix::zeros(self.d);
                for (m, p) in atoms {
                    mean.add_scaled(m, *p);
                }
                mean
            }
            MatrixLawVariant::IidEntries(entry) => {
                Matrix::from_rows(self.d, vec![entry.mean(); self.d * self.d])
                    .expect("constructed square")
            }
        }
    }

    fn entry_upper_bound(&self) -> Option<f64> {
        match &self.variant {
            MatrixLawVariant::PointMass(m) => Some(m.max_entry()),
            MatrixLawVariant::FiniteSupport(atoms) => atoms
                .iter()
                .map(|(m, _)| m.max_entry())
                .fold(None, |acc, x| Some(acc.map_or(x, |a: f64| a.max(x)))),
            MatrixLawVariant::IidEntries(entry) => entry.support_max(),
        }
    }
}

/// One edge's jump rates: ν_{yz} (row y = current symbol, column z = new
/// symbol) and μ_y.
#[derive(Clone, Debug, PartialEq)]
pub struct RateVector {
    d: usize,
    nu: Vec<f64>,
    mu: Vec<f64>,
}

impl RateVector {
    pub fn new(d: usize, nu: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if d == 0 || nu.len() != d * d || mu.len() != d {
            return Err(Error::domain("rate vector needs d² down rates and d up rates"));
        }
        if nu.iter().chain(mu.iter()).any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(Error::domain("rates must be strictly positive and finite"));
        }
        Ok(RateVector { d, nu, mu })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Downward rate ν_{yz}; `y`, `z` are 0-based symbol indices.
    pub fn nu(&self, y: usize, z: usize) -> f64 {
        self.nu[y * self.d + z]
    }

    /// Upward rate μ_y.
    pub fn mu(&self, y: usize) -> f64 {
        self.mu[y]
    }
}

/// Converts a rate vector to its edge matrix: ξ_{xy} = ν_{xy} / μ_y.
pub fn rates_to_matrix(rates: &RateVector) -> Result<Matrix> {
    let d = rates.dim();
    if rates.mu.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::domain("rates_to_matrix needs μ_y > 0"));
    }
    let mut data = Vec::with_capacity(d * d);
    for x in 0..d {
        for y in 0..d {
            data.push(rates.nu(x, y) / rates.mu(y));
        }
    }
    Matrix::from_rows(d, data)
}

/// Law ρ of rate vectors: i.i.d. entries for the d² downward rates and the
/// d upward rates, drawn from one entry law each.
#[derive(Clone, Debug, PartialEq)]
pub struct RateLaw {
    d: usize,
    nu: EntryLaw,
    mu: EntryLaw,
}

impl RateLaw {
    pub fn new(d: usize, nu: EntryLaw, mu: EntryLaw) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("rate law dimension must be >= 1"));
        }
        if !nu.strictly_positive() || !mu.strictly_positive() {
            return Err(Error::domain("rate laws must have strictly positive support"));
        }
        Ok(RateLaw { d, nu, mu })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Draws ν row-major first, then μ; the order is part of the
    /// reproducibility contract.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> RateVector {
        let d = self.d;
        let nu: Vec<f64> = (0..d * d).map(|_| self.nu.sample(rng)).collect();
        let mu: Vec<f64> = (0..d).map(|_| self.mu.sample(rng)).collect();
        RateVector { d, nu, mu }
    }
}

// A rate law acts as the matrix law of ξ = ν/μ. Independence of ν and μ
// entries gives E ξ_{xy} = E ν · E (1/μ) exactly.
impl MatrixSampler for RateLaw {
    fn dim(&self) -> usize {
        self.d
    }

    fn sample_matrix(&self, rng: &mut ChaCha8Rng) -> Matrix {
        rates_to_matrix(&self.sample(rng)).expect("rates are strictly positive")
    }

    fn mean_matrix(&self) -> Matrix {
        let mean = self.nu.mean()
            * self
                .mu
                .mean_reciprocal()
                .expect("rate laws have positive support");
        Matrix::from_rows(self.d, vec![mean; self.d * self.d]).expect("square")
    }

    fn entry_upper_bound(&self) -> Option<f64> {
        let nu_hi = self.nu.support_max()?;
        let mu_lo = self.mu.support_min();
        if mu_lo > 0.0 {
            Some(nu_hi / mu_lo)
        } else {
            None
        }
    }
}

/// Outcome of one condition check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug)]
pub struct ConditionCheck {
    pub verdict: Verdict,
    /// True when the check is sufficient but not necessary.
    pub heuristic: bool,
    pub detail: String,
}

/// Report on the moment, irreducibility and positivity conditions that the
/// classification theory needs from a matrix law.
#[derive(Clone, Debug)]
pub struct ConditionsReport {
    pub integrability: ConditionCheck,
    pub positivity: ConditionCheck,
    pub irreducibility: ConditionCheck,
    pub note: String,
}

impl ConditionsReport {
    pub fn all_pass(&self) -> bool {
        self.integrability.verdict == Verdict::Pass
            && self.positivity.verdict == Verdict::Pass
            && self.irreducibility.verdict == Verdict::Pass
    }
}

/// Checks integrability of all norm moments, strict positivity of the
/// support, and a sufficient irreducibility criterion.
///
/// Strong irreducibility is undecidable from samples in general; for
/// strictly positive laws it follows from positivity, and the check used
/// here — strong connectivity of the positivity pattern of the sample-mean
/// matrix — is sufficient in that regime. It is labelled as a heuristic.
pub fn check_conditions(law: &MatrixLaw, n_samples: usize, seed: u64) -> Result<ConditionsReport> {
    if n_samples < 1 {
        return Err(Error::domain("check_conditions needs n_samples >= 1"));
    }
    let d = law.dim();

    let integrability = match law.variant() {
        MatrixLawVariant::IidEntries(EntryLaw::LogNormal { .. }) => ConditionCheck {
            verdict: Verdict::Pass,
            heuristic: false,
            detail: "log-normal entries: unbounded support, but every moment \
                     E ‖g‖^s is finite"
                .to_string(),
        },
        _ => ConditionCheck {
            verdict: Verdict::Pass,
            heuristic: false,
            detail: "bounded support, so E ‖g‖^s is finite for every s".to_string(),
        },
    };

    let declared_positive = match law.variant() {
        MatrixLawVariant::PointMass(m) => m.is_entrywise_positive(),
        MatrixLawVariant::FiniteSupport(atoms) => {
            atoms.iter().all(|(m, _)| m.is_entrywise_positive())
        }
        MatrixLawVariant::IidEntries(entry) => entry.strictly_positive(),
    };

    let mut rng = crate::seed::rng_at(seed, &[0x636f6e64]);
    let mut sampled_positive = true;
    let mut mean = Matrix::zeros(d);
    for _ in 0..n_samples {
        let g = law.sample_matrix(&mut rng);
        sampled_positive &= g.is_entrywise_positive();
        mean.add_scaled(&g, 1.0 / n_samples as f64);
    }

    let positivity = if declared_positive && sampled_positive {
        ConditionCheck {
            verdict: Verdict::Pass,
            heuristic: false,
            detail: format!(
                "declared support and all {n_samples} sampled matrices are \
                 entrywise > 0"
            ),
        }
    } else {
        ConditionCheck {
            verdict: Verdict::Fail,
            heuristic: false,
            detail: if !declared_positive {
                "declared support contains a nonpositive entry".to_string()
            } else {
                "a sampled matrix has a nonpositive entry".to_string()
            },
        }
    };

    let connected = strongly_connected_positive_pattern(&mean);
    let irreducibility = ConditionCheck {
        verdict: if connected { Verdict::Pass } else { Verdict::Fail },
        heuristic: true,
        detail: if connected {
            "positivity pattern of the sample-mean matrix is strongly \
             connected (sufficient for strictly positive laws)"
                .to_string()
        } else {
            "positivity pattern of the sample-mean matrix is not strongly \
             connected; a finite invariant family of coordinate subspaces \
             is likely"
                .to_string()
        },
    };

    Ok(ConditionsReport {
        integrability,
        positivity,
        irreducibility,
        note: "irreducibility is a sufficient heuristic, not a proof; the \
               primed positivity variant (condition 3') occasionally invoked \
               for transience statements has no definition here and is not \
               checked"
            .to_string(),
    })
}

fn strongly_connected_positive_pattern(m: &Matrix) -> bool {
    let d = m.dim();
    let reach = |forward: bool| -> bool {
        let mut seen = vec![false; d];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..d {
                let edge = if forward { m.get(i, j) } else { m.get(j, i) };
                if edge > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn point_mass_always_returns_the_atom() {
        let atom = Matrix::identity(2);
        let law = MatrixLaw::point_mass(atom.clone());
        let mut rng = seed::rng(1);
        for _ in 0..10 {
            assert_eq!(law.sample_matrix(&mut rng), atom);
        }
    }

    #[test]
    fn finite_support_frequencies_concentrate() {
        let a = Matrix::from_rows(1, vec![1.0]).unwrap();
        let b = Matrix::from_rows(1, vec![2.0]).unwrap();
        let law = MatrixLaw::finite_support(vec![(a.clone(), 0.5), (b, 0.5)]).unwrap();
        let mut rng = seed::rng(7);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| law.sample_matrix(&mut rng) == a)
            .count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.02, "freq {freq}");
    }

    #[test]
    fn iid_uniform_entries_stay_in_support() {
        let law = MatrixLaw::iid_entries(2, EntryLaw::uniform(0.1, 0.2).unwrap()).unwrap();
        let mut rng = seed::rng(3);
        for _ in 0..100 {
            let g = law.sample_matrix(&mut rng);
            assert!(g.entries().iter().all(|&x| (0.1..=0.2).contains(&x)));
        }
    }

    #[test]
    fn finite_support_sample_mean_converges() {
        let a = Matrix::from_rows(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let b = Matrix::from_rows(2, vec![0.5, 0.1, 0.2, 0.6]).unwrap();
        let law = MatrixLaw::finite_support(vec![(a.clone(), 0.25), (b.clone(), 0.75)]).unwrap();
        let exact = law.mean_matrix();

        let n = 40_000usize;
        let mut rng = seed::rng(11);
        let mut mean = Matrix::zeros(2);
        for _ in 0..n {
            mean.add_scaled(&law.sample_matrix(&mut rng), 1.0 / n as f64);
        }
        // Entrywise SD is at most half the atom gap.
        for i in 0..2 {
            for j in 0..2 {
                let sd = 0.5 * (a.get(i, j) - b.get(i, j)).abs();
                let tol = 4.0 * sd / (n as f64).sqrt();
                assert!((mean.get(i, j) - exact.get(i, j)).abs() <= tol);
            }
        }
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let a = Matrix::identity(1);
        assert!(MatrixLaw::finite_support(vec![(a.clone(), 0.5), (a, 0.6)]).is_err());
    }

    #[test]
    fn rates_to_matrix_divides_by_column_mu() {
        let r = RateVector::new(1, vec![2.0], vec![4.0]).unwrap();
        assert_eq!(rates_to_matrix(&r).unwrap().entries(), &[0.5]);

        let r = RateVector::new(2, vec![1.0; 4], vec![1.0, 2.0]).unwrap();
        let m = rates_to_matrix(&r).unwrap();
        assert_eq!(m.entries(), &[1.0, 0.5, 1.0, 0.5]);
    }

    #[test]
    fn rate_vectors_are_strictly_positive() {
        assert!(RateVector::new(1, vec![0.0], vec![1.0]).is_err());
        assert!(RateVector::new(1, vec![1.0], vec![-1.0]).is_err());
        let law = RateLaw::new(2, EntryLaw::uniform(0.5, 1.5).unwrap(), EntryLaw::constant(1.0).unwrap()).unwrap();
        let mut rng = seed::rng(5);
        let m = law.sample_matrix(&mut rng);
        assert!(m.is_entrywise_positive());
    }

    #[test]
    fn induced_rate_matrix_mean_uses_reciprocal_mu() {
        let law = RateLaw::new(
            1,
            EntryLaw::constant(2.0).unwrap(),
            EntryLaw::two_point(1.0, 0.5, 2.0).unwrap(),
        )
        .unwrap();
        // E[nu]·E[1/mu] = 2 · (0.5 + 0.25) = 1.5
        assert!((law.mean_matrix().get(0, 0) - 1.5).abs() < 1e-14);
    }

    #[test]
    fn conditions_flag_a_zero_entry() {
        let law = MatrixLaw::point_mass(Matrix::from_rows(2, vec![1.0, 0.0, 1.0, 1.0]).unwrap());
        let report = check_conditions(&law, 10, 1).unwrap();
        assert_eq!(report.positivity.verdict, Verdict::Fail);
    }

    #[test]
    fn conditions_pass_for_positive_uniform_law() {
        let law = MatrixLaw::iid_entries(2, EntryLaw::uniform(0.1, 0.2).unwrap()).unwrap();
        let report = check_conditions(&law, 200, 1).unwrap();
        assert!(report.all_pass());
        assert!(report.irreducibility.heuristic);
    }

    #[test]
    fn diagonal_point_mass_fails_irreducibility_heuristic() {
        let law = MatrixLaw::point_mass(Matrix::from_rows(2, vec![1.0, 0.0, 0.0, 2.0]).unwrap());
        let report = check_conditions(&law, 10, 1).unwrap();
        assert_eq!(report.irreducibility.verdict, Verdict::Fail);
    }

    #[test]
    fn log_normal_integrability_passes_with_reason() {
        let law = MatrixLaw::iid_entries(1, EntryLaw::log_normal(0.0, 0.5).unwrap()).unwrap();
        let report = check_conditions(&law, 10, 1).unwrap();
        assert_eq!(report.integrability.verdict, Verdict::Pass);
        assert!(report.integrability.detail.contains("moment"));
    }

    #[test]
    fn entry_law_scaling_matches_samples() {
        let base = EntryLaw::uniform(0.5, 1.5).unwrap();
        let scaled = base.scaled(3.0).unwrap();
        let mut r1 = seed::rng(9);
        let mut r2 = seed::rng(9);
        for _ in 0..100 {
            let x = base.sample(&mut r1);
            let y = scaled.sample(&mut r2);
            assert!((y - 3.0 * x).abs() < 1e-12 * y.abs().max(1.0));
        }
    }
}
