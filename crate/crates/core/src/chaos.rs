//! Particle iteration of the matrix chaos equation.
//!
//! The fixed-point equation asks for a matrix law such that
//! Y =(law) Σ_{j=1..b} Y'_j ξ_j, with the Y'_j i.i.d. copies of Y and the
//! ξ_j drawn from the driving law. The distributional map is iterated on an
//! empirical population: every output particle resamples b parents with
//! replacement and multiplies each by a fresh ξ on the right.
//!
//! Existence of nontrivial fixed points is open; the diagnostic here only
//! reports the drift of log E‖Y‖ across generations and never claims more.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::law::{MatrixLaw, MatrixSampler};
use crate::matrix::Matrix;
use crate::numeric::{fit_line, log_sum_exp};
use crate::seed;

const CHAOS_STREAM_TAG: u64 = 0x6368; // "ch"

/// Empirical law of Y: a finite matrix population.
#[derive(Clone, Debug)]
pub struct ParticlePopulation {
    particles: Vec<Matrix>,
    generation: u32,
}

impl ParticlePopulation {
    pub fn new(particles: Vec<Matrix>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::domain("a particle population cannot be empty"));
        }
        let d = particles[0].dim();
        if particles.iter().any(|p| p.dim() != d) {
            return Err(Error::domain("particles must share a dimension"));
        }
        Ok(ParticlePopulation {
            particles,
            generation: 0,
        })
    }

    /// `count` copies of the identity.
    pub fn identities(d: usize, count: usize) -> Result<Self> {
        ParticlePopulation::new(vec![Matrix::identity(d); count])
    }

    pub fn particles(&self) -> &[Matrix] {
        &self.particles
    }

    pub fn generation(&self) -> u32 {
        self.generation
    }

    pub fn dim(&self) -> usize {
        self.particles[0].dim()
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Entrywise mean of the population.
    pub fn mean(&self) -> Matrix {
        let mut mean = Matrix::zeros(self.dim());
        for p in &self.particles {
            mean.add_scaled(p, 1.0 / self.particles.len() as f64);
        }
        mean
    }

    /// log of the mean operator norm.
    pub fn log_mean_norm(&self) -> f64 {
        let logs: Vec<f64> = self
            .particles
            .iter()
            .map(|p| p.l1_operator_norm().ln())
            .collect();
        log_sum_exp(&logs) - (self.particles.len() as f64).ln()
    }
}

/// One step of the distributional map: each of `m_out` output particles is
/// Σ_{j=1..b} Y'_j ξ_j with the parents resampled uniformly with replacement
/// and the ξ_j i.i.d. from `law` (parents multiply on the left).
pub fn chaos_iterate(
    pop: &ParticlePopulation,
    law: &MatrixLaw,
    b: usize,
    m_out: usize,
    chaos_seed: u64,
) -> Result<ParticlePopulation> {
    if b < 1 || m_out < 1 {
        return Err(Error::domain("chaos_iterate needs b >= 1 and m_out >= 1"));
    }
    if MatrixSampler::dim(law) != pop.dim() {
        return Err(Error::domain("law and population dimensions differ"));
    }
    let gen = pop.generation + 1;
    let particles: Vec<Matrix> = (0..m_out)
        .into_par_iter()
        .map(|i| {
            let mut rng =
                seed::rng_at(chaos_seed, &[CHAOS_STREAM_TAG, u64::from(gen), i as u64]);
            let mut sum = Matrix::zeros(pop.dim());
            for _ in 0..b {
                let parent = &pop.particles[rng.gen_range(0..pop.particles.len())];
                let xi = law.sample_matrix(&mut rng);
                sum.add_scaled(&parent.mul(&xi), 1.0);
            }
            sum
        })
        .collect();
    Ok(ParticlePopulation {
        particles,
        generation: gen,
    })
}

/// Drift verdict of the iterated map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Drift {
    Contracting,
    Expanding,
    Marginal,
}

impl Drift {
    pub fn label(&self) -> &'static str {
        match self {
            Drift::Contracting => "CONTRACTING",
            Drift::Expanding => "EXPANDING",
            Drift::Marginal => "MARGINAL",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GenerationStat {
    pub generation: u32,
    pub log_mean_norm: f64,
    /// Least-squares drift over generations 0..=g; NaN before two points.
    pub slope_running: f64,
}

/// λ̂ context attached to a chaos report. The necessary condition for a
/// nontrivial fixed point involves λ times a structural factor; both the
/// branching and the dimension products are reported and no side is taken.
#[derive(Clone, Copy, Debug)]
pub struct LambdaContext {
    pub lambda_hat: f64,
    pub lambda_times_branching: f64,
    pub lambda_times_dimension: f64,
}

#[derive(Clone, Debug)]
pub struct ChaosReport {
    pub generations: Vec<GenerationStat>,
    pub slope: f64,
    pub verdict: Drift,
    pub epsilon: f64,
    pub lambda_context: Option<LambdaContext>,
}

/// Iterates the map for `iters` generations from `init` and fits the drift
/// of log E‖Y‖. Verdicts: slope < -ε contracting, slope > ε expanding,
/// marginal in between.
#[allow(clippy::too_many_arguments)]
pub fn chaos_diagnose(
    law: &MatrixLaw,
    b: usize,
    iters: usize,
    m_out: usize,
    chaos_seed: u64,
    init: ParticlePopulation,
    epsilon: f64,
    lambda_hat: Option<f64>,
) -> Result<ChaosReport> {
    if iters < 1 {
        return Err(Error::domain("chaos_diagnose needs iters >= 1"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::domain("chaos_diagnose needs epsilon > 0"));
    }
    let d = MatrixSampler::dim(law);
    let mut pop = init;
    let mut log_means = vec![pop.log_mean_norm()];
    let mut generations = vec![GenerationStat {
        generation: pop.generation(),
        log_mean_norm: log_means[0],
        slope_running: f64::NAN,
    }];
    for _ in 0..iters {
        pop = chaos_iterate(&pop, law, b, m_out, chaos_seed)?;
        log_means.push(pop.log_mean_norm());
        let xs: Vec<f64> = (0..log_means.len()).map(|t| t as f64).collect();
        let slope_running = fit_line(&xs, &log_means).map(|f| f.slope).unwrap_or(f64::NAN);
        generations.push(GenerationStat {
            generation: pop.generation(),
            log_mean_norm: *log_means.last().expect("nonempty"),
            slope_running,
        });
    }
    let slope = generations.last().expect("iters >= 1").slope_running;
    let verdict = if slope < -epsilon {
        Drift::Contracting
    } else if slope > epsilon {
        Drift::Expanding
    } else {
        Drift::Marginal
    };
    Ok(ChaosReport {
        generations,
        slope,
        verdict,
        epsilon,
        lambda_context: lambda_hat.map(|l| LambdaContext {
            lambda_hat: l,
            lambda_times_branching: l * b as f64,
            lambda_times_dimension: l * d as f64,
        }),
    })
}
