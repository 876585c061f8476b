//! The five experiment commands. Each one parses its config, runs the
//! corresponding library operation, writes one CSV, and prints a short
//! summary to stdout.

use bindweed::cascade;
use bindweed::chaos::{self, ParticlePopulation};
use bindweed::env::Environment;
use bindweed::law::{check_conditions, MatrixSampler, Verdict};
use bindweed::lyap;
use bindweed::matrix::Matrix;
use bindweed::tree;
use bindweed::walk::{self, BindweedState, StopRule};

use crate::config::{
    self, AnyLaw, BindweedConfig, CascadeConfig, ChaosConfig, ClassifyConfig, EstimateKConfig,
    LambdaEstimatorConfig, SimConfig,
};
use crate::report::Csv;
use crate::CliError;

fn runtime(e: bindweed::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

pub fn cmd_estimate_k(text: &str) -> Result<String, CliError> {
    let cfg: EstimateKConfig = config::parse(text)?;
    let law = cfg.law.build()?;
    let mut csv = Csv::new("s,k_hat,std_err,n_min,n_max,replicas");
    for &s in &cfg.estimator.s_grid {
        let est = lyap::estimate_k(&law, s, &cfg.estimator.n_list, cfg.estimator.replicas, cfg.seed)
            .map_err(runtime)?;
        csv.row(&[
            est.s.into(),
            est.k_hat.into(),
            est.std_err.into(),
            est.n_window.0.into(),
            est.n_window.1.into(),
            est.replicas.into(),
        ]);
    }
    println!(
        "estimate-k: {} grid points, replicas={}",
        cfg.estimator.s_grid.len(),
        cfg.estimator.replicas
    );
    Ok(csv.into_string())
}

fn lambda_for(law: &AnyLaw, est: &LambdaEstimatorConfig, seed: u64) -> Result<lyap::LambdaEstimate, CliError> {
    match law {
        AnyLaw::Matrix(l) => {
            lyap::estimate_lambda(l, est.grid, est.tol, est.replicas, &est.n_list, seed)
        }
        AnyLaw::Rates(l) => {
            lyap::estimate_lambda(l, est.grid, est.tol, est.replicas, &est.n_list, seed)
        }
    }
    .map_err(runtime)
}

fn shortcut_for(law: &AnyLaw) -> Option<f64> {
    match law {
        AnyLaw::Matrix(l) => lyap::lambda_shortcut(l).ok(),
        AnyLaw::Rates(l) => lyap::lambda_shortcut(l).ok(),
    }
}

pub fn cmd_classify(text: &str) -> Result<String, CliError> {
    let cfg: ClassifyConfig = config::parse(text)?;
    let spec = cfg.tree.build()?;
    let law = config::pick_law(&cfg.law, &cfg.rates)?;

    let est = lambda_for(&law, &cfg.estimator, cfg.seed)?;
    let shortcut = shortcut_for(&law);
    let (gr_lower, gr_upper) = tree::growth_rates(&spec, cfg.growth.n_max).map_err(runtime)?;
    let br = tree::branching_number(&spec, cfg.growth.n_max, cfg.growth.br_tol).map_err(runtime)?;

    let lambda_gr = est.lambda_hat * gr_upper;
    let lambda_br = est.lambda_hat * br;
    // Distance of the nearest product to the critical value 1, in standard
    // errors; small values mean no phase claim is safe.
    let se_gr = (est.std_err * gr_upper).max(f64::MIN_POSITIVE);
    let se_br = (est.std_err * br).max(f64::MIN_POSITIVE);
    let z = ((lambda_gr - 1.0).abs() / se_gr).min((lambda_br - 1.0).abs() / se_br);
    let verdict = if lambda_gr < 1.0 && 1.0 - lambda_gr > 2.0 * se_gr {
        "RECURRENT"
    } else if lambda_br > 1.0 && lambda_br - 1.0 > 2.0 * se_br {
        "TRANSIENT"
    } else {
        "NEAR-CRITICAL"
    };

    if let AnyLaw::Matrix(l) = &law {
        let report = check_conditions(l, 1000, cfg.seed).map_err(runtime)?;
        let fmt = |c: &bindweed::law::ConditionCheck| {
            format!(
                "{}{}",
                if c.verdict == Verdict::Pass { "PASS" } else { "FAIL" },
                if c.heuristic { " (heuristic)" } else { "" }
            )
        };
        println!(
            "conditions: integrability {}, positivity {}, irreducibility {}",
            fmt(&report.integrability),
            fmt(&report.positivity),
            fmt(&report.irreducibility)
        );
        println!("conditions note: {}", report.note);
    }
    println!(
        "lambda_hat = {:.6} at s* = {:.4} (se {:.2e}), shortcut = {}",
        est.lambda_hat,
        est.s_star,
        est.std_err,
        shortcut.map_or("n/a".to_string(), |s| format!("{s:.6}")),
    );
    println!(
        "lambda·gr_upper = {lambda_gr:.6}, lambda·br = {lambda_br:.6} -> {verdict} (z = {z:.2})"
    );
    println!(
        "log-convexity excess along the curve: {:.2} se",
        lyap::log_convexity_excess(&est.curve)
    );

    let mut csv = Csv::new(
        "lambda_hat,s_star,std_err,shortcut,gr_lower,gr_upper,br,lambda_gr_upper,lambda_br,verdict,z_score",
    );
    csv.row(&[
        est.lambda_hat.into(),
        est.s_star.into(),
        est.std_err.into(),
        shortcut.unwrap_or(f64::NAN).into(),
        gr_lower.into(),
        gr_upper.into(),
        br.into(),
        lambda_gr.into(),
        lambda_br.into(),
        verdict.to_string().into(),
        z.into(),
    ]);
    Ok(csv.into_string())
}

pub fn cmd_cascade(text: &str) -> Result<String, CliError> {
    let cfg: CascadeConfig = config::parse(text)?;
    let spec = cfg.tree.build()?;
    let series = match config::pick_law(&cfg.law, &cfg.rates)? {
        AnyLaw::Matrix(law) => {
            let env = Environment::new(cfg.seed, law).with_cache_cap(0);
            cascade::run_cascade(&spec, &env, cfg.run.n_max, cfg.run.width_cap)
        }
        AnyLaw::Rates(law) => {
            let env = Environment::new(cfg.seed, law).with_cache_cap(0);
            cascade::run_cascade(&spec, &env, cfg.run.n_max, cfg.run.width_cap)
        }
    }
    .map_err(runtime)?;

    let mut csv = Csv::new("n,kappa_n,log_psi_quadform,log_Z,slope_estimate");
    for level in &series.levels {
        csv.row(&[
            level.n.into(),
            level.kappa.into(),
            level.log_psi.into(),
            level.log_z.into(),
            level.slope.into(),
        ]);
    }
    println!(
        "cascade: {} levels, tail slope {:.6} (exp: {:.6})",
        series.levels.len(),
        series.tail_slope,
        series.tail_slope.exp()
    );
    Ok(csv.into_string())
}

pub fn cmd_bindweed(text: &str) -> Result<String, CliError> {
    let cfg: BindweedConfig = config::parse(text)?;
    let spec = cfg.tree.build()?;
    let env = Environment::new(cfg.seed, cfg.rates.build()?);

    match &cfg.sim {
        SimConfig::Trajectories {
            sim_seed,
            horizon,
            replicas,
            depths,
            max_states,
        } => {
            if !(*horizon > 0.0) || *replicas == 0 {
                return Err(CliError::Config(
                    "trajectories need horizon > 0 and replicas >= 1".to_string(),
                ));
            }
            let mut csv =
                Csv::new("replica,returns,mean_return_time,max_depth,final_depth,censored_excursions");
            let mut censored_total = 0usize;
            for r in 0..*replicas {
                let stop = StopRule::at_time(*horizon);
                let traj = walk::simulate(
                    &env,
                    &spec,
                    bindweed::seed::derive(*sim_seed, &[r as u64]),
                    &stop,
                    BindweedState::Empty,
                )
                .map_err(runtime)?;
                let censored = i64::from(traj.final_depth.is_some());
                censored_total += censored as usize;
                csv.row(&[
                    r.into(),
                    traj.returns().into(),
                    traj.mean_return_time().unwrap_or(f64::NAN).into(),
                    traj.max_depth.map_or(-1i64, |d| d as i64).into(),
                    traj.final_depth.map_or(-1i64, |d| d as i64).into(),
                    censored.into(),
                ]);
            }
            println!(
                "bindweed: {replicas} trajectories to horizon {horizon}, {censored_total} ended away from empty"
            );
            if !depths.is_empty() {
                let report = walk::recurrence_experiment(
                    &env, &spec, depths, *horizon, *replicas, *sim_seed, *max_states,
                )
                .map_err(runtime)?;
                for s in &report.summaries {
                    println!(
                        "depth {}: exact mean return {}, sim mean return {}, non-return fraction {:.4}",
                        s.depth,
                        s.exact_mean_return
                            .map_or("n/a".to_string(), |v| format!("{v:.6}")),
                        s.sim_mean_return
                            .map_or("n/a".to_string(), |v| format!("{v:.6}")),
                        s.non_return_fraction
                    );
                }
            }
            Ok(csv.into_string())
        }
        SimConfig::Exact { depth, max_states } => {
            let measure = walk::exact_stationary_truncated(&env, &spec, *depth, *max_states)
                .map_err(runtime)?;
            let mut csv = Csv::new("state,depth,pi");
            for (state, pi) in measure.entries() {
                csv.row(&[
                    state.display().into(),
                    state.depth().map_or(-1i64, |d| d as i64).into(),
                    pi.into(),
                ]);
            }
            println!(
                "bindweed exact: {} states at depth {}, recursion vs solve max |Δ| = {:.2e} \
                 (tv {:.2e}), detailed balance {:.2e}, Kac mean return {:.6}",
                measure.len(),
                measure.truncation_depth,
                measure.max_abs_discrepancy,
                measure.total_variation_discrepancy,
                measure.detailed_balance_max_rel,
                measure.kac_mean_return_time()
            );
            Ok(csv.into_string())
        }
    }
}

pub fn cmd_chaos(text: &str) -> Result<String, CliError> {
    let cfg: ChaosConfig = config::parse(text)?;
    let law = cfg.law.build()?;
    let d = MatrixSampler::dim(&law);
    let init = match &cfg.chaos.init_matrix {
        Some(entries) => {
            let m = Matrix::from_rows(d, entries.clone())
                .map_err(|e| CliError::Config(e.to_string()))?;
            ParticlePopulation::new(vec![m; cfg.chaos.population])
        }
        None => ParticlePopulation::identities(d, cfg.chaos.population),
    }
    .map_err(|e| CliError::Config(e.to_string()))?;

    let lambda_hat = match &cfg.lambda {
        Some(est) => Some(
            lyap::estimate_lambda(&law, est.grid, est.tol, est.replicas, &est.n_list, cfg.seed)
                .map_err(runtime)?
                .lambda_hat,
        ),
        None => None,
    };

    let report = chaos::chaos_diagnose(
        &law,
        cfg.chaos.b,
        cfg.chaos.generations,
        cfg.chaos.population,
        cfg.seed,
        init,
        cfg.chaos.epsilon,
        lambda_hat,
    )
    .map_err(runtime)?;

    let mut csv = Csv::new("generation,log_mean_norm,slope_running");
    for g in &report.generations {
        csv.row(&[
            (g.generation as usize).into(),
            g.log_mean_norm.into(),
            g.slope_running.into(),
        ]);
    }
    print!(
        "chaos: drift slope {:.6} -> {} (epsilon {})",
        report.slope,
        report.verdict.label(),
        report.epsilon
    );
    match report.lambda_context {
        Some(ctx) => println!(
            "; lambda_hat {:.6}, lambda·b = {:.6}, lambda·d = {:.6}",
            ctx.lambda_hat, ctx.lambda_times_branching, ctx.lambda_times_dimension
        ),
        None => println!(),
    }
    Ok(csv.into_string())
}
