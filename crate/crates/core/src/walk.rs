//! The bindweed walk: a continuous-time Markov chain in a quenched random
//! environment on the (lazily realized) infinite tree.
//!
//! A state is either the empty state — nothing on the tree — or a vertex
//! together with the word of internal symbols laid along its root path, one
//! symbol per level including the root. From a vertex the walk grows one
//! level down (appending a symbol, at rate ν_{yz} of the new edge) or
//! retracts one level up (dropping the last symbol, at rate μ_y of the edge
//! it leaves); the empty state exchanges with the root states at rate 1.
//!
//! The chain is reversible, which gives the stationary measure a product
//! form along root paths: each level multiplies by ξ_{a,xy} = ν_{xy}/μ_y.
//! [`exact_stationary_truncated`] computes it on a finite truncation twice —
//! once by that recursion and once by a sparse linear solve of the global
//! balance equations — and reports how well the two agree.

use rand::Rng;
use rayon::prelude::*;

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::law::RateLaw;
use crate::seed;
use crate::tree::{level_size, BranchingSpec, Vertex};

/// Walker position: empty, or a vertex with the symbol word of its root path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BindweedState {
    Empty,
    At {
        vertex: Vertex,
        /// 1-based symbols; length is depth(vertex) + 1.
        symbols: Vec<u8>,
    },
}

impl BindweedState {
    pub fn root_with(symbol: u8) -> Self {
        BindweedState::At {
            vertex: Vertex::root(),
            symbols: vec![symbol],
        }
    }

    pub fn validate(&self, spec: &BranchingSpec, d: usize) -> Result<()> {
        match self {
            BindweedState::Empty => Ok(()),
            BindweedState::At { vertex, symbols } => {
                if !spec.contains(vertex) {
                    return Err(Error::domain(format!(
                        "vertex {} is not part of the tree",
                        vertex.display()
                    )));
                }
                if symbols.len() != vertex.depth() + 1 {
                    return Err(Error::domain(
                        "symbol word must have one symbol per level, root included",
                    ));
                }
                if symbols.iter().any(|&s| s == 0 || s as usize > d) {
                    return Err(Error::domain(format!("symbols must lie in 1..={d}")));
                }
                Ok(())
            }
        }
    }

    /// Tree depth of the occupied vertex; `None` for the empty state.
    pub fn depth(&self) -> Option<usize> {
        match self {
            BindweedState::Empty => None,
            BindweedState::At { vertex, .. } => Some(vertex.depth()),
        }
    }

    /// Stable textual form for reports: `empty` or `v=1.2;s=1.2.1`.
    pub fn display(&self) -> String {
        match self {
            BindweedState::Empty => "empty".to_string(),
            BindweedState::At { vertex, symbols } => {
                let syms: Vec<String> = symbols.iter().map(|s| s.to_string()).collect();
                format!("v={};s={}", vertex.display(), syms.join("."))
            }
        }
    }
}

/// One enabled jump.
#[derive(Clone, Debug)]
pub struct Transition {
    pub target: BindweedState,
    pub rate: f64,
}

/// All enabled transitions out of `state`, in a fixed order: the upward (or
/// exit) move first, then downward moves by child index and new symbol.
pub fn enabled_transitions(
    state: &BindweedState,
    env: &Environment<RateLaw>,
    spec: &BranchingSpec,
) -> Result<Vec<Transition>> {
    let d = env.dim();
    state.validate(spec, d)?;
    let mut out = Vec::new();
    match state {
        BindweedState::Empty => {
            for z in 1..=d as u8 {
                out.push(Transition {
                    target: BindweedState::root_with(z),
                    rate: 1.0,
                });
            }
        }
        BindweedState::At { vertex, symbols } => {
            let y = *symbols.last().expect("nonempty symbol word") as usize;
            if vertex.is_root() {
                out.push(Transition {
                    target: BindweedState::Empty,
                    rate: 1.0,
                });
            } else {
                let above = env.edge_sample(vertex)?;
                out.push(Transition {
                    target: BindweedState::At {
                        vertex: vertex.parent().expect("non-root"),
                        symbols: symbols[..symbols.len() - 1].to_vec(),
                    },
                    rate: above.mu(y - 1),
                });
            }
            for i in 1..=spec.branching(vertex) {
                let child = vertex.child(i);
                let below = env.edge_sample(&child)?;
                for z in 1..=d as u8 {
                    let mut syms = symbols.clone();
                    syms.push(z);
                    out.push(Transition {
                        target: BindweedState::At {
                            vertex: child.clone(),
                            symbols: syms,
                        },
                        rate: below.nu(y - 1, z as usize - 1),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Stopping criteria for a simulation; at least one hard bound is required.
#[derive(Clone, Debug)]
pub struct StopRule {
    pub t_max: Option<f64>,
    pub max_jumps: Option<u64>,
    /// Stop at the first re-entry into the empty state.
    pub until_return: bool,
}

impl StopRule {
    pub fn at_time(t_max: f64) -> Self {
        StopRule {
            t_max: Some(t_max),
            max_jumps: None,
            until_return: false,
        }
    }

    pub fn after_jumps(max_jumps: u64) -> Self {
        StopRule {
            t_max: None,
            max_jumps: Some(max_jumps),
            until_return: false,
        }
    }

    pub fn until_return(mut self) -> Self {
        self.until_return = true;
        self
    }

    fn validate(&self) -> Result<()> {
        match (self.t_max, self.max_jumps) {
            (None, None) => Err(Error::domain(
                "a stop rule needs t_max or max_jumps as a hard bound",
            )),
            (Some(t), _) if !(t > 0.0) => Err(Error::domain("t_max must be positive")),
            (_, Some(0)) => Err(Error::domain("max_jumps must be positive")),
            _ => Ok(()),
        }
    }
}

/// Summary statistics of one simulated path.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub total_time: f64,
    pub jumps: u64,
    /// Times of entries into the empty state.
    pub return_times: Vec<f64>,
    /// Deepest tree level visited; `None` if the walk never left empty.
    pub max_depth: Option<usize>,
    /// Depth at the end; `None` when the walk ends in the empty state.
    pub final_depth: Option<usize>,
    pub time_at_empty: f64,
    /// Time spent at each tree depth (index = depth).
    pub depth_time: Vec<f64>,
    /// Jumps between tree states, by direction (empty exchanges excluded).
    pub jumps_up: u64,
    pub jumps_down: u64,
    pub started_at_empty: bool,
}

impl Trajectory {
    pub fn returns(&self) -> usize {
        self.return_times.len()
    }

    /// Mean time between successive entries into empty (the Kac cycle
    /// length). When the path starts at empty, the stretch from time 0 to
    /// the first entry counts as one cycle.
    pub fn mean_return_time(&self) -> Option<f64> {
        if self.started_at_empty {
            let n = self.return_times.len();
            (n > 0).then(|| self.return_times[n - 1] / n as f64)
        } else {
            let n = self.return_times.len();
            (n > 1).then(|| (self.return_times[n - 1] - self.return_times[0]) / (n - 1) as f64)
        }
    }

    fn record_time(&mut self, depth: Option<usize>, dt: f64) {
        match depth {
            None => self.time_at_empty += dt,
            Some(k) => {
                if self.depth_time.len() <= k {
                    self.depth_time.resize(k + 1, 0.0);
                }
                self.depth_time[k] += dt;
            }
        }
    }
}

// In-place walker state; cloning full states on every jump would cost
// O(depth) per step for nothing.
struct Walker {
    word: Vec<u32>,
    symbols: Vec<u8>,
    at_empty: bool,
}

impl Walker {
    fn from_state(state: &BindweedState) -> Self {
        match state {
            BindweedState::Empty => Walker {
                word: Vec::new(),
                symbols: Vec::new(),
                at_empty: true,
            },
            BindweedState::At { vertex, symbols } => Walker {
                word: vertex.word().to_vec(),
                symbols: symbols.clone(),
                at_empty: false,
            },
        }
    }

    fn depth(&self) -> Option<usize> {
        (!self.at_empty).then(|| self.word.len())
    }
}

enum Move {
    Enter(u8),
    Exit,
    Up,
    Down { child: u32, symbol: u8 },
}

/// Simulates the walk: exponential holding at the total enabled rate, next
/// state proportional to rates. Deterministic given the environment seed
/// and `sim_seed`.
pub fn simulate(
    env: &Environment<RateLaw>,
    spec: &BranchingSpec,
    sim_seed: u64,
    stop: &StopRule,
    start: BindweedState,
) -> Result<Trajectory> {
    stop.validate()?;
    let d = env.dim();
    start.validate(spec, d)?;

    let mut rng = seed::rng(sim_seed);
    let mut walker = Walker::from_state(&start);
    let mut traj = Trajectory {
        total_time: 0.0,
        jumps: 0,
        return_times: Vec::new(),
        max_depth: walker.depth(),
        final_depth: None,
        time_at_empty: 0.0,
        depth_time: Vec::new(),
        jumps_up: 0,
        jumps_down: 0,
        started_at_empty: walker.at_empty,
    };

    let mut t = 0.0f64;
    let mut moves: Vec<(Move, f64)> = Vec::new();
    loop {
        if let Some(max_jumps) = stop.max_jumps {
            if traj.jumps >= max_jumps {
                break;
            }
        }

        moves.clear();
        let mut total_rate = 0.0;
        if walker.at_empty {
            for z in 1..=d as u8 {
                moves.push((Move::Enter(z), 1.0));
                total_rate += 1.0;
            }
        } else {
            let y = *walker.symbols.last().expect("symbols nonempty") as usize;
            if walker.word.is_empty() {
                moves.push((Move::Exit, 1.0));
                total_rate += 1.0;
            } else {
                let above = env.edge_sample(&Vertex::from_word(walker.word.clone()))?;
                let rate = above.mu(y - 1);
                moves.push((Move::Up, rate));
                total_rate += rate;
            }
            let here = Vertex::from_word(walker.word.clone());
            for i in 1..=spec.branching(&here) {
                let below = env.edge_sample(&here.child(i))?;
                for z in 1..=d as u8 {
                    let rate = below.nu(y - 1, z as usize - 1);
                    moves.push((Move::Down { child: i, symbol: z }, rate));
                    total_rate += rate;
                }
            }
        }

        // Holding time; 1 - u keeps the argument of ln strictly positive.
        let u: f64 = rng.gen();
        let dt = -(1.0 - u).ln() / total_rate;
        if let Some(t_max) = stop.t_max {
            if t + dt >= t_max {
                traj.record_time(walker.depth(), t_max - t);
                t = t_max;
                break;
            }
        }
        traj.record_time(walker.depth(), dt);
        t += dt;

        let pick: f64 = rng.gen::<f64>() * total_rate;
        let mut acc = 0.0;
        let mut chosen = moves.len() - 1;
        for (i, (_, rate)) in moves.iter().enumerate() {
            acc += rate;
            if pick < acc {
                chosen = i;
                break;
            }
        }
        match moves[chosen].0 {
            Move::Enter(z) => {
                walker.at_empty = false;
                walker.symbols.push(z);
            }
            Move::Exit => {
                walker.at_empty = true;
                walker.symbols.clear();
            }
            Move::Up => {
                walker.word.pop();
                walker.symbols.pop();
                traj.jumps_up += 1;
            }
            Move::Down { child, symbol } => {
                walker.word.push(child);
                walker.symbols.push(symbol);
                traj.jumps_down += 1;
            }
        }
        traj.jumps += 1;
        if let Some(depth) = walker.depth() {
            traj.max_depth = Some(traj.max_depth.map_or(depth, |m| m.max(depth)));
        }
        if walker.at_empty {
            traj.return_times.push(t);
            if stop.until_return {
                break;
            }
        }
    }

    traj.total_time = t;
    traj.final_depth = walker.depth();
    Ok(traj)
}

/// Stationary measure of the depth-`D` truncation (downward transitions
/// from depth `D` removed), computed two ways that must agree.
#[derive(Clone, Debug)]
pub struct TruncatedStationary {
    states: Vec<BindweedState>,
    depths: Vec<Option<usize>>,
    pi: Vec<f64>,
    pub truncation_depth: usize,
    /// Max |π_recursion - π_solve| over states.
    pub max_abs_discrepancy: f64,
    /// Total variation distance between the two computations.
    pub total_variation_discrepancy: f64,
    /// Worst relative detailed-balance violation over all transition pairs.
    pub detailed_balance_max_rel: f64,
    out_rate_empty: f64,
}

impl TruncatedStationary {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// States and their measure (the reversibility-recursion values).
    pub fn entries(&self) -> impl Iterator<Item = (&BindweedState, f64)> {
        self.states.iter().zip(self.pi.iter().copied())
    }

    pub fn pi_empty(&self) -> f64 {
        self.pi[0]
    }

    /// Total measure of the depth-`n` states.
    pub fn level_mass(&self, n: usize) -> f64 {
        self.depths
            .iter()
            .zip(&self.pi)
            .filter(|(d, _)| **d == Some(n))
            .map(|(_, p)| p)
            .sum()
    }

    /// Kac identity: expected time between successive entries into empty is
    /// 1 / (π(empty) · total exit rate at empty).
    pub fn kac_mean_return_time(&self) -> f64 {
        1.0 / (self.pi_empty() * self.out_rate_empty)
    }
}

/// Exact state count of the truncation: 1 + Σ_{n ≤ D} κ_n · d^{n+1}.
pub fn truncated_state_count(spec: &BranchingSpec, d: usize, depth: usize) -> Result<u128> {
    let mut total: u128 = 1;
    for n in 0..=depth {
        let kappa = level_size(spec, n)?;
        let symbols = (d as u128)
            .checked_pow(n as u32 + 1)
            .ok_or_else(|| Error::overflow("symbol count exceeds u128".to_string()))?;
        total = kappa
            .checked_mul(symbols)
            .and_then(|x| total.checked_add(x))
            .ok_or_else(|| Error::overflow("state count exceeds u128".to_string()))?;
    }
    Ok(total)
}

struct Nodes {
    states: Vec<BindweedState>,
    depths: Vec<Option<usize>>,
    parent: Vec<usize>,
    /// Rate parent → node.
    rate_in: Vec<f64>,
    /// Rate node → parent.
    rate_up: Vec<f64>,
    /// Total exit rate.
    out: Vec<f64>,
}

impl Nodes {
    fn push(
        &mut self,
        state: BindweedState,
        depth: Option<usize>,
        parent: usize,
        rate_in: f64,
        rate_up: f64,
    ) -> usize {
        let idx = self.states.len();
        self.states.push(state);
        self.depths.push(depth);
        self.parent.push(parent);
        self.rate_in.push(rate_in);
        self.rate_up.push(rate_up);
        self.out.push(rate_up);
        if idx != parent {
            self.out[parent] += rate_in;
        }
        idx
    }
}

fn grow_states(
    nodes: &mut Nodes,
    env: &Environment<RateLaw>,
    spec: &BranchingSpec,
    node: usize,
    depth_cap: usize,
) -> Result<()> {
    let (vertex, symbols) = match &nodes.states[node] {
        BindweedState::At { vertex, symbols } => (vertex.clone(), symbols.clone()),
        BindweedState::Empty => unreachable!("grow_states starts below empty"),
    };
    let n = vertex.depth();
    if n >= depth_cap {
        return Ok(());
    }
    let d = env.dim();
    let y = *symbols.last().expect("nonempty") as usize;
    for i in 1..=spec.branching(&vertex) {
        let child = vertex.child(i);
        let rates = env.edge_sample(&child)?;
        for z in 1..=d as u8 {
            let mut syms = symbols.clone();
            syms.push(z);
            let idx = nodes.push(
                BindweedState::At {
                    vertex: child.clone(),
                    symbols: syms,
                },
                Some(n + 1),
                node,
                rates.nu(y - 1, z as usize - 1),
                rates.mu(z as usize - 1),
            );
            grow_states(nodes, env, spec, idx, depth_cap)?;
        }
    }
    Ok(())
}

/// Computes the truncated stationary measure by (a) the reversibility
/// recursion seeded at π(empty) = π(root states) and (b) a direct sparse
/// solve of the global balance equations, eliminated leaves-first (the state
/// graph is a tree, so the elimination is exact with no fill-in). Returns
/// the recursion measure together with the (a)–(b) discrepancy.
pub fn exact_stationary_truncated(
    env: &Environment<RateLaw>,
    spec: &BranchingSpec,
    depth: usize,
    max_states: usize,
) -> Result<TruncatedStationary> {
    let d = env.dim();
    let predicted = truncated_state_count(spec, d, depth)?;
    if predicted > max_states as u128 {
        return Err(Error::capability(format!(
            "truncation at depth {depth} has {predicted} states, above the \
             cap {max_states}"
        )));
    }

    let mut nodes = Nodes {
        states: Vec::new(),
        depths: Vec::new(),
        parent: Vec::new(),
        rate_in: Vec::new(),
        rate_up: Vec::new(),
        out: Vec::new(),
    };
    nodes.push(BindweedState::Empty, None, 0, 0.0, 0.0);
    for z in 1..=d as u8 {
        // Empty <-> (root, z) exchanges at rate 1 both ways.
        let idx = nodes.push(BindweedState::root_with(z), Some(0), 0, 1.0, 1.0);
        grow_states(&mut nodes, env, spec, idx, depth)?;
    }
    let n = nodes.states.len();
    debug_assert_eq!(n as u128, predicted);

    // (a) Reversibility recursion: each level multiplies by rate_in/rate_up,
    // which is ξ_{a,xy} = ν_{xy}/μ_y one level down (and 1 at the root).
    let mut w_rec = vec![0.0; n];
    w_rec[0] = 1.0;
    for i in 1..n {
        w_rec[i] = w_rec[nodes.parent[i]] * nodes.rate_in[i] / nodes.rate_up[i];
    }

    // (b) Balance-equation elimination, children before parents.
    let mut alpha = vec![0.0; n];
    let mut eliminated = vec![0.0; n];
    for i in (1..n).rev() {
        alpha[i] = nodes.rate_in[i] / (nodes.out[i] - eliminated[i]);
        eliminated[nodes.parent[i]] += nodes.rate_up[i] * alpha[i];
    }
    let mut w_solve = vec![0.0; n];
    w_solve[0] = 1.0;
    for i in 1..n {
        w_solve[i] = alpha[i] * w_solve[nodes.parent[i]];
    }

    let norm_rec: f64 = w_rec.iter().sum();
    let norm_solve: f64 = w_solve.iter().sum();
    let pi: Vec<f64> = w_rec.iter().map(|w| w / norm_rec).collect();

    let mut max_abs = 0.0f64;
    let mut tv = 0.0f64;
    for i in 0..n {
        let diff = (pi[i] - w_solve[i] / norm_solve).abs();
        max_abs = max_abs.max(diff);
        tv += diff;
    }
    tv *= 0.5;

    let mut db_rel = 0.0f64;
    for i in 1..n {
        let flow_down = pi[nodes.parent[i]] * nodes.rate_in[i];
        let flow_up = pi[i] * nodes.rate_up[i];
        let scale = flow_down.abs().max(flow_up.abs()).max(f64::MIN_POSITIVE);
        db_rel = db_rel.max((flow_down - flow_up).abs() / scale);
    }

    Ok(TruncatedStationary {
        states: nodes.states,
        depths: nodes.depths,
        pi,
        truncation_depth: depth,
        max_abs_discrepancy: max_abs,
        total_variation_discrepancy: tv,
        detailed_balance_max_rel: db_rel,
        out_rate_empty: d as f64,
    })
}

const EXCURSION_TAG: u64 = 0x657863; // "exc"

/// Independent excursions from the empty state, each stopped at its first
/// return or at the horizon.
pub fn run_excursions(
    env: &Environment<RateLaw>,
    spec: &BranchingSpec,
    sim_seed: u64,
    reps: usize,
    horizon: f64,
) -> Result<Vec<Trajectory>> {
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let stop = StopRule::at_time(horizon).until_return();
            simulate(
                env,
                spec,
                seed::derive(sim_seed, &[EXCURSION_TAG, r as u64]),
                &stop,
                BindweedState::Empty,
            )
        })
        .collect()
}

/// Per-truncation-depth comparison of simulated excursions against the
/// exact truncated chain.
#[derive(Clone, Debug)]
pub struct DepthSummary {
    pub depth: usize,
    pub truncated_states: Option<usize>,
    /// Kac mean return time of the truncated chain; `None` when the
    /// truncation is too large to enumerate.
    pub exact_mean_return: Option<f64>,
    /// Mean first-return time over returned excursions.
    pub sim_mean_return: Option<f64>,
    pub non_return_fraction: f64,
    pub mean_max_depth: f64,
    pub replicas: usize,
}

#[derive(Clone, Debug)]
pub struct RecurrenceReport {
    pub horizon: f64,
    pub summaries: Vec<DepthSummary>,
}

/// For each truncation depth, runs an independent batch of excursions on the
/// infinite tree and sets the exact truncated-chain return time next to the
/// simulated one. In the positive-recurrent phase the exact values stabilize
/// as the depth grows and the simulated mean sits near them; in the
/// transient phase they drift apart and excursions stop returning.
pub fn recurrence_experiment(
    env: &Environment<RateLaw>,
    spec: &BranchingSpec,
    depths: &[usize],
    horizon: f64,
    reps: usize,
    sim_seed: u64,
    max_states: usize,
) -> Result<RecurrenceReport> {
    if depths.is_empty() || reps == 0 || !(horizon > 0.0) {
        return Err(Error::domain(
            "recurrence_experiment needs depths, reps >= 1 and horizon > 0",
        ));
    }
    let mut summaries = Vec::with_capacity(depths.len());
    for (i, &depth) in depths.iter().enumerate() {
        let exact = match exact_stationary_truncated(env, spec, depth, max_states) {
            Ok(measure) => Some(measure),
            Err(Error::Capability(_)) | Err(Error::Overflow(_)) => None,
            Err(e) => return Err(e),
        };
        let batch_seed = seed::derive(sim_seed, &[i as u64, depth as u64]);
        let batch = run_excursions(env, spec, batch_seed, reps, horizon)?;
        let returned: Vec<&Trajectory> = batch.iter().filter(|t| t.returns() > 0).collect();
        let sim_mean_return = (!returned.is_empty()).then(|| {
            returned.iter().map(|t| t.return_times[0]).sum::<f64>() / returned.len() as f64
        });
        let mean_max_depth = batch
            .iter()
            .map(|t| t.max_depth.map_or(-1.0, |d| d as f64))
            .sum::<f64>()
            / reps as f64;
        summaries.push(DepthSummary {
            depth,
            truncated_states: exact.as_ref().map(|m| m.len()),
            exact_mean_return: exact.as_ref().map(|m| m.kac_mean_return_time()),
            sim_mean_return,
            non_return_fraction: 1.0 - returned.len() as f64 / reps as f64,
            mean_max_depth,
            replicas: reps,
        });
    }
    Ok(RecurrenceReport { horizon, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::EntryLaw;

    fn rate_law(d: usize, nu: f64, mu: f64) -> RateLaw {
        RateLaw::new(
            d,
            EntryLaw::constant(nu).unwrap(),
            EntryLaw::constant(mu).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn empty_state_has_d_unit_rate_entries() {
        let env = Environment::new(1, rate_law(3, 1.0, 1.0));
        let spec = BranchingSpec::constant(2).unwrap();
        let ts = enabled_transitions(&BindweedState::Empty, &env, &spec).unwrap();
        assert_eq!(ts.len(), 3);
        assert!(ts.iter().all(|t| t.rate == 1.0));
    }

    #[test]
    fn root_state_has_one_up_and_b_times_d_down_moves() {
        let env = Environment::new(1, rate_law(2, 0.7, 1.3));
        let spec = BranchingSpec::constant(2).unwrap();
        let ts = enabled_transitions(&BindweedState::root_with(1), &env, &spec).unwrap();
        assert_eq!(ts.len(), 1 + 2 * 2);
        assert_eq!(ts[0].target, BindweedState::Empty);
        assert_eq!(ts[0].rate, 1.0);
    }

    #[test]
    fn depth_one_rates_match_the_environment() {
        let law = RateLaw::new(
            1,
            EntryLaw::uniform(0.5, 1.5).unwrap(),
            EntryLaw::uniform(0.2, 0.4).unwrap(),
        )
        .unwrap();
        let env = Environment::new(77, law);
        let spec = BranchingSpec::explicit(1, Default::default()).unwrap();
        let state = BindweedState::At {
            vertex: Vertex::from_word(vec![1]),
            symbols: vec![1, 1],
        };
        let ts = enabled_transitions(&state, &env, &spec).unwrap();
        assert_eq!(ts.len(), 2);
        let above = env.edge_sample(&Vertex::from_word(vec![1])).unwrap();
        let below = env.edge_sample(&Vertex::from_word(vec![1, 1])).unwrap();
        assert_eq!(ts[0].rate, above.mu(0));
        assert_eq!(ts[1].rate, below.nu(0, 0));
    }

    #[test]
    fn simulation_is_deterministic_in_both_seeds() {
        let env1 = Environment::new(5, rate_law(2, 0.8, 1.0));
        let env2 = Environment::new(5, rate_law(2, 0.8, 1.0));
        let spec = BranchingSpec::constant(2).unwrap();
        let stop = StopRule::after_jumps(500);
        let a = simulate(&env1, &spec, 9, &stop, BindweedState::Empty).unwrap();
        let b = simulate(&env2, &spec, 9, &stop, BindweedState::Empty).unwrap();
        assert_eq!(a.jumps, b.jumps);
        assert_eq!(a.return_times, b.return_times);
        assert_eq!(a.total_time, b.total_time);
        assert_eq!(a.final_depth, b.final_depth);
    }

    #[test]
    fn unit_rate_ray_walk_is_symmetric() {
        // ν = μ = 1 on a ray with d = 1: the embedded chain at depth >= 1 is
        // a reflected simple random walk, so up and down frequencies match.
        let env = Environment::new(3, rate_law(1, 1.0, 1.0));
        let spec = BranchingSpec::explicit(1, Default::default()).unwrap();
        let stop = StopRule::after_jumps(100_000);
        let traj = simulate(&env, &spec, 4, &stop, BindweedState::Empty).unwrap();
        let moves = (traj.jumps_up + traj.jumps_down) as f64;
        let up_frac = traj.jumps_up as f64 / moves;
        assert!((up_frac - 0.5).abs() < 0.01, "up fraction {up_frac}");
    }

    #[test]
    fn subcritical_walk_stays_shallow() {
        // ν/μ = 0.1, b = 2: λ·b = 0.2 < 1. The exact stationary measure puts
        // nearly all mass at depth <= 2, and the simulated occupancy agrees.
        let env = Environment::new(11, rate_law(1, 0.1, 1.0));
        let spec = BranchingSpec::constant(2).unwrap();

        let exact = exact_stationary_truncated(&env, &spec, 10, 1 << 16).unwrap();
        let shallow: f64 =
            exact.pi_empty() + (0..=2).map(|n| exact.level_mass(n)).sum::<f64>();
        assert!(shallow > 0.99, "exact shallow mass {shallow}");

        let stop = StopRule::after_jumps(100_000);
        let traj = simulate(&env, &spec, 8, &stop, BindweedState::Empty).unwrap();
        let le2: f64 = traj.time_at_empty
            + traj.depth_time.iter().take(3).sum::<f64>();
        let frac = le2 / traj.total_time;
        assert!(frac > 0.9, "simulated shallow fraction {frac}");
    }

    #[test]
    fn three_state_truncation_is_uniform() {
        let env = Environment::new(1, rate_law(2, 1.0, 1.0));
        let spec = BranchingSpec::constant(2).unwrap();
        let m = exact_stationary_truncated(&env, &spec, 0, 100).unwrap();
        assert_eq!(m.len(), 3);
        for (_, p) in m.entries() {
            assert!((p - 1.0 / 3.0).abs() < 1e-14);
        }
        // Kac: cycle = holding(1/2) + excursion(1) = 3/2.
        assert!((m.kac_mean_return_time() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn depth_one_ray_ratio_is_nu_over_mu() {
        let law = RateLaw::new(
            1,
            EntryLaw::uniform(0.5, 1.5).unwrap(),
            EntryLaw::uniform(0.7, 1.1).unwrap(),
        )
        .unwrap();
        let env = Environment::new(13, law);
        let spec = BranchingSpec::explicit(1, Default::default()).unwrap();
        let m = exact_stationary_truncated(&env, &spec, 1, 100).unwrap();
        let rates = env.edge_sample(&Vertex::from_word(vec![1])).unwrap();
        let expected = rates.nu(0, 0) / rates.mu(0);
        let pi_root = m.level_mass(0);
        let pi_depth1 = m.level_mass(1);
        assert!((pi_depth1 / pi_root - expected).abs() < 1e-12);
        assert!(m.max_abs_discrepancy < 1e-10);
    }

    #[test]
    fn recursion_and_solver_agree_with_detailed_balance() {
        let law = RateLaw::new(
            2,
            EntryLaw::uniform(0.2, 1.0).unwrap(),
            EntryLaw::uniform(0.5, 2.0).unwrap(),
        )
        .unwrap();
        let env = Environment::new(29, law);
        let spec = BranchingSpec::periodic(vec![2, 1]).unwrap();
        let m = exact_stationary_truncated(&env, &spec, 5, 1 << 16).unwrap();
        assert!(m.total_variation_discrepancy < 1e-10);
        assert!(m.detailed_balance_max_rel < 1e-12);
    }

    #[test]
    fn level_masses_match_the_cascade_quadform() {
        use crate::cascade::run_cascade;

        let law = RateLaw::new(
            2,
            EntryLaw::uniform(0.1, 0.5).unwrap(),
            EntryLaw::uniform(0.8, 1.2).unwrap(),
        )
        .unwrap();
        let env = Environment::new(41, law);
        let spec = BranchingSpec::constant(2).unwrap();
        let depth = 4;
        let measure = exact_stationary_truncated(&env, &spec, depth, 1 << 16).unwrap();
        let series = run_cascade(&spec, &env, depth, 1 << 16).unwrap();
        for n in 0..=depth {
            let ratio = measure.level_mass(n) / measure.pi_empty();
            let quadform = series.levels[n].log_psi.exp();
            assert!(
                (ratio - quadform).abs() <= 1e-9 * quadform.abs(),
                "level {n}: {ratio} vs {quadform}"
            );
        }
    }

    #[test]
    fn truncation_cap_is_a_capability_error() {
        let env = Environment::new(1, rate_law(2, 1.0, 1.0));
        let spec = BranchingSpec::constant(2).unwrap();
        let err = exact_stationary_truncated(&env, &spec, 10, 100).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
    }

    #[test]
    fn recurrent_excursions_return_and_match_kac() {
        // d = 2, point-mass rates with ν/μ = 0.1: entries of ξ are 0.1, the
        // mean-matrix spectral radius is 0.2, so λ·b = 0.4 < 1.
        let env = Environment::new(7, rate_law(2, 0.1, 1.0));
        let spec = BranchingSpec::constant(2).unwrap();
        let report =
            recurrence_experiment(&env, &spec, &[6], 1_000.0, 600, 15, 1 << 20).unwrap();
        let s = &report.summaries[0];
        assert!(s.non_return_fraction < 0.01, "{}", s.non_return_fraction);
        let exact = s.exact_mean_return.unwrap();
        let sim = s.sim_mean_return.unwrap();
        assert!(
            (sim - exact).abs() / exact < 0.2,
            "sim {sim} vs exact {exact}"
        );
    }
}
