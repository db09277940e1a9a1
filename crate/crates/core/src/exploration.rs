//! Exploration dynamics on explicit graphs and the reduced one-dimensional
//! chain for Erdős–Rényi graphs.
//!
//! At every step one unexplored vertex is activated and all of its unexplored
//! neighbours become blocked. `Z_n` counts explored (active or blocked)
//! vertices; the run ends at the first `n` with `Z_n = N`, and that `n` is the
//! number of active vertices.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{AdjacencyGraph, ErParams};
use crate::pool::VertexPool;

/// Explored counts `Z_0 = 0, Z_1, ..., Z_T = N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    z_values: Vec<usize>,
    n_total: usize,
}

impl Trajectory {
    /// Checks the invariants: starts at 0, strictly increasing, ends at `n_total`.
    pub fn new(z_values: Vec<usize>, n_total: usize) -> Result<Self> {
        let ok = z_values.first() == Some(&0)
            && z_values.last() == Some(&n_total)
            && z_values.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(invalid("trajectory must start at 0, increase strictly and end at N"));
        }
        Ok(Self { z_values, n_total })
    }

    pub(crate) fn from_parts(z_values: Vec<usize>, n_total: usize) -> Self {
        debug_assert!(Self::new(z_values.clone(), n_total).is_ok());
        Self { z_values, n_total }
    }

    pub fn z_values(&self) -> &[usize] {
        &self.z_values
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    /// `T*_N`, the absorption step.
    pub fn hitting_time(&self) -> usize {
        self.z_values.len() - 1
    }

    /// `T*_N / N`.
    pub fn jamming_fraction(&self) -> f64 {
        self.hitting_time() as f64 / self.n_total as f64
    }

    /// `Z_n`, frozen at `N` after absorption.
    pub fn at(&self, n: usize) -> usize {
        *self.z_values.get(n).unwrap_or(&self.n_total)
    }

    pub fn scaled(&self) -> ScaledTrajectory<'_> {
        scaled_trajectory(self)
    }
}

/// Step function `t -> Z_[tN] / N`.
#[derive(Debug, Clone, Copy)]
pub struct ScaledTrajectory<'a> {
    traj: &'a Trajectory,
}

pub fn scaled_trajectory(traj: &Trajectory) -> ScaledTrajectory<'_> {
    ScaledTrajectory { traj }
}

impl ScaledTrajectory<'_> {
    pub fn value_at(&self, t: f64) -> f64 {
        let n = self.traj.n_total as f64;
        let idx = if t <= 0.0 { 0 } else { (t * n).floor() as usize };
        self.traj.at(idx) as f64 / n
    }

    /// `T*_N / N`.
    pub fn end(&self) -> f64 {
        self.traj.jamming_fraction()
    }

    /// `sup_{s in [0, horizon]} |Z^N_s - z(s)|` for a continuous
    /// non-decreasing `z`. On each cell `[k/N, (k+1)/N)` the step function is
    /// constant, so the supremum is attained at the cell ends.
    pub fn sup_deviation(&self, z: impl Fn(f64) -> f64, horizon: f64) -> f64 {
        let n = self.traj.n_total as f64;
        let cells = (horizon * n).ceil() as usize;
        let mut worst = 0.0f64;
        let mut left = z(0.0);
        for k in 0..cells {
            let value = self.traj.at(k) as f64 / n;
            let right_t = ((k + 1) as f64 / n).min(horizon);
            let right = z(right_t);
            worst = worst.max((value - left).abs()).max((value - right).abs());
            left = right;
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexState {
    Unexplored,
    Active,
    Blocked,
}

/// Sets `A_n` (active) and `B_n` (blocked) during a graph exploration.
#[derive(Debug, Clone)]
pub struct ExplorationState {
    step: usize,
    states: Vec<VertexState>,
    pool: VertexPool,
    active: usize,
}

impl ExplorationState {
    pub fn new(n: usize) -> Self {
        Self {
            step: 0,
            states: vec![VertexState::Unexplored; n],
            pool: VertexPool::full(n),
            active: 0,
        }
    }

    pub fn step_count(&self) -> usize {
        self.step
    }

    pub fn explored_count(&self) -> usize {
        self.states.len() - self.pool.len()
    }

    pub fn active_count(&self) -> usize {
        self.active
    }

    pub fn state(&self, v: usize) -> VertexState {
        self.states[v]
    }

    pub fn is_done(&self) -> bool {
        self.pool.is_empty()
    }

    /// Activates `v` and blocks its unexplored neighbours; returns the number
    /// newly blocked (`xi_n`).
    pub fn activate(&mut self, graph: &AdjacencyGraph, v: usize) -> usize {
        debug_assert_eq!(self.states[v], VertexState::Unexplored);
        self.pool.remove(v);
        self.states[v] = VertexState::Active;
        self.active += 1;
        self.step += 1;
        let mut blocked = 0;
        for &w in graph.neighbors(v) {
            if self.pool.remove(w) {
                self.states[w] = VertexState::Blocked;
                blocked += 1;
            }
        }
        blocked
    }

    /// Draws a uniformly random unexplored vertex and activates it.
    pub fn step<R: Rng + ?Sized>(&mut self, graph: &AdjacencyGraph, rng: &mut R) -> Option<usize> {
        let v = self.pool.draw(rng)?;
        self.activate(graph, v);
        Some(v)
    }
}

pub fn explore_graph<R: Rng + ?Sized>(graph: &AdjacencyGraph, rng: &mut R) -> Result<Trajectory> {
    let n = graph.n();
    if n == 0 {
        return Err(invalid("graph must have at least one vertex"));
    }
    let mut state = ExplorationState::new(n);
    let mut z = vec![0];
    while state.step(graph, rng).is_some() {
        z.push(state.explored_count());
    }
    debug_assert_eq!(state.active_count(), z.len() - 1);
    Ok(Trajectory::from_parts(z, n))
}

/// The one-dimensional chain `Z_n = Z_{n-1} + 1 + xi_n` with
/// `xi_n ~ Binomial(N - Z_{n-1} - 1, c/N)`, sampled exactly.
pub fn simulate_er_chain<R: Rng + ?Sized>(params: &ErParams, rng: &mut R) -> Trajectory {
    let n = params.n();
    let p = params.edge_probability();
    let mut z = Vec::with_capacity(n / 2 + 2);
    z.push(0usize);
    let mut current = 0usize;
    while current < n {
        let remaining = (n - current - 1) as u64;
        let xi = if remaining == 0 || p == 0.0 {
            0
        } else {
            Binomial::new(remaining, p).expect("p in [0, 1]").sample(rng) as usize
        };
        current += 1 + xi;
        z.push(current);
    }
    Trajectory::from_parts(z, n)
}

/// Doob residual `M_n = Z_n - compensator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartingaleResidual {
    pub m_values: Vec<f64>,
}

impl MartingaleResidual {
    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.m_values.windows(2).map(|w| w[1] - w[0])
    }
}

/// Residual of a trajectory of the chain with parameters `params`.
///
/// `M_0 = Z_0 - (1 + gamma_N(Z_0))`, and each increment subtracts the
/// conditional mean `1 + gamma_N(Z_{n-1})` of the jump it compensates, so the
/// increments have conditional mean zero.
pub fn martingale_residual(traj: &Trajectory, params: &ErParams) -> Result<MartingaleResidual> {
    if traj.n_total() != params.n() {
        return Err(Error::SizeMismatch {
            expected: params.n(),
            got: traj.n_total(),
        });
    }
    let path: Vec<f64> = traj.z_values().iter().map(|&z| z as f64).collect();
    Ok(martingale_residual_of_path(&path, params))
}

/// Same as [`martingale_residual`] for a real-valued path.
pub fn martingale_residual_of_path(path: &[f64], params: &ErParams) -> MartingaleResidual {
    let mut m_values = Vec::with_capacity(path.len());
    if let Some(&z0) = path.first() {
        let mut m = z0 - (1.0 + params.gamma_n(z0));
        m_values.push(m);
        for w in path.windows(2) {
            m += (w[1] - w[0]) - (1.0 + params.gamma_n(w[0]));
            m_values.push(m);
        }
    }
    MartingaleResidual { m_values }
}

/// Pointwise comparison of `Bin(N - x - 1, c/N)` with its Poisson limit
/// `Poi(c (1 - x/N))` against the relative bound `(c/N) Poi(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmfGap {
    pub gap: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn binomial_poisson_gap(n: usize, c: f64, x: usize, k: i64) -> Result<PmfGap> {
    if k < 0 {
        return Err(invalid(format!("k must be non-negative, got {k}")));
    }
    if x >= n {
        return Err(invalid(format!("x = {x} must be below n = {n}")));
    }
    if !(0.0..=n as f64).contains(&c) {
        return Err(invalid(format!("c = {c} outside [0, n]")));
    }
    let k = k as u64;
    let trials = (n - x - 1) as u64;
    let p = c / n as f64;
    let mean = c * (1.0 - x as f64 / n as f64);
    let bin = binomial_pmf(trials, p, k);
    let poi = poisson_pmf(mean, k);
    let gap = (bin - poi).abs();
    let bound = p * poi;
    Ok(PmfGap { gap, bound, holds: gap <= bound })
}

fn binomial_pmf(trials: u64, p: f64, k: u64) -> f64 {
    if k > trials {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == trials { 1.0 } else { 0.0 };
    }
    let ln = ln_choose(trials, k) + k as f64 * p.ln() + (trials - k) as f64 * (-p).ln_1p();
    ln.exp()
}

fn poisson_pmf(mean: f64, k: u64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mean.ln() - mean - ln_factorial(k)).exp()
}

fn ln_factorial(k: u64) -> f64 {
    statrs::function::factorial::ln_factorial(k)
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}
