//! Random sequential adsorption on a random geometric graph, together with
//! two coupled processes that bound it pathwise from above and below, and the
//! ODE bounds on its fluid limit.
//!
//! All three processes are driven by the same point cloud and by the same
//! selection sequence: at step `n` a point `X_n` is drawn uniformly among the
//! points not yet explored by the original process `Z`.
//!
//! * `Z` explores `X_n` and every unexplored point within distance `r`.
//! * `U` grows a ball around `X_n` whose radius `r~_n >= r` is chosen so that
//!   the newly covered area of its own explored region equals a free ball `v`.
//!   Since `r~_n >= r` and the centres coincide, `U`'s explored region always
//!   contains `Z`'s, hence `U_n >= Z_n`.
//! * `L` explores `X_n` and, with probability `alpha_n`, its `r`-neighbours.
//!   Everything `L` explores has been explored by `Z`, hence `L_n <= Z_n`.
//!   After `Z` is absorbed, `L` keeps selecting among its own unexplored
//!   points until it is absorbed too.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exploration::{ExplorationState, Trajectory};
use crate::fluid::hermite;
use crate::graph::{build_rgg, AdjacencyGraph, BoxGeometry, NeighborMethod, Point, PointCloud, SpatialGrid};
use crate::ode::{integrate_until_event, OdeSettings};
use crate::pool::VertexPool;
use crate::region::ExploredRegion;
use crate::rng::child_rng;

/// Which explored volume enters the denominator of `alpha_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaVolume {
    /// `sum_{j<n} |S_j|` of the original process.
    ZProcess,
    /// `v` times the number of accepted lower-process balls so far.
    LowerProcess,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsaConfig {
    /// Raster cell side as a fraction of `r` (two dimensions only).
    pub raster_cell_fraction: f64,
    /// Area tolerance of the `r~_n` search, relative to `v`.
    pub area_tolerance: f64,
    pub alpha_volume: AlphaVolume,
    /// Volume of `B(2r) \ B(r)` in units of `v`; defaults to `2^d - 1`.
    pub perimeter_factor: Option<f64>,
}

impl Default for RsaConfig {
    fn default() -> Self {
        Self {
            raster_cell_fraction: 1.0 / 64.0,
            area_tolerance: 1e-3,
            alpha_volume: AlphaVolume::ZProcess,
            perimeter_factor: None,
        }
    }
}

impl RsaConfig {
    pub fn perimeter_factor_for(&self, dimension: usize) -> f64 {
        self.perimeter_factor
            .unwrap_or(((1usize << dimension) - 1) as f64)
    }

    fn validate(&self) -> Result<()> {
        if !(self.raster_cell_fraction > 0.0 && self.raster_cell_fraction.is_finite()) {
            return Err(invalid("raster cell fraction must be positive"));
        }
        if !(self.area_tolerance > 0.0 && self.area_tolerance < 1.0) {
            return Err(invalid("area tolerance must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// One run of the original process with its explored region.
#[derive(Debug, Clone)]
pub struct RsaRun {
    pub trajectory: Trajectory,
    /// `|S_k|` for `k = 1..=T`.
    pub step_areas: Vec<f64>,
    pub region: ExploredRegion,
    pub selection_order: Vec<usize>,
    pub selected_points: Vec<Point>,
}

impl RsaRun {
    pub fn explored_area(&self) -> f64 {
        self.step_areas.iter().sum()
    }
}

fn check_inputs(cloud: &PointCloud, geom: &BoxGeometry, config: &RsaConfig) -> Result<()> {
    config.validate()?;
    if cloud.is_empty() {
        return Err(invalid("point cloud is empty"));
    }
    if cloud.dimension() != geom.dimension() {
        return Err(invalid("cloud and box dimensions differ"));
    }
    Ok(())
}

fn new_region(geom: &BoxGeometry, config: &RsaConfig) -> Result<ExploredRegion> {
    ExploredRegion::for_geometry(geom, geom.radius() * config.raster_cell_fraction)
}

/// Runs the original process to absorption.
pub fn run_rsa<R: Rng + ?Sized>(
    cloud: &PointCloud,
    geom: &BoxGeometry,
    config: &RsaConfig,
    rng: &mut R,
) -> Result<RsaRun> {
    check_inputs(cloud, geom, config)?;
    let graph = build_rgg(cloud, geom.radius(), NeighborMethod::GridIndex)?;
    // same derivation order as `run_coupled`, so the Z paths coincide
    let mut select = child_rng(rng);
    let pts = cloud.positions();
    let mut state = ExplorationState::new(cloud.len());
    let mut region = new_region(geom, config)?;
    let mut z = vec![0];
    let mut areas = Vec::new();
    let mut order = Vec::new();
    while let Some(x) = state.step(&graph, &mut select) {
        areas.push(region.cover(&pts[x], geom.radius()));
        order.push(x);
        z.push(state.explored_count());
    }
    Ok(RsaRun {
        trajectory: Trajectory::from_parts(z, cloud.len()),
        step_areas: areas,
        region,
        selected_points: order.iter().map(|&i| pts[i]).collect(),
        selection_order: order,
    })
}

/// The original process and both bounding processes on shared randomness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoupledRun {
    pub z: Trajectory,
    pub u: Trajectory,
    pub l: Trajectory,
    /// `|S_n|` of the original process, `n = 1..=T_Z`.
    pub step_areas: Vec<f64>,
    /// `r~_n` for `n = 1..=T_Z`; `None` once `U` is absorbed.
    pub r_tilde: Vec<Option<f64>>,
    /// `alpha_n` for `n = 1..=T_L`.
    pub alpha: Vec<f64>,
    /// Steps where no radius up to the box diagonal reached area `v`.
    pub saturated_steps: Vec<usize>,
    /// Steps where `X_n` was already explored by `U` and `U` activated
    /// another point instead.
    pub upper_substitutions: usize,
}

impl CoupledRun {
    /// `L_n <= Z_n <= U_n` for every step, and `T_U <= T_Z <= T_L`.
    pub fn sandwich_holds(&self) -> bool {
        let steps = self.l.hitting_time().max(self.z.hitting_time());
        (0..=steps).all(|n| self.l.at(n) <= self.z.at(n) && self.z.at(n) <= self.u.at(n))
            && self.u.hitting_time() <= self.z.hitting_time()
            && self.z.hitting_time() <= self.l.hitting_time()
    }
}

#[derive(Clone, Copy)]
struct Parts {
    upper: bool,
    lower: bool,
}

pub fn run_coupled<R: Rng + ?Sized>(
    cloud: &PointCloud,
    geom: &BoxGeometry,
    config: &RsaConfig,
    rng: &mut R,
) -> Result<CoupledRun> {
    coupled(cloud, geom, config, rng, Parts { upper: true, lower: true })
}

/// `(Z, U)` from the upper coupling.
pub fn run_coupled_upper<R: Rng + ?Sized>(
    cloud: &PointCloud,
    geom: &BoxGeometry,
    config: &RsaConfig,
    rng: &mut R,
) -> Result<(Trajectory, Trajectory)> {
    let run = coupled(cloud, geom, config, rng, Parts { upper: true, lower: false })?;
    Ok((run.z, run.u))
}

/// `(Z, L)` from the lower coupling.
pub fn run_coupled_lower<R: Rng + ?Sized>(
    cloud: &PointCloud,
    geom: &BoxGeometry,
    config: &RsaConfig,
    rng: &mut R,
) -> Result<(Trajectory, Trajectory)> {
    let run = coupled(cloud, geom, config, rng, Parts { upper: false, lower: true })?;
    Ok((run.z, run.l))
}

/// `max(0, 1 - k (n-1) v / (|C| - explored))`, and 0 once nothing is left.
pub fn acceptance_probability(n: usize, v: f64, box_volume: f64, explored: f64, factor: f64) -> f64 {
    let remaining = box_volume - explored;
    if remaining <= 0.0 {
        return 0.0;
    }
    (1.0 - factor * (n - 1) as f64 * v / remaining).clamp(0.0, 1.0)
}

struct Lower {
    pool: VertexPool,
    count: usize,
    values: Vec<usize>,
    accepted_volume: f64,
}

impl Lower {
    #[allow(clippy::too_many_arguments)]
    fn step<R: Rng + ?Sized>(
        &mut self,
        graph: &AdjacencyGraph,
        x: usize,
        n: usize,
        z_explored_volume: f64,
        geom: &BoxGeometry,
        config: &RsaConfig,
        rng: &mut R,
    ) -> f64 {
        let v = geom.ball_volume();
        let explored = match config.alpha_volume {
            AlphaVolume::ZProcess => z_explored_volume,
            AlphaVolume::LowerProcess => self.accepted_volume,
        };
        let alpha = acceptance_probability(n, v, geom.volume(), explored, config.perimeter_factor_for(geom.dimension()));
        let accept = rng.random::<f64>() < alpha;
        if self.pool.remove(x) {
            self.count += 1;
        }
        if accept {
            self.accepted_volume += v;
            for &w in graph.neighbors(x) {
                if self.pool.remove(w) {
                    self.count += 1;
                }
            }
        }
        self.values.push(self.count);
        alpha
    }
}

fn coupled<R: Rng + ?Sized>(
    cloud: &PointCloud,
    geom: &BoxGeometry,
    config: &RsaConfig,
    rng: &mut R,
    parts: Parts,
) -> Result<CoupledRun> {
    check_inputs(cloud, geom, config)?;
    let n_total = cloud.len();
    let pts = cloud.positions();
    let r = geom.radius();
    let v = geom.ball_volume();
    let graph = build_rgg(cloud, r, NeighborMethod::GridIndex)?;
    let grid = SpatialGrid::new(pts, r);

    let mut select = child_rng(rng);
    let mut upper_rng = child_rng(rng);
    let mut lower_rng = child_rng(rng);

    let mut z_state = ExplorationState::new(n_total);
    let mut z_region = new_region(geom, config)?;
    let mut z_values = vec![0];
    let mut step_areas = Vec::new();
    let mut z_volume = 0.0;

    let mut u_pool = VertexPool::full(n_total);
    let mut u_region = if parts.upper { Some(new_region(geom, config)?) } else { None };
    let mut u_values = vec![0];
    let mut r_tilde = Vec::new();
    let mut saturated_steps = Vec::new();
    let mut upper_substitutions = 0;

    let mut lower = Lower {
        pool: VertexPool::full(n_total),
        count: 0,
        values: vec![0],
        accepted_volume: 0.0,
    };
    let mut alpha = Vec::new();

    let mut n = 0;
    while let Some(x) = z_state.step(&graph, &mut select) {
        n += 1;
        let center = pts[x];
        let area = z_region.cover(&center, r);

        if let Some(region) = u_region.as_mut() {
            let u_count = n_total - u_pool.len();
            if u_count < n_total {
                if !u_pool.remove(x) {
                    let other = u_pool.draw(&mut upper_rng).expect("U not absorbed");
                    u_pool.remove(other);
                    upper_substitutions += 1;
                }
                let (found, saturated) =
                    region.radius_for_free_area(&center, v, r, geom.diagonal(), config.area_tolerance * v);
                if saturated {
                    saturated_steps.push(n);
                }
                let radius = found.max(r);
                region.cover(&center, radius);
                grid.for_each_within(pts, &center, radius, |j| {
                    u_pool.remove(j);
                });
                r_tilde.push(Some(radius));
                u_values.push(n_total - u_pool.len());
            } else {
                r_tilde.push(None);
            }
        }

        if parts.lower {
            alpha.push(lower.step(&graph, x, n, z_volume, geom, config, &mut lower_rng));
        }

        z_volume += area;
        step_areas.push(area);
        z_values.push(z_state.explored_count());
    }

    if parts.lower {
        while lower.count < n_total {
            n += 1;
            let x = lower.pool.draw(&mut select).expect("L not absorbed");
            alpha.push(lower.step(&graph, x, n, z_volume, geom, config, &mut lower_rng));
        }
    }

    let z = Trajectory::from_parts(z_values, n_total);
    let u = if parts.upper {
        Trajectory::from_parts(u_values, n_total)
    } else {
        z.clone()
    };
    let l = if parts.lower {
        Trajectory::from_parts(lower.values, n_total)
    } else {
        z.clone()
    };
    Ok(CoupledRun {
        z,
        u,
        l,
        step_areas,
        r_tilde,
        alpha,
        saturated_steps,
        upper_substitutions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckOutcome {
    Pass,
    Fail,
    /// The lower bound is non-positive at this step.
    Vacuous,
    /// Fewer than two samples.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepVolumeCheck {
    pub step: usize,
    pub samples: usize,
    pub mean_area: f64,
    pub standard_error: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub lower: CheckOutcome,
    pub upper: CheckOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeBoundReport {
    pub steps: Vec<StepVolumeCheck>,
    /// Every recorded `|S_k|` is at most `v` plus the raster tolerance.
    pub pathwise_upper_holds: bool,
}

impl VolumeBoundReport {
    pub fn failures(&self) -> impl Iterator<Item = &StepVolumeCheck> {
        self.steps
            .iter()
            .filter(|s| s.lower == CheckOutcome::Fail || s.upper == CheckOutcome::Fail)
    }
}

/// Compares the per-step sample mean of `|S_k|` with
/// `v (1 - k' (k-1) v / (|C| - sum_{j<k} |S_j|)) <= E|S_k| <= v`, allowing
/// three standard errors. With `interior_margin = Some(m)`, only steps whose
/// selected point lies at least `m` from every wall are used.
pub fn check_volume_bounds(
    runs: &[RsaRun],
    geom: &BoxGeometry,
    config: &RsaConfig,
    interior_margin: Option<f64>,
) -> Result<VolumeBoundReport> {
    if runs.iter().any(|r| r.trajectory.n_total() != runs[0].trajectory.n_total()) {
        return Err(invalid("runs must share N"));
    }
    let v = geom.ball_volume();
    let factor = config.perimeter_factor_for(geom.dimension());
    let mut pathwise_upper_holds = true;
    let longest = runs.iter().map(|r| r.step_areas.len()).max().unwrap_or(0);
    let mut sums: Vec<(Vec<f64>, Vec<f64>)> = vec![(Vec::new(), Vec::new()); longest];
    for run in runs {
        let tol = run.region.ball_tolerance(geom.radius());
        let mut before = 0.0;
        for (k, &area) in run.step_areas.iter().enumerate() {
            if area > v + tol {
                pathwise_upper_holds = false;
            }
            let keep = interior_margin.is_none_or(|m| geom.wall_distance(&run.selected_points[k]) >= m);
            if keep {
                let remaining = geom.volume() - before;
                let bound = if remaining > 0.0 {
                    v * (1.0 - factor * k as f64 * v / remaining)
                } else {
                    f64::NEG_INFINITY
                };
                sums[k].0.push(area);
                sums[k].1.push(bound);
            }
            before += area;
        }
    }
    let steps = sums
        .into_iter()
        .enumerate()
        .map(|(k, (areas, bounds))| {
            let samples = areas.len();
            let mean = areas.iter().sum::<f64>() / samples.max(1) as f64;
            let var = if samples > 1 {
                areas.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (samples - 1) as f64
            } else {
                0.0
            };
            let se = (var / samples.max(1) as f64).sqrt();
            let lower_bound = bounds.iter().sum::<f64>() / samples.max(1) as f64;
            let (lower, upper) = if samples < 2 {
                (CheckOutcome::Skipped, CheckOutcome::Skipped)
            } else {
                let lower = if lower_bound <= 0.0 {
                    CheckOutcome::Vacuous
                } else if mean >= lower_bound - 3.0 * se {
                    CheckOutcome::Pass
                } else {
                    CheckOutcome::Fail
                };
                let upper = if mean <= v + 3.0 * se { CheckOutcome::Pass } else { CheckOutcome::Fail };
                (lower, upper)
            };
            StepVolumeCheck {
                step: k + 1,
                samples,
                mean_area: mean,
                standard_error: se,
                lower_bound,
                upper_bound: v,
                lower,
                upper,
            }
        })
        .collect();
    Ok(VolumeBoundReport {
        steps,
        pathwise_upper_holds,
    })
}

/// One bounding curve and its auxiliary exponential factor
/// `w(t) = exp(-int_0^t ds / (1 - y(s)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
    pub w_values: Vec<f64>,
    pub hitting_time: f64,
}

impl BoundCurve {
    pub fn value_at(&self, t: f64) -> f64 {
        hermite(&self.grid, &self.values, &self.slopes, t)
    }
}

/// `l(t) <= z(t) <= u(t)` for the spatial fluid limit, with
/// `T_lower` = hitting time of `u` and `T_upper` = hitting time of `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurves {
    pub c: f64,
    pub lower: BoundCurve,
    pub upper: BoundCurve,
    pub t_lower: f64,
    pub t_upper: f64,
    /// First grid time from which `l` grows with slope exactly 1.
    pub lower_clamp_time: Option<f64>,
}

/// Closed form `u(t) = ct + (t - 1/c) ln(1 - ct)`, valid for `ct < 1`.
pub fn upper_closed_form(c: f64, t: f64) -> f64 {
    c * t + (t - 1.0 / c) * (-c * t).ln_1p()
}

const SINGULARITY_GUARD: f64 = 1e-9;

pub fn integrate_bounds(c: f64, settings: &OdeSettings) -> Result<BoundCurves> {
    integrate_bounds_with_factor(c, 3.0, settings)
}

/// Integrates
/// `w1' = 1 + max(0, c (1 - k c t w2 / (1 - w1)) w2)`, `w2' = -w2 / (1 - w1)`
/// for the lower curve `l = w1`, and `u' = 1 + c w`, `w' = -w / (1 - u)` for
/// the upper curve, both from `(0, 1)`.
pub fn integrate_bounds_with_factor(c: f64, factor: f64, settings: &OdeSettings) -> Result<BoundCurves> {
    if !(c.is_finite() && c > 0.0) {
        return Err(invalid(format!("c must be > 0, got {c}")));
    }
    // The second component is carried as q = ln w, which stays smooth while
    // w itself collapses to 0 as the curve approaches 1.
    let gap = |y: f64| (1.0 - y).max(1e-300);
    let lower_drive = |t: f64, y: &[f64; 2]| {
        let w = y[1].exp();
        c * (1.0 - factor * c * t * w / gap(y[0])) * w
    };
    let lower_rhs = |t: f64, y: &[f64; 2]| [1.0 + lower_drive(t, y).max(0.0), -1.0 / gap(y[0])];
    let upper_rhs = |_t: f64, y: &[f64; 2]| [1.0 + c * y[1].exp(), -1.0 / gap(y[0])];
    let guard = |_t: f64, y: &[f64; 2]| 1.0 - y[0] < SINGULARITY_GUARD;
    let event = |y: &[f64; 2]| y[0] - 1.0;

    let lower_sol = integrate_until_event(lower_rhs, 0.0, [0.0, 0.0], settings, 2.0, event, guard)?;
    let upper_sol = integrate_until_event(upper_rhs, 0.0, [0.0, 0.0], settings, 2.0, event, guard)?;

    let to_curve = |sol: crate::ode::OdeSolution<2>, rhs: &dyn Fn(f64, &[f64; 2]) -> [f64; 2]| -> Result<BoundCurve> {
        let t_end = *sol.times.last().expect("non-empty");
        let y_end = sol.states.last().expect("non-empty");
        let slopes: Vec<f64> = sol.times.iter().zip(&sol.states).map(|(t, y)| rhs(*t, y)[0]).collect();
        let hit = match sol.event_time {
            Some(t) => t,
            // stopped by the guard within 1e-9 of the target: one linear step finishes it
            None if 1.0 - y_end[0] < SINGULARITY_GUARD => t_end + (1.0 - y_end[0]) / slopes.last().expect("non-empty"),
            None => return Err(Error::NoHit(t_end)),
        };
        Ok(BoundCurve {
            values: sol.states.iter().map(|y| y[0].min(1.0)).collect(),
            w_values: sol.states.iter().map(|y| y[1].exp()).collect(),
            slopes,
            grid: sol.times,
            hitting_time: hit,
        })
    };
    let lower = to_curve(lower_sol, &lower_rhs)?;
    let upper = to_curve(upper_sol, &upper_rhs)?;
    let lower_clamp_time = lower
        .grid
        .iter()
        .zip(lower.values.iter().zip(&lower.w_values))
        .find(|(t, (l, w))| lower_drive(**t, &[**l, w.ln()]) < 0.0)
        .map(|(t, _)| *t);
    Ok(BoundCurves {
        c,
        t_lower: upper.hitting_time,
        t_upper: lower.hitting_time,
        lower,
        upper,
        lower_clamp_time,
    })
}
