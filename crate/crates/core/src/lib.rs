//! Exploration processes (random sequential adsorption) on Erdős–Rényi and
//! random geometric graphs: simulators, fluid and diffusion limits, coupled
//! bounding processes and Monte Carlo checks.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exploration;
pub mod export;
pub mod fluid;
pub mod graph;
pub mod harness;
pub mod ode;
pub mod pool;
pub mod region;
pub mod rng;
pub mod rsa;
pub mod stats;

pub use error::{Error, Result};
pub use exploration::{
    binomial_poisson_gap, explore_graph, martingale_residual, martingale_residual_of_path, scaled_trajectory,
    simulate_er_chain, ExplorationState, MartingaleResidual, PmfGap, ScaledTrajectory, Trajectory, VertexState,
};
pub use fluid::{
    er_error_bound, er_fluid_closed_form, er_jamming_stats, er_variance_closed_form, hitting_time_variance,
    integrate_fluid, integrate_variance, integrate_variance_with, small_c_expansion, ErrorBoundReport, FluidCurve,
    JammingStats, VarianceCurve,
};
pub use graph::{
    ball_volume, build_rgg, sample_er_graph, sample_point_cloud, AdjacencyGraph, BoxGeometry, CountMode, ErParams,
    NeighborMethod, Point, PointCloud, SpatialGrid,
};
pub use harness::{
    clt_study, diffusion_variance_check, estimate_jamming, fluid_envelope_check, run_coupled_replications,
    run_replications, run_rsa_replications, run_trajectories, CltReport, DiffusionReport, EnvelopeReport, Model,
    ModelParams, Replicate, RunSpec, TailCheck, VarianceRow,
};
pub use ode::OdeSettings;
pub use region::{step_area, ExploredRegion, IntervalSet, RasterMask};
pub use rng::{child_rng, replicate_rng, SimRng};
pub use rsa::{
    check_volume_bounds, integrate_bounds, integrate_bounds_with_factor, run_coupled, run_coupled_lower,
    run_coupled_upper, run_rsa, upper_closed_form, AlphaVolume, BoundCurve, BoundCurves, CheckOutcome, CoupledRun,
    RsaConfig, RsaRun, StepVolumeCheck, VolumeBoundReport,
};
pub use stats::{ks_normal, ks_one_sample, ks_two_sample, KsResult, SummaryStats};
