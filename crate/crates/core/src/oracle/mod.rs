//! Reference solutions and empirical bound verification.

mod bounds;
mod particles;

pub use bounds::{
    brownian_moment_bound, check_brownian_moment, check_mlp_error, check_moment_bound, check_perturbation_bounds,
    mlp_error_bound, moment_bound, perturbation_bounds, BoundCheckResult,
};
pub use particles::{particle_mean_payoff, simulate_particles, ParticleCloud, ParticleConfig};
