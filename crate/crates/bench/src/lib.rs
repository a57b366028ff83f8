//! Fixtures shared by the benchmarks.

use delaywave_core::{preset, solve_wave, AuditedBeta, Grid, ReactionModel, SolveOptions, WaveProfile};

pub struct Fixture {
    pub model: ReactionModel,
    pub profile: WaveProfile,
    pub beta: AuditedBeta,
}

/// Solved profile of a preset at its default speed with a Lipschitz shift on the observed box.
pub fn solved(name: &str) -> Fixture {
    let p = preset(name).expect("known preset");
    let speed = p.speed.expect("preset has a speed");
    let (profile, _) = solve_wave(&p.model, speed, &SolveOptions::default()).expect("preset solves");
    let upper: Vec<f64> = profile.max_values().iter().map(|v| v.max(1.0)).collect();
    let beta = p.model.lipschitz_beta(&upper).expect("finite shift");
    Fixture { model: p.model, profile, beta }
}

/// Uniform grid starting at zero.
pub fn step_grid(len: usize, h: f64) -> Grid {
    Grid::new(0.0, h, len).expect("valid grid")
}
