//! The wave operator, the sandwich-constrained fixed-point iteration and
//! profile diagnostics.

mod operator;
mod profile;
mod solve;

pub use operator::{apply_operator, exponents, reaction_field, residual, sup_norms, GreenOperator, LeftClosure, RightClosure};
pub use profile::{tail_ratio, Grid, LeftTail, WaveProfile};
pub use solve::{default_grid, solve_wave, Constraint, Normalization, SolveOptions, SolveReport};
