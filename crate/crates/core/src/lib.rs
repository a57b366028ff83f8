pub mod error;
pub mod bounds;
pub mod continuation;
pub mod kernel;
pub mod model;
pub mod output;
pub mod pde;
pub mod presets;
pub mod rectangles;
pub mod wave;

pub use error::{Result, WaveError};
pub use kernel::{Atom, DelayKernel, KernelSplit};
pub use model::{AuditedBeta, ConstantHistory, EquilibriumSet, History, Reaction, ReactionModel};
pub use bounds::{build_bounds, critical_speed, decay_rates, select_eta, select_q, verify_bound_inequalities, BoundCheckReport, BoundPair};
pub use wave::{solve_wave, Grid, LeftTail, SolveOptions, SolveReport, WaveProfile};
pub use rectangles::{limit_verdict, verify_strict_contraction, ContractionReport, FamilyKind, LimitVerdict, RectangleFamily};
pub use pde::{advection_check, nonexistence_probe, simulate, spreading_speed, AdvectionResult, HistoryBuffer, ProbeVerdict, SimOptions, SpaceTimeField};
pub use continuation::{continuation_options, critical_wave, ContinuationStep, CriticalResult, ScalarCriticalSpec};
pub use presets::{preset, Preset, PRESET_NAMES};
