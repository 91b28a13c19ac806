//! Construction and verification kernels for continuous solutions of the
//! scalar balance law ∂t u + ∂x f(u) = g with a non-convex (or degenerate
//! convex) flux.
//!
//! The crate builds four explicit solution fields around Cantor-type
//! degeneracies — a quadratic-flux field whose Lagrangian parameterizations
//! all carry a Cantor part, a convex-flat-flux field that is nowhere
//! differentiable along characteristics on a fat set, the inverse-Cantor-flux
//! stationary field, and the cubic-root field — together with the machinery
//! needed to check the Eulerian, Lagrangian and broad source notions against
//! each other: exact dyadic/rational region hierarchies, C² junction curves,
//! region-aware characteristic tracing, and weak-form residual checks.

pub mod characteristics;
pub mod error;
pub mod field;
pub mod flux;
pub mod junction;
pub mod numerics;
pub mod regions;
pub mod sources;

pub use characteristics::{
    adversarial_path, build_lagrangian_param, count_cover_intersections, diff_quotient_probe,
    extremal_trace, lipschitz_probe, trace, CharacteristicPath, Direction, Extremum,
    LagrangianParam, Provenance,
};
pub use error::CoreError;
pub use field::{ContinuityReport, Notion, Scenario, SolutionField, SourceValue};
pub use flux::{CantorVitaliMap, FatCantorSet, FluxModel};
pub use junction::JunctionCurve;
pub use numerics::{DyadicScalar, QuadratureResult};
pub use sources::{
    along_path_check, estimate_broad_source, estimate_broad_source_along,
    incompatibility_witness, weak_residual, BroadEstimate, CheckRow, IncompatibilityReport,
    SourceCheckReport, TestFunction,
};
pub use regions::{
    level_params, CorridorKind, LevelParams, Location, Rect, RegionAddress, RegionTree, Variant,
};
