//! Central tolerance and budget constants.
//!
//! Every numeric gate in the library reads from here so that the values are
//! pinned in one place. Operations that need a different setting take it as
//! an explicit parameter; these are only the defaults.

/// Slack allowed in the CAT(0) comparison inequality. Distances enter through
/// `sqrt`/`acosh`, so a handful of ulps can accumulate; 1e-8 is far above
/// round-off yet far below any genuine curvature violation at unit scale.
pub const TOL_CMP: f64 = 1e-8;

/// Interval width (in the curve parameter t) at which one-dimensional
/// golden-section searches stop.
pub const TOL_1D: f64 = 1e-10;

/// Base relative tolerance for convexity checks. Scaled by
/// `1 + |f(x0)| + |f(x1)|` at each sampled triple.
pub const TOL_CVX: f64 = 1e-9;

/// Objective-gap certificate threshold for the prox solver.
pub const TOL_MIN: f64 = 1e-10;

/// Point-distance tolerance for comparing minimizers.
pub const TOL_POINT: f64 = 1e-8;

/// Tolerance for slope estimates and slope-based inequalities.
pub const TOL_SLOPE: f64 = 1e-6;

/// Agreement tolerance between lower and upper directional-derivative
/// estimates of a convex function.
pub const TOL_DD: f64 = 1e-6;

/// Default iteration budget for the prox solver (line-search rounds).
pub const MAX_ITER: usize = 10_000;

/// Default tail tolerance for sequence diagnostics.
pub const TOL_SEQ: f64 = 1e-2;

/// Default tail window for sequence diagnostics.
pub const N_MIN: usize = 64;
pub const N_MAX: usize = 256;

/// Default resolvent parameter grid, descending.
pub const LAMBDA_GRID: [f64; 4] = [1.0, 0.5, 0.1, 0.01];

/// Radii below which a spider point counts as the origin, regardless of leg.
pub const SPIDER_ORIGIN_EPS: f64 = 1e-12;

/// Slope magnitude treated as divergent by asymptotic slope profiling.
pub const SLOPE_CAP: f64 = 1e6;

/// Node count for the composite midpoint quadrature in the envelope
/// integral identity.
pub const QUAD_NODES: usize = 1024;

/// Default bound used when checking that a point sequence stays bounded.
pub const RADIUS_BOUND: f64 = 1e6;
