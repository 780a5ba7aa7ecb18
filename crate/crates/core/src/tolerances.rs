//! Numeric tolerances shared by the engine, the checks and the tests.

/// Slack allowed on every checked inequality (absolute, on distances).
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Final distance at which a trajectory counts as having reached its limit.
pub const CONSENSUS_TOL: f64 = 1e-6;

/// Window tolerance for deciding that a degree schedule has stabilized.
pub const STABILIZATION_TOL: f64 = 1e-12;

/// Roundoff allowed on ball containment and on weight sums.
pub const ROUNDOFF: f64 = 1e-12;
