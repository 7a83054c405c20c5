//! Constants measured once on the v0 machine configurations and frozen as regressions.

/// Code length of the shortest echo program.
pub const ECHO_COST: u64 = 8;

/// Kraft mass of the v0 Kraft configuration (max length 16, budget 10^3).
pub const KRAFT_MASS_V0: f64 = 0.538909912109375;

/// Largest measured cube-count constant over n ≤ 3, r ≤ 4, d ≤ 4.
pub const CUBE_COUNT_C: i64 = -1;

/// Largest measured ball-count constant over the same sweep.
pub const BALL_COUNT_C: i64 = -1;

/// Largest `K(B) − K(Q) − K(r)` over the ball family for n ≤ 3, r ≤ 4.
pub const BALL_CUBE_C: i64 = 3;

/// Largest measured LDS coding constant on the dyadic-cube LDS, n ≤ 3, r ≤ 3.
pub const LDS_CODING_C_MEASURED: i64 = 2;

/// Coding constant `c_B*` shared by the LDS blocks and the singleton (Levin) form.
pub const CODING_C: i64 = 4;

/// Largest measured precision-improvement constant over the first eight enumerated
/// one-dimensional points, r ≤ 2, s ≤ 3.
pub const PRECISION_B: i64 = 7;

/// Largest `|I_r(x:y) − I_r(y:x)|` in bits allowed on the compressor backend across the mdim sweep.
pub const MDIM_SYMMETRY_TOL: i64 = 64;

/// Lower bound on mutual-dimension slope estimates: zero less the dimension-scale slack.
pub const MDIM_RANGE_FLOOR: f64 = -0.1;
