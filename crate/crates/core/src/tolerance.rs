//! Numerical tolerances used across the crate.
//!
//! Flux magnitudes at different grid points span several orders of
//! magnitude, so every absolute threshold lives here where it can be audited.

/// Maximum elementwise deviation of `A` from `A†` for an operator to count as Hermitian.
pub const HERMITIAN: f64 = 1e-10;

/// Allowed deviation of a density matrix trace from one.
pub const TRACE: f64 = 1e-10;

/// Most negative eigenvalue tolerated in a density matrix.
pub const MIN_EIGENVALUE: f64 = -1e-10;

/// Reconstruction error of a Hermitian eigendecomposition.
pub const SPECTRAL_RECONSTRUCTION: f64 = 1e-9;

/// Eigenvalue floor applied before taking a logarithm (`0 log 0 -> 0`).
pub const LOG_FLOOR: f64 = 1e-14;

/// Maximum generator residual of an accepted steady state.
pub const STEADY_STATE_RESIDUAL: f64 = 1e-9;

/// Second-smallest singular value of the Liouvillian below which the
/// steady state is considered non-unique.
pub const UNIQUENESS_GAP: f64 = 1e-8;

/// Trace drift during time integration that aborts the run.
pub const TRACE_DRIFT: f64 = 1e-6;

/// Imaginary residue permitted on analytically real traces.
pub const IMAGINARY_RESIDUE: f64 = 1e-10;

/// First-law and entropy-balance residual at a steady state.
pub const BALANCE: f64 = 1e-9;

/// Deadband below which a heat flux counts as zero.
pub const FLUX_DEADBAND: f64 = 1e-10;

/// Entropy-flux zero threshold.
pub const ENTROPY_FLUX_ZERO: f64 = 1e-9;

/// Minimum allowed entropy production on a sweep.
pub const CLAUSIUS_FLOOR: f64 = -1e-12;

/// Agreement between null-space and long-time-integration steady states (trace distance).
pub const SOLVER_AGREEMENT: f64 = 1e-7;

/// Deviation of the total engine efficiency from one.
pub const UNIT_EFFICIENCY: f64 = 1e-8;

/// Relative error on steady-state population ratios.
pub const POPULATION_RATIO: f64 = 1e-8;
