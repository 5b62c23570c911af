//! Shared numeric tolerances. Structural predicates (unitarity, isometry,
//! positivity, Hermiticity) use [`STRUCT`]; anything assembled from several
//! floating-point computations is compared at [`COMPOSED`].

/// Tolerance for structural predicates on single operators.
pub const STRUCT: f64 = 1e-9;

/// Tolerance for outputs of composed computations (dilations, Choi matrices).
pub const COMPOSED: f64 = 1e-8;

/// Jacobi sweep convergence threshold on the off-diagonal Frobenius norm.
pub const EIG_OFFDIAG: f64 = 1e-12;

/// Maximum Jacobi sweeps before giving up.
pub const EIG_MAX_SWEEPS: usize = 100;

/// Eigenvalues below this are treated as zero rank when extracting Kraus
/// operators from a Choi matrix.
pub const EIG_DROP: f64 = 1e-10;

/// Gram-Schmidt completion skips candidate vectors whose residual is smaller.
pub const GS_RESIDUAL: f64 = 1e-6;

/// Negative eigenvalues in [-STRUCT, 0) are clamped to zero inside psd_sqrt.
pub const PSD_CLAMP: f64 = -STRUCT;

/// Trace bookkeeping (channel outputs may not gain trace beyond this).
pub const TRACE: f64 = 1e-10;
