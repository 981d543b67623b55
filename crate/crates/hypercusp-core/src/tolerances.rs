//! Tolerances shared by the library checks and the acceptance suite.

/// Relative tolerance for algebraic identities on random floats.
pub const ALGEBRA_REL: f64 = 1e-12;
/// Paravector inverse law.
pub const PARA_INVERSE: f64 = 1e-14;
/// Idempotent identity in the complexified algebra.
pub const IDEMPOTENT: f64 = 1e-14;
/// Pseudo-determinant equality for SAV checks.
pub const PSEUDO_DET: f64 = 1e-12;
/// Floor for differential-operator defects.
pub const KERNEL_DEFECT: f64 = 1e-6;
/// Defect floor below which the step-halving order is not measured.
pub const DEFECT_NOISE_FLOOR: f64 = 1e-10;
/// Minimum observed order for an order-4 stencil.
pub const MIN_ORDER: f64 = 3.5;
/// Weinstein corpus agreement.
pub const WEINSTEIN: f64 = 1e-5;
/// Scaling map and slash transform defects.
pub const TRANSFORM_DEFECT: f64 = 1e-5;
/// Eisenstein value at the cusp.
pub const CUSP_VALUE: f64 = 1e-3;
/// Bessel-K profile fit residual.
pub const PROFILE_RESIDUAL: f64 = 1e-4;
/// Monogenic exponential profile after the Hecke limit.
pub const HECKE_PROFILE: f64 = 1e-3;
/// Maaß equation defect.
pub const MAASS_DEFECT: f64 = 1e-6;
/// Zero-mode coefficients treated as vanishing.
pub const ZERO_MODE: f64 = 1e-6;
/// Condition number beyond which a least-squares height set is rejected.
pub const MAX_CONDITION: f64 = 1e8;
/// Relative spot-check mismatch accepted as periodic; truncated coset
/// sums are periodic only up to their truncation error.
pub const PERIODICITY: f64 = 1e-2;
