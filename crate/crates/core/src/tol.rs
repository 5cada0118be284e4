//! Default tolerances and filtration parameters, all overridable through
//! the run configuration. One place, no ad-hoc magic numbers in the kernels.

/// Absolute eigenvalue tolerance for spectral classification.
pub const EIG: f64 = 1e-8;

/// Slack admitted on the containment spectrum(S) ⊂ [0,1].
pub const S_RANGE: f64 = 1e-9;

/// Residual tolerance for the Γ-compatibility identity
/// γ(f,g) = S(f,g) − S(Γg,Γf) checked at state construction.
pub const GAMMA_COMPAT: f64 = 1e-10;

/// Relative residual for conjugate-gradient solves.
pub const CG_RESIDUAL: f64 = 1e-12;

/// Iteration cap for CG.
pub const CG_MAX_ITER: usize = 50_000;

/// Absolute tolerance for Lanczos extreme-eigenvalue estimates.
pub const LANCZOS: f64 = 1e-10;

/// Iteration cap for Lanczos.
pub const LANCZOS_MAX_ITER: usize = 600;

/// Number of consecutive filtration indices a trend must hold before a
/// verdict may be yes/no instead of inconclusive.
pub const TREND_WINDOW: usize = 3;

/// Total decay factor over the trend window required to call an
/// eigenvalue "present in the limit".
pub const TREND_DECAY: f64 = 4.0;

/// Absolute gap below which a 1/2-eigenvalue is considered reached
/// (together with the decay trend and eigenvector localization).
pub const HALF_PRESENT: f64 = 1e-5;

/// Absolute gap above which a 1/2-eigenvalue is considered absent
/// at desk scale.
pub const HALF_ABSENT: f64 = 1e-4;

/// Required weight of the near-1/2 eigenvector on the condensate
/// direction before a non-factor verdict is certified.
pub const LOCALIZATION: f64 = 0.99;

/// Growth factor of the λ-gap (or of the topology-bound ratio) across the
/// trend window that certifies discontinuity / disjointness.
pub const GROWTH_FACTOR: f64 = 2.0;

/// Relative fraction of the fitted constant the ε-term may contribute at
/// the smallest offset for a transient verdict: |b·ε_min^c| < 0.05·a.
pub const TRANSIENT_TAIL_FRACTION: f64 = 0.05;

/// Relative stabilization of the fitted Green's limit across successive
/// radii required for a transient verdict.
pub const TRANSIENT_STABILITY: f64 = 0.02;

/// Regularization floor for occupied modes, as a multiple of ‖A‖.
pub const OCCUPATION_FLOOR_FACTOR: f64 = 1e-8;

/// Dense-path cutoff: graphs up to this many vertices use full symmetric
/// eigendecomposition in `matrix_function`; larger ones use Chebyshev/CG.
pub const DENSE_CUTOFF: usize = 2_500;

/// Gram condition-number bound before basis vectors are dropped by the
/// pivoted conditioning guard.
pub const GRAM_CONDITION: f64 = 1e12;

/// Default Gauss–Hermite order per real dimension for mixture quadrature.
pub const QUAD_ORDER: usize = 40;

/// Filtration defaults for the graph BEC pipeline: heat-smoothing times
/// follow the geometric ladder τ_j = TAU_BASE · TAU_RATIO^j capped at
/// TAU_COEF · r² for declared radius r, on an ambient truncation of radius
/// ceil(AMBIENT_COEF · √τ_max) + AMBIENT_PAD.
pub const TAU_BASE: f64 = 0.7;
pub const TAU_RATIO: f64 = 4.0;
pub const TAU_COEF: f64 = 1.3;
pub const AMBIENT_COEF: f64 = 6.5;
pub const AMBIENT_PAD: usize = 2;
