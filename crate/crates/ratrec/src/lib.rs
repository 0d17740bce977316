//! Analysis toolkit for positive solutions of generalized rational recurrences
//!
//! ```text
//! x[k+1] = A[k] + sum_i B[i][k] * x[k+1-ell_i]^p_i / x[k+1-s_i]^r_i
//! ```
//!
//! The crate is organised around five areas:
//!
//! - [`model`] — the recurrence parameterization, admissibility of initial
//!   windows, and the exponent-extreme selections used by the interval
//!   certificates.
//! - [`dynamics`] — trajectory simulation for the recurrence and its inverse,
//!   envelope sequences, and divergence/oscillation detectors.
//! - [`bounds`] — invariant-interval boundedness certificates and a grid
//!   search for certified `[m, M]` intervals.
//! - [`equilibrium`] — location and structural classification of equilibrium
//!   points of the limiting equation.
//! - [`stability`] — linearized characteristic polynomials, Schur stability
//!   via companion-matrix eigenvalues cross-checked by a Jury-type table, and
//!   a sampled Rouché comparison test.

pub mod bounds;
pub mod dynamics;
pub mod equilibrium;
pub mod model;
pub mod stability;

pub use bounds::{
    boundedness_by_exponent, check_certificate_cor22, check_certificate_cor23,
    check_certificate_general, check_certificate_q1, inverse_bounds, search_certificate,
    BoundCertificate, BoundsError, CertificateVariant, CoefficientBands, ExponentBoundedness,
    SearchBox, Verdict,
};
pub use dynamics::{
    detect_divergence, detect_oscillation, envelope, envelope_windowed, simulate,
    simulate_inverse, DivergenceReason, DivergenceReport, DynamicsError, EnvelopePair,
    EnvelopeVariant, Halt, HaltReason, OscillationReport, Trajectory,
};
pub use equilibrium::{
    classify_structure, equilibrium_interval_bounds, equilibrium_residual,
    first_order_stability_condition, find_equilibria, EquilibriumError, EquilibriumPoint,
    FirstOrderStability, IntervalBounds, LimitSpec, LimitTerm, PointKind, StructureFlags,
    StructureReport,
};
pub use model::{
    AdmissibilityReport, CaseTag, CoefficientModel, ExponentSelection, InitialConditions,
    ModelError, RecurrenceSpec, Term,
};
pub use stability::{
    characteristic_polynomial, classify_equilibria, envelope_polynomials, jury_is_stable,
    rouche_compare, schur_stable, CharPolynomial, EnvelopeSide, LagPairing, Provenance,
    RoucheOutcome, RoucheVerdict, Stability, StabilityError, StabilityVerdict,
};
