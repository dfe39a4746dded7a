//! Bivector model of Euclidean 3-space and a hidden-handedness simulator for
//! polarization correlations of photon pairs.
//!
//! - [`ga`]: the 8-dimensional geometric algebra and its even subalgebra.
//! - [`topology`]: S³ / S² predicates, factorization, stereographic projection.
//! - [`protocol`]: outcome functions, the handedness stream and trial records.
//! - [`stats`]: correlation estimators, quantum reference and CHSH.
//! - [`verify`]: invariant suites shared by the CLI and the tests.
//! - [`report`]: CSV/JSON tables and run manifests.
//! - [`cli`]: command-line front end.

pub mod cli;
pub mod error;
pub mod ga;
pub mod protocol;
pub mod report;
pub mod sample;
pub mod stats;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
pub use ga::{
    bivector_identity_residual, even_product, geometric_product, grade_projection, mu_dot,
    oriented_product, wedge, EvenElement, Handedness, Multivector, Vector3,
};
pub use protocol::{
    alice_outcome, bob_outcome, joint_product, joint_product_closed_form, polarizer_axis,
    run_trials, run_trials_sharded, sample_mu, MuStream, PolarizerAngle, SimulationConfig,
    TrialRecord,
};
pub use stats::{
    chsh_maximize, chsh_value, joint_expectation, quantum_reference, single_expectation,
    ChshSettings, CorrelationEstimate,
};
pub use topology::{
    factorize_s3_point, is_equatorial, is_unit_s3, s2_nonclosure_witness, stereographic_project,
    stereographic_unproject, PlanePoint, S2Point,
};
