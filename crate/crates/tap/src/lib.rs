//! Modelling and solving the assignment of two-subject teachers to schools
//! with per-subject capacities.
//!
//! Each applicant teaches a pair of distinct subjects and ranks acceptable
//! schools; each school has a partial capacity per subject and ranks its
//! applicants either in one linear list or separately per subject. The crate
//! provides:
//!
//! * [`model`]: the instance/matching types, validation, occupancy views,
//!   and canonical JSON document formats;
//! * [`stability`]: blocking-pair detection under the linear and the
//!   subject-specific definitions, with witnesses;
//! * [`solvers`]: serial dictatorship for applicant master lists, its dual
//!   for school master lists (each computes the unique stable matching of
//!   such markets), exhaustive stable-matching enumeration, and
//!   minimum-blocking-pair search — existence of a stable matching is
//!   NP-complete in general, so the exhaustive solvers carry explicit node
//!   budgets and report inconclusive outcomes rather than guessing;
//! * [`reductions`]: the (2,2)-E3-SAT model with a brute-force oracle, two
//!   instance constructions with forward and backward witness maps, and the
//!   disjoint-union amplifier;
//! * [`gen`]: seeded random instances and matchings.

mod ctx;
pub mod gen;
pub mod model;
pub mod reductions;
pub mod solvers;
pub mod stability;

pub use model::{
    parse_instance, parse_matching, serialize_instance, serialize_matching, Applicant, Instance,
    Matching, Mode, ModelError, Occupancy, School,
};
pub use solvers::{
    dual_serial_dictatorship, enumerate_stable, min_blocking_pairs, serial_dictatorship,
};
pub use stability::{find_blocking_pairs, is_stable, BlockingPair, Condition, StabilityReport};
