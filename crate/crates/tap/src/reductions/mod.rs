//! Reductions from (2,2)-E3-SAT to stable-matching existence, with witness
//! maps in both directions, plus the disjoint-union amplifier.
//!
//! Two constructions are provided: one targeting linear school preferences
//! (three subjects, partial capacities at most 2, applicant lists of length
//! at most 3) and one targeting subject-specific preferences (partial
//! capacities at most 1, all lists derived from per-subject master lists and
//! a single master list of schools). Each emits a [`ReductionBundle`]
//! carrying the instance together with the bookkeeping needed to convert
//! satisfying assignments into stable matchings and back.

mod amplify;
mod formula;
mod tap_linear;
mod tapss;

pub use amplify::disjoint_union;
pub use formula::{
    parse_dimacs, random_223, sat_brute_force, serialize_dimacs, validate_223, Clause,
    CnfFormula223, FormulaError, Lit,
};
pub use tap_linear::{reduce_to_tap, tap_assignment_from_matching, tap_matching_from_assignment};
pub use tapss::{
    reduce_to_tapss, tapss_assignment_from_matching, tapss_matching_from_assignment,
};

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::model::{ApplicantId, Instance, ModelError, SchoolId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    TapTheorem1,
    Tapss,
}

/// Ids created for one variable or one clause.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IdGroup {
    pub applicants: Vec<ApplicantId>,
    pub schools: Vec<SchoolId>,
}

/// The applicant-completeness gadget attached to one base applicant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Augmentation {
    pub base: ApplicantId,
    pub prime: ApplicantId,
    pub double_prime: ApplicantId,
    pub school: SchoolId,
}

/// The per-variable pair sets whose containment encodes the truth value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TiFi {
    pub t: Vec<(ApplicantId, SchoolId)>,
    pub f: Vec<(ApplicantId, SchoolId)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GadgetIndex {
    pub variables: Vec<IdGroup>,
    pub clauses: Vec<IdGroup>,
    pub augmentations: Vec<Augmentation>,
}

/// A constructed instance plus everything needed to run the witness maps.
#[derive(Debug, Clone)]
pub struct ReductionBundle {
    pub kind: ReductionKind,
    pub formula: CnfFormula223,
    pub instance: Instance,
    /// For each occurrence applicant, the school wired to its occurrence.
    pub occurrence_map: BTreeMap<ApplicantId, SchoolId>,
    pub gadget_index: GadgetIndex,
    pub ti_fi: Vec<TiFi>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    kind: ReductionKind,
    occurrence_map: &'a BTreeMap<ApplicantId, SchoolId>,
    gadget_index: &'a GadgetIndex,
    ti_fi: &'a [TiFi],
}

impl ReductionBundle {
    /// JSON sidecar with the bookkeeping (everything but the instance).
    pub fn sidecar_document(&self) -> String {
        let sidecar = Sidecar {
            kind: self.kind,
            occurrence_map: &self.occurrence_map,
            gadget_index: &self.gadget_index,
            ti_fi: &self.ti_fi,
        };
        let mut out = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        out.push('\n');
        out
    }
}

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("constructed instance failed validation: {0}")]
    Model(#[from] ModelError),
    #[error("assignment has {found} values, formula has {expected} variables")]
    AssignmentLength { expected: usize, found: usize },
    #[error("assignment does not satisfy clause {clause}")]
    NotSatisfying { clause: usize },
    #[error("matching is not stable; witness extraction requires stability (first blocking pair: {0})")]
    NotStable(String),
    #[error("neither T nor F pairs are contained in the matching for variable {var}; stability should preclude this")]
    DichotomyViolation { var: usize },
    #[error("base applicant `{applicant}` is unassigned in a supposedly stable matching")]
    IncompleteBase { applicant: ApplicantId },
    #[error("extracted assignment fails clause {clause}; construction or checker defect")]
    ExtractionUnsatisfied { clause: usize },
}
