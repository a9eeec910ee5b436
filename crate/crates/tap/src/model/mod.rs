//! Instance and matching model: the domain types, structural validation,
//! derived occupancy views, and the canonical JSON document formats.
//!
//! An instance holds a nonempty subject set, applicants characterized by a
//! pair of distinct subjects (their type) plus a strict preference list over
//! acceptable schools, and schools with one nonnegative partial capacity per
//! subject. School preferences are either a single linear list (`linear`
//! mode) or one list per subject (`subject_specific` mode); in both cases a
//! school ranks exactly the applicants that find it acceptable. Optional
//! master lists constrain every individual list to be a restriction of a
//! common order.
//!
//! Instances and matchings are immutable once validated; every operation in
//! this crate is a pure function of its inputs.

mod io;
mod valid;

pub use io::{parse_instance, parse_matching, serialize_instance, serialize_matching};
pub use valid::{occupancy, validate_matching, ValidityReport, Violation};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type SubjectId = String;
pub type ApplicantId = String;
pub type SchoolId = String;

/// Shape of the schools' preference information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Each school holds one linear list over its acceptable applicants.
    Linear,
    /// Each school holds one list per subject it could compare applicants in.
    SubjectSpecific,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Applicant {
    pub id: ApplicantId,
    /// The two distinct subjects this applicant teaches. Normalized to
    /// subject declaration order during validation.
    #[serde(rename = "type")]
    pub subject_pair: [SubjectId; 2],
    /// Acceptable schools, most preferred first.
    pub prefs: Vec<SchoolId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct School {
    pub id: SchoolId,
    /// Partial capacity per subject; a missing entry means 0. Zero entries
    /// are dropped during normalization so equal instances have equal maps.
    pub capacities: BTreeMap<SubjectId, u32>,
    /// Linear preference list (`linear` mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefs: Option<Vec<ApplicantId>>,
    /// Per-subject preference lists (`subject_specific` mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefs_by_subject: Option<BTreeMap<SubjectId, Vec<ApplicantId>>>,
}

impl School {
    /// Partial capacity for `subject`, defaulting to 0.
    pub fn capacity(&self, subject: &str) -> u32 {
        self.capacities.get(subject).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub mode: Mode,
    pub subjects: Vec<SubjectId>,
    pub applicants: Vec<Applicant>,
    pub schools: Vec<School>,
    /// Common order of all applicants from which every school list derives.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_list_applicants: Option<Vec<ApplicantId>>,
    /// Common order of all schools from which every applicant list derives.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_list_schools: Option<Vec<SchoolId>>,
    /// Per-subject common orders of the applicants teaching that subject.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_lists_by_subject: Option<BTreeMap<SubjectId, Vec<ApplicantId>>>,
}

impl Instance {
    pub fn applicant(&self, id: &str) -> Option<&Applicant> {
        self.applicants.iter().find(|a| a.id == id)
    }

    pub fn school(&self, id: &str) -> Option<&School> {
        self.schools.iter().find(|s| s.id == id)
    }
}

/// Converts a validated linear instance to subject-specific form by
/// restricting each school's single list per subject (and an applicant
/// master list, if any, to per-subject master lists). Both stability
/// definitions coincide on instances of this shape.
pub fn to_subject_specific(inst: &Instance) -> Instance {
    assert_eq!(inst.mode, Mode::Linear, "input must be a linear instance");
    let teaches = |aid: &str, p: &str| {
        inst.applicant(aid)
            .map(|a| a.subject_pair.contains(&p.to_owned()))
            .unwrap_or(false)
    };
    let schools = inst
        .schools
        .iter()
        .map(|s| {
            let linear = s.prefs.as_deref().unwrap_or(&[]);
            let by_subject: BTreeMap<SubjectId, Vec<ApplicantId>> = inst
                .subjects
                .iter()
                .filter_map(|p| {
                    let list: Vec<ApplicantId> = linear
                        .iter()
                        .filter(|a| teaches(a, p))
                        .cloned()
                        .collect();
                    (!list.is_empty()).then(|| (p.clone(), list))
                })
                .collect();
            School {
                id: s.id.clone(),
                capacities: s.capacities.clone(),
                prefs: None,
                prefs_by_subject: Some(by_subject),
            }
        })
        .collect();
    let master_lists_by_subject = inst.master_list_applicants.as_ref().map(|master| {
        inst.subjects
            .iter()
            .map(|p| {
                let list: Vec<ApplicantId> =
                    master.iter().filter(|a| teaches(a, p)).cloned().collect();
                (p.clone(), list)
            })
            .collect()
    });
    Instance {
        mode: Mode::SubjectSpecific,
        subjects: inst.subjects.clone(),
        applicants: inst.applicants.clone(),
        schools,
        master_list_applicants: None,
        master_list_schools: inst.master_list_schools.clone(),
        master_lists_by_subject,
    }
    .validate()
    .expect("restriction of a valid linear instance is valid")
}

/// A partial assignment of applicants to acceptable schools, each applicant
/// appearing at most once. Capacity feasibility is checked separately by
/// [`valid::validate_matching`].
#[derive(Debug, Clone, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matching {
    pairs: Vec<(ApplicantId, SchoolId)>,
}

impl Matching {
    /// Builds a matching from pairs, rejecting duplicate applicants.
    pub fn new(pairs: Vec<(ApplicantId, SchoolId)>) -> Result<Self, ModelError> {
        let mut seen = BTreeSet::new();
        for (a, _) in &pairs {
            if !seen.insert(a.clone()) {
                return Err(ModelError::DuplicateAssignment { applicant: a.clone() });
            }
        }
        Ok(Matching { pairs })
    }

    pub fn empty() -> Self {
        Matching { pairs: Vec::new() }
    }

    pub fn pairs(&self) -> &[(ApplicantId, SchoolId)] {
        &self.pairs
    }

    pub fn school_of(&self, applicant: &str) -> Option<&str> {
        self.pairs
            .iter()
            .find(|(a, _)| a == applicant)
            .map(|(_, s)| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, applicant: &str, school: &str) -> bool {
        self.school_of(applicant) == Some(school)
    }
}

/// Matchings are sets of pairs; the stored order is presentation only.
impl PartialEq for Matching {
    fn eq(&self, other: &Self) -> bool {
        let a: BTreeSet<_> = self.pairs.iter().collect();
        let b: BTreeSet<_> = other.pairs.iter().collect();
        a == b
    }
}

/// Occupancy of one school under a matching: the assigned set and the
/// derived per-subject and per-type-pair views.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Occupancy {
    pub school: SchoolId,
    /// All assignees, in applicant input order.
    pub assigned: Vec<ApplicantId>,
    /// For every subject of the instance: assignees teaching it vs capacity.
    pub per_subject: BTreeMap<SubjectId, SubjectUse>,
    /// Assignees whose type is exactly a pair, keyed "p,r" in subject
    /// declaration order; only nonempty pairs are listed.
    pub by_pair: BTreeMap<String, Vec<ApplicantId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubjectUse {
    pub used: u32,
    pub capacity: u32,
    pub assigned: Vec<ApplicantId>,
}

impl Occupancy {
    /// The set `M_p(s)` for this school.
    pub fn subject_set(&self, subject: &str) -> &[ApplicantId] {
        self.per_subject
            .get(subject)
            .map(|u| u.assigned.as_slice())
            .unwrap_or(&[])
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("document is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("subject set is empty")]
    NoSubjects,
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("unknown {kind} `{id}` referenced by {context}")]
    UnknownId {
        kind: &'static str,
        id: String,
        context: String,
    },
    #[error("applicant `{applicant}` must have exactly two distinct subjects")]
    BadTypePair { applicant: ApplicantId },
    #[error("duplicate entry `{entry}` in preference list of {owner}")]
    DuplicatePref { owner: String, entry: String },
    #[error("school `{school}` uses {found} preferences but the instance mode requires {expected}")]
    ModeMismatch {
        school: SchoolId,
        expected: &'static str,
        found: &'static str,
    },
    #[error("{list} of school `{school}` must rank exactly the applicants that rank it: {detail}")]
    ListMismatch {
        school: SchoolId,
        list: String,
        detail: String,
    },
    #[error("master list of {kind} must contain exactly {expected}; {detail}")]
    MasterListScope {
        kind: String,
        expected: String,
        detail: String,
    },
    #[error("{list} of `{owner}` is not a restriction of the master list (offending entry `{entry}`)")]
    MasterListOrder {
        owner: String,
        list: String,
        entry: String,
    },
    #[error("master list of {kind} is not allowed in {mode} mode")]
    MasterListMode { kind: String, mode: &'static str },
    #[error("applicant `{applicant}` is assigned more than once")]
    DuplicateAssignment { applicant: ApplicantId },
    #[error("pair ({applicant}, {school}) is not acceptable: the applicant does not rank the school")]
    Unacceptable {
        applicant: ApplicantId,
        school: SchoolId,
    },
    #[error("matching is not valid: {0}")]
    InvalidMatching(String),
}

/// True iff `sub` appears inside `order` in identical relative order.
pub(crate) fn is_subsequence_of(sub: &[String], order_pos: &BTreeMap<&str, usize>) -> Option<String> {
    let mut last: Option<usize> = None;
    for item in sub {
        match order_pos.get(item.as_str()) {
            Some(&p) => {
                if let Some(prev) = last {
                    if p <= prev {
                        return Some(item.clone());
                    }
                }
                last = Some(p);
            }
            None => return Some(item.clone()),
        }
    }
    None
}
