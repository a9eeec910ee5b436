//! Index-based view of a validated instance. All solver and checker loops
//! run on integer indices; ids only appear at the API boundary.

use std::collections::HashMap;

use crate::model::{Instance, Matching, Mode, ModelError};

pub(crate) struct Ctx<'a> {
    pub inst: &'a Instance,
    pub applicant_idx: HashMap<&'a str, usize>,
    pub school_idx: HashMap<&'a str, usize>,
    /// Applicant type as a pair of subject indices, low index first.
    pub types: Vec<(usize, usize)>,
    /// Applicant preference lists as school indices, most preferred first.
    pub prefs: Vec<Vec<usize>>,
    /// prefs_rank[a][s] = position of school s in a's list.
    pub prefs_rank: Vec<HashMap<usize, usize>>,
    /// caps[s][p] = partial capacity of school s in subject p.
    pub caps: Vec<Vec<u32>>,
    /// Linear mode: rank of each applicant in the school's single list.
    pub linear_rank: Vec<HashMap<usize, usize>>,
    /// Subject-specific mode: rank per school per subject.
    pub subject_rank: Vec<Vec<HashMap<usize, usize>>>,
}

/// Assignment by applicant index; `None` means unassigned.
pub(crate) type Assignment = Vec<Option<usize>>;

/// Per-school occupancy maintained incrementally by the solvers.
pub(crate) struct Load {
    /// used[s][p] = |M_p(s)|.
    pub used: Vec<Vec<u32>>,
    /// Assignees of each school in applicant index order.
    pub assigned: Vec<Vec<usize>>,
}

impl<'a> Ctx<'a> {
    /// Builds the index. The instance must already be validated; internal
    /// inconsistencies panic rather than error.
    pub fn new(inst: &'a Instance) -> Self {
        let subject_idx: HashMap<&str, usize> = inst
            .subjects
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let applicant_idx: HashMap<&str, usize> = inst
            .applicants
            .iter()
            .enumerate()
            .map(|(i, a)| (a.id.as_str(), i))
            .collect();
        let school_idx: HashMap<&str, usize> = inst
            .schools
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect();

        let types = inst
            .applicants
            .iter()
            .map(|a| {
                let p = subject_idx[a.subject_pair[0].as_str()];
                let r = subject_idx[a.subject_pair[1].as_str()];
                (p.min(r), p.max(r))
            })
            .collect();

        let prefs: Vec<Vec<usize>> = inst
            .applicants
            .iter()
            .map(|a| a.prefs.iter().map(|s| school_idx[s.as_str()]).collect())
            .collect();
        let prefs_rank = prefs
            .iter()
            .map(|list| list.iter().enumerate().map(|(r, &s)| (s, r)).collect())
            .collect();

        let caps = inst
            .schools
            .iter()
            .map(|s| {
                inst.subjects
                    .iter()
                    .map(|p| s.capacity(p))
                    .collect::<Vec<_>>()
            })
            .collect();

        let mut linear_rank = Vec::with_capacity(inst.schools.len());
        let mut subject_rank = Vec::with_capacity(inst.schools.len());
        for s in &inst.schools {
            match inst.mode {
                Mode::Linear => {
                    let list = s.prefs.as_deref().unwrap_or(&[]);
                    linear_rank.push(
                        list.iter()
                            .enumerate()
                            .map(|(r, a)| (applicant_idx[a.as_str()], r))
                            .collect(),
                    );
                    subject_rank.push(Vec::new());
                }
                Mode::SubjectSpecific => {
                    linear_rank.push(HashMap::new());
                    let mut per_subject = vec![HashMap::new(); inst.subjects.len()];
                    if let Some(by_subject) = &s.prefs_by_subject {
                        for (p, list) in by_subject {
                            let pi = subject_idx[p.as_str()];
                            per_subject[pi] = list
                                .iter()
                                .enumerate()
                                .map(|(r, a)| (applicant_idx[a.as_str()], r))
                                .collect();
                        }
                    }
                    subject_rank.push(per_subject);
                }
            }
        }

        Ctx {
            inst,
            applicant_idx,
            school_idx,
            types,
            prefs,
            prefs_rank,
            caps,
            linear_rank,
            subject_rank,
        }
    }

    pub fn applicant_count(&self) -> usize {
        self.inst.applicants.len()
    }

    pub fn school_count(&self) -> usize {
        self.inst.schools.len()
    }

    pub fn subject_count(&self) -> usize {
        self.inst.subjects.len()
    }

    /// Resolves a matching into an assignment vector, rejecting unknown ids
    /// and unacceptable pairs.
    pub fn resolve(&self, m: &Matching) -> Result<Assignment, ModelError> {
        let mut asg = vec![None; self.applicant_count()];
        for (a, s) in m.pairs() {
            let ai = *self
                .applicant_idx
                .get(a.as_str())
                .ok_or_else(|| ModelError::UnknownId {
                    kind: "applicant",
                    id: a.clone(),
                    context: "matching".into(),
                })?;
            let si = *self
                .school_idx
                .get(s.as_str())
                .ok_or_else(|| ModelError::UnknownId {
                    kind: "school",
                    id: s.clone(),
                    context: "matching".into(),
                })?;
            if !self.prefs_rank[ai].contains_key(&si) {
                return Err(ModelError::Unacceptable {
                    applicant: a.clone(),
                    school: s.clone(),
                });
            }
            if asg[ai].is_some() {
                return Err(ModelError::DuplicateAssignment { applicant: a.clone() });
            }
            asg[ai] = Some(si);
        }
        Ok(asg)
    }

    /// Computes per-school load from a full assignment.
    pub fn load(&self, asg: &Assignment) -> Load {
        let mut load = Load {
            used: vec![vec![0; self.subject_count()]; self.school_count()],
            assigned: vec![Vec::new(); self.school_count()],
        };
        for (ai, slot) in asg.iter().enumerate() {
            if let Some(si) = *slot {
                let (p, r) = self.types[ai];
                load.used[si][p] += 1;
                load.used[si][r] += 1;
                load.assigned[si].push(ai);
            }
        }
        load
    }

    /// First (school, subject) whose partial capacity is exceeded.
    pub fn capacity_violation(&self, load: &Load) -> Option<(usize, usize)> {
        for si in 0..self.school_count() {
            for pi in 0..self.subject_count() {
                if load.used[si][pi] > self.caps[si][pi] {
                    return Some((si, pi));
                }
            }
        }
        None
    }

    /// Builds the public matching (pairs in applicant input order).
    pub fn matching_of(&self, asg: &Assignment) -> Matching {
        let pairs = asg
            .iter()
            .enumerate()
            .filter_map(|(ai, slot)| {
                slot.map(|si| {
                    (
                        self.inst.applicants[ai].id.clone(),
                        self.inst.schools[si].id.clone(),
                    )
                })
            })
            .collect();
        Matching::new(pairs).expect("assignment maps each applicant at most once")
    }
}
