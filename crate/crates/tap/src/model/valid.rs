//! Structural validation and the matching validity report.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::ctx::Ctx;
use crate::model::{
    is_subsequence_of, Applicant, ApplicantId, Instance, Matching, Mode, ModelError, Occupancy,
    SchoolId, SubjectId, SubjectUse,
};

impl Instance {
    /// Checks every structural invariant and returns the normalized
    /// instance. Normalization: applicant types are put in subject
    /// declaration order, zero capacities and empty per-subject lists are
    /// dropped. Equal markets therefore compare and serialize identically.
    pub fn validate(mut self) -> Result<Self, ModelError> {
        if self.subjects.is_empty() {
            return Err(ModelError::NoSubjects);
        }
        let mut subject_pos: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, p) in self.subjects.iter().enumerate() {
            if subject_pos.insert(p.as_str(), i).is_some() {
                return Err(ModelError::DuplicateId { kind: "subject", id: p.clone() });
            }
        }
        let subject_pos: BTreeMap<String, usize> = subject_pos
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v))
            .collect();

        let mut applicant_ids = BTreeSet::new();
        for a in &self.applicants {
            if !applicant_ids.insert(a.id.clone()) {
                return Err(ModelError::DuplicateId { kind: "applicant", id: a.id.clone() });
            }
        }
        let mut school_ids = BTreeSet::new();
        for s in &self.schools {
            if !school_ids.insert(s.id.clone()) {
                return Err(ModelError::DuplicateId { kind: "school", id: s.id.clone() });
            }
        }

        // Applicants: type pairs and preference lists.
        for a in &mut self.applicants {
            let [p, r] = &a.subject_pair;
            if p == r {
                return Err(ModelError::BadTypePair { applicant: a.id.clone() });
            }
            let (pi, ri) = match (subject_pos.get(p.as_str()), subject_pos.get(r.as_str())) {
                (Some(&pi), Some(&ri)) => (pi, ri),
                _ => {
                    let missing = if subject_pos.contains_key(p.as_str()) { r } else { p };
                    return Err(ModelError::UnknownId {
                        kind: "subject",
                        id: missing.clone(),
                        context: format!("type of applicant `{}`", a.id),
                    });
                }
            };
            if pi > ri {
                a.subject_pair.swap(0, 1);
            }
            let mut seen = BTreeSet::new();
            for s in &a.prefs {
                if !school_ids.contains(s) {
                    return Err(ModelError::UnknownId {
                        kind: "school",
                        id: s.clone(),
                        context: format!("preference list of applicant `{}`", a.id),
                    });
                }
                if !seen.insert(s.clone()) {
                    return Err(ModelError::DuplicatePref {
                        owner: format!("applicant `{}`", a.id),
                        entry: s.clone(),
                    });
                }
            }
        }

        // Acceptable set of every school, in applicant input order.
        let acceptable: BTreeMap<SchoolId, Vec<&Applicant>> = self
            .schools
            .iter()
            .map(|s| {
                let set = self
                    .applicants
                    .iter()
                    .filter(|a| a.prefs.iter().any(|x| *x == s.id))
                    .collect();
                (s.id.clone(), set)
            })
            .collect();

        // Schools: capacities and preference shape per mode.
        for s in &mut self.schools {
            for p in s.capacities.keys() {
                if !subject_pos.contains_key(p.as_str()) {
                    return Err(ModelError::UnknownId {
                        kind: "subject",
                        id: p.clone(),
                        context: format!("capacities of school `{}`", s.id),
                    });
                }
            }
            s.capacities.retain(|_, c| *c > 0);

            let accept = &acceptable[&s.id];
            match self.mode {
                Mode::Linear => {
                    if s.prefs_by_subject.is_some() {
                        return Err(ModelError::ModeMismatch {
                            school: s.id.clone(),
                            expected: "a linear list",
                            found: "per-subject lists",
                        });
                    }
                    let list = s.prefs.as_deref().ok_or(ModelError::ModeMismatch {
                        school: s.id.clone(),
                        expected: "a linear list",
                        found: "no list",
                    })?;
                    check_exact_list(&s.id, "linear list", list, accept.iter().map(|a| &a.id))?;
                }
                Mode::SubjectSpecific => {
                    if s.prefs.is_some() {
                        return Err(ModelError::ModeMismatch {
                            school: s.id.clone(),
                            expected: "per-subject lists",
                            found: "a linear list",
                        });
                    }
                    let by_subject =
                        s.prefs_by_subject.as_mut().ok_or(ModelError::ModeMismatch {
                            school: s.id.clone(),
                            expected: "per-subject lists",
                            found: "no list",
                        })?;
                    for p in by_subject.keys() {
                        if !subject_pos.contains_key(p.as_str()) {
                            return Err(ModelError::UnknownId {
                                kind: "subject",
                                id: p.clone(),
                                context: format!("preference lists of school `{}`", s.id),
                            });
                        }
                    }
                    for p in self.subjects.iter() {
                        let expected = accept
                            .iter()
                            .filter(|a| a.subject_pair.contains(p))
                            .map(|a| &a.id);
                        static EMPTY: Vec<ApplicantId> = Vec::new();
                        let list = by_subject.get(p).unwrap_or(&EMPTY);
                        check_exact_list(&s.id, &format!("list for subject `{p}`"), list, expected)?;
                    }
                    by_subject.retain(|_, l| !l.is_empty());
                }
            }
        }
        self.validate_master_lists(&subject_pos, &applicant_ids, &school_ids)?;

        if let Some(m) = &self.master_lists_by_subject {
            if m.is_empty() {
                self.master_lists_by_subject = None;
            }
        }

        Ok(self)
    }

    fn validate_master_lists(
        &self,
        subject_pos: &BTreeMap<String, usize>,
        applicant_ids: &BTreeSet<ApplicantId>,
        school_ids: &BTreeSet<SchoolId>,
    ) -> Result<(), ModelError> {
        if let Some(master) = &self.master_list_applicants {
            if self.mode != Mode::Linear {
                return Err(ModelError::MasterListMode {
                    kind: "applicants".into(),
                    mode: "subject_specific",
                });
            }
            check_master_scope("applicants", master, applicant_ids)?;
            let pos: BTreeMap<&str, usize> =
                master.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
            for s in &self.schools {
                let list = s.prefs.as_deref().unwrap_or(&[]);
                if let Some(entry) = is_subsequence_of(list, &pos) {
                    return Err(ModelError::MasterListOrder {
                        owner: s.id.clone(),
                        list: "linear list".into(),
                        entry,
                    });
                }
            }
        }

        if let Some(by_subject) = &self.master_lists_by_subject {
            if self.mode != Mode::SubjectSpecific {
                return Err(ModelError::MasterListMode {
                    kind: "subjects".into(),
                    mode: "linear",
                });
            }
            for p in by_subject.keys() {
                if !subject_pos.contains_key(p) {
                    return Err(ModelError::UnknownId {
                        kind: "subject",
                        id: p.clone(),
                        context: "master lists by subject".into(),
                    });
                }
            }
            for p in &self.subjects {
                let typed: BTreeSet<ApplicantId> = self
                    .applicants
                    .iter()
                    .filter(|a| a.subject_pair.contains(p))
                    .map(|a| a.id.clone())
                    .collect();
                static EMPTY: Vec<ApplicantId> = Vec::new();
                let master = by_subject.get(p).unwrap_or(&EMPTY);
                check_master_scope(&format!("subject `{p}`"), master, &typed)?;
                let pos: BTreeMap<&str, usize> =
                    master.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
                for s in &self.schools {
                    static NONE: Vec<ApplicantId> = Vec::new();
                    let list = s
                        .prefs_by_subject
                        .as_ref()
                        .and_then(|m| m.get(p))
                        .unwrap_or(&NONE);
                    if let Some(entry) = is_subsequence_of(list, &pos) {
                        return Err(ModelError::MasterListOrder {
                            owner: s.id.clone(),
                            list: format!("list for subject `{p}`"),
                            entry,
                        });
                    }
                }
            }
        }

        if let Some(master) = &self.master_list_schools {
            check_master_scope("schools", master, school_ids)?;
            let pos: BTreeMap<&str, usize> =
                master.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
            for a in &self.applicants {
                if let Some(entry) = is_subsequence_of(&a.prefs, &pos) {
                    return Err(ModelError::MasterListOrder {
                        owner: a.id.clone(),
                        list: "preference list".into(),
                        entry,
                    });
                }
            }
        }
        Ok(())
    }
}

fn check_exact_list<'x>(
    school: &str,
    list_name: &str,
    list: &[ApplicantId],
    expected: impl Iterator<Item = &'x ApplicantId>,
) -> Result<(), ModelError> {
    let expected: BTreeSet<&ApplicantId> = expected.collect();
    let mut seen = BTreeSet::new();
    for a in list {
        if !expected.contains(a) {
            return Err(ModelError::ListMismatch {
                school: school.to_owned(),
                list: list_name.to_owned(),
                detail: format!("`{a}` does not rank this school in this subject"),
            });
        }
        if !seen.insert(a) {
            return Err(ModelError::DuplicatePref {
                owner: format!("school `{school}` ({list_name})"),
                entry: a.clone(),
            });
        }
    }
    if seen.len() != expected.len() {
        let missing = expected
            .iter()
            .find(|a| !seen.contains(**a))
            .expect("some expected applicant is unranked");
        return Err(ModelError::ListMismatch {
            school: school.to_owned(),
            list: list_name.to_owned(),
            detail: format!("`{missing}` ranks this school but is not ranked"),
        });
    }
    Ok(())
}

fn check_master_scope(
    kind: &str,
    master: &[String],
    expected: &BTreeSet<String>,
) -> Result<(), ModelError> {
    let mut seen = BTreeSet::new();
    for id in master {
        if !expected.contains(id) {
            return Err(ModelError::MasterListScope {
                kind: kind.to_owned(),
                expected: "the declared ids".into(),
                detail: format!("`{id}` is out of scope"),
            });
        }
        if !seen.insert(id.clone()) {
            return Err(ModelError::MasterListScope {
                kind: kind.to_owned(),
                expected: "each id once".into(),
                detail: format!("`{id}` listed twice"),
            });
        }
    }
    if seen.len() != expected.len() {
        let missing = expected.iter().find(|a| !seen.contains(*a)).expect("missing id");
        return Err(ModelError::MasterListScope {
            kind: kind.to_owned(),
            expected: "every declared id".into(),
            detail: format!("`{missing}` is missing"),
        });
    }
    Ok(())
}

/// One defect found by [`validate_matching`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The applicant does not rank the school it is assigned to.
    Unacceptable { applicant: ApplicantId, school: SchoolId },
    /// |M_p(s)| exceeds the partial capacity c_p(s).
    CapacityExceeded {
        school: SchoolId,
        subject: SubjectId,
        used: u32,
        capacity: u32,
    },
}

/// Verdict plus the full per-school occupancy picture.
#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub occupancy: Vec<Occupancy>,
}

/// Checks assignment validity (acceptability) and capacity feasibility of
/// `m`, reporting every violation. Unknown ids and doubly assigned
/// applicants are errors, not report entries.
pub fn validate_matching(inst: &Instance, m: &Matching) -> Result<ValidityReport, ModelError> {
    let ctx = Ctx::new(inst);
    let mut violations = Vec::new();

    let mut asg = vec![None; ctx.applicant_count()];
    for (a, s) in m.pairs() {
        let ai = *ctx
            .applicant_idx
            .get(a.as_str())
            .ok_or_else(|| ModelError::UnknownId {
                kind: "applicant",
                id: a.clone(),
                context: "matching".into(),
            })?;
        let si = *ctx
            .school_idx
            .get(s.as_str())
            .ok_or_else(|| ModelError::UnknownId {
                kind: "school",
                id: s.clone(),
                context: "matching".into(),
            })?;
        if !ctx.prefs_rank[ai].contains_key(&si) {
            violations.push(Violation::Unacceptable { applicant: a.clone(), school: s.clone() });
        }
        if asg[ai].is_some() {
            return Err(ModelError::DuplicateAssignment { applicant: a.clone() });
        }
        asg[ai] = Some(si);
    }

    let load = ctx.load(&asg);
    let mut occupancy = Vec::with_capacity(ctx.school_count());
    for si in 0..ctx.school_count() {
        for pi in 0..ctx.subject_count() {
            if load.used[si][pi] > ctx.caps[si][pi] {
                violations.push(Violation::CapacityExceeded {
                    school: inst.schools[si].id.clone(),
                    subject: inst.subjects[pi].clone(),
                    used: load.used[si][pi],
                    capacity: ctx.caps[si][pi],
                });
            }
        }
        occupancy.push(build_occupancy(&ctx, &load, si));
    }

    Ok(ValidityReport { valid: violations.is_empty(), violations, occupancy })
}

/// Derived views of one school: M(s), M_p(s), M_{p,r}(s) and the used
/// capacity per subject. The matching must be a valid assignment (each pair
/// acceptable); capacities need not hold.
pub fn occupancy(inst: &Instance, m: &Matching, school: &str) -> Result<Occupancy, ModelError> {
    let ctx = Ctx::new(inst);
    let si = *ctx
        .school_idx
        .get(school)
        .ok_or_else(|| ModelError::UnknownId {
            kind: "school",
            id: school.to_owned(),
            context: "occupancy query".into(),
        })?;
    let asg = ctx.resolve(m)?;
    let load = ctx.load(&asg);
    Ok(build_occupancy(&ctx, &load, si))
}

fn build_occupancy(ctx: &Ctx, load: &crate::ctx::Load, si: usize) -> Occupancy {
    let inst = ctx.inst;
    let assigned: Vec<ApplicantId> = load.assigned[si]
        .iter()
        .map(|&ai| inst.applicants[ai].id.clone())
        .collect();

    let mut per_subject = BTreeMap::new();
    for (pi, p) in inst.subjects.iter().enumerate() {
        let members: Vec<ApplicantId> = load.assigned[si]
            .iter()
            .filter(|&&ai| {
                let (x, y) = ctx.types[ai];
                x == pi || y == pi
            })
            .map(|&ai| inst.applicants[ai].id.clone())
            .collect();
        per_subject.insert(
            p.clone(),
            SubjectUse {
                used: load.used[si][pi],
                capacity: ctx.caps[si][pi],
                assigned: members,
            },
        );
    }

    let mut by_pair: BTreeMap<String, Vec<ApplicantId>> = BTreeMap::new();
    for &ai in &load.assigned[si] {
        let (x, y) = ctx.types[ai];
        let key = format!("{},{}", inst.subjects[x], inst.subjects[y]);
        by_pair.entry(key).or_default().push(inst.applicants[ai].id.clone());
    }

    Occupancy {
        school: inst.schools[si].id.clone(),
        assigned,
        per_subject,
        by_pair,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_instance, parse_matching};

    const J1: &str = include_str!("../../../../fixtures/j1.json");
    const J3: &str = include_str!("../../../../fixtures/j3.json");
    const EX1: &str = include_str!("../../../../fixtures/j1_example1_matching.json");

    #[test]
    fn example_one_assignment_is_a_matching() {
        let j1 = parse_instance(J1).unwrap();
        let m = parse_matching(EX1).unwrap();
        let report = validate_matching(&j1, &m).unwrap();
        assert!(report.valid, "{:?}", report.violations);
    }

    #[test]
    fn doubling_up_two_fm_applicants_breaches_the_m_capacity() {
        let j1 = parse_instance(J1).unwrap();
        let m = Matching::new(vec![
            ("a1".into(), "s1".into()),
            ("a2".into(), "s1".into()),
        ])
        .unwrap();
        let report = validate_matching(&j1, &m).unwrap();
        assert!(!report.valid);
        assert_eq!(
            report.violations,
            vec![Violation::CapacityExceeded {
                school: "s1".into(),
                subject: "M".into(),
                used: 2,
                capacity: 1,
            }]
        );
    }

    #[test]
    fn empty_matching_is_valid() {
        let j1 = parse_instance(J1).unwrap();
        let report = validate_matching(&j1, &Matching::empty()).unwrap();
        assert!(report.valid);
        for occ in &report.occupancy {
            assert!(occ.assigned.is_empty());
            assert!(occ.per_subject.values().all(|u| u.used == 0));
        }
    }

    #[test]
    fn occupancy_views_of_example_one() {
        let j1 = parse_instance(J1).unwrap();
        let m = parse_matching(EX1).unwrap();
        let occ = occupancy(&j1, &m, "s1").unwrap();
        assert_eq!(occ.assigned, ["a2", "a4"]);
        assert_eq!(occ.subject_set("F"), ["a2", "a4"]);
        assert_eq!(occ.subject_set("M"), ["a2"]);
        assert_eq!(occ.subject_set("I"), ["a4"]);
        assert_eq!(occ.by_pair["F,M"], ["a2"]);
        assert_eq!(occ.by_pair["F,I"], ["a4"]);
        assert_eq!(occ.per_subject["F"].used, 2);
        assert_eq!(occ.per_subject["F"].capacity, 2);
    }

    #[test]
    fn occupancy_fills_a_school_exactly() {
        let j3 = parse_instance(J3).unwrap();
        let m2 = parse_matching(r#"{"pairs": [["a1","s1"],["a2","s2"],["a3","s1"]]}"#).unwrap();
        let occ = occupancy(&j3, &m2, "s1").unwrap();
        for (subject, used, cap) in [("F", 1, 1), ("I", 1, 1), ("M", 2, 2)] {
            assert_eq!(occ.per_subject[subject].used, used);
            assert_eq!(occ.per_subject[subject].capacity, cap);
        }
    }

    #[test]
    fn occupancy_rejects_unknown_school() {
        let j1 = parse_instance(J1).unwrap();
        let err = occupancy(&j1, &Matching::empty(), "s9").unwrap_err();
        assert!(matches!(err, ModelError::UnknownId { kind: "school", .. }));
    }

    #[test]
    fn unknown_ids_in_matching_are_errors_not_violations() {
        let j1 = parse_instance(J1).unwrap();
        let m = Matching::new(vec![("zz".into(), "s1".into())]).unwrap();
        assert!(matches!(
            validate_matching(&j1, &m),
            Err(ModelError::UnknownId { kind: "applicant", .. })
        ));
    }

    #[test]
    fn subject_bucket_sizes_sum_to_twice_the_assignees() {
        let j1 = parse_instance(J1).unwrap();
        let m = parse_matching(EX1).unwrap();
        let report = validate_matching(&j1, &m).unwrap();
        for occ in &report.occupancy {
            let bucket_sum: usize = occ.per_subject.values().map(|u| u.assigned.len()).sum();
            assert_eq!(bucket_sum, 2 * occ.assigned.len());
        }
    }
}
