//! Blocking-pair detection under both stability notions.
//!
//! A pair (a, s) with s acceptable to a blocks a matching when a is
//! unassigned or prefers s to her school, and the school can accommodate or
//! would rather swap for her:
//!
//! * (i) s is undersubscribed in both of a's subjects;
//! * (ii) s is undersubscribed in one subject of a and prefers a to some
//!   assignee teaching the other;
//! * (iii) s prefers a to some assignee of exactly a's type;
//! * (iv) s prefers a to two different assignees, one per subject of a.
//!
//! With linear school lists every comparison uses the single list. With
//! subject-specific lists each comparison happens in the subject the
//! displaced assignee is counted in; (iii) requires winning in both
//! subjects, (iv) in the respective subject against each of the two.
//!
//! Every satisfied condition is reported, with the smallest-rank witness per
//! condition, and pairs are ordered by applicant then school input order.

use serde::Serialize;

use crate::ctx::{Assignment, Ctx, Load};
use crate::model::{ApplicantId, Instance, Matching, Mode, ModelError, SchoolId};

/// Condition labels of the blocking-pair definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Condition {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    Ii,
    #[serde(rename = "iii")]
    Iii,
    #[serde(rename = "iv")]
    Iv,
}

/// Smallest-rank witnesses for the conditions that name a displaced
/// assignee. Condition (i) has no witness.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Witnesses {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ii: Option<ApplicantId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iii: Option<ApplicantId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iv: Option<[ApplicantId; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockingPair {
    pub applicant: ApplicantId,
    pub school: SchoolId,
    /// Every satisfied condition, not merely one.
    pub conditions: Vec<Condition>,
    pub witnesses: Witnesses,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// True iff every applicant of the instance is assigned.
    pub applicant_complete: bool,
    pub blocking_pairs: Vec<BlockingPair>,
}

/// Finds every blocking pair of `m` in `inst`, under the definition
/// selected by the instance mode. Refuses invalid matchings.
pub fn find_blocking_pairs(inst: &Instance, m: &Matching) -> Result<Vec<BlockingPair>, ModelError> {
    let ctx = Ctx::new(inst);
    let asg = ctx.resolve(m)?;
    let load = ctx.load(&asg);
    if let Some((si, pi)) = ctx.capacity_violation(&load) {
        return Err(ModelError::InvalidMatching(format!(
            "school `{}` exceeds its `{}` capacity",
            inst.schools[si].id, inst.subjects[pi]
        )));
    }

    let mut out = Vec::new();
    for ai in 0..ctx.applicant_count() {
        let mut found: Vec<(usize, BlockingPair)> = Vec::new();
        for &si in candidate_schools(&ctx, &asg, ai) {
            if let Some(eval) = evaluate_pair(&ctx, &load, ai, si) {
                found.push((si, eval.into_blocking_pair(&ctx, ai, si)));
            }
        }
        found.sort_by_key(|(si, _)| *si);
        out.extend(found.into_iter().map(|(_, bp)| bp));
    }
    Ok(out)
}

/// Stability verdict plus assignment coverage.
pub fn is_stable(inst: &Instance, m: &Matching) -> Result<StabilityReport, ModelError> {
    let blocking_pairs = find_blocking_pairs(inst, m)?;
    let assigned = m.pairs().len();
    Ok(StabilityReport {
        stable: blocking_pairs.is_empty(),
        applicant_complete: assigned == inst.applicants.len(),
        blocking_pairs,
    })
}

/// Schools strictly better than the applicant's current assignment (all of
/// her list when unassigned). An applicant never blocks with her own school.
fn candidate_schools<'c>(ctx: &'c Ctx, asg: &Assignment, ai: usize) -> &'c [usize] {
    match asg[ai] {
        None => &ctx.prefs[ai],
        Some(cur) => {
            let cur_rank = ctx.prefs_rank[ai][&cur];
            &ctx.prefs[ai][..cur_rank]
        }
    }
}

pub(crate) struct PairEval {
    pub i: bool,
    pub ii: Option<usize>,
    pub iii: Option<usize>,
    pub iv: Option<(usize, usize)>,
}

impl PairEval {
    fn any(&self) -> bool {
        self.i || self.ii.is_some() || self.iii.is_some() || self.iv.is_some()
    }

    fn into_blocking_pair(self, ctx: &Ctx, ai: usize, si: usize) -> BlockingPair {
        let id = |x: usize| ctx.inst.applicants[x].id.clone();
        let mut conditions = Vec::new();
        if self.i {
            conditions.push(Condition::I);
        }
        if self.ii.is_some() {
            conditions.push(Condition::Ii);
        }
        if self.iii.is_some() {
            conditions.push(Condition::Iii);
        }
        if self.iv.is_some() {
            conditions.push(Condition::Iv);
        }
        BlockingPair {
            applicant: id(ai),
            school: ctx.inst.schools[si].id.clone(),
            conditions,
            witnesses: Witnesses {
                ii: self.ii.map(id),
                iii: self.iii.map(id),
                iv: self.iv.map(|(b1, b2)| [id(b1), id(b2)]),
            },
        }
    }
}

/// Evaluates conditions (i)-(iv) for the candidate pair (ai, si). The caller
/// guarantees the preference clause (unassigned or strictly prefers si).
pub(crate) fn evaluate_pair(ctx: &Ctx, load: &Load, ai: usize, si: usize) -> Option<PairEval> {
    let (p1, p2) = ctx.types[ai];
    let under1 = load.used[si][p1] < ctx.caps[si][p1];
    let under2 = load.used[si][p2] < ctx.caps[si][p2];

    // rank of b at school si when compared in subject p; the instance mode
    // picks the list.
    let rank = |b: usize, p: usize| -> usize {
        match ctx.inst.mode {
            Mode::Linear => ctx.linear_rank[si][&b],
            Mode::SubjectSpecific => ctx.subject_rank[si][p][&b],
        }
    };
    let beats = |b: usize, p: usize| rank(ai, p) < rank(b, p);
    let teaches = |b: usize, p: usize| {
        let (x, y) = ctx.types[b];
        x == p || y == p
    };
    let assigned = &load.assigned[si];

    let cond_i = under1 && under2;

    // (ii): collect displaced candidates from the opposite subject of each
    // undersubscribed one; keep the smallest (rank, input index).
    let mut wit_ii: Option<(usize, usize)> = None;
    for (undersub, other) in [(under1, p2), (under2, p1)] {
        if !undersub {
            continue;
        }
        for &b in assigned.iter().filter(|&&b| teaches(b, other)) {
            if beats(b, other) {
                let key = (rank(b, other), b);
                if wit_ii.map_or(true, |w| key < w) {
                    wit_ii = Some(key);
                }
            }
        }
    }

    // (iii): a displaced assignee of exactly a's type; subject-specific mode
    // requires winning in both subjects.
    let mut wit_iii: Option<(usize, usize)> = None;
    for &b in assigned.iter().filter(|&&b| ctx.types[b] == (p1, p2)) {
        let wins = match ctx.inst.mode {
            Mode::Linear => beats(b, p1),
            Mode::SubjectSpecific => beats(b, p1) && beats(b, p2),
        };
        if wins {
            let key = (rank(b, p1), b);
            if wit_iii.map_or(true, |w| key < w) {
                wit_iii = Some(key);
            }
        }
    }

    // (iv): two different displaced assignees, one per subject.
    let mut beaten1: Vec<usize> = assigned
        .iter()
        .copied()
        .filter(|&b| teaches(b, p1) && beats(b, p1))
        .collect();
    let mut beaten2: Vec<usize> = assigned
        .iter()
        .copied()
        .filter(|&b| teaches(b, p2) && beats(b, p2))
        .collect();
    beaten1.sort_by_key(|&b| (rank(b, p1), b));
    beaten2.sort_by_key(|&b| (rank(b, p2), b));
    let mut wit_iv = None;
    'outer: for &b1 in &beaten1 {
        for &b2 in &beaten2 {
            if b1 != b2 {
                wit_iv = Some((b1, b2));
                break 'outer;
            }
        }
    }

    let eval = PairEval {
        i: cond_i,
        ii: wit_ii.map(|(_, b)| b),
        iii: wit_iii.map(|(_, b)| b),
        iv: wit_iv,
    };
    eval.any().then_some(eval)
}

/// True iff some pair blocks; used by the search loops.
pub(crate) fn blocks_exist(ctx: &Ctx, asg: &Assignment, load: &Load) -> bool {
    for ai in 0..ctx.applicant_count() {
        for &si in candidate_schools(ctx, asg, ai) {
            if evaluate_pair(ctx, load, ai, si).is_some() {
                return true;
            }
        }
    }
    false
}

/// Number of blocking pairs (a, s); used by the min-blocking-pair search.
pub(crate) fn count_blocking(ctx: &Ctx, asg: &Assignment, load: &Load) -> usize {
    let mut n = 0;
    for ai in 0..ctx.applicant_count() {
        for &si in candidate_schools(ctx, asg, ai) {
            if evaluate_pair(ctx, load, ai, si).is_some() {
                n += 1;
            }
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_instance, parse_matching, to_subject_specific};

    const J1: &str = include_str!("../../../fixtures/j1.json");
    const J2: &str = include_str!("../../../fixtures/j2.json");
    const J3: &str = include_str!("../../../fixtures/j3.json");
    const EX1: &str = include_str!("../../../fixtures/j1_example1_matching.json");

    fn instance(doc: &str) -> Instance {
        parse_instance(doc).unwrap()
    }

    fn matching(doc: &str) -> Matching {
        parse_matching(doc).unwrap()
    }

    #[test]
    fn example_one_reports_all_four_conditions() {
        let j1 = instance(J1);
        let m = matching(EX1);
        let pairs = find_blocking_pairs(&j1, &m).unwrap();

        let summary: Vec<(&str, &str, &[Condition])> = pairs
            .iter()
            .map(|bp| (bp.applicant.as_str(), bp.school.as_str(), bp.conditions.as_slice()))
            .collect();
        assert_eq!(
            summary,
            vec![
                ("a1", "s1", &[Condition::Iii][..]),
                ("a3", "s1", &[Condition::Iv][..]),
                ("a4", "s2", &[Condition::Ii][..]),
                ("a4", "s3", &[Condition::I, Condition::Ii][..]),
            ]
        );

        let by_pair = |a: &str, s: &str| pairs.iter().find(|bp| bp.applicant == a && bp.school == s).unwrap();
        assert_eq!(by_pair("a1", "s1").witnesses.iii.as_deref(), Some("a2"));
        assert_eq!(by_pair("a3", "s1").witnesses.iv, Some(["a4".to_string(), "a2".to_string()]));
        assert_eq!(by_pair("a4", "s2").witnesses.ii.as_deref(), Some("a3"));
        assert_eq!(by_pair("a4", "s3").witnesses.ii.as_deref(), Some("a1"));
    }

    #[test]
    fn example_three_matchings_are_stable_with_different_sizes() {
        let j3 = instance(J3);
        let m1 = matching(r#"{"pairs": [["a1","s2"],["a2","s1"]]}"#);
        let m2 = matching(r#"{"pairs": [["a1","s1"],["a2","s2"],["a3","s1"]]}"#);
        let r1 = is_stable(&j3, &m1).unwrap();
        assert!(r1.stable);
        assert!(!r1.applicant_complete);
        let r2 = is_stable(&j3, &m2).unwrap();
        assert!(r2.stable);
        assert!(r2.applicant_complete);
    }

    #[test]
    fn empty_matching_is_blocked_through_free_capacity() {
        let j1 = instance(J1);
        let report = is_stable(&j1, &Matching::empty()).unwrap();
        assert!(!report.stable);
        // Every applicant's first choice has free capacity, so each blocks
        // via (i) with her whole list.
        assert!(report
            .blocking_pairs
            .iter()
            .all(|bp| bp.conditions.contains(&Condition::I)));
        assert_eq!(report.blocking_pairs.len(), 9);
    }

    #[test]
    fn capacity_violations_are_refused_not_classified() {
        let j1 = instance(J1);
        let m = matching(r#"{"pairs": [["a1","s1"],["a2","s1"]]}"#);
        assert!(matches!(
            find_blocking_pairs(&j1, &m),
            Err(ModelError::InvalidMatching(_))
        ));
    }

    #[test]
    fn assigned_school_never_blocks_with_itself() {
        let j2 = instance(J2);
        let m = matching(r#"{"pairs": [["a1","s2"],["a2","s1"]]}"#);
        let pairs = find_blocking_pairs(&j2, &m).unwrap();
        assert!(pairs.iter().all(|bp| m.school_of(&bp.applicant) != Some(bp.school.as_str())));
        // Frozen by hand: (a3, s1) blocks via (ii) displacing a2.
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].applicant, "a3");
        assert_eq!(pairs[0].school, "s1");
        assert_eq!(pairs[0].conditions, vec![Condition::Ii]);
        assert_eq!(pairs[0].witnesses.ii.as_deref(), Some("a2"));
    }

    #[test]
    fn linear_and_restricted_subject_specific_agree_on_example_one() {
        let j1 = instance(J1);
        let ss = to_subject_specific(&j1);
        let m = matching(EX1);
        let linear = find_blocking_pairs(&j1, &m).unwrap();
        let subject = find_blocking_pairs(&ss, &m).unwrap();
        let key = |v: &Vec<BlockingPair>| -> Vec<(String, String, Vec<Condition>)> {
            v.iter()
                .map(|bp| (bp.applicant.clone(), bp.school.clone(), bp.conditions.clone()))
                .collect()
        };
        assert_eq!(key(&linear), key(&subject));
    }
}
