//! The linear-mode construction: three subjects, per variable a 22-applicant
//! / 18-school gadget, per clause one school with room for two of its three
//! occurrence applicants. Partial capacities stay at most 2 and applicant
//! lists at most 3.
//!
//! The q/w sub-gadget is a three-applicant cycle with no rest state once the
//! occurrence applicant claims her last-choice school; its capacities are
//! deliberately tight (w2 takes a single FM-or-IM assignee) so that the two
//! q-applicants competing for it can never settle there together.

use std::collections::BTreeMap;

use crate::model::{Applicant, Instance, Matching, Mode, School};
use crate::reductions::{
    validate_223, CnfFormula223, GadgetIndex, IdGroup, ReductionBundle, ReductionError,
    ReductionKind, TiFi,
};
use crate::stability::is_stable;

const F: &str = "F";
const I: &str = "I";
const M: &str = "M";

fn applicant(id: String, t: [&str; 2], prefs: Vec<String>) -> Applicant {
    Applicant {
        id,
        subject_pair: [t[0].to_owned(), t[1].to_owned()],
        prefs,
    }
}

fn school(id: String, caps: [u32; 3], prefs: Vec<String>) -> School {
    let mut capacities = BTreeMap::new();
    for (subject, c) in [F, I, M].iter().zip(caps) {
        if c > 0 {
            capacities.insert((*subject).to_owned(), c);
        }
    }
    School { id, capacities, prefs: Some(prefs), prefs_by_subject: None }
}

/// Builds the linear-mode instance for a valid (2,2)-E3 formula. Variables
/// and clauses are 1-based in the generated ids.
pub fn reduce_to_tap(f: &CnfFormula223) -> Result<ReductionBundle, ReductionError> {
    validate_223(f)?;
    let n = f.num_vars;
    let m = f.num_clauses();

    // Occurrence applicant of each (clause, position), and the clause school
    // wired to each occurrence applicant.
    let mut occ_applicant: BTreeMap<(usize, usize), String> = BTreeMap::new();
    let mut occurrence_map: BTreeMap<String, String> = BTreeMap::new();
    for v in 0..n {
        let i = v + 1;
        for (letter, positive) in [("x", true), ("y", false)] {
            for (k, (j, t)) in f.occurrences(v, positive).into_iter().enumerate() {
                let id = format!("{letter}_{i}_{}", k + 1);
                occ_applicant.insert((j, t), id.clone());
                occurrence_map.insert(id, format!("z_{}", j + 1));
            }
        }
    }

    let mut applicants = Vec::new();
    let mut schools = Vec::new();
    let mut variables = Vec::new();
    let mut ti_fi = Vec::new();

    for v in 0..n {
        let i = v + 1;
        let a = |k: usize| format!("a_{i}_{k}");
        let x = |k: usize| format!("x_{i}_{k}");
        let y = |k: usize| format!("y_{i}_{k}");
        let s = |tag: &str| format!("s_{i}_{tag}");
        let w = |row: usize, k: usize| format!("w_{i}_{row}_{k}");
        let q = |row: usize, k: usize| format!("q_{i}_{row}_{k}");
        let c = |occ: &str| occurrence_map[occ].clone();

        let mut group = IdGroup::default();

        let var_applicants = vec![
            applicant(a(1), [F, I], vec![s("1"), s("3")]),
            applicant(a(2), [F, I], vec![s("2"), s("4")]),
            applicant(a(3), [F, M], vec![s("1"), s("2")]),
            applicant(a(4), [I, M], vec![s("2"), s("1")]),
            applicant(a(5), [F, I], vec![s("3"), s("T")]),
            applicant(a(6), [F, I], vec![s("4"), s("F")]),
            applicant(x(1), [F, M], vec![s("T"), c(&x(1)), w(3, 1)]),
            applicant(x(2), [I, M], vec![s("T"), c(&x(2)), w(3, 2)]),
            applicant(y(1), [F, M], vec![s("F"), c(&y(1)), w(3, 3)]),
            applicant(y(2), [I, M], vec![s("F"), c(&y(2)), w(3, 4)]),
        ];
        let mut var_applicants = var_applicants;
        for k in 1..=4 {
            var_applicants.push(applicant(q(1, k), [F, M], vec![w(2, k), w(1, k)]));
            var_applicants.push(applicant(q(2, k), [I, M], vec![w(1, k), w(2, k)]));
            var_applicants.push(applicant(q(3, k), [F, I], vec![w(3, k), w(1, k)]));
        }

        let mut var_schools = vec![
            school(s("1"), [1, 1, 2], vec![a(4), a(1), a(3)]),
            school(s("2"), [1, 1, 2], vec![a(3), a(2), a(4)]),
            school(s("3"), [1, 1, 0], vec![a(1), a(5)]),
            school(s("4"), [1, 1, 0], vec![a(2), a(6)]),
            school(s("T"), [1, 1, 2], vec![a(5), x(1), x(2)]),
            school(s("F"), [1, 1, 2], vec![a(6), y(1), y(2)]),
        ];
        for k in 1..=4 {
            // A(w_{i,3}^k): the occurrence applicant whose last resort this is.
            let anchor = match k {
                1 => x(1),
                2 => x(2),
                3 => y(1),
                _ => y(2),
            };
            var_schools.push(school(w(1, k), [1, 1, 2], vec![q(1, k), q(3, k), q(2, k)]));
            var_schools.push(school(w(2, k), [1, 1, 1], vec![q(2, k), q(1, k)]));
            var_schools.push(school(w(3, k), [1, 1, 1], vec![anchor, q(3, k)]));
        }

        group.applicants = var_applicants.iter().map(|a| a.id.clone()).collect();
        group.schools = var_schools.iter().map(|s| s.id.clone()).collect();
        variables.push(group);
        applicants.extend(var_applicants);
        schools.extend(var_schools);

        ti_fi.push(TiFi {
            t: vec![(x(1), s("T")), (x(2), s("T")), (a(6), s("F"))],
            f: vec![(y(1), s("F")), (y(2), s("F")), (a(5), s("T"))],
        });
    }

    let mut clauses = Vec::new();
    for j in 0..m {
        let id = format!("z_{}", j + 1);
        let list: Vec<String> = (0..3).map(|t| occ_applicant[&(j, t)].clone()).collect();
        schools.push(school(id.clone(), [2, 2, 2], list));
        clauses.push(IdGroup { applicants: Vec::new(), schools: vec![id] });
    }

    let instance = Instance {
        mode: Mode::Linear,
        subjects: vec![F.to_owned(), I.to_owned(), M.to_owned()],
        applicants,
        schools,
        master_list_applicants: None,
        master_list_schools: None,
        master_lists_by_subject: None,
    }
    .validate()?;

    Ok(ReductionBundle {
        kind: ReductionKind::TapTheorem1,
        formula: f.clone(),
        instance,
        occurrence_map,
        gadget_index: GadgetIndex { variables, clauses, augmentations: Vec::new() },
        ti_fi,
    })
}

/// Builds the stable matching witnessing a satisfying assignment: the T or F
/// pairs per truth value, clause schools for false-literal applicants, and
/// the fixed q/w pairs (every q applicant at her first choice).
pub fn tap_matching_from_assignment(
    bundle: &ReductionBundle,
    assignment: &[bool],
) -> Result<Matching, ReductionError> {
    check_satisfies(&bundle.formula, assignment)?;

    let mut pairs: Vec<(String, String)> = Vec::new();
    for (v, &value) in assignment.iter().enumerate() {
        let i = v + 1;
        let a = |k: usize| format!("a_{i}_{k}");
        let x = |k: usize| format!("x_{i}_{k}");
        let y = |k: usize| format!("y_{i}_{k}");
        let s = |tag: &str| format!("s_{i}_{tag}");
        let c = |occ: &str| bundle.occurrence_map[occ].clone();

        let pair_set = &bundle.ti_fi[v];
        if value {
            pairs.extend(pair_set.t.iter().cloned());
            pairs.extend([
                (y(1), c(&y(1))),
                (y(2), c(&y(2))),
                (a(1), s("1")),
                (a(2), s("4")),
                (a(3), s("2")),
                (a(4), s("2")),
                (a(5), s("3")),
            ]);
        } else {
            pairs.extend(pair_set.f.iter().cloned());
            pairs.extend([
                (x(1), c(&x(1))),
                (x(2), c(&x(2))),
                (a(1), s("3")),
                (a(2), s("2")),
                (a(3), s("1")),
                (a(4), s("1")),
                (a(6), s("4")),
            ]);
        }
        for k in 1..=4 {
            pairs.push((format!("q_{i}_1_{k}"), format!("w_{i}_2_{k}")));
            pairs.push((format!("q_{i}_2_{k}"), format!("w_{i}_1_{k}")));
            pairs.push((format!("q_{i}_3_{k}"), format!("w_{i}_3_{k}")));
        }
    }
    Ok(Matching::new(pairs)?)
}

/// Reads the truth assignment back out of a stable matching via the T/F
/// dichotomy, verifying that it satisfies the formula.
pub fn tap_assignment_from_matching(
    bundle: &ReductionBundle,
    m: &Matching,
) -> Result<Vec<bool>, ReductionError> {
    require_stable(&bundle.instance, m)?;
    extract_by_dichotomy(bundle, m)
}

pub(crate) fn check_satisfies(
    f: &CnfFormula223,
    assignment: &[bool],
) -> Result<(), ReductionError> {
    if assignment.len() != f.num_vars {
        return Err(ReductionError::AssignmentLength {
            expected: f.num_vars,
            found: assignment.len(),
        });
    }
    for (j, clause) in f.clauses.iter().enumerate() {
        if !clause.iter().any(|l| l.satisfied_by(assignment)) {
            return Err(ReductionError::NotSatisfying { clause: j + 1 });
        }
    }
    Ok(())
}

pub(crate) fn require_stable(inst: &Instance, m: &Matching) -> Result<(), ReductionError> {
    let report = is_stable(inst, m)?;
    if !report.stable {
        let bp = &report.blocking_pairs[0];
        return Err(ReductionError::NotStable(format!("({}, {})", bp.applicant, bp.school)));
    }
    Ok(())
}

pub(crate) fn extract_by_dichotomy(
    bundle: &ReductionBundle,
    m: &Matching,
) -> Result<Vec<bool>, ReductionError> {
    let mut assignment = Vec::with_capacity(bundle.formula.num_vars);
    for (v, pair_set) in bundle.ti_fi.iter().enumerate() {
        let holds = |pairs: &[(String, String)]| pairs.iter().all(|(a, s)| m.contains(a, s));
        match (holds(&pair_set.t), holds(&pair_set.f)) {
            (true, false) => assignment.push(true),
            (false, true) => assignment.push(false),
            _ => return Err(ReductionError::DichotomyViolation { var: v }),
        }
    }
    for (j, clause) in bundle.formula.clauses.iter().enumerate() {
        if !clause.iter().any(|l| l.satisfied_by(&assignment)) {
            return Err(ReductionError::ExtractionUnsatisfied { clause: j + 1 });
        }
    }
    Ok(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;
    use crate::reductions::parse_dimacs;
    use crate::solvers::enumerate_stable;

    const FORMULA: &str = include_str!("../../../../fixtures/formula4.cnf");

    fn bundle() -> ReductionBundle {
        reduce_to_tap(&parse_dimacs(FORMULA).unwrap()).unwrap()
    }

    #[test]
    fn gadget_counts_for_three_variables_and_four_clauses() {
        let b = bundle();
        assert_eq!(b.instance.applicants.len(), 3 * 22);
        assert_eq!(b.instance.schools.len(), 3 * 18 + 4);
        assert_eq!(b.gadget_index.variables.len(), 3);
        for group in &b.gadget_index.variables {
            assert_eq!(group.applicants.len(), 22);
            assert_eq!(group.schools.len(), 18);
        }
        assert_eq!(b.gadget_index.clauses.len(), 4);
    }

    #[test]
    fn emitted_instance_respects_the_stated_bounds() {
        let b = bundle();
        for s in &b.instance.schools {
            assert!(s.capacities.values().all(|&c| c <= 2), "school {}", s.id);
        }
        for a in &b.instance.applicants {
            assert!(a.prefs.len() <= 3, "applicant {}", a.id);
        }
        // Emitted document re-parses to an equal instance.
        let doc = crate::model::serialize_instance(&b.instance);
        assert_eq!(parse_instance(&doc).unwrap(), b.instance);
    }

    #[test]
    fn clause_schools_rank_their_occurrences_by_position() {
        let b = bundle();
        // Fixture clause 1 is (v1 v v2 v v3): first positive occurrence of
        // each variable, hence the first x-applicants in position order.
        let z1 = b.instance.school("z_1").unwrap();
        assert_eq!(z1.prefs.as_deref().unwrap(), ["x_1_1", "x_2_1", "x_3_1"]);
        // And the occurrence map points the same applicants back at z_1.
        assert_eq!(b.occurrence_map["x_1_1"], "z_1");
        assert_eq!(b.occurrence_map["x_2_1"], "z_1");
        assert_eq!(b.occurrence_map["x_3_1"], "z_1");
    }

    #[test]
    fn forward_witness_is_stable_and_round_trips() {
        let b = bundle();
        for assignment in [vec![true, true, true], vec![false, false, true]] {
            let m = tap_matching_from_assignment(&b, &assignment).unwrap();
            let report = is_stable(&b.instance, &m).unwrap();
            assert!(report.stable, "assignment {assignment:?}: {:?}", report.blocking_pairs);
            assert_eq!(tap_assignment_from_matching(&b, &m).unwrap(), assignment);
        }
    }

    #[test]
    fn forward_witness_gives_every_q_applicant_her_first_choice() {
        let b = bundle();
        let m = tap_matching_from_assignment(&b, &[true, true, true]).unwrap();
        for a in &b.instance.applicants {
            if a.id.starts_with("q_") {
                assert_eq!(m.school_of(&a.id), Some(a.prefs[0].as_str()));
            }
        }
    }

    #[test]
    fn forward_witness_satisfies_the_pair_dichotomy() {
        let b = bundle();
        let m = tap_matching_from_assignment(&b, &[true, false, false]).unwrap();
        for (v, pair_set) in b.ti_fi.iter().enumerate() {
            let t_in = pair_set.t.iter().all(|(a, s)| m.contains(a, s));
            let f_in = pair_set.f.iter().all(|(a, s)| m.contains(a, s));
            assert!(t_in ^ f_in, "variable {v}");
        }
    }

    #[test]
    fn occurrence_applicants_sit_at_first_or_second_choice() {
        let b = bundle();
        let m = tap_matching_from_assignment(&b, &[false, false, true]).unwrap();
        for a in &b.instance.applicants {
            if a.id.starts_with("x_") || a.id.starts_with("y_") {
                let school = m.school_of(&a.id).expect("occurrence applicants are assigned");
                let rank = a.prefs.iter().position(|s| s == school).unwrap();
                assert!(rank <= 1, "{} sits at choice {}", a.id, rank + 1);
            }
        }
    }

    #[test]
    fn non_satisfying_assignments_are_rejected() {
        let b = bundle();
        // All-false fails clause 1 of the fixture.
        assert!(matches!(
            tap_matching_from_assignment(&b, &[false, false, false]),
            Err(ReductionError::NotSatisfying { clause: 1 })
        ));
        assert!(matches!(
            tap_matching_from_assignment(&b, &[true]),
            Err(ReductionError::AssignmentLength { .. })
        ));
    }

    #[test]
    fn double_dictator_occupancy_is_unstable() {
        // Both guard applicants at their threshold schools leaves the x/y
        // applicants displaced, which stability forbids.
        let b = bundle();
        let mut pairs: Vec<(String, String)> = tap_matching_from_assignment(&b, &[true, true, true])
            .unwrap()
            .pairs()
            .to_vec();
        pairs.retain(|(a, _)| !["x_1_1", "x_1_2", "a_1_5"].contains(&a.as_str()));
        pairs.push(("a_1_5".into(), "s_1_T".into()));
        let m = Matching::new(pairs).unwrap();
        let report = is_stable(&b.instance, &m).unwrap();
        assert!(!report.stable);
        assert!(matches!(
            tap_assignment_from_matching(&b, &m),
            Err(ReductionError::NotStable(_))
        ));
    }

    /// The isolated q/w sub-gadget with the occurrence applicant reduced to
    /// her last-choice school.
    fn qw_subgadget(w2_m_capacity: u32) -> crate::model::Instance {
        let doc = format!(
            r#"{{
            "mode": "linear",
            "subjects": ["F", "I", "M"],
            "applicants": [
                {{"id": "x", "type": ["F", "M"], "prefs": ["w3"]}},
                {{"id": "q1", "type": ["F", "M"], "prefs": ["w2", "w1"]}},
                {{"id": "q2", "type": ["I", "M"], "prefs": ["w1", "w2"]}},
                {{"id": "q3", "type": ["F", "I"], "prefs": ["w3", "w1"]}}
            ],
            "schools": [
                {{"id": "w1", "capacities": {{"F": 1, "I": 1, "M": 2}}, "prefs": ["q1", "q3", "q2"]}},
                {{"id": "w2", "capacities": {{"F": 1, "I": 1, "M": {w2_m_capacity}}}, "prefs": ["q2", "q1"]}},
                {{"id": "w3", "capacities": {{"F": 1, "I": 1, "M": 1}}, "prefs": ["x", "q3"]}}
            ]
        }}"#
        );
        parse_instance(&doc).unwrap()
    }

    #[test]
    fn qw_gadget_never_parks_the_occurrence_applicant_at_her_last_resort() {
        let result = enumerate_stable(&qw_subgadget(1), None, None);
        assert!(result
            .matchings
            .iter()
            .all(|m| m.school_of("x") != Some("w3")));
        // Stronger: with her better options gone the whole gadget deadlocks.
        assert!(result.matchings.is_empty());
    }

    #[test]
    fn qw_gadget_needs_the_tight_middle_capacity() {
        // With room for both suitors at w2 the cycle finds a rest state and
        // the occurrence applicant can settle at her last resort - exactly
        // what the construction must prevent.
        let result = enumerate_stable(&qw_subgadget(2), None, None);
        assert!(result
            .matchings
            .iter()
            .any(|m| m.school_of("x") == Some("w3")));
    }
}
