//! The disjoint-union amplifier: k renamed copies of a market sharing its
//! subject set, with no acceptability across copies. Stable matchings of the
//! union factor into per-copy stable matchings and minimum blocking-pair
//! counts add up, which is what makes the copy count an inapproximability
//! lever.

use std::collections::BTreeMap;

use crate::model::Instance;

/// Builds k disjoint renamed copies of `inst` (ids suffixed `_c1`..`_ck`).
/// Master lists, when present, concatenate per copy and stay consistent.
///
/// # Panics
///
/// If `k` is zero or the input instance is invalid.
pub fn disjoint_union(inst: &Instance, k: usize) -> Instance {
    assert!(k >= 1, "disjoint union needs at least one copy");
    let tag = |id: &str, c: usize| format!("{id}_c{c}");

    let mut out = Instance {
        mode: inst.mode,
        subjects: inst.subjects.clone(),
        applicants: Vec::new(),
        schools: Vec::new(),
        master_list_applicants: inst.master_list_applicants.as_ref().map(|_| Vec::new()),
        master_list_schools: inst.master_list_schools.as_ref().map(|_| Vec::new()),
        master_lists_by_subject: inst
            .master_lists_by_subject
            .as_ref()
            .map(|m| m.keys().map(|p| (p.clone(), Vec::new())).collect::<BTreeMap<_, _>>()),
    };

    for c in 1..=k {
        for a in &inst.applicants {
            let mut copy = a.clone();
            copy.id = tag(&a.id, c);
            copy.prefs = a.prefs.iter().map(|s| tag(s, c)).collect();
            out.applicants.push(copy);
        }
        for s in &inst.schools {
            let mut copy = s.clone();
            copy.id = tag(&s.id, c);
            copy.prefs = s
                .prefs
                .as_ref()
                .map(|l| l.iter().map(|a| tag(a, c)).collect());
            copy.prefs_by_subject = s.prefs_by_subject.as_ref().map(|m| {
                m.iter()
                    .map(|(p, l)| (p.clone(), l.iter().map(|a| tag(a, c)).collect()))
                    .collect()
            });
            out.schools.push(copy);
        }
        if let (Some(dst), Some(src)) =
            (&mut out.master_list_applicants, &inst.master_list_applicants)
        {
            dst.extend(src.iter().map(|a| tag(a, c)));
        }
        if let (Some(dst), Some(src)) = (&mut out.master_list_schools, &inst.master_list_schools) {
            dst.extend(src.iter().map(|s| tag(s, c)));
        }
        if let (Some(dst), Some(src)) =
            (&mut out.master_lists_by_subject, &inst.master_lists_by_subject)
        {
            for (p, l) in src {
                dst.get_mut(p)
                    .expect("same subject keys")
                    .extend(l.iter().map(|a| tag(a, c)));
            }
        }
    }

    out.validate().expect("union of a valid instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;
    use crate::solvers::{enumerate_stable, min_blocking_pairs, MinBpOutcome};

    const J2: &str = include_str!("../../../../fixtures/j2.json");
    const J3: &str = include_str!("../../../../fixtures/j3.json");
    const TOY_SD: &str = include_str!("../../../../fixtures/toy_sd.json");

    #[test]
    fn single_copy_is_the_same_market_renamed() {
        let j3 = parse_instance(J3).unwrap();
        let one = disjoint_union(&j3, 1);
        assert_eq!(one.applicants.len(), j3.applicants.len());
        assert_eq!(one.applicants[0].id, "a1_c1");
        assert_eq!(one.schools[0].id, "s1_c1");
        assert_eq!(
            enumerate_stable(&one, None, None).matchings.len(),
            enumerate_stable(&j3, None, None).matchings.len()
        );
    }

    #[test]
    fn stable_counts_multiply_across_copies() {
        let j3 = parse_instance(J3).unwrap();
        let tripled = disjoint_union(&j3, 3);
        assert_eq!(enumerate_stable(&tripled, None, None).matchings.len(), 8);
    }

    #[test]
    fn blocking_pair_minima_add_across_copies() {
        let j2 = parse_instance(J2).unwrap();
        let doubled = disjoint_union(&j2, 2);
        let single = match min_blocking_pairs(&j2, None) {
            MinBpOutcome::Optimal(r) => r.blocking_count,
            other => panic!("{other:?}"),
        };
        let double = match min_blocking_pairs(&doubled, None) {
            MinBpOutcome::Optimal(r) => r.blocking_count,
            other => panic!("{other:?}"),
        };
        assert_eq!(double, 2 * single);
    }

    #[test]
    fn master_lists_survive_the_union() {
        let toy = parse_instance(TOY_SD).unwrap();
        let doubled = disjoint_union(&toy, 2);
        assert_eq!(
            doubled.master_list_applicants.as_deref().unwrap(),
            ["a1_c1", "a2_c1", "a1_c2", "a2_c2"]
        );
    }
}
