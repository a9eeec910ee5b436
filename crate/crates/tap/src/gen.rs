//! Seeded random instance and matching generation, for the CLI and the
//! property suites. Everything is deterministic under (parameters, seed).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ctx::Ctx;
use crate::model::{Applicant, Instance, Matching, Mode, School};

/// Which master lists the generated instance carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MasterLists {
    None,
    /// One list of all applicants; school lists are its restrictions
    /// (linear mode only).
    Applicants,
    /// One list of all schools; applicant lists are its restrictions.
    Schools,
    /// One list per subject; per-subject school lists are restrictions
    /// (subject-specific mode only).
    BySubject,
}

#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub applicants: usize,
    pub schools: usize,
    pub subjects: usize,
    /// Preference lists get a uniform length in 1..=min(max_prefs, schools).
    pub max_prefs: usize,
    /// Partial capacities are uniform in 0..=max_capacity.
    pub max_capacity: u32,
    pub mode: Mode,
    pub master: MasterLists,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            applicants: 6,
            schools: 4,
            subjects: 3,
            max_prefs: 3,
            max_capacity: 2,
            mode: Mode::Linear,
            master: MasterLists::None,
        }
    }
}

fn subject_names(k: usize) -> Vec<String> {
    if k <= 3 {
        ["F", "I", "M"][..k].iter().map(|s| (*s).to_string()).collect()
    } else {
        (1..=k).map(|i| format!("P{i}")).collect()
    }
}

/// Generates a structurally valid instance. Panics on parameter combinations
/// with no meaning (fewer than two subjects, master-list kinds that do not
/// fit the mode).
pub fn random_instance(params: &GenParams, seed: u64) -> Instance {
    assert!(params.subjects >= 2, "need at least two subjects to form a type");
    match (params.mode, params.master) {
        (Mode::Linear, MasterLists::BySubject) => {
            panic!("per-subject master lists require subject-specific mode")
        }
        (Mode::SubjectSpecific, MasterLists::Applicants) => {
            panic!("a single applicant master list requires linear mode")
        }
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subjects = subject_names(params.subjects);
    let school_ids: Vec<String> = (1..=params.schools).map(|i| format!("s{i}")).collect();

    let mut applicants = Vec::new();
    for i in 1..=params.applicants {
        let mut pick = (0..params.subjects).collect::<Vec<_>>();
        pick.shuffle(&mut rng);
        let (p, r) = (pick[0].min(pick[1]), pick[0].max(pick[1]));
        let prefs = if params.schools == 0 {
            Vec::new()
        } else {
            let len = rng.random_range(1..=params.max_prefs.min(params.schools));
            let mut order = school_ids.clone();
            order.shuffle(&mut rng);
            order.truncate(len);
            order
        };
        applicants.push(Applicant {
            id: format!("a{i}"),
            subject_pair: [subjects[p].clone(), subjects[r].clone()],
            prefs,
        });
    }

    let master_list_schools = matches!(params.master, MasterLists::Schools).then(|| {
        let mut order = school_ids.clone();
        order.shuffle(&mut rng);
        order
    });
    if let Some(master) = &master_list_schools {
        let pos = |s: &String| master.iter().position(|x| x == s).unwrap();
        for a in &mut applicants {
            a.prefs.sort_by_key(pos);
        }
    }

    let master_list_applicants = matches!(params.master, MasterLists::Applicants).then(|| {
        let mut order: Vec<String> = applicants.iter().map(|a| a.id.clone()).collect();
        order.shuffle(&mut rng);
        order
    });
    let master_lists_by_subject = matches!(params.master, MasterLists::BySubject).then(|| {
        subjects
            .iter()
            .map(|p| {
                let mut typed: Vec<String> = applicants
                    .iter()
                    .filter(|a| a.subject_pair.contains(p))
                    .map(|a| a.id.clone())
                    .collect();
                typed.shuffle(&mut rng);
                (p.clone(), typed)
            })
            .collect::<std::collections::BTreeMap<_, _>>()
    });

    let mut schools = Vec::new();
    for id in &school_ids {
        let capacities = subjects
            .iter()
            .map(|p| (p.clone(), rng.random_range(0..=params.max_capacity)))
            .collect();
        let acceptable: Vec<&Applicant> = applicants
            .iter()
            .filter(|a| a.prefs.contains(id))
            .collect();
        let (prefs, prefs_by_subject) = match params.mode {
            Mode::Linear => {
                let mut list: Vec<String> = acceptable.iter().map(|a| a.id.clone()).collect();
                match &master_list_applicants {
                    Some(master) => {
                        let pos = |a: &String| master.iter().position(|x| x == a).unwrap();
                        list.sort_by_key(pos);
                    }
                    None => list.shuffle(&mut rng),
                }
                (Some(list), None)
            }
            Mode::SubjectSpecific => {
                let mut by_subject = std::collections::BTreeMap::new();
                for p in &subjects {
                    let mut list: Vec<String> = acceptable
                        .iter()
                        .filter(|a| a.subject_pair.contains(p))
                        .map(|a| a.id.clone())
                        .collect();
                    match &master_lists_by_subject {
                        Some(masters) => {
                            let master = &masters[p];
                            let pos = |a: &String| master.iter().position(|x| x == a).unwrap();
                            list.sort_by_key(pos);
                        }
                        None => list.shuffle(&mut rng),
                    }
                    if !list.is_empty() {
                        by_subject.insert(p.clone(), list);
                    }
                }
                (None, Some(by_subject))
            }
        };
        schools.push(School { id: id.clone(), capacities, prefs, prefs_by_subject });
    }

    Instance {
        mode: params.mode,
        subjects,
        applicants,
        schools,
        master_list_applicants,
        master_list_schools,
        master_lists_by_subject,
    }
    .validate()
    .expect("generated instance is structurally valid")
}

/// A random valid matching: applicants in random order greedily pick a
/// random school among those with room in both their subjects, or stay
/// unassigned.
pub fn random_valid_matching(inst: &Instance, seed: u64) -> Matching {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ctx = Ctx::new(inst);
    let mut order: Vec<usize> = (0..ctx.applicant_count()).collect();
    order.shuffle(&mut rng);
    let mut used = vec![vec![0u32; ctx.subject_count()]; ctx.school_count()];
    let mut asg = vec![None; ctx.applicant_count()];
    for ai in order {
        let (p, r) = ctx.types[ai];
        let mut options: Vec<Option<usize>> = ctx.prefs[ai]
            .iter()
            .copied()
            .filter(|&si| used[si][p] < ctx.caps[si][p] && used[si][r] < ctx.caps[si][r])
            .map(Some)
            .collect();
        options.push(None);
        if let Some(si) = options[rng.random_range(0..options.len())] {
            used[si][p] += 1;
            used[si][r] += 1;
            asg[ai] = Some(si);
        }
    }
    ctx.matching_of(&asg)
}
