//! The subject-specific construction. Three layers:
//!
//! 1. a base market: per variable four FI occurrence applicants cycling
//!    through four schools with no third-subject capacity, per clause a
//!    q-applicant and three w-applicants (all FM) over four schools;
//! 2. per base applicant an applicant-completeness gadget: a fresh school
//!    g(a) appended to her list plus two satellite applicants a' and a''
//!    that accept only g(a);
//! 3. subject-specific master lists of applicants and a single master list
//!    of schools from which every individual list is derived (q lists are
//!    reordered to respect the school master list).
//!
//! Every partial capacity is at most 1.

use std::collections::BTreeMap;

use crate::model::{Applicant, ApplicantId, Instance, Matching, Mode, School, SchoolId};
use crate::reductions::tap_linear::{check_satisfies, extract_by_dichotomy, require_stable};
use crate::reductions::{
    validate_223, Augmentation, CnfFormula223, GadgetIndex, IdGroup, ReductionBundle,
    ReductionError, ReductionKind, TiFi,
};

const F: &str = "F";
const I: &str = "I";
const M: &str = "M";

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Fi,
    Fm,
    Im,
}

impl Kind {
    fn pair(self) -> [String; 2] {
        match self {
            Kind::Fi => [F.to_owned(), I.to_owned()],
            Kind::Fm => [F.to_owned(), M.to_owned()],
            Kind::Im => [I.to_owned(), M.to_owned()],
        }
    }

    fn teaches(self, p: &str) -> bool {
        self.pair().contains(&p.to_owned())
    }
}

struct Draft {
    id: ApplicantId,
    kind: Kind,
    prefs: Vec<SchoolId>,
}

/// Builds the subject-specific instance for a valid (2,2)-E3 formula.
/// Variables are 0-based in the generated ids, clauses 1-based.
pub fn reduce_to_tapss(f: &CnfFormula223) -> Result<ReductionBundle, ReductionError> {
    validate_223(f)?;
    let n = f.num_vars;
    let m = f.num_clauses();

    let x_id = |g: usize| format!("x_{g}");
    let y_id = |g: usize| format!("y_{g}");
    let q_id = |j: usize| format!("q_{j}");
    let w_id = |j: usize, t: usize| format!("w_{j}_{t}");
    let s_id = |j: usize, t: usize| format!("s_{j}_{t}");
    let g_id = |base: &str| format!("g_{base}");

    // s(x_{4i+r}): the clause-position school of each literal occurrence.
    let mut occurrence_map: BTreeMap<ApplicantId, SchoolId> = BTreeMap::new();
    for v in 0..n {
        for (base_r, positive) in [(0usize, true), (2usize, false)] {
            for (k, (j, t)) in f.occurrences(v, positive).into_iter().enumerate() {
                occurrence_map.insert(x_id(4 * v + base_r + k), s_id(j + 1, t + 1));
            }
        }
    }

    // Base applicants, in emission order.
    let mut drafts: Vec<Draft> = Vec::new();
    for v in 0..n {
        let g = |r: usize| 4 * v + r;
        let s_of = |r: usize| occurrence_map[&x_id(g(r))].clone();
        let lists = [
            vec![y_id(g(0)), s_of(0), y_id(g(1))],
            vec![y_id(g(1)), s_of(1), y_id(g(2))],
            vec![y_id(g(3)), s_of(2), y_id(g(2))],
            vec![y_id(g(0)), s_of(3), y_id(g(3))],
        ];
        for (r, prefs) in lists.into_iter().enumerate() {
            drafts.push(Draft { id: x_id(g(r)), kind: Kind::Fi, prefs });
        }
    }
    for j in 1..=m {
        drafts.push(Draft {
            id: q_id(j),
            kind: Kind::Fm,
            prefs: vec![s_id(j, 1), s_id(j, 2), s_id(j, 3)],
        });
        for t in 1..=3 {
            drafts.push(Draft {
                id: w_id(j, t),
                kind: Kind::Fm,
                prefs: vec![s_id(j, t), s_id(j, 4)],
            });
        }
    }
    let base_count = drafts.len();

    // Layer 2: the g(a) gadget per base applicant.
    let mut augmentations = Vec::new();
    let mut satellites: Vec<Draft> = Vec::new();
    for d in drafts.iter_mut().take(base_count) {
        let gym = g_id(&d.id);
        let (prime_kind, double_kind) = match d.kind {
            Kind::Fi => (Kind::Fm, Kind::Im),
            Kind::Fm => (Kind::Fi, Kind::Im),
            Kind::Im => unreachable!("no IM base applicants"),
        };
        d.prefs.push(gym.clone());
        satellites.push(Draft {
            id: format!("{}_p", d.id),
            kind: prime_kind,
            prefs: vec![gym.clone()],
        });
        satellites.push(Draft {
            id: format!("{}_pp", d.id),
            kind: double_kind,
            prefs: vec![gym.clone()],
        });
        augmentations.push(Augmentation {
            base: d.id.clone(),
            prime: format!("{}_p", d.id),
            double_prime: format!("{}_pp", d.id),
            school: gym,
        });
    }

    // Layer 3a: the school master list ⟨S_0⟩…⟨S_{n-1}⟩ ⟨S^4⟩ ⟨G⟩.
    let mut school_master: Vec<SchoolId> = Vec::new();
    for v in 0..n {
        let g = |r: usize| 4 * v + r;
        let s_of = |r: usize| occurrence_map[&x_id(g(r))].clone();
        school_master.extend([
            y_id(g(0)),
            s_of(0),
            s_of(3),
            y_id(g(3)),
            s_of(2),
            y_id(g(1)),
            s_of(1),
            y_id(g(2)),
        ]);
    }
    let mut s4: Vec<SchoolId> = (1..=m).map(|j| s_id(j, 4)).collect();
    s4.sort();
    school_master.extend(s4);
    let mut gyms: Vec<SchoolId> = augmentations.iter().map(|a| a.school.clone()).collect();
    gyms.sort();
    school_master.extend(gyms);
    let school_pos: BTreeMap<&str, usize> = school_master
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();

    // Reorder each q list to respect the school master list; every other
    // list already does by construction.
    for d in drafts.iter_mut().take(base_count) {
        if d.id.starts_with("q_") {
            d.prefs.sort_by_key(|s| school_pos[s.as_str()]);
        }
    }

    drafts.extend(satellites);

    // Layer 3b: subject-specific master lists of applicants.
    let block = |prefix: &str, reverse: bool, primes: Primes| -> Vec<ApplicantId> {
        let mut ids: Vec<ApplicantId> = drafts
            .iter()
            .filter(|d| match primes {
                Primes::Base => !d.id.ends_with("_p") && !d.id.ends_with("_pp"),
                Primes::Single => d.id.ends_with("_p") && !d.id.ends_with("_pp"),
                Primes::Double => d.id.ends_with("_pp"),
            })
            .filter(|d| match prefix {
                "x" => d.id.starts_with("x_"),
                "qw" => d.id.starts_with("q_") || d.id.starts_with("w_"),
                "q" => d.id.starts_with("q_"),
                "w" => d.id.starts_with("w_"),
                _ => unreachable!(),
            })
            .map(|d| d.id.clone())
            .collect();
        match primes {
            // Base blocks keep construction order (x by index; w by clause
            // then position; q by clause); primed blocks are "arbitrary but
            // fixed": ascending by id.
            Primes::Base => {}
            _ => ids.sort(),
        }
        if reverse {
            ids.reverse();
        }
        ids
    };

    let mut master_f = Vec::new();
    master_f.extend(block("w", false, Primes::Base));
    master_f.extend(block("x", false, Primes::Base));
    master_f.extend(block("q", false, Primes::Base));
    master_f.extend(block("x", false, Primes::Single));
    master_f.extend(block("qw", false, Primes::Single));

    let mut master_i = Vec::new();
    master_i.extend(block("x", false, Primes::Double));
    master_i.extend(block("qw", false, Primes::Single));
    master_i.extend(block("qw", false, Primes::Double));
    master_i.extend(block("x", true, Primes::Base));

    let mut master_m = Vec::new();
    master_m.extend(block("qw", false, Primes::Double));
    master_m.extend(block("q", false, Primes::Base));
    master_m.extend(block("w", true, Primes::Base));
    master_m.extend(block("x", false, Primes::Single));
    master_m.extend(block("x", false, Primes::Double));

    let masters: BTreeMap<String, Vec<ApplicantId>> = [
        (F.to_owned(), master_f),
        (I.to_owned(), master_i),
        (M.to_owned(), master_m),
    ]
    .into_iter()
    .collect();

    // Schools with capacities; per-subject lists come from the masters.
    let mut school_caps: Vec<(SchoolId, [u32; 3])> = Vec::new();
    for v in 0..n {
        for r in 0..4 {
            school_caps.push((y_id(4 * v + r), [1, 1, 0]));
        }
    }
    for j in 1..=m {
        for t in 1..=3 {
            school_caps.push((s_id(j, t), [1, 1, 1]));
        }
        school_caps.push((s_id(j, 4), [1, 0, 1]));
    }
    for aug in &augmentations {
        school_caps.push((aug.school.clone(), [1, 1, 1]));
    }

    let applicants: Vec<Applicant> = drafts
        .iter()
        .map(|d| Applicant {
            id: d.id.clone(),
            subject_pair: d.kind.pair(),
            prefs: d.prefs.clone(),
        })
        .collect();

    let kind_of: BTreeMap<&str, Kind> = drafts.iter().map(|d| (d.id.as_str(), d.kind)).collect();
    let prefs_of: BTreeMap<&str, &Vec<SchoolId>> =
        applicants.iter().map(|a| (a.id.as_str(), &a.prefs)).collect();
    let schools: Vec<School> = school_caps
        .iter()
        .map(|(id, caps)| {
            let mut by_subject = BTreeMap::new();
            for subject in [F, I, M] {
                let list: Vec<ApplicantId> = masters[subject]
                    .iter()
                    .filter(|a| {
                        kind_of[a.as_str()].teaches(subject)
                            && prefs_of[a.as_str()].contains(id)
                    })
                    .cloned()
                    .collect();
                if !list.is_empty() {
                    by_subject.insert(subject.to_owned(), list);
                }
            }
            let mut capacities = BTreeMap::new();
            for (subject, &cap) in [F, I, M].iter().zip(caps.iter()) {
                if cap > 0 {
                    capacities.insert((*subject).to_owned(), cap);
                }
            }
            School { id: id.clone(), capacities, prefs: None, prefs_by_subject: Some(by_subject) }
        })
        .collect();

    let mut variables = Vec::new();
    let mut ti_fi = Vec::new();
    for v in 0..n {
        let g = |r: usize| 4 * v + r;
        variables.push(IdGroup {
            applicants: (0..4).map(|r| x_id(g(r))).collect(),
            schools: (0..4).map(|r| y_id(g(r))).collect(),
        });
        ti_fi.push(TiFi {
            t: (0..4).map(|r| (x_id(g(r)), y_id(g(r)))).collect(),
            f: (0..3)
                .map(|r| (x_id(g(r)), y_id(g(r + 1))))
                .chain([(x_id(g(3)), y_id(g(0)))])
                .collect(),
        });
    }
    let clauses = (1..=m)
        .map(|j| IdGroup {
            applicants: std::iter::once(q_id(j))
                .chain((1..=3).map(|t| w_id(j, t)))
                .collect(),
            schools: (1..=4).map(|t| s_id(j, t)).collect(),
        })
        .collect();

    let instance = Instance {
        mode: Mode::SubjectSpecific,
        subjects: vec![F.to_owned(), I.to_owned(), M.to_owned()],
        applicants,
        schools,
        master_list_applicants: None,
        master_list_schools: Some(school_master),
        master_lists_by_subject: Some(masters),
    }
    .validate()?;

    Ok(ReductionBundle {
        kind: ReductionKind::Tapss,
        formula: f.clone(),
        instance,
        occurrence_map,
        gadget_index: GadgetIndex { variables, clauses, augmentations },
        ti_fi,
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Primes {
    Base,
    Single,
    Double,
}

/// Builds the stable matching witnessing a satisfying assignment: T or F
/// pairs per variable; per clause the q applicant takes the school of its
/// first true literal while that position's w applicant overflows; every
/// prime satellite occupies its gadget school.
pub fn tapss_matching_from_assignment(
    bundle: &ReductionBundle,
    assignment: &[bool],
) -> Result<Matching, ReductionError> {
    check_satisfies(&bundle.formula, assignment)?;

    let mut pairs: Vec<(String, String)> = Vec::new();
    for (v, &value) in assignment.iter().enumerate() {
        let pair_set = &bundle.ti_fi[v];
        pairs.extend(if value { &pair_set.t } else { &pair_set.f }.iter().cloned());
    }
    for (j0, clause) in bundle.formula.clauses.iter().enumerate() {
        let j = j0 + 1;
        let t = clause
            .iter()
            .position(|l| l.satisfied_by(assignment))
            .expect("assignment satisfies every clause")
            + 1;
        pairs.push((format!("q_{j}"), format!("s_{j}_{t}")));
        pairs.push((format!("w_{j}_{t}"), format!("s_{j}_4")));
        for other in (1..=3).filter(|&x| x != t) {
            pairs.push((format!("w_{j}_{other}"), format!("s_{j}_{other}")));
        }
    }
    for aug in &bundle.gadget_index.augmentations {
        pairs.push((aug.prime.clone(), aug.school.clone()));
    }
    Ok(Matching::new(pairs)?)
}

/// Strips the gadget pairs, asserts every base applicant is assigned, and
/// reads the truth assignment from the T/F dichotomy.
pub fn tapss_assignment_from_matching(
    bundle: &ReductionBundle,
    m: &Matching,
) -> Result<Vec<bool>, ReductionError> {
    require_stable(&bundle.instance, m)?;
    for aug in &bundle.gadget_index.augmentations {
        if m.school_of(&aug.base).is_none() {
            return Err(ReductionError::IncompleteBase { applicant: aug.base.clone() });
        }
    }
    extract_by_dichotomy(bundle, m)
}
