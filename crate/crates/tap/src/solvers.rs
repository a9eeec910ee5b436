//! Constructive algorithms for master-list instances and exhaustive
//! existence / enumeration / minimum-blocking-pair search.
//!
//! The exhaustive searches walk applicants in input order, branching over
//! each applicant's acceptable schools in preference order and then
//! "unassigned", pruning any branch that violates a partial capacity. Every
//! leaf is a valid matching and every valid matching is exactly one leaf.
//! Stability is a property of complete matchings only, so no stability
//! pruning happens mid-tree. Node budgets make the exponential cost explicit:
//! an exhausted budget yields an inconclusive outcome, never a false
//! negative.

use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::ctx::{Assignment, Ctx, Load};
use crate::model::{Instance, Matching, Mode};
use crate::stability::{blocks_exist, count_blocking};

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SearchStats {
    /// Partial assignments entered.
    pub nodes: u64,
    /// Complete (valid) matchings evaluated.
    pub leaves: u64,
    /// Wall time; not serialized so command output stays reproducible.
    #[serde(skip)]
    pub wall: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    /// The whole tree was searched; absence of results is a proof.
    Exhausted,
    /// Stopped after collecting the requested number of matchings.
    LimitReached,
    /// Node budget ran out; found results are sound, absence is not.
    BudgetExhausted,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub matchings: Vec<Matching>,
    pub status: SearchStatus,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct MinBpResult {
    pub matching: Matching,
    pub blocking_count: usize,
    /// 1 plus the blocking-pair count, the optimization measure.
    pub opt_measure: usize,
    pub stats: SearchStats,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MinBpOutcome {
    /// The search covered every valid matching (or hit zero blocking pairs).
    Optimal(MinBpResult),
    /// Budget ran out; the incumbent, if any, is an upper bound only.
    Inconclusive(Option<MinBpResult>),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("{algorithm} requires linear school preferences")]
    WrongMode { algorithm: &'static str },
    #[error("{algorithm} requires a master list of {kind}")]
    MissingMasterList {
        algorithm: &'static str,
        kind: &'static str,
    },
}

/// Processes applicants in master-list order; each takes the first school
/// on her list that still has free partial capacity in both her subjects.
/// On a valid master-list instance the output is the unique stable matching.
pub fn serial_dictatorship(inst: &Instance) -> Result<Matching, SolveError> {
    if inst.mode != Mode::Linear {
        return Err(SolveError::WrongMode { algorithm: "serial dictatorship" });
    }
    let master = inst
        .master_list_applicants
        .as_ref()
        .ok_or(SolveError::MissingMasterList {
            algorithm: "serial dictatorship",
            kind: "applicants",
        })?;
    let ctx = Ctx::new(inst);
    let mut used = vec![vec![0u32; ctx.subject_count()]; ctx.school_count()];
    let mut asg: Assignment = vec![None; ctx.applicant_count()];
    for id in master {
        let ai = ctx.applicant_idx[id.as_str()];
        let (p, r) = ctx.types[ai];
        for &si in &ctx.prefs[ai] {
            if used[si][p] < ctx.caps[si][p] && used[si][r] < ctx.caps[si][r] {
                used[si][p] += 1;
                used[si][r] += 1;
                asg[ai] = Some(si);
                break;
            }
        }
    }
    Ok(ctx.matching_of(&asg))
}

/// Processes schools in master-list order; each scans its own list and
/// admits every still-unassigned applicant it has room for. On a valid
/// master-list instance the output is the unique stable matching.
pub fn dual_serial_dictatorship(inst: &Instance) -> Result<Matching, SolveError> {
    if inst.mode != Mode::Linear {
        return Err(SolveError::WrongMode { algorithm: "dual serial dictatorship" });
    }
    let master = inst
        .master_list_schools
        .as_ref()
        .ok_or(SolveError::MissingMasterList {
            algorithm: "dual serial dictatorship",
            kind: "schools",
        })?;
    let ctx = Ctx::new(inst);
    let mut used = vec![vec![0u32; ctx.subject_count()]; ctx.school_count()];
    let mut asg: Assignment = vec![None; ctx.applicant_count()];
    for id in master {
        let si = ctx.school_idx[id.as_str()];
        let list = ctx.inst.schools[si].prefs.as_deref().unwrap_or(&[]);
        for aid in list {
            let ai = ctx.applicant_idx[aid.as_str()];
            if asg[ai].is_some() {
                continue;
            }
            let (p, r) = ctx.types[ai];
            if used[si][p] < ctx.caps[si][p] && used[si][r] < ctx.caps[si][r] {
                used[si][p] += 1;
                used[si][r] += 1;
                asg[ai] = Some(si);
            }
        }
    }
    Ok(ctx.matching_of(&asg))
}

/// Enumerates stable matchings in deterministic depth-first order, up to
/// `limit` if given. Practical for small markets only (the tree is the full
/// space of valid matchings).
pub fn enumerate_stable(inst: &Instance, limit: Option<usize>, budget: Option<u64>) -> SolveResult {
    let ctx = Ctx::new(inst);
    let started = Instant::now();
    let mut search = Search::new(&ctx, budget);
    let mut matchings = Vec::new();
    let mut limited = false;
    search.run(&mut |ctx, asg, load| {
        if !blocks_exist(ctx, asg, load) {
            matchings.push(ctx.matching_of(asg));
            if limit.is_some_and(|l| matchings.len() >= l) {
                limited = true;
                return false;
            }
        }
        true
    });
    let status = if search.aborted {
        SearchStatus::BudgetExhausted
    } else if limited {
        SearchStatus::LimitReached
    } else {
        SearchStatus::Exhausted
    };
    let mut stats = search.stats;
    stats.wall = started.elapsed();
    SolveResult { matchings, status, stats }
}

/// Exhausts all valid matchings and returns one minimizing the number of
/// blocking pairs, ties broken by enumeration order. Stops early only when a
/// stable matching (zero blocking pairs) turns up.
pub fn min_blocking_pairs(inst: &Instance, budget: Option<u64>) -> MinBpOutcome {
    let ctx = Ctx::new(inst);
    let started = Instant::now();
    let mut search = Search::new(&ctx, budget);
    let mut best: Option<(usize, Matching)> = None;
    search.run(&mut |ctx, asg, load| {
        let count = count_blocking(ctx, asg, load);
        if best.as_ref().is_none_or(|(b, _)| count < *b) {
            best = Some((count, ctx.matching_of(asg)));
        }
        count > 0
    });
    let mut stats = search.stats;
    stats.wall = started.elapsed();
    let result = best.map(|(blocking_count, matching)| MinBpResult {
        matching,
        blocking_count,
        opt_measure: blocking_count + 1,
        stats,
    });
    match (search.aborted, result) {
        (false, Some(r)) => MinBpOutcome::Optimal(r),
        (_, r) => MinBpOutcome::Inconclusive(r),
    }
}

struct Search<'c, 'a> {
    ctx: &'c Ctx<'a>,
    budget: Option<u64>,
    stats: SearchStats,
    aborted: bool,
}

impl<'c, 'a> Search<'c, 'a> {
    fn new(ctx: &'c Ctx<'a>, budget: Option<u64>) -> Self {
        Search { ctx, budget, stats: SearchStats::default(), aborted: false }
    }

    /// Runs the DFS; `on_leaf` returns false to stop the whole search.
    fn run(&mut self, on_leaf: &mut dyn FnMut(&Ctx, &Assignment, &Load) -> bool) {
        let mut asg: Assignment = vec![None; self.ctx.applicant_count()];
        let mut load = Load {
            used: vec![vec![0; self.ctx.subject_count()]; self.ctx.school_count()],
            assigned: vec![Vec::new(); self.ctx.school_count()],
        };
        self.dfs(0, &mut asg, &mut load, on_leaf);
    }

    fn dfs(
        &mut self,
        depth: usize,
        asg: &mut Assignment,
        load: &mut Load,
        on_leaf: &mut dyn FnMut(&Ctx, &Assignment, &Load) -> bool,
    ) -> bool {
        self.stats.nodes += 1;
        if self.budget.is_some_and(|b| self.stats.nodes > b) {
            self.aborted = true;
            return false;
        }
        if depth == self.ctx.applicant_count() {
            self.stats.leaves += 1;
            return on_leaf(self.ctx, asg, load);
        }
        let (p, r) = self.ctx.types[depth];
        for idx in 0..self.ctx.prefs[depth].len() {
            let si = self.ctx.prefs[depth][idx];
            if load.used[si][p] < self.ctx.caps[si][p] && load.used[si][r] < self.ctx.caps[si][r] {
                load.used[si][p] += 1;
                load.used[si][r] += 1;
                load.assigned[si].push(depth);
                asg[depth] = Some(si);
                let go_on = self.dfs(depth + 1, asg, load, on_leaf);
                asg[depth] = None;
                load.assigned[si].pop();
                load.used[si][p] -= 1;
                load.used[si][r] -= 1;
                if !go_on {
                    return false;
                }
            }
        }
        self.dfs(depth + 1, asg, load, on_leaf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_instance, parse_matching, Matching};

    const J1: &str = include_str!("../../../fixtures/j1.json");
    const J2: &str = include_str!("../../../fixtures/j2.json");
    const J3: &str = include_str!("../../../fixtures/j3.json");
    const TOY_SD: &str = include_str!("../../../fixtures/toy_sd.json");
    const TOY_DSD: &str = include_str!("../../../fixtures/toy_dsd.json");

    fn instance(doc: &str) -> Instance {
        parse_instance(doc).unwrap()
    }

    fn pairs(doc: &str) -> Matching {
        parse_matching(doc).unwrap()
    }

    #[test]
    fn serial_dictatorship_walks_the_master_list() {
        let inst = instance(TOY_SD);
        let m = serial_dictatorship(&inst).unwrap();
        assert_eq!(m, pairs(r#"{"pairs": [["a1","s1"],["a2","s2"]]}"#));
        // Cross-check uniqueness: exhaustive search finds exactly this one.
        let result = enumerate_stable(&inst, None, None);
        assert_eq!(result.status, SearchStatus::Exhausted);
        assert_eq!(result.matchings, vec![m]);
    }

    #[test]
    fn serial_dictatorship_leaves_a_blocked_applicant_out() {
        // A single applicant whose only school has no capacity in one of
        // her subjects stays unassigned.
        let doc = r#"{
            "mode": "linear",
            "subjects": ["F", "M"],
            "applicants": [{"id": "a1", "type": ["F", "M"], "prefs": ["s1"]}],
            "schools": [{"id": "s1", "capacities": {"F": 1}, "prefs": ["a1"]}],
            "master_list_applicants": ["a1"]
        }"#;
        let m = serial_dictatorship(&instance(doc)).unwrap();
        assert!(m.is_empty());
    }

    #[test]
    fn serial_dictatorship_requires_its_master_list() {
        let err = serial_dictatorship(&instance(J1)).unwrap_err();
        assert!(matches!(err, SolveError::MissingMasterList { kind: "applicants", .. }));
    }

    #[test]
    fn empty_master_list_gives_empty_matching() {
        let doc = r#"{
            "mode": "linear",
            "subjects": ["F", "M"],
            "applicants": [],
            "schools": [{"id": "s1", "capacities": {"F": 1}, "prefs": []}],
            "master_list_applicants": []
        }"#;
        assert!(serial_dictatorship(&instance(doc)).unwrap().is_empty());
    }

    #[test]
    fn dual_serial_dictatorship_admits_greedily_per_school() {
        let inst = instance(TOY_DSD);
        let m = dual_serial_dictatorship(&inst).unwrap();
        assert_eq!(m, pairs(r#"{"pairs": [["a1","s1"],["a2","s2"]]}"#));
        let result = enumerate_stable(&inst, None, None);
        assert_eq!(result.matchings, vec![m]);
    }

    #[test]
    fn dual_serial_dictatorship_requires_its_master_list() {
        let err = dual_serial_dictatorship(&instance(J1)).unwrap_err();
        assert!(matches!(err, SolveError::MissingMasterList { kind: "schools", .. }));
    }

    #[test]
    fn figure_two_market_has_no_stable_matching() {
        let result = enumerate_stable(&instance(J2), None, None);
        assert_eq!(result.status, SearchStatus::Exhausted);
        assert!(result.matchings.is_empty());
        // Every leaf is one valid matching; J2 has exactly 11 of them.
        assert_eq!(result.stats.leaves, 11);
    }

    #[test]
    fn figure_three_market_has_exactly_the_two_published_stable_matchings() {
        let result = enumerate_stable(&instance(J3), None, None);
        let m1 = pairs(r#"{"pairs": [["a1","s2"],["a2","s1"]]}"#);
        let m2 = pairs(r#"{"pairs": [["a1","s1"],["a2","s2"],["a3","s1"]]}"#);
        assert_eq!(result.matchings, vec![m1, m2]);
    }

    #[test]
    fn one_applicant_one_school_enumerates_the_singleton() {
        let doc = r#"{
            "mode": "linear",
            "subjects": ["F", "M"],
            "applicants": [{"id": "a1", "type": ["F", "M"], "prefs": ["s1"]}],
            "schools": [{"id": "s1", "capacities": {"F": 1, "M": 1}, "prefs": ["a1"]}]
        }"#;
        let result = enumerate_stable(&instance(doc), None, None);
        assert_eq!(result.matchings, vec![pairs(r#"{"pairs": [["a1","s1"]]}"#)]);
    }

    #[test]
    fn enumeration_is_deterministic_and_limit_truncates() {
        let inst = instance(J3);
        let a = enumerate_stable(&inst, None, None);
        let b = enumerate_stable(&inst, None, None);
        assert_eq!(a.matchings, b.matchings);
        let limited = enumerate_stable(&inst, Some(1), None);
        assert_eq!(limited.status, SearchStatus::LimitReached);
        assert_eq!(limited.matchings, a.matchings[..1]);
    }

    #[test]
    fn budget_exhaustion_is_inconclusive_not_negative() {
        let result = enumerate_stable(&instance(J2), None, Some(2));
        assert_eq!(result.status, SearchStatus::BudgetExhausted);
        let out = min_blocking_pairs(&instance(J2), Some(2));
        assert!(matches!(out, MinBpOutcome::Inconclusive(None)));
    }

    #[test]
    fn min_blocking_pairs_golden_values() {
        // J3 admits stable matchings, so the minimum is zero.
        match min_blocking_pairs(&instance(J3), None) {
            MinBpOutcome::Optimal(r) => {
                assert_eq!(r.blocking_count, 0);
                assert_eq!(r.opt_measure, 1);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
        // J2 admits none; the brute-force minimum over its 11 valid
        // matchings is 1, achieved first by {(a1,s2),(a2,s1)}.
        match min_blocking_pairs(&instance(J2), None) {
            MinBpOutcome::Optimal(r) => {
                assert_eq!(r.blocking_count, 1);
                assert_eq!(r.opt_measure, 2);
                assert_eq!(r.matching, pairs(r#"{"pairs": [["a1","s2"],["a2","s1"]]}"#));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn empty_market_minimizes_trivially() {
        let doc = r#"{
            "mode": "linear",
            "subjects": ["F"],
            "applicants": [],
            "schools": []
        }"#;
        // A subject pair needs two subjects, so keep one lone subject and
        // no applicants: the empty matching is the only (and optimal) one.
        match min_blocking_pairs(&instance(doc), None) {
            MinBpOutcome::Optimal(r) => {
                assert_eq!(r.blocking_count, 0);
                assert!(r.matching.is_empty());
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }
}
