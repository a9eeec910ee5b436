//! Canonical JSON documents for instances and matchings.
//!
//! Serialization is canonical: fields in a fixed order, maps with sorted
//! keys, arrays in input order, two-space indent, LF line endings, trailing
//! newline. Structurally equal values serialize to identical bytes, and
//! `parse ∘ serialize` is the identity on validated values.

use crate::model::{Instance, Matching, ModelError};

/// Parses and fully validates an instance document. Parsing is total:
/// either a structurally valid (normalized) instance or an error.
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let inst: Instance = serde_json::from_str(text)?;
    inst.validate()
}

/// Canonical document for a validated instance.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = serde_json::to_string_pretty(inst).expect("instance serializes");
    out.push('\n');
    out
}

/// Parses a matching document (`{"pairs": [[applicant, school], ...]}`).
/// Only well-formedness and at-most-one-school-per-applicant are checked
/// here; resolution against an instance happens in the consuming operation.
pub fn parse_matching(text: &str) -> Result<Matching, ModelError> {
    let m: Matching = serde_json::from_str(text)?;
    Matching::new(m.pairs().to_vec())
}

/// Canonical document for a matching, pairs in stored order.
pub fn serialize_matching(m: &Matching) -> String {
    let mut out = serde_json::to_string_pretty(m).expect("matching serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Mode, ModelError};

    const J1: &str = include_str!("../../../../fixtures/j1.json");
    const J2: &str = include_str!("../../../../fixtures/j2.json");
    const J3: &str = include_str!("../../../../fixtures/j3.json");

    #[test]
    fn parses_figure_one() {
        let j1 = parse_instance(J1).unwrap();
        assert_eq!(j1.mode, Mode::Linear);
        assert_eq!(j1.subjects, ["F", "I", "M"]);
        assert_eq!(j1.applicants.len(), 4);
        assert_eq!(j1.schools.len(), 3);
        assert_eq!(j1.applicant("a4").unwrap().prefs, ["s3", "s2", "s1"]);
        assert_eq!(j1.school("s1").unwrap().capacity("F"), 2);
        assert_eq!(j1.school("s1").unwrap().capacity("M"), 1);
    }

    #[test]
    fn empty_market_is_legal() {
        let doc = r#"{
            "mode": "linear",
            "subjects": ["F", "I"],
            "applicants": [],
            "schools": [{"id": "s1", "capacities": {"F": 1}, "prefs": []}]
        }"#;
        let inst = parse_instance(doc).unwrap();
        assert_eq!(inst.applicants.len(), 0);
        assert_eq!(inst.schools.len(), 1);
    }

    #[test]
    fn school_ranking_a_stranger_is_rejected() {
        // J1 with s2's list changed to rank a1, who does not rank s2.
        let doc = J1.replace(r#""prefs": ["a4", "a3"]"#, r#""prefs": ["a4", "a3", "a1"]"#);
        let err = parse_instance(&doc).unwrap_err();
        assert!(matches!(err, ModelError::ListMismatch { ref school, .. } if school == "s2"), "{err}");
    }

    #[test]
    fn school_missing_an_acceptor_is_rejected() {
        let doc = J1.replace(r#""prefs": ["a4", "a3"]"#, r#""prefs": ["a4"]"#);
        let err = parse_instance(&doc).unwrap_err();
        assert!(matches!(err, ModelError::ListMismatch { ref school, .. } if school == "s2"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_instance("{\n  \"mode\": linear\n}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn round_trip_and_canonical_idempotence() {
        for doc in [J1, J2, J3] {
            let inst = parse_instance(doc).unwrap();
            let canon = serialize_instance(&inst);
            let reparsed = parse_instance(&canon).unwrap();
            assert_eq!(reparsed, inst);
            assert_eq!(serialize_instance(&reparsed), canon);
        }
    }

    #[test]
    fn zero_capacities_normalize_away() {
        let explicit = r#"{
            "mode": "linear",
            "subjects": ["F", "I", "M"],
            "applicants": [{"id": "a1", "type": ["M", "F"], "prefs": ["s1"]}],
            "schools": [{"id": "s1", "capacities": {"F": 1, "I": 0, "M": 1}, "prefs": ["a1"]}]
        }"#;
        let implicit = r#"{
            "mode": "linear",
            "subjects": ["F", "I", "M"],
            "applicants": [{"id": "a1", "type": ["F", "M"], "prefs": ["s1"]}],
            "schools": [{"id": "s1", "capacities": {"F": 1, "M": 1}, "prefs": ["a1"]}]
        }"#;
        let a = parse_instance(explicit).unwrap();
        let b = parse_instance(implicit).unwrap();
        assert_eq!(a, b);
        assert_eq!(serialize_instance(&a), serialize_instance(&b));
        // Type pair got normalized to subject declaration order.
        assert_eq!(a.applicants[0].subject_pair, ["F".to_string(), "M".to_string()]);
    }

    #[test]
    fn matching_round_trip() {
        let m = parse_matching(r#"{"pairs": [["a1", "s3"], ["a2", "s1"]]}"#).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.school_of("a1"), Some("s3"));
        let again = parse_matching(&serialize_matching(&m)).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn matching_rejects_double_assignment() {
        let err = parse_matching(r#"{"pairs": [["a1", "s3"], ["a1", "s1"]]}"#).unwrap_err();
        assert!(matches!(err, ModelError::DuplicateAssignment { .. }));
    }

    #[test]
    fn master_list_permutation_fails_validation() {
        let doc = r#"{
            "mode": "linear",
            "subjects": ["F", "M"],
            "applicants": [
                {"id": "a1", "type": ["F", "M"], "prefs": ["s1"]},
                {"id": "a2", "type": ["F", "M"], "prefs": ["s1"]}
            ],
            "schools": [{"id": "s1", "capacities": {"F": 1, "M": 1}, "prefs": ["a2", "a1"]}],
            "master_list_applicants": ["a1", "a2"]
        }"#;
        let err = parse_instance(doc).unwrap_err();
        assert!(matches!(err, ModelError::MasterListOrder { .. }), "{err}");
        let ok = doc.replace(r#""prefs": ["a2", "a1"]"#, r#""prefs": ["a1", "a2"]"#);
        parse_instance(&ok).unwrap();
    }
}
