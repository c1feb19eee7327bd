use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::CandidateSets;
use crate::types::{Document, Qrel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocClass {
    /// Already a positive for this query.
    Type1OriginalPositive,
    /// One of this query's generated hard negatives.
    Type2HardNegative,
    /// Not labeled for this query.
    Type3Unlabeled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Skip,
    DiscardHardNegative,
    AddPositive,
    /// An existing positive judged irrelevant. Queries reaching label
    /// correction already passed the judge, so this is recorded, not applied.
    IntegrityViolation,
}

/// The action table, indexed by document class and the judge's verdict.
pub fn action_for(class: DocClass, llm_positive: bool) -> Action {
    match (class, llm_positive) {
        (DocClass::Type1OriginalPositive, true) => Action::Skip,
        (DocClass::Type1OriginalPositive, false) => Action::IntegrityViolation,
        (DocClass::Type2HardNegative, true) => Action::DiscardHardNegative,
        (DocClass::Type2HardNegative, false) => Action::Skip,
        (DocClass::Type3Unlabeled, true) => Action::AddPositive,
        (DocClass::Type3Unlabeled, false) => Action::Skip,
    }
}

/// Class of `doc_id` with respect to `query_id` in the current state.
pub fn classify(state: &CandidateSets, query_id: &str, doc_id: &str) -> DocClass {
    let has = |set: &[Qrel]| set.iter().any(|r| r.query_id == query_id && r.doc_id == doc_id);
    if has(&state.pos_qrels) {
        DocClass::Type1OriginalPositive
    } else if has(&state.neg_qrels) && state.hard_negatives.iter().any(|d| d.id == doc_id) {
        DocClass::Type2HardNegative
    } else {
        DocClass::Type3Unlabeled
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionOutcome {
    pub query_id: String,
    pub doc_id: String,
    pub doc_class: DocClass,
    pub action: Action,
}

/// Applies one cell of the action table to `state`. `doc` is needed only
/// when it may enter the positive set.
pub fn apply_action_matrix(
    query_id: &str,
    doc: &Document,
    doc_class: DocClass,
    llm_positive: bool,
    state: &mut CandidateSets,
) -> Result<ActionOutcome> {
    let actual = classify(state, query_id, &doc.id);
    if actual != doc_class {
        return Err(Error::integrity(format!(
            "({query_id}, {}) was labeled {doc_class:?} but the candidate sets say {actual:?}",
            doc.id
        )));
    }
    let action = action_for(doc_class, llm_positive);
    match action {
        Action::Skip => {}
        Action::IntegrityViolation => {
            tracing::warn!(query_id, doc_id = %doc.id, "existing positive judged irrelevant");
        }
        Action::DiscardHardNegative => {
            state
                .neg_qrels
                .retain(|r| !(r.query_id == query_id && r.doc_id == doc.id));
            if let Some(i) = state.hard_negatives.iter().position(|d| d.id == doc.id) {
                let removed = state.hard_negatives.remove(i);
                // another query may have adopted it as a positive meanwhile
                if state.pos_qrels.iter().any(|r| r.doc_id == removed.id) {
                    state.positives.push(removed);
                }
            }
        }
        Action::AddPositive => {
            state.pos_qrels.push(Qrel::new(query_id, &doc.id, 1));
            let known = state
                .positives
                .iter()
                .chain(&state.hard_negatives)
                .any(|d| d.id == doc.id);
            if !known {
                state.positives.push(doc.clone());
            }
        }
    }
    Ok(ActionOutcome {
        query_id: query_id.to_string(),
        doc_id: doc.id.clone(),
        doc_class,
        action,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{
        InfoType, LengthBucket, Origin, Provenance, Query, QueryAttributes, QueryType, Style, META_QUERY_ID,
    };

    fn state() -> CandidateSets {
        let q = Query {
            id: "q-0".into(),
            text: "t".into(),
            original_text: "t".into(),
            attributes: QueryAttributes {
                length_bucket: LengthBucket::Under5,
                query_type: QueryType::Question,
                info_type: InfoType::Overall,
                style: Style::Concise,
            },
            character: "c".into(),
            scenario: "s".into(),
            positive_doc_id: "d0".into(),
            rewrite_history: vec!["t".into()],
            provenance: Provenance::default(),
        };
        let hn = Document::new("q-0-hn-0", "neg")
            .with_origin(Origin::HardNegative)
            .with_meta(META_QUERY_ID, "q-0");
        CandidateSets {
            queries: vec![q],
            positives: vec![Document::new("d0", "pos")],
            hard_negatives: vec![hn],
            pos_qrels: vec![Qrel::new("q-0", "d0", 1)],
            neg_qrels: vec![Qrel::new("q-0", "q-0-hn-0", 0)],
        }
    }

    #[test]
    fn all_six_cells() {
        let pos = Document::new("d0", "pos");
        let hn = state().hard_negatives[0].clone();
        let other = Document::new("d9", "other");
        let cases = [
            (&pos, DocClass::Type1OriginalPositive, true, Action::Skip),
            (&pos, DocClass::Type1OriginalPositive, false, Action::IntegrityViolation),
            (&hn, DocClass::Type2HardNegative, true, Action::DiscardHardNegative),
            (&hn, DocClass::Type2HardNegative, false, Action::Skip),
            (&other, DocClass::Type3Unlabeled, true, Action::AddPositive),
            (&other, DocClass::Type3Unlabeled, false, Action::Skip),
        ];
        for (doc, class, verdict, expected) in cases {
            let before = state();
            let mut s = before.clone();
            let out = apply_action_matrix("q-0", doc, class, verdict, &mut s).unwrap();
            assert_eq!(out.action, expected);
            match expected {
                Action::Skip | Action::IntegrityViolation => assert_eq!(s, before),
                Action::DiscardHardNegative => {
                    assert!(s.hard_negatives.is_empty());
                    assert!(s.neg_qrels.is_empty());
                    assert_eq!(s.pos_qrels, before.pos_qrels);
                }
                Action::AddPositive => {
                    assert!(s.pos_qrels.contains(&Qrel::new("q-0", "d9", 1)));
                    assert_eq!(s.positives.len(), 2);
                    assert_eq!(s.neg_qrels, before.neg_qrels);
                }
            }
            s.validate().unwrap();
        }
    }

    #[test]
    fn inconsistent_class_is_rejected() {
        let mut s = state();
        let err = apply_action_matrix(
            "q-0",
            &Document::new("d0", "pos"),
            DocClass::Type3Unlabeled,
            true,
            &mut s,
        );
        assert!(matches!(err, Err(Error::Integrity(_))));
    }
}
