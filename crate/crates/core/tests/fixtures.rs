use std::path::Path;

use synthgraph_core::eval::{corpus_stats, relation_prf, rule_stats};
use synthgraph_core::relext::{extract_document, PredictedRelation, Rule};
use synthgraph_core::standoff::{load_corpus, LoadOptions};
use synthgraph_core::{Abbreviations, AnnotatedDocument, CorpusHandle, EdgeLabel, Relation, RuleConfig};

fn mini() -> CorpusHandle {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini");
    let (corpus, report) = load_corpus(&dir, &LoadOptions::default()).unwrap();
    assert!(report.is_clean());
    corpus
}

fn doc<'a>(c: &'a CorpusHandle, id: &str) -> &'a AnnotatedDocument {
    c.get(id).unwrap()
}

#[test]
fn mini_corpus_statistics() {
    let c = mini();
    let s = corpus_stats(&c.documents, &Abbreviations::default());
    // counted by hand over lto (2 sentences, 74 tokens) and brackets (3, 47)
    assert_eq!((s.documents, s.sentences, s.tokens), (2, 5, 121));
    assert_eq!((s.entities, s.relations), (34, 32));
    assert_eq!((s.avg_sentences, s.avg_tokens, s.avg_entities), (3, 61, 17));
    let v = |k: &str| s.vertices[k];
    assert_eq!(v("Material-Start"), 6);
    assert_eq!(v("Material-Final"), 3);
    assert_eq!(v("Material-Solvent"), 1);
    assert_eq!(v("Material-Intermedium") + v("Material-Others"), 0);
    assert_eq!(v("Operation"), 10);
    assert_eq!(v("Property-Others"), 5);
    assert_eq!((v("Property-Time"), v("Property-Temp")), (3, 3));
    assert_eq!((v("Property-Rot"), v("Property-Press"), v("Property-Atmosphere")), (1, 1, 1));
    assert_eq!((s.coarse["Material"], s.coarse["Operation"], s.coarse["Property"]), (10, 10, 14));
    assert_eq!((s.edges["Condition"], s.edges["Next"], s.edges["Coreference"]), (14, 17, 1));
}

#[test]
fn lto_relation_scores() {
    let c = mini();
    let gold = doc(&c, "lto");
    let x = extract_document(gold, &RuleConfig::default(), &Abbreviations::default()).unwrap();
    let r = relation_prf(gold, &x.relations()).unwrap();
    let cond = r.per_type["Condition"];
    assert_eq!((cond.tp, cond.fp, cond.fn_), (9, 0, 0));
    // the two O-M edges collapse onto the LTO cluster and both miss
    let next = r.per_type["Next"];
    assert_eq!((next.tp, next.fp, next.fn_), (5, 3, 3));
    assert_eq!(next.f1, 0.625);
    assert_eq!(r.macro_f1, 0.8125);
}

#[test]
fn lto_rule_attribution() {
    let c = mini();
    let gold = doc(&c, "lto");
    let x = extract_document(gold, &RuleConfig::default(), &Abbreviations::default()).unwrap();
    let s = rule_stats(gold, &x.predictions).unwrap();
    let row = |r: Rule| (s.rules[&r].predicted, s.rules[&r].correct);
    assert_eq!(row(Rule::OO), (4, 2));
    assert_eq!(row(Rule::MO), (3, 3));
    assert_eq!(row(Rule::OM), (2, 0));
    assert_eq!(row(Rule::PoOM), (5, 5));
    assert_eq!(row(Rule::PO), (4, 4));
    assert_eq!(s.total, 18);
}

#[test]
fn brackets_fixture_is_reproduced_exactly() {
    let c = mini();
    let gold = doc(&c, "brackets");
    let x = extract_document(gold, &RuleConfig::default(), &Abbreviations::default()).unwrap();
    let r = relation_prf(gold, &x.relations()).unwrap();
    assert_eq!(r.macro_f1, 1.0);
    let s = rule_stats(gold, &x.predictions).unwrap();
    let row = |r: Rule| s.rules[&r].predicted;
    assert_eq!((row(Rule::OO), row(Rule::MO), row(Rule::OM), row(Rule::PoOM), row(Rule::PO)), (4, 4, 1, 0, 5));
}

#[test]
fn ten_edge_attribution_fixture() {
    let c = mini();
    let gold = doc(&c, "lto");
    let p = |rule, label, a: &str, b: &str| PredictedRelation {
        relation: Relation::new("", label, a, b),
        rule,
    };
    use EdgeLabel::{Condition as C, Next as N};
    let preds = [
        p(Rule::OO, N, "T9", "T11"),
        p(Rule::OO, N, "T11", "T13"),
        p(Rule::OO, N, "T16", "T19"),
        p(Rule::MO, N, "T3", "T9"),
        p(Rule::MO, N, "T12", "T11"),
        p(Rule::OM, N, "T19", "T2"),
        p(Rule::PoOM, C, "T3", "T4"),
        p(Rule::PoOM, C, "T9", "T5"),
        p(Rule::PO, C, "T13", "T14"),
        p(Rule::PO, C, "T16", "T17"),
    ];
    let s = rule_stats(gold, &preds).unwrap();
    let expect = [
        (Rule::OO, 0.3, 2.0 / 3.0),
        (Rule::MO, 0.2, 1.0),
        (Rule::OM, 0.1, 0.0),
        (Rule::PoOM, 0.2, 0.5),
        (Rule::PO, 0.2, 1.0),
    ];
    for (rule, cov, acc) in expect {
        assert!((s.rules[&rule].coverage - cov).abs() < 1e-12, "{rule}");
        assert!((s.rules[&rule].accuracy - acc).abs() < 1e-12, "{rule}");
    }
}

#[test]
fn list_file_selects_documents() {
    let dir = tempfile::tempdir().unwrap();
    let mini = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini");
    let list = dir.path().join("split.txt");
    std::fs::write(&list, format!("{}\n", mini.join("lto").display())).unwrap();
    let (c, _) = load_corpus(&list, &LoadOptions::default()).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c.documents[0].doc_id, "lto");
}
