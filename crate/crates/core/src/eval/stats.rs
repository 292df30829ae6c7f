use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::docmodel::{AnnotatedDocument, CoarseGroup, EdgeLabel, VertexLabel};
use crate::textprep::{analyze, Abbreviations};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub sentences: usize,
    pub tokens: usize,
    pub entities: usize,
    pub relations: usize,
    pub vertices: BTreeMap<String, usize>,
    pub coarse: BTreeMap<String, usize>,
    pub edges: BTreeMap<String, usize>,
    /// Per-document averages, rounded to the nearest integer.
    pub avg_sentences: usize,
    pub avg_tokens: usize,
    pub avg_entities: usize,
}

fn rounded_mean(total: usize, n: usize) -> usize {
    if n == 0 {
        0
    } else {
        (2 * total + n) / (2 * n)
    }
}

/// Sentence and token counts come from this crate's tokenizer.
pub fn corpus_stats<'a>(docs: impl IntoIterator<Item = &'a AnnotatedDocument>, abbrevs: &Abbreviations) -> CorpusStats {
    let mut s = CorpusStats {
        documents: 0,
        sentences: 0,
        tokens: 0,
        entities: 0,
        relations: 0,
        vertices: VertexLabel::ALL.iter().map(|l| (l.as_str().to_string(), 0)).collect(),
        coarse: CoarseGroup::ALL.iter().map(|g| (g.as_str().to_string(), 0)).collect(),
        edges: EdgeLabel::ALL.iter().map(|l| (l.as_str().to_string(), 0)).collect(),
        avg_sentences: 0,
        avg_tokens: 0,
        avg_entities: 0,
    };
    for d in docs {
        let a = analyze(d.text.as_str(), abbrevs);
        s.documents += 1;
        s.sentences += a.sentences.len();
        s.tokens += a.tokens.len();
        s.entities += d.entities.len();
        s.relations += d.relations.len();
        for e in &d.entities {
            *s.vertices.get_mut(e.label.as_str()).unwrap() += 1;
            *s.coarse.get_mut(e.coarse().as_str()).unwrap() += 1;
        }
        for r in &d.relations {
            *s.edges.get_mut(r.label.as_str()).unwrap() += 1;
        }
    }
    s.avg_sentences = rounded_mean(s.sentences, s.documents);
    s.avg_tokens = rounded_mean(s.tokens, s.documents);
    s.avg_entities = rounded_mean(s.entities, s.documents);
    s
}

impl CorpusStats {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let mut row = |k: &str, v: usize| {
            let _ = writeln!(out, "{k:<28} {v:>8}");
        };
        row("documents", self.documents);
        row("sentences", self.sentences);
        row("tokens", self.tokens);
        row("entities", self.entities);
        row("relations", self.relations);
        row("avg sentences/document", self.avg_sentences);
        row("avg tokens/document", self.avg_tokens);
        row("avg entities/document", self.avg_entities);
        for g in CoarseGroup::ALL {
            row(g.as_str(), self.coarse[g.as_str()]);
            for l in VertexLabel::ALL.iter().filter(|l| l.coarse() == g) {
                row(&format!("  {}", l.as_str()), self.vertices[l.as_str()]);
            }
        }
        for l in EdgeLabel::ALL {
            row(l.as_str(), self.edges[l.as_str()]);
        }
        out
    }
}
