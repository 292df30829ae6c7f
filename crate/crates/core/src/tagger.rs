//! Entity taggers.
//!
//! [`BaselineTagger`] is a lexicon and regular-expression tagger so the
//! pipeline runs end to end without a trained model. [`Passthrough`] reuses
//! the entities already present on a document (gold annotations or the
//! output of an external tagger loaded from standoff files).

use std::path::Path;

use regex::Regex;

use crate::docmodel::{AnnotatedDocument, DocText, Entity, Span, VertexLabel};
use crate::error::{Error, Result};
use crate::textprep::{normalize, NormalizationTable};

pub trait EntityTagger: Send + Sync {
    fn tag_document(&self, doc: &AnnotatedDocument) -> Result<Vec<Entity>>;
}

/// Returns the entities already on the document.
#[derive(Debug, Clone, Copy, Default)]
pub struct Passthrough;

impl EntityTagger for Passthrough {
    fn tag_document(&self, doc: &AnnotatedDocument) -> Result<Vec<Entity>> {
        if doc.entities.is_empty() {
            return Err(Error::NoAnnotations(doc.doc_id.clone()));
        }
        Ok(doc.entities.clone())
    }
}

/// Entities from a separately loaded prediction corpus, matched by document
/// id. The texts must agree.
#[derive(Debug, Clone, Default)]
pub struct StandoffPredictions {
    docs: std::collections::HashMap<String, AnnotatedDocument>,
}

impl StandoffPredictions {
    pub fn new(docs: impl IntoIterator<Item = AnnotatedDocument>) -> Self {
        StandoffPredictions {
            docs: docs.into_iter().map(|d| (d.doc_id.clone(), d)).collect(),
        }
    }
}

impl EntityTagger for StandoffPredictions {
    fn tag_document(&self, doc: &AnnotatedDocument) -> Result<Vec<Entity>> {
        let pred = self
            .docs
            .get(&doc.doc_id)
            .ok_or_else(|| Error::DocumentMismatch(format!("no prediction for document `{}`", doc.doc_id)))?;
        if pred.text != doc.text {
            return Err(Error::DocumentMismatch(format!("prediction for `{}` has a different text", doc.doc_id)));
        }
        Ok(pred.entities.clone())
    }
}

const DEFAULT_OPERATIONS: &str = include_str!("../data/operations.txt");
const DEFAULT_SOLVENTS: &str = include_str!("../data/solvents.txt");
const DEFAULT_ATMOSPHERES: &str = include_str!("../data/atmospheres.txt");
const DEFAULT_MANUFACTURERS: &str = include_str!("../data/manufacturers.txt");
const DEFAULT_PATTERNS: &str = include_str!("../data/patterns.txt");

fn term_lines(src: &str) -> Vec<String> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[derive(Debug, Clone)]
pub struct TaggerLexicon {
    pub operation_verbs: Vec<String>,
    pub solvent_names: Vec<String>,
    pub atmosphere_terms: Vec<String>,
    pub manufacturer_names: Vec<String>,
    /// `(property label, pattern)`, in file order.
    pub unit_patterns: Vec<(VertexLabel, String)>,
}

impl Default for TaggerLexicon {
    fn default() -> Self {
        TaggerLexicon {
            operation_verbs: term_lines(DEFAULT_OPERATIONS),
            solvent_names: term_lines(DEFAULT_SOLVENTS),
            atmosphere_terms: term_lines(DEFAULT_ATMOSPHERES),
            manufacturer_names: term_lines(DEFAULT_MANUFACTURERS),
            unit_patterns: parse_patterns(DEFAULT_PATTERNS).expect("shipped patterns are valid"),
        }
    }
}

fn pattern_label(name: &str) -> Option<VertexLabel> {
    Some(match name {
        "time" => VertexLabel::PropertyTime,
        "temp" => VertexLabel::PropertyTemp,
        "rot" => VertexLabel::PropertyRot,
        "press" => VertexLabel::PropertyPress,
        "atmosphere" => VertexLabel::PropertyAtmosphere,
        "others" => VertexLabel::PropertyOthers,
        _ => return None,
    })
}

/// `name=regex` lines.
pub fn parse_patterns(src: &str) -> Result<Vec<(VertexLabel, String)>> {
    let mut out = Vec::new();
    for (n, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, re) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("pattern line {}: expected name=regex", n + 1)))?;
        let label = pattern_label(name.trim())
            .ok_or_else(|| Error::Config(format!("pattern line {}: unknown pattern name `{name}`", n + 1)))?;
        Regex::new(re).map_err(|e| Error::Config(format!("pattern line {}: {e}", n + 1)))?;
        out.push((label, re.to_string()));
    }
    Ok(out)
}

impl TaggerLexicon {
    /// Loads `operations.txt`, `solvents.txt`, `atmospheres.txt`,
    /// `manufacturers.txt` and `patterns.txt` from `dir`; missing files fall
    /// back to the shipped defaults.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut lex = TaggerLexicon::default();
        let read = |name: &str| -> Result<Option<String>> {
            let p = dir.join(name);
            match std::fs::read_to_string(&p) {
                Ok(s) => Ok(Some(s)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(Error::io(p, e)),
            }
        };
        if let Some(s) = read("operations.txt")? {
            lex.operation_verbs = term_lines(&s);
        }
        if let Some(s) = read("solvents.txt")? {
            lex.solvent_names = term_lines(&s);
        }
        if let Some(s) = read("atmospheres.txt")? {
            lex.atmosphere_terms = term_lines(&s);
        }
        if let Some(s) = read("manufacturers.txt")? {
            lex.manufacturer_names = term_lines(&s);
        }
        if let Some(s) = read("patterns.txt")? {
            lex.unit_patterns = parse_patterns(&s)?;
        }
        Ok(lex)
    }
}

fn alternation(terms: &[String], case_insensitive: bool) -> Result<Option<Regex>> {
    if terms.is_empty() {
        return Ok(None);
    }
    let mut sorted: Vec<&String> = terms.iter().collect();
    sorted.sort_by_key(|t| std::cmp::Reverse(t.len()));
    let body = sorted.iter().map(|t| regex::escape(t)).collect::<Vec<_>>().join("|");
    let flags = if case_insensitive { "(?i)" } else { "" };
    Regex::new(&format!(r"{flags}\b(?:{body})\b"))
        .map(Some)
        .map_err(|e| Error::Config(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Fixed(VertexLabel),
    Formula,
    Alias,
}

#[derive(Debug)]
pub struct BaselineTagger {
    // earlier entries win ties on identical spans
    matchers: Vec<(Regex, Source)>,
    synth_verb: Regex,
    source_prep: Regex,
    normalization: NormalizationTable,
}

impl Default for BaselineTagger {
    fn default() -> Self {
        Self::new(&TaggerLexicon::default()).expect("shipped lexicon compiles")
    }
}

impl BaselineTagger {
    pub fn new(lex: &TaggerLexicon) -> Result<Self> {
        let mut matchers = Vec::new();
        for (label, re) in &lex.unit_patterns {
            let re = Regex::new(re).map_err(|e| Error::Config(e.to_string()))?;
            matchers.push((re, Source::Fixed(*label)));
        }
        let lexicons = [
            (&lex.atmosphere_terms, VertexLabel::PropertyAtmosphere, false),
            (&lex.manufacturer_names, VertexLabel::PropertyOthers, false),
            (&lex.operation_verbs, VertexLabel::Operation, true),
            (&lex.solvent_names, VertexLabel::MaterialSolvent, true),
        ];
        for (terms, label, ci) in lexicons {
            if let Some(re) = alternation(terms, ci)? {
                matchers.push((re, Source::Fixed(label)));
            }
        }
        // element-symbol sequences with at least one digit somewhere
        let formula = Regex::new(r"\b(?:[A-Z][a-z]?(?:\d+(?:\.\d+)?)?){2,}\b").unwrap();
        matchers.push((formula, Source::Formula));
        let alias = Regex::new(r"\b(?:denoted|denoted as|abbreviated as|hereafter)\s+([A-Z][A-Za-z0-9]*)\b").unwrap();
        matchers.push((alias, Source::Alias));
        Ok(BaselineTagger {
            matchers,
            synth_verb: Regex::new(r"(?i)\b(?:obtain|obtained|obtaining|prepare|prepared|preparing|synthesi[sz]e|synthesi[sz]ed|synthesi[sz]ing)\b").unwrap(),
            source_prep: Regex::new(r"(?i)\b(?:from|using|with|by)\b").unwrap(),
            normalization: NormalizationTable::default(),
        })
    }

    pub fn with_normalization(mut self, table: NormalizationTable) -> Self {
        self.normalization = table;
        self
    }

    /// Tags normalized text. Spans never overlap; on conflict the longest
    /// match wins, then the leftmost, then the earlier matcher.
    pub fn tag(&self, text: &str) -> Vec<Entity> {
        let doc_text = DocText::new(text);
        // (byte start, byte end, matcher rank, source)
        let mut cands: Vec<(usize, usize, usize, Source)> = Vec::new();
        for (rank, (re, src)) in self.matchers.iter().enumerate() {
            match src {
                Source::Formula => {
                    for m in re.find_iter(text) {
                        if m.as_str().bytes().any(|b| b.is_ascii_digit()) {
                            cands.push((m.start(), m.end(), rank, *src));
                        }
                    }
                }
                Source::Alias => {
                    for c in re.captures_iter(text) {
                        let g = c.get(1).unwrap();
                        cands.push((g.start(), g.end(), rank, *src));
                    }
                }
                Source::Fixed(_) => {
                    for m in re.find_iter(text) {
                        cands.push((m.start(), m.end(), rank, *src));
                    }
                }
            }
        }
        cands.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.0.cmp(&b.0)).then(a.2.cmp(&b.2)));
        let mut kept: Vec<(usize, usize, Source)> = Vec::new();
        for (s, e, _, src) in cands {
            if kept.iter().all(|k| e <= k.0 || k.1 <= s) {
                kept.push((s, e, src));
            }
        }
        kept.sort_by_key(|k| k.0);

        let first_op = kept
            .iter()
            .find(|k| k.2 == Source::Fixed(VertexLabel::Operation))
            .map(|k| k.0);
        let mut labels: Vec<VertexLabel> = kept
            .iter()
            .map(|&(s, e, src)| match src {
                Source::Fixed(l) => l,
                Source::Alias => VertexLabel::MaterialFinal,
                Source::Formula => self.formula_role(text, s, e, first_op),
            })
            .collect();
        // the formula an alias names is a final product too
        for i in 0..kept.len() {
            if kept[i].2 != Source::Alias {
                continue;
            }
            let sentence_start = text[..kept[i].0].rfind(". ").map_or(0, |p| p + 2);
            if let Some(j) = (0..i).rev().find(|&j| kept[j].2 == Source::Formula && kept[j].0 >= sentence_start) {
                labels[j] = VertexLabel::MaterialFinal;
            }
        }

        kept.iter()
            .zip(labels)
            .enumerate()
            .map(|(i, (&(s, e, _), label))| {
                let span = Span {
                    start: doc_text.char_offset(s),
                    end: doc_text.char_offset(e),
                };
                Entity::new(format!("T{}", i + 1), label, vec![span], &doc_text)
                    .expect("matches lie within the text")
            })
            .collect()
    }

    fn formula_role(&self, text: &str, start: usize, end: usize, first_op: Option<usize>) -> VertexLabel {
        let sent_start = text[..start].rfind(". ").map_or(0, |p| p + 2);
        let sent_end = text[end..].find(". ").map_or(text.len(), |p| end + p + 1);
        let sentence = &text[sent_start..sent_end];
        if let Some(v) = self.synth_verb.find(sentence) {
            let (v_start, v_end) = (sent_start + v.start(), sent_start + v.end());
            if end <= v_start {
                // "X was obtained ..."
                return VertexLabel::MaterialFinal;
            }
            if start >= v_end && !self.source_prep.is_match(&text[v_end..start]) {
                // "... to obtain X"
                return VertexLabel::MaterialFinal;
            }
        }
        match first_op {
            Some(op) if start > op => VertexLabel::MaterialOthers,
            _ => VertexLabel::MaterialStart,
        }
    }
}

impl EntityTagger for BaselineTagger {
    /// Normalizes the document text, tags it, and projects spans back onto
    /// the original text.
    fn tag_document(&self, doc: &AnnotatedDocument) -> Result<Vec<Entity>> {
        let (normalized, map) = normalize(doc.text.as_str(), &self.normalization);
        let tagged = self.tag(&normalized);
        if map.is_identity() {
            return Ok(tagged);
        }
        tagged
            .into_iter()
            .map(|e| {
                let spans = e
                    .spans
                    .iter()
                    .map(|s| map.to_original(*s).expect("non-empty spans project"))
                    .collect();
                Entity::new(e.id, e.label, spans, &doc.text)
            })
            .collect()
    }
}
