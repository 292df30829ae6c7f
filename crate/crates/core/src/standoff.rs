//! brat standoff (`.txt` + `.ann`) reading and writing, corpus loading and
//! JSON export.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::diag::{Diagnostic, DiagnosticKind};
use crate::docmodel::{
    validate_relations, AnnotatedDocument, DocText, EdgeLabel, Entity, Relation, Span, VertexLabel,
};
use crate::error::{Error, Result};
use crate::graph::SynthesisGraph;

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Reverse the arguments of every Condition relation on load.
    pub flip_condition: bool,
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub document: AnnotatedDocument,
    pub diagnostics: Vec<Diagnostic>,
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedLine {
        line,
        reason: reason.into(),
    }
}

// newlines and tabs cannot appear in a standoff surface field
fn flatten_ws(s: &str) -> String {
    s.replace(['\n', '\r', '\t'], " ")
}

fn parse_spans(src: &str, line: usize) -> Result<Vec<Span>> {
    src.split(';')
        .map(|frag| {
            let mut it = frag.split_whitespace();
            let (Some(s), Some(e), None) = (it.next(), it.next(), it.next()) else {
                return Err(malformed(line, format!("bad offsets `{frag}`")));
            };
            let start = s.parse().map_err(|_| malformed(line, format!("bad offset `{s}`")))?;
            let end = e.parse().map_err(|_| malformed(line, format!("bad offset `{e}`")))?;
            Ok(Span { start, end })
        })
        .collect()
}

fn parse_text_bound(line: &str, n: usize, text: &DocText) -> Result<Entity> {
    let mut fields = line.splitn(3, '\t');
    let (Some(id), Some(body), Some(surface)) = (fields.next(), fields.next(), fields.next()) else {
        return Err(malformed(n, "text-bound line needs three tab-separated fields"));
    };
    let (label, offsets) = body
        .split_once(' ')
        .ok_or_else(|| malformed(n, "missing offsets"))?;
    let label: VertexLabel = label.parse()?;
    let spans = parse_spans(offsets, n)?;
    let entity = Entity::new(id, label, spans, text).map_err(|e| match e {
        Error::InvalidSpan { .. } => malformed(n, format!("{e}")),
        other => other,
    })?;
    if flatten_ws(&entity.text) != flatten_ws(surface) {
        return Err(Error::OffsetMismatch {
            id: entity.id,
            expected: entity.text,
            found: surface.to_string(),
        });
    }
    Ok(entity)
}

fn parse_relation(line: &str, n: usize, opts: &ParseOptions) -> Result<Relation> {
    let (id, body) = line
        .split_once('\t')
        .ok_or_else(|| malformed(n, "relation line needs a tab after the id"))?;
    let mut parts = body.split_whitespace();
    let label: EdgeLabel = parts
        .next()
        .ok_or_else(|| malformed(n, "missing relation label"))?
        .parse()?;
    let (mut arg1, mut arg2) = (None, None);
    for p in parts {
        match p.split_once(':') {
            Some(("Arg1", v)) => arg1 = Some(v),
            Some(("Arg2", v)) => arg2 = Some(v),
            _ => return Err(malformed(n, format!("unexpected relation argument `{p}`"))),
        }
    }
    let (Some(mut from), Some(mut to)) = (arg1, arg2) else {
        return Err(malformed(n, "relation needs Arg1 and Arg2"));
    };
    if opts.flip_condition && label == EdgeLabel::Condition {
        std::mem::swap(&mut from, &mut to);
    }
    Ok(Relation::new(id, label, from, to))
}

/// Parses one document. Attribute, note, event, normalization and
/// equivalence lines are skipped with a diagnostic.
pub fn parse_document(doc_id: &str, txt: &str, ann: &str, opts: &ParseOptions) -> Result<Parsed> {
    let text = DocText::new(txt);
    let mut entities = Vec::new();
    let mut relations = Vec::new();
    let mut diagnostics = Vec::new();
    for (i, line) in ann.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        match line.as_bytes()[0] {
            b'T' => entities.push(parse_text_bound(line, n, &text)?),
            b'R' => relations.push(parse_relation(line.trim_end(), n, opts)?),
            b'A' | b'#' | b'E' | b'N' | b'M' | b'*' => diagnostics.push(Diagnostic::new(
                DiagnosticKind::SkippedLine,
                format!("{doc_id}: line {n}: skipped `{}`", line.split('\t').next().unwrap_or("")),
            )),
            _ => return Err(malformed(n, "unknown annotation type")),
        }
    }
    let mut ids = HashSet::new();
    for e in &entities {
        if !ids.insert(e.id.as_str()) {
            return Err(Error::DuplicateId(e.id.clone()));
        }
    }
    validate_relations(&relations, |id| ids.contains(id))?;
    let document = AnnotatedDocument {
        doc_id: doc_id.to_string(),
        text,
        entities,
        relations,
    };
    for (a, b) in document.overlapping_pairs() {
        diagnostics.push(Diagnostic::new(
            DiagnosticKind::OverlappingEntities,
            format!("{doc_id}: entities {a} and {b} overlap"),
        ));
    }
    Ok(Parsed {
        document,
        diagnostics,
    })
}

fn id_number(id: &str, prefix: char) -> Option<u64> {
    id.strip_prefix(prefix)?.parse().ok()
}

/// Writes a document as `(txt, ann)`. Entities come out in span order and
/// relations in id order. Identifiers are kept when they are valid brat ids,
/// otherwise everything is renumbered.
pub fn serialize_document(doc: &AnnotatedDocument) -> (String, String) {
    let mut entities: Vec<&Entity> = doc.entities.iter().collect();
    entities.sort_by(|a, b| a.spans.cmp(&b.spans).then(a.id.cmp(&b.id)));
    let mut relations: Vec<&Relation> = doc.relations.iter().collect();

    let keep_ids = entities.iter().all(|e| id_number(&e.id, 'T').is_some())
        && relations.iter().all(|r| id_number(&r.id, 'R').is_some());
    let mut rename: BTreeMap<&str, String> = BTreeMap::new();
    if keep_ids {
        relations.sort_by_key(|r| id_number(&r.id, 'R'));
    } else {
        for (i, e) in entities.iter().enumerate() {
            rename.insert(e.id.as_str(), format!("T{}", i + 1));
        }
    }
    let eid = |id: &str| rename.get(id).cloned().unwrap_or_else(|| id.to_string());

    let mut ann = String::new();
    for e in &entities {
        let offsets = e
            .spans
            .iter()
            .map(|s| format!("{} {}", s.start, s.end))
            .collect::<Vec<_>>()
            .join(";");
        ann.push_str(&format!(
            "{}\t{} {}\t{}\n",
            eid(&e.id),
            e.label,
            offsets,
            flatten_ws(&e.text)
        ));
    }
    for (i, r) in relations.iter().enumerate() {
        let rid = if keep_ids { r.id.clone() } else { format!("R{}", i + 1) };
        ann.push_str(&format!(
            "{}\t{} Arg1:{} Arg2:{}\n",
            rid,
            r.label,
            eid(&r.from),
            eid(&r.to)
        ));
    }
    (doc.text.as_str().to_string(), ann)
}

#[derive(Debug, Clone, Default)]
pub struct CorpusHandle {
    pub documents: Vec<AnnotatedDocument>,
    pub source_paths: Vec<PathBuf>,
}

impl CorpusHandle {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&AnnotatedDocument> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub parse: ParseOptions,
    pub fail_fast: bool,
}

#[derive(Debug, Default)]
pub struct LoadReport {
    pub errors: Vec<Error>,
    pub diagnostics: Vec<Diagnostic>,
}

impl LoadReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Collects document stems (paths without extension) under `path`. A
/// directory is scanned for `.txt`/`.ann` files; any other file is read as
/// a list of document paths, one per line, relative to the list's folder.
fn document_stems(path: &Path) -> Result<(Vec<PathBuf>, Vec<Error>)> {
    let mut errors = Vec::new();
    let mut stems = Vec::new();
    if path.is_dir() {
        let mut txt = HashSet::new();
        let mut ann = Vec::new();
        for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
            let p = entry.map_err(|e| Error::io(path, e))?.path();
            match p.extension().and_then(|e| e.to_str()) {
                Some("txt") => {
                    txt.insert(p.with_extension(""));
                }
                Some("ann") => ann.push(p),
                _ => {}
            }
        }
        for a in ann {
            if !txt.contains(&a.with_extension("")) {
                errors.push(Error::MissingText { path: a });
            }
        }
        stems.extend(txt);
    } else {
        let list = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for line in list.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let p = base.join(line);
            let stem = match p.extension().and_then(|e| e.to_str()) {
                Some("txt" | "ann") => p.with_extension(""),
                _ => p,
            };
            stems.push(stem);
        }
    }
    stems.sort_by(|a, b| a.file_name().cmp(&b.file_name()).then(a.cmp(b)));
    stems.dedup();
    Ok((stems, errors))
}

pub fn load_document(stem: &Path, opts: &ParseOptions) -> Result<Parsed> {
    let txt_path = stem.with_extension("txt");
    let ann_path = stem.with_extension("ann");
    let txt = fs::read_to_string(&txt_path).map_err(|e| Error::io(&txt_path, e))?;
    let ann = match fs::read_to_string(&ann_path) {
        Ok(a) => a,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
        Err(e) => return Err(Error::io(&ann_path, e)),
    };
    let doc_id = stem
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_document(&doc_id, &txt, &ann, opts).map_err(|e| Error::in_file(&ann_path, e))
}

/// Loads every document under `path` in lexicographic filename order.
/// Per-file errors are collected in the report; with `fail_fast` the first
/// one is returned instead.
pub fn load_corpus(path: &Path, opts: &LoadOptions) -> Result<(CorpusHandle, LoadReport)> {
    let (stems, mut errors) = document_stems(path)?;
    if opts.fail_fast {
        if let Some(e) = errors.drain(..).next() {
            return Err(e);
        }
    }
    let results: Vec<Result<Parsed>> = stems
        .par_iter()
        .map(|s| load_document(s, &opts.parse))
        .collect();
    let mut corpus = CorpusHandle::default();
    let mut report = LoadReport {
        errors,
        diagnostics: Vec::new(),
    };
    let mut seen = HashSet::new();
    for (stem, res) in stems.into_iter().zip(results) {
        match res {
            Ok(p) => {
                if !seen.insert(p.document.doc_id.clone()) {
                    let e = Error::DuplicateId(p.document.doc_id.clone());
                    if opts.fail_fast {
                        return Err(e);
                    }
                    report.errors.push(e);
                    continue;
                }
                report.diagnostics.extend(p.diagnostics);
                corpus.documents.push(p.document);
                corpus.source_paths.push(stem);
            }
            Err(e) if opts.fail_fast => return Err(e),
            Err(e) => report.errors.push(e),
        }
    }
    Ok((corpus, report))
}

pub fn write_document(dir: &Path, doc: &AnnotatedDocument) -> Result<()> {
    let (txt, ann) = serialize_document(doc);
    let stem = dir.join(&doc.doc_id);
    let txt_path = stem.with_extension("txt");
    let ann_path = stem.with_extension("ann");
    fs::write(&txt_path, txt).map_err(|e| Error::io(&txt_path, e))?;
    fs::write(&ann_path, ann).map_err(|e| Error::io(&ann_path, e))?;
    Ok(())
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

/// Document as JSON with sorted keys. `rules` optionally maps relation ids
/// to the rule that produced them.
pub fn document_json(doc: &AnnotatedDocument, rules: Option<&BTreeMap<String, String>>) -> Value {
    let entities: Vec<Value> = doc
        .entities_in_order()
        .into_iter()
        .map(|e| {
            json!({
                "id": e.id,
                "label": e.label.as_str(),
                "spans": e.spans.iter().map(|s| [s.start, s.end]).collect::<Vec<_>>(),
                "text": e.text,
            })
        })
        .collect();
    let relations: Vec<Value> = doc
        .relations
        .iter()
        .map(|r| {
            let mut v = json!({
                "id": r.id,
                "label": r.label.as_str(),
                "from": r.from,
                "to": r.to,
            });
            if let Some(rule) = rules.and_then(|m| m.get(&r.id)) {
                v["rule"] = json!(rule);
            }
            v
        })
        .collect();
    json!({
        "doc_id": doc.doc_id,
        "text": doc.text.as_str(),
        "entities": entities,
        "relations": relations,
    })
}

pub fn export_json(doc: &AnnotatedDocument, rules: Option<&BTreeMap<String, String>>) -> String {
    to_pretty(&document_json(doc, rules))
}

pub fn graph_json(doc_id: &str, graph: &SynthesisGraph) -> Value {
    let nodes: Vec<Value> = graph
        .nodes
        .iter()
        .map(|n| {
            json!({
                "id": n.id,
                "label": n.label.as_str(),
                "group": n.label.coarse().as_str(),
                "representative": n.representative,
                "members": n.members,
                "text": n.text(),
            })
        })
        .collect();
    let edges: Vec<Value> = graph
        .edges
        .iter()
        .map(|e| {
            let mut v = json!({ "from": e.from, "to": e.to, "label": e.label.as_str() });
            if let Some(rule) = &e.rule {
                v["rule"] = json!(rule);
            }
            v
        })
        .collect();
    json!({ "doc_id": doc_id, "nodes": nodes, "edges": edges })
}

pub fn export_graph_json(doc_id: &str, graph: &SynthesisGraph) -> String {
    to_pretty(&graph_json(doc_id, graph))
}
