//! Documents, labels, entities and relations.
//!
//! All offsets are character (Unicode scalar) offsets into the document
//! text, which is what brat standoff files use.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Half-open character range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start >= end {
            return Err(Error::InvalidSpan {
                start,
                end,
                len: end,
            });
        }
        Ok(Span { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoarseGroup {
    Material,
    Operation,
    Property,
}

impl CoarseGroup {
    pub const ALL: [CoarseGroup; 3] = [
        CoarseGroup::Material,
        CoarseGroup::Operation,
        CoarseGroup::Property,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoarseGroup::Material => "Material",
            CoarseGroup::Operation => "Operation",
            CoarseGroup::Property => "Property",
        }
    }
}

impl fmt::Display for CoarseGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The twelve fine-grained vertex labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexLabel {
    MaterialStart,
    MaterialIntermedium,
    MaterialFinal,
    MaterialSolvent,
    MaterialOthers,
    Operation,
    PropertyTime,
    PropertyTemp,
    PropertyRot,
    PropertyPress,
    PropertyAtmosphere,
    PropertyOthers,
}

impl VertexLabel {
    pub const ALL: [VertexLabel; 12] = [
        VertexLabel::MaterialStart,
        VertexLabel::MaterialIntermedium,
        VertexLabel::MaterialFinal,
        VertexLabel::MaterialSolvent,
        VertexLabel::MaterialOthers,
        VertexLabel::Operation,
        VertexLabel::PropertyTime,
        VertexLabel::PropertyTemp,
        VertexLabel::PropertyRot,
        VertexLabel::PropertyPress,
        VertexLabel::PropertyAtmosphere,
        VertexLabel::PropertyOthers,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VertexLabel::MaterialStart => "Material-Start",
            VertexLabel::MaterialIntermedium => "Material-Intermedium",
            VertexLabel::MaterialFinal => "Material-Final",
            VertexLabel::MaterialSolvent => "Material-Solvent",
            VertexLabel::MaterialOthers => "Material-Others",
            VertexLabel::Operation => "Operation",
            VertexLabel::PropertyTime => "Property-Time",
            VertexLabel::PropertyTemp => "Property-Temp",
            VertexLabel::PropertyRot => "Property-Rot",
            VertexLabel::PropertyPress => "Property-Press",
            VertexLabel::PropertyAtmosphere => "Property-Atmosphere",
            VertexLabel::PropertyOthers => "Property-Others",
        }
    }

    pub fn coarse(self) -> CoarseGroup {
        coarse_of(self)
    }

    pub fn is_material(self) -> bool {
        self.coarse() == CoarseGroup::Material
    }

    pub fn is_property(self) -> bool {
        self.coarse() == CoarseGroup::Property
    }
}

/// Maps a fine vertex label onto its coarse group.
pub fn coarse_of(label: VertexLabel) -> CoarseGroup {
    use VertexLabel::*;
    match label {
        MaterialStart | MaterialIntermedium | MaterialFinal | MaterialSolvent | MaterialOthers => {
            CoarseGroup::Material
        }
        Operation => CoarseGroup::Operation,
        PropertyTime | PropertyTemp | PropertyRot | PropertyPress | PropertyAtmosphere
        | PropertyOthers => CoarseGroup::Property,
    }
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VertexLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VertexLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    Condition,
    Next,
    Coreference,
}

impl EdgeLabel {
    pub const ALL: [EdgeLabel; 3] = [EdgeLabel::Condition, EdgeLabel::Next, EdgeLabel::Coreference];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeLabel::Condition => "Condition",
            EdgeLabel::Next => "Next",
            EdgeLabel::Coreference => "Coreference",
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EdgeLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

macro_rules! label_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

label_serde!(VertexLabel);
label_serde!(EdgeLabel);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Vertex(VertexLabel),
    Edge(EdgeLabel),
}

/// Parses any of the fifteen label names. Case-sensitive.
pub fn parse_label(name: &str) -> Result<Label> {
    if let Ok(v) = name.parse::<VertexLabel>() {
        return Ok(Label::Vertex(v));
    }
    name.parse::<EdgeLabel>()
        .map(Label::Edge)
        .map_err(|_| Error::UnknownLabel(name.to_string()))
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Vertex(v) => v.fmt(f),
            Label::Edge(e) => e.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub label: VertexLabel,
    pub spans: Vec<Span>,
    pub text: String,
}

impl Entity {
    /// Builds an entity over `text`, checking the span invariants and
    /// deriving the surface string.
    pub fn new(
        id: impl Into<String>,
        label: VertexLabel,
        spans: Vec<Span>,
        text: &DocText,
    ) -> Result<Self> {
        let id = id.into();
        check_spans(&spans, text.char_len())?;
        let surface = text.surface(&spans);
        Ok(Entity {
            id,
            label,
            spans,
            text: surface,
        })
    }

    /// First fragment; used for all ordering and distance computations.
    pub fn head(&self) -> Span {
        self.spans[0]
    }

    /// Smallest span covering every fragment.
    pub fn extent(&self) -> Span {
        Span {
            start: self.spans[0].start,
            end: self.spans[self.spans.len() - 1].end,
        }
    }

    pub fn coarse(&self) -> CoarseGroup {
        self.label.coarse()
    }

    pub fn overlaps(&self, other: &Entity) -> bool {
        self.spans
            .iter()
            .any(|a| other.spans.iter().any(|b| a.overlaps(b)))
    }
}

fn check_spans(spans: &[Span], len: usize) -> Result<()> {
    if spans.is_empty() {
        return Err(Error::InvalidSpan {
            start: 0,
            end: 0,
            len,
        });
    }
    let mut prev_end = 0;
    for (i, s) in spans.iter().enumerate() {
        if s.start >= s.end || s.end > len || (i > 0 && s.start < prev_end) {
            return Err(Error::InvalidSpan {
                start: s.start,
                end: s.end,
                len,
            });
        }
        prev_end = s.end;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub id: String,
    pub label: EdgeLabel,
    pub from: String,
    pub to: String,
}

impl Relation {
    pub fn new(
        id: impl Into<String>,
        label: EdgeLabel,
        from: impl Into<String>,
        to: impl Into<String>,
    ) -> Self {
        Relation {
            id: id.into(),
            label,
            from: from.into(),
            to: to.into(),
        }
    }
}

/// Document text with a char-to-byte index, so character offsets can be
/// sliced in O(1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocText {
    text: String,
    // byte offset of each char boundary, len = char count + 1
    bounds: Vec<usize>,
}

impl DocText {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let mut bounds: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bounds.push(text.len());
        DocText { text, bounds }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn char_len(&self) -> usize {
        self.bounds.len() - 1
    }

    /// Substring for a character span. Panics if the span is out of range.
    pub fn slice(&self, span: Span) -> &str {
        &self.text[self.bounds[span.start]..self.bounds[span.end]]
    }

    pub fn byte_offset(&self, char_offset: usize) -> usize {
        self.bounds[char_offset]
    }

    pub fn char_offset(&self, byte_offset: usize) -> usize {
        self.bounds
            .binary_search(&byte_offset)
            .expect("byte offset is not a char boundary")
    }

    /// Fragments joined by a single space.
    pub fn surface(&self, spans: &[Span]) -> String {
        spans
            .iter()
            .map(|s| self.slice(*s))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Serialize for DocText {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for DocText {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d).map(DocText::new)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub text: DocText,
    pub entities: Vec<Entity>,
    pub relations: Vec<Relation>,
}

impl AnnotatedDocument {
    /// Validates span bounds, identifier uniqueness, surface strings and
    /// relation endpoints.
    pub fn new(
        doc_id: impl Into<String>,
        text: impl Into<String>,
        entities: Vec<Entity>,
        relations: Vec<Relation>,
    ) -> Result<Self> {
        let doc = AnnotatedDocument {
            doc_id: doc_id.into(),
            text: DocText::new(text),
            entities,
            relations,
        };
        doc.validate()?;
        Ok(doc)
    }

    pub fn empty(doc_id: impl Into<String>, text: impl Into<String>) -> Self {
        AnnotatedDocument {
            doc_id: doc_id.into(),
            text: DocText::new(text),
            entities: Vec::new(),
            relations: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashMap::new();
        for e in &self.entities {
            check_spans(&e.spans, self.text.char_len())?;
            let expected = self.text.surface(&e.spans);
            if expected != e.text {
                return Err(Error::OffsetMismatch {
                    id: e.id.clone(),
                    expected,
                    found: e.text.clone(),
                });
            }
            if seen.insert(e.id.as_str(), ()).is_some() {
                return Err(Error::DuplicateId(e.id.clone()));
            }
        }
        validate_relations(&self.relations, |id| seen.contains_key(id))
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn entity_index(&self) -> HashMap<&str, &Entity> {
        self.entities.iter().map(|e| (e.id.as_str(), e)).collect()
    }

    pub fn has_annotations(&self) -> bool {
        !self.entities.is_empty() || !self.relations.is_empty()
    }

    /// Entities sorted by their first fragment.
    pub fn entities_in_order(&self) -> Vec<&Entity> {
        let mut v: Vec<&Entity> = self.entities.iter().collect();
        v.sort_by_key(|e| (e.head(), e.id.clone()));
        v
    }

    /// Copy of this document with a different entity/relation layer.
    pub fn with_annotations(&self, entities: Vec<Entity>, relations: Vec<Relation>) -> Self {
        AnnotatedDocument {
            doc_id: self.doc_id.clone(),
            text: self.text.clone(),
            entities,
            relations,
        }
    }

    /// Pairs of overlapping entities (by id), in document order.
    pub fn overlapping_pairs(&self) -> Vec<(String, String)> {
        overlapping_pairs(&self.entities)
    }
}

pub(crate) fn validate_relations<'a>(
    relations: &'a [Relation],
    exists: impl Fn(&str) -> bool,
) -> Result<()> {
    let mut ids: HashMap<&'a str, ()> = HashMap::new();
    for r in relations {
        if ids.insert(r.id.as_str(), ()).is_some() {
            return Err(Error::DuplicateId(r.id.clone()));
        }
        for end in [&r.from, &r.to] {
            if !exists(end) {
                return Err(Error::DanglingReference {
                    relation: r.id.clone(),
                    target: end.clone(),
                });
            }
        }
        if r.from == r.to {
            return Err(Error::InvalidRelation {
                id: r.id.clone(),
                reason: "source and target are the same entity".into(),
            });
        }
    }
    Ok(())
}

pub fn overlapping_pairs(entities: &[Entity]) -> Vec<(String, String)> {
    let mut sorted: Vec<&Entity> = entities.iter().collect();
    sorted.sort_by_key(|e| e.extent());
    let mut out = Vec::new();
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            if b.extent().start >= a.extent().end {
                break;
            }
            if a.overlaps(b) {
                out.push((a.id.clone(), b.id.clone()));
            }
        }
    }
    out
}

/// Resolves overlaps by keeping the longest entity (leftmost on ties) and
/// dropping every entity it overlaps. Returns the kept entities in document
/// order and the ids that were dropped.
pub fn keep_longest(entities: &[Entity]) -> (Vec<Entity>, Vec<String>) {
    let mut order: Vec<&Entity> = entities.iter().collect();
    order.sort_by(|a, b| {
        let la: usize = a.spans.iter().map(Span::len).sum();
        let lb: usize = b.spans.iter().map(Span::len).sum();
        lb.cmp(&la).then(a.head().cmp(&b.head())).then(a.id.cmp(&b.id))
    });
    let mut kept: Vec<&Entity> = Vec::new();
    let mut dropped = Vec::new();
    for e in order {
        if kept.iter().any(|k| k.overlaps(e)) {
            dropped.push(e.id.clone());
        } else {
            kept.push(e);
        }
    }
    kept.sort_by_key(|e| e.head());
    (kept.into_iter().cloned().collect(), dropped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_partition_is_5_1_6() {
        let count = |g| VertexLabel::ALL.iter().filter(|l| coarse_of(**l) == g).count();
        assert_eq!(count(CoarseGroup::Material), 5);
        assert_eq!(count(CoarseGroup::Operation), 1);
        assert_eq!(count(CoarseGroup::Property), 6);
        // disjoint and exhaustive: every label counted exactly once
        let total: usize = CoarseGroup::ALL.iter().map(|g| count(*g)).sum();
        assert_eq!(total, VertexLabel::ALL.len());
    }

    #[test]
    fn coarse_examples() {
        assert_eq!(coarse_of(VertexLabel::MaterialSolvent), CoarseGroup::Material);
        assert_eq!(coarse_of(VertexLabel::Operation), CoarseGroup::Operation);
        assert_eq!(coarse_of(VertexLabel::PropertyRot), CoarseGroup::Property);
    }

    #[test]
    fn label_names_round_trip() {
        let mut n = 0;
        for v in VertexLabel::ALL {
            assert_eq!(parse_label(v.as_str()).unwrap(), Label::Vertex(v));
            n += 1;
        }
        for e in EdgeLabel::ALL {
            assert_eq!(parse_label(&e.to_string()).unwrap(), Label::Edge(e));
            n += 1;
        }
        assert_eq!(n, 15);
    }

    #[test]
    fn parse_label_examples() {
        assert_eq!(
            parse_label("Property-Atmosphere").unwrap(),
            Label::Vertex(VertexLabel::PropertyAtmosphere)
        );
        assert_eq!(
            parse_label("Coreference").unwrap(),
            Label::Edge(EdgeLabel::Coreference)
        );
        assert!(matches!(parse_label("Solvent"), Err(Error::UnknownLabel(_))));
        assert!(matches!(parse_label("next"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn doc_text_slices_by_chars() {
        let t = DocText::new("800 °C, ok");
        assert_eq!(t.char_len(), 10);
        assert_eq!(t.slice(Span { start: 4, end: 6 }), "°C");
        assert_eq!(t.char_offset(t.byte_offset(6)), 6);
    }

    #[test]
    fn multi_fragment_surface_joins_with_space() {
        let t = DocText::new("cold and hot pressed");
        let e = Entity::new(
            "T1",
            VertexLabel::Operation,
            vec![Span { start: 0, end: 4 }, Span { start: 13, end: 20 }],
            &t,
        )
        .unwrap();
        assert_eq!(e.text, "cold pressed");
    }

    #[test]
    fn rejects_bad_spans() {
        let t = DocText::new("abc");
        assert!(Entity::new("T1", VertexLabel::Operation, vec![Span { start: 1, end: 5 }], &t).is_err());
        assert!(Span::new(2, 2).is_err());
        let unsorted = vec![Span { start: 2, end: 3 }, Span { start: 0, end: 1 }];
        assert!(Entity::new("T1", VertexLabel::Operation, unsorted, &t).is_err());
    }

    #[test]
    fn validate_catches_dangling_and_self_loops() {
        let t = DocText::new("mixed dried");
        let a = Entity::new("T1", VertexLabel::Operation, vec![Span { start: 0, end: 5 }], &t).unwrap();
        let dangling = AnnotatedDocument::new(
            "d",
            "mixed dried",
            vec![a.clone()],
            vec![Relation::new("R1", EdgeLabel::Next, "T1", "T2")],
        );
        assert!(matches!(dangling, Err(Error::DanglingReference { .. })));
        let self_loop = AnnotatedDocument::new(
            "d",
            "mixed dried",
            vec![a],
            vec![Relation::new("R1", EdgeLabel::Next, "T1", "T1")],
        );
        assert!(matches!(self_loop, Err(Error::InvalidRelation { .. })));
    }

    #[test]
    fn keep_longest_drops_contained() {
        let t = DocText::new("deionized water bath");
        let long = Entity::new("T1", VertexLabel::MaterialSolvent, vec![Span { start: 0, end: 15 }], &t).unwrap();
        let short = Entity::new("T2", VertexLabel::MaterialSolvent, vec![Span { start: 10, end: 15 }], &t).unwrap();
        let other = Entity::new("T3", VertexLabel::MaterialOthers, vec![Span { start: 16, end: 20 }], &t).unwrap();
        let ents = vec![short, long, other];
        assert_eq!(overlapping_pairs(&ents).len(), 1);
        let (kept, dropped) = keep_longest(&ents);
        assert_eq!(kept.iter().map(|e| e.id.as_str()).collect::<Vec<_>>(), ["T1", "T3"]);
        assert_eq!(dropped, ["T2"]);
    }
}
