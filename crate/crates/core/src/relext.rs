//! Heuristic relation extraction.
//!
//! Five rules link the entity layer into Next and Condition edges:
//!
//! * **O-O**: each Operation gets a Next edge to the following Operation.
//! * **M-O**: each starting material or solvent gets a Next edge to its
//!   nearest Operation (a bracketed Operation right after the material wins;
//!   otherwise the nearest in the sentence, then the nearest anywhere).
//! * **O-M**: the last Operation gets a Next edge to every final material.
//! * **Po-OM**: each Property-Others is the Condition of its nearest
//!   material or Operation; a bracketed one attaches to the closest
//!   preceding starting material.
//! * **P-O**: every other property is the Condition of the closest
//!   preceding Operation.
//!
//! Distances are counted in tokens between the two phrases and ties go to
//! the earlier candidate. Operations inside brackets stay out of the main
//! O-O chain and out of M-O searches.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::diag::{Diagnostic, DiagnosticKind};
use crate::docmodel::{AnnotatedDocument, CoarseGroup, EdgeLabel, Entity, Relation, VertexLabel};
use crate::error::{Error, Result};
use crate::textprep::{analyze, range_distance, Abbreviations, Analysis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Rule {
    #[serde(rename = "O-O")]
    OO,
    #[serde(rename = "M-O")]
    MO,
    #[serde(rename = "O-M")]
    OM,
    #[serde(rename = "Po-OM")]
    PoOM,
    #[serde(rename = "P-O")]
    PO,
}

impl Rule {
    /// Application order.
    pub const ALL: [Rule; 5] = [Rule::OO, Rule::MO, Rule::OM, Rule::PoOM, Rule::PO];

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::OO => "O-O",
            Rule::MO => "M-O",
            Rule::OM => "O-M",
            Rule::PoOM => "Po-OM",
            Rule::PO => "P-O",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown rule `{s}`")))
    }
}

/// How bracketed Operations take part in O-O chaining.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BracketChain {
    /// Off the main chain, with a Next edge to the following chain member.
    #[default]
    Link,
    /// Off the main chain, no O-O edges at all.
    Skip,
    /// Treated like any other Operation.
    Inline,
}

impl FromStr for BracketChain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "link" => Ok(BracketChain::Link),
            "skip" => Ok(BracketChain::Skip),
            "inline" => Ok(BracketChain::Inline),
            _ => Err(Error::Config(format!("unknown bracket-chain mode `{s}`"))),
        }
    }
}

/// Rows of the sub-label ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ablation {
    #[default]
    Full,
    NoMaterialSublabels,
    NoPropertySublabels,
    NoSublabels,
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Ablation::Full),
            "no-mat-sub" => Ok(Ablation::NoMaterialSublabels),
            "no-prop-sub" => Ok(Ablation::NoPropertySublabels),
            "no-sub" => Ok(Ablation::NoSublabels),
            _ => Err(Error::Config(format!("unknown ablation preset `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleConfig {
    pub enabled_rules: Vec<Rule>,
    pub use_material_sublabels: bool,
    pub use_property_sublabels: bool,
    pub bracket_chain: BracketChain,
    /// Whether P-O may attach a property to a bracketed Operation.
    pub bracketed_po_hosts: bool,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig::preset(Ablation::Full)
    }
}

impl RuleConfig {
    /// Without material sub-labels M-O covers every material and O-M is
    /// off; without property sub-labels Po-OM covers every property and P-O
    /// is off.
    pub fn preset(ablation: Ablation) -> Self {
        let (mat, prop) = match ablation {
            Ablation::Full => (true, true),
            Ablation::NoMaterialSublabels => (false, true),
            Ablation::NoPropertySublabels => (true, false),
            Ablation::NoSublabels => (false, false),
        };
        let enabled_rules = Rule::ALL
            .into_iter()
            .filter(|r| match r {
                Rule::OM => mat,
                Rule::PO => prop,
                _ => true,
            })
            .collect();
        RuleConfig {
            enabled_rules,
            use_material_sublabels: mat,
            use_property_sublabels: prop,
            bracket_chain: BracketChain::Link,
            bracketed_po_hosts: true,
        }
    }

    pub fn is_enabled(&self, rule: Rule) -> bool {
        self.enabled_rules.contains(&rule)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PredictedRelation {
    pub relation: Relation,
    pub rule: Rule,
}

/// Per-document state shared by the rules: entities in document order with
/// their token ranges, sentence ids and bracket structure.
#[derive(Debug)]
pub struct RuleContext<'a> {
    pub entities: Vec<&'a Entity>,
    pub analysis: Analysis,
    /// Inclusive token range of each entity's first fragment.
    pub ranges: Vec<(usize, usize)>,
    pub sentence: Vec<usize>,
    /// Innermost bracket pair strictly enclosing each entity.
    pub bracket: Vec<Option<(usize, usize)>>,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> RuleContext<'a> {
    /// Fails with `OverlappingEntities` if two entities share a token.
    pub fn new(text: &str, entities: &'a [Entity], abbrevs: &Abbreviations) -> Result<Self> {
        let analysis = analyze(text, abbrevs);
        let mut ordered: Vec<&Entity> = entities.iter().collect();
        ordered.sort_by(|a, b| a.head().cmp(&b.head()).then(a.id.cmp(&b.id)));
        let mut ranges = Vec::with_capacity(ordered.len());
        for e in &ordered {
            let r = analysis.entity_tokens(e).ok_or_else(|| Error::InvalidSpan {
                start: e.head().start,
                end: e.head().end,
                len: analysis.tokens.len(),
            })?;
            ranges.push(r);
        }
        for i in 1..ranges.len() {
            if ranges[i].0 <= ranges[i - 1].1 {
                return Err(Error::OverlappingEntities(ordered[i - 1].id.clone(), ordered[i].id.clone()));
            }
        }
        let sentence = ranges.iter().map(|r| analysis.sentence_of(r.0)).collect();
        let bracket = ranges
            .iter()
            .map(|&(f, l)| {
                analysis
                    .bracket_pairs
                    .iter()
                    .filter(|&&(o, c)| o < f && l < c && analysis.sentence_of(o) == analysis.sentence_of(c))
                    .min_by_key(|&&(o, c)| c - o)
                    .copied()
            })
            .collect();
        let mut diagnostics = Vec::new();
        if !analysis.unmatched_brackets.is_empty() {
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::UnbalancedBrackets,
                format!(
                    "{} unmatched bracket token(s); entities near them are treated as not bracketed",
                    analysis.unmatched_brackets.len()
                ),
            ));
        }
        Ok(RuleContext {
            entities: ordered,
            analysis,
            ranges,
            sentence,
            bracket,
            diagnostics,
        })
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn is_bracketed(&self, i: usize) -> bool {
        self.bracket[i].is_some()
    }

    pub fn label(&self, i: usize) -> VertexLabel {
        self.entities[i].label
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        range_distance(self.ranges[a], self.ranges[b]).expect("entities are token-disjoint")
    }

    fn indices(&self, pred: impl Fn(usize) -> bool) -> Vec<usize> {
        (0..self.len()).filter(|&i| pred(i)).collect()
    }

    fn is_op(&self, i: usize) -> bool {
        self.label(i) == VertexLabel::Operation
    }

    /// Operations on the main chain, in document order.
    pub fn chain(&self, config: &RuleConfig) -> Vec<usize> {
        self.indices(|i| {
            self.is_op(i) && (config.bracket_chain == BracketChain::Inline || !self.is_bracketed(i))
        })
    }

    /// Nearest members of the sorted `cands` on each side of `i`.
    fn neighbours(&self, cands: &[usize], i: usize) -> (Option<usize>, Option<usize>) {
        let left = cands.partition_point(|&c| c < i).checked_sub(1).map(|k| cands[k]);
        let right = cands.get(cands.partition_point(|&c| c <= i)).copied();
        (left, right)
    }

    /// Closest of the two neighbours, preferring the left one on ties.
    fn closer(&self, i: usize, left: Option<usize>, right: Option<usize>) -> Option<usize> {
        match (left, right) {
            (Some(l), Some(r)) => Some(if self.distance(l, i) <= self.distance(i, r) { l } else { r }),
            (l, r) => l.or(r),
        }
    }

    /// Nearest candidate in the sentence of `i`, falling back to the whole
    /// document.
    fn nearest_sentence_first(&self, cands: &[usize], i: usize) -> Option<usize> {
        let (left, right) = self.neighbours(cands, i);
        let s = self.sentence[i];
        let in_sent = |c: &usize| self.sentence[*c] == s;
        self.closer(i, left.filter(in_sent), right.filter(in_sent))
            .or_else(|| self.closer(i, left, right))
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }
}

fn predicted(ctx: &RuleContext, from: usize, to: usize, label: EdgeLabel, rule: Rule) -> PredictedRelation {
    PredictedRelation {
        relation: Relation::new(
            String::new(),
            label,
            ctx.entities[from].id.clone(),
            ctx.entities[to].id.clone(),
        ),
        rule,
    }
}

/// Next edges along the Operation sequence.
pub fn rule_o_o(ctx: &RuleContext, config: &RuleConfig) -> Vec<PredictedRelation> {
    let chain = ctx.chain(config);
    let mut out: Vec<PredictedRelation> = chain
        .windows(2)
        .map(|w| predicted(ctx, w[0], w[1], EdgeLabel::Next, Rule::OO))
        .collect();
    if config.bracket_chain == BracketChain::Link {
        for i in ctx.indices(|i| ctx.is_op(i) && ctx.is_bracketed(i)) {
            let p = chain.partition_point(|&c| c < i);
            if let Some(&next) = chain.get(p) {
                out.push(predicted(ctx, i, next, EdgeLabel::Next, Rule::OO));
            }
        }
    }
    out.sort_by_key(|p| (position(ctx, &p.relation.from), position(ctx, &p.relation.to)));
    out
}

fn position(ctx: &RuleContext, id: &str) -> usize {
    ctx.entities.iter().position(|e| e.id == id).unwrap_or(usize::MAX)
}

/// Next edges from starting materials and solvents (every material when
/// sub-labels are off) to the Operation that consumes them.
pub fn rule_m_o(ctx: &RuleContext, config: &RuleConfig, diags: &mut Vec<Diagnostic>) -> Vec<PredictedRelation> {
    let sources = ctx.indices(|i| {
        let l = ctx.label(i);
        if config.use_material_sublabels {
            matches!(l, VertexLabel::MaterialStart | VertexLabel::MaterialSolvent)
        } else {
            l.coarse() == CoarseGroup::Material
        }
    });
    let free_ops = ctx.indices(|i| ctx.is_op(i) && !ctx.is_bracketed(i));
    let mut out = Vec::new();
    for i in sources {
        let target = bracket_group_operation(ctx, i).or_else(|| ctx.nearest_sentence_first(&free_ops, i));
        match target {
            Some(op) => out.push(predicted(ctx, i, op, EdgeLabel::Next, Rule::MO)),
            None => diags.push(Diagnostic::new(
                DiagnosticKind::NoOperationInDocument,
                format!("material {} has no operation to attach to", ctx.entities[i].id),
            )),
        }
    }
    out
}

/// First Operation inside a bracket group that opens right after entity `i`.
fn bracket_group_operation(ctx: &RuleContext, i: usize) -> Option<usize> {
    let after = ctx.ranges[i].1 + 1;
    let &(open, close) = ctx.analysis.bracket_pairs.iter().find(|&&(o, _)| o == after)?;
    (i + 1..ctx.len())
        .take_while(|&j| ctx.ranges[j].0 < close)
        .find(|&j| ctx.is_op(j) && ctx.ranges[j].0 > open)
}

/// Next edges from the last Operation to every final material.
pub fn rule_o_m(ctx: &RuleContext, config: &RuleConfig) -> Vec<PredictedRelation> {
    if !config.use_material_sublabels {
        return Vec::new();
    }
    let Some(&last) = ctx.chain(config).last() else {
        return Vec::new();
    };
    ctx.indices(|i| ctx.label(i) == VertexLabel::MaterialFinal)
        .into_iter()
        .map(|m| predicted(ctx, last, m, EdgeLabel::Next, Rule::OM))
        .collect()
}

/// Condition edges onto Property-Others (every property when sub-labels are
/// off).
pub fn rule_po_om(ctx: &RuleContext, config: &RuleConfig, diags: &mut Vec<Diagnostic>) -> Vec<PredictedRelation> {
    let sources = ctx.indices(|i| {
        let l = ctx.label(i);
        if config.use_property_sublabels {
            l == VertexLabel::PropertyOthers
        } else {
            l.is_property()
        }
    });
    let starts = ctx.indices(|i| ctx.label(i) == VertexLabel::MaterialStart);
    let hosts = ctx.indices(|i| ctx.label(i).is_material() || ctx.is_op(i));
    let mut out = Vec::new();
    for i in sources {
        let bracketed_host = if ctx.is_bracketed(i) {
            ctx.neighbours(&starts, i).0
        } else {
            None
        };
        match bracketed_host.or_else(|| ctx.nearest_sentence_first(&hosts, i)) {
            Some(h) => out.push(predicted(ctx, h, i, EdgeLabel::Condition, Rule::PoOM)),
            None => diags.push(Diagnostic::new(
                DiagnosticKind::NoHostCandidate,
                format!("property {} has no material or operation to attach to", ctx.entities[i].id),
            )),
        }
    }
    out
}

/// Condition edges from the closest preceding Operation onto time,
/// temperature, rotation, pressure and atmosphere properties.
pub fn rule_p_o(ctx: &RuleContext, config: &RuleConfig, diags: &mut Vec<Diagnostic>) -> Vec<PredictedRelation> {
    if !config.use_property_sublabels {
        return Vec::new();
    }
    let ops = ctx.indices(|i| ctx.is_op(i) && (config.bracketed_po_hosts || !ctx.is_bracketed(i)));
    let mut out = Vec::new();
    for i in ctx.indices(|i| ctx.label(i).is_property() && ctx.label(i) != VertexLabel::PropertyOthers) {
        match ctx.neighbours(&ops, i).0 {
            Some(op) => out.push(predicted(ctx, op, i, EdgeLabel::Condition, Rule::PO)),
            None => diags.push(Diagnostic::new(
                DiagnosticKind::NoPrecedingOperation,
                format!("property {} has no preceding operation", ctx.entities[i].id),
            )),
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub predictions: Vec<PredictedRelation>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Extraction {
    pub fn relations(&self) -> Vec<Relation> {
        self.predictions.iter().map(|p| p.relation.clone()).collect()
    }

    /// Relation id to rule name, for exports.
    pub fn rule_map(&self) -> BTreeMap<String, String> {
        self.predictions
            .iter()
            .map(|p| (p.relation.id.clone(), p.rule.as_str().to_string()))
            .collect()
    }
}

/// Runs the enabled rules in order O-O, M-O, O-M, Po-OM, P-O over the given
/// entity layer. Edges produced twice keep the first rule's attribution.
/// Relation ids are assigned as `R1`, `R2`, ... in output order.
pub fn extract(text: &str, entities: &[Entity], config: &RuleConfig, abbrevs: &Abbreviations) -> Result<Extraction> {
    let ctx = RuleContext::new(text, entities, abbrevs)?;
    Ok(extract_with(&ctx, config))
}

pub fn extract_with(ctx: &RuleContext, config: &RuleConfig) -> Extraction {
    let mut diagnostics = ctx.diagnostics().to_vec();
    let mut all = Vec::new();
    for rule in Rule::ALL {
        if !config.is_enabled(rule) {
            continue;
        }
        let produced = match rule {
            Rule::OO => rule_o_o(ctx, config),
            Rule::MO => rule_m_o(ctx, config, &mut diagnostics),
            Rule::OM => rule_o_m(ctx, config),
            Rule::PoOM => rule_po_om(ctx, config, &mut diagnostics),
            Rule::PO => rule_p_o(ctx, config, &mut diagnostics),
        };
        all.extend(produced);
    }
    let mut seen = HashSet::new();
    let mut predictions = Vec::with_capacity(all.len());
    for mut p in all {
        let key = (p.relation.from.clone(), p.relation.to.clone(), p.relation.label);
        if seen.insert(key) {
            p.relation.id = format!("R{}", predictions.len() + 1);
            predictions.push(p);
        }
    }
    Extraction {
        predictions,
        diagnostics,
    }
}

/// Convenience wrapper over a document's own entity layer.
pub fn extract_document(doc: &AnnotatedDocument, config: &RuleConfig, abbrevs: &Abbreviations) -> Result<Extraction> {
    extract(doc.text.as_str(), &doc.entities, config, abbrevs)
}

/// Whether entity `id` lies strictly inside a matched bracket pair.
pub fn is_bracketed(doc: &AnnotatedDocument, id: &str, abbrevs: &Abbreviations) -> Result<bool> {
    let ctx = RuleContext::new(doc.text.as_str(), &doc.entities, abbrevs)?;
    let i = ctx
        .entities
        .iter()
        .position(|e| e.id == id)
        .ok_or_else(|| Error::DanglingReference {
            relation: String::from("-"),
            target: id.to_string(),
        })?;
    Ok(ctx.is_bracketed(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docmodel::{DocText, Span};
    use VertexLabel::*;

    /// Builds a document from text with entities marked as `{label|surface}`.
    pub(crate) fn marked(src: &str) -> (String, Vec<Entity>) {
        let mut text = String::new();
        let mut spans = Vec::new();
        let mut rest = src;
        while let Some(open) = rest.find('{') {
            text.push_str(&rest[..open]);
            let close = rest[open..].find('}').unwrap() + open;
            let (label, surface) = rest[open + 1..close].split_once('|').unwrap();
            let start = text.chars().count();
            text.push_str(surface);
            spans.push((label.parse::<VertexLabel>().unwrap(), start, text.chars().count()));
            rest = &rest[close + 1..];
        }
        text.push_str(rest);
        let dt = DocText::new(text.clone());
        let ents = spans
            .into_iter()
            .enumerate()
            .map(|(i, (l, s, e))| Entity::new(format!("T{}", i + 1), l, vec![Span { start: s, end: e }], &dt).unwrap())
            .collect();
        (text, ents)
    }

    fn edges(text: &str, ents: &[Entity], preds: &[PredictedRelation]) -> Vec<(String, String, &'static str)> {
        let dt = DocText::new(text);
        let surf = |id: &str| dt.slice(ents.iter().find(|e| e.id == id).unwrap().head()).to_string();
        preds
            .iter()
            .map(|p| (surf(&p.relation.from), surf(&p.relation.to), p.rule.as_str()))
            .collect()
    }

    fn run(src: &str, config: &RuleConfig) -> (Vec<(String, String, &'static str)>, Vec<Diagnostic>) {
        let (text, ents) = marked(src);
        let x = extract(&text, &ents, config, &Abbreviations::default()).unwrap();
        (edges(&text, &ents, &x.predictions), x.diagnostics)
    }

    fn e(a: &str, b: &str, r: &'static str) -> (String, String, &'static str) {
        (a.to_string(), b.to_string(), r)
    }

    #[test]
    fn bracket_detection() {
        let (text, ents) = marked("{Material-Start|Li2CO3} ({Operation|dried} at 200 degC) was {Operation|mixed}.");
        let doc = AnnotatedDocument::new("d", text, ents, vec![]).unwrap();
        let ab = Abbreviations::default();
        assert!(is_bracketed(&doc, "T2", &ab).unwrap());
        assert!(!is_bracketed(&doc, "T3", &ab).unwrap());
        assert!(!is_bracketed(&doc, "T1", &ab).unwrap());

        // an entity spanning a closing bracket is not strictly inside
        let (text, ents) = marked("x (a {Property-Others|b) c} d");
        let doc = AnnotatedDocument::new("d", text, ents, vec![]).unwrap();
        assert!(!is_bracketed(&doc, "T1", &ab).unwrap());
    }

    #[test]
    fn unbalanced_brackets_warn() {
        let (_, diags) = run("{Operation|mixed} (and {Operation|dried} at 80 degC.", &RuleConfig::default());
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::UnbalancedBrackets));
    }

    #[test]
    fn o_o_chains_and_links_bracketed() {
        let src = "{Material-Start|Li2CO3} ({Operation|dried} at 200 degC) and {Material-Start|TiO2} were {Operation|mixed}. Then {Operation|heated}.";
        let (got, _) = run(src, &RuleConfig::default());
        let oo: Vec<_> = got.iter().filter(|x| x.2 == "O-O").cloned().collect();
        assert_eq!(oo, vec![e("dried", "mixed", "O-O"), e("mixed", "heated", "O-O")]);

        let mut skip = RuleConfig::default();
        skip.bracket_chain = BracketChain::Skip;
        let (got, _) = run(src, &skip);
        assert_eq!(got.iter().filter(|x| x.2 == "O-O").count(), 1);

        let mut inline = RuleConfig::default();
        inline.bracket_chain = BracketChain::Inline;
        let (got, _) = run(src, &inline);
        let oo: Vec<_> = got.iter().filter(|x| x.2 == "O-O").cloned().collect();
        assert_eq!(oo, vec![e("dried", "mixed", "O-O"), e("mixed", "heated", "O-O")]);
    }

    #[test]
    fn single_operation_has_no_o_o() {
        let (got, _) = run("It was {Operation|mixed}.", &RuleConfig::default());
        assert!(got.is_empty());
    }

    #[test]
    fn m_o_bracket_case_picks_only_adjacent_material() {
        let src = "Samples were prepared from {Material-Start|H3BO3}, {Material-Start|Al2O3}, {Material-Start|SiO2} \
                   and either {Material-Start|Li2CO3} ({Operation|dried} at 200 degC). They were {Operation|mixed}.";
        let (got, _) = run(src, &RuleConfig::default());
        let mo: Vec<_> = got.iter().filter(|x| x.2 == "M-O").cloned().collect();
        assert_eq!(
            mo,
            vec![
                e("H3BO3", "mixed", "M-O"),
                e("Al2O3", "mixed", "M-O"),
                e("SiO2", "mixed", "M-O"),
                e("Li2CO3", "dried", "M-O"),
            ]
        );
    }

    #[test]
    fn m_o_tie_goes_to_previous() {
        let (got, _) = run("{Operation|dried} a {Material-Start|X1} b {Operation|mixed}.", &RuleConfig::default());
        assert!(got.contains(&e("X1", "dried", "M-O")));
        let (got, _) = run("{Operation|dried} a {Material-Start|X1} {Operation|mixed}.", &RuleConfig::default());
        assert!(got.contains(&e("X1", "mixed", "M-O")));
    }

    #[test]
    fn m_o_prefers_sentence_then_crosses() {
        // closer operation in the previous sentence loses to one in the same sentence
        let src = "It was {Operation|dried}. {Material-Start|X1} a b c d then {Operation|mixed}.";
        let (got, _) = run(src, &RuleConfig::default());
        assert!(got.contains(&e("X1", "mixed", "M-O")));
        let src = "It was {Operation|dried}. Also {Material-Start|X1} here. Much later it was {Operation|mixed}.";
        let (got, _) = run(src, &RuleConfig::default());
        assert!(got.contains(&e("X1", "dried", "M-O")));
    }

    #[test]
    fn m_o_without_operations_is_diagnosed() {
        let (got, diags) = run("Use {Material-Start|X1}.", &RuleConfig::default());
        assert!(got.is_empty());
        assert_eq!(diags[0].kind, DiagnosticKind::NoOperationInDocument);
    }

    #[test]
    fn o_m_links_last_operation_to_all_finals() {
        let src = "{Material-Final|A1} denoted {Material-Final|B} was {Operation|mixed} and {Operation|heated}.";
        let (got, _) = run(src, &RuleConfig::default());
        let om: Vec<_> = got.iter().filter(|x| x.2 == "O-M").cloned().collect();
        assert_eq!(om, vec![e("heated", "A1", "O-M"), e("heated", "B", "O-M")]);
        let (got, _) = run("{Operation|mixed} and {Operation|heated}.", &RuleConfig::default());
        assert!(got.iter().all(|x| x.2 != "O-M"));
    }

    #[test]
    fn po_om_cases() {
        let src = "{Material-Start|TiO2}, {Material-Start|GeO2} and {Material-Start|NH4H2PO4} ({Property-Others|purity 99.999 %}) were {Operation|mixed}.";
        let (got, _) = run(src, &RuleConfig::default());
        assert!(got.contains(&e("NH4H2PO4", "purity 99.999 %", "Po-OM")));

        // equidistant material and operation: the earlier one wins
        let src = "{Material-Others|Y2} a {Property-Others|10 mm} b {Operation|pressed}.";
        let (got, _) = run(src, &RuleConfig::default());
        assert!(got.contains(&e("Y2", "10 mm", "Po-OM")));

        let (got, diags) = run("Only {Property-Others|99 %} here.", &RuleConfig::default());
        assert!(got.is_empty());
        assert_eq!(diags[0].kind, DiagnosticKind::NoHostCandidate);
    }

    #[test]
    fn p_o_uses_preceding_operation_including_bracketed() {
        let src = "{Material-Start|Li2CO3} ({Operation|dried} at {Property-Temp|200 degC}) was {Operation|mixed} for {Property-Time|2 h}.";
        let (got, _) = run(src, &RuleConfig::default());
        assert!(got.contains(&e("dried", "200 degC", "P-O")));
        assert!(got.contains(&e("mixed", "2 h", "P-O")));

        let mut cfg = RuleConfig::default();
        cfg.bracketed_po_hosts = false;
        let (got, diags) = run(src, &cfg);
        assert!(!got.iter().any(|x| x.1 == "200 degC"));
        assert!(diags.iter().any(|d| d.kind == DiagnosticKind::NoPrecedingOperation));

        let (got, diags) = run("At {Property-Temp|80 degC} it was {Operation|dried}.", &RuleConfig::default());
        assert!(got.is_empty());
        assert_eq!(diags[0].kind, DiagnosticKind::NoPrecedingOperation);
    }

    #[test]
    fn ablation_presets() {
        let full = RuleConfig::preset(Ablation::Full);
        assert_eq!(full.enabled_rules, Rule::ALL);
        let nm = RuleConfig::preset(Ablation::NoMaterialSublabels);
        assert!(!nm.is_enabled(Rule::OM) && !nm.use_material_sublabels && nm.is_enabled(Rule::PO));
        let np = RuleConfig::preset(Ablation::NoPropertySublabels);
        assert!(!np.is_enabled(Rule::PO) && !np.use_property_sublabels && np.is_enabled(Rule::OM));
        let ns = RuleConfig::preset(Ablation::NoSublabels);
        assert_eq!(ns.enabled_rules, [Rule::OO, Rule::MO, Rule::PoOM]);
        assert_eq!("no-prop-sub".parse::<Ablation>().unwrap(), Ablation::NoPropertySublabels);
        assert!("nope".parse::<Ablation>().is_err());
    }

    #[test]
    fn overlapping_entities_rejected() {
        let text = DocText::new("deionized water");
        let a = Entity::new("T1", MaterialSolvent, vec![Span { start: 0, end: 15 }], &text).unwrap();
        let b = Entity::new("T2", MaterialSolvent, vec![Span { start: 10, end: 15 }], &text).unwrap();
        let r = extract("deionized water", &[a, b], &RuleConfig::default(), &Abbreviations::default());
        assert!(matches!(r, Err(Error::OverlappingEntities(..))));
    }

    #[test]
    fn never_produces_coreference_and_ids_are_sequential() {
        let txt = include_str!("../../../fixtures/mini/lto.txt");
        let ann = include_str!("../../../fixtures/mini/lto.ann");
        let doc = crate::standoff::parse_document("lto", txt, ann, &Default::default())
            .unwrap()
            .document;
        let x = extract_document(&doc, &RuleConfig::default(), &Abbreviations::default()).unwrap();
        assert_eq!(x.predictions.len(), 18);
        assert!(x.predictions.iter().all(|p| p.relation.label != EdgeLabel::Coreference));
        for (i, p) in x.predictions.iter().enumerate() {
            assert_eq!(p.relation.id, format!("R{}", i + 1));
        }
    }
}
