//! Random small documents with known token structure, and an exhaustive
//! reference implementation of the relation rules over that structure.
//! Shared by the rule oracle tests here and the acceptance suite.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use synthgraph_core::relext::{BracketChain, RuleConfig};
use synthgraph_core::{CoarseGroup, DocText, Entity, Span, VertexLabel};

pub struct GenDoc {
    pub text: String,
    pub entities: Vec<Entity>,
    pub tokens: Vec<String>,
    pub sentence: Vec<usize>,
    /// Matched bracket pairs as (open, close) token indices.
    pub pairs: Vec<(usize, usize)>,
    /// Inclusive token range per entity, parallel to `entities`.
    pub spans: Vec<(usize, usize)>,
}

fn pick_label(rng: &mut StdRng) -> VertexLabel {
    if rng.gen_bool(0.35) {
        VertexLabel::Operation
    } else {
        let others: Vec<VertexLabel> = VertexLabel::ALL
            .into_iter()
            .filter(|l| *l != VertexLabel::Operation)
            .collect();
        others[rng.gen_range(0..others.len())]
    }
}

/// At most `max_tokens` tokens and `max_entities` entities, with nested
/// brackets, several sentences and sometimes a stray opening bracket.
pub fn random_doc(rng: &mut StdRng, max_tokens: usize, max_entities: usize) -> GenDoc {
    let mut tokens: Vec<String> = vec!["The".into()];
    let mut spans = Vec::new();
    let mut labels = Vec::new();
    let mut stack = Vec::new();
    let mut pairs = Vec::new();
    let budget = rng.gen_range(4..=max_tokens);
    // keep room to close every open bracket
    while tokens.len() + stack.len() + 2 < budget {
        let roll = rng.gen_range(0..100);
        if roll < 40 && spans.len() < max_entities {
            let first = tokens.len();
            let width = if rng.gen_bool(0.25) { 2 } else { 1 };
            for k in 0..width {
                tokens.push(format!("e{}{}", spans.len(), (b'a' + k as u8) as char));
            }
            spans.push((first, tokens.len() - 1));
            labels.push(pick_label(rng));
        } else if roll < 55 {
            tokens.push("w".into());
        } else if roll < 65 && stack.len() < 2 {
            stack.push(tokens.len());
            tokens.push("(".into());
        } else if roll < 75 && !stack.is_empty() {
            pairs.push((stack.pop().unwrap(), tokens.len()));
            tokens.push(")".into());
        } else if roll < 85 && stack.is_empty() {
            tokens.push(".".into());
            tokens.push("The".into());
        } else {
            tokens.push("w".into());
        }
    }
    while let Some(open) = stack.pop() {
        pairs.push((open, tokens.len()));
        tokens.push(")".into());
    }
    if tokens.len() + 2 <= max_tokens && rng.gen_bool(0.1) {
        tokens.push("(".into());
        tokens.push("w".into());
    }

    let mut sentence = Vec::with_capacity(tokens.len());
    let mut s = 0;
    for t in &tokens {
        sentence.push(s);
        if t == "." {
            s += 1;
        }
    }
    let mut offsets = Vec::new();
    let mut text = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            text.push(' ');
        }
        offsets.push(text.len());
        text.push_str(t);
    }
    let doc_text = DocText::new(text.clone());
    let entities = spans
        .iter()
        .zip(&labels)
        .enumerate()
        .map(|(k, (&(f, l), &label))| {
            let span = Span::new(offsets[f], offsets[l] + tokens[l].len()).unwrap();
            Entity::new(format!("T{}", k + 1), label, vec![span], &doc_text).unwrap()
        })
        .collect();
    GenDoc {
        text,
        entities,
        tokens,
        sentence,
        pairs,
        spans,
    }
}

pub type Edge = (String, String);

impl GenDoc {
    fn label(&self, i: usize) -> VertexLabel {
        self.entities[i].label
    }

    fn id(&self, i: usize) -> String {
        self.entities[i].id.clone()
    }

    fn bracketed(&self, i: usize) -> bool {
        let (f, l) = self.spans[i];
        self.pairs.iter().any(|&(o, c)| o < f && l < c)
    }

    fn dist(&self, a: usize, b: usize) -> usize {
        let (x, y) = if self.spans[a].0 < self.spans[b].0 { (a, b) } else { (b, a) };
        self.spans[y].0 - self.spans[x].1 - 1
    }

    fn before(&self, a: usize, b: usize) -> bool {
        self.spans[a].1 < self.spans[b].0
    }

    fn is_op(&self, i: usize) -> bool {
        self.label(i) == VertexLabel::Operation
    }

    fn all(&self) -> std::ops::Range<usize> {
        0..self.entities.len()
    }

    /// Minimum distance over `cands`; ties go to a candidate preceding `i`.
    fn nearest(&self, i: usize, cands: &[usize]) -> Option<usize> {
        let mut best: Option<(usize, bool, usize)> = None;
        for &c in cands {
            let key = (self.dist(i, c), !self.before(c, i));
            if best.map_or(true, |(d, after, _)| key < (d, after)) {
                best = Some((key.0, key.1, c));
            }
        }
        best.map(|b| b.2)
    }

    fn nearest_sentence_first(&self, i: usize, cands: &[usize]) -> Option<usize> {
        let same: Vec<usize> = cands
            .iter()
            .copied()
            .filter(|&c| self.sentence[self.spans[c].0] == self.sentence[self.spans[i].0])
            .collect();
        self.nearest(i, &same).or_else(|| self.nearest(i, cands))
    }

    fn chain(&self, cfg: &RuleConfig) -> Vec<usize> {
        self.all()
            .filter(|&i| self.is_op(i) && (cfg.bracket_chain == BracketChain::Inline || !self.bracketed(i)))
            .collect()
    }

    pub fn oracle_o_o(&self, cfg: &RuleConfig) -> Vec<Edge> {
        let chain = self.chain(cfg);
        let mut out = Vec::new();
        for a in &chain {
            // the next chain member is the closest one after `a`
            if let Some(b) = chain.iter().filter(|&&b| self.before(*a, b)).min_by_key(|&&b| self.dist(*a, b)) {
                out.push((self.id(*a), self.id(*b)));
            }
        }
        if cfg.bracket_chain == BracketChain::Link {
            for a in self.all().filter(|&i| self.is_op(i) && self.bracketed(i)) {
                if let Some(b) = chain.iter().filter(|&&b| self.before(a, b)).min_by_key(|&&b| self.dist(a, b)) {
                    out.push((self.id(a), self.id(*b)));
                }
            }
        }
        out
    }

    pub fn oracle_m_o(&self, cfg: &RuleConfig) -> Vec<Edge> {
        let free: Vec<usize> = self.all().filter(|&i| self.is_op(i) && !self.bracketed(i)).collect();
        let mut out = Vec::new();
        for m in self.all() {
            let l = self.label(m);
            let source = if cfg.use_material_sublabels {
                matches!(l, VertexLabel::MaterialStart | VertexLabel::MaterialSolvent)
            } else {
                l.coarse() == CoarseGroup::Material
            };
            if !source {
                continue;
            }
            let next_tok = self.spans[m].1 + 1;
            let grouped = self.pairs.iter().find(|p| p.0 == next_tok).and_then(|&(o, c)| {
                self.all()
                    .filter(|&j| self.is_op(j) && self.spans[j].0 > o && self.spans[j].1 < c)
                    .min_by_key(|&j| self.spans[j].0)
            });
            if let Some(op) = grouped.or_else(|| self.nearest_sentence_first(m, &free)) {
                out.push((self.id(m), self.id(op)));
            }
        }
        out
    }

    pub fn oracle_o_m(&self, cfg: &RuleConfig) -> Vec<Edge> {
        if !cfg.use_material_sublabels {
            return Vec::new();
        }
        let Some(last) = self.chain(cfg).into_iter().max_by_key(|&i| self.spans[i].0) else {
            return Vec::new();
        };
        self.all()
            .filter(|&i| self.label(i) == VertexLabel::MaterialFinal)
            .map(|m| (self.id(last), self.id(m)))
            .collect()
    }

    pub fn oracle_po_om(&self, cfg: &RuleConfig) -> Vec<Edge> {
        let hosts: Vec<usize> = self.all().filter(|&i| self.label(i).is_material() || self.is_op(i)).collect();
        let mut out = Vec::new();
        for p in self.all() {
            let l = self.label(p);
            let source = if cfg.use_property_sublabels {
                l == VertexLabel::PropertyOthers
            } else {
                l.is_property()
            };
            if !source {
                continue;
            }
            let from_bracket = if self.bracketed(p) {
                self.all()
                    .filter(|&m| self.label(m) == VertexLabel::MaterialStart && self.before(m, p))
                    .min_by_key(|&m| self.dist(m, p))
            } else {
                None
            };
            if let Some(h) = from_bracket.or_else(|| self.nearest_sentence_first(p, &hosts)) {
                out.push((self.id(h), self.id(p)));
            }
        }
        out
    }

    pub fn oracle_p_o(&self, cfg: &RuleConfig) -> Vec<Edge> {
        if !cfg.use_property_sublabels {
            return Vec::new();
        }
        let mut out = Vec::new();
        for p in self.all() {
            let l = self.label(p);
            if !l.is_property() || l == VertexLabel::PropertyOthers {
                continue;
            }
            let host = self
                .all()
                .filter(|&o| self.is_op(o) && self.before(o, p) && (cfg.bracketed_po_hosts || !self.bracketed(o)))
                .min_by_key(|&o| self.dist(o, p));
            if let Some(o) = host {
                out.push((self.id(o), self.id(p)));
            }
        }
        out
    }
}
