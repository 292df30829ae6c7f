//! Text normalization, tokenization and sentence splitting.
//!
//! The rules here are deliberately simple and deterministic: the relation
//! rules only need token counts and sentence ids.

use std::collections::HashSet;

use serde::Serialize;

use crate::docmodel::{Entity, Span};
use crate::error::{Error, Result};

const DEFAULT_NORMALIZATION: &str = include_str!("../data/normalization.tsv");
const DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

/// Ordered list of literal `pattern -> replacement` rewrites.
#[derive(Debug, Clone)]
pub struct NormalizationTable {
    // sorted by pattern length, longest first
    rules: Vec<(Vec<char>, String)>,
}

impl Default for NormalizationTable {
    fn default() -> Self {
        Self::parse(DEFAULT_NORMALIZATION).expect("shipped normalization table is valid")
    }
}

impl NormalizationTable {
    /// One rule per line, `pattern<TAB>replacement`. Blank lines and lines
    /// starting with `#` are ignored. `\u{XXXX}`, `\t` and `\\` escapes are
    /// understood on both sides.
    pub fn parse(src: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (n, line) in src.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (pat, rep) = line
                .split_once('\t')
                .ok_or_else(|| Error::Config(format!("normalization line {}: missing tab", n + 1)))?;
            let pat = unescape(pat).map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
            let rep = unescape(rep).map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
            if pat.is_empty() {
                return Err(Error::Config(format!("normalization line {}: empty pattern", n + 1)));
            }
            rules.push((pat.chars().collect::<Vec<_>>(), rep));
        }
        rules.sort_by(|a: &(Vec<char>, String), b| b.0.len().cmp(&a.0.len()));
        Ok(NormalizationTable { rules })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

fn unescape(s: &str) -> std::result::Result<String, String> {
    let mut out = String::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('\\') => out.push('\\'),
            Some('u') => {
                if chars.next() != Some('{') {
                    return Err("expected `{` after \\u".into());
                }
                let hex: String = chars.by_ref().take_while(|c| *c != '}').collect();
                let cp = u32::from_str_radix(&hex, 16).map_err(|e| e.to_string())?;
                out.push(char::from_u32(cp).ok_or("invalid code point")?);
            }
            other => return Err(format!("unknown escape \\{}", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

/// Correspondence between character offsets of an original text and its
/// normalized form. Each character maps to the half-open range of
/// characters it produced (or was produced from).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OffsetMap {
    norm_to_orig: Vec<(usize, usize)>,
    orig_to_norm: Vec<(usize, usize)>,
}

impl OffsetMap {
    pub fn identity(len: usize) -> Self {
        let v: Vec<_> = (0..len).map(|i| (i, i + 1)).collect();
        OffsetMap {
            norm_to_orig: v.clone(),
            orig_to_norm: v,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.norm_to_orig.len() == self.orig_to_norm.len()
            && self.norm_to_orig.iter().enumerate().all(|(i, r)| *r == (i, i + 1))
    }

    /// Projects a span on the original text onto the normalized text.
    /// `None` when the span covers only deleted characters.
    pub fn to_normalized(&self, span: Span) -> Option<Span> {
        project(&self.orig_to_norm, span)
    }

    /// Projects a span on the normalized text back onto the original.
    pub fn to_original(&self, span: Span) -> Option<Span> {
        project(&self.norm_to_orig, span)
    }
}

fn project(map: &[(usize, usize)], span: Span) -> Option<Span> {
    if span.is_empty() || span.end > map.len() {
        return None;
    }
    let start = map[span.start].0;
    let end = map[span.end - 1].1;
    (start < end).then_some(Span { start, end })
}

/// Applies the normalization table left to right, longest pattern first at
/// each position.
pub fn normalize(text: &str, table: &NormalizationTable) -> (String, OffsetMap) {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut out_len = 0usize;
    let mut norm_to_orig = Vec::with_capacity(chars.len());
    let mut orig_to_norm = Vec::with_capacity(chars.len());
    let mut i = 0;
    'outer: while i < chars.len() {
        for (pat, rep) in &table.rules {
            if chars[i..].starts_with(pat) {
                let rep_len = rep.chars().count();
                out.push_str(rep);
                for _ in 0..rep_len {
                    norm_to_orig.push((i, i + pat.len()));
                }
                for _ in 0..pat.len() {
                    orig_to_norm.push((out_len, out_len + rep_len));
                }
                out_len += rep_len;
                i += pat.len();
                continue 'outer;
            }
        }
        out.push(chars[i]);
        norm_to_orig.push((i, i + 1));
        orig_to_norm.push((out_len, out_len + 1));
        out_len += 1;
        i += 1;
    }
    (
        out,
        OffsetMap {
            norm_to_orig,
            orig_to_norm,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Token {
    pub span: Span,
    pub index: usize,
    pub sentence_index: usize,
}

const SPLIT_PUNCT: &[char] = &['(', ')', '[', ']', '{', '}', ',', ';', ':', '.', '!', '?', '"'];

/// Whitespace tokenization with leading and trailing punctuation split off
/// one character at a time. Internal punctuation (hyphens, decimal points,
/// ratios) stays attached. Every token has `sentence_index` 0; see
/// [`analyze`] for sentence assignment.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let push = |start: usize, end: usize, tokens: &mut Vec<Token>| {
        let index = tokens.len();
        tokens.push(Token {
            span: Span { start, end },
            index,
            sentence_index: 0,
        });
    };
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let end = i;
        let mut lo = start;
        while lo < end && SPLIT_PUNCT.contains(&chars[lo]) {
            lo += 1;
        }
        let mut hi = end;
        while hi > lo && SPLIT_PUNCT.contains(&chars[hi - 1]) {
            hi -= 1;
        }
        for k in start..lo {
            push(k, k + 1, &mut tokens);
        }
        if lo < hi {
            push(lo, hi, &mut tokens);
        }
        for k in hi..end {
            push(k, k + 1, &mut tokens);
        }
    }
    tokens
}

#[derive(Debug, Clone)]
pub struct Abbreviations {
    entries: HashSet<String>,
}

impl Default for Abbreviations {
    fn default() -> Self {
        Self::parse(DEFAULT_ABBREVIATIONS)
    }
}

impl Abbreviations {
    pub fn parse(src: &str) -> Self {
        let entries = src
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect();
        Abbreviations { entries }
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&src))
    }

    pub fn empty() -> Self {
        Abbreviations {
            entries: HashSet::new(),
        }
    }

    /// True if `prefix` (text up to and including a period) ends with a
    /// listed abbreviation that starts at a word boundary.
    fn ends_prefix(&self, prefix: &[char]) -> bool {
        self.entries.iter().any(|a| {
            let a: Vec<char> = a.chars().collect();
            prefix.ends_with(&a) && {
                let before = prefix.len() - a.len();
                before == 0 || !prefix[before - 1].is_alphanumeric()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SentenceMap {
    pub boundaries: Vec<Span>,
}

impl SentenceMap {
    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }
}

/// Returns `(open, close)` token index pairs of matched parentheses and
/// square brackets, plus the indices of unmatched bracket tokens.
pub(crate) fn bracket_pairs(text: &[char], tokens: &[Token]) -> (Vec<(usize, usize)>, Vec<usize>) {
    let mut stack: Vec<(usize, char)> = Vec::new();
    let mut pairs = Vec::new();
    let mut unmatched = Vec::new();
    for t in tokens {
        if t.span.len() != 1 {
            continue;
        }
        match text[t.span.start] {
            c @ ('(' | '[') => stack.push((t.index, c)),
            c @ (')' | ']') => {
                let want = if c == ')' { '(' } else { '[' };
                match stack.last() {
                    Some(&(open, o)) if o == want => {
                        stack.pop();
                        pairs.push((open, t.index));
                    }
                    _ => unmatched.push(t.index),
                }
            }
            _ => {}
        }
    }
    unmatched.extend(stack.into_iter().map(|(i, _)| i));
    unmatched.sort_unstable();
    (pairs, unmatched)
}

/// Sentence boundaries over an already tokenized text. A sentence ends after
/// `.`, `!` or `?` when the next token is separated by whitespace and starts
/// with an uppercase letter or a digit, unless the period closes a listed
/// abbreviation or sits inside a matched bracket pair.
pub fn split_sentences(text: &str, tokens: &[Token], abbrevs: &Abbreviations) -> SentenceMap {
    let chars: Vec<char> = text.chars().collect();
    let boundaries = sentence_ends(&chars, tokens, abbrevs)
        .into_iter()
        .map(|(first, last)| Span {
            start: tokens[first].span.start,
            end: tokens[last].span.end,
        })
        .collect();
    SentenceMap { boundaries }
}

// (first token, last token) of each sentence
fn sentence_ends(chars: &[char], tokens: &[Token], abbrevs: &Abbreviations) -> Vec<(usize, usize)> {
    if tokens.is_empty() {
        return Vec::new();
    }
    let (pairs, _) = bracket_pairs(chars, tokens);
    let mut depth = vec![0i32; tokens.len() + 1];
    for (open, close) in pairs {
        depth[open + 1] += 1;
        depth[close] -= 1;
    }
    let mut inside = 0;
    let mut in_brackets = vec![false; tokens.len()];
    for (i, flag) in in_brackets.iter_mut().enumerate() {
        inside += depth[i];
        *flag = inside > 0;
    }

    let mut out = Vec::new();
    let mut first = 0;
    for i in 0..tokens.len() - 1 {
        let t = tokens[i];
        let c = chars[t.span.start];
        if t.span.len() != 1 || !matches!(c, '.' | '!' | '?') || in_brackets[i] {
            continue;
        }
        let next = tokens[i + 1];
        if next.span.start == t.span.end {
            continue;
        }
        let nc = chars[next.span.start];
        if !(nc.is_uppercase() || nc.is_ascii_digit()) {
            continue;
        }
        if c == '.' && abbrevs.ends_prefix(&chars[..t.span.end]) {
            continue;
        }
        out.push((first, i));
        first = i + 1;
    }
    out.push((first, tokens.len() - 1));
    out
}

/// Tokens with sentence ids, plus the bracket structure the relation rules
/// need.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub tokens: Vec<Token>,
    pub sentences: SentenceMap,
    /// Per token: the innermost matched bracket pair `(open, close)` strictly
    /// enclosing it, if any.
    pub enclosing: Vec<Option<(usize, usize)>>,
    pub bracket_pairs: Vec<(usize, usize)>,
    pub unmatched_brackets: Vec<usize>,
}

pub fn analyze(text: &str, abbrevs: &Abbreviations) -> Analysis {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = tokenize(text);
    let ends = sentence_ends(&chars, &tokens, abbrevs);
    for (s, &(first, last)) in ends.iter().enumerate() {
        for t in &mut tokens[first..=last] {
            t.sentence_index = s;
        }
    }
    let sentences = SentenceMap {
        boundaries: ends
            .iter()
            .map(|&(f, l)| Span {
                start: tokens[f].span.start,
                end: tokens[l].span.end,
            })
            .collect(),
    };
    let (pairs, unmatched) = bracket_pairs(&chars, &tokens);
    let mut enclosing = vec![None; tokens.len()];
    // outer pairs first so inner ones overwrite
    let mut by_width = pairs.clone();
    by_width.sort_by_key(|&(o, c)| std::cmp::Reverse(c - o));
    for &(o, c) in &by_width {
        for slot in &mut enclosing[o + 1..c] {
            *slot = Some((o, c));
        }
    }
    Analysis {
        tokens,
        sentences,
        enclosing,
        bracket_pairs: pairs,
        unmatched_brackets: unmatched,
    }
}

impl Analysis {
    /// Inclusive token range covering a character span, snapping outward.
    pub fn token_range(&self, span: Span) -> Option<(usize, usize)> {
        let first = self.tokens.partition_point(|t| t.span.end <= span.start);
        let after = self.tokens.partition_point(|t| t.span.start < span.end);
        (first < after).then(|| (first, after - 1))
    }

    pub fn entity_tokens(&self, e: &Entity) -> Option<(usize, usize)> {
        self.token_range(e.head())
    }

    pub fn sentence_of(&self, token: usize) -> usize {
        self.tokens[token].sentence_index
    }

    pub fn token_text<'a>(&self, text: &'a crate::docmodel::DocText, token: usize) -> &'a str {
        text.slice(self.tokens[token].span)
    }
}

/// Number of tokens strictly between two entities (first fragments only).
pub fn token_distance(a: &Entity, b: &Entity, analysis: &Analysis) -> Result<usize> {
    let ra = analysis
        .entity_tokens(a)
        .ok_or_else(|| Error::InvalidSpan { start: a.head().start, end: a.head().end, len: 0 })?;
    let rb = analysis
        .entity_tokens(b)
        .ok_or_else(|| Error::InvalidSpan { start: b.head().start, end: b.head().end, len: 0 })?;
    range_distance(ra, rb).ok_or_else(|| Error::OverlappingEntities(a.id.clone(), b.id.clone()))
}

/// Tokens strictly between two inclusive token ranges; `None` if they overlap.
pub fn range_distance(a: (usize, usize), b: (usize, usize)) -> Option<usize> {
    let (first, second) = if a.0 <= b.0 { (a, b) } else { (b, a) };
    (first.1 < second.0).then(|| second.0 - first.1 - 1)
}
