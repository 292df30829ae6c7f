use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::Serialize;

use crate::docmodel::{AnnotatedDocument, Span};
use crate::error::{Error, Result};

/// Category used when one annotator left an item unlabelled.
pub const NONE: &str = "NONE";

/// Cohen's kappa of a square confusion matrix (rows: annotator A, columns:
/// annotator B). When chance agreement is total, kappa is 1 if observed
/// agreement is also total and 0 otherwise; an empty matrix counts as
/// perfect agreement.
pub fn kappa_from_confusion(matrix: &[Vec<u64>]) -> f64 {
    let k = matrix.len();
    let n: u64 = matrix.iter().flatten().sum();
    if n == 0 {
        return 1.0;
    }
    let agree: u64 = (0..k).map(|i| matrix[i][i]).sum();
    let rows: Vec<u64> = matrix.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..k).map(|j| matrix.iter().map(|r| r[j]).sum()).collect();
    let chance: u128 = rows.iter().zip(&cols).map(|(&r, &c)| r as u128 * c as u128).sum();
    let n2 = n as u128 * n as u128;
    if chance == n2 {
        return if agree == n { 1.0 } else { 0.0 };
    }
    let po = agree as f64 / n as f64;
    let pe = chance as f64 / n2 as f64;
    (po - pe) / (1.0 - pe)
}

/// Confusion matrix over the sorted union of categories seen in `pairs`.
pub fn confusion<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)> + Clone) -> (Vec<String>, Vec<Vec<u64>>) {
    let cats: BTreeSet<&str> = pairs.clone().into_iter().flat_map(|(a, b)| [a, b]).collect();
    let index: HashMap<&str, usize> = cats.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut m = vec![vec![0u64; cats.len()]; cats.len()];
    for (a, b) in pairs {
        m[index[a]][index[b]] += 1;
    }
    (cats.into_iter().map(String::from).collect(), m)
}

/// Kappa averaged over both orientations (A as reference, then B).
fn two_way(pairs: &[(&str, &str)]) -> f64 {
    let ab = kappa_from_confusion(&confusion(pairs.iter().copied()).1);
    let ba = kappa_from_confusion(&confusion(pairs.iter().map(|&(a, b)| (b, a))).1);
    (ab + ba) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaReport {
    pub vertices_all: f64,
    pub vertices_type: f64,
    pub edges_all: f64,
    pub edges_type: f64,
}

impl KappaReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<9} {:>7} {:>7}", "", "All", "Type");
        let _ = writeln!(out, "{:<9} {:>7.3} {:>7.3}", "vertices", self.vertices_all, self.vertices_type);
        let _ = writeln!(out, "{:<9} {:>7.3} {:>7.3}", "edges", self.edges_all, self.edges_type);
        out
    }
}

type VertexKey<'a> = (&'a str, &'a [Span]);

/// One annotator's labels keyed by document and span set. If the same span
/// set is annotated twice the first label wins.
fn vertex_labels<'a>(docs: &[&'a AnnotatedDocument]) -> BTreeMap<VertexKey<'a>, &'static str> {
    let mut out = BTreeMap::new();
    for d in docs {
        for e in &d.entities {
            out.entry((d.doc_id.as_str(), e.spans.as_slice())).or_insert(e.label.as_str());
        }
    }
    out
}

fn edge_labels<'a>(docs: &[&'a AnnotatedDocument]) -> BTreeMap<(VertexKey<'a>, VertexKey<'a>), &'static str> {
    let mut out = BTreeMap::new();
    for d in docs {
        let spans: HashMap<&str, &[Span]> = d.entities.iter().map(|e| (e.id.as_str(), e.spans.as_slice())).collect();
        for r in &d.relations {
            if let (Some(&a), Some(&b)) = (spans.get(r.from.as_str()), spans.get(r.to.as_str())) {
                out.entry(((d.doc_id.as_str(), a), (d.doc_id.as_str(), b)))
                    .or_insert(r.label.as_str());
            }
        }
    }
    out
}

fn all_and_type<K: Ord + Copy>(a: &BTreeMap<K, &'static str>, b: &BTreeMap<K, &'static str>, keep: impl Fn(&K) -> bool) -> (f64, f64) {
    let items: BTreeSet<K> = a.keys().chain(b.keys()).copied().filter(|k| keep(k)).collect();
    let all: Vec<(&str, &str)> = items
        .iter()
        .map(|k| (a.get(k).copied().unwrap_or(NONE), b.get(k).copied().unwrap_or(NONE)))
        .collect();
    let typed: Vec<(&str, &str)> = items
        .iter()
        .filter_map(|k| Some((a.get(k).copied()?, b.get(k).copied()?)))
        .collect();
    (two_way(&all), two_way(&typed))
}

/// Agreement between two annotators over paired documents.
///
/// Vertex items are exact span sets; in the All setting an item either
/// annotator marked gets category NONE from the other. Edge items are
/// directed pairs of vertices both annotators marked.
pub fn cohen_kappa(pairs: &[(&AnnotatedDocument, &AnnotatedDocument)]) -> Result<KappaReport> {
    for (a, b) in pairs {
        if a.doc_id != b.doc_id || a.text != b.text {
            return Err(Error::TextMismatch(a.doc_id.clone()));
        }
    }
    let left: Vec<&AnnotatedDocument> = pairs.iter().map(|p| p.0).collect();
    let right: Vec<&AnnotatedDocument> = pairs.iter().map(|p| p.1).collect();
    let (va, vb) = (vertex_labels(&left), vertex_labels(&right));
    let (vertices_all, vertices_type) = all_and_type(&va, &vb, |_| true);
    let shared = |v: &VertexKey| va.contains_key(v) && vb.contains_key(v);
    let (edges_all, edges_type) =
        all_and_type(&edge_labels(&left), &edge_labels(&right), |(x, y)| shared(x) && shared(y));
    Ok(KappaReport {
        vertices_all,
        vertices_type,
        edges_all,
        edges_type,
    })
}
