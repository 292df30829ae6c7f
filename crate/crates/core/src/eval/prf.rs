use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::docmodel::{AnnotatedDocument, CoarseGroup, EdgeLabel, Entity, Relation, Span, VertexLabel};
use crate::error::{Error, Result};
use crate::graph::{merge_coreference, ClusterMap};
use crate::relext::{PredictedRelation, Rule};

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Exact-match counts with derived precision, recall and F1. Every 0/0 is 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Prf {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        // 2PR/(P+R) simplifies to 2tp/(2tp+fp+fn), which avoids rounding
        let f1 = ratio(2 * tp, 2 * tp + fp + fn_);
        Prf {
            tp,
            fp,
            fn_,
            precision,
            recall,
            f1,
        }
    }

    pub fn add(&self, other: &Prf) -> Prf {
        Prf::from_counts(self.tp + other.tp, self.fp + other.fp, self.fn_ + other.fn_)
    }
}

/// What an [`EvalReport`]'s macro average is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    /// Fine labels, pooled into coarse groups; macro over the groups.
    EntityFine,
    /// Coarse groups only.
    EntityCoarse,
    /// Condition and Next; macro over the two.
    Relation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub kind: ReportKind,
    /// Per fine label (entities, fine setting) or per edge label.
    pub per_type: BTreeMap<String, Prf>,
    /// Micro scores per coarse group (entities only).
    pub per_group: BTreeMap<String, Prf>,
    pub macro_f1: f64,
}

impl EvalReport {
    fn empty(kind: ReportKind) -> Self {
        let mut per_type = BTreeMap::new();
        let mut per_group = BTreeMap::new();
        match kind {
            ReportKind::EntityFine => {
                for l in VertexLabel::ALL {
                    per_type.insert(l.as_str().to_string(), Prf::default());
                }
                for g in CoarseGroup::ALL {
                    per_group.insert(g.as_str().to_string(), Prf::default());
                }
            }
            ReportKind::EntityCoarse => {
                for g in CoarseGroup::ALL {
                    per_group.insert(g.as_str().to_string(), Prf::default());
                }
            }
            ReportKind::Relation => {
                for l in [EdgeLabel::Condition, EdgeLabel::Next] {
                    per_type.insert(l.as_str().to_string(), Prf::default());
                }
            }
        }
        EvalReport {
            kind,
            per_type,
            per_group,
            macro_f1: 0.0,
        }
    }

    fn bump(map: &mut BTreeMap<String, Prf>, key: &str, tp: usize, fp: usize, fn_: usize) {
        let e = map.get_mut(key).expect("report keys are fixed up front");
        *e = e.add(&Prf::from_counts(tp, fp, fn_));
    }

    fn finish(mut self) -> Self {
        if self.kind == ReportKind::EntityFine {
            for g in CoarseGroup::ALL {
                let pooled = VertexLabel::ALL
                    .iter()
                    .filter(|l| l.coarse() == g)
                    .fold(Prf::default(), |acc, l| acc.add(&self.per_type[l.as_str()]));
                self.per_group.insert(g.as_str().to_string(), pooled);
            }
        }
        let over = if self.kind == ReportKind::Relation {
            &self.per_type
        } else {
            &self.per_group
        };
        self.macro_f1 = over.values().map(|p| p.f1).sum::<f64>() / over.len() as f64;
        self
    }

    /// Sums counts of two reports of the same kind, e.g. across documents.
    pub fn merge(&self, other: &EvalReport) -> Result<EvalReport> {
        if self.kind != other.kind {
            return Err(Error::Config(format!("cannot merge {:?} with {:?} report", self.kind, other.kind)));
        }
        let mut out = self.clone();
        for (k, v) in &other.per_type {
            let e = out.per_type.entry(k.clone()).or_default();
            *e = e.add(v);
        }
        if self.kind == ReportKind::EntityCoarse {
            for (k, v) in &other.per_group {
                let e = out.per_group.entry(k.clone()).or_default();
                *e = e.add(v);
            }
        }
        Ok(out.finish())
    }

    pub fn merge_all<'a>(kind: ReportKind, reports: impl IntoIterator<Item = &'a EvalReport>) -> Result<EvalReport> {
        reports
            .into_iter()
            .try_fold(EvalReport::empty(kind).finish(), |acc, r| acc.merge(r))
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<(String, Prf)> = self.per_type.iter().map(|(k, v)| (k.clone(), *v)).collect();
        if self.kind != ReportKind::Relation {
            rows.extend(self.per_group.iter().map(|(k, v)| (format!("{k} (micro)"), *v)));
        }
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(4);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>5} {:>5} {:>5}  {:>9} {:>9} {:>9}", "type", "tp", "fp", "fn", "precision", "recall", "f1");
        for (name, p) in rows {
            let _ = writeln!(
                out,
                "{:<width$}  {:>5} {:>5} {:>5}  {:>9.3} {:>9.3} {:>9.3}",
                name, p.tp, p.fp, p.fn_, p.precision, p.recall, p.f1
            );
        }
        let _ = writeln!(out, "{:<width$}  {:>5} {:>5} {:>5}  {:>9} {:>9} {:>9.3}", "ALL", "", "", "", "", "", self.macro_f1);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Fine,
    Coarse,
}

/// Exact-match entity scores. A prediction is correct if some not yet
/// matched gold entity has the same span set and the same fine label (or
/// coarse group, in the coarse setting).
pub fn entity_prf(gold: &AnnotatedDocument, pred: &AnnotatedDocument, setting: Setting) -> Result<EvalReport> {
    if gold.text != pred.text {
        return Err(Error::DocumentMismatch(format!(
            "gold `{}` and prediction `{}` have different texts",
            gold.doc_id, pred.doc_id
        )));
    }
    Ok(entity_prf_lists(&gold.entities, &pred.entities, setting))
}

pub fn entity_prf_lists(gold: &[Entity], pred: &[Entity], setting: Setting) -> EvalReport {
    let kind = match setting {
        Setting::Fine => ReportKind::EntityFine,
        Setting::Coarse => ReportKind::EntityCoarse,
    };
    let key_name = |e: &Entity| match setting {
        Setting::Fine => e.label.as_str(),
        Setting::Coarse => e.coarse().as_str(),
    };
    let mut report = EvalReport::empty(kind);
    let mut open: HashMap<(&[Span], &str), usize> = HashMap::new();
    for g in gold {
        *open.entry((g.spans.as_slice(), key_name(g))).or_default() += 1;
    }
    let map = match setting {
        Setting::Fine => &mut report.per_type,
        Setting::Coarse => &mut report.per_group,
    };
    for p in pred {
        let name = key_name(p);
        match open.get_mut(&(p.spans.as_slice(), name)) {
            Some(n) if *n > 0 => {
                *n -= 1;
                EvalReport::bump(map, name, 1, 0, 0);
            }
            _ => EvalReport::bump(map, name, 0, 1, 0),
        }
    }
    for ((_, name), n) in open {
        EvalReport::bump(map, name, 0, 0, n);
    }
    report.finish()
}

type LiftedEdge = (usize, usize, EdgeLabel);

fn lift(clusters: &ClusterMap, r: &Relation) -> Result<LiftedEdge> {
    let end = |id: &str| {
        clusters.cluster_of(id).ok_or_else(|| Error::DanglingReference {
            relation: r.id.clone(),
            target: id.to_string(),
        })
    };
    Ok((end(&r.from)?, end(&r.to)?, r.label))
}

fn gold_edges(gold: &AnnotatedDocument) -> Result<(ClusterMap, HashSet<LiftedEdge>)> {
    let (clusters, _) = merge_coreference(&gold.entities, &gold.relations);
    let edges = gold
        .relations
        .iter()
        .filter(|r| r.label != EdgeLabel::Coreference)
        .map(|r| lift(&clusters, r))
        .collect::<Result<_>>()?;
    Ok((clusters, edges))
}

/// Condition and Next scores with coreferent mentions treated as one
/// vertex. Both sides are deduplicated after lifting to clusters; predicted
/// Coreference edges are ignored.
pub fn relation_prf(gold: &AnnotatedDocument, pred: &[Relation]) -> Result<EvalReport> {
    let (clusters, gold_set) = gold_edges(gold)?;
    let pred_set: HashSet<LiftedEdge> = pred
        .iter()
        .filter(|r| r.label != EdgeLabel::Coreference)
        .map(|r| lift(&clusters, r))
        .collect::<Result<_>>()?;
    let mut report = EvalReport::empty(ReportKind::Relation);
    for e in &pred_set {
        let hit = gold_set.contains(e) as usize;
        EvalReport::bump(&mut report.per_type, e.2.as_str(), hit, 1 - hit, 0);
    }
    for e in gold_set.difference(&pred_set) {
        EvalReport::bump(&mut report.per_type, e.2.as_str(), 0, 0, 1);
    }
    Ok(report.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RuleRow {
    pub predicted: usize,
    pub correct: usize,
    pub coverage: f64,
    pub accuracy: f64,
}

/// Per-rule coverage (share of all predicted edges) and accuracy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleStats {
    pub total: usize,
    pub rules: BTreeMap<Rule, RuleRow>,
}

impl Default for RuleStats {
    fn default() -> Self {
        RuleStats {
            total: 0,
            rules: Rule::ALL.into_iter().map(|r| (r, RuleRow::default())).collect(),
        }
    }
}

impl RuleStats {
    fn finish(mut self) -> Self {
        self.total = self.rules.values().map(|r| r.predicted).sum();
        for row in self.rules.values_mut() {
            row.coverage = ratio(row.predicted, self.total);
            row.accuracy = ratio(row.correct, row.predicted);
        }
        self
    }

    pub fn merge(&self, other: &RuleStats) -> RuleStats {
        let mut out = self.clone();
        for (rule, row) in &other.rules {
            let e = out.rules.entry(*rule).or_default();
            e.predicted += row.predicted;
            e.correct += row.correct;
        }
        out.finish()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<6} {:>9} {:>7} {:>9} {:>9}", "rule", "predicted", "correct", "coverage", "accuracy");
        for (rule, r) in &self.rules {
            let _ = writeln!(
                out,
                "{:<6} {:>9} {:>7} {:>9.3} {:>9.3}",
                rule.as_str(),
                r.predicted,
                r.correct,
                r.coverage,
                r.accuracy
            );
        }
        let _ = writeln!(out, "{:<6} {:>9}", "total", self.total);
        out
    }
}

/// Raw predicted edges are counted, so an edge that collapses with another
/// after coreference lifting still counts once per attribution.
pub fn rule_stats(gold: &AnnotatedDocument, predictions: &[PredictedRelation]) -> Result<RuleStats> {
    let (clusters, gold_set) = gold_edges(gold)?;
    let mut stats = RuleStats::default();
    for p in predictions {
        let row = stats.rules.entry(p.rule).or_default();
        row.predicted += 1;
        if gold_set.contains(&lift(&clusters, &p.relation)?) {
            row.correct += 1;
        }
    }
    Ok(stats.finish())
}
