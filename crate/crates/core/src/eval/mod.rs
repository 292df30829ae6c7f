//! Metrics: exact-match P/R/F1 for entities and relations, per-rule
//! coverage and accuracy, Cohen's kappa and corpus statistics.

mod kappa;
mod prf;
mod stats;

pub use kappa::{cohen_kappa, confusion, kappa_from_confusion, KappaReport, NONE};
pub use prf::{
    entity_prf, entity_prf_lists, relation_prf, rule_stats, EvalReport, Prf, ReportKind, RuleRow, RuleStats, Setting,
};
pub use stats::{corpus_stats, CorpusStats};
