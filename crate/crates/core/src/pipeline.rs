//! Tagging, relation extraction and graph building for one document.

use crate::diag::{Diagnostic, DiagnosticKind};
use crate::docmodel::{keep_longest, AnnotatedDocument};
use crate::error::Result;
use crate::graph::{build_graph, SynthesisGraph};
use crate::relext::{extract, Extraction, RuleConfig};
use crate::tagger::EntityTagger;
use crate::textprep::Abbreviations;

#[derive(Debug, Clone, Default)]
pub struct PipelineOptions {
    pub rules: RuleConfig,
    /// Drop the shorter of any two overlapping entities instead of failing.
    pub keep_longest: bool,
}

#[derive(Debug, Clone)]
pub struct DocumentOutput {
    /// Input text with the tagged entities and predicted relations.
    pub document: AnnotatedDocument,
    pub extraction: Extraction,
    pub graph: SynthesisGraph,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn run_document(
    doc: &AnnotatedDocument,
    tagger: &dyn EntityTagger,
    opts: &PipelineOptions,
    abbrevs: &Abbreviations,
) -> Result<DocumentOutput> {
    let mut diagnostics = Vec::new();
    let mut entities = tagger.tag_document(doc)?;
    if opts.keep_longest {
        let (kept, dropped) = keep_longest(&entities);
        for id in dropped {
            diagnostics.push(Diagnostic::new(
                DiagnosticKind::DroppedEntity,
                format!("{}: dropped overlapping entity {id}", doc.doc_id),
            ));
        }
        entities = kept;
    }
    let extraction = extract(doc.text.as_str(), &entities, &opts.rules, abbrevs)?;
    diagnostics.extend(extraction.diagnostics.iter().cloned());
    let relations = extraction.relations();
    let (graph, graph_diags) = build_graph(&entities, &relations, &extraction.rule_map())?;
    diagnostics.extend(graph_diags);
    let document = doc.with_annotations(entities, relations);
    Ok(DocumentOutput {
        document,
        extraction,
        graph,
        diagnostics,
    })
}
