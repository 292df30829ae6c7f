//! Extraction of materials-synthesis flow graphs from annotated text.
//!
//! Documents are read from brat standoff files ([`standoff`]), optionally
//! tagged ([`tagger`]), linked by five heuristic rules ([`relext`]) and
//! assembled into coreference-merged directed acyclic graphs ([`graph`]).
//! [`eval`] scores entities and relations, per-rule attribution and
//! inter-annotator agreement.

pub mod diag;
pub mod docmodel;
pub mod error;
pub mod eval;
pub mod graph;
pub mod pipeline;
pub mod relext;
pub mod standoff;
pub mod tagger;
pub mod textprep;

pub use diag::{Diagnostic, DiagnosticKind};
pub use docmodel::{
    coarse_of, AnnotatedDocument, CoarseGroup, DocText, EdgeLabel, Entity, Label, Relation, Span, VertexLabel,
};
pub use error::{Error, Result};
pub use graph::{build_graph, merge_coreference, topo_order, ClusterMap, GraphEdge, GraphNode, SynthesisGraph};
pub use pipeline::{run_document, DocumentOutput, PipelineOptions};
pub use relext::{extract, Ablation, BracketChain, Extraction, PredictedRelation, Rule, RuleConfig};
pub use standoff::{load_corpus, parse_document, serialize_document, CorpusHandle, LoadOptions, ParseOptions};
pub use tagger::{BaselineTagger, EntityTagger, Passthrough, StandoffPredictions};
pub use textprep::{Abbreviations, NormalizationTable};
