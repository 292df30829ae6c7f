use std::path::Path;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use synthgraph_core::pipeline::{run_document, PipelineOptions};
use synthgraph_core::relext::extract;
use synthgraph_core::standoff::{load_corpus, LoadOptions};
use synthgraph_core::tagger::{BaselineTagger, Passthrough};
use synthgraph_core::{Abbreviations, AnnotatedDocument, DocText, Entity, RuleConfig, Span};

fn lto() -> AnnotatedDocument {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini");
    let (corpus, _) = load_corpus(&dir, &LoadOptions::default()).expect("fixtures load");
    corpus.get("lto").expect("lto fixture").clone()
}

/// The fixture paragraph repeated `n` times with shifted entities.
fn repeated(doc: &AnnotatedDocument, n: usize) -> (String, Vec<Entity>) {
    let base = doc.text.as_str();
    let stride = base.chars().count() + 1;
    let text = vec![base; n].join("\n");
    let dt = DocText::new(text.clone());
    let mut entities = Vec::new();
    for k in 0..n {
        for e in &doc.entities {
            let spans = e
                .spans
                .iter()
                .map(|s| Span::new(s.start + k * stride, s.end + k * stride).unwrap())
                .collect();
            entities.push(Entity::new(format!("T{}", entities.len() + 1), e.label, spans, &dt).unwrap());
        }
    }
    (text, entities)
}

fn bench_extract(c: &mut Criterion) {
    let doc = lto();
    let abbrevs = Abbreviations::default();
    let cfg = RuleConfig::default();
    let mut group = c.benchmark_group("extract");
    for n in [1, 8, 64] {
        let (text, entities) = repeated(&doc, n);
        group.throughput(Throughput::Elements(entities.len() as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| extract(black_box(&text), black_box(&entities), &cfg, &abbrevs).unwrap())
        });
    }
    group.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let doc = lto();
    let abbrevs = Abbreviations::default();
    let opts = PipelineOptions::default();
    let baseline = BaselineTagger::default();
    c.bench_function("pipeline/gold", |b| {
        b.iter(|| run_document(black_box(&doc), &Passthrough, &opts, &abbrevs).unwrap())
    });
    c.bench_function("pipeline/baseline", |b| {
        b.iter(|| run_document(black_box(&doc), &baseline, &opts, &abbrevs).unwrap())
    });
}

criterion_group!(benches, bench_extract, bench_pipeline);
criterion_main!(benches);
