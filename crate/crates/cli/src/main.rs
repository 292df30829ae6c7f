use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use synthgraph_core::eval::{self, EvalReport, ReportKind, RuleStats, Setting};
use synthgraph_core::graph::to_dot;
use synthgraph_core::pipeline::{run_document, DocumentOutput, PipelineOptions};
use synthgraph_core::relext::{extract_document, Ablation, BracketChain, RuleConfig};
use synthgraph_core::standoff::{self, LoadOptions, ParseOptions};
use synthgraph_core::{
    build_graph, AnnotatedDocument, Abbreviations, BaselineTagger, CorpusHandle, EntityTagger, Error, Passthrough,
    StandoffPredictions, SynthesisGraph,
};

#[derive(Parser)]
#[command(name = "synthgraph", version, about = "Extract synthesis flow graphs from brat standoff corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tag (or reuse) entities, run the relation rules and write graphs.
    Extract(ExtractArgs),
    /// Score predicted entities and rule-based relations against gold.
    Eval(EvalArgs),
    /// Cohen's kappa between two annotators.
    Agree(AgreeArgs),
    /// Corpus statistics.
    Stats(StatsArgs),
    /// Per-rule coverage and accuracy against gold.
    RulesReport(RulesArgs),
    /// Convert gold annotations to graphs or normalized standoff.
    Export(ExportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TaggerSource {
    Gold,
    Baseline,
    StandoffPred,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Ann,
    Table,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AblationArg {
    Full,
    NoMatSub,
    NoPropSub,
    NoSub,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BracketArg {
    Link,
    Skip,
    Inline,
}

#[derive(Args, Clone)]
struct LoadArgs {
    /// Reverse Condition arguments when reading standoff files.
    #[arg(long)]
    flip_condition: bool,
    /// Stop at the first document error.
    #[arg(long)]
    fail_fast: bool,
}

#[derive(Args, Clone)]
struct RuleArgs {
    #[arg(long, value_enum, default_value = "full")]
    ablation: AblationArg,
    #[arg(long, value_enum, default_value = "link")]
    bracket_chain: BracketArg,
    /// Drop the shorter of overlapping entities instead of failing.
    #[arg(long)]
    keep_longest: bool,
}

#[derive(Args)]
struct ExtractArgs {
    /// Directory of .txt/.ann pairs, or a file listing document paths.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "gold")]
    tagger: TaggerSource,
    /// Prediction corpus for `--tagger standoff-pred`.
    #[arg(long)]
    pred: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output directory; one file per document. Defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    rules: RuleArgs,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    /// Predicted entities to score; relations are always scored on gold
    /// entities.
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Score the built-in baseline tagger instead of `--pred`.
    #[arg(long, value_enum)]
    tagger: Option<TaggerSource>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    rules: RuleArgs,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Args)]
struct AgreeArgs {
    /// Annotator A.
    #[arg(long)]
    gold: PathBuf,
    /// Annotator B.
    #[arg(long)]
    pred: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Args)]
struct RulesArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    rules: RuleArgs,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    load: LoadArgs,
}

/// Errors seen so far; any of them makes the exit code nonzero.
#[derive(Default)]
struct Outcome {
    errors: usize,
}

impl Outcome {
    fn error(&mut self, e: impl std::fmt::Display) {
        log::error!("{e}");
        self.errors += 1;
    }
}

impl RuleArgs {
    fn options(&self) -> PipelineOptions {
        let ablation = match self.ablation {
            AblationArg::Full => Ablation::Full,
            AblationArg::NoMatSub => Ablation::NoMaterialSublabels,
            AblationArg::NoPropSub => Ablation::NoPropertySublabels,
            AblationArg::NoSub => Ablation::NoSublabels,
        };
        let mut rules = RuleConfig::preset(ablation);
        rules.bracket_chain = match self.bracket_chain {
            BracketArg::Link => BracketChain::Link,
            BracketArg::Skip => BracketChain::Skip,
            BracketArg::Inline => BracketChain::Inline,
        };
        PipelineOptions {
            rules,
            keep_longest: self.keep_longest,
        }
    }
}

fn check_path(p: &Path) -> anyhow::Result<()> {
    if !p.exists() {
        bail!("{} does not exist", p.display());
    }
    Ok(())
}

fn load(path: &Path, args: &LoadArgs, outcome: &mut Outcome) -> anyhow::Result<CorpusHandle> {
    check_path(path)?;
    let opts = LoadOptions {
        parse: ParseOptions {
            flip_condition: args.flip_condition,
        },
        fail_fast: args.fail_fast,
    };
    let (corpus, report) =
        standoff::load_corpus(path, &opts).with_context(|| format!("loading {}", path.display()))?;
    for d in &report.diagnostics {
        log::warn!("{d}");
    }
    for e in &report.errors {
        outcome.error(e);
    }
    Ok(corpus)
}

/// Writes `content` to `out/<name>` or to standard output.
fn emit(out: Option<&Path>, name: &str, content: &str) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            let path = dir.join(name);
            fs::write(&path, content).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn edge_table(doc: &AnnotatedDocument, g: &SynthesisGraph) -> String {
    let mut s = format!("# {}\n", doc.doc_id);
    for e in &g.edges {
        let text = |id: &str| g.node(id).map(|n| n.text().to_string()).unwrap_or_default();
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            text(&e.from),
            e.label.as_str(),
            text(&e.to),
            e.rule.as_deref().unwrap_or("-")
        ));
    }
    s
}

fn write_outputs(
    docs: &[(AnnotatedDocument, SynthesisGraph, Option<std::collections::BTreeMap<String, String>>)],
    format: Format,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    match (format, out) {
        (Format::Json, None) => {
            let all: Vec<Value> = docs
                .iter()
                .map(|(d, g, rules)| {
                    json!({
                        "document": standoff::document_json(d, rules.as_ref()),
                        "graph": standoff::graph_json(&d.doc_id, g),
                    })
                })
                .collect();
            emit(None, "", &pretty(&Value::Array(all)))?;
        }
        (Format::Json, Some(_)) => {
            for (d, g, rules) in docs {
                let v = json!({
                    "document": standoff::document_json(d, rules.as_ref()),
                    "graph": standoff::graph_json(&d.doc_id, g),
                });
                emit(out, &format!("{}.json", d.doc_id), &pretty(&v))?;
            }
        }
        (Format::Dot, _) => {
            for (d, g, _) in docs {
                emit(out, &format!("{}.dot", d.doc_id), &to_dot(&d.doc_id, g))?;
            }
        }
        (Format::Ann, Some(dir)) => {
            for (d, _, _) in docs {
                standoff::write_document(dir, d)?;
            }
        }
        (Format::Ann, None) => {
            for (d, _, _) in docs {
                let (_, ann) = standoff::serialize_document(d);
                emit(None, "", &format!("# {}\n{ann}", d.doc_id))?;
            }
        }
        (Format::Table, _) => {
            for (d, g, _) in docs {
                emit(out, &format!("{}.tsv", d.doc_id), &edge_table(d, g))?;
            }
        }
    }
    Ok(())
}

fn cmd_extract(args: ExtractArgs) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::default();
    let corpus = load(&args.input, &args.load, &mut outcome)?;
    let tagger: Box<dyn EntityTagger> = match args.tagger {
        TaggerSource::Gold => Box::new(Passthrough),
        TaggerSource::Baseline => Box::new(BaselineTagger::default()),
        TaggerSource::StandoffPred => {
            let Some(pred) = &args.pred else {
                bail!("--tagger standoff-pred needs --pred");
            };
            Box::new(StandoffPredictions::new(load(pred, &args.load, &mut outcome)?.documents))
        }
    };
    let opts = args.rules.options();
    let abbrevs = Abbreviations::default();
    let results: Vec<synthgraph_core::Result<DocumentOutput>> = corpus
        .documents
        .par_iter()
        .map(|d| run_document(d, tagger.as_ref(), &opts, &abbrevs))
        .collect();
    let mut done = Vec::new();
    for (doc, res) in corpus.documents.iter().zip(results) {
        match res {
            Ok(o) => {
                for d in &o.diagnostics {
                    log::warn!("{}: {d}", doc.doc_id);
                }
                let rules = o.extraction.rule_map();
                done.push((o.document, o.graph, Some(rules)));
            }
            Err(e) if args.load.fail_fast => return Err(anyhow::Error::new(e).context(doc.doc_id.clone())),
            Err(e) => outcome.error(format!("{}: {e}", doc.doc_id)),
        }
    }
    write_outputs(&done, args.format, args.out.as_deref())?;
    Ok(outcome)
}

fn render(value: Value, table: impl FnOnce() -> String, format: Format) -> anyhow::Result<String> {
    match format {
        Format::Json => Ok(pretty(&value)),
        Format::Table => Ok(table()),
        _ => bail!("this command only writes json or table output"),
    }
}

fn emit_report(out: Option<&Path>, name: &str, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, content).with_context(|| format!("writing {}", path.display())),
        None => emit(None, name, content),
    }
}

/// Relation extraction on gold entities, per document, in input order.
fn rules_on_gold(
    corpus: &CorpusHandle,
    rules: &RuleArgs,
    outcome: &mut Outcome,
) -> Vec<(AnnotatedDocument, synthgraph_core::Extraction)> {
    let opts = rules.options();
    let abbrevs = Abbreviations::default();
    let results: Vec<_> = corpus
        .documents
        .par_iter()
        .map(|d| {
            if opts.keep_longest {
                let (kept, _) = synthgraph_core::docmodel::keep_longest(&d.entities);
                extract_document(&d.with_annotations(kept, d.relations.clone()), &opts.rules, &abbrevs)
            } else {
                extract_document(d, &opts.rules, &abbrevs)
            }
        })
        .collect();
    let mut out = Vec::new();
    for (d, r) in corpus.documents.iter().zip(results) {
        match r {
            Ok(x) => {
                for diag in &x.diagnostics {
                    log::warn!("{}: {diag}", d.doc_id);
                }
                out.push((d.clone(), x));
            }
            Err(e) => outcome.error(format!("{}: {e}", d.doc_id)),
        }
    }
    out
}

fn cmd_eval(args: EvalArgs) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::default();
    let gold = load(&args.gold, &args.load, &mut outcome)?;
    let tagger: Option<Box<dyn EntityTagger>> = match (args.tagger, &args.pred) {
        (Some(TaggerSource::Baseline), _) => Some(Box::new(BaselineTagger::default())),
        (Some(TaggerSource::Gold), _) => Some(Box::new(Passthrough)),
        (_, Some(pred)) => Some(Box::new(StandoffPredictions::new(load(pred, &args.load, &mut outcome)?.documents))),
        (Some(TaggerSource::StandoffPred), None) => bail!("--tagger standoff-pred needs --pred"),
        (None, None) => None,
    };

    let mut report = serde_json::Map::new();
    let mut table = String::new();
    if let Some(tagger) = tagger {
        let per_doc: Vec<synthgraph_core::Result<(EvalReport, EvalReport)>> = gold
            .documents
            .par_iter()
            .map(|g| {
                let pred = tagger.tag_document(g)?;
                Ok((
                    eval::entity_prf_lists(&g.entities, &pred, Setting::Fine),
                    eval::entity_prf_lists(&g.entities, &pred, Setting::Coarse),
                ))
            })
            .collect();
        let mut fine = Vec::new();
        let mut coarse = Vec::new();
        for (g, r) in gold.documents.iter().zip(per_doc) {
            match r {
                Ok((f, c)) => {
                    fine.push(f);
                    coarse.push(c);
                }
                Err(e) => outcome.error(format!("{}: {e}", g.doc_id)),
            }
        }
        let fine = EvalReport::merge_all(ReportKind::EntityFine, &fine)?;
        let coarse = EvalReport::merge_all(ReportKind::EntityCoarse, &coarse)?;
        table.push_str("== entities (fine) ==\n");
        table.push_str(&fine.to_table());
        table.push_str("\n== entities (coarse) ==\n");
        table.push_str(&coarse.to_table());
        table.push('\n');
        report.insert("entities_fine".into(), serde_json::to_value(&fine)?);
        report.insert("entities_coarse".into(), serde_json::to_value(&coarse)?);
    }

    let extracted = rules_on_gold(&gold, &args.rules, &mut outcome);
    let mut rel = Vec::new();
    for (d, x) in &extracted {
        match eval::relation_prf(d, &x.relations()) {
            Ok(r) => rel.push(r),
            Err(e) => outcome.error(format!("{}: {e}", d.doc_id)),
        }
    }
    let rel = EvalReport::merge_all(ReportKind::Relation, &rel)?;
    table.push_str("== relations ==\n");
    table.push_str(&rel.to_table());
    report.insert("relations".into(), serde_json::to_value(&rel)?);

    let text = render(Value::Object(report), || table, args.format)?;
    emit_report(args.out.as_deref(), "", &text)?;
    Ok(outcome)
}

fn cmd_agree(args: AgreeArgs) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::default();
    let a = load(&args.gold, &args.load, &mut outcome)?;
    let b = load(&args.pred, &args.load, &mut outcome)?;
    let pairs: Vec<(&AnnotatedDocument, &AnnotatedDocument)> =
        a.documents.iter().filter_map(|d| Some((d, b.get(&d.doc_id)?))).collect();
    let only = a.len() + b.len() - 2 * pairs.len();
    if only > 0 {
        log::warn!("{only} document(s) annotated by only one side are ignored");
    }
    let k = eval::cohen_kappa(&pairs)?;
    let text = render(serde_json::to_value(&k)?, || k.to_table(), args.format)?;
    emit_report(args.out.as_deref(), "", &text)?;
    Ok(outcome)
}

fn cmd_stats(args: StatsArgs) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::default();
    let corpus = load(&args.input, &args.load, &mut outcome)?;
    let s = eval::corpus_stats(&corpus.documents, &Abbreviations::default());
    let text = render(serde_json::to_value(&s)?, || s.to_table(), args.format)?;
    emit_report(args.out.as_deref(), "", &text)?;
    Ok(outcome)
}

fn cmd_rules_report(args: RulesArgs) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::default();
    let gold = load(&args.gold, &args.load, &mut outcome)?;
    let mut stats = RuleStats::default();
    for (d, x) in rules_on_gold(&gold, &args.rules, &mut outcome) {
        match eval::rule_stats(&d, &x.predictions) {
            Ok(s) => stats = stats.merge(&s),
            Err(e) => outcome.error(format!("{}: {e}", d.doc_id)),
        }
    }
    let text = render(serde_json::to_value(&stats)?, || stats.to_table(), args.format)?;
    emit_report(args.out.as_deref(), "", &text)?;
    Ok(outcome)
}

fn cmd_export(args: ExportArgs) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::default();
    let corpus = load(&args.input, &args.load, &mut outcome)?;
    let mut done = Vec::new();
    for d in &corpus.documents {
        match build_graph(&d.entities, &d.relations, &Default::default()) {
            Ok((g, diags)) => {
                for diag in diags {
                    log::warn!("{}: {diag}", d.doc_id);
                }
                done.push((d.clone(), g, None));
            }
            Err(e) if args.load.fail_fast => return Err(anyhow::Error::new(e).context(d.doc_id.clone())),
            Err(e) => outcome.error(format!("{}: {e}", d.doc_id)),
        }
    }
    write_outputs(&done, args.format, args.out.as_deref())?;
    Ok(outcome)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(a) => cmd_extract(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Agree(a) => cmd_agree(a),
        Command::Stats(a) => cmd_stats(a),
        Command::RulesReport(a) => cmd_rules_report(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(o) if o.errors == 0 => ExitCode::SUCCESS,
        Ok(o) => {
            log::error!("{} error(s)", o.errors);
            ExitCode::FAILURE
        }
        Err(e) => {
            // keep the typed core error visible at the top of the chain
            match e.downcast_ref::<Error>() {
                Some(core) => log::error!("{core}: {e:#}"),
                None => log::error!("{e:#}"),
            }
            ExitCode::FAILURE
        }
    }
}
