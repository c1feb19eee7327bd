//! The `irbench` command line.

mod config;

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{build_providers, Overrides, PipelineConfig, ProviderKind, Providers, ProvidersConfig, RerankerEntry};

use crate::corpus::{
    chunk_long_document, corpus_stats, filter_documents, read_corpus, read_queries, read_query_texts, write_corpus,
};
use crate::error::{Error, Result};
use crate::eval::{
    self, consistency_analysis, evaluate_run, label_query_diversity, read_run, rerank_eval, robustness_resample,
    similarity_matrix, spearman, spearman_permutation, write_run, Bm25Index, Facet, MetricReport,
};
use crate::generator::{plan_generation, run_generation_loop_with, CandidateSets, GenContext};
use crate::providers::ChatParams;
use crate::qc::{plan_qc, run_qc, Checkpoint, DatasetBundle, QcProviders, ReportAction};
use crate::tokenize::tokenizer_by_name;
use crate::types::{Document, RankedList, Split, Task};

pub const QC_REPORT_FILE: &str = "qc_report.jsonl";
pub const QC_CHECKPOINT_FILE: &str = "qc_checkpoint.jsonl";
pub const SKIPPED_FILE: &str = "skipped.jsonl";

#[derive(Debug, Parser)]
#[command(
    name = "irbench",
    version,
    about = "Build and evaluate synthetic retrieval benchmarks"
)]
pub struct Cli {
    /// JSON pipeline config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Print what would run without calling any provider.
    #[arg(long, global = true)]
    pub dry_run: bool,
    #[arg(long, global = true, value_parser = parse_task)]
    pub task: Option<Task>,
    #[arg(long, global = true, value_enum)]
    pub provider: Option<ProviderKind>,
    /// Transcript directory for `record` and `replay` providers.
    #[arg(long, global = true)]
    pub transcript: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SplitArg {
    Dev,
    Test,
    All,
}

impl SplitArg {
    pub fn split(self) -> Option<Split> {
        match self {
            SplitArg::Dev => Some(Split::Dev),
            SplitArg::Test => Some(Split::Test),
            SplitArg::All => None,
        }
    }
}

fn parse_facet(s: &str) -> std::result::Result<Facet, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter (QA) or chunk (long documents) a raw corpus.
    Prepare {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate candidate queries, positives and hard negatives.
    Generate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        n_queries: Option<usize>,
    },
    /// Filter queries, correct labels, split and assemble the dataset.
    Qc {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        candidates: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Reuse judgments recorded by an interrupted run.
        #[arg(long)]
        resume: bool,
    },
    /// Lexical baseline.
    #[command(subcommand)]
    Bm25(Bm25Command),
    /// Score a run against a dataset.
    Eval(EvalArgs),
    /// Rerank the top of a first-stage run, then score it.
    RerankEval {
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        output: PathBuf,
    },
    /// Spearman agreement between two model rankings.
    Consistency(ConsistencyArgs),
    /// Label queries by type or style and summarize the distribution.
    Diversity {
        #[arg(long)]
        queries: PathBuf,
        #[arg(long, value_parser = parse_facet)]
        facet: Facet,
        /// Per-query labels as `query_id<TAB>label`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Weighted Jaccard similarity between corpora.
    Similarity {
        /// `name=path` pairs; repeat for each corpus.
        #[arg(long = "corpus", required = true, num_args = 1)]
        corpora: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Bm25Command {
    Index {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    Search {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 100)]
        k: usize,
        #[arg(long, default_value = "bm25")]
        tag: String,
    },
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitArg::All)]
    pub split: SplitArg,
    /// Per-query scores as `query_id,metric,value`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Rerank this many first-stage results before scoring.
    #[arg(long)]
    pub rerank_depth: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    /// Comma-separated 1-based ranks.
    #[arg(long, value_delimiter = ',', requires = "ranks_b", conflicts_with = "scores_a")]
    pub ranks_a: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub ranks_b: Option<Vec<usize>>,
    /// JSON object of model id to score.
    #[arg(long, requires = "scores_b")]
    pub scores_a: Option<PathBuf>,
    #[arg(long)]
    pub scores_b: Option<PathBuf>,
    /// Also compute a permutation p-value with this many shuffles.
    #[arg(long)]
    pub permutations: Option<usize>,
    /// JSON object of model id to query id to score; resampled against `--scores-a`.
    #[arg(long, requires = "scores_a")]
    pub per_query: Option<PathBuf>,
    #[arg(long, default_value_t = eval::DEFAULT_SAMPLE_SIZE)]
    pub resample: usize,
    #[arg(long, default_value_t = eval::DEFAULT_TRIALS)]
    pub trials: usize,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, |_| {})
}

/// Like [`run`], calling `setup` (for logging, say) once the arguments parse.
pub fn run_with<I, T>(args: I, setup: impl FnOnce(&Cli)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    setup(&cli);
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let overrides = Overrides {
        task: cli.task,
        seed: cli.seed,
        workers: cli.workers,
        provider: cli.provider,
        transcript: cli.transcript.clone(),
    };
    let cfg = PipelineConfig::load(cli.config.as_deref(), &overrides)?;
    eprintln!("effective config: {}", cfg.to_json());
    match &cli.command {
        Command::Prepare { input, output } => cmd_prepare(&cfg, input, output),
        Command::Generate {
            corpus,
            output,
            n_queries,
        } => cmd_generate(&cfg, corpus, output, *n_queries, cli.dry_run),
        Command::Qc {
            corpus,
            candidates,
            output,
            resume,
        } => cmd_qc(&cfg, corpus, candidates, output, *resume, cli.dry_run),
        Command::Bm25(b) => cmd_bm25(&cfg, b),
        Command::Eval(args) => cmd_eval(&cfg, args, None, cli.dry_run),
        Command::RerankEval { eval, output } => {
            let depth = eval.rerank_depth.unwrap_or(eval::DEFAULT_RERANK_DEPTH);
            cmd_eval(&cfg, eval, Some((depth, output.as_path())), cli.dry_run)
        }
        Command::Consistency(args) => cmd_consistency(&cfg, args),
        Command::Diversity { queries, facet, output } => {
            cmd_diversity(&cfg, queries, *facet, output.as_deref(), cli.dry_run)
        }
        Command::Similarity { corpora } => cmd_similarity(&cfg, corpora),
    }
}

fn write_jsonl<T: serde::Serialize>(items: &[T], path: &Path) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

pub fn cmd_prepare(cfg: &PipelineConfig, input: &Path, output: &Path) -> Result<()> {
    let raw = read_corpus(input)?;
    let tokenizer = cfg.tokenizer()?;
    let docs: Vec<Document> = match cfg.task {
        Task::Qa => filter_documents(raw.clone(), cfg.bounds, tokenizer.as_ref())?.collect(),
        Task::LongDoc => {
            let mut chunks = Vec::new();
            for d in &raw {
                chunks.extend(chunk_long_document(&d.id, &d.text, cfg.chunk, tokenizer.as_ref())?);
            }
            chunks
        }
    };
    if docs.is_empty() {
        return Err(Error::EmptyInput("no documents survived preparation".into()));
    }
    write_corpus(&docs, output)?;
    let stats = corpus_stats(&docs, tokenizer.as_ref());
    println!("input documents\t{}", raw.len());
    println!("output documents\t{}", docs.len());
    println!("stats\t{}", serde_json::to_string(&stats)?);
    Ok(())
}

pub fn cmd_generate(
    cfg: &PipelineConfig,
    corpus: &Path,
    output: &Path,
    n_queries: Option<usize>,
    dry_run: bool,
) -> Result<()> {
    let docs = read_corpus(corpus)?;
    let mut gen = cfg.generation.clone();
    if let Some(n) = n_queries {
        gen.n_queries = n;
    }
    gen.validate()?;
    if dry_run {
        let plan = plan_generation(&docs, &gen)?;
        let stdout = std::io::stdout();
        let mut out = stdout.lock();
        for p in &plan {
            writeln!(out, "{}", serde_json::to_string(p)?).map_err(|e| Error::io("writing plan", e))?;
        }
        let hard: usize = plan.iter().map(|p| p.hard_negative_count).sum();
        eprintln!("dry run: {} iterations, {hard} hard negatives requested", plan.len());
        return Ok(());
    }
    let providers = build_providers(&cfg.providers)?;
    let templates = cfg.templates()?;
    let tokenizer = cfg.tokenizer()?;
    let ctx = GenContext {
        chat: providers.chat.as_ref(),
        templates: &templates,
        tokenizer: tokenizer.as_ref(),
        params: ChatParams::GENERATION,
    };
    let out = run_generation_loop_with(&docs, &gen, &ctx)?;
    create_dir(output)?;
    out.candidates.write(output)?;
    write_jsonl(&out.skipped, &output.join(SKIPPED_FILE))?;
    println!("queries\t{}", out.candidates.queries.len());
    println!("positives\t{}", out.candidates.positives.len());
    println!("hard negatives\t{}", out.candidates.hard_negatives.len());
    println!("skipped iterations\t{}", out.skipped.len());
    Ok(())
}

pub fn cmd_qc(
    cfg: &PipelineConfig,
    corpus: &Path,
    candidates: &Path,
    output: &Path,
    resume: bool,
    dry_run: bool,
) -> Result<()> {
    let seed = read_corpus(corpus)?;
    let cands = CandidateSets::read(candidates)?;
    if dry_run {
        let rerankers = match cfg.providers.kind {
            ProviderKind::Simulated => config::SIMULATED_RERANKERS,
            _ => cfg.providers.rerankers.len(),
        };
        let plan = plan_qc(&seed, &cands, &cfg.qc, rerankers);
        println!("{}", serde_json::to_string(&plan)?);
        return Ok(());
    }
    let providers = build_providers(&cfg.providers)?;
    let templates = cfg.templates()?;
    create_dir(output)?;
    let ckpt_path = output.join(QC_CHECKPOINT_FILE);
    if !resume && ckpt_path.exists() {
        std::fs::remove_file(&ckpt_path).map_err(|e| Error::io(format!("removing {}", ckpt_path.display()), e))?;
    }
    let checkpoint = Checkpoint::open(&ckpt_path)?;
    if resume && !checkpoint.is_empty() {
        eprintln!("resuming with {} recorded results", checkpoint.len());
    }
    let qc_providers = QcProviders {
        chat: providers.chat.as_ref(),
        embedder: providers.embedder.as_ref(),
        rerankers: providers.reranker_refs(),
        templates: &templates,
    };
    let out = run_qc(&seed, &cands, &qc_providers, &cfg.qc, Some(&checkpoint))?;
    out.bundle.write(output)?;
    write_jsonl(&out.report, &output.join(QC_REPORT_FILE))?;
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for r in &out.report {
        *tally
            .entry(serde_json::to_value(r.action)?.as_str().unwrap_or_default().to_string())
            .or_default() += 1;
    }
    println!("queries kept\t{}", out.bundle.queries.len());
    println!("documents\t{}", out.bundle.corpus.len());
    println!("qrels\t{}", out.bundle.qrels.len());
    for (action, n) in tally {
        println!("{action}\t{n}");
    }
    let failed = out
        .report
        .iter()
        .filter(|r| matches!(r.action, ReportAction::QueryFailed))
        .count();
    if failed > 0 {
        eprintln!("{failed} queries failed during label correction; see {QC_REPORT_FILE}");
    }
    Ok(())
}

fn cmd_bm25(cfg: &PipelineConfig, cmd: &Bm25Command) -> Result<()> {
    match cmd {
        Bm25Command::Index { corpus, output } => {
            let docs = read_corpus(corpus)?;
            let tokenizer = cfg.tokenizer()?;
            let index = eval::bm25_build(&docs, tokenizer.as_ref())?;
            index.save(output)?;
            println!("documents\t{}", index.doc_count());
            println!("terms\t{}", index.postings.len());
            println!("avgdl\t{:.4}", index.avgdl);
            Ok(())
        }
        Bm25Command::Search {
            index,
            queries,
            output,
            k,
            tag,
        } => {
            let index = Bm25Index::load(index)?;
            let tokenizer = tokenizer_by_name(&index.tokenizer)?;
            let queries = read_query_texts(queries)?;
            let pool = eval::pool(cfg.workers)?;
            let runs: Vec<RankedList> = pool.install(|| {
                use rayon::prelude::*;
                queries
                    .par_iter()
                    .map(|(id, text)| index.search(id, text, tokenizer.as_ref(), *k))
                    .collect()
            });
            write_run(&runs, tag, output)?;
            let empty = runs.iter().filter(|r| r.is_empty()).count();
            println!("queries\t{}", runs.len());
            println!("empty results\t{empty}");
            Ok(())
        }
    }
}

fn print_report(report: &MetricReport, split: Option<Split>) -> Result<()> {
    let record = serde_json::json!({
        "metric": report.label(),
        "split": split.map_or("all".to_string(), |s| s.to_string()),
        "mean": report.mean,
        "queries": report.per_query.len(),
        "missing": report.missing.len(),
        "excluded": report.excluded.len(),
        "unknown_docs": report.unknown_docs,
    });
    println!("{record}");
    println!("{:<12}{:>10}{:>10}{:>10}", "metric", "mean", "queries", "missing");
    println!(
        "{:<12}{:>10.4}{:>10}{:>10}",
        report.label(),
        report.mean,
        report.per_query.len(),
        report.missing.len()
    );
    Ok(())
}

fn cmd_eval(cfg: &PipelineConfig, args: &EvalArgs, rerank: Option<(usize, &Path)>, dry_run: bool) -> Result<()> {
    let bundle = DatasetBundle::read(&args.bundle)?;
    let mut runs = read_run(&args.run)?;
    let rerank = rerank.or(args.rerank_depth.map(|d| (d, Path::new(""))));
    if let Some((depth, out_path)) = rerank {
        if dry_run {
            let calls = runs.iter().filter(|r| !r.is_empty()).count();
            println!("{}", serde_json::json!({"rerank_calls": calls, "depth": depth}));
            return Ok(());
        }
        let providers = build_providers(&cfg.providers)?;
        let reranker = providers
            .rerankers
            .first()
            .ok_or_else(|| Error::config("no reranker configured"))?;
        let queries: HashMap<&str, &str> = bundle
            .queries
            .iter()
            .map(|q| (q.id.as_str(), q.text.as_str()))
            .collect();
        let docs: HashMap<&str, &str> = bundle.corpus.iter().map(|d| (d.id.as_str(), d.text.as_str())).collect();
        let qt = |id: &str| queries.get(id).map(|s| s.to_string());
        let dt = |id: &str| docs.get(id).map(|s| s.to_string());
        let out = rerank_eval(&runs, &qt, &dt, reranker.as_ref(), depth, cfg.workers)?;
        if !out.failed.is_empty() {
            eprintln!(
                "reranking failed for {} queries; first-stage order kept",
                out.failed.len()
            );
        }
        runs = out.runs;
        if !out_path.as_os_str().is_empty() {
            write_run(&runs, &format!("rerank-{}", reranker.id()), out_path)?;
        }
    }
    let report = evaluate_run(&runs, &bundle, cfg.task, args.split.split());
    if let Some(csv) = &args.csv {
        report.write_csv(csv)?;
    }
    print_report(&report, args.split.split())
}

fn read_scores(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    Ok(serde_json::from_str(&text)?)
}

fn cmd_consistency(cfg: &PipelineConfig, args: &ConsistencyArgs) -> Result<()> {
    let (ranks_a, ranks_b, ids) = match (&args.ranks_a, &args.ranks_b, &args.scores_a, &args.scores_b) {
        (Some(a), Some(b), _, _) => (a.clone(), b.clone(), None),
        (_, _, Some(a), Some(b)) => {
            let report = consistency_analysis(&read_scores(a)?, &read_scores(b)?)?;
            (report.ranks_a, report.ranks_b, Some(report.model_ids))
        }
        _ => {
            return Err(Error::config(
                "give either --ranks-a/--ranks-b or --scores-a/--scores-b",
            ))
        }
    };
    let s = spearman(&ranks_a, &ranks_b)?;
    println!(
        "{}",
        serde_json::json!({"rho": s.rho, "p_value": s.p_value, "n": ranks_a.len()})
    );
    if let Some(ids) = &ids {
        println!("{:<32}{:>8}{:>8}", "model", "rank_a", "rank_b");
        for ((m, a), b) in ids.iter().zip(&ranks_a).zip(&ranks_b) {
            println!("{m:<32}{a:>8}{b:>8}");
        }
    }
    println!("spearman rho {:.4} (p = {:.1e})", s.rho, s.p_value);
    if let Some(shuffles) = args.permutations {
        let p = spearman_permutation(&ranks_a, &ranks_b, shuffles, cfg.seed)?;
        println!("permutation p = {:.1e} ({shuffles} shuffles)", p.p_value);
    }
    if let (Some(per_query), Some(reference)) = (&args.per_query, &args.scores_a) {
        let text =
            std::fs::read_to_string(per_query).map_err(|e| Error::io(format!("reading {}", per_query.display()), e))?;
        let table: BTreeMap<String, BTreeMap<String, f64>> = serde_json::from_str(&text)?;
        let r = robustness_resample(&table, &read_scores(reference)?, args.resample, args.trials, cfg.seed)?;
        for (i, t) in r.trials.iter().enumerate() {
            println!(
                "{}",
                serde_json::json!({"trial": i, "rho": t.rho, "p_value": t.p_value})
            );
        }
        println!(
            "resampled {} queries x {} trials: full rho {:.4}, mean rho {:.4}, std {:.4}",
            args.resample, args.trials, r.full.rho, r.mean_rho, r.std_rho
        );
    }
    Ok(())
}

fn cmd_diversity(
    cfg: &PipelineConfig,
    queries: &Path,
    facet: Facet,
    output: Option<&Path>,
    dry_run: bool,
) -> Result<()> {
    let queries = read_queries(queries)?;
    if dry_run {
        println!(
            "{}",
            serde_json::json!({"label_calls": queries.len(), "facet": facet.to_string()})
        );
        return Ok(());
    }
    let providers = build_providers(&cfg.providers)?;
    let templates = cfg.templates()?;
    let out = label_query_diversity(&queries, providers.chat.as_ref(), &templates, facet, cfg.workers)?;
    if let Some(path) = output {
        let mut text = String::new();
        for (q, l) in &out.labels {
            text.push_str(&format!("{q}\t{l}\n"));
        }
        std::fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    }
    println!("{:<14}{:>8}{:>10}", facet.to_string(), "count", "share");
    for (label, n, p) in out.distribution() {
        println!("{label:<14}{n:>8}{:>9.1}%", p * 100.0);
    }
    if !out.failed.is_empty() {
        eprintln!("{} queries could not be labeled and count as others", out.failed.len());
    }
    Ok(())
}

fn cmd_similarity(cfg: &PipelineConfig, specs: &[String]) -> Result<()> {
    let mut corpora = BTreeMap::new();
    for spec in specs {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| Error::config(format!("expected name=path, got `{spec}`")))?;
        corpora.insert(name.to_string(), read_corpus(path)?);
    }
    let tokenizer = cfg.tokenizer()?;
    let matrix = similarity_matrix(&corpora, tokenizer.as_ref())?;
    let names: Vec<&String> = corpora.keys().collect();
    print!("{:<16}", "");
    for n in &names {
        print!("{n:>16}");
    }
    println!();
    for a in &names {
        print!("{a:<16}");
        for b in &names {
            print!("{:>16.4}", matrix[&((*a).clone(), (*b).clone())]);
        }
        println!();
    }
    Ok(())
}
