use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use factcheck_cli::api::{self, AppState, ServerOptions};
use factcheck_cli::ArtifactArgs;
use factcheck_core::eval::{
    load_fever, run_pipeline_eval, run_retrieval_eval, sample_nei_evidence, synthetic_retrieval_set, tune_threshold,
    write_fever, QueryVariant,
};
use factcheck_core::pipeline::{LabelMode, PipelineConfig, VerdictLabel, CONFIG_ENV};
use factcheck_core::query::query_for_claim;
use factcheck_core::rerank::{rerank, CountMode};
use factcheck_core::retrieval::{load_corpus, write_corpus, Index, RetrievalModel};
use factcheck_core::stance::toy::toy_dataset;
use factcheck_core::stance::{load_training_data, train, FeatureConfig, StanceScorer, TrainConfig};
use factcheck_core::text::{analyze, extract_named_entities};

#[derive(Parser)]
#[command(name = "factcheck", version, about = "Claim verification: retrieval, stance detection and verdicts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect a search index.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Search an index with the query generated from a claim.
    Search {
        index_dir: PathBuf,
        claim: String,
        #[arg(long, default_value = "dfr_z")]
        model: RetrievalModel,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Re-rank by claim/title keyword overlap.
        #[arg(long)]
        rerank: bool,
    },
    /// Fact-check one claim.
    Check {
        claim: String,
        #[arg(long, env = CONFIG_ENV)]
        config: PathBuf,
        /// Print the full result as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Train or generate data for the stance model.
    #[command(subcommand)]
    Stance(StanceCommand),
    /// Evaluation reports.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Write the synthetic retrieval corpus and claims.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the HTTP API.
    Serve(ServeArgs),
}

#[derive(Subcommand)]
enum IndexCommand {
    /// Index a JSONL corpus into a directory.
    Build { corpus: PathBuf, dir: PathBuf },
    /// Print collection statistics.
    Stats { dir: PathBuf },
}

#[derive(Subcommand)]
enum StanceCommand {
    /// Train a model from JSONL (claim, document, stance) examples.
    Train {
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Hash buckets per bag-of-words block.
        #[arg(long)]
        buckets: Option<usize>,
    },
    /// Write the templated toy training set.
    ToyData {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        per_label: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct ArtifactFlags {
    /// Pipeline config file (TOML).
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[arg(long)]
    index_dir: Option<PathBuf>,
    /// Stance model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Source registry CSV.
    #[arg(long)]
    registry: Option<PathBuf>,
}

impl From<&ArtifactFlags> for ArtifactArgs {
    fn from(f: &ArtifactFlags) -> Self {
        ArtifactArgs {
            config: f.config.clone(),
            index_dir: f.index_dir.clone(),
            model: f.model.clone(),
            registry: f.registry.clone(),
        }
    }
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Recall@K per retrieval model and query variant.
    Retrieval {
        #[arg(long, required_unless_present = "index_dir")]
        corpus: Option<PathBuf>,
        #[arg(long)]
        index_dir: Option<PathBuf>,
        #[arg(long)]
        claims: PathBuf,
        /// Comma-separated model names, or `all`.
        #[arg(long, default_value = "all")]
        models: String,
        #[arg(long, value_delimiter = ',', default_value = "raw,query-gen,reranked")]
        variants: Vec<QueryVariant>,
        #[arg(long, value_delimiter = ',', default_value = "1,5,10")]
        ks: Vec<usize>,
        /// Give NEI claims this many random corpus documents as evidence.
        #[arg(long)]
        nei_evidence: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Verdict precision, recall and F1 on labelled claims.
    Pipeline {
        #[arg(long)]
        claims: PathBuf,
        #[command(flatten)]
        artifacts: ArtifactFlags,
        #[arg(long)]
        label_mode: Option<LabelMode>,
        /// NEI threshold; overrides the config.
        #[arg(long)]
        tau: Option<f64>,
        /// Tune the threshold on these claims before evaluating.
        #[arg(long)]
        dev: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2,2.5,3,4,5")]
        grid: Vec<f64>,
        /// Also write predictions and metrics as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[command(flatten)]
    artifacts: ArtifactFlags,
    /// Allowed CORS origin; repeatable, `*` for any.
    #[arg(long = "cors-origin")]
    cors_origins: Vec<String>,
    /// Serve a static UI bundle from this directory.
    #[arg(long)]
    static_dir: Option<PathBuf>,
    #[arg(long, default_value_t = api::DEFAULT_CACHE_SIZE)]
    cache_size: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Index(IndexCommand::Build { corpus, dir }) => {
            let docs = load_corpus(&corpus).with_context(|| format!("reading {}", corpus.display()))?;
            let index = Index::build(docs)?;
            index.save(&dir).with_context(|| format!("writing {}", dir.display()))?;
            print_stats(&index);
        }
        Command::Index(IndexCommand::Stats { dir }) => print_stats(&Index::load(&dir)?),
        Command::Search {
            index_dir,
            claim,
            model,
            k,
            rerank: do_rerank,
        } => search(&index_dir, &claim, &model, k, do_rerank)?,
        Command::Check { claim, config, json } => {
            let pipeline = ArtifactArgs {
                config: Some(config),
                ..ArtifactArgs::default()
            }
            .load()?;
            let result = pipeline.check_claim(&claim)?;
            if json {
                println!("{}", result.canonical_json());
            } else {
                print_check(&result);
            }
        }
        Command::Stance(StanceCommand::Train {
            data,
            out,
            seed,
            epochs,
            learning_rate,
            buckets,
        }) => {
            let dataset = load_training_data(&data).with_context(|| format!("reading {}", data.display()))?;
            let mut hyper = TrainConfig {
                seed,
                ..TrainConfig::default()
            };
            if let Some(e) = epochs {
                hyper.epochs = e;
            }
            if let Some(lr) = learning_rate {
                hyper.learning_rate = lr;
            }
            let mut features = FeatureConfig::default();
            if let Some(b) = buckets {
                features.buckets = b;
            }
            let report = train(&dataset, features, &hyper)?;
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            report.model.save(&out).with_context(|| format!("writing {}", out.display()))?;
            let correct = dataset
                .iter()
                .filter(|ex| report.model.score(&ex.claim, &ex.document).ok().map(|d| d.dominant()) == Some(ex.stance))
                .count();
            println!(
                "trained on {} examples; level-1 loss {:.4}, level-2 loss {:.4}, train accuracy {:.4}",
                dataset.len(),
                report.level1_losses.last().copied().unwrap_or(f64::NAN),
                report.level2_losses.last().copied().unwrap_or(f64::NAN),
                correct as f64 / dataset.len() as f64
            );
        }
        Command::Stance(StanceCommand::ToyData { out, per_label, seed }) => {
            let mut w = BufWriter::new(File::create(&out).with_context(|| format!("creating {}", out.display()))?);
            for ex in toy_dataset(per_label, seed) {
                writeln!(w, "{}", serde_json::to_string(&ex)?)?;
            }
            w.flush()?;
        }
        Command::Eval(cmd) => eval(cmd)?,
        Command::Synth { out, seed } => {
            std::fs::create_dir_all(&out)?;
            let set = synthetic_retrieval_set(seed);
            write_corpus(BufWriter::new(File::create(out.join("corpus.jsonl"))?), &set.documents)?;
            write_fever(BufWriter::new(File::create(out.join("claims.jsonl"))?), &set.claims)?;
            println!("{} documents, {} claims in {}", set.documents.len(), set.claims.len(), out.display());
        }
        Command::Serve(args) => serve(args)?,
    }
    Ok(())
}

fn print_stats(index: &Index) {
    let s = index.stats();
    println!(
        "documents {}  tokens {}  avg length {:.2}  vocabulary {}",
        s.doc_count,
        s.total_tokens,
        s.avg_doc_len,
        index.vocabulary_size()
    );
}

fn search(dir: &Path, claim: &str, model: &RetrievalModel, k: usize, do_rerank: bool) -> anyhow::Result<()> {
    if k == 0 {
        bail!("--k must be at least 1");
    }
    let index = Index::load(dir).with_context(|| format!("loading index {}", dir.display()))?;
    let tokens = analyze(claim);
    let query = query_for_claim(&tokens, &extract_named_entities(&tokens));
    if query.is_empty() {
        bail!("claim has no searchable terms");
    }
    let depth = if do_rerank { k.max(20) } else { k };
    let mut hits = index.search(&query.terms, model, depth)?;
    if do_rerank {
        let titles: HashMap<String, String> = hits
            .iter()
            .filter_map(|h| index.document(&h.doc_id).map(|d| (h.doc_id.clone(), d.title.clone())))
            .collect();
        hits = rerank(&tokens, hits, &titles, CountMode::Multiset);
    }
    hits.truncate(k);
    println!("query: {}", query.terms.join(" "));
    for (i, h) in hits.iter().enumerate() {
        let title = index.document(&h.doc_id).map_or("", |d| d.title.as_str());
        match h.f_rank {
            Some(f) => println!("{:>3}  {:<40} {:>10.4} {:>10.4}  {}", i + 1, h.doc_id, h.score_init, f, title),
            None => println!("{:>3}  {:<40} {:>10.4}  {}", i + 1, h.doc_id, h.score_init, title),
        }
    }
    Ok(())
}

fn print_check(result: &factcheck_core::pipeline::FactCheckResult) {
    let v = &result.verdict;
    println!("claim:   {}", result.claim);
    println!("query:   {}", result.query.terms.join(" "));
    println!(
        "verdict: {}  (agree {:.3}, disagree {:.3}, discuss {:.3}; top score {:.3} on {})",
        v.label, v.agree_score, v.disagree_score, v.discuss_score, v.top_score, v.basis_channel
    );
    for c in &result.channels {
        let head = match &c.error {
            Some(e) => format!("failed: {e}"),
            None => format!("{} documents, {} relaxations", c.documents.len(), c.relaxations),
        };
        println!("\n[{}] {head}", c.channel);
        if let Some(a) = c.aggregate {
            let f = a.flattened();
            println!("  aggregate agree {:.3} disagree {:.3} discuss {:.3} unrelated {:.3}", f[0], f[1], f[2], f[3]);
        }
        for d in &c.documents {
            println!("  {:>2}. {:<9} {:>8.3}  {}", d.rank, d.dominant.as_str(), d.score_init, d.url);
        }
    }
    for d in &result.diagnostics {
        println!("note: {d}");
    }
}

fn parse_models(s: &str) -> anyhow::Result<Vec<RetrievalModel>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(RetrievalModel::all_variants());
    }
    s.split(',')
        .map(|m| m.parse::<RetrievalModel>().map_err(Into::into))
        .collect()
}

fn eval(cmd: EvalCommand) -> anyhow::Result<()> {
    match cmd {
        EvalCommand::Retrieval {
            corpus,
            index_dir,
            claims,
            models,
            variants,
            ks,
            nei_evidence,
            seed,
            csv,
        } => {
            let index = match (index_dir, corpus) {
                (Some(dir), _) => Index::load(&dir)?,
                (None, Some(c)) => Index::build(load_corpus(&c)?)?,
                (None, None) => bail!("--corpus or --index-dir is required"),
            };
            let mut claims = load_fever(&claims)?;
            if let Some(n) = nei_evidence {
                let ids: Vec<String> = index.documents().iter().map(|d| d.doc_id.clone()).collect();
                let sampled: HashMap<String, Vec<String>> = sample_nei_evidence(&claims, &ids, n, seed).into_iter().collect();
                for c in &mut claims {
                    if let Some(ev) = sampled.get(&c.id) {
                        c.evidence = ev.clone();
                    }
                }
            }
            let table = run_retrieval_eval(&index, &claims, &parse_models(&models)?, &variants, &ks)?;
            println!("{} claims", table.claims);
            print!("{}", table.to_text());
            if let Some(path) = csv {
                std::fs::write(&path, table.to_csv()).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        EvalCommand::Pipeline {
            claims,
            artifacts,
            label_mode,
            tau,
            dev,
            grid,
            json,
        } => {
            let pipeline = ArtifactArgs::from(&artifacts).load()?;
            let mut config: PipelineConfig = pipeline.config.clone();
            if let Some(m) = label_mode {
                config.label_mode = m;
            }
            if let Some(t) = tau {
                config.nei_threshold = t;
            }
            if let Some(dev) = dev {
                let dev = load_fever(&dev)?;
                let tuned = tune_threshold(&dev, &pipeline, &config, &grid)?;
                println!("tuned NEI threshold {} (dev macro-F1 {:.4})", tuned.tau, tuned.f1_macro);
                for (t, f) in &tuned.sweep {
                    println!("  tau {t:<5} macro-F1 {f:.4}");
                }
                config.nei_threshold = tuned.tau;
            }
            let claims = load_fever(&claims)?;
            let report = run_pipeline_eval(&claims, &pipeline, &config)?;
            let mode = match report.label_mode {
                LabelMode::TwoLabel => "2lbl",
                LabelMode::ThreeLabel => "3lbl",
            };
            let dropped = if report.label_mode == LabelMode::TwoLabel {
                claims.iter().filter(|c| c.label == VerdictLabel::NEI).count()
            } else {
                0
            };
            println!(
                "{mode}, tau {}, {} claims{}",
                report.nei_threshold,
                report.predictions.len(),
                if dropped > 0 { format!(" ({dropped} NEI claims skipped)") } else { String::new() }
            );
            print!("{}", report.metrics.to_text());
            if let Some(path) = json {
                std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
            }
        }
    }
    Ok(())
}

fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let state = match ArtifactArgs::from(&args.artifacts).load() {
        Ok(p) => {
            log::info!("loaded {} documents", p.index().len());
            AppState::new(p, args.cache_size)
        }
        Err(e) => {
            log::error!("artifacts failed to load, serving 503: {e:#}");
            eprintln!("warning: artifacts failed to load ({e:#}); check requests will get 503");
            AppState::unavailable(format!("{e:#}"))
        }
    };
    let options = ServerOptions {
        cors_origins: args.cors_origins,
        static_dir: args.static_dir,
    };
    let app = api::router(Arc::new(state), &options);
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .with_context(|| format!("invalid address {}:{}", args.host, args.port))?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        eprintln!("listening on http://{}", listener.local_addr()?);
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
