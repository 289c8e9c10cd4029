//! `sketchsearch`: build indexes, classify doodles, search, and evaluate.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sketchsearch::classifier::{
    read_weights, NeuralModel, NeuralRecognizer, Recognizer, StrokeCountReport, TemplateLibrary,
    TemplateRecognizer,
};
use sketchsearch::corpus::{ingest, load_index, save_index, to_hierarchy_json, CategoryMapping, CorpusIndex};
use sketchsearch::doodle::{self, write_records};
use sketchsearch::eval::eval_topk;
use sketchsearch::query::parse_snapshots;
use sketchsearch::search::{MetricWeights, SearchEngine};
use sketchsearch::shapes::{self, LIBRARY_PER_CATEGORY, LIBRARY_SEED};
use sketchsearch::synth::{self, QueryJitter};
use sketchsearch::category::CATEGORY_COUNT;
use sketchsearch::Category;

type Failure = Box<dyn std::error::Error>;

#[derive(Debug, Parser)]
#[command(name = "sketchsearch", version, about = "Sketch-driven search over mobile UI screens")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build or inspect a corpus index.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Print the top three categories for each doodle in a file.
    Classify(ClassifyArgs),
    /// Rank screens for each session snapshot in a file.
    Search(SearchArgs),
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Generate synthetic corpora and sessions.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Write the built-in template library as doodle records and manifest.
    Templates {
        /// Output directory.
        dir: PathBuf,
    },
    /// Time search on a large synthetic index and per-stroke classification.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
enum IndexCommand {
    Build {
        corpus_dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Category mapping JSON; the built-in mapping when omitted.
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
    Info { index: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Backend {
    Template,
    Neural,
}

#[derive(Debug, Args)]
struct RecognizerArgs {
    #[arg(long, value_enum, default_value_t = Backend::Template)]
    recognizer: Backend,
    /// Weights file for the neural recognizer.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Use randomly initialised neural weights with this seed instead of a
    /// weights file (for timing only).
    #[arg(long, conflicts_with = "model")]
    random_weights: Option<u64>,
    /// Template doodles replacing the built-in library (needs --manifest).
    #[arg(long, requires = "manifest")]
    templates: Option<PathBuf>,
    #[arg(long, requires = "templates")]
    manifest: Option<PathBuf>,
}

impl RecognizerArgs {
    fn build(&self) -> Result<Box<dyn Recognizer>, Failure> {
        Ok(match self.recognizer {
            Backend::Template => match (&self.templates, &self.manifest) {
                (Some(t), Some(m)) => Box::new(TemplateRecognizer::new(TemplateLibrary::load(t, m)?)),
                _ => Box::new(TemplateRecognizer::shipped()),
            },
            Backend::Neural => {
                let model = match (&self.model, self.random_weights) {
                    (Some(path), _) => read_weights(path)?,
                    (None, Some(seed)) => NeuralModel::standard_random(seed),
                    (None, None) => return Err("--model is required with --recognizer neural".into()),
                };
                Box::new(NeuralRecognizer::new(model))
            }
        })
    }
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    sketch_file: PathBuf,
    #[command(flatten)]
    recognizer: RecognizerArgs,
}

#[derive(Debug, Args)]
struct WeightArgs {
    #[arg(long, default_value_t = 0.7)]
    position_weight: f64,
    #[arg(long, default_value_t = 0.3)]
    shape_weight: f64,
}

impl WeightArgs {
    fn engine(&self) -> Result<SearchEngine, Failure> {
        Ok(SearchEngine::new(MetricWeights::new(self.position_weight, self.shape_weight)?))
    }
}

#[derive(Debug, Args)]
struct SearchArgs {
    index: PathBuf,
    sessions_file: PathBuf,
    /// Results to print per session.
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[command(flatten)]
    weights: WeightArgs,
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Top-k retrieval accuracy of session snapshots against an index.
    Topk {
        sessions_file: PathBuf,
        index: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,3,10")]
        k: Vec<usize>,
        /// Write the accuracy table here as tab-separated text.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write per-session ranks here as tab-separated text.
        #[arg(long)]
        ranks: Option<PathBuf>,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Mean true-class confidence by category and stroke count.
    Strokes {
        labeled_sketches: PathBuf,
        /// Write the table here as tab-separated text.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        recognizer: RecognizerArgs,
    },
    /// Top-1 accuracy on generated held-out doodles, or on a labeled file.
    Classifier {
        /// Labeled doodle records; generated held-out doodles when omitted.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        per_category: usize,
        #[arg(long, default_value_t = 0.03)]
        jitter: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        recognizer: RecognizerArgs,
    },
}

#[derive(Debug, Subcommand)]
enum SynthCommand {
    /// Write synthetic screens as hierarchy files.
    Corpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 1000)]
        screens: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Write jittered session snapshots targeting screens of a synthetic corpus.
    Sessions {
        /// Same values as given to `synth corpus`.
        #[arg(long, default_value_t = 1000)]
        screens: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        queries: usize,
        #[arg(long, default_value_t = 2)]
        query_seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 58_000)]
    screens: usize,
    #[arg(long, default_value_t = 8)]
    elements: usize,
    #[arg(long, default_value_t = 10)]
    queries: usize,
    #[command(flatten)]
    recognizer: RecognizerArgs,
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| format!("{}: {e}", path.display()).into())
}

fn index_build(corpus_dir: &Path, output: &Path, mapping: Option<&Path>) -> Result<(), Failure> {
    let mapping = match mapping {
        Some(p) => CategoryMapping::load(p)?,
        None => CategoryMapping::default(),
    };
    let index = ingest(corpus_dir, &mapping)?;
    save_index(&index, output)?;
    print_info(&index);
    Ok(())
}

fn print_info(index: &CorpusIndex) {
    let info = index.info();
    println!("screens\t{}", info.screens);
    println!("elements\t{}", info.elements);
    println!("invisible_elements\t{}", info.invisible_elements);
    println!("unmapped_elements\t{}", info.unmapped_elements);
    println!("skipped_files\t{}", info.skipped_files);
    println!("unmapped_labels\t{}", info.unmapped_labels.join(","));
}

fn classify(args: &ClassifyArgs) -> Result<(), Failure> {
    let records = doodle::read_file(&args.sketch_file)?;
    if records.is_empty() {
        return Err(format!("{}: no doodle records", args.sketch_file.display()).into());
    }
    let recognizer = args.recognizer.build()?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "record\tlabel\tfirst\tp1\tsecond\tp2\tthird\tp3")?;
    for (i, r) in records.iter().enumerate() {
        let p = recognizer.classify(&r.sketch)?;
        write!(out, "{i}\t{}", r.label.as_deref().unwrap_or("-"))?;
        for e in &p.entries {
            write!(out, "\t{}\t{:.4}", e.category, e.confidence)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn search(args: &SearchArgs) -> Result<(), Failure> {
    let index = load_index(&args.index)?;
    let sessions = parse_snapshots(&std::fs::read_to_string(&args.sessions_file)?)?;
    let engine = args.weights.engine()?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "session\trank\tscreen\tscore")?;
    for (i, s) in sessions.iter().enumerate() {
        let query = s.query().map_err(|e| format!("session {i}: {e}"))?;
        for (r, hit) in engine.top(&query, &index, args.top).iter().enumerate() {
            let id = &index.screens()[hit.screen as usize].id;
            writeln!(out, "{i}\t{}\t{id}\t{:.6}", r + 1, hit.score)?;
        }
    }
    Ok(())
}

fn labeled(path: &Path) -> Result<Vec<(Category, sketchsearch::stroke::StrokeSequence)>, Failure> {
    let records = doodle::read_file(path)?;
    if records.is_empty() {
        return Err(format!("{}: no doodle records", path.display()).into());
    }
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let label = r.label.ok_or_else(|| format!("record {i} has no label"))?;
            let c: Category = label.parse().map_err(|e| format!("record {i}: {e}"))?;
            Ok((c, r.sketch))
        })
        .collect()
}

fn eval(cmd: &EvalCommand) -> Result<(), Failure> {
    match cmd {
        EvalCommand::Topk {
            sessions_file,
            index,
            k,
            out,
            ranks,
            weights,
        } => {
            let index = load_index(index)?;
            let sessions = parse_snapshots(&std::fs::read_to_string(sessions_file)?)?;
            let report = eval_topk(&sessions, &index, &weights.engine()?, k)?;
            for missing in report.missing_targets() {
                eprintln!("warning: target screen `{missing}` is not in the index; counted as a miss");
            }
            print!("{}", report.to_tsv());
            if let Some(path) = out {
                create(path)?.write_all(report.to_tsv().as_bytes())?;
            }
            if let Some(path) = ranks {
                create(path)?.write_all(report.ranks_tsv().as_bytes())?;
            }
        }
        EvalCommand::Strokes {
            labeled_sketches,
            out,
            recognizer,
        } => {
            let data = labeled(labeled_sketches)?;
            let recognizer = recognizer.build()?;
            let report = StrokeCountReport::evaluate(data.iter().map(|(c, s)| (*c, s)), recognizer.as_ref())?;
            print!("{}", report.render());
            if let Some(path) = out {
                create(path)?.write_all(report.to_tsv().as_bytes())?;
            }
        }
        EvalCommand::Classifier {
            dataset,
            per_category,
            jitter,
            seed,
            recognizer,
        } => {
            let data = match dataset {
                Some(p) => labeled(p)?,
                None => shapes::held_out(*per_category, *jitter, *seed),
            };
            let recognizer = recognizer.build()?;
            let mut correct = [0usize; CATEGORY_COUNT];
            let mut total = [0usize; CATEGORY_COUNT];
            for (c, s) in &data {
                total[c.index()] += 1;
                if recognizer.classify(s)?.best() == *c {
                    correct[c.index()] += 1;
                }
            }
            println!("category\tcorrect\ttotal\taccuracy");
            for c in Category::ALL {
                let (k, n) = (correct[c.index()], total[c.index()]);
                if n > 0 {
                    println!("{c}\t{k}\t{n}\t{:.4}", k as f64 / n as f64);
                }
            }
            let (k, n): (usize, usize) = (correct.iter().sum(), total.iter().sum());
            println!("all\t{k}\t{n}\t{:.4}", k as f64 / n as f64);
        }
    }
    Ok(())
}

fn synth_cmd(cmd: &SynthCommand) -> Result<(), Failure> {
    match cmd {
        SynthCommand::Corpus { dir, screens, seed } => {
            std::fs::create_dir_all(dir)?;
            for doc in synth::corpus(*screens, *seed) {
                let path = dir.join(format!("{}.json", doc.id));
                std::fs::write(&path, to_hierarchy_json(&doc, 1440.0, 2560.0) + "\n")?;
            }
            println!("wrote {screens} screens to {}", dir.display());
        }
        SynthCommand::Sessions {
            screens,
            seed,
            queries,
            query_seed,
            output,
        } => {
            let docs = synth::corpus(*screens, *seed);
            let mapping = CategoryMapping::default();
            let sessions = synth::queries(&docs, &mapping, &QueryJitter::default(), *queries, *query_seed);
            let mut out = create(output)?;
            for s in &sessions {
                writeln!(out, "{}", serde_json::to_string(s)?)?;
            }
            println!("wrote {} sessions to {}", sessions.len(), output.display());
        }
    }
    Ok(())
}

fn templates(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    let library = shapes::build_library(LIBRARY_PER_CATEGORY, LIBRARY_SEED);
    let (_, manifest) = library.to_records();
    let records = shapes::library_records(LIBRARY_PER_CATEGORY, LIBRARY_SEED);
    write_records(create(&dir.join("templates.ndjson"))?, &records)?;
    std::fs::write(
        dir.join("templates.manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    println!("wrote {} templates to {}", records.len(), dir.display());
    Ok(())
}

fn summarize(label: &str, mut times: Vec<Duration>) {
    times.sort();
    let ms = |d: Duration| d.as_secs_f64() * 1000.0;
    println!(
        "{label}\tn={}\tmedian_ms={:.1}\tmax_ms={:.1}",
        times.len(),
        ms(times[times.len() / 2]),
        ms(times[times.len() - 1])
    );
}

fn bench(args: &BenchArgs) -> Result<(), Failure> {
    if args.queries == 0 || args.elements == 0 {
        return Err("--queries and --elements must be positive".into());
    }
    let mapping = CategoryMapping::default();
    let started = Instant::now();
    let docs = synth::corpus(args.screens, 58);
    let jitter = QueryJitter {
        min_elements: args.elements,
        max_elements: args.elements,
        ..QueryJitter::default()
    };
    let sessions = synth::queries(&docs, &mapping, &jitter, args.queries, 59);
    let index = CorpusIndex::build(docs, &mapping)?;
    println!("index\tscreens={}\tbuild_ms={:.0}", index.len(), started.elapsed().as_secs_f64() * 1000.0);

    let engine = SearchEngine::default();
    let mut times = Vec::new();
    for s in &sessions {
        let q = s.query()?;
        let t = Instant::now();
        let page = engine.search(&q, &index, 0);
        times.push(t.elapsed());
        std::hint::black_box(page);
    }
    summarize("search", times);

    let recognizer = args.recognizer.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let mut times = Vec::new();
    for c in Category::ALL {
        let sketch = shapes::split_strokes(&shapes::generate(c, &mut rng), 4, &mut rng);
        for n in 1..=sketch.len() {
            let prefix = sketch.prefix(n);
            let t = Instant::now();
            std::hint::black_box(recognizer.classify(&prefix)?);
            times.push(t.elapsed());
        }
    }
    summarize("classify_stroke", times);
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Index(IndexCommand::Build {
            corpus_dir,
            output,
            mapping,
        }) => index_build(corpus_dir, output, mapping.as_deref()),
        Command::Index(IndexCommand::Info { index }) => {
            print_info(&load_index(index)?);
            Ok(())
        }
        Command::Classify(args) => classify(args),
        Command::Search(args) => search(args),
        Command::Eval(cmd) => eval(cmd),
        Command::Synth(cmd) => synth_cmd(cmd),
        Command::Templates { dir } => templates(dir),
        Command::Bench(args) => bench(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
