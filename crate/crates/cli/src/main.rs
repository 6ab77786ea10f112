use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use queryclust::corpus::write_jsonl;
use queryclust::harness::{
    compare, evaluate_files, sweep, DatasetConfig, DatasetSource, Experiment, ExperimentConfig, Mode, SweepParam,
};
use queryclust::synth::{BlocksSpec, SyntheticSpec, TopicMixtureSpec};
use queryclust::wordlist::IdfBase;
use queryclust::{CorpusFormat, InvertedIndex, WordList};

#[derive(Parser)]
#[command(name = "queryclust", version, about = "Cluster documents with evolved OR-queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an inverted index artifact from a corpus.
    Index {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print or save the scored candidate word list.
    Wordlist {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 100)]
        size: usize,
        #[arg(long, default_value = "ten")]
        idf_base: IdfBase,
        /// CSV output; prints to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run seeded clustering experiments and write a report.
    Cluster {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Cluster count for fixed-k modes.
        #[arg(long)]
        k: Option<usize>,
        /// Record wall-clock timings (reports then differ between runs).
        #[arg(long)]
        timing: bool,
    },
    /// Run the configured esq mode and k-means++ on the same data.
    Compare {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Repeat an experiment for each value of one parameter.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// intersectThreshold, kPenalty, mutationProb, crossoverProb,
        /// generations, wordlistSize or knnK.
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Score an assignment file against a label file.
    Evaluate {
        /// CSV with docId and clusterIndex columns.
        #[arg(long)]
        assignments: PathBuf,
        /// CSV with docId and label columns.
        #[arg(long)]
        labels: PathBuf,
    },
    /// Write a generated labelled corpus as JSONL.
    Synth {
        #[arg(value_enum)]
        preset: Preset,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    EsqFixed,
    EsqDiscovered,
    Kmeans,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// 3 classes x 100 docs with disjoint 20-word vocabularies.
    Blocks,
    /// 3 newsgroup-like classes x 400 docs.
    Ng3,
    /// 5 newsgroup-like classes x 400 docs.
    Ng5,
    /// 4 newswire-like classes x 200 docs sharing a domain vocabulary.
    R4,
}

impl Preset {
    fn spec(self) -> SyntheticSpec {
        match self {
            Preset::Blocks => SyntheticSpec::Blocks(BlocksSpec::default()),
            Preset::Ng3 => SyntheticSpec::TopicMixture(TopicMixtureSpec::newsgroups_like(3)),
            Preset::Ng5 => SyntheticSpec::TopicMixture(TopicMixtureSpec::newsgroups_like(5)),
            Preset::R4 => SyntheticSpec::TopicMixture(TopicMixtureSpec::newswire_like()),
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// Corpus file or directory.
    corpus: Option<PathBuf>,
    #[arg(long, default_value = "jsonl")]
    format: CorpusFormat,
    /// Use a saved index artifact instead of a corpus.
    #[arg(long, conflicts_with = "corpus")]
    index: Option<PathBuf>,
    /// Use a generated corpus instead of a file.
    #[arg(long, value_enum, conflicts_with_all = ["corpus", "index"])]
    synthetic: Option<Preset>,
    #[arg(long, default_value_t = 0)]
    synthetic_seed: u64,
    /// Comma-separated labels to keep.
    #[arg(long, value_delimiter = ',')]
    categories: Option<Vec<String>>,
    /// Documents to sample from each category.
    #[arg(long)]
    per_category: Option<usize>,
    #[arg(long, default_value_t = 0)]
    sample_seed: u64,
    /// Drop mail headers (category-dirs only).
    #[arg(long)]
    strip_headers: bool,
    /// File with one stop word per line, replacing the built-in list.
    #[arg(long)]
    stop_words: Option<PathBuf>,
}

impl DataArgs {
    fn given(&self) -> bool {
        self.corpus.is_some() || self.index.is_some() || self.synthetic.is_some()
    }

    fn dataset(&self) -> Result<DatasetConfig> {
        let mut dataset = if let Some(path) = &self.corpus {
            let mut d = DatasetConfig::file(path, self.format);
            if let DatasetSource::File { options, .. } = &mut d.source {
                options.strip_headers = self.strip_headers;
            }
            d
        } else if let Some(path) = &self.index {
            let mut d = DatasetConfig::file(path, self.format);
            d.source = DatasetSource::Index { path: path.clone() };
            d
        } else if let Some(preset) = self.synthetic {
            DatasetConfig::synthetic(preset.spec(), self.synthetic_seed)
        } else {
            bail!("no data: pass a corpus path, --index or --synthetic");
        };
        dataset.categories = self.categories.clone();
        dataset.per_category = self.per_category;
        dataset.sample_seed = self.sample_seed;
        if let Some(path) = &self.stop_words {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            dataset.stop_words = Some(
                text.lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_owned)
                    .collect(),
            );
        }
        Ok(dataset)
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    runs: Option<usize>,
    /// Seed of the first run; run i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    k_penalty: Option<f64>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    idf_base: Option<IdfBase>,
    /// Directory for report.json, runs.csv and the other outputs.
    #[arg(long, default_value = "queryclust-out")]
    out_dir: PathBuf,
}

impl ExperimentArgs {
    fn config(&self, default_mode: Mode) -> Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => ExperimentConfig::new(self.data.dataset()?, default_mode),
        };
        if self.config.is_some() && self.data.given() {
            config.dataset = self.data.dataset()?;
        }
        if let Some(runs) = self.runs {
            config.runs = runs;
        }
        if let Some(seed) = self.seed {
            config.base_run_seed = seed;
        }
        if let Some(t) = self.threshold {
            config.ga.decode.intersect_threshold = t;
        }
        if let Some(p) = self.k_penalty {
            config.ga.k_penalty = p;
        }
        if let Some(g) = self.generations {
            config.ga.generations = g;
        }
        if let Some(b) = self.idf_base {
            config.idf_base = b;
        }
        Ok(config)
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cluster(exp: &ExperimentArgs, mode: Option<ModeArg>, k: Option<usize>, timing: bool) -> Result<()> {
    let mut config = exp.config(Mode::EsqDiscovered)?;
    if let Some(mode) = mode {
        config.mode = match (mode, k) {
            (ModeArg::EsqFixed, Some(k)) => Mode::EsqFixedK { k },
            (ModeArg::EsqFixed, None) => bail!("--mode esq-fixed needs --k"),
            (ModeArg::EsqDiscovered, _) => Mode::EsqDiscovered,
            (ModeArg::Kmeans, k) => Mode::Kmeanspp { k },
        };
    }
    config.record_timing |= timing;
    let experiment = Experiment::prepare(config)?;
    let outcomes = experiment.run_all()?;
    let report = experiment.report(&outcomes);

    let dir = &exp.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    report.write_json(&dir.join("report.json"))?;
    report.write_csv(&dir.join("runs.csv"))?;
    if report.config.mode.is_esq() {
        write(&dir.join("queries.txt"), &report.queries_text())?;
    }
    if let Some(first) = outcomes.first() {
        first
            .assignment
            .write_csv(&dir.join("assignments.csv"), &experiment.index, first.seeds.as_ref())?;
        if let Some(evolution) = &first.evolution {
            evolution.write_trace_csv(&dir.join("trace.csv"))?;
        }
    }
    println!("{}", report.summary_line());
    println!("wrote {}", dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Index { data, out } => {
            let corpus = data.dataset()?.load()?;
            let index = InvertedIndex::build(&corpus)?;
            index.save_json(&out)?;
            println!(
                "{} documents, {} terms, {} labels -> {}",
                index.doc_count(),
                index.vocabulary_size(),
                index.label_names().len(),
                out.display()
            );
        }
        Command::Wordlist {
            data,
            size,
            idf_base,
            out,
        } => {
            let index = InvertedIndex::build(&data.dataset()?.load()?)?;
            let list = WordList::build_with(&index, size, idf_base);
            match out {
                Some(path) => list.write_csv(&path)?,
                None => {
                    for (rank, e) in list.entries().iter().enumerate() {
                        println!("{rank}\t{}\t{:.4}", e.term, e.score);
                    }
                }
            }
        }
        Command::Cluster { exp, mode, k, timing } => cluster(&exp, mode, k, timing)?,
        Command::Compare { exp } => {
            let config = exp.config(Mode::EsqDiscovered)?;
            let report = compare(&config)?;
            fs::create_dir_all(&exp.out_dir)?;
            write(&exp.out_dir.join("compare.json"), &serde_json::to_string_pretty(&report)?)?;
            print!("{}", report.table());
        }
        Command::Sweep { exp, param, values } => {
            let config = exp.config(Mode::EsqDiscovered)?;
            let report = sweep(&config, param, &values)?;
            fs::create_dir_all(&exp.out_dir)?;
            write(&exp.out_dir.join("sweep.json"), &serde_json::to_string_pretty(&report)?)?;
            report.write_csv(&exp.out_dir.join("sweep.csv"))?;
            for p in &report.points {
                println!("{:?}={}  {}", param, p.value, p.report.summary_line());
            }
        }
        Command::Evaluate { assignments, labels } => {
            let scores = evaluate_files(&assignments, &labels)?;
            println!("{}", serde_json::to_string_pretty(&scores)?);
        }
        Command::Synth { preset, seed, out } => {
            let docs = preset.spec().raw_documents(seed)?;
            write_jsonl(&docs, &out)?;
            println!("{} documents -> {}", docs.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
