//! Seeded multi-run experiments, aggregation and report files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::ClusterAssignment;
use crate::baseline::{kmeans_pp, tfidf_matrix, FeatureMatrix, DEFAULT_MAX_FEATURES, DEFAULT_MAX_ITERS};
use crate::corpus::{load_corpus, sample_per_category, Corpus, CorpusFormat, LoadOptions, StopSet};
use crate::error::{Error, Result};
use crate::evolve::{evolve_run, seed_clusters, EvolutionResult, GaConfig};
use crate::expand::{knn_expand, DEFAULT_K};
use crate::index::InvertedIndex;
use crate::metrics::{evaluate, ValidationScores};
use crate::querygen::{KMode, QuerySet};
use crate::synth::SyntheticSpec;
use crate::wordlist::{IdfBase, WordList, DEFAULT_WORDLIST_SIZE};

pub const DEFAULT_RUNS: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetSource {
    File {
        path: PathBuf,
        format: CorpusFormat,
        #[serde(default)]
        options: LoadOptions,
    },
    /// A saved index artifact.
    Index { path: PathBuf },
    Synthetic {
        spec: SyntheticSpec,
        #[serde(default)]
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: DatasetSource,
    /// Keep only these labels, in this order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    /// Draw this many documents from every category.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_category: Option<usize>,
    #[serde(default)]
    pub sample_seed: u64,
    /// Replaces the built-in stop list when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_words: Option<Vec<String>>,
}

impl DatasetConfig {
    pub fn synthetic(spec: SyntheticSpec, seed: u64) -> Self {
        DatasetConfig {
            source: DatasetSource::Synthetic { spec, seed },
            categories: None,
            per_category: None,
            sample_seed: 0,
            stop_words: None,
        }
    }

    pub fn file(path: impl Into<PathBuf>, format: CorpusFormat) -> Self {
        DatasetConfig {
            source: DatasetSource::File {
                path: path.into(),
                format,
                options: LoadOptions::default(),
            },
            categories: None,
            per_category: None,
            sample_seed: 0,
            stop_words: None,
        }
    }

    pub fn stop_set(&self) -> StopSet {
        self.stop_words.as_ref().map_or_else(StopSet::default, StopSet::new)
    }

    /// Loads, filters, samples and tokenizes the dataset.
    pub fn load(&self) -> Result<Corpus> {
        let corpus = match &self.source {
            DatasetSource::File { path, format, options } => {
                let raw = load_corpus(path, *format, options)?;
                Corpus::from_raw(&raw, &self.stop_set())?
            }
            DatasetSource::Index { path } => InvertedIndex::load_json(path)?.to_corpus()?,
            DatasetSource::Synthetic { spec, seed } => spec.generate(*seed)?,
        };
        let corpus = match &self.categories {
            Some(cats) => corpus.restrict_to(cats)?,
            None => corpus,
        };
        match self.per_category {
            Some(n) => sample_per_category(&corpus, n, self.sample_seed),
            None => Ok(corpus),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Mode {
    EsqFixedK { k: usize },
    EsqDiscovered,
    /// `k` defaults to the number of labelled classes.
    Kmeanspp {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
    },
}

impl Mode {
    pub fn is_esq(&self) -> bool {
        !matches!(self, Mode::Kmeanspp { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub mode: Mode,
    #[serde(default)]
    pub ga: GaConfig,
    #[serde(default = "default_wordlist_size")]
    pub wordlist_size: usize,
    #[serde(default)]
    pub idf_base: IdfBase,
    #[serde(default = "default_knn_k")]
    pub knn_k: usize,
    #[serde(default = "default_max_features")]
    pub max_features: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub base_run_seed: u64,
    /// Wall-clock times make reports differ between otherwise identical
    /// runs, so they are only recorded on request.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_wordlist_size() -> usize {
    DEFAULT_WORDLIST_SIZE
}
fn default_knn_k() -> usize {
    DEFAULT_K
}
fn default_max_features() -> usize {
    DEFAULT_MAX_FEATURES
}
fn default_max_iters() -> usize {
    DEFAULT_MAX_ITERS
}
fn default_runs() -> usize {
    DEFAULT_RUNS
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetConfig, mode: Mode) -> Self {
        ExperimentConfig {
            dataset,
            mode,
            ga: GaConfig::default(),
            wordlist_size: DEFAULT_WORDLIST_SIZE,
            idf_base: IdfBase::default(),
            knn_k: DEFAULT_K,
            max_features: DEFAULT_MAX_FEATURES,
            max_iters: DEFAULT_MAX_ITERS,
            runs: DEFAULT_RUNS,
            base_run_seed: 0,
            record_timing: false,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ExperimentConfig = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be at least 1".into()));
        }
        if self.wordlist_size == 0 || self.knn_k == 0 || self.max_features == 0 {
            return Err(Error::InvalidConfig(
                "wordlist_size, knn_k and max_features must be positive".into(),
            ));
        }
        match self.mode {
            Mode::EsqFixedK { k: 0 } => Err(Error::InvalidConfig("k must be at least 1".into())),
            Mode::Kmeanspp { k: Some(0) } => Err(Error::InvalidConfig("k must be at least 1".into())),
            _ if self.mode.is_esq() => self.ga_for(0).validate(),
            _ => Ok(()),
        }
    }

    /// GA settings for one run, with the decode mode taken from `mode`.
    pub fn ga_for(&self, seed: u64) -> GaConfig {
        let mut ga = self.ga;
        ga.seed = seed;
        ga.decode.k_mode = match (self.mode, ga.decode.k_mode) {
            (Mode::EsqFixedK { k }, _) => KMode::Fixed { k },
            (_, KMode::Discovered { k_min, k_max }) => KMode::Discovered { k_min, k_max },
            _ => KMode::DISCOVERED,
        };
        ga
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.base_run_seed.wrapping_add(run as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Index and word list construction, shared by all runs.
    pub index_ms: f64,
    /// Search or k-means, expansion and scoring for this run.
    pub cluster_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    /// k declared by the best chromosome, or the k given to k-means.
    pub declared_k: usize,
    /// Clusters holding at least one document after expansion.
    pub cluster_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_set: Option<QuerySet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness: Option<f64>,
    /// Fraction of documents placed before expansion (1 for k-means).
    pub coverage: f64,
    /// Scores over the documents placed by the queries alone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre: Option<ValidationScores>,
    pub post: ValidationScores,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        if values.is_empty() {
            return Stat { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Stat { mean, std: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub v: Stat,
    pub h: Stat,
    pub c: Stat,
    pub ari: Stat,
    pub count_error: Stat,
    pub cluster_count: Stat,
    pub coverage: Stat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_v: Option<Stat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pre_ari: Option<Stat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_ms: Option<Stat>,
}

impl Aggregates {
    pub fn from_runs(runs: &[RunRecord]) -> Aggregates {
        let stat = |f: &dyn Fn(&RunRecord) -> f64| Stat::of(&runs.iter().map(f).collect::<Vec<_>>());
        let opt_stat = |f: &dyn Fn(&RunRecord) -> Option<f64>| {
            let vals: Option<Vec<f64>> = runs.iter().map(f).collect();
            vals.filter(|v| !v.is_empty()).map(|v| Stat::of(&v))
        };
        Aggregates {
            v: stat(&|r| r.post.v),
            h: stat(&|r| r.post.h),
            c: stat(&|r| r.post.c),
            ari: stat(&|r| r.post.ari),
            count_error: stat(&|r| r.post.count_error as f64),
            cluster_count: stat(&|r| r.cluster_count as f64),
            coverage: stat(&|r| r.coverage),
            pre_v: opt_stat(&|r| r.pre.map(|p| p.v)),
            pre_ari: opt_stat(&|r| r.pre.map(|p| p.ari)),
            total_ms: opt_stat(&|r| r.timing.map(|t| t.total_ms)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub documents: usize,
    pub vocabulary: usize,
    pub classes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub dataset: DatasetSummary,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub wordlist: Vec<String>,
    pub runs: Vec<RunRecord>,
    pub aggregate: Aggregates,
}

/// Everything one run produced, including the assignments behind its record.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub seeds: Option<ClusterAssignment>,
    pub assignment: ClusterAssignment,
    pub evolution: Option<EvolutionResult>,
}

/// A loaded dataset with the structures shared by every run.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub index: InvertedIndex,
    pub wordlist: WordList,
    features: Option<FeatureMatrix>,
    index_ms: f64,
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

impl Experiment {
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let corpus = config.dataset.load()?;
        Experiment::with_corpus(config, &corpus)
    }

    pub fn with_corpus(config: ExperimentConfig, corpus: &Corpus) -> Result<Self> {
        config.validate()?;
        let start = Instant::now();
        let index = InvertedIndex::build(corpus)?;
        if index.label_names().is_empty() {
            return Err(Error::Unlabeled);
        }
        let wordlist = if config.mode.is_esq() {
            WordList::build_with(&index, config.wordlist_size, config.idf_base)
        } else {
            WordList::from_terms(Vec::<String>::new())
        };
        let features = (!config.mode.is_esq()).then(|| tfidf_matrix(&index, config.max_features));
        Ok(Experiment {
            index_ms: millis(start),
            config,
            index,
            wordlist,
            features,
        })
    }

    pub fn class_count(&self) -> usize {
        self.index.label_names().len()
    }

    pub fn run(&self, run: usize) -> Result<RunOutcome> {
        let seed = self.config.run_seed(run);
        self.run_inner(run, seed).map_err(|e| Error::Run {
            run,
            seed,
            source: Box::new(e),
        })
    }

    fn run_inner(&self, run: usize, seed: u64) -> Result<RunOutcome> {
        let start = Instant::now();
        let labels = self.index.labels();
        let classes = self.class_count();
        let mut outcome = match self.config.mode {
            Mode::EsqFixedK { .. } | Mode::EsqDiscovered => {
                let evolution = evolve_run(&self.index, &self.wordlist, &self.config.ga_for(seed))?;
                let seeds = seed_clusters(&self.index, &evolution.best_query_set);
                let pre = if seeds.assigned_count() > 0 {
                    Some(evaluate(&seeds, labels, classes)?)
                } else {
                    None
                };
                let assignment = knn_expand(&self.index, &seeds, self.config.knn_k)?;
                RunOutcome {
                    record: RunRecord {
                        run,
                        seed,
                        declared_k: evolution.best_query_set.declared_k,
                        cluster_count: assignment.non_empty_cluster_count(),
                        query_set: Some(evolution.best_query_set.clone()),
                        fitness: Some(evolution.best_fitness),
                        coverage: seeds.coverage(),
                        pre,
                        post: evaluate(&assignment, labels, classes)?,
                        timing: None,
                    },
                    seeds: Some(seeds),
                    assignment,
                    evolution: Some(evolution),
                }
            }
            Mode::Kmeanspp { k } => {
                let k = k.unwrap_or(classes);
                let features = self.features.as_ref().expect("features built for k-means");
                let assignment = kmeans_pp(features, k, seed, self.config.max_iters)?;
                RunOutcome {
                    record: RunRecord {
                        run,
                        seed,
                        declared_k: k,
                        cluster_count: assignment.non_empty_cluster_count(),
                        query_set: None,
                        fitness: None,
                        coverage: 1.0,
                        pre: None,
                        post: evaluate(&assignment, labels, classes)?,
                        timing: None,
                    },
                    seeds: None,
                    assignment,
                    evolution: None,
                }
            }
        };
        if self.config.record_timing {
            let cluster_ms = millis(start);
            outcome.record.timing = Some(Timing {
                index_ms: self.index_ms,
                cluster_ms,
                total_ms: self.index_ms + cluster_ms,
            });
        }
        Ok(outcome)
    }

    /// Runs every seed. Runs execute concurrently unless timing is recorded.
    pub fn run_all(&self) -> Result<Vec<RunOutcome>> {
        let runs = 0..self.config.runs;
        if self.config.record_timing {
            runs.map(|r| self.run(r)).collect()
        } else {
            runs.into_par_iter().map(|r| self.run(r)).collect()
        }
    }

    pub fn report(&self, outcomes: &[RunOutcome]) -> Report {
        let runs: Vec<RunRecord> = outcomes.iter().map(|o| o.record.clone()).collect();
        Report {
            config: self.config.clone(),
            dataset: DatasetSummary {
                documents: self.index.doc_count(),
                vocabulary: self.index.vocabulary_size(),
                classes: self.index.label_names().to_vec(),
            },
            wordlist: self.wordlist.terms().map(str::to_owned).collect(),
            aggregate: Aggregates::from_runs(&runs),
            runs,
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    let experiment = Experiment::prepare(config.clone())?;
    let outcomes = experiment.run_all()?;
    Ok(experiment.report(&outcomes))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Report> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// One row per run followed by a `mean` row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "run",
            "seed",
            "declared_k",
            "cluster_count",
            "coverage",
            "pre_v",
            "pre_ari",
            "h",
            "c",
            "v",
            "ari",
            "count_error",
            "fitness",
            "total_ms",
        ])?;
        for r in &self.runs {
            w.write_record([
                r.run.to_string(),
                r.seed.to_string(),
                r.declared_k.to_string(),
                r.cluster_count.to_string(),
                r.coverage.to_string(),
                fmt_opt(r.pre.map(|p| p.v)),
                fmt_opt(r.pre.map(|p| p.ari)),
                r.post.h.to_string(),
                r.post.c.to_string(),
                r.post.v.to_string(),
                r.post.ari.to_string(),
                r.post.count_error.to_string(),
                fmt_opt(r.fitness),
                fmt_opt(r.timing.map(|t| t.total_ms)),
            ])?;
        }
        let a = &self.aggregate;
        let mean_k = Stat::of(&self.runs.iter().map(|r| r.declared_k as f64).collect::<Vec<_>>()).mean;
        let mean_fitness = self
            .runs
            .iter()
            .map(|r| r.fitness)
            .collect::<Option<Vec<f64>>>()
            .map(|f| Stat::of(&f).mean);
        w.write_record([
            "mean".to_owned(),
            String::new(),
            mean_k.to_string(),
            a.cluster_count.mean.to_string(),
            a.coverage.mean.to_string(),
            fmt_opt(a.pre_v.map(|s| s.mean)),
            fmt_opt(a.pre_ari.map(|s| s.mean)),
            a.h.mean.to_string(),
            a.c.mean.to_string(),
            a.v.mean.to_string(),
            a.ari.mean.to_string(),
            a.count_error.mean.to_string(),
            fmt_opt(mean_fitness),
            fmt_opt(a.total_ms.map(|s| s.mean)),
        ])?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// The query sets of all runs as readable text.
    pub fn queries_text(&self) -> String {
        let mut out = String::new();
        for r in &self.runs {
            if let Some(qs) = &r.query_set {
                let _ = writeln!(out, "# run {} seed {} k {}", r.run, r.seed, qs.declared_k);
                out.push_str(&qs.to_text());
            }
        }
        out
    }

    pub fn summary_line(&self) -> String {
        let a = &self.aggregate;
        let mut line = format!(
            "v {:.3} ± {:.3}  ari {:.3} ± {:.3}  count error {:.2}  coverage {:.3}",
            a.v.mean, a.v.std, a.ari.mean, a.ari.std, a.count_error.mean, a.coverage.mean
        );
        if let Some(pre) = a.pre_v {
            let _ = write!(line, "  pre-expansion v {:.3}", pre.mean);
        }
        line
    }
}

/// A parameter that `sweep` can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SweepParam {
    IntersectThreshold,
    KPenalty,
    MutationProb,
    CrossoverProb,
    Generations,
    WordlistSize,
    KnnK,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "intersectThreshold" | "intersect_threshold" => SweepParam::IntersectThreshold,
            "kPenalty" | "k_penalty" => SweepParam::KPenalty,
            "mutationProb" | "mutation_prob" => SweepParam::MutationProb,
            "crossoverProb" | "crossover_prob" => SweepParam::CrossoverProb,
            "generations" => SweepParam::Generations,
            "wordlistSize" | "wordlist_size" => SweepParam::WordlistSize,
            "knnK" | "knn_k" => SweepParam::KnnK,
            other => return Err(Error::InvalidConfig(format!("unknown sweep parameter `{other}`"))),
        })
    }
}

impl SweepParam {
    pub fn apply(self, config: &mut ExperimentConfig, value: f64) -> Result<()> {
        let whole = || {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidConfig(format!("{self:?} needs a whole number, got {value}")))
            }
        };
        match self {
            SweepParam::IntersectThreshold => config.ga.decode.intersect_threshold = value,
            SweepParam::KPenalty => config.ga.k_penalty = value,
            SweepParam::MutationProb => config.ga.mutation_prob = value,
            SweepParam::CrossoverProb => config.ga.crossover_prob = value,
            SweepParam::Generations => config.ga.generations = whole()?,
            SweepParam::WordlistSize => config.wordlist_size = whole()?,
            SweepParam::KnnK => config.knn_k = whole()?,
        }
        config.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub report: Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub param: SweepParam,
    pub points: Vec<SweepPoint>,
}

/// Runs the full experiment once per value of `param`. The dataset is
/// loaded once.
pub fn sweep(config: &ExperimentConfig, param: SweepParam, values: &[f64]) -> Result<SweepReport> {
    let corpus = config.dataset.load()?;
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        let mut cfg = config.clone();
        param.apply(&mut cfg, value)?;
        let experiment = Experiment::with_corpus(cfg, &corpus)?;
        let outcomes = experiment.run_all()?;
        points.push(SweepPoint {
            value,
            report: experiment.report(&outcomes),
        });
    }
    Ok(SweepReport { param, points })
}

impl SweepReport {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "param",
            "value",
            "mean_v",
            "std_v",
            "mean_h",
            "mean_c",
            "mean_ari",
            "mean_count_error",
            "mean_cluster_count",
            "mean_coverage",
        ])?;
        for p in &self.points {
            let a = &p.report.aggregate;
            w.write_record([
                format!("{:?}", self.param),
                p.value.to_string(),
                a.v.mean.to_string(),
                a.v.std.to_string(),
                a.h.mean.to_string(),
                a.c.mean.to_string(),
                a.ari.mean.to_string(),
                a.count_error.mean.to_string(),
                a.cluster_count.mean.to_string(),
                a.coverage.mean.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub esq: Report,
    pub kmeans: Report,
}

/// Runs `config` (an esq mode) and k-means++ with k equal to the number
/// of classes on the same data and seeds.
pub fn compare(config: &ExperimentConfig) -> Result<CompareReport> {
    if !config.mode.is_esq() {
        return Err(Error::InvalidConfig("compare needs an esq mode".into()));
    }
    let corpus = config.dataset.load()?;
    let esq = Experiment::with_corpus(config.clone(), &corpus)?;
    let esq_report = esq.report(&esq.run_all()?);
    let mut km_config = config.clone();
    km_config.mode = Mode::Kmeanspp { k: None };
    let km = Experiment::with_corpus(km_config, &corpus)?;
    let km_report = km.report(&km.run_all()?);
    Ok(CompareReport {
        esq: esq_report,
        kmeans: km_report,
    })
}

impl CompareReport {
    pub fn table(&self) -> String {
        let row = |name: &str, r: &Report| {
            let a = &r.aggregate;
            format!(
                "{name:<10} {:>7.3} {:>7.3} {:>7.3} {:>7.3} {:>7.2}\n",
                a.v.mean, a.v.std, a.ari.mean, a.ari.std, a.count_error.mean
            )
        };
        let mut out = format!(
            "{:<10} {:>7} {:>7} {:>7} {:>7} {:>7}\n",
            "method", "v", "v_std", "ari", "ari_std", "k_err"
        );
        out.push_str(&row("esq", &self.esq));
        out.push_str(&row("kmeans++", &self.kmeans));
        out
    }
}

/// Scores a `docId,clusterIndex` assignment file against a `docId,label`
/// file. Extra columns are ignored; documents missing from the assignment
/// file count as unassigned.
pub fn evaluate_files(assignments: &Path, labels: &Path) -> Result<ValidationScores> {
    let label_rows = read_pairs(labels, &["label"])?;
    let mut class_names: Vec<String> = Vec::new();
    let mut doc_ids = Vec::with_capacity(label_rows.len());
    let mut doc_labels = Vec::with_capacity(label_rows.len());
    for (id, label) in label_rows {
        let class = match class_names.iter().position(|c| *c == label) {
            Some(i) => i,
            None => {
                class_names.push(label);
                class_names.len() - 1
            }
        };
        doc_ids.push(id);
        doc_labels.push(Some(class));
    }
    let lookup: std::collections::HashMap<&str, usize> =
        doc_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();

    let mut cluster_of: Vec<Option<usize>> = vec![None; doc_ids.len()];
    for (id, cluster) in read_pairs(assignments, &["clusterIndex", "cluster"])? {
        let doc = *lookup.get(id.as_str()).ok_or_else(|| Error::MalformedRecord {
            locator: format!("{}: {id}", assignments.display()),
            message: "document has no label".into(),
        })?;
        if cluster.is_empty() {
            continue;
        }
        let c: usize = cluster.parse().map_err(|_| Error::MalformedRecord {
            locator: format!("{}: {id}", assignments.display()),
            message: format!("bad cluster index `{cluster}`"),
        })?;
        cluster_of[doc] = Some(c);
    }
    let cluster_count = cluster_of.iter().flatten().max().map_or(0, |m| m + 1);
    let assignment = ClusterAssignment::new(cluster_of, cluster_count)?;
    evaluate(&assignment, &doc_labels, class_names.len())
}

/// Reads `(docId, value)` pairs where the value column is the first of
/// `value_columns` present in the header.
fn read_pairs(path: &Path, value_columns: &[&str]) -> Result<Vec<(String, String)>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |names: &[&str]| headers.iter().position(|h| names.contains(&h));
    let missing = |what: &str| Error::MalformedRecord {
        locator: path.display().to_string(),
        message: format!("missing {what} column"),
    };
    let id_col = find(&["docId", "id"]).ok_or_else(|| missing("docId"))?;
    let value_col = find(value_columns).ok_or_else(|| missing(value_columns[0]))?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let get = |i: usize| record.get(i).unwrap_or_default().to_owned();
        out.push((get(id_col), get(value_col)));
    }
    Ok(out)
}
