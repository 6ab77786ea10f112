//! Island-model genetic search over query sets.
//!
//! Fitness is the number of documents matched by exactly one query
//! ("unique hits"). When the chromosome chooses k itself, fitness is
//! discounted by `1 - k_penalty * k`.

use std::cmp::Ordering;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assignment::ClusterAssignment;
use crate::docset::HitCounter;
use crate::error::{Error, Result};
use crate::index::InvertedIndex;
use crate::querygen::{Chromosome, DecodeConfig, Decoder, KMode, QuerySet, RankedQueries};
use crate::wordlist::WordList;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    pub subpopulations: usize,
    /// Individuals across all islands.
    pub population_total: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elitism: usize,
    pub tournament_size: usize,
    pub migration_interval: usize,
    pub migrants_per_exchange: usize,
    pub k_penalty: f64,
    pub seed: u64,
    pub decode: DecodeConfig,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            subpopulations: 4,
            population_total: 512,
            generations: 100,
            crossover_prob: 0.8,
            mutation_prob: 0.1,
            elitism: 2,
            tournament_size: 2,
            migration_interval: 30,
            migrants_per_exchange: 3,
            k_penalty: 0.02,
            seed: 0,
            decode: DecodeConfig::default(),
        }
    }
}

impl GaConfig {
    pub fn island_size(&self) -> usize {
        self.population_total / self.subpopulations.max(1)
    }

    pub fn validate(&self) -> Result<()> {
        self.decode.validate()?;
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.subpopulations == 0 || !self.population_total.is_multiple_of(self.subpopulations) {
            return bad(format!(
                "population {} is not divisible into {} islands",
                self.population_total, self.subpopulations
            ));
        }
        for (name, p) in [("crossover", self.crossover_prob), ("mutation", self.mutation_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} probability {p} outside [0, 1]"));
            }
        }
        let island = self.island_size();
        if island < 2 {
            return bad(format!("island size {island} is below 2"));
        }
        if self.elitism > island {
            return bad(format!("elitism {} exceeds island size {island}", self.elitism));
        }
        if self.subpopulations > 1 && self.migrants_per_exchange >= island {
            return bad(format!(
                "{} migrants would replace a whole island of {island}",
                self.migrants_per_exchange
            ));
        }
        if self.tournament_size == 0 {
            return bad("tournament size must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.k_penalty) {
            return bad(format!("k penalty {} outside [0, 1]", self.k_penalty));
        }
        Ok(())
    }
}

/// Documents matched by exactly one non-empty query.
pub fn unique_hits(index: &InvertedIndex, queries: &QuerySet) -> usize {
    let mut hits = HitCounter::new(index.doc_count());
    for q in queries.non_empty() {
        hits.add(&index.match_any(q.words.iter().map(String::as_str)));
    }
    hits.exactly_once().count()
}

/// Penalized fitness for a given unique-hit count and declared k.
pub fn penalized(unique_hits: usize, declared_k: usize, k_mode: &KMode, k_penalty: f64) -> f64 {
    match k_mode {
        KMode::Fixed { .. } => unique_hits as f64,
        KMode::Discovered { .. } => unique_hits as f64 * (1.0 - k_penalty * declared_k as f64),
    }
}

pub fn fitness(index: &InvertedIndex, queries: &QuerySet, config: &GaConfig) -> f64 {
    penalized(
        unique_hits(index, queries),
        queries.declared_k,
        &config.decode.k_mode,
        config.k_penalty,
    )
}

/// Documents matched by exactly one query, grouped by that query. Clusters are
/// numbered over the non-empty queries only, in slot order.
pub fn seed_clusters(index: &InvertedIndex, queries: &QuerySet) -> ClusterAssignment {
    let n = index.doc_count();
    let matches: Vec<_> = queries
        .non_empty()
        .map(|q| index.match_any(q.words.iter().map(String::as_str)))
        .collect();
    let mut hits = HitCounter::new(n);
    for m in &matches {
        hits.add(m);
    }
    let mut assignment = ClusterAssignment::unassigned(n, matches.len());
    for doc in hits.exactly_once().iter() {
        let cluster = matches
            .iter()
            .position(|m| m.contains(doc))
            .expect("unique hit belongs to one query");
        assignment.set(doc, cluster);
    }
    assignment
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionResult {
    pub best_chromosome: Chromosome,
    pub best_query_set: QuerySet,
    pub best_fitness: f64,
    /// `fitness_history[g][i]`: best fitness on island `i` after generation
    /// `g`; row 0 is the random initial population.
    pub fitness_history: Vec<Vec<f64>>,
}

impl EvolutionResult {
    /// `generation,island,bestFitness` rows.
    pub fn write_trace_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["generation", "island", "bestFitness"])?;
        for (g, row) in self.fitness_history.iter().enumerate() {
            for (i, f) in row.iter().enumerate() {
                writer.write_record([g.to_string(), i.to_string(), f.to_string()])?;
            }
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }
}

/// Evaluates chromosomes against a fixed index and word list.
struct Evaluator<'a> {
    decoder: Decoder<'a>,
    k_penalty: f64,
}

impl Evaluator<'_> {
    fn score_ranked(&self, ranked: &RankedQueries) -> f64 {
        let mut hits = HitCounter::new(self.decoder.index().doc_count());
        for q in ranked.queries.iter().filter(|q| !q.is_empty()) {
            hits.add(&self.decoder.match_set(q));
        }
        penalized(
            hits.exactly_once().count(),
            ranked.declared_k,
            &self.decoder.config().k_mode,
            self.k_penalty,
        )
    }

    fn evaluate(&self, chromosome: Chromosome) -> Individual {
        let fitness = self.score_ranked(&self.decoder.decode_ranks(&chromosome));
        Individual { chromosome, fitness }
    }
}

/// Gene ranges for a genome: optional k gene followed by word genes.
#[derive(Debug, Clone, Copy)]
struct Layout {
    k_range: Option<(u32, u32)>,
    word_genes: usize,
    list_len: u32,
}

impl Layout {
    fn new(decode: &DecodeConfig, list_len: usize) -> Self {
        Layout {
            k_range: match decode.k_mode {
                KMode::Fixed { .. } => None,
                KMode::Discovered { k_min, k_max } => Some((k_min as u32, k_max as u32)),
            },
            word_genes: decode.word_gene_count(),
            list_len: list_len as u32,
        }
    }

    fn len(&self) -> usize {
        self.word_genes + usize::from(self.k_range.is_some())
    }

    fn random_gene(&self, position: usize, rng: &mut impl Rng) -> u32 {
        match (self.k_range, position) {
            (Some((lo, hi)), 0) => rng.random_range(lo..=hi),
            _ => rng.random_range(0..self.list_len),
        }
    }

    fn random(&self, rng: &mut impl Rng) -> Chromosome {
        let genes: Vec<u32> = (0..self.len()).map(|p| self.random_gene(p, rng)).collect();
        self.unflatten(genes)
    }

    fn flat(&self, c: &Chromosome) -> Vec<u32> {
        c.k_gene.iter().copied().chain(c.word_genes.iter().copied()).collect()
    }

    fn unflatten(&self, mut genes: Vec<u32>) -> Chromosome {
        if self.k_range.is_some() {
            let k = genes.remove(0);
            Chromosome::discovered(k, genes)
        } else {
            Chromosome::fixed(genes)
        }
    }
}

fn by_fitness_desc(a: &Individual, b: &Individual) -> Ordering {
    b.fitness.partial_cmp(&a.fitness).unwrap_or(Ordering::Equal)
}

struct Island {
    rng: ChaCha8Rng,
    members: Vec<Individual>,
}

impl Island {
    fn best(&self) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, m) in self.members.iter().enumerate() {
            if m.fitness > best.1 {
                best = (i, m.fitness);
            }
        }
        best
    }

    /// Member indices ordered best first; equal fitness keeps index order.
    fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.members.len()).collect();
        order.sort_by(|&a, &b| by_fitness_desc(&self.members[a], &self.members[b]));
        order
    }

    fn tournament(&mut self, size: usize) -> usize {
        let n = self.members.len();
        let mut winner = self.rng.random_range(0..n);
        for _ in 1..size {
            let challenger = self.rng.random_range(0..n);
            if self.members[challenger].fitness > self.members[winner].fitness {
                winner = challenger;
            }
        }
        winner
    }

    fn next_generation(&mut self, config: &GaConfig, layout: &Layout, eval: &Evaluator<'_>) {
        let size = self.members.len();
        let mut next: Vec<Individual> = self
            .ranking()
            .into_iter()
            .take(config.elitism)
            .map(|i| self.members[i].clone())
            .collect();
        let mut offspring = Vec::with_capacity(size - next.len());
        while next.len() + offspring.len() < size {
            let a = self.tournament(config.tournament_size);
            let b = self.tournament(config.tournament_size);
            let mut first = layout.flat(&self.members[a].chromosome);
            let mut second = layout.flat(&self.members[b].chromosome);
            if first.len() > 1 && self.rng.random_bool(config.crossover_prob) {
                let cut = self.rng.random_range(1..first.len());
                first[cut..].swap_with_slice(&mut second[cut..]);
            }
            for child in [&mut first, &mut second] {
                for (pos, gene) in child.iter_mut().enumerate() {
                    if self.rng.random_bool(config.mutation_prob) {
                        *gene = layout.random_gene(pos, &mut self.rng);
                    }
                }
            }
            offspring.push(layout.unflatten(first));
            if next.len() + offspring.len() < size {
                offspring.push(layout.unflatten(second));
            }
        }
        next.extend(offspring.into_iter().map(|c| eval.evaluate(c)));
        self.members = next;
    }
}

fn island_seed(run_seed: u64, island: usize) -> u64 {
    // splitmix64 of (seed, island) so neighbouring seeds give unrelated streams
    let mut z = run_seed ^ (island as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs the island-model search and returns the best query set found.
pub fn evolve_run(index: &InvertedIndex, wordlist: &WordList, config: &GaConfig) -> Result<EvolutionResult> {
    config.validate()?;
    if wordlist.is_empty() {
        return Err(Error::InvalidConfig("word list is empty".into()));
    }
    let eval = Evaluator {
        decoder: Decoder::new(index, wordlist, config.decode),
        k_penalty: config.k_penalty,
    };
    let layout = Layout::new(&config.decode, wordlist.len());
    let island_size = config.island_size();

    let mut islands: Vec<Island> = (0..config.subpopulations)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(island_seed(config.seed, i));
            let members = (0..island_size)
                .map(|_| eval.evaluate(layout.random(&mut rng)))
                .collect();
            Island { rng, members }
        })
        .collect();

    let mut history = Vec::with_capacity(config.generations + 1);
    history.push(islands.iter().map(|isl| isl.best().1).collect::<Vec<_>>());

    for generation in 1..=config.generations {
        islands
            .par_iter_mut()
            .for_each(|island| island.next_generation(config, &layout, &eval));

        if config.subpopulations > 1
            && config.migration_interval > 0
            && generation % config.migration_interval == 0
        {
            migrate(&mut islands, config.migrants_per_exchange);
        }
        history.push(islands.iter().map(|isl| isl.best().1).collect());
    }

    let (island, member, best_fitness) = islands
        .iter()
        .enumerate()
        .map(|(i, isl)| {
            let (m, f) = isl.best();
            (i, m, f)
        })
        .fold((0, 0, f64::NEG_INFINITY), |acc, cur| if cur.2 > acc.2 { cur } else { acc });
    let best_chromosome = islands[island].members[member].chromosome.clone();
    let best_query_set = eval.decoder.decode(&best_chromosome);
    Ok(EvolutionResult {
        best_chromosome,
        best_query_set,
        best_fitness,
        fitness_history: history,
    })
}

/// Ring migration: copies of each island's best replace the next island's worst.
fn migrate(islands: &mut [Island], count: usize) {
    let outgoing: Vec<Vec<Individual>> = islands
        .iter()
        .map(|isl| {
            isl.ranking()
                .into_iter()
                .take(count)
                .map(|i| isl.members[i].clone())
                .collect()
        })
        .collect();
    let n = islands.len();
    for (source, migrants) in outgoing.into_iter().enumerate() {
        let target = &mut islands[(source + 1) % n];
        let worst: Vec<usize> = target.ranking().into_iter().rev().take(migrants.len()).collect();
        for (slot, migrant) in worst.into_iter().zip(migrants) {
            target.members[slot] = migrant;
        }
    }
}
