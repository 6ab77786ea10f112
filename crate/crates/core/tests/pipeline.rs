use queryclust::corpus::{load_corpus, write_jsonl};
use queryclust::evolve::{evolve_run, seed_clusters, unique_hits};
use queryclust::expand::knn_expand;
use queryclust::harness::{DatasetConfig, Experiment, ExperimentConfig, Mode};
use queryclust::metrics::evaluate;
use queryclust::synth::{BlocksSpec, SyntheticSpec};
use queryclust::{Corpus, CorpusFormat, GaConfig, InvertedIndex, LoadOptions, StopSet, WordList};

fn blocks() -> SyntheticSpec {
    SyntheticSpec::Blocks(BlocksSpec::default())
}

#[test]
fn stages_compose_by_hand() {
    let corpus = blocks().generate(4).unwrap();
    let index = InvertedIndex::build(&corpus).unwrap();
    let wordlist = WordList::build(&index, 100);
    assert_eq!(wordlist.len(), index.vocabulary_size());

    let result = evolve_run(&index, &wordlist, &GaConfig { seed: 4, ..GaConfig::default() }).unwrap();
    let seeds = seed_clusters(&index, &result.best_query_set);
    assert_eq!(seeds.assigned_count(), unique_hits(&index, &result.best_query_set));

    let full = knn_expand(&index, &seeds, 10).unwrap();
    assert!(full.is_total());
    let scores = evaluate(&full, index.labels(), 3).unwrap();
    assert_eq!(scores.v, 1.0);
    assert_eq!(scores.count_error, 0);
}

#[test]
fn jsonl_and_index_artifacts_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let raw = blocks().raw_documents(2).unwrap();
    let jsonl = dir.path().join("docs.jsonl");
    write_jsonl(&raw, &jsonl).unwrap();
    let loaded = load_corpus(&jsonl, CorpusFormat::Jsonl, &LoadOptions::default()).unwrap();
    assert_eq!(loaded, raw);

    let corpus = Corpus::from_raw(&loaded, &StopSet::default()).unwrap();
    let index = InvertedIndex::build(&corpus).unwrap();
    let artifact = dir.path().join("index.json");
    index.save_json(&artifact).unwrap();
    let back = InvertedIndex::load_json(&artifact).unwrap();
    assert_eq!(WordList::build(&back, 100), WordList::build(&index, 100));
    assert_eq!(back.labels(), index.labels());
}

#[test]
fn file_and_generated_sources_agree() {
    let dir = tempfile::tempdir().unwrap();
    let jsonl = dir.path().join("docs.jsonl");
    write_jsonl(&blocks().raw_documents(9).unwrap(), &jsonl).unwrap();

    let mut from_file = ExperimentConfig::new(DatasetConfig::file(&jsonl, CorpusFormat::Jsonl), Mode::EsqDiscovered);
    from_file.runs = 2;
    let mut generated = from_file.clone();
    generated.dataset = DatasetConfig::synthetic(blocks(), 9);

    let a = Experiment::prepare(from_file).unwrap();
    let b = Experiment::prepare(generated).unwrap();
    let (ra, rb) = (a.report(&a.run_all().unwrap()), b.report(&b.run_all().unwrap()));
    assert_eq!(ra.runs, rb.runs);
}
