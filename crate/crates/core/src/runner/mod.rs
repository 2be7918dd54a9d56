//! Pipelines behind the command-line interface.
//!
//! Every command takes a [`RunConfig`] and writes fixed-name files under the
//! configured output directory: `generated.jsonl`, `predictions.jsonl`,
//! `eval.json` and `eval.txt`. `eval.json` holds one section per command and
//! is updated in place; it carries no wall-clock data, so identical configs
//! produce identical bytes. Invocation times are appended to `runs.jsonl`.

mod baselines;
pub mod config;
pub mod fixture;
mod report;

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::jsonl::{write_bytes, write_jsonl};
use crate::corpus::{
    cross_validate, load_embeddings, load_qa, load_reports, load_signals, save_embeddings,
    Embedding, EmbeddingSet, QaItem, QuestionType, ReportCorpus,
};
use crate::error::{Error, Result};
use crate::featurizer::Featurizer;
use crate::metrics::{exact_match, score_texts};
use crate::qa::{
    answer_request, build_qa_request, build_refine_request, refine_request, ChatRequest,
    HttpConfig, HttpLlm, LlmClient, MockLlm,
};
use crate::retrieval::{generate_report, retrieve_context};
use crate::vindex::{load_index, save_index, AnyIndex, FlatIndex, IndexKind, IvfIndex, VectorIndex};

pub use baselines::{baseline_common, baseline_majority_qa, baseline_random, most_common_report};
pub use config::{IndexConfig, LlmConfig, PathsConfig, Provider, RetrievalConfig, RunConfig};
pub use fixture::{synth_fixture, write_fixture, Fixture, FixtureSpec};
pub use report::{
    render_table, EvalReport, GenerationEval, MethodScores, Provenance, QaEval, QaMethod,
    QaTypeStats,
};

pub const GENERATED_FILE: &str = "generated.jsonl";
pub const PREDICTIONS_FILE: &str = "predictions.jsonl";
pub const EVAL_JSON: &str = "eval.json";
pub const EVAL_TXT: &str = "eval.txt";
pub const RUNS_FILE: &str = "runs.jsonl";

pub const METHOD_RETRIEVAL: &str = "ecg-regen";
pub const METHOD_RANDOM: &str = "random";
pub const METHOD_COMMON: &str = "common";
pub const METHOD_MAJORITY: &str = "majority";

/// Runs `f(0..n)` on at most `workers` threads and returns results in index order.
pub fn run_bounded<T: Send>(n: usize, workers: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let next = AtomicUsize::new(0);
    let workers = workers.clamp(1, n.max(1));
    let mut parts: Vec<Vec<(usize, T)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= n {
                            return done;
                        }
                        done.push((i, f(i)));
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut all: Vec<(usize, T)> = parts.drain(..).flatten().collect();
    all.sort_by_key(|(i, _)| *i);
    all.into_iter().map(|(_, t)| t).collect()
}

fn featurize(featurizer: &Featurizer, manifest: &Path) -> Result<EmbeddingSet> {
    let records = load_signals(manifest)?;
    let results: Vec<Result<Embedding>> = records.par_iter().map(|r| featurizer.embed(r)).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (r, res) in records.iter().zip(results) {
        match res {
            Ok(e) => rows.push(e),
            Err(e) => {
                warn!("record {:?}: {e}", r.id);
                failures.push(format!("{}: {e}", r.id));
            }
        }
    }
    if !failures.is_empty() {
        return Err(Error::Validation(format!(
            "{} of {} records could not be embedded: {}",
            failures.len(),
            records.len(),
            failures.join("; ")
        )));
    }
    EmbeddingSet::from_rows(rows)
}

/// Embeds the corpus manifest and, when configured, the query manifest.
/// Returns the number of embeddings written.
pub fn cmd_embed(cfg: &RunConfig) -> Result<usize> {
    let featurizer = Featurizer::new(cfg.featurizer.clone())?;
    let mut pairs = vec![(
        cfg.require(&cfg.paths.signals, "signals")?,
        cfg.require(&cfg.paths.embeddings, "embeddings")?,
    )];
    if let Some(q) = cfg.optional(&cfg.paths.query_signals) {
        pairs.push((q, cfg.require(&cfg.paths.query_embeddings, "query_embeddings")?));
    }
    let mut written = 0;
    for (manifest, out) in pairs {
        let set = featurize(&featurizer, &manifest)?;
        save_embeddings(&set, &out)?;
        info!("embedded {} records from {} into {}", set.len(), manifest.display(), out.display());
        written += set.len();
    }
    Ok(written)
}

pub fn build_index(set: EmbeddingSet, cfg: &IndexConfig, seed: u64) -> Result<AnyIndex<f32>> {
    let (ids, dim, data) = set.into_parts();
    Ok(match cfg.kind {
        IndexKind::Flat => AnyIndex::Flat(FlatIndex::build(ids, dim, data)?),
        IndexKind::Ivf => {
            let nlist = cfg.nlist;
            let index = IvfIndex::build(ids, dim, data, nlist, seed)?;
            AnyIndex::Ivf(index.with_nprobe(cfg.nprobe.min(nlist))?)
        }
    })
}

pub fn cmd_index(cfg: &RunConfig) -> Result<AnyIndex<f32>> {
    let set = load_embeddings(cfg.require(&cfg.paths.embeddings, "embeddings")?)?;
    let index = build_index(set, &cfg.index, cfg.seed)?;
    let path = cfg.require(&cfg.paths.index, "index")?;
    save_index(&index, &path)?;
    info!("wrote {:?} index over {} vectors to {}", index.kind(), index.len(), path.display());
    Ok(index)
}

/// The saved index when `paths.index` exists on disk, else one built from
/// `paths.embeddings`.
pub fn open_index(cfg: &RunConfig) -> Result<AnyIndex<f32>> {
    match cfg.optional(&cfg.paths.index) {
        Some(p) if p.exists() => load_index(p),
        _ => build_index(
            load_embeddings(cfg.require(&cfg.paths.embeddings, "embeddings")?)?,
            &cfg.index,
            cfg.seed,
        ),
    }
}

fn open_corpus(cfg: &RunConfig, index: &AnyIndex<f32>) -> Result<ReportCorpus> {
    let corpus = ReportCorpus::new(load_reports(cfg.require(&cfg.paths.reports, "reports")?)?)?;
    let known: HashSet<&str> = corpus.entries().iter().map(|e| e.id.as_str()).collect();
    cross_validate(&known, index.ids().iter().map(String::as_str), "indexed embedding")?;
    Ok(corpus)
}

/// Query embeddings: the query split when configured, else the corpus embeddings.
fn open_queries(cfg: &RunConfig) -> Result<EmbeddingSet> {
    match cfg.optional(&cfg.paths.query_embeddings) {
        Some(p) => load_embeddings(p),
        None => load_embeddings(cfg.require(&cfg.paths.embeddings, "embeddings")?),
    }
}

fn make_client(llm: &LlmConfig) -> Result<Option<Box<dyn LlmClient>>> {
    Ok(match llm.provider {
        Provider::None => None,
        Provider::Mock => Some(Box::new(match &llm.mock_response {
            Some(text) => MockLlm::fixed(text.clone()),
            None => MockLlm::rules(),
        })),
        Provider::Http => {
            let mut http = HttpConfig::new(llm.base_url.clone(), llm.model.clone());
            http.timeout = Duration::from_secs(llm.timeout_s);
            http.backoff_base = Duration::from_millis(llm.backoff_base_ms);
            Some(Box::new(HttpLlm::from_env(http)?))
        }
    })
}

/// Counts successful calls so that a run where the service never answered
/// can be reported as a service failure.
struct Counting<'a> {
    inner: &'a dyn LlmClient,
    ok: AtomicUsize,
    calls: AtomicUsize,
}

impl LlmClient for Counting<'_> {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let r = self.inner.complete(request);
        if r.is_ok() {
            self.ok.fetch_add(1, Ordering::Relaxed);
        }
        r
    }
}

impl<'a> Counting<'a> {
    fn new(inner: &'a dyn LlmClient) -> Self {
        Self { inner, ok: AtomicUsize::new(0), calls: AtomicUsize::new(0) }
    }

    fn check(&self) -> Result<()> {
        let calls = self.calls.load(Ordering::Relaxed);
        if calls > 0 && self.ok.load(Ordering::Relaxed) == 0 {
            return Err(Error::Llm(format!("all {calls} LLM calls failed")));
        }
        Ok(())
    }
}

fn out_file(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    Ok(cfg.out_dir()?.join(name))
}

fn provenance(cfg: &RunConfig) -> Provenance {
    Provenance {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Merges one section into `eval.json` (kept only when it came from the same
/// config) and rewrites `eval.txt`.
fn update_eval(cfg: &RunConfig, apply: impl FnOnce(&mut EvalReport)) -> Result<EvalReport> {
    let path = out_file(cfg, EVAL_JSON)?;
    let prov = provenance(cfg);
    let mut report = std::fs::read(&path)
        .ok()
        .and_then(|b| serde_json::from_slice::<EvalReport>(&b).ok())
        .filter(|r| r.provenance == prov)
        .unwrap_or(EvalReport { provenance: prov, generation: None, qa: None });
    apply(&mut report);
    write_eval(&report, &cfg.out_dir()?)?;
    Ok(report)
}

fn write_eval(report: &EvalReport, out_dir: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Internal(format!("serializing eval report: {e}")))?;
    write_bytes(&out_dir.join(EVAL_JSON), (json + "\n").as_bytes())?;
    write_bytes(&out_dir.join(EVAL_TXT), render_table(report).as_bytes())
}

/// Appends one line with wall-clock times to `runs.jsonl`.
pub fn log_run(out_dir: &Path, command: &str, config_hash: &str, started: SystemTime) -> Result<()> {
    let secs = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let line = serde_json::json!({
        "command": command,
        "config_hash": config_hash,
        "started_unix_s": secs(started),
        "finished_unix_s": secs(SystemTime::now()),
    });
    let path = out_dir.join(RUNS_FILE);
    let mut text = std::fs::read_to_string(&path).unwrap_or_default();
    text.push_str(&line.to_string());
    text.push('\n');
    write_bytes(&path, text.as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedReport {
    pub id: String,
    pub report: String,
    pub reference: String,
    pub neighbor_id: String,
    pub distance: f32,
    /// Retrieved report before refinement; absent when no LLM was used.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub draft: Option<String>,
}

fn label_set(labels: &[String]) -> Vec<String> {
    let mut s: Vec<String> = labels.iter().map(|l| crate::metrics::normalize_answer(l)).collect();
    s.sort();
    s.dedup();
    s
}

/// Retrieval-based report generation for every query, scored against the
/// query references together with the random and common baselines.
pub fn cmd_generate(cfg: &RunConfig) -> Result<EvalReport> {
    let index = open_index(cfg)?;
    let corpus = open_corpus(cfg, &index)?;
    let queries = open_queries(cfg)?;
    let references = match cfg.optional(&cfg.paths.query_reports) {
        Some(p) => ReportCorpus::new(load_reports(p)?)?,
        None => corpus.clone(),
    };
    if queries.is_empty() {
        return Err(Error::Validation("no queries".into()));
    }
    let known: HashSet<&str> = references.entries().iter().map(|e| e.id.as_str()).collect();
    cross_validate(&known, queries.ids().iter().map(String::as_str), "query")?;

    let client = make_client(&cfg.llm)?;
    let counting = client.as_deref().map(Counting::new);
    let exclude_self = cfg.retrieval.exclude_self;
    let k = cfg.retrieval.k_report;
    let generated: Vec<Result<GeneratedReport>> =
        run_bounded(queries.len(), cfg.llm.max_in_flight, |i| {
            let query = queries.get(&queries.ids()[i]).expect("id from set");
            let (draft, neighbor) = generate_report(&index, &corpus, &query, exclude_self)?;
            let reference = references.get(&query.id).expect("validated").report.clone();
            let (report, draft) = match &counting {
                Some(client) => {
                    let ctx = retrieve_context(&index, &corpus, &query, k, exclude_self)?;
                    let req = build_refine_request(&draft, &ctx)
                        .with_sampling(cfg.llm.temperature, cfg.llm.max_tokens);
                    (refine_request(client, &req, &draft), Some(draft))
                }
                None => (draft, None),
            };
            Ok(GeneratedReport {
                id: query.id,
                report,
                reference,
                neighbor_id: neighbor.id,
                distance: neighbor.distance,
                draft,
            })
        });
    let generated: Vec<GeneratedReport> = generated.into_iter().collect::<Result<_>>()?;
    write_jsonl(&out_file(cfg, GENERATED_FILE)?, &generated)?;
    if let Some(c) = &counting {
        c.check()?;
    }

    let refs: Vec<&str> = generated.iter().map(|g| g.reference.as_str()).collect();
    let n = refs.len();
    let mut methods = Vec::new();
    let candidates: [(&str, Vec<String>); 3] = [
        (METHOD_RETRIEVAL, generated.iter().map(|g| g.report.clone()).collect()),
        (METHOD_RANDOM, baseline_random(&corpus, n, cfg.seed)?),
        (METHOD_COMMON, baseline_common(&corpus, n)?),
    ];
    for (name, cands) in candidates {
        let e = score_texts(&cands, &refs)?;
        methods.push(MethodScores { name: name.into(), scores: e.corpus, sentence_bleu: e.sentence_bleu });
    }
    let matches = generated
        .iter()
        .filter(|g| {
            let own = &references.get(&g.id).expect("validated").labels;
            let theirs = &corpus.get(&g.neighbor_id).expect("validated").labels;
            label_set(own) == label_set(theirs)
        })
        .count();
    let eval = GenerationEval {
        n_queries: n,
        exclude_self,
        refined: counting.is_some(),
        label_match_rate: matches as f64 / n as f64,
        methods,
    };
    update_eval(cfg, |r| r.generation = Some(eval))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub qtype: QuestionType,
    pub ecg_id: String,
    pub answers: Vec<String>,
    pub gold: Vec<String>,
    pub parse_ok: bool,
    /// None when the item was skipped.
    pub correct: Option<bool>,
    pub raw: String,
}

fn qa_method(name: &str, items: &[QaItem], outcomes: impl Iterator<Item = Option<bool>>) -> QaMethod {
    let mut per_type: BTreeMap<QuestionType, QaTypeStats> = BTreeMap::new();
    for (item, o) in items.iter().zip(outcomes) {
        per_type.entry(item.qtype).or_default().record(o);
    }
    QaMethod { name: name.into(), per_type }
}

/// Answers every QA item with the configured LLM over `k_qa` retrieved
/// neighbours, scores exact match per question type, and adds the majority
/// baseline when `paths.qa_train` is set.
pub fn cmd_qa(cfg: &RunConfig) -> Result<EvalReport> {
    let client = make_client(&cfg.llm)?
        .ok_or_else(|| Error::Config("qa needs an LLM provider (mock or http)".into()))?;
    let items = load_qa(cfg.require(&cfg.paths.qa, "qa")?)?;
    if items.is_empty() {
        return Err(Error::Validation("no qa items".into()));
    }
    let index = open_index(cfg)?;
    let corpus = open_corpus(cfg, &index)?;
    let pool = open_queries(cfg)?;
    let counting = Counting::new(client.as_ref());
    let llm = &cfg.llm;

    let predictions: Vec<Result<Prediction>> = run_bounded(items.len(), llm.max_in_flight, |i| {
        let item = &items[i];
        let base = Prediction {
            id: item.id.clone(),
            qtype: item.qtype,
            ecg_id: item.ecg_id.clone(),
            answers: Vec::new(),
            gold: item.gold_answers.clone(),
            parse_ok: false,
            correct: None,
            raw: String::new(),
        };
        let Some(query) = pool.get(&item.ecg_id) else {
            warn!("qa item {:?}: no embedding for ecg {:?}; skipped", item.id, item.ecg_id);
            return Ok(base);
        };
        let ctx = retrieve_context(&index, &corpus, &query, cfg.retrieval.k_qa, cfg.retrieval.exclude_self)?;
        if ctx.is_empty() {
            warn!("qa item {:?}: no neighbours; skipped", item.id);
            return Ok(base);
        }
        let req = build_qa_request(&ctx, item)?.with_sampling(llm.temperature, llm.max_tokens);
        let answer = answer_request(&counting, &req, item.qtype, llm.retries);
        let correct = exact_match(&answer.answers, &item.gold_answers) == 1;
        Ok(Prediction {
            answers: answer.answers,
            parse_ok: answer.parse_ok,
            correct: Some(correct),
            raw: answer.raw,
            ..base
        })
    });
    let predictions: Vec<Prediction> = predictions.into_iter().collect::<Result<_>>()?;
    write_jsonl(&out_file(cfg, PREDICTIONS_FILE)?, &predictions)?;

    let model_name = match llm.provider {
        Provider::Http => llm.model.clone(),
        _ => "mock".to_string(),
    };
    let mut methods = vec![qa_method(
        &format!("{METHOD_RETRIEVAL}+{model_name}"),
        &items,
        predictions.iter().map(|p| p.correct),
    )];
    if let Some(train_path) = cfg.optional(&cfg.paths.qa_train) {
        let train = load_qa(train_path)?;
        let majority = baseline_majority_qa(&train, &items)?;
        let outcomes = items.iter().zip(&majority).map(|(it, m)| Some(exact_match(m, &it.gold_answers) == 1));
        methods.push(qa_method(METHOD_MAJORITY, &items, outcomes));
    }
    let eval = QaEval { n_items: items.len(), methods };
    let report = update_eval(cfg, |r| r.qa = Some(eval))?;
    counting.check()?;
    Ok(report)
}

/// Re-renders `eval.txt` from `eval.json` and returns the table.
pub fn cmd_report(out_dir: &Path) -> Result<String> {
    let path = out_dir.join(EVAL_JSON);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let report: EvalReport = serde_json::from_slice(&bytes)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    write_eval(&report, out_dir)?;
    Ok(render_table(&report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_runner_keeps_order() {
        let active = AtomicUsize::new(0);
        let peak = AtomicUsize::new(0);
        let out = run_bounded(50, 3, |i| {
            let now = active.fetch_add(1, Ordering::SeqCst) + 1;
            peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(1));
            active.fetch_sub(1, Ordering::SeqCst);
            i * 2
        });
        assert_eq!(out, (0..50).map(|i| i * 2).collect::<Vec<_>>());
        assert!(peak.load(Ordering::SeqCst) <= 3);
        assert!(run_bounded(0, 4, |i| i).is_empty());
    }
}
