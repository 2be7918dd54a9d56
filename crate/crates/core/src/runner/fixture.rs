//! Synthetic ECG-like corpus with class-templated reports and QA items.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use crate::corpus::jsonl::{write_bytes, write_jsonl};
use crate::corpus::{
    save_qa, save_reports, write_signal_csv, EcgRecord, QaItem, QuestionType, ReportEntry,
    SignalManifestEntry,
};
use crate::error::{Error, Result};

pub struct ClassSpec {
    pub heart_rate_bpm: f64,
    /// Frequency of the superimposed oscillation.
    pub dominant_hz: f64,
    /// Standard deviation of beat-to-beat interval changes, as a fraction.
    pub rr_jitter: f64,
    pub labels: &'static [&'static str],
    pub reports: &'static [&'static str],
}

pub const CLASSES: [ClassSpec; 8] = [
    ClassSpec {
        heart_rate_bpm: 69.0,
        dominant_hz: 6.0,
        rr_jitter: 0.003,
        labels: &["sinus rhythm", "normal ecg"],
        reports: &[
            "sinus rhythm. normal ecg. no previous ecg available.",
        ],
    },
    ClassSpec {
        heart_rate_bpm: 45.0,
        dominant_hz: 2.5,
        rr_jitter: 0.003,
        labels: &["sinus bradycardia"],
        reports: &[
            "sinus bradycardia. otherwise normal ecg. no previous ecg available.",
            "marked sinus bradycardia. otherwise normal ecg.",
            "sinus bradycardia. borderline ecg. unchanged from previous ecg.",
        ],
    },
    ClassSpec {
        heart_rate_bpm: 130.0,
        dominant_hz: 11.0,
        rr_jitter: 0.003,
        labels: &["sinus tachycardia"],
        reports: &[
            "sinus tachycardia. otherwise normal ecg. no previous ecg available.",
            "sinus tachycardia. borderline ecg.",
            "sinus tachycardia. nonspecific st changes. abnormal ecg. unchanged from previous ecg.",
        ],
    },
    ClassSpec {
        heart_rate_bpm: 117.0,
        dominant_hz: 20.0,
        rr_jitter: 0.15,
        labels: &["atrial fibrillation"],
        reports: &[
            "atrial fibrillation. abnormal ecg. no previous ecg available.",
            "atrial fibrillation with rapid ventricular response. abnormal ecg.",
            "atrial fibrillation. nonspecific t wave changes. abnormal ecg.",
        ],
    },
    ClassSpec {
        heart_rate_bpm: 57.0,
        dominant_hz: 35.0,
        rr_jitter: 0.003,
        labels: &["sinus rhythm", "first degree av block"],
        reports: &[
            "sinus rhythm. first degree av block. borderline ecg. no previous ecg available.",
            "sinus rhythm with first degree av block. abnormal ecg.",
            "sinus rhythm. prolonged pr interval. borderline ecg.",
        ],
    },
    ClassSpec {
        heart_rate_bpm: 93.0,
        dominant_hz: 25.0,
        rr_jitter: 0.003,
        labels: &["sinus rhythm", "left anterior fascicular block"],
        reports: &[
            "sinus rhythm. left anterior fascicular block. abnormal ecg. no previous ecg available.",
            "sinus rhythm. left axis deviation. left anterior fascicular block. abnormal ecg.",
            "sinus rhythm. left anterior hemiblock. abnormal ecg.",
        ],
    },
    ClassSpec {
        heart_rate_bpm: 81.0,
        dominant_hz: 40.0,
        rr_jitter: 0.003,
        labels: &["sinus rhythm", "inferior myocardial infarction"],
        reports: &[
            "sinus rhythm. inferior myocardial infarction, age undetermined. abnormal ecg.",
            "sinus rhythm. old inferior infarct. abnormal ecg. no previous ecg available.",
            "sinus rhythm. inferior q waves, possible old infarct. abnormal ecg.",
        ],
    },
    ClassSpec {
        heart_rate_bpm: 105.0,
        dominant_hz: 17.0,
        rr_jitter: 0.003,
        labels: &["sinus rhythm", "left ventricular hypertrophy"],
        reports: &[
            "sinus rhythm. left ventricular hypertrophy. abnormal ecg.",
            "sinus rhythm. voltage criteria for left ventricular hypertrophy. abnormal ecg. no previous ecg available.",
            "sinus rhythm. left ventricular hypertrophy with repolarization abnormality. abnormal ecg.",
        ],
    },
];

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub classes: usize,
    pub per_class: usize,
    pub sample_rate_hz: f64,
    pub seconds: f64,
    pub leads: usize,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self { classes: 8, per_class: 25, sample_rate_hz: 250.0, seconds: 10.0, leads: 3, seed: 42 }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub records: Vec<EcgRecord>,
    pub reports: Vec<ReportEntry>,
    /// Class index of each record.
    pub classes: Vec<usize>,
    pub qa: Vec<QaItem>,
    pub qa_train: Vec<QaItem>,
}

fn gaussian(t: f64, center: f64, width: f64) -> f64 {
    let z = (t - center) / width;
    (-0.5 * z * z).exp()
}

fn synth_signal(class: &ClassSpec, spec: &FixtureSpec, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let n = (spec.seconds * spec.sample_rate_hz).round() as usize;
    let noise = Normal::new(0.0, 0.01).expect("valid sigma");
    let rate = class.heart_rate_bpm * rng.random_range(0.98..1.02);
    let rr = 60.0 / rate;
    let mut beats = Vec::new();
    let mut t = rng.random_range(0.0..rr);
    while t < spec.seconds + 0.5 {
        beats.push(t);
        let step: f64 = Normal::new(1.0, class.rr_jitter).expect("valid sigma").sample(rng);
        t += rr * step.max(0.4);
    }
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let osc_amp = 0.06 * rng.random_range(0.9..1.1);
    let gains: Vec<f64> = (0..spec.leads).map(|l| 1.0 / (1.0 + 0.4 * l as f64)).collect();
    let mut out = Vec::with_capacity(n * spec.leads);
    for i in 0..n {
        let t = i as f64 / spec.sample_rate_hz;
        let mut beat = 0.0;
        for &b in &beats {
            if (t - b).abs() < 0.6 || (t - b - 0.25).abs() < 0.6 {
                beat += gaussian(t, b, 0.012) - 0.15 * gaussian(t, b + 0.03, 0.01)
                    + 0.25 * gaussian(t, b + 0.25, 0.05);
            }
        }
        let osc = osc_amp * (std::f64::consts::TAU * class.dominant_hz * t + phase).sin();
        for g in &gains {
            out.push((g * (beat + osc) + noise.sample(rng)) as f32);
        }
    }
    out
}

fn qa_items(
    reports: &[ReportEntry],
    classes: &[usize],
    n_classes: usize,
    prefix: &str,
    rng: &mut ChaCha8Rng,
) -> Vec<QaItem> {
    let mut items = Vec::new();
    for (entry, &c) in reports.iter().zip(classes) {
        let own = CLASSES[c].labels;
        let foreign: Vec<&str> = (0..n_classes)
            .flat_map(|k| CLASSES[k].labels.iter().copied())
            .filter(|l| !own.contains(l))
            .collect();
        let own_label = own[own.len() - 1];
        let other = foreign[rng.random_range(0..foreign.len())];
        let id = |kind: &str| format!("{prefix}{}_{kind}", entry.id);
        let ask = |l: &str| format!("Does this ECG show {l}?");
        let item = |id: String, qtype, question: String, options: Vec<&str>, gold: Vec<&str>| QaItem {
            id,
            qtype,
            question,
            options: options.into_iter().map(str::to_string).collect(),
            gold_answers: gold.into_iter().map(str::to_string).collect(),
            ecg_id: entry.id.clone(),
        };
        let (q, gold) = if rng.random_bool(0.5) { (own_label, "yes") } else { (other, "no") };
        items.push(item(id("verify"), QuestionType::SingleVerify, ask(q), vec![], vec![gold]));
        let (options, gold) = if rng.random_bool(0.75) {
            let mut opts = vec![own_label, other];
            if rng.random_bool(0.5) {
                opts.swap(0, 1);
            }
            (opts, vec![own_label])
        } else {
            let second = foreign[rng.random_range(0..foreign.len())];
            let opts = if second == other { vec![other] } else { vec![other, second] };
            (opts, vec!["none"])
        };
        items.push(item(
            id("choose"),
            QuestionType::SingleChoose,
            "Which of the following findings does this ECG show?".into(),
            options,
            gold,
        ));
        items.push(item(
            id("query"),
            QuestionType::SingleQuery,
            "Which diagnostic findings does this ECG show?".into(),
            vec![],
            own.to_vec(),
        ));
    }
    items
}

pub fn synth_fixture(spec: &FixtureSpec) -> Result<Fixture> {
    if spec.classes == 0 || spec.classes > CLASSES.len() || spec.per_class == 0 {
        return Err(Error::Config(format!(
            "fixture needs 1..={} classes and at least one record per class",
            CLASSES.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::new();
    let mut reports = Vec::new();
    let mut classes = Vec::new();
    for i in 0..spec.per_class {
        for (c, class) in CLASSES.iter().enumerate().take(spec.classes) {
            let id = format!("ecg{:04}", records.len());
            let signal = synth_signal(class, spec, &mut rng);
            records.push(EcgRecord::new(id.clone(), signal, spec.leads, spec.sample_rate_hz)?);
            reports.push(ReportEntry {
                id,
                report: class.reports[i % class.reports.len()].to_string(),
                labels: class.labels.iter().map(|s| s.to_string()).collect(),
            });
            classes.push(c);
        }
    }
    let qa = qa_items(&reports, &classes, spec.classes, "", &mut rng);
    let qa_train = qa_items(&reports, &classes, spec.classes, "train_", &mut rng);
    Ok(Fixture { records, reports, classes, qa, qa_train })
}

/// Writes signals, manifest, reports, QA files and a ready-to-run
/// `config.json` under `dir`. Returns the config path.
pub fn write_fixture(fixture: &Fixture, dir: &Path, seed: u64) -> Result<PathBuf> {
    let mut manifest = Vec::with_capacity(fixture.records.len());
    for r in &fixture.records {
        let file = format!("signals/{}.csv", r.id);
        write_signal_csv(dir.join(&file), r)?;
        manifest.push(SignalManifestEntry { id: r.id.clone(), file, sample_rate_hz: r.sample_rate_hz });
    }
    write_jsonl(&dir.join("signals.jsonl"), &manifest)?;
    save_reports(dir.join("reports.jsonl"), &fixture.reports)?;
    save_qa(dir.join("qa.jsonl"), &fixture.qa)?;
    save_qa(dir.join("qa_train.jsonl"), &fixture.qa_train)?;
    let config = json!({
        "paths": {
            "signals": "signals.jsonl",
            "embeddings": "embeddings.ecge",
            "reports": "reports.jsonl",
            "qa": "qa.jsonl",
            "qa_train": "qa_train.jsonl",
            "index": "index.eidx",
            "out_dir": "out"
        },
        "retrieval": { "exclude_self": true },
        "llm": { "provider": "mock" },
        "seed": seed
    });
    let path = dir.join("config.json");
    let text = serde_json::to_string_pretty(&config).expect("config serializes") + "\n";
    write_bytes(&path, text.as_bytes())?;
    Ok(path)
}
