use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use weaksum::alignment::greedy_align;
use weaksum::corpus::{
    generate_topics, ingest as read_corpus, normalize_entity, DocumentOptions, EntityExtractor, EntityFile,
    HeuristicExtractor, IngestOptions,
};
use weaksum::embeddings::{EmbeddingTable, MeanEncoder, PrecomputedVectors, SentenceEncoder};
use weaksum::eval::{ablation_report, evaluate_corpus, AblationReport, KeyedText};
use weaksum::fusion::{ablate, fuse, FusedLabels, FusionConfig};
use weaksum::scorer::{oracle_summary, rank, select_summary, train, LinearScorer, TrainingSet};
use weaksum::signals::{build_matrix, QaAnswers, SignalInputs, SignalMatrix, SignalName};
use weaksum::synth::{SynthCorpus, SynthOptions};

use crate::config::RunConfig;
use crate::store::{
    parse_summaries_name, read_jsonl, write_atomic, write_jsonl, DocRecord, Instance, SummaryRecord, System, DOCUMENTS,
    SIGNALS,
};
use crate::CliError;

/// Printed to stdout; the stage result lives in files.
fn say(out: &mut dyn Write, line: impl AsRef<str>) {
    let _ = writeln!(out, "{}", line.as_ref());
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestStats {
    pub documents: usize,
    pub skipped: usize,
    pub instances: usize,
    pub topics_generated: usize,
}

pub fn cmd_ingest(config: &RunConfig, out: &mut dyn Write) -> Result<IngestStats, CliError> {
    let options = IngestOptions {
        format: config.format,
        document: DocumentOptions {
            max_sentences: config.max_sentences,
            ..Default::default()
        },
    };
    let extractor: Box<dyn EntityExtractor> = match &config.entities {
        Some(path) => Box::new(EntityFile::load(path)?),
        None => Box::new(HeuristicExtractor),
    };
    let mut records = read_corpus(&config.corpus, options)?;
    let mut store: BTreeMap<String, DocRecord> = BTreeMap::new();
    let mut stats = IngestStats::default();
    for record in records.by_ref() {
        let record = record?;
        let id = record.document.id.clone();
        let entry = match store.get_mut(&id) {
            Some(existing) => {
                if existing.document.sentences != record.document.sentences {
                    log::warn!("document {id} appears twice with different text; keeping the first");
                }
                existing
            }
            None => {
                let entities = extractor.extract(&record.document)?;
                store.entry(id.clone()).or_insert(DocRecord {
                    document: record.document.clone(),
                    entities,
                    instances: Vec::new(),
                })
            }
        };
        let topics = match record.topic {
            Some(topic) => vec![topic],
            None => {
                let generated = generate_topics(&entry.document, &entry.entities, config.max_topics);
                stats.topics_generated += generated.len();
                generated
            }
        };
        for topic in topics {
            if entry.instances.iter().any(|i| i.topic.key() == topic.key()) {
                continue;
            }
            entry.instances.push(Instance {
                topic,
                reference: record.reference.clone(),
            });
        }
    }
    stats.skipped = records.skipped();
    let mut docs: Vec<DocRecord> = store.into_values().collect();
    for doc in &mut docs {
        doc.instances.sort_by_key(|i| i.topic.key());
        if doc.instances.is_empty() {
            log::warn!("document {} has no topics", doc.document.id);
        }
    }
    stats.documents = docs.len();
    stats.instances = docs.iter().map(|d| d.instances.len()).sum();
    write_jsonl(&config.out_dir.join(DOCUMENTS), &docs)?;
    say(
        out,
        format!(
            "ingested {} documents ({} skipped), {} instances, {} topics generated",
            stats.documents, stats.skipped, stats.instances, stats.topics_generated
        ),
    );
    Ok(stats)
}

fn load_documents(config: &RunConfig) -> Result<Vec<DocRecord>, CliError> {
    read_jsonl(&config.out_dir.join(DOCUMENTS))
}

fn instance_key(id: &str, topic: &str) -> (String, String) {
    (id.to_string(), normalize_entity(topic))
}

pub fn cmd_signals(config: &RunConfig, out: &mut dyn Write) -> Result<Vec<SignalMatrix>, CliError> {
    let docs = load_documents(config)?;
    let table = EmbeddingTable::load(&config.embeddings)?;
    let precomputed = config
        .sentence_vectors
        .as_ref()
        .map(PrecomputedVectors::load)
        .transpose()?;
    let mean = MeanEncoder::new(&table);
    let encoder: &dyn SentenceEncoder = match &precomputed {
        Some(p) => p,
        None => &mean,
    };
    let answers = config.qa_answers.as_ref().map(QaAnswers::load).transpose()?;
    let signal_config = config.signal_config();
    let mut matrices = Vec::new();
    for doc in &docs {
        for instance in &doc.instances {
            let inputs = SignalInputs {
                doc: &doc.document,
                entities: &doc.entities,
                topic: &instance.topic,
                reference: instance.reference.as_ref(),
                qa_answer: answers
                    .as_ref()
                    .and_then(|a| a.get(&doc.document.id, &instance.topic.topic_text)),
            };
            matrices.push(build_matrix(&inputs, &signal_config, &table, encoder)?);
        }
    }
    matrices.sort_by_key(|m| instance_key(&m.doc_id, &m.topic_text));
    write_jsonl(&config.out_dir.join(SIGNALS), &matrices)?;

    say(out, format!("{} signal matrices", matrices.len()));
    let mut stats: BTreeMap<SignalName, (usize, f64, f64, f64)> = BTreeMap::new();
    for matrix in &matrices {
        for (&name, values) in &matrix.values {
            let s = stats.entry(name).or_insert((0, 0.0, f64::INFINITY, f64::NEG_INFINITY));
            for &v in values {
                s.0 += 1;
                s.1 += v;
                s.2 = s.2.min(v);
                s.3 = s.3.max(v);
            }
        }
    }
    for (name, (count, sum, min, max)) in stats {
        let mean = if count == 0 { 0.0 } else { sum / count as f64 };
        say(
            out,
            format!("  {:<10} mean {mean:.4}  min {min:.4}  max {max:.4}", name.as_str()),
        );
    }
    Ok(matrices)
}

fn load_signals(config: &RunConfig) -> Result<Vec<SignalMatrix>, CliError> {
    read_jsonl(&config.out_dir.join(SIGNALS))
}

/// Fusion weights of a system.
pub fn system_fusion(config: &RunConfig, system: &System) -> Result<FusionConfig, CliError> {
    let base = config.fusion();
    match system {
        System::All => Ok(base),
        System::Drop(set) => Ok(ablate(&base, set)),
        System::Only(set) => {
            let rest: BTreeSet<SignalName> = SignalName::ALL.into_iter().filter(|s| !set.contains(s)).collect();
            Ok(ablate(&base, &rest))
        }
        System::Oracle => Err(CliError::Config("the oracle has no fusion weights".into())),
    }
}

pub fn cmd_fuse(config: &RunConfig, system: &System, out: &mut dyn Write) -> Result<PathBuf, CliError> {
    let fusion = system_fusion(config, system)?;
    let matrices = load_signals(config)?;
    let labels = matrices
        .iter()
        .map(|m| fuse(m, &fusion))
        .collect::<Result<Vec<_>, _>>()?;
    let path = config.out_dir.join(system.labels_file());
    write_jsonl(&path, &labels)?;
    let active: Vec<&str> = fusion.active().map(|s| s.as_str()).collect();
    say(
        out,
        format!(
            "fused {} instances as {} (signals: {})",
            labels.len(),
            system.display_name(),
            active.join(",")
        ),
    );
    Ok(path)
}

/// Pairs each signal matrix with its document.
fn with_documents<'a>(
    docs: &'a [DocRecord],
    matrices: &'a [SignalMatrix],
) -> Result<Vec<(&'a DocRecord, &'a Instance, &'a SignalMatrix)>, CliError> {
    let mut index: HashMap<(String, String), (&DocRecord, &Instance)> = HashMap::new();
    for doc in docs {
        for instance in &doc.instances {
            index.insert(
                instance_key(&doc.document.id, &instance.topic.topic_text),
                (doc, instance),
            );
        }
    }
    matrices
        .iter()
        .map(|m| {
            index
                .get(&instance_key(&m.doc_id, &m.topic_text))
                .map(|&(d, i)| (d, i, m))
                .ok_or_else(|| {
                    CliError::Data(weaksum::Error::InvalidArgument(format!(
                        "signals for {}/{} have no stored document",
                        m.doc_id, m.topic_text
                    )))
                })
        })
        .collect()
}

pub fn cmd_train(config: &RunConfig, system: &System, out: &mut dyn Write) -> Result<PathBuf, CliError> {
    if *system == System::Oracle {
        return Err(CliError::Config("the oracle is not trained".into()));
    }
    let docs = load_documents(config)?;
    let matrices = load_signals(config)?;
    let labels: Vec<FusedLabels> = read_jsonl(&config.out_dir.join(system.labels_file()))?;
    let labels: HashMap<(String, String), &FusedLabels> = labels
        .iter()
        .map(|l| (instance_key(&l.doc_id, &l.topic_text), l))
        .collect();
    let mut set = TrainingSet::default();
    for (doc, instance, matrix) in with_documents(&docs, &matrices)? {
        let key = instance_key(&matrix.doc_id, &matrix.topic_text);
        let Some(fused) = labels.get(&key) else {
            return Err(CliError::Data(weaksum::Error::InvalidArgument(format!(
                "no fused labels for {}/{}",
                key.0, matrix.topic_text
            ))));
        };
        set.add_instance(&doc.document, &instance.topic, matrix, fused)?;
    }
    let outcome = train(&set, &config.train)?;
    for (epoch, loss) in outcome.epoch_losses.iter().enumerate() {
        say(out, format!("epoch {epoch:>3}  loss {loss:.6}"));
    }
    let path = config.out_dir.join(system.model_file());
    write_atomic(&path, format!("{}\n", outcome.scorer.to_json()?).as_bytes())?;
    say(
        out,
        format!("trained {} on {} sentences", system.display_name(), set.len()),
    );
    Ok(path)
}

pub fn cmd_summarize(config: &RunConfig, system: &System, out: &mut dyn Write) -> Result<PathBuf, CliError> {
    let docs = load_documents(config)?;
    let mode = config.mode;
    let mut records = Vec::new();
    if *system == System::Oracle {
        for doc in &docs {
            for instance in &doc.instances {
                let Some(reference) = &instance.reference else {
                    log::warn!(
                        "{}/{}: no reference, no oracle summary",
                        doc.document.id,
                        instance.topic.topic_text
                    );
                    continue;
                };
                let labels = greedy_align(&doc.document, &reference.text, config.ext_max_select)?;
                records.push(SummaryRecord {
                    id: doc.document.id.clone(),
                    topic: instance.topic.topic_text.clone(),
                    summary: oracle_summary(&doc.document, &labels.as_signal(), &reference.tokens, mode),
                    mode,
                });
            }
        }
        records.sort_by_key(|r| instance_key(&r.id, &r.topic));
    } else {
        let model_path = config.out_dir.join(system.model_file());
        let text = std::fs::read_to_string(&model_path).map_err(|e| CliError::io(&model_path, e))?;
        let scorer = LinearScorer::from_json(&text)?;
        let matrices = load_signals(config)?;
        for (doc, instance, matrix) in with_documents(&docs, &matrices)? {
            let ranking = rank(&scorer, &doc.document, &instance.topic, matrix);
            records.push(SummaryRecord {
                id: doc.document.id.clone(),
                topic: instance.topic.topic_text.clone(),
                summary: select_summary(&ranking, &doc.document, mode),
                mode,
            });
        }
    }
    let path = config.out_dir.join(system.summaries_file(mode));
    write_jsonl(&path, &records)?;
    say(
        out,
        format!(
            "wrote {} {} summaries to {}",
            records.len(),
            system.display_name(),
            path.display()
        ),
    );
    Ok(path)
}

/// Summaries files of the configured mode, oracle last.
pub fn default_summaries(config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = &config.out_dir;
    let mut found: Vec<(u8, String, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if let Some((system, mode)) = parse_summaries_name(&path) {
            if mode == config.mode {
                let rank = match system {
                    System::All => 0,
                    System::Oracle => 2,
                    _ => 1,
                };
                found.push((rank, system.slug(), path));
            }
        }
    }
    found.sort();
    Ok(found.into_iter().map(|(_, _, p)| p).collect())
}

pub fn cmd_eval(config: &RunConfig, files: &[PathBuf], out: &mut dyn Write) -> Result<AblationReport, CliError> {
    let files = if files.is_empty() {
        default_summaries(config)?
    } else {
        files.to_vec()
    };
    if files.is_empty() {
        return Err(CliError::Data(weaksum::Error::EmptyReport));
    }
    let docs = load_documents(config)?;
    let references: Vec<KeyedText> = docs
        .iter()
        .flat_map(|d| {
            d.instances.iter().filter_map(|i| {
                i.reference
                    .as_ref()
                    .map(|r| KeyedText::new(&d.document.id, &i.topic.topic_text, &r.text))
            })
        })
        .collect();
    let mut rows = Vec::new();
    for file in &files {
        let records: Vec<SummaryRecord> = read_jsonl(file)?;
        let parsed = parse_summaries_name(file);
        let name = match &parsed {
            Some((system, _)) => system.display_name(),
            None => file.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
        };
        let mode = parsed
            .map(|(_, m)| m)
            .or_else(|| records.first().map(|r| r.mode))
            .unwrap_or(config.mode);
        if let Some(r) = records.iter().find(|r| r.mode != mode) {
            return Err(CliError::Data(weaksum::Error::InvalidArgument(format!(
                "{}: record {}/{} has mode {} but the file is {}",
                file.display(),
                r.id,
                r.topic,
                r.mode,
                mode
            ))));
        }
        let summaries: Vec<KeyedText> = records
            .into_iter()
            .map(|r| KeyedText::new(r.id, r.topic, r.summary))
            .collect();
        rows.push(evaluate_corpus(&name, mode, &summaries, &references)?);
    }
    let report = ablation_report(rows)?;
    let text = report.to_text();
    write_atomic(
        &config.out_dir.join(format!("report.{}.txt", config.mode)),
        text.as_bytes(),
    )?;
    write_atomic(
        &config.out_dir.join(format!("report.{}.json", config.mode)),
        format!("{}\n", report.to_json()?).as_bytes(),
    )?;
    let _ = write!(out, "{text}");
    Ok(report)
}

/// Writes a synthetic corpus, its embeddings, QA answers and a run config.
pub fn cmd_synth(dir: &Path, options: &SynthOptions, out: &mut dyn Write) -> Result<(), CliError> {
    let corpus = SynthCorpus::generate(options);
    write_atomic(&dir.join("corpus.jsonl"), corpus.corpus_jsonl().as_bytes())?;
    write_atomic(&dir.join("embeddings.txt"), corpus.embeddings_text().as_bytes())?;
    write_atomic(&dir.join("qa.jsonl"), corpus.qa_jsonl().as_bytes())?;
    let config = serde_json::json!({
        "corpus": "corpus.jsonl",
        "format": "jsonl",
        "embeddings": "embeddings.txt",
        "qa_answers": "qa.jsonl",
        "out_dir": "out",
    });
    let text = serde_json::to_string_pretty(&config).map_err(weaksum::Error::from)?;
    write_atomic(&dir.join("config.json"), format!("{text}\n").as_bytes())?;
    say(
        out,
        format!(
            "wrote {} synthetic documents to {}",
            corpus.documents.len(),
            dir.display()
        ),
    );
    Ok(())
}
