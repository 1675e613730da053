//! Pipeline stages. Each reads its inputs from the configured paths, writes
//! its artifacts atomically and returns a JSON summary.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use belforge_core::Cui;
use belforge_core::SemanticGroup;
use belforge_core::ann::{LinkError, PcaTransform, build_flat, build_ivf, embed_texts, fit_pca, link_mention};
use belforge_core::corpus::{
    CorpusCompiler, CorpusSlice, CorpusStats, RedirectTable, SentenceSplitter, build_star_subset,
};
use belforge_core::encoder::EncoderParams;
use belforge_core::eval::{GoldMention, RelationGraph, build_relation_graph, evaluate as score};
use belforge_core::linalg::Matrix;
use belforge_core::ontology::{
    OntologyRecord, SemanticGroupMap, build_ontology, parse_concepts, parse_crosswalk, parse_relations,
    parse_semantic_groups, parse_semantic_types,
};
use belforge_core::train::{generate_finetune_pairs, generate_pretrain_pairs, run_training};
use serde::Serialize;
use serde_json::{Value, json};

use crate::artifacts::{self, AnnIndex};
use crate::config::{IndexKind, PipelineConfig};
use crate::corpus_xml::{self, CorpusXmlError};
use crate::dump::{DumpError, DumpReader};
use crate::error::{Error, Result};
use crate::fsutil::{self, write_atomic, write_bytes_atomic};
use crate::mapping::{self, SparqlClient};
use crate::ontology_io::{self, OntologyParseError};
use crate::pairs_io;

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::usage(format!("paths.{key} is not set")))
}

/// A configured input that must exist.
fn input<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    let path = required(p, key)?;
    if !path.exists() {
        return Err(Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, format!("paths.{key} not found"))));
    }
    Ok(path)
}

fn optional_input<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<Option<&'a Path>> {
    match p {
        Some(_) => input(p, key).map(Some),
        None => Ok(None),
    }
}

fn from_ontology_error(path: &Path, e: OntologyParseError) -> Error {
    match e {
        OntologyParseError::Io(e) => Error::io(path, e),
        e => Error::data(format!("{}: {e}", path.display())),
    }
}

fn from_corpus_error(path: &Path, e: CorpusXmlError) -> Error {
    match e {
        CorpusXmlError::Io(e) => Error::io(path, e),
        e => Error::data(format!("{}: {e}", path.display())),
    }
}

pub fn load_ontology(path: &Path) -> Result<Vec<OntologyRecord>> {
    ontology_io::parse_ontology(fsutil::open(path)?).map_err(|e| from_ontology_error(path, e))
}

pub fn load_corpus(path: &Path) -> Result<CorpusSlice> {
    corpus_xml::parse_corpus(fsutil::open(path)?).map_err(|e| from_corpus_error(path, e))
}

pub fn save_corpus(path: &Path, slice: &CorpusSlice) -> Result<()> {
    let xml = corpus_xml::render_corpus(slice).map_err(|e| Error::data(e.to_string()))?;
    write_bytes_atomic(path, xml.as_bytes())
}

pub fn load_params(path: &Path) -> Result<EncoderParams> {
    artifacts::decode_params(&fsutil::read_bytes(path)?).map_err(|e| Error::data(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")
    })
}

pub fn ontology_build(cfg: &PipelineConfig) -> Result<Value> {
    let p = &cfg.paths;
    let o = &cfg.ontology;
    let concepts_path = input(&p.concepts, "concepts")?;
    let sty_path = optional_input(&p.semantic_types, "semantic_types")?;
    let groups_path = optional_input(&p.semantic_groups, "semantic_groups")?;
    let crosswalk_path = optional_input(&p.crosswalk, "crosswalk")?;
    let out = required(&p.ontology, "ontology")?;

    let text = fsutil::read_string(concepts_path)?;
    let concepts = parse_concepts(text.lines(), &o.concept_columns);
    let sty = match sty_path {
        Some(path) => parse_semantic_types(fsutil::read_string(path)?.lines(), &o.semantic_type_columns),
        None => Default::default(),
    };
    let mut groups = SemanticGroupMap::new();
    let mut groups_malformed = 0;
    if let Some(path) = groups_path {
        let parsed = parse_semantic_groups(fsutil::read_string(path)?.lines());
        groups_malformed = parsed.malformed;
        for (tui, g) in parsed.records {
            groups.insert(tui, g);
        }
    }
    let crosswalk = match crosswalk_path {
        Some(path) => parse_crosswalk(fsutil::read_string(path)?.lines(), &o.crosswalk_columns),
        None => Default::default(),
    };
    let malformed = json!({
        "concepts": concepts.malformed,
        "semantic_types": sty.malformed,
        "semantic_groups": groups_malformed,
        "crosswalk": crosswalk.malformed,
    });
    if concepts.malformed + sty.malformed + groups_malformed + crosswalk.malformed > 0 {
        log::warn!("skipped malformed source lines: {malformed}");
    }

    let build = build_ontology(&concepts.records, &sty.records, &groups, &crosswalk.records, &o.filter);
    write_atomic(out, |w| ontology_io::write_ontology(&build.records, w))?;
    if let Some(stats_path) = &p.ontology_stats {
        write_atomic(stats_path, |w| ontology_io::write_step_stats(&build.stats, w))?;
    }
    let cuis: BTreeSet<&Cui> = build.records.iter().map(|r| &r.cui).collect();
    log::info!("ontology: {} terms, {} concepts", build.records.len(), cuis.len());
    Ok(json!({
        "command": "ontology-build",
        "records": build.records.len(),
        "concepts": cuis.len(),
        "steps": build.stats.steps,
        "malformed": malformed,
        "crosswalk_dropped": build.crosswalk_dropped.len(),
        "output": out,
    }))
}

fn dump_error(path: &Path, e: DumpError) -> Error {
    match e {
        DumpError::Io(e) => Error::io(path, e),
        e => Error::data(format!("{}: {e}", path.display())),
    }
}

pub fn corpus_compile(cfg: &PipelineConfig) -> Result<Value> {
    let p = &cfg.paths;
    let dump_path = input(&p.dump, "dump")?;
    let tsv = optional_input(&p.mapping_tsv, "mapping_tsv")?;
    let ontology_path = if cfg.corpus.stats_against_ontology { optional_input(&p.ontology, "ontology")? } else { None };
    let out = required(&p.corpus, "corpus")?;

    let map = match (tsv, &cfg.corpus.sparql) {
        (Some(path), _) => mapping::load_tsv_map(path)?,
        (None, Some(sparql)) => SparqlClient::from_env(sparql.clone()).load_map()?,
        (None, None) => return Err(Error::usage("set paths.mapping_tsv or corpus.sparql")),
    };
    if map.is_empty() {
        return Err(Error::data("the article mapping is empty"));
    }
    log::info!("mapping: {} articles ({} duplicates, {} malformed)", map.len(), map.duplicates, map.malformed);
    let splitter = match &cfg.corpus.abbreviations {
        Some(list) => SentenceSplitter::new(list.iter().map(String::as_str)),
        None => SentenceSplitter::dutch(),
    };

    let mut redirects = RedirectTable::default();
    if cfg.corpus.follow_redirects {
        for page in DumpReader::new(fsutil::open(dump_path)?) {
            let page = page.map_err(|e| dump_error(dump_path, e))?;
            if let Some(target) = &page.redirect {
                redirects.insert(&page.title, target);
            }
        }
        log::info!("redirects: {}", redirects.len());
    }
    let mut compiler = CorpusCompiler::new(&map, &splitter);
    if cfg.corpus.follow_redirects {
        compiler = compiler.with_redirects(&redirects);
    }
    let mut reader = DumpReader::new(fsutil::open(dump_path)?);
    let mut pages = 0usize;
    for page in reader.by_ref() {
        compiler.add_page(&page.map_err(|e| dump_error(dump_path, e))?);
        pages += 1;
        if pages % 10_000 == 0 {
            log::info!("{pages} pages");
        }
    }
    let ontology = ontology_path.map(load_ontology).transpose()?;
    let compiled = compiler.finish(ontology.as_deref());
    let slice = CorpusSlice { sentences: compiled.sentences, mentions: compiled.mentions };
    save_corpus(out, &slice)?;
    if let Some(stats_path) = &p.corpus_stats {
        write_json(stats_path, &compiled.stats)?;
    }
    Ok(json!({
        "command": "corpus-compile",
        "pages": pages,
        "pages_without_text": reader.skipped_without_text(),
        "markup_warnings": compiled.markup_warnings,
        "mapping": {"articles": map.len(), "duplicates": map.duplicates, "malformed": map.malformed},
        "stats": compiled.stats,
        "output": out,
    }))
}

pub fn corpus_subset(cfg: &PipelineConfig) -> Result<Value> {
    let p = &cfg.paths;
    let corpus_path = input(&p.corpus, "corpus")?;
    let ontology_path = input(&p.ontology, "ontology")?;
    let train_out = required(&p.star_train, "star_train")?;
    let val_out = required(&p.star_validation, "star_validation")?;
    let corpus = load_corpus(corpus_path)?;
    let ontology = load_ontology(ontology_path)?;
    let star = build_star_subset(&corpus.sentences, &corpus.mentions, &ontology, cfg.corpus.split_ratio, cfg.seed);
    save_corpus(train_out, &star.train)?;
    save_corpus(val_out, &star.validation)?;
    Ok(json!({
        "command": "corpus-subset",
        "train": {"sentences": star.train.sentences.len(), "mentions": star.train.mentions.len()},
        "validation": {"sentences": star.validation.sentences.len(), "mentions": star.validation.mentions.len()},
    }))
}

pub fn pairs(cfg: &PipelineConfig) -> Result<Value> {
    let p = &cfg.paths;
    let ontology_path = input(&p.ontology, "ontology")?;
    let finetune_corpus = optional_input(&p.finetune_corpus, "finetune_corpus")?;
    let out = required(&p.pretrain_pairs, "pretrain_pairs")?;
    let ontology = load_ontology(ontology_path)?;

    let pretrain = generate_pretrain_pairs(&ontology);
    let mut dropped = 0;
    write_atomic(out, |w| {
        dropped = pairs_io::write_pairs(&pretrain, w)?;
        Ok(())
    })?;
    let mut summary = json!({
        "command": "pairs",
        "pretrain": {"pairs": pretrain.len() - dropped, "dropped": dropped, "output": out},
    });
    if let Some(corpus_path) = finetune_corpus {
        let ft_out = required(&p.finetune_pairs, "finetune_pairs")?;
        let corpus = load_corpus(corpus_path)?;
        let ft = generate_finetune_pairs(&corpus.mentions, &ontology, cfg.corpus.finetune_cap);
        let mut ft_dropped = 0;
        write_atomic(ft_out, |w| {
            ft_dropped = pairs_io::write_pairs(&ft, w)?;
            Ok(())
        })?;
        summary["finetune"] = json!({"pairs": ft.len() - ft_dropped, "dropped": ft_dropped, "output": ft_out});
    }
    Ok(summary)
}

/// Pretraining (`finetune == false`) or fine-tuning.
pub fn train(cfg: &PipelineConfig, finetune: bool) -> Result<Value> {
    let p = &cfg.paths;
    let (command, pairs_key, pairs_path, init, out, loss_out) = if finetune {
        ("finetune", "finetune_pairs", &p.finetune_pairs, input(&p.params, "params").map(Some)?, &p.finetuned_params, &p.finetune_loss_log)
    } else {
        ("train", "pretrain_pairs", &p.pretrain_pairs, optional_input(&p.init_params, "init_params")?, &p.params, &p.loss_log)
    };
    let out = required(out, if finetune { "finetuned_params" } else { "params" })?;
    let tc = cfg.stage_train(finetune);
    tc.validate().map_err(Error::usage)?;

    if tc.epochs == 0 {
        // nothing to train: the starting parameters are the result
        let bytes = match init {
            Some(path) => {
                let bytes = fsutil::read_bytes(path)?;
                artifacts::decode_params(&bytes).map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
                bytes
            }
            None => artifacts::encode_params(&EncoderParams::init(cfg.encoder, cfg.seed).map_err(Error::usage)?),
        };
        write_bytes_atomic(out, &bytes)?;
        if let Some(l) = loss_out {
            write_bytes_atomic(l, b"[]\n")?;
        }
        return Ok(json!({"command": command, "epochs": 0, "loss_log": [], "output": out}));
    }

    let pairs_path = input(pairs_path, pairs_key)?;
    let (pairs, malformed) = pairs_io::read_pairs(fsutil::open(pairs_path)?).map_err(|e| Error::io(pairs_path, e))?;
    if malformed > 0 {
        log::warn!("{}: skipped {malformed} malformed pair lines", pairs_path.display());
    }
    if pairs.is_empty() {
        return Err(Error::data(format!("{}: no training pairs", pairs_path.display())));
    }
    let params = match init {
        Some(path) => load_params(path)?,
        None => EncoderParams::init(cfg.encoder, cfg.seed).map_err(Error::usage)?,
    };
    let mut checkpoint_err: Option<Error> = None;
    let run = run_training(params, &pairs, &tc, &cfg.mining, &cfg.loss, 0, tc.epochs, |r, params| {
        log::info!(
            "{command} epoch {}: loss {:.6}, {} triplets, {}/{} batches without triplets",
            r.epoch + 1,
            r.mean_loss,
            r.mined_triplets,
            r.empty_batches,
            r.batches
        );
        if r.nothing_mined() {
            log::warn!("{command} epoch {}: no triplet violated the margin", r.epoch + 1);
        }
        if let (Some(dir), None) = (&p.checkpoints, &checkpoint_err) {
            let path = dir.join(format!("{command}-epoch-{:03}.params", r.epoch + 1));
            if let Err(e) = write_bytes_atomic(&path, &artifacts::encode_params(params)) {
                checkpoint_err = Some(e);
            }
        }
    })
    .map_err(|e| Error::data(e.to_string()))?;
    if let Some(e) = checkpoint_err {
        return Err(e);
    }
    write_bytes_atomic(out, &artifacts::encode_params(&run.params))?;
    if let Some(l) = loss_out {
        write_json(l, &run.loss_log)?;
    }
    Ok(json!({
        "command": command,
        "epochs": tc.epochs,
        "pairs": pairs.len(),
        "loss_log": run.loss_log,
        "mined_triplets": run.reports.iter().map(|r| r.mined_triplets).sum::<usize>(),
        "output": out,
    }))
}

fn model_path(cfg: &PipelineConfig) -> Result<&Path> {
    match &cfg.paths.model {
        Some(_) => input(&cfg.paths.model, "model"),
        None => input(&cfg.paths.params, "params"),
    }
}

pub fn index_build(cfg: &PipelineConfig) -> Result<Value> {
    let p = &cfg.paths;
    let model = model_path(cfg)?;
    let ontology_path = input(&p.ontology, "ontology")?;
    let pca_out = required(&p.pca, "pca")?;
    let index_out = required(&p.index, "index")?;
    let params = load_params(model)?;
    let ontology = load_ontology(ontology_path)?;
    if ontology.is_empty() {
        return Err(Error::data("the ontology is empty"));
    }
    let raw = embed_texts(&params, ontology.iter().map(|r| r.text.as_str())).map_err(|e| Error::data(e.to_string()))?;
    let (n, d) = (raw.rows(), raw.cols());

    let wanted = cfg.index.pca_components;
    let transform = if wanted == 0 {
        PcaTransform::identity(d)
    } else {
        if n < 2 {
            return Err(Error::data("PCA needs at least two ontology terms"));
        }
        let k = wanted.min(n - 1).min(d);
        if k < wanted {
            log::warn!("index.pca_components {wanted} exceeds min(terms - 1, dim) = {k}; using {k}");
        }
        fit_pca(&raw, k).map_err(|e| Error::data(e.to_string()))?
    };
    let rows: Vec<f64> = (0..n)
        .map(|i| transform.apply(raw.row(i)))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::data(e.to_string()))?
        .concat();
    let k = transform.output_dim();
    let vectors = Matrix::from_vec(n, k, rows).expect("one row per term");
    let ids: Vec<u64> = ontology.iter().map(|r| r.term_id).collect();

    let index = match cfg.index.kind {
        IndexKind::Flat => AnnIndex::Flat(build_flat(vectors, ids).map_err(|e| Error::data(e.to_string()))?),
        IndexKind::Ivf => {
            let nlist = cfg.index.nlist.clamp(1, n);
            if nlist != cfg.index.nlist {
                log::warn!("index.nlist {} clamped to {nlist}", cfg.index.nlist);
            }
            let mut ivf = build_ivf(vectors, ids, nlist, cfg.seed, cfg.index.kmeans_iters)
                .map_err(|e| Error::data(e.to_string()))?;
            if ivf.set_nprobe(cfg.index.nprobe) {
                log::warn!("index.nprobe {} clamped to {}", cfg.index.nprobe, ivf.nprobe());
            }
            AnnIndex::Ivf(ivf)
        }
    };
    write_bytes_atomic(pca_out, &artifacts::encode_pca(&transform))?;
    write_bytes_atomic(index_out, &artifacts::encode_index(&index))?;
    let (nlist, nprobe) = match &index {
        AnnIndex::Flat(_) => (None, None),
        AnnIndex::Ivf(i) => (Some(i.nlist()), Some(i.nprobe())),
    };
    Ok(json!({
        "command": "index-build",
        "terms": n,
        "components": k,
        "kind": cfg.index.kind,
        "nlist": nlist,
        "nprobe": nprobe,
        "pca": pca_out,
        "index": index_out,
    }))
}

/// Everything needed to link mentions.
pub struct Linker {
    pub params: EncoderParams,
    pub transform: PcaTransform,
    pub index: AnnIndex,
    pub terms: BTreeMap<u64, (Cui, String)>,
    term_cuis: BTreeMap<u64, Cui>,
    pub top_k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub term_id: u64,
    pub cui: Option<Cui>,
    pub text: Option<String>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkRecord {
    pub mention: String,
    pub predicted_cui: Option<Cui>,
    pub score: Option<f64>,
    pub top_k: Vec<Candidate>,
}

impl Linker {
    pub fn load(cfg: &PipelineConfig) -> Result<Self> {
        let p = &cfg.paths;
        let model = model_path(cfg)?;
        let pca_path = input(&p.pca, "pca")?;
        let index_path = input(&p.index, "index")?;
        let ontology_path = input(&p.ontology, "ontology")?;
        let params = load_params(model)?;
        let transform = artifacts::decode_pca(&fsutil::read_bytes(pca_path)?)
            .map_err(|e| Error::data(format!("{}: {e}", pca_path.display())))?;
        let mut index = artifacts::decode_index(&fsutil::read_bytes(index_path)?)
            .map_err(|e| Error::data(format!("{}: {e}", index_path.display())))?;
        if transform.input_dim() != params.dim() || transform.output_dim() != index.flat().dim() {
            return Err(Error::data("model, PCA transform and index dimensions disagree"));
        }
        if let AnnIndex::Ivf(ivf) = &mut index {
            if ivf.set_nprobe(cfg.index.nprobe) {
                log::warn!("index.nprobe {} clamped to {}", cfg.index.nprobe, ivf.nprobe());
            }
        }
        let ontology = load_ontology(ontology_path)?;
        let term_cuis = ontology.iter().map(|r| (r.term_id, r.cui.clone())).collect();
        let terms = ontology.into_iter().map(|r| (r.term_id, (r.cui, r.text))).collect();
        Ok(Linker { params, transform, index, terms, term_cuis, top_k: cfg.index.top_k })
    }

    pub fn link(&self, mention: &str) -> std::result::Result<LinkRecord, LinkError> {
        let r = link_mention(mention, &self.params, &self.transform, &self.index, &self.term_cuis, self.top_k)?;
        let top_k: Vec<Candidate> = r
            .neighbors
            .iter()
            .map(|n| {
                let t = self.terms.get(&n.term_id);
                Candidate { term_id: n.term_id, cui: t.map(|t| t.0.clone()), text: t.map(|t| t.1.clone()), score: n.score }
            })
            .collect();
        Ok(LinkRecord {
            mention: mention.to_string(),
            predicted_cui: Some(r.predicted_cui),
            score: top_k.first().map(|c| c.score),
            top_k,
        })
    }

    /// Like [`Linker::link`] but an unlinkable mention yields an empty record.
    pub fn link_or_empty(&self, mention: &str) -> LinkRecord {
        self.link(mention).unwrap_or_else(|e| {
            log::warn!("cannot link {mention:?}: {e}");
            LinkRecord { mention: mention.to_string(), predicted_cui: None, score: None, top_k: Vec::new() }
        })
    }
}

pub enum LinkInput<'a> {
    Mention(&'a str),
    File { input: &'a Path, output: &'a Path },
}

pub fn link(cfg: &PipelineConfig, what: LinkInput<'_>) -> Result<Value> {
    if let LinkInput::File { input, .. } = what {
        if !input.exists() {
            return Err(Error::io(input, std::io::Error::new(std::io::ErrorKind::NotFound, "link input not found")));
        }
    }
    let linker = Linker::load(cfg)?;
    match what {
        LinkInput::Mention(m) => {
            let rec = linker.link(m).map_err(|e| Error::data(format!("cannot link {m:?}: {e}")))?;
            Ok(serde_json::to_value(rec).expect("plain data"))
        }
        LinkInput::File { input, output } => {
            let text = fsutil::read_string(input)?;
            let records: Vec<LinkRecord> =
                text.lines().filter(|l| !l.trim().is_empty()).map(|l| linker.link_or_empty(l)).collect();
            write_atomic(output, |w| {
                for r in &records {
                    serde_json::to_writer(&mut *w, r)?;
                    w.write_all(b"\n")?;
                }
                Ok(())
            })?;
            let linked = records.iter().filter(|r| r.predicted_cui.is_some()).count();
            Ok(json!({"command": "link", "mentions": records.len(), "linked": linked, "output": output}))
        }
    }
}

pub fn evaluate(cfg: &PipelineConfig) -> Result<Value> {
    let p = &cfg.paths;
    let gold_path = input(&p.gold, "gold")?;
    let relations_path = optional_input(&p.relations, "relations")?;
    let report_out = required(&p.report, "report")?;
    let linker = Linker::load(cfg)?;
    let gold_corpus = load_corpus(gold_path)?;

    let mut group_of: BTreeMap<&Cui, SemanticGroup> = BTreeMap::new();
    let ontology_path = input(&p.ontology, "ontology")?;
    let ontology = load_ontology(ontology_path)?;
    for r in &ontology {
        group_of.entry(&r.cui).or_insert(r.group);
    }
    let graph = match relations_path {
        Some(path) => {
            let parsed = parse_relations(fsutil::read_string(path)?.lines(), &cfg.ontology.relation_columns);
            if parsed.malformed > 0 {
                log::warn!("{}: skipped {} malformed relation lines", path.display(), parsed.malformed);
            }
            build_relation_graph(&parsed.records)
        }
        None => {
            log::warn!("paths.relations is not set; 1-distance accuracy equals accuracy");
            RelationGraph::new()
        }
    };
    let gold: Vec<GoldMention> = gold_corpus
        .mentions
        .iter()
        .map(|m| GoldMention {
            mention: m.anchor.clone(),
            gold_cui: m.cui.clone(),
            group: group_of.get(&m.cui).copied().unwrap_or(SemanticGroup::Other),
        })
        .collect();
    let predictions: Vec<Option<Cui>> = gold.iter().map(|g| linker.link_or_empty(&g.mention).predicted_cui).collect();
    let report = score(&predictions, &gold, &graph, true).with_run(cfg.seed, cfg.train.epochs);
    write_json(report_out, &report)?;
    if let Some(text_out) = &p.report_text {
        write_bytes_atomic(text_out, report.render_text().as_bytes())?;
    }
    Ok(json!({
        "command": "evaluate",
        "mentions": report.total.count,
        "accuracy": report.total.accuracy,
        "one_dist_accuracy": report.total.one_dist_accuracy,
        "report": report_out,
    }))
}

pub fn stats(cfg: &PipelineConfig) -> Result<Value> {
    let p = &cfg.paths;
    let ontology_path = optional_input(&p.ontology, "ontology")?;
    let corpus_path = optional_input(&p.corpus, "corpus")?;
    if ontology_path.is_none() && corpus_path.is_none() {
        return Err(Error::usage("stats needs paths.ontology or paths.corpus"));
    }
    let ontology = ontology_path.map(load_ontology).transpose()?;
    let mut summary = json!({"command": "stats"});
    if let Some(o) = &ontology {
        let mut groups: BTreeMap<&str, usize> = BTreeMap::new();
        for r in o {
            *groups.entry(r.group.code()).or_default() += 1;
        }
        let cuis: BTreeSet<&Cui> = o.iter().map(|r| &r.cui).collect();
        summary["ontology"] = json!({"terms": o.len(), "concepts": cuis.len(), "groups": groups});
    }
    if let Some(path) = corpus_path {
        let c = load_corpus(path)?;
        summary["corpus"] = serde_json::to_value(CorpusStats::compute(&c.sentences, &c.mentions, ontology.as_deref()))
            .expect("plain data");
    }
    Ok(summary)
}
