//! Pipeline configuration file.
//!
//! Relative paths are resolved against the directory of the config file.
//! One top-level `seed` drives every random step: encoder initialisation,
//! batch order, the train/validation split and k-means seeding.

use std::path::{Path, PathBuf};

use belforge_core::ontology::{ConceptColumns, CrosswalkColumns, FilterConfig, RelationColumns, SemanticTypeColumns};
use belforge_core::encoder::EncoderConfig;
use belforge_core::train::{MiningConfig, MsLossConfig, TrainConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::fsutil;
use crate::mapping::SparqlConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub ontology: OntologySettings,
    #[serde(default)]
    pub corpus: CorpusSettings,
    #[serde(default)]
    pub encoder: EncoderConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default = "default_finetune")]
    pub finetune: TrainConfig,
    #[serde(default)]
    pub mining: MiningConfig,
    #[serde(default)]
    pub loss: MsLossConfig,
    #[serde(default)]
    pub index: IndexSettings,
}

fn default_finetune() -> TrainConfig {
    TrainConfig { epochs: 3, ..TrainConfig::default() }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    // ontology sources
    pub concepts: Option<PathBuf>,
    pub semantic_types: Option<PathBuf>,
    pub semantic_groups: Option<PathBuf>,
    pub relations: Option<PathBuf>,
    pub crosswalk: Option<PathBuf>,
    pub ontology: Option<PathBuf>,
    pub ontology_stats: Option<PathBuf>,
    // corpus
    pub mapping_tsv: Option<PathBuf>,
    pub dump: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub corpus_stats: Option<PathBuf>,
    pub star_train: Option<PathBuf>,
    pub star_validation: Option<PathBuf>,
    // training
    pub pretrain_pairs: Option<PathBuf>,
    pub finetune_corpus: Option<PathBuf>,
    pub finetune_pairs: Option<PathBuf>,
    pub init_params: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub loss_log: Option<PathBuf>,
    pub checkpoints: Option<PathBuf>,
    pub finetuned_params: Option<PathBuf>,
    pub finetune_loss_log: Option<PathBuf>,
    // inference
    pub model: Option<PathBuf>,
    pub pca: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub link_input: Option<PathBuf>,
    pub link_output: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub report_text: Option<PathBuf>,
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let fields = [
            &mut self.concepts,
            &mut self.semantic_types,
            &mut self.semantic_groups,
            &mut self.relations,
            &mut self.crosswalk,
            &mut self.ontology,
            &mut self.ontology_stats,
            &mut self.mapping_tsv,
            &mut self.dump,
            &mut self.corpus,
            &mut self.corpus_stats,
            &mut self.star_train,
            &mut self.star_validation,
            &mut self.pretrain_pairs,
            &mut self.finetune_corpus,
            &mut self.finetune_pairs,
            &mut self.init_params,
            &mut self.params,
            &mut self.loss_log,
            &mut self.checkpoints,
            &mut self.finetuned_params,
            &mut self.finetune_loss_log,
            &mut self.model,
            &mut self.pca,
            &mut self.index,
            &mut self.link_input,
            &mut self.link_output,
            &mut self.gold,
            &mut self.report,
            &mut self.report_text,
        ];
        for p in fields.into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OntologySettings {
    pub filter: FilterConfig,
    pub concept_columns: ConceptColumns,
    pub semantic_type_columns: SemanticTypeColumns,
    pub relation_columns: RelationColumns,
    pub crosswalk_columns: CrosswalkColumns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSettings {
    /// Used when `paths.mapping_tsv` is not set.
    pub sparql: Option<SparqlConfig>,
    /// Sentence splitter abbreviations; the built-in Dutch list when absent.
    pub abbreviations: Option<Vec<String>>,
    pub follow_redirects: bool,
    pub split_ratio: f64,
    /// Ontology terms paired with each mention for fine-tuning.
    pub finetune_cap: usize,
    /// Count unseen mentions and unlinkable concepts against `paths.ontology`.
    pub stats_against_ontology: bool,
}

impl Default for CorpusSettings {
    fn default() -> Self {
        CorpusSettings {
            sparql: None,
            abbreviations: None,
            follow_redirects: false,
            split_ratio: 0.8,
            finetune_cap: 50,
            stats_against_ontology: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexKind {
    Flat,
    Ivf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexSettings {
    /// Principal components kept; 0 keeps the raw encoder output.
    pub pca_components: usize,
    pub kind: IndexKind,
    pub nlist: usize,
    pub nprobe: usize,
    pub kmeans_iters: usize,
    pub top_k: usize,
}

impl Default for IndexSettings {
    fn default() -> Self {
        IndexSettings { pca_components: 256, kind: IndexKind::Flat, nlist: 64, nprobe: 8, kmeans_iters: 20, top_k: 5 }
    }
}

/// Sets `dotted.key` inside `root`, creating objects along the way. The
/// value is read as JSON when it parses, otherwise as a string. Paths are
/// always strings, except `null` which unsets them.
pub fn apply_override(root: &mut Value, key: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::usage(format!("bad override key `{key}`")));
    }
    for (i, part) in parts.iter().enumerate() {
        let obj = match cur {
            Value::Object(m) => m,
            _ => return Err(Error::usage(format!("override `{key}`: `{}` is not an object", parts[..i].join(".")))),
        };
        if i + 1 == parts.len() {
            // a string setting stays a string even when the value looks numeric
            let value = match (obj.get(*part), value) {
                (Some(Value::String(_)), Value::Number(_) | Value::Bool(_)) => Value::String(raw.to_string()),
                (_, Value::Null) if parts[0] == "paths" => Value::Null,
                _ if parts[0] == "paths" => Value::String(raw.to_string()),
                (_, v) => v,
            };
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("loop returns on the last part")
}

impl PipelineConfig {
    /// Reads the config file, applies overrides in order and resolves paths.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = fsutil::read_string(path)?;
        let mut root: Value =
            serde_json::from_str(&text).map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        if !root.is_object() {
            return Err(Error::data(format!("{}: expected a JSON object", path.display())));
        }
        for (k, v) in overrides {
            apply_override(&mut root, k, v)?;
        }
        let mut cfg: PipelineConfig =
            serde_json::from_value(root).map_err(|e| Error::usage(format!("invalid configuration: {e}")))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.paths.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.ontology.filter.validate().map_err(Error::usage)?;
        self.encoder.validate().map_err(Error::usage)?;
        if !(self.corpus.split_ratio > 0.0 && self.corpus.split_ratio < 1.0) {
            return Err(Error::usage("corpus.split_ratio must lie strictly between 0 and 1"));
        }
        if self.index.top_k == 0 {
            return Err(Error::usage("index.top_k must be at least 1"));
        }
        Ok(())
    }

    /// Training settings of a stage with the pipeline seed applied.
    pub fn stage_train(&self, finetune: bool) -> TrainConfig {
        let base = if finetune { self.finetune } else { self.train };
        TrainConfig { seed: self.seed, ..base }
    }
}
