//! Article title → concept mappings, from an offline TSV file or a SPARQL
//! endpoint.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use belforge_core::Cui;
use belforge_core::corpus::{ArticleCuiMap, is_qid};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fsutil;

/// Environment variable naming the SPARQL response cache directory.
pub const CACHE_ENV: &str = "BELFORGE_CACHE_DIR";

/// Rows `qid<TAB>cui<TAB>article title`.
pub fn load_tsv_map(path: &Path) -> Result<ArticleCuiMap> {
    let text = fsutil::read_string(path)?;
    Ok(ArticleCuiMap::from_tsv(text.lines()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparqlConfig {
    pub endpoint: String,
    /// Site the articles belong to, e.g. `https://nl.wikipedia.org/`.
    pub site: String,
    /// Property holding the concept identifier.
    pub property: String,
    pub label_language: String,
    pub timeout_secs: u64,
    /// Extra attempts after the first failure.
    pub retries: u32,
    pub retry_delay_ms: u64,
    pub user_agent: String,
}

impl Default for SparqlConfig {
    fn default() -> Self {
        SparqlConfig {
            endpoint: "https://query.wikidata.org/sparql".into(),
            site: "https://nl.wikipedia.org/".into(),
            property: "P2892".into(),
            label_language: "nl".into(),
            timeout_secs: 60,
            retries: 3,
            retry_delay_ms: 2000,
            user_agent: concat!("belforge/", env!("CARGO_PKG_VERSION")).into(),
        }
    }
}

pub fn build_query(cfg: &SparqlConfig) -> String {
    format!(
        "SELECT ?concept ?conceptLabel ?cui ?article WHERE {{\n  \
         ?concept wdt:{prop} ?cui .\n  \
         ?article schema:about ?concept .\n  \
         ?article schema:isPartOf <{site}> .\n  \
         SERVICE wikibase:label {{ bd:serviceParam wikibase:language \"{lang}\" }}\n}}",
        prop = cfg.property,
        site = cfg.site,
        lang = cfg.label_language,
    )
}

#[derive(Deserialize)]
struct SparqlJson {
    results: SparqlResults,
}

#[derive(Deserialize)]
struct SparqlResults {
    bindings: Vec<serde_json::Map<String, serde_json::Value>>,
}

fn binding<'a>(b: &'a serde_json::Map<String, serde_json::Value>, var: &str) -> Option<&'a str> {
    b.get(var)?.get("value")?.as_str()
}

/// Title of an article URL such as `https://nl.wikipedia.org/wiki/Hart_infarct`.
pub fn article_title(url: &str) -> Option<String> {
    let (_, raw) = url.split_once("/wiki/")?;
    let title = percent_encoding::percent_decode_str(raw).decode_utf8().ok()?;
    (!title.trim().is_empty()).then(|| title.into_owned())
}

/// Reads standard SPARQL JSON results with `concept`, `cui` and `article`
/// bindings. Rows missing a variable or holding an invalid id are counted
/// as malformed.
pub fn parse_sparql_json(body: &str) -> Result<ArticleCuiMap> {
    let parsed: SparqlJson = serde_json::from_str(body).map_err(|e| Error::data(format!("SPARQL response: {e}")))?;
    let mut map = ArticleCuiMap::new();
    for b in &parsed.results.bindings {
        let row = (|| {
            let qid = binding(b, "concept")?.rsplit('/').next()?;
            let cui = Cui::new(binding(b, "cui")?.trim()).ok()?;
            let title = article_title(binding(b, "article")?)?;
            is_qid(qid).then(|| (qid.to_string(), cui, title))
        })();
        match row {
            Some((qid, cui, title)) => {
                map.insert(&title, &qid, cui);
            }
            None => map.malformed += 1,
        }
    }
    Ok(map)
}

pub struct SparqlClient {
    cfg: SparqlConfig,
    cache_dir: Option<PathBuf>,
}

impl SparqlClient {
    pub fn new(cfg: SparqlConfig) -> Self {
        SparqlClient { cfg, cache_dir: None }
    }

    /// Uses the cache directory named by `BELFORGE_CACHE_DIR`, if set.
    pub fn from_env(cfg: SparqlConfig) -> Self {
        let cache_dir = std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        SparqlClient { cfg, cache_dir }
    }

    pub fn with_cache_dir(mut self, dir: Option<PathBuf>) -> Self {
        self.cache_dir = dir;
        self
    }

    fn cache_path(&self, query: &str) -> Option<PathBuf> {
        let dir = self.cache_dir.as_ref()?;
        let digest = Sha256::digest(format!("{}\n{}", self.cfg.endpoint, query).as_bytes());
        let mut name = String::with_capacity(70);
        for b in digest.iter() {
            let _ = write!(name, "{b:02x}");
        }
        name.push_str(".json");
        Some(dir.join(name))
    }

    /// Raw response body. A cached body is returned without a request;
    /// otherwise failed requests and HTTP statuses of 400 or more are retried.
    pub fn fetch(&self) -> Result<String> {
        let query = build_query(&self.cfg);
        let cache = self.cache_path(&query);
        if let Some(p) = cache.as_ref().filter(|p| p.is_file()) {
            log::info!("using cached SPARQL response {}", p.display());
            return fsutil::read_string(p);
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(self.cfg.timeout_secs)))
            .http_status_as_error(false)
            .user_agent(self.cfg.user_agent.as_str())
            .build()
            .into();
        let mut last = String::new();
        for attempt in 0..=self.cfg.retries {
            if attempt > 0 {
                log::warn!("SPARQL attempt {attempt} failed ({last}); retrying");
                std::thread::sleep(Duration::from_millis(self.cfg.retry_delay_ms << (attempt - 1).min(6)));
            }
            let res = agent
                .get(&self.cfg.endpoint)
                .query("query", &query)
                .query("format", "json")
                .header("Accept", "application/sparql-results+json")
                .call();
            match res {
                Ok(mut resp) if resp.status().as_u16() < 400 => match resp.body_mut().read_to_string() {
                    Ok(body) => {
                        if let Some(p) = &cache {
                            fsutil::write_bytes_atomic(p, body.as_bytes())?;
                        }
                        return Ok(body);
                    }
                    Err(e) => last = e.to_string(),
                },
                Ok(resp) => last = format!("HTTP {}", resp.status().as_u16()),
                Err(e) => last = e.to_string(),
            }
        }
        Err(Error::Network(format!("{}: {last}", self.cfg.endpoint)))
    }

    pub fn load_map(&self) -> Result<ArticleCuiMap> {
        parse_sparql_json(&self.fetch()?)
    }
}
