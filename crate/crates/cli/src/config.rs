//! Run configuration: one TOML file, `${VAR}` / `${VAR:-default}` expansion in
//! string values, paths relative to the file, command-line overrides on top.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use promptevo_core::backends::{HttpEmbedder, HttpPerplexity, ServiceConfig};
use promptevo_core::evolution::{EvolutionConfig, StrategyLibrary};
use promptevo_core::harness::{AblationMode, DEFAULT_DEV_FRACTION};
use promptevo_core::llm::{
    CachedProvider, CompletionProvider, FileStore, HttpConfig, HttpProvider, InFlightLimiter,
    MemoryStore, MockProvider, MockScript, RequestSettings, RetryPolicy, DEFAULT_MAX_TOKENS,
    DEFAULT_TEMPERATURE,
};
use promptevo_core::metrics::{ComplexityConfig, MetricKind, MetricProviders, DEFAULT_NGRAM_ORDERS};
use promptevo_core::selection::FallbackTable;
use promptevo_core::templates::Templates;
use promptevo_core::TaskType;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUTPUT_DIR: &str = "promptevo-out";

#[derive(Debug, Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderSection {
    pub kind: ProviderKind,
    /// Mock script file; the built-in echo script when absent.
    pub script: Option<PathBuf>,
    pub endpoint: Option<String>,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: Option<String>,
    pub model_name: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub system_text: Option<String>,
    pub timeout_secs: u64,
    pub max_in_flight: Option<usize>,
    pub retry_attempts: u32,
    pub retry_base_delay_ms: u64,
    /// JSONL response cache; in-memory only when absent.
    pub cache: Option<PathBuf>,
}

impl Default for ProviderSection {
    fn default() -> Self {
        let retry = RetryPolicy::default();
        ProviderSection {
            kind: ProviderKind::Mock,
            script: None,
            endpoint: None,
            api_key_env: None,
            model_name: "mock".into(),
            temperature: DEFAULT_TEMPERATURE,
            max_tokens: DEFAULT_MAX_TOKENS,
            system_text: None,
            timeout_secs: 120,
            max_in_flight: None,
            retry_attempts: retry.attempts,
            retry_base_delay_ms: retry.base_delay_ms,
            cache: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub population_size: usize,
    pub generations: u32,
    pub tournament_size: usize,
    pub target_score: Option<f64>,
    pub elitism: bool,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let d = EvolutionConfig::default();
        EvolutionSection {
            population_size: d.population_size,
            generations: d.generations,
            tournament_size: d.tournament_size,
            target_score: d.target_score,
            elitism: d.elitism,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Offline,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSection {
    pub backend: BackendKind,
    pub service_url: Option<String>,
    pub embedding_dimension: Option<usize>,
    pub timeout_secs: u64,
    pub diversity_orders: Vec<usize>,
    pub complexity: ComplexityConfig,
}

impl Default for MetricsSection {
    fn default() -> Self {
        MetricsSection {
            backend: BackendKind::Offline,
            service_url: None,
            embedding_dimension: None,
            timeout_secs: 60,
            diversity_orders: DEFAULT_NGRAM_ORDERS.to_vec(),
            complexity: ComplexityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TemplateFiles {
    pub classification: Option<PathBuf>,
    pub selection: Option<PathBuf>,
    pub initialization: Option<PathBuf>,
    pub mutation: Option<PathBuf>,
}

/// The resolved configuration; serialized as the run's config snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub dataset: Option<PathBuf>,
    /// Report label; the dataset file stem when absent.
    pub dataset_name: Option<String>,
    pub limit: Option<usize>,
    pub mode: AblationMode,
    #[serde(skip_serializing)]
    pub output_dir: Option<PathBuf>,
    pub task_description: Option<String>,
    pub selection_examples: usize,
    pub dev_fraction: f64,
    pub strategies: Option<PathBuf>,
    pub provider: ProviderSection,
    pub evolution: EvolutionSection,
    pub metrics: MetricsSection,
    pub templates: TemplateFiles,
    /// Per-task-type weight overrides for the metric-selection fallback.
    pub fallback: BTreeMap<TaskType, BTreeMap<MetricKind, f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: DEFAULT_SEED,
            dataset: None,
            dataset_name: None,
            limit: None,
            mode: AblationMode::None,
            output_dir: None,
            task_description: None,
            selection_examples: 1,
            dev_fraction: DEFAULT_DEV_FRACTION,
            strategies: None,
            provider: ProviderSection::default(),
            evolution: EvolutionSection::default(),
            metrics: MetricsSection::default(),
            templates: TemplateFiles::default(),
            fallback: BTreeMap::new(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub dataset: Option<PathBuf>,
    pub mode: Option<AblationMode>,
    pub seed: Option<u64>,
    pub limit: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Expands `${NAME}` and `${NAME:-default}` using `lookup`.
pub fn interpolate(
    text: &str,
    lookup: &dyn Fn(&str) -> Option<String>,
) -> Result<String, ConfigError> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let body = &rest[start + 2..];
        let Some(end) = body.find('}') else {
            return err(format!("unterminated `${{` in {text:?}"));
        };
        let expr = &body[..end];
        let (name, default) = match expr.split_once(":-") {
            Some((n, d)) => (n, Some(d)),
            None => (expr, None),
        };
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return err(format!("invalid variable name {name:?} in {text:?}"));
        }
        match (lookup(name).filter(|v| !v.is_empty()), default) {
            (Some(v), _) => out.push_str(&v),
            (None, Some(d)) => out.push_str(d),
            (None, None) => return err(format!("environment variable {name} is not set")),
        }
        rest = &body[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn interpolate_value(
    value: &mut toml::Value,
    lookup: &dyn Fn(&str) -> Option<String>,
) -> Result<(), ConfigError> {
    match value {
        toml::Value::String(s) => *s = interpolate(s, lookup)?,
        toml::Value::Array(items) => {
            for v in items {
                interpolate_value(v, lookup)?;
            }
        }
        toml::Value::Table(t) => {
            for (_, v) in t.iter_mut() {
                interpolate_value(v, lookup)?;
            }
        }
        _ => {}
    }
    Ok(())
}

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl RunConfig {
    /// Parses config text; relative paths are resolved against `base`.
    pub fn from_toml(
        text: &str,
        base: &Path,
        lookup: &dyn Fn(&str) -> Option<String>,
    ) -> Result<Self, ConfigError> {
        let mut value: toml::Value =
            toml::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))?;
        interpolate_value(&mut value, lookup)?;
        let mut cfg: RunConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError(format!("config: {e}")))?;
        rebase(base, &mut cfg.dataset);
        rebase(base, &mut cfg.output_dir);
        rebase(base, &mut cfg.strategies);
        rebase(base, &mut cfg.provider.script);
        rebase(base, &mut cfg.provider.cache);
        rebase(base, &mut cfg.templates.classification);
        rebase(base, &mut cfg.templates.selection);
        rebase(base, &mut cfg.templates.initialization);
        rebase(base, &mut cfg.templates.mutation);
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("config file {}: {e}", p.display())))?;
                let base = p.parent().unwrap_or(Path::new("."));
                Self::from_toml(&text, base, &|k| std::env::var(k).ok())
                    .map_err(|e| ConfigError(format!("{}: {e}", p.display())))?
            }
            None => RunConfig::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.dataset {
            self.dataset = Some(d.clone());
        }
        if let Some(m) = o.mode {
            self.mode = m;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(l) = o.limit {
            self.limit = Some(l);
        }
        if let Some(out) = &o.out {
            self.output_dir = Some(out.clone());
        }
    }

    /// Checks referenced files and value ranges.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let must_exist = |what: &str, p: &Option<PathBuf>| -> Result<(), ConfigError> {
            match p {
                Some(path) if !path.is_file() => {
                    err(format!("{what} file not found: {}", path.display()))
                }
                _ => Ok(()),
            }
        };
        match &self.dataset {
            None => return err("no dataset given (set `dataset` in the config or pass --dataset)"),
            Some(_) => must_exist("dataset", &self.dataset)?,
        }
        must_exist("strategy library", &self.strategies)?;
        must_exist("mock script", &self.provider.script)?;
        must_exist("classification template", &self.templates.classification)?;
        must_exist("selection template", &self.templates.selection)?;
        must_exist("initialization template", &self.templates.initialization)?;
        must_exist("mutation template", &self.templates.mutation)?;
        if self.limit == Some(0) {
            return err("limit must be positive");
        }
        if self.selection_examples == 0 {
            return err("selection_examples must be positive");
        }
        if !(self.dev_fraction > 0.0 && self.dev_fraction < 1.0) {
            return err(format!("dev_fraction must be in (0, 1), got {}", self.dev_fraction));
        }
        self.evolution_config()
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        self.request_settings()
            .request("x")
            .validate()
            .map_err(|e| ConfigError(format!("provider: {e}")))?;
        if self.provider.kind == ProviderKind::Http {
            if self.provider.endpoint.as_deref().unwrap_or("").is_empty() {
                return err("provider.endpoint is required for the http provider");
            }
            if let Some(var) = &self.provider.api_key_env {
                if std::env::var(var).map(|v| v.is_empty()).unwrap_or(true) {
                    return err(format!("credential variable {var} is not set"));
                }
            }
        }
        if self.provider.max_in_flight == Some(0) {
            return err("provider.max_in_flight must be positive");
        }
        if self.metrics.backend == BackendKind::Http
            && self.metrics.service_url.as_deref().unwrap_or("").is_empty()
        {
            return err("metrics.service_url is required for the http metric backend");
        }
        if self.metrics.diversity_orders.is_empty() || self.metrics.diversity_orders.contains(&0) {
            return err("metrics.diversity_orders must be non-empty positive integers");
        }
        self.metrics
            .complexity
            .validate()
            .map_err(|e| ConfigError(format!("metrics.complexity: {e}")))?;
        self.fallback_table()?;
        Ok(())
    }

    pub fn dataset_path(&self) -> &Path {
        self.dataset.as_deref().expect("validated config has a dataset")
    }

    pub fn dataset_label(&self) -> String {
        self.dataset_name.clone().unwrap_or_else(|| {
            self.dataset_path()
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into())
        })
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    pub fn evolution_config(&self) -> EvolutionConfig {
        let e = &self.evolution;
        EvolutionConfig {
            population_size: e.population_size,
            generations: e.generations,
            tournament_size: e.tournament_size,
            target_score: e.target_score,
            seed: self.seed,
            elitism: e.elitism,
        }
    }

    pub fn request_settings(&self) -> RequestSettings {
        let p = &self.provider;
        RequestSettings {
            model_name: p.model_name.clone(),
            temperature: p.temperature,
            max_tokens: p.max_tokens,
            system_text: p.system_text.clone(),
        }
    }

    pub fn fallback_table(&self) -> Result<FallbackTable, ConfigError> {
        FallbackTable::default()
            .with_overrides(self.fallback.clone())
            .map_err(|e| ConfigError(format!("fallback: {e}")))
    }

    pub fn library(&self) -> Result<StrategyLibrary, ConfigError> {
        match &self.strategies {
            Some(p) => StrategyLibrary::load(p).map_err(|e| ConfigError(format!("{}: {e}", p.display()))),
            None => Ok(StrategyLibrary::default()),
        }
    }

    pub fn templates(&self) -> Result<Templates, ConfigError> {
        let mut t = Templates::default();
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|e| ConfigError(format!("{}: {e}", p.display())))
        };
        let files = &self.templates;
        if let Some(p) = &files.classification {
            t.classification = read(p)?;
        }
        if let Some(p) = &files.selection {
            t.selection = read(p)?;
        }
        if let Some(p) = &files.initialization {
            t.initialization = read(p)?;
        }
        if let Some(p) = &files.mutation {
            t.mutation = read(p)?;
        }
        t.validate().map_err(|e| ConfigError(format!("templates: {e}")))?;
        Ok(t)
    }

    fn retry(&self) -> RetryPolicy {
        RetryPolicy {
            attempts: self.provider.retry_attempts,
            base_delay_ms: self.provider.retry_base_delay_ms,
        }
    }

    /// The completion provider, wrapped in a response cache.
    pub fn llm(&self, limiter: Option<Arc<InFlightLimiter>>) -> Result<Arc<CachedProvider>, ConfigError> {
        let p = &self.provider;
        let inner: Arc<dyn CompletionProvider> = match p.kind {
            ProviderKind::Mock => {
                let script = match &p.script {
                    Some(path) => MockScript::load(path).map_err(|e| ConfigError(e.to_string()))?,
                    None => MockScript::echo(),
                };
                Arc::new(MockProvider::new(script))
            }
            ProviderKind::Http => {
                let mut http = HttpConfig::new(p.endpoint.clone().unwrap_or_default());
                http.api_key = match &p.api_key_env {
                    Some(var) => Some(std::env::var(var).map_err(|_| {
                        ConfigError(format!("credential variable {var} is not set"))
                    })?),
                    None => None,
                };
                http.timeout = Duration::from_secs(p.timeout_secs);
                http.retry = self.retry();
                http.limiter = limiter;
                Arc::new(HttpProvider::new(http))
            }
        };
        let cached = match &p.cache {
            Some(path) => {
                let store = FileStore::open(path)
                    .map_err(|e| ConfigError(format!("cache {}: {e}", path.display())))?;
                CachedProvider::new(inner, Arc::new(store))
            }
            None => CachedProvider::new(inner, Arc::new(MemoryStore::new())),
        };
        Ok(Arc::new(cached))
    }

    pub fn metric_providers(&self, limiter: Option<Arc<InFlightLimiter>>) -> MetricProviders {
        let m = &self.metrics;
        let mut providers = MetricProviders::offline();
        providers.diversity_orders = m.diversity_orders.clone();
        providers.complexity = m.complexity.clone();
        if m.backend == BackendKind::Http {
            let mut svc = ServiceConfig::new(m.service_url.clone().unwrap_or_default());
            svc.timeout = Duration::from_secs(m.timeout_secs);
            svc.retry = self.retry();
            svc.limiter = limiter;
            providers.embedder = Some(Arc::new(HttpEmbedder::new(&svc, m.embedding_dimension)));
            providers.perplexity = Some(Arc::new(HttpPerplexity::new(&svc)));
        }
        providers
    }

    pub fn limiter(&self) -> Option<Arc<InFlightLimiter>> {
        self.provider
            .max_in_flight
            .map(|n| Arc::new(InFlightLimiter::new(n)))
    }

    /// The config snapshot written next to the run's artifacts.
    pub fn snapshot(&self) -> Result<String, ConfigError> {
        toml::to_string(self).map_err(|e| ConfigError(format!("serializing config: {e}")))
    }
}
