//! `proofforge.toml`: one document holding every stage's settings. Relative
//! paths are resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use proofforge_core::checker::ExternalConfig;
use proofforge_core::cot::TrainingConfig;
use proofforge_core::digest::sha256_hex;
use proofforge_core::orchestrator::{HttpConfig, SamplingParams, DEFAULT_MAX_ATTEMPTS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub paths: Paths,
    #[serde(default = "default_max_attempts")]
    pub max_attempts: u32,
    /// Theorems proved concurrently.
    #[serde(default = "one")]
    pub concurrency: usize,
    /// Attempts dispatched concurrently within one theorem.
    #[serde(default = "one")]
    pub attempt_width: usize,
    #[serde(default = "yes")]
    pub include_context: bool,
    #[serde(default)]
    pub sampling: SamplingParams,
    /// Backend used by `prove` unless `--backend` names another.
    #[serde(default)]
    pub backend: Option<String>,
    /// Backend that writes step rationales in `build-cot`.
    #[serde(default)]
    pub cot_backend: Option<String>,
    #[serde(default)]
    pub backends: BTreeMap<String, BackendConfig>,
    #[serde(default)]
    pub checker: Option<CheckerConfig>,
    #[serde(default)]
    pub targets: Vec<Target>,
    #[serde(default)]
    pub ablation: Option<AblationConfig>,
    #[serde(default)]
    pub training: TrainingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    #[serde(default)]
    pub traces: Option<PathBuf>,
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    #[serde(default)]
    pub prompts: Option<PathBuf>,
    #[serde(default)]
    pub contexts: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths { traces: None, manifest: None, prompts: None, contexts: None, out: default_out() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Target {
    pub project: String,
    #[serde(default)]
    pub category: Option<String>,
    pub theory: PathBuf,
    /// All named lemmas of the theory when absent.
    #[serde(default)]
    pub lemmas: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackendConfig {
    Replay { responses: PathBuf },
    Http(HttpConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CheckerConfig {
    Mock { rules: PathBuf },
    External(ExternalConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationConfig {
    pub base_backend: String,
    pub cot_backend: String,
}

fn default_max_attempts() -> u32 {
    DEFAULT_MAX_ATTEMPTS
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub attempts: Option<u32>,
    pub concurrency: Option<usize>,
    pub backend: Option<String>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: PipelineConfig,
    /// SHA-256 of the canonical JSON form, taken after overrides and before
    /// path resolution.
    pub digest: String,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<PipelineConfig, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_vec(self).expect("config serializes"))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.attempts {
            self.max_attempts = n;
        }
        if let Some(n) = o.concurrency {
            self.concurrency = n;
        }
        if let Some(b) = &o.backend {
            self.backend = Some(b.clone());
        }
        if let Some(out) = &o.out {
            self.paths.out = out.clone();
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_attempts < 1 {
            return Err("max_attempts must be at least 1".into());
        }
        if self.concurrency < 1 || self.attempt_width < 1 {
            return Err("concurrency and attempt_width must be at least 1".into());
        }
        self.sampling.validate()?;
        let named = [self.backend.as_ref(), self.cot_backend.as_ref()]
            .into_iter()
            .flatten()
            .chain(self.ablation.iter().flat_map(|a| [&a.base_backend, &a.cot_backend]));
        for name in named {
            if !self.backends.contains_key(name) {
                return Err(format!("backend `{name}` is not defined under [backends]"));
            }
        }
        Ok(())
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let paths = &mut self.paths;
        for p in [&mut paths.traces, &mut paths.manifest, &mut paths.prompts, &mut paths.contexts]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut paths.out);
        for t in &mut self.targets {
            fix(&mut t.theory);
        }
        for b in self.backends.values_mut() {
            if let BackendConfig::Replay { responses } = b {
                fix(responses);
            }
        }
        match &mut self.checker {
            Some(CheckerConfig::Mock { rules }) => fix(rules),
            Some(CheckerConfig::External(x)) => fix(&mut x.workspace_dir),
            None => {}
        }
    }

    /// Input files that must exist; the output directory and the external
    /// checker workspace are created on demand.
    fn inputs(&self) -> Vec<&Path> {
        let p = &self.paths;
        let mut out: Vec<&Path> =
            [&p.traces, &p.manifest, &p.prompts, &p.contexts].into_iter().flatten().map(PathBuf::as_path).collect();
        out.extend(self.targets.iter().map(|t| t.theory.as_path()));
        out.extend(self.backends.values().filter_map(|b| match b {
            BackendConfig::Replay { responses } => Some(responses.as_path()),
            BackendConfig::Http(_) => None,
        }));
        if let Some(CheckerConfig::Mock { rules }) = &self.checker {
            out.push(rules);
        }
        out
    }
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<LoadedConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut config = PipelineConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    config.apply(overrides);
    config.validate()?;
    let digest = config.digest();
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    config.resolve(&base);
    if let Some(missing) = config.inputs().into_iter().find(|p| !p.exists()) {
        return Err(format!("{} does not exist", missing.display()));
    }
    Ok(LoadedConfig { config, digest })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
max_attempts = 8
backend = "replay"

[paths]
traces = "traces.jsonl"

[sampling]
temperature = 0.5
seed = 10

[backends.replay]
kind = "replay"
responses = "responses.jsonl"

[backends.remote]
kind = "http"
url = "http://localhost:8000/v1/chat/completions"
model = "prover"

[checker]
kind = "mock"
rules = "rules.jsonl"

[[targets]]
project = "demo"
category = "demo"
theory = "Demo.thy"
"#;

    #[test]
    fn parses_and_defaults() {
        let c = PipelineConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.max_attempts, 8);
        assert_eq!(c.concurrency, 1);
        assert!(c.include_context);
        assert_eq!(c.sampling.top_p, 0.95);
        assert_eq!(c.sampling.seed, Some(10));
        assert!(matches!(&c.backends["remote"], BackendConfig::Http(h) if h.retry_limit == 3));
        assert_eq!(c.paths.out, PathBuf::from("out"));
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(PipelineConfig::parse("max_attempt = 3").is_err());
        assert!(PipelineConfig::parse("[paths]\ntrace = \"x\"").is_err());
        assert!(PipelineConfig::parse("[backends.r]\nkind = \"replay\"\nresponses = \"r\"\nextra = 1").is_err());
        assert!(PipelineConfig::parse("[backends.h]\nkind = \"http\"\nurl = \"u\"\nmodel = \"m\"\nextra = 1").is_err());
    }

    #[test]
    fn invalid_values_fail_validation() {
        let mut c = PipelineConfig::parse(SAMPLE).unwrap();
        c.max_attempts = 0;
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::parse(SAMPLE).unwrap();
        c.backend = Some("missing".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn digest_is_stable_across_reserialization() {
        let c = PipelineConfig::parse(SAMPLE).unwrap();
        let again = PipelineConfig::parse(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.digest(), again.digest());
        let mut changed = c.clone();
        changed.max_attempts = 9;
        assert_ne!(c.digest(), changed.digest());
    }

    #[test]
    fn overrides_apply_before_digest() {
        let mut c = PipelineConfig::parse(SAMPLE).unwrap();
        let before = c.digest();
        c.apply(&Overrides { attempts: Some(3), backend: Some("remote".into()), ..Default::default() });
        assert_eq!(c.max_attempts, 3);
        assert_eq!(c.backend.as_deref(), Some("remote"));
        assert_ne!(c.digest(), before);
    }

    #[test]
    fn load_resolves_and_checks_paths() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("proofforge.toml");
        fs::write(&cfg, SAMPLE).unwrap();
        let err = load(&cfg, &Overrides::default()).unwrap_err();
        assert!(err.contains("traces.jsonl"), "{err}");
        for f in ["traces.jsonl", "responses.jsonl", "rules.jsonl", "Demo.thy"] {
            fs::write(dir.path().join(f), "").unwrap();
        }
        let loaded = load(&cfg, &Overrides::default()).unwrap();
        assert_eq!(loaded.config.paths.out, dir.path().join("out"));
        assert_eq!(loaded.config.targets[0].theory, dir.path().join("Demo.thy"));
    }
}
