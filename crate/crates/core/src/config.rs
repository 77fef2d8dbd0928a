//! Plain-text `key = value` configuration for backends and specs.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are
//! case-sensitive; unknown keys are an error so typos surface early.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use thiserror::Error;

use crate::backend::{EditMode, HttpBackendConfig};
use crate::catalog::{builtin_instance, ConstraintKind, DomainKind, ModelSpec, SpecError, VariableKind};
use crate::orchestrator::{DEFAULT_EDIT_MODEL, DEFAULT_GENERATE_MODEL};

pub const DEFAULT_API_KEY_ENV: &str = "MZN_AUTOGEN_API_KEY";
pub const DEFAULT_TIMEOUT_MS: u64 = 60_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("bad value for `{key}`: {message}")]
    BadValue { key: String, message: String },
    #[error("no built-in instance with id {0}")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Parses `key = value` lines, checking keys against `allowed`.
pub fn parse_key_values(text: &str, allowed: &[&str]) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or(ConfigError::Malformed { line })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Malformed { line });
        }
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey { line, key: key.into() });
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(ConfigError::DuplicateKey { line, key: key.into() });
        }
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::BadValue { key: key.into(), message: message.into() }
}

fn number<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| bad(key, format!("`{v}` is not a number"))))
        .transpose()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendConfig {
    pub endpoint_url: String,
    pub generate_model: String,
    pub edit_model: String,
    /// Name of the environment variable that holds the API key.
    pub api_key_env: String,
    pub timeout_ms: u64,
    pub edit_mode: EditMode,
}

const BACKEND_KEYS: &[&str] = &[
    "endpoint_url",
    "generate_model",
    "edit_model",
    "api_key_env",
    "timeout_ms",
    "edit_mode",
];

impl BackendConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let map = parse_key_values(text, BACKEND_KEYS)?;
        let endpoint_url = map.get("endpoint_url").cloned().ok_or(ConfigError::Missing("endpoint_url"))?;
        if !(endpoint_url.starts_with("http://") || endpoint_url.starts_with("https://")) {
            return Err(bad("endpoint_url", "must start with http:// or https://"));
        }
        let get = |k: &str, default: &str| map.get(k).cloned().unwrap_or_else(|| default.to_string());
        let timeout_ms = number(&map, "timeout_ms")?.unwrap_or(DEFAULT_TIMEOUT_MS);
        if timeout_ms == 0 {
            return Err(bad("timeout_ms", "must be positive"));
        }
        let edit_mode = match map.get("edit_mode").map(String::as_str) {
            None | Some("native") => EditMode::Native,
            Some("completion") => EditMode::ViaCompletion,
            Some(other) => return Err(bad("edit_mode", format!("`{other}` is not native or completion"))),
        };
        Ok(BackendConfig {
            endpoint_url,
            generate_model: get("generate_model", DEFAULT_GENERATE_MODEL),
            edit_model: get("edit_model", DEFAULT_EDIT_MODEL),
            api_key_env: get("api_key_env", DEFAULT_API_KEY_ENV),
            timeout_ms,
            edit_mode,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&read(path)?)
    }

    /// Resolves the key from the environment. A missing variable yields
    /// `None`; the endpoint decides whether that is acceptable.
    pub fn http_config(&self) -> HttpBackendConfig {
        HttpBackendConfig {
            endpoint_url: self.endpoint_url.clone(),
            api_key: std::env::var(&self.api_key_env).ok().filter(|k| !k.is_empty()),
            timeout: Duration::from_millis(self.timeout_ms),
            edit_mode: self.edit_mode,
        }
    }
}

const SPEC_KEYS: &[&str] = &[
    "id",
    "variable_kind",
    "variable_count",
    "domain",
    "constraint",
    "domain_lo",
    "domain_hi",
];

/// Parses a spec file.
///
/// ```text
/// id = 11
/// variable_kind = array      # discrete | array
/// variable_count = 4
/// domain = defined           # open | defined
/// constraint = all_diff      # no | yes | all_diff
/// domain_lo = 1
/// domain_hi = 4
/// ```
pub fn parse_spec(text: &str) -> Result<ModelSpec, ConfigError> {
    let map = parse_key_values(text, SPEC_KEYS)?;
    let req = |k: &'static str| map.get(k).map(String::as_str).ok_or(ConfigError::Missing(k));
    let id = number(&map, "id")?.ok_or(ConfigError::Missing("id"))?;
    let variable_count = number(&map, "variable_count")?.ok_or(ConfigError::Missing("variable_count"))?;
    let variable_kind = match req("variable_kind")? {
        "discrete" => VariableKind::DiscreteScalars,
        "array" => VariableKind::DiscreteArray,
        other => return Err(bad("variable_kind", format!("`{other}` is not discrete or array"))),
    };
    let domain_kind = match req("domain")? {
        "open" => DomainKind::Open,
        "defined" => DomainKind::Defined,
        other => return Err(bad("domain", format!("`{other}` is not open or defined"))),
    };
    let constraint_kind = match req("constraint")? {
        "no" => ConstraintKind::None,
        "yes" => ConstraintKind::Simple,
        "all_diff" => ConstraintKind::AllDifferent,
        other => return Err(bad("constraint", format!("`{other}` is not no, yes or all_diff"))),
    };
    let lo: Option<i64> = number(&map, "domain_lo")?;
    let hi: Option<i64> = number(&map, "domain_hi")?;
    let defined_domain = match (lo, hi) {
        (Some(lo), Some(hi)) => Some((lo, hi)),
        (None, None) => None,
        _ => return Err(bad("domain_lo", "domain_lo and domain_hi must be given together")),
    };
    let spec = ModelSpec {
        id,
        variable_kind,
        variable_count,
        domain_kind,
        constraint_kind,
        defined_domain,
    };
    spec.validate()?;
    Ok(spec)
}

/// Resolves a `--spec` argument: `builtin:N` or a path to a spec file.
pub fn resolve_spec(arg: &str) -> Result<ModelSpec, ConfigError> {
    if let Some(n) = arg.strip_prefix("builtin:") {
        return n
            .parse()
            .ok()
            .and_then(builtin_instance)
            .ok_or_else(|| ConfigError::UnknownBuiltin(n.to_string()));
    }
    parse_spec(&read(Path::new(arg))?)
}
