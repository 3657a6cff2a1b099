//! HTTP client for producing candidate translations from an external model
//! server.
//!
//! The provider contract is deliberately loose: any endpoint that accepts a
//! JSON POST and returns JSON can be driven by configuring the request
//! template and the dot-separated path of the translation string in the
//! response. The default template speaks the Ollama-style `/api/generate`
//! protocol.
//!
//! Placeholders inside template strings are `{{text}}`, `{{model}}`,
//! `{{source_lang}}`, `{{target_lang}}` and `{{temperature}}`; a string that
//! is exactly `"{{temperature}}"` is replaced by a JSON *number* so samplers
//! receive a real value.
//!
//! The batch runner preserves input order regardless of completion order,
//! retries each line up to three times with exponential backoff, and records
//! failures per line instead of aborting the batch. Output of a batch is
//! pre-annotation material only: the harness never emits gender tags.
//!
//! Determinism is not promised, not even at low temperature — the sidecar
//! manifest records model id, temperature and wall-clock timestamps so every
//! batch stays attributable.

use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::TOOLKIT_VERSION;

/// Default generation temperature for reproducibility-oriented batches.
pub const DEFAULT_TEMPERATURE: f64 = 0.2;

/// Ollama-style request body; override for other providers.
pub const DEFAULT_REQUEST_TEMPLATE: &str = r#"{
  "model": "{{model}}",
  "prompt": "Translate the following text from {{source_lang}} to {{target_lang}}. Reply with the translation only.\n\n{{text}}",
  "stream": false,
  "options": {"temperature": "{{temperature}}"}
}"#;

/// Where the translation string lives in the provider's JSON response.
pub const DEFAULT_RESPONSE_PATH: &str = "response";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    #[error("temperature {0} is outside [0, 2]")]
    InvalidTemperature(f64),
    #[error("request template is not valid JSON: {0}")]
    InvalidTemplate(String),
    #[error("parallelism must be at least 1")]
    InvalidParallelism,
}

/// Connection and sampling settings for one batch.
#[derive(Debug, Clone)]
pub struct ProviderConfig {
    pub endpoint: String,
    pub model: String,
    pub source_lang: String,
    pub target_lang: String,
    pub temperature: f64,
    pub request_template: String,
    pub response_path: String,
    /// Concurrent in-flight requests; 1 means strictly sequential.
    pub parallelism: usize,
    pub max_attempts: u32,
    pub retry_base_delay: Duration,
    pub request_timeout: Duration,
}

impl ProviderConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> ProviderConfig {
        ProviderConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            source_lang: "en".to_string(),
            target_lang: "it".to_string(),
            temperature: DEFAULT_TEMPERATURE,
            request_template: DEFAULT_REQUEST_TEMPLATE.to_string(),
            response_path: DEFAULT_RESPONSE_PATH.to_string(),
            parallelism: 1,
            max_attempts: 3,
            retry_base_delay: Duration::from_millis(250),
            request_timeout: Duration::from_secs(120),
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if !(0.0..=2.0).contains(&self.temperature) || self.temperature.is_nan() {
            return Err(ProviderError::InvalidTemperature(self.temperature));
        }
        if self.parallelism == 0 {
            return Err(ProviderError::InvalidParallelism);
        }
        serde_json::from_str::<serde_json::Value>(&self.request_template)
            .map_err(|e| ProviderError::InvalidTemplate(e.to_string()))?;
        Ok(())
    }

    /// One request after validation and placeholder substitution.
    pub fn request(&self, text: &str) -> Result<ProviderRequest, ProviderError> {
        self.validate()?;
        Ok(ProviderRequest {
            body: instantiate_template(
                &serde_json::from_str(&self.request_template).expect("validated above"),
                text,
                self,
            ),
        })
    }
}

/// A fully instantiated request body ready to POST.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderRequest {
    pub body: serde_json::Value,
}

/// A successful provider answer for one line.
#[derive(Debug, Clone, PartialEq)]
pub struct ProviderResponse {
    pub translation: String,
    pub latency: Duration,
    /// Full provider payload, kept for auditing.
    pub raw: serde_json::Value,
}

/// Result of one input line after retries.
#[derive(Debug, Clone, PartialEq)]
pub struct LineOutcome {
    /// 1-based line number in the original input.
    pub id: usize,
    pub source: String,
    pub attempts: u32,
    pub result: Result<ProviderResponse, String>,
}

fn instantiate_template(
    template: &serde_json::Value,
    text: &str,
    config: &ProviderConfig,
) -> serde_json::Value {
    use serde_json::Value;
    match template {
        Value::String(s) if s == "{{temperature}}" => {
            Value::Number(serde_json::Number::from_f64(config.temperature).expect("finite"))
        }
        Value::String(s) => Value::String(
            s.replace("{{text}}", text)
                .replace("{{model}}", &config.model)
                .replace("{{source_lang}}", &config.source_lang)
                .replace("{{target_lang}}", &config.target_lang)
                .replace("{{temperature}}", &config.temperature.to_string()),
        ),
        Value::Array(items) => Value::Array(
            items
                .iter()
                .map(|item| instantiate_template(item, text, config))
                .collect(),
        ),
        Value::Object(map) => Value::Object(
            map.iter()
                .map(|(k, v)| (k.clone(), instantiate_template(v, text, config)))
                .collect(),
        ),
        other => other.clone(),
    }
}

/// Walks a dot-separated path through a JSON value; numeric segments index
/// arrays.
fn extract_path<'v>(value: &'v serde_json::Value, path: &str) -> Option<&'v serde_json::Value> {
    let mut current = value;
    for segment in path.split('.') {
        current = match current {
            serde_json::Value::Object(map) => map.get(segment)?,
            serde_json::Value::Array(items) => items.get(segment.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    Some(current)
}

fn attempt(
    client: &reqwest::blocking::Client,
    config: &ProviderConfig,
    body: &serde_json::Value,
) -> Result<ProviderResponse, String> {
    let started = Instant::now();
    let response = client
        .post(&config.endpoint)
        .json(body)
        .send()
        .map_err(|e| format!("transport error: {e}"))?;
    let status = response.status();
    if !status.is_success() {
        return Err(format!("provider returned status {status}"));
    }
    let raw: serde_json::Value = response
        .json()
        .map_err(|e| format!("response is not JSON: {e}"))?;
    let translation = extract_path(&raw, &config.response_path)
        .and_then(|v| v.as_str())
        .ok_or_else(|| {
            format!(
                "response field {:?} is missing or not a string",
                config.response_path
            )
        })?
        .to_string();
    if translation.is_empty() {
        return Err("provider returned an empty translation".to_string());
    }
    Ok(ProviderResponse {
        translation,
        latency: started.elapsed(),
        raw,
    })
}

fn run_line(
    client: &reqwest::blocking::Client,
    config: &ProviderConfig,
    id: usize,
    source: &str,
) -> LineOutcome {
    let body = match config.request(source) {
        Ok(request) => request.body,
        Err(e) => {
            return LineOutcome {
                id,
                source: source.to_string(),
                attempts: 0,
                result: Err(e.to_string()),
            }
        }
    };
    let mut last_error = String::new();
    for attempt_no in 1..=config.max_attempts {
        match attempt(client, config, &body) {
            Ok(response) => {
                return LineOutcome {
                    id,
                    source: source.to_string(),
                    attempts: attempt_no,
                    result: Ok(response),
                }
            }
            Err(error) => last_error = error,
        }
        if attempt_no < config.max_attempts {
            // 1x, 2x, 4x, ... of the base delay.
            let factor = 1u32 << (attempt_no - 1).min(16);
            thread::sleep(config.retry_base_delay * factor);
        }
    }
    LineOutcome {
        id,
        source: source.to_string(),
        attempts: config.max_attempts,
        result: Err(last_error),
    }
}

/// Translates `lines` (1-based ids attached), preserving input order in the
/// result no matter how requests complete.
///
/// Requests run with at most `config.parallelism` in flight; per-line
/// failures are recorded in the returned outcomes rather than aborting the
/// batch.
pub fn translate_batch(
    lines: &[(usize, String)],
    config: &ProviderConfig,
) -> Result<Vec<LineOutcome>, ProviderError> {
    config.validate()?;
    let client = reqwest::blocking::Client::builder()
        .timeout(config.request_timeout)
        .build()
        .expect("client construction cannot fail with these options");

    if config.parallelism <= 1 || lines.len() <= 1 {
        return Ok(lines
            .iter()
            .map(|(id, source)| run_line(&client, config, *id, source))
            .collect());
    }

    let queue = {
        let (sender, receiver) = mpsc::channel::<(usize, usize, String)>();
        for (slot, (id, source)) in lines.iter().enumerate() {
            sender.send((slot, *id, source.clone())).expect("queue send");
        }
        Arc::new(Mutex::new(receiver))
    };
    let results: Arc<Mutex<Vec<Option<LineOutcome>>>> =
        Arc::new(Mutex::new(vec![None; lines.len()]));

    thread::scope(|scope| {
        for _ in 0..config.parallelism.min(lines.len()) {
            let queue = Arc::clone(&queue);
            let results = Arc::clone(&results);
            let client = &client;
            scope.spawn(move || loop {
                let job = queue.lock().expect("queue lock").try_recv();
                match job {
                    Ok((slot, id, source)) => {
                        let outcome = run_line(client, config, id, &source);
                        results.lock().expect("results lock")[slot] = Some(outcome);
                    }
                    Err(_) => break,
                }
            });
        }
    });

    let results = Arc::try_unwrap(results)
        .expect("workers joined")
        .into_inner()
        .expect("results lock");
    Ok(results
        .into_iter()
        .map(|slot| slot.expect("every slot filled"))
        .collect())
}

/// TSV rendering of a batch: `id<TAB>source<TAB>translation`, successful
/// lines only, ready for manual tagging. Tabs and line breaks inside a
/// translation are flattened to single spaces so the file stays one row per
/// line.
pub fn render_tsv(outcomes: &[LineOutcome]) -> Vec<u8> {
    let mut out = String::new();
    for outcome in outcomes {
        if let Ok(response) = &outcome.result {
            let sanitize = |s: &str| {
                s.split(['\t', '\n', '\r'])
                    .filter(|p| !p.is_empty())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            out.push_str(&format!(
                "{}\t{}\t{}\n",
                outcome.id,
                sanitize(&outcome.source),
                sanitize(&response.translation)
            ));
        }
    }
    out.into_bytes()
}

/// Provenance sidecar for one batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchManifest {
    pub toolkit_version: String,
    pub endpoint: String,
    pub model: String,
    pub source_lang: String,
    pub target_lang: String,
    pub temperature: f64,
    pub parallelism: usize,
    pub started_at: String,
    pub finished_at: String,
    pub lines: Vec<ManifestLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestLine {
    pub id: usize,
    pub status: String,
    pub attempts: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BatchManifest {
    pub fn new(
        config: &ProviderConfig,
        outcomes: &[LineOutcome],
        started_at: chrono::DateTime<chrono::Utc>,
        finished_at: chrono::DateTime<chrono::Utc>,
    ) -> BatchManifest {
        BatchManifest {
            toolkit_version: TOOLKIT_VERSION.to_string(),
            endpoint: config.endpoint.clone(),
            model: config.model.clone(),
            source_lang: config.source_lang.clone(),
            target_lang: config.target_lang.clone(),
            temperature: config.temperature,
            parallelism: config.parallelism,
            started_at: started_at.to_rfc3339(),
            finished_at: finished_at.to_rfc3339(),
            lines: outcomes
                .iter()
                .map(|outcome| ManifestLine {
                    id: outcome.id,
                    status: if outcome.result.is_ok() { "ok" } else { "failed" }.to_string(),
                    attempts: outcome.attempts,
                    latency_ms: outcome
                        .result
                        .as_ref()
                        .ok()
                        .map(|r| r.latency.as_millis() as u64),
                    error: outcome.result.as_ref().err().cloned(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ProviderConfig {
        ProviderConfig::new("http://127.0.0.1:1/api/generate", "test-model")
    }

    #[test]
    fn default_temperature_is_in_the_request_body() {
        let request = config().request("I am happy").unwrap();
        assert_eq!(request.body["options"]["temperature"], 0.2);
        assert_eq!(request.body["model"], "test-model");
        let prompt = request.body["prompt"].as_str().unwrap();
        assert!(prompt.contains("I am happy"));
        assert!(prompt.contains("from en to it"));
    }

    #[test]
    fn temperature_is_validated_to_unit_range() {
        let mut cfg = config();
        cfg.temperature = 2.5;
        assert_eq!(
            cfg.validate(),
            Err(ProviderError::InvalidTemperature(2.5))
        );
        cfg.temperature = 0.0;
        assert!(cfg.validate().is_ok());
        cfg.temperature = 2.0;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn template_must_be_json() {
        let mut cfg = config();
        cfg.request_template = "not json".to_string();
        assert!(matches!(
            cfg.validate(),
            Err(ProviderError::InvalidTemplate(_))
        ));
    }

    #[test]
    fn placeholders_substitute_in_nested_structures() {
        let mut cfg = config();
        cfg.request_template = r#"{"messages":[{"role":"user","content":"{{text}} ({{model}}, t={{temperature}})"}],"temp":"{{temperature}}"}"#.to_string();
        let body = cfg.request("hello").unwrap().body;
        assert_eq!(
            body["messages"][0]["content"],
            "hello (test-model, t=0.2)"
        );
        assert_eq!(body["temp"], 0.2);
    }

    #[test]
    fn response_path_walks_objects_and_arrays() {
        let value: serde_json::Value = serde_json::json!({
            "choices": [{"message": {"content": "ciao"}}]
        });
        assert_eq!(
            extract_path(&value, "choices.0.message.content").and_then(|v| v.as_str()),
            Some("ciao")
        );
        assert_eq!(extract_path(&value, "choices.1.message"), None);
        assert_eq!(extract_path(&value, "missing"), None);
    }

    #[test]
    fn tsv_skips_failed_lines_and_flattens_whitespace() {
        let outcomes = vec![
            LineOutcome {
                id: 1,
                source: "hello".to_string(),
                attempts: 1,
                result: Ok(ProviderResponse {
                    translation: "ciao\na tutti".to_string(),
                    latency: Duration::from_millis(5),
                    raw: serde_json::Value::Null,
                }),
            },
            LineOutcome {
                id: 2,
                source: "broken".to_string(),
                attempts: 3,
                result: Err("provider returned status 500".to_string()),
            },
        ];
        let tsv = String::from_utf8(render_tsv(&outcomes)).unwrap();
        assert_eq!(tsv, "1\thello\tciao a tutti\n");
    }

    #[test]
    fn manifest_records_status_attempts_and_settings() {
        let cfg = config();
        let outcomes = vec![LineOutcome {
            id: 3,
            source: "x".to_string(),
            attempts: 3,
            result: Err("boom".to_string()),
        }];
        let now = chrono::Utc::now();
        let manifest = BatchManifest::new(&cfg, &outcomes, now, now);
        assert_eq!(manifest.temperature, 0.2);
        assert_eq!(manifest.lines[0].status, "failed");
        assert_eq!(manifest.lines[0].attempts, 3);
        assert_eq!(manifest.lines[0].error.as_deref(), Some("boom"));
    }
}
