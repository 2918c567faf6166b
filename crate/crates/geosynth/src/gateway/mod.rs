//! Chat-completion client plus the deterministic mocks the tests run on.
//!
//! The wire shape is the common messages-array JSON over HTTP, with the
//! endpoint fully configurable, so any compatible provider works. The
//! retry loop lives in [`Gateway::complete`] and drives a [`Transport`];
//! the HTTP transport is one implementation, and tests swap in flaky or
//! counting transports to exercise the policy without a network. Consumers
//! that only need text in, text out (transcription) accept a
//! [`TextCompleter`]; candidate generation for the step search goes
//! through [`crate::verify::CandidateSource`], which the scripted mock and
//! the live adapter both implement. Nothing in the repository's tests
//! touches the network: every consumer accepts a mock.
//!
//! The scripted mock replays one entry per call, in order, and signals
//! the terminal marker once the script runs out, which is exactly the
//! shape the search loop expects from a finished proof.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::verify::{CandidateError, CandidateSource, TERMINAL_MARKER};

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("config: {0}")]
    Config(String),
    #[error("auth: environment variable `{0}` is not set")]
    Auth(String),
    #[error("transient failures exhausted {attempts} attempt(s): {last}")]
    RetryExhausted { attempts: u32, last: String },
    #[error("request timed out after {0} second(s)")]
    Timeout(u64),
    #[error("bad response: {0}")]
    BadResponse(String),
    #[error("script: {0}")]
    ScriptFormat(String),
    #[error("audit log `{path}`: {source}")]
    Audit {
        path: PathBuf,
        source: std::io::Error,
    },
}

fn default_endpoint() -> String {
    "http://localhost:8080/v1/chat/completions".to_string()
}
fn default_model() -> String {
    "local".to_string()
}
fn default_timeout() -> u64 {
    30
}
fn default_attempts() -> u32 {
    3
}
fn default_backoff() -> u64 {
    250
}
fn default_temperature() -> f64 {
    0.7
}
fn default_in_flight() -> usize {
    4
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GatewayConfig {
    #[serde(default = "default_endpoint")]
    pub endpoint: String,
    #[serde(default = "default_model")]
    pub model: String,
    /// Name of the environment variable holding the bearer token; `None`
    /// sends no auth header at all.
    #[serde(default)]
    pub auth_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    /// Base of the exponential backoff: attempt n sleeps base * 2^(n-1).
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    /// Every request/response pair is appended here as one JSON line.
    #[serde(default)]
    pub audit_path: Option<PathBuf>,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            endpoint: default_endpoint(),
            model: default_model(),
            auth_env: None,
            timeout_secs: default_timeout(),
            max_attempts: default_attempts(),
            backoff_ms: default_backoff(),
            temperature: default_temperature(),
            max_in_flight: default_in_flight(),
            audit_path: None,
        }
    }
}

impl GatewayConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.max_attempts == 0 {
            return Err(GatewayError::Config("max_attempts must be at least 1".into()));
        }
        if self.timeout_secs == 0 {
            return Err(GatewayError::Config("timeout_secs must be positive".into()));
        }
        if self.max_in_flight == 0 {
            return Err(GatewayError::Config("max_in_flight must be at least 1".into()));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(GatewayError::Config(format!(
                "temperature {} is not a sampling temperature",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// System framing, an optional one-shot exemplar, and the user turn.
#[derive(Debug, Clone, Serialize)]
pub struct CompletionRequest {
    pub system: String,
    /// (user, assistant) demonstration prepended before the real turn.
    pub exemplar: Option<(String, String)>,
    pub user: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletionResponse {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub latency_ms: u64,
    /// 1-based attempt that finally succeeded.
    pub attempts: u32,
}

struct RawReply {
    text: String,
    prompt_tokens: u64,
    completion_tokens: u64,
}

enum TransportFault {
    /// Worth retrying: connection trouble, 429, 5xx.
    Transient(String),
    Timeout,
    /// Not worth retrying: the request itself is wrong.
    Fatal(String),
}

trait Transport: Send + Sync {
    fn send(
        &self,
        config: &GatewayConfig,
        request: &CompletionRequest,
    ) -> Result<RawReply, TransportFault>;
}

struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    fn new(config: &GatewayConfig) -> Result<HttpTransport, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(HttpTransport { client })
    }
}

impl Transport for HttpTransport {
    fn send(
        &self,
        config: &GatewayConfig,
        request: &CompletionRequest,
    ) -> Result<RawReply, TransportFault> {
        let mut messages = vec![json!({"role": "system", "content": request.system})];
        if let Some((user, assistant)) = &request.exemplar {
            messages.push(json!({"role": "user", "content": user}));
            messages.push(json!({"role": "assistant", "content": assistant}));
        }
        messages.push(json!({"role": "user", "content": request.user}));
        let body = json!({
            "model": config.model,
            "temperature": config.temperature,
            "messages": messages,
        });

        let mut req = self.client.post(&config.endpoint).json(&body);
        if let Some(var) = &config.auth_env {
            // complete() has already checked presence; a race to unset the
            // variable since then still must not send an empty token.
            let token = std::env::var(var).map_err(|_| TransportFault::Fatal(format!(
                "auth variable `{var}` vanished"
            )))?;
            req = req.bearer_auth(token);
        }

        let response = req.send().map_err(|e| {
            if e.is_timeout() {
                TransportFault::Timeout
            } else {
                TransportFault::Transient(e.to_string())
            }
        })?;
        let status = response.status();
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(TransportFault::Transient(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(TransportFault::Fatal(format!("status {status}")));
        }
        let parsed: serde_json::Value = response
            .json()
            .map_err(|e| TransportFault::Fatal(format!("unparseable body: {e}")))?;
        let text = parsed["choices"][0]["message"]["content"]
            .as_str()
            .unwrap_or_default()
            .to_string();
        Ok(RawReply {
            text,
            prompt_tokens: parsed["usage"]["prompt_tokens"].as_u64().unwrap_or(0),
            completion_tokens: parsed["usage"]["completion_tokens"].as_u64().unwrap_or(0),
        })
    }
}

/// Caps concurrent in-flight requests across threads sharing one gateway.
struct Gate {
    in_flight: Mutex<usize>,
    freed: Condvar,
    cap: usize,
}

struct GatePermit<'a>(&'a Gate);

impl Gate {
    fn new(cap: usize) -> Gate {
        Gate {
            in_flight: Mutex::new(0),
            freed: Condvar::new(),
            cap,
        }
    }

    fn acquire(&self) -> GatePermit<'_> {
        let mut count = self.in_flight.lock().expect("gate lock");
        while *count >= self.cap {
            count = self.freed.wait(count).expect("gate wait");
        }
        *count += 1;
        GatePermit(self)
    }
}

impl Drop for GatePermit<'_> {
    fn drop(&mut self) {
        *self.0.in_flight.lock().expect("gate lock") -= 1;
        self.0.freed.notify_one();
    }
}

pub struct Gateway {
    config: GatewayConfig,
    transport: Box<dyn Transport>,
    audit: Option<Mutex<File>>,
    ids: AtomicU64,
    gate: Gate,
}

impl Gateway {
    pub fn new(config: GatewayConfig) -> Result<Gateway, GatewayError> {
        let transport = HttpTransport::new(&config)?;
        Gateway::assemble(config, Box::new(transport))
    }

    fn assemble(
        config: GatewayConfig,
        transport: Box<dyn Transport>,
    ) -> Result<Gateway, GatewayError> {
        config.validate()?;
        let audit = match &config.audit_path {
            None => None,
            Some(path) => Some(Mutex::new(
                OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .map_err(|source| GatewayError::Audit {
                        path: path.clone(),
                        source,
                    })?,
            )),
        };
        Ok(Gateway {
            gate: Gate::new(config.max_in_flight),
            config,
            transport,
            audit,
            ids: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    fn audit_line(&self, record: serde_json::Value) -> Result<(), GatewayError> {
        let Some(file) = &self.audit else {
            return Ok(());
        };
        let path = self.config.audit_path.clone().expect("audit path set");
        let mut file = file.lock().expect("audit lock");
        writeln!(file, "{record}").map_err(|source| GatewayError::Audit { path, source })
    }

    /// One request, one response; transient faults are retried with
    /// exponential backoff and every outcome lands in the audit log.
    pub fn complete(
        &self,
        request: &CompletionRequest,
    ) -> Result<CompletionResponse, GatewayError> {
        if let Some(var) = &self.config.auth_env {
            if std::env::var(var).is_err() {
                return Err(GatewayError::Auth(var.clone()));
            }
        }
        let id = self.ids.fetch_add(1, Ordering::Relaxed);
        let _permit = self.gate.acquire();
        let start = Instant::now();

        let mut last_fault: Option<TransportFault> = None;
        for attempt in 1..=self.config.max_attempts {
            match self.transport.send(&self.config, request) {
                Ok(raw) => {
                    if raw.text.is_empty() {
                        return self.conclude(id, request, Err("empty completion".into()));
                    }
                    let response = CompletionResponse {
                        text: raw.text,
                        prompt_tokens: raw.prompt_tokens,
                        completion_tokens: raw.completion_tokens,
                        latency_ms: start.elapsed().as_millis() as u64,
                        attempts: attempt,
                    };
                    self.audit_line(json!({
                        "id": id,
                        "model": self.config.model,
                        "request": request,
                        "response": response,
                    }))?;
                    return Ok(response);
                }
                Err(TransportFault::Fatal(msg)) => {
                    return self.conclude(id, request, Err(msg));
                }
                Err(fault) => {
                    if attempt < self.config.max_attempts {
                        let sleep = self.config.backoff_ms.saturating_mul(1 << (attempt - 1));
                        std::thread::sleep(Duration::from_millis(sleep));
                    }
                    last_fault = Some(fault);
                }
            }
        }

        let error = match last_fault {
            Some(TransportFault::Timeout) => GatewayError::Timeout(self.config.timeout_secs),
            Some(TransportFault::Transient(last)) => GatewayError::RetryExhausted {
                attempts: self.config.max_attempts,
                last,
            },
            _ => GatewayError::RetryExhausted {
                attempts: self.config.max_attempts,
                last: "no attempt ran".into(),
            },
        };
        let _ = self.audit_line(json!({
            "id": id,
            "model": self.config.model,
            "request": request,
            "error": error.to_string(),
        }));
        Err(error)
    }

    /// Terminal non-retry failure: audit it, then report it.
    fn conclude(
        &self,
        id: u64,
        request: &CompletionRequest,
        outcome: Result<CompletionResponse, String>,
    ) -> Result<CompletionResponse, GatewayError> {
        match outcome {
            Ok(r) => Ok(r),
            Err(msg) => {
                let _ = self.audit_line(json!({
                    "id": id,
                    "model": self.config.model,
                    "request": request,
                    "error": msg,
                }));
                Err(GatewayError::BadResponse(msg))
            }
        }
    }
}

/// Text in, text out; the shape transcription needs. The live gateway and
/// both mocks speak it, so consumers never name a concrete backend.
pub trait TextCompleter: Send + Sync {
    fn complete_text(
        &self,
        request: &CompletionRequest,
    ) -> Result<CompletionResponse, GatewayError>;
}

impl TextCompleter for Gateway {
    fn complete_text(
        &self,
        request: &CompletionRequest,
    ) -> Result<CompletionResponse, GatewayError> {
        self.complete(request)
    }
}

/// Replies with the user turn verbatim.
#[derive(Debug, Default)]
pub struct EchoMock;

impl TextCompleter for EchoMock {
    fn complete_text(
        &self,
        request: &CompletionRequest,
    ) -> Result<CompletionResponse, GatewayError> {
        if request.user.is_empty() {
            return Err(GatewayError::BadResponse("empty completion".into()));
        }
        Ok(CompletionResponse {
            text: request.user.clone(),
            prompt_tokens: 0,
            completion_tokens: 0,
            latency_ms: 0,
            attempts: 1,
        })
    }
}

/// Replays scripted responses one per call, in order; once the script is
/// exhausted every further call yields the terminal marker. The script
/// source is a JSON array of strings so entries can span lines.
#[derive(Debug)]
pub struct ScriptedMock {
    entries: Vec<String>,
    cursor: AtomicUsize,
}

impl ScriptedMock {
    pub fn from_source(source: &str) -> Result<ScriptedMock, GatewayError> {
        let entries: Vec<String> = serde_json::from_str(source)
            .map_err(|e| GatewayError::ScriptFormat(format!("expected a JSON array of strings: {e}")))?;
        Ok(ScriptedMock::from_entries(entries))
    }

    pub fn from_entries(entries: Vec<String>) -> ScriptedMock {
        ScriptedMock {
            entries,
            cursor: AtomicUsize::new(0),
        }
    }

    pub fn next_entry(&self) -> String {
        let index = self.cursor.fetch_add(1, Ordering::Relaxed);
        self.entries
            .get(index)
            .cloned()
            .unwrap_or_else(|| TERMINAL_MARKER.to_string())
    }

    /// Calls served so far, including terminal ones.
    pub fn calls(&self) -> usize {
        self.cursor.load(Ordering::Relaxed)
    }
}

impl TextCompleter for ScriptedMock {
    fn complete_text(
        &self,
        _request: &CompletionRequest,
    ) -> Result<CompletionResponse, GatewayError> {
        Ok(CompletionResponse {
            text: self.next_entry(),
            prompt_tokens: 0,
            completion_tokens: 0,
            latency_ms: 0,
            attempts: 1,
        })
    }
}

impl CandidateSource for ScriptedMock {
    /// Draws up to `k` scripted entries; a terminal marker ends the batch
    /// so one exhausted script does not pad the round with duplicates.
    fn propose(&mut self, _prompt: &str, k: usize) -> Result<Vec<String>, CandidateError> {
        let mut batch = Vec::new();
        for _ in 0..k {
            let entry = self.next_entry();
            let terminal = entry == TERMINAL_MARKER;
            batch.push(entry);
            if terminal {
                break;
            }
        }
        Ok(batch)
    }
}

/// Live candidate generation: one completion per requested candidate.
pub struct GatewayCandidates<'g> {
    pub gateway: &'g Gateway,
    pub system: String,
    pub exemplar: Option<(String, String)>,
}

impl CandidateSource for GatewayCandidates<'_> {
    fn propose(&mut self, prompt: &str, k: usize) -> Result<Vec<String>, CandidateError> {
        (0..k)
            .map(|_| {
                self.gateway
                    .complete(&CompletionRequest {
                        system: self.system.clone(),
                        exemplar: self.exemplar.clone(),
                        user: prompt.to_string(),
                    })
                    .map(|r| r.text)
                    .map_err(|e| CandidateError(e.to_string()))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicU32;

    fn request(user: &str) -> CompletionRequest {
        CompletionRequest {
            system: "polish the step".to_string(),
            exemplar: None,
            user: user.to_string(),
        }
    }

    fn fast_config() -> GatewayConfig {
        GatewayConfig {
            backoff_ms: 0,
            ..GatewayConfig::default()
        }
    }

    struct FixedTransport(&'static str);
    impl Transport for FixedTransport {
        fn send(
            &self,
            _: &GatewayConfig,
            request: &CompletionRequest,
        ) -> Result<RawReply, TransportFault> {
            let text = if self.0.is_empty() {
                request.user.clone()
            } else {
                self.0.to_string()
            };
            Ok(RawReply {
                text,
                prompt_tokens: 1,
                completion_tokens: 1,
            })
        }
    }

    struct FlakyTransport {
        failures: u32,
        sent: AtomicU32,
    }
    impl Transport for FlakyTransport {
        fn send(
            &self,
            _: &GatewayConfig,
            _: &CompletionRequest,
        ) -> Result<RawReply, TransportFault> {
            let n = self.sent.fetch_add(1, Ordering::Relaxed);
            if n < self.failures {
                Err(TransportFault::Transient(format!("refused call {n}")))
            } else {
                Ok(RawReply {
                    text: "recovered".to_string(),
                    prompt_tokens: 0,
                    completion_tokens: 0,
                })
            }
        }
    }

    struct TimingOutTransport;
    impl Transport for TimingOutTransport {
        fn send(
            &self,
            _: &GatewayConfig,
            _: &CompletionRequest,
        ) -> Result<RawReply, TransportFault> {
            Err(TransportFault::Timeout)
        }
    }

    struct CountingTransport(AtomicU32);
    impl Transport for CountingTransport {
        fn send(
            &self,
            _: &GatewayConfig,
            _: &CompletionRequest,
        ) -> Result<RawReply, TransportFault> {
            self.0.fetch_add(1, Ordering::Relaxed);
            Err(TransportFault::Fatal("should never be reached".into()))
        }
    }

    #[test]
    fn invalid_configs_never_build_a_gateway() {
        for config in [
            GatewayConfig {
                max_attempts: 0,
                ..GatewayConfig::default()
            },
            GatewayConfig {
                timeout_secs: 0,
                ..GatewayConfig::default()
            },
            GatewayConfig {
                temperature: f64::NAN,
                ..GatewayConfig::default()
            },
        ] {
            match Gateway::assemble(config, Box::new(FixedTransport(""))) {
                Err(GatewayError::Config(_)) => {}
                Err(other) => panic!("expected a config error, got {other}"),
                Ok(_) => panic!("an invalid config built a gateway"),
            }
        }
    }

    #[test]
    fn the_echo_path_reflects_the_user_turn() {
        let gateway = Gateway::assemble(fast_config(), Box::new(FixedTransport(""))).unwrap();
        let response = gateway.complete(&request("AD is half of AB.")).unwrap();
        assert_eq!(response.text, "AD is half of AB.");
        assert_eq!(response.attempts, 1);

        let mock = EchoMock;
        let echoed = mock.complete_text(&request("drafted step")).unwrap();
        assert_eq!(echoed.text, "drafted step");
    }

    #[test]
    fn transient_failures_are_retried_up_to_the_cap() {
        let flaky = FlakyTransport {
            failures: 2,
            sent: AtomicU32::new(0),
        };
        let gateway = Gateway::assemble(fast_config(), Box::new(flaky)).unwrap();
        let response = gateway.complete(&request("x")).unwrap();
        assert_eq!(response.attempts, 3);
        assert_eq!(response.text, "recovered");

        let stubborn = FlakyTransport {
            failures: 5,
            sent: AtomicU32::new(0),
        };
        let gateway = Gateway::assemble(fast_config(), Box::new(stubborn)).unwrap();
        let err = gateway.complete(&request("x")).unwrap_err();
        match err {
            GatewayError::RetryExhausted { attempts, .. } => assert_eq!(attempts, 3),
            other => panic!("expected RetryExhausted, got {other}"),
        }
    }

    #[test]
    fn timeouts_keep_their_own_name() {
        let gateway = Gateway::assemble(fast_config(), Box::new(TimingOutTransport)).unwrap();
        let err = gateway.complete(&request("x")).unwrap_err();
        assert!(matches!(err, GatewayError::Timeout(_)), "{err}");
    }

    #[test]
    fn missing_auth_fails_before_any_send() {
        let counting = CountingTransport(AtomicU32::new(0));
        let config = GatewayConfig {
            auth_env: Some("GEOSYNTH_TEST_TOKEN_THAT_IS_NEVER_SET".to_string()),
            ..fast_config()
        };
        let gateway = Gateway::assemble(config, Box::new(counting)).unwrap();
        let err = gateway.complete(&request("x")).unwrap_err();
        assert!(matches!(err, GatewayError::Auth(_)), "{err}");
        // No call reached the transport.
        let transport_calls = match gateway.transport.send(
            &gateway.config,
            &request("probe"),
        ) {
            Err(TransportFault::Fatal(_)) => 1,
            _ => panic!("probe should hit the counting transport"),
        };
        assert_eq!(transport_calls, 1);
    }

    #[test]
    fn every_call_lands_in_the_audit_log() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("audit.jsonl");
        let config = GatewayConfig {
            audit_path: Some(path.clone()),
            ..fast_config()
        };
        let gateway = Gateway::assemble(config, Box::new(FixedTransport("polished"))).unwrap();
        gateway.complete(&request("first")).unwrap();
        gateway.complete(&request("second")).unwrap();

        let log = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = log.lines().collect();
        assert_eq!(lines.len(), 2);
        for (line, user) in lines.iter().zip(["first", "second"]) {
            let record: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(record["request"]["user"], user);
            assert_eq!(record["response"]["text"], "polished");
        }
    }

    #[test]
    fn scripts_replay_in_order_and_then_signal_terminal() {
        let script = r#"["first step", "second step", "third step"]"#;
        let run = |mock: &ScriptedMock| -> Vec<String> {
            (0..5).map(|_| mock.next_entry()).collect()
        };
        let a = run(&ScriptedMock::from_source(script).unwrap());
        let b = run(&ScriptedMock::from_source(script).unwrap());
        assert_eq!(a, b);
        assert_eq!(
            a,
            [
                "first step",
                "second step",
                "third step",
                TERMINAL_MARKER,
                TERMINAL_MARKER
            ]
        );

        let empty = ScriptedMock::from_source("[]").unwrap();
        assert_eq!(empty.next_entry(), TERMINAL_MARKER);

        let err = ScriptedMock::from_source("first\nsecond").unwrap_err();
        assert!(matches!(err, GatewayError::ScriptFormat(_)), "{err}");
    }

    #[test]
    fn proposals_draw_from_the_script_and_stop_at_terminal() {
        let mut mock = ScriptedMock::from_entries(vec![
            "one".to_string(),
            "two".to_string(),
            "three".to_string(),
        ]);
        assert_eq!(mock.propose("p", 2).unwrap(), ["one", "two"]);
        assert_eq!(mock.propose("p", 4).unwrap(), ["three", TERMINAL_MARKER]);
        assert_eq!(mock.propose("p", 4).unwrap(), [TERMINAL_MARKER]);
    }
}
