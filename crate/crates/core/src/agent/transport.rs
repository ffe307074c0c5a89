//! Chat transports and the model-backed agent.
//!
//! A transport is anything that turns an ordered message list plus sampling
//! parameters into response text. The engine never talks to a vendor API
//! directly; live backends plug in behind [`ChatTransport`] with their
//! endpoints and credentials read from environment variables. For offline
//! runs and tests, [`CannedTransport`] replays recorded exchanges from a
//! directory keyed by request digest.

use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::prompt::build_messages;
use super::wire::{parse_response, WireError};
use super::{
    AgentError, AgentKind, Decider, DecisionRequest, DecisionResponse, ReasoningMode,
};

/// Who a chat message is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

/// One turn of a chat exchange.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: Role::User, content: content.into() }
    }
}

/// Sampling knobs sent with every request.
///
/// The model name rides along so a transcript recorded for one model never
/// answers for another: it changes the request digest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub model: Option<String>,
    pub temperature: f64,
    pub top_p: Option<f64>,
    pub max_tokens: Option<u32>,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams { model: None, temperature: 1.0, top_p: None, max_tokens: None }
    }
}

/// Failures raised by a chat transport.
#[derive(Debug, Error)]
pub enum TransportError {
    /// The canned directory holds no response for this request.
    #[error("no canned response at {}", path.display())]
    Missing { path: PathBuf },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// Whatever a live backend reports: timeouts, auth, rate limits.
    #[error("backend: {0}")]
    Backend(String),
}

/// A synchronous chat completion backend.
///
/// Implementations are shared across worker threads, so each call must be
/// self-contained. Credentials belong in environment variables read by the
/// implementation, never in run configuration.
pub trait ChatTransport: Send + Sync {
    fn complete(
        &self,
        messages: &[ChatMessage],
        params: &SamplingParams,
    ) -> Result<String, TransportError>;
}

/// Content address of one request: the SHA-256 hex digest of its messages
/// and sampling parameters in serialized form.
pub fn request_digest(messages: &[ChatMessage], params: &SamplingParams) -> String {
    let body = serde_json::to_vec(&(messages, params)).expect("chat requests serialize");
    let digest = Sha256::digest(&body);
    let mut hex = String::with_capacity(2 * digest.len());
    for byte in digest {
        write!(hex, "{byte:02x}").expect("writing to a String cannot fail");
    }
    hex
}

/// A directory of recorded exchanges, keyed by request digest.
///
/// `complete` reads `{digest}.txt`. On a miss it leaves a best-effort
/// `{digest}.request.json` next to where the response belongs — enough to
/// record the missing transcript by hand or script — and reports the miss.
#[derive(Debug, Clone)]
pub struct CannedTransport {
    dir: PathBuf,
}

impl CannedTransport {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CannedTransport { dir: dir.into() }
    }

    /// Where the response text for this request lives (or should be put).
    pub fn response_path(&self, messages: &[ChatMessage], params: &SamplingParams) -> PathBuf {
        self.dir.join(format!("{}.txt", request_digest(messages, params)))
    }
}

impl ChatTransport for CannedTransport {
    fn complete(
        &self,
        messages: &[ChatMessage],
        params: &SamplingParams,
    ) -> Result<String, TransportError> {
        let path = self.response_path(messages, params);
        match fs::read_to_string(&path) {
            Ok(text) => Ok(text),
            Err(err) if err.kind() == std::io::ErrorKind::NotFound => {
                let hint = path.with_extension("request.json");
                if let Ok(body) = serde_json::to_vec_pretty(&(messages, params)) {
                    let _ = fs::write(hint, body);
                }
                Err(TransportError::Missing { path })
            }
            Err(err) => Err(err.into()),
        }
    }
}

/// A model-backed decider: renders the prompt, calls the transport, and
/// parses the reply, re-asking a bounded number of times on malformed output
/// before abandoning the decision.
///
/// Each re-ask resends the same messages; whether that yields a different
/// completion is the transport's business (a live backend samples afresh, a
/// canned one replays). Transport failures are never retried here — retry
/// budgets for flaky networks live inside the transport, next to the
/// knowledge of what is safe to retry.
pub struct ExternalAgent {
    model: String,
    reasoning: ReasoningMode,
    transport: Arc<dyn ChatTransport>,
    params: SamplingParams,
    reasks: usize,
}

impl ExternalAgent {
    pub fn new(
        model: impl Into<String>,
        reasoning: ReasoningMode,
        transport: Arc<dyn ChatTransport>,
    ) -> Self {
        let model = model.into();
        let params = SamplingParams { model: Some(model.clone()), ..SamplingParams::default() };
        ExternalAgent { model, reasoning, transport, params, reasks: 2 }
    }

    /// Builds from an [`AgentKind::External`]; scripted kinds name no model,
    /// so they yield `None`.
    pub fn from_kind(kind: &AgentKind, transport: Arc<dyn ChatTransport>) -> Option<Self> {
        match kind {
            AgentKind::External { model, reasoning } => {
                Some(ExternalAgent::new(model.clone(), *reasoning, transport))
            }
            _ => None,
        }
    }

    pub fn with_params(mut self, params: SamplingParams) -> Self {
        self.params = params;
        self
    }

    /// How many extra attempts a malformed reply earns before the decision
    /// is abandoned. Defaults to 2 (three attempts in total).
    pub fn with_reasks(mut self, reasks: usize) -> Self {
        self.reasks = reasks;
        self
    }

    pub fn kind(&self) -> AgentKind {
        AgentKind::External { model: self.model.clone(), reasoning: self.reasoning }
    }
}

impl fmt::Debug for ExternalAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExternalAgent")
            .field("model", &self.model)
            .field("reasoning", &self.reasoning)
            .field("params", &self.params)
            .field("reasks", &self.reasks)
            .finish_non_exhaustive()
    }
}

impl Decider for ExternalAgent {
    fn decide(&mut self, request: &DecisionRequest<'_>) -> Result<DecisionResponse, AgentError> {
        let messages = build_messages(request, self.reasoning)?;
        let mut last: Option<WireError> = None;
        for _ in 0..=self.reasks {
            let text = self
                .transport
                .complete(&messages, &self.params)
                .map_err(|source| AgentError::Transport { phase: request.phase, source })?;
            match parse_response(request, &text) {
                Ok(payload) => return Ok(DecisionResponse { payload, raw: Some(text) }),
                Err(err) => last = Some(err),
            }
        }
        Err(AgentError::ParseFailed {
            attempts: self.reasks + 1,
            last: last.expect("at least one attempt ran"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::prompt::{ACTION_SCHEMA, COT_INSTRUCTION, DIRECT_INSTRUCTION};
    use crate::agent::{DecisionPayload, MechanismContext, Phase};
    use crate::game::Game;
    use crate::mechanism::{MechanismConfig, MechanismVariant};
    use std::sync::Mutex;

    fn one_shot<'a>(game: &'a Game, config: &'a MechanismConfig) -> DecisionRequest<'a> {
        DecisionRequest {
            game,
            seat: 0,
            config,
            phase: Phase::Act,
            context: MechanismContext::None,
        }
    }

    /// Hands out scripted replies in order, recording every request.
    struct SequenceTransport {
        replies: Vec<String>,
        calls: Mutex<Vec<Vec<ChatMessage>>>,
    }

    impl SequenceTransport {
        fn new(replies: &[&str]) -> Self {
            SequenceTransport {
                replies: replies.iter().map(|s| s.to_string()).collect(),
                calls: Mutex::new(Vec::new()),
            }
        }
    }

    impl ChatTransport for SequenceTransport {
        fn complete(
            &self,
            messages: &[ChatMessage],
            _params: &SamplingParams,
        ) -> Result<String, TransportError> {
            let mut calls = self.calls.lock().unwrap();
            calls.push(messages.to_vec());
            let reply = self
                .replies
                .get(calls.len() - 1)
                .ok_or_else(|| TransportError::Backend("out of scripted replies".into()))?;
            Ok(reply.clone())
        }
    }

    #[test]
    fn the_digest_keys_on_content_and_model() {
        let messages = vec![ChatMessage::user("hello")];
        let params = SamplingParams::default();
        assert_eq!(request_digest(&messages, &params), request_digest(&messages, &params));

        let other_model =
            SamplingParams { model: Some("local-7b".into()), ..SamplingParams::default() };
        assert_ne!(request_digest(&messages, &params), request_digest(&messages, &other_model));

        let other_text = vec![ChatMessage::user("hello!")];
        assert_ne!(request_digest(&messages, &params), request_digest(&other_text, &params));
    }

    #[test]
    fn canned_transcripts_replay_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::NoMechanism);
        let request = one_shot(&game, &config);

        let canned = CannedTransport::new(dir.path());
        let messages = build_messages(&request, ReasoningMode::StepByStep).unwrap();
        let path = canned.response_path(&messages, &{
            SamplingParams { model: Some("local-7b".into()), ..SamplingParams::default() }
        });
        fs::write(&path, "I will defect.\n{\"A0\": 0, \"A1\": 100}").unwrap();

        let transport: Arc<dyn ChatTransport> = Arc::new(canned);
        let mut first =
            ExternalAgent::new("local-7b", ReasoningMode::StepByStep, transport.clone());
        let mut second = ExternalAgent::new("local-7b", ReasoningMode::StepByStep, transport);
        let a = first.decide(&request).unwrap();
        let b = second.decide(&request).unwrap();
        assert_eq!(a.raw, b.raw);
        match (&a.payload, &b.payload) {
            (DecisionPayload::Act(x), DecisionPayload::Act(y)) => {
                assert_eq!(x, y);
                assert_eq!(x.weights(), &[0, 100]);
            }
            other => panic!("expected matching actions, got {other:?}"),
        }
    }

    #[test]
    fn a_missing_transcript_names_the_path_and_leaves_a_request_hint() {
        let dir = tempfile::tempdir().unwrap();
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::NoMechanism);
        let request = one_shot(&game, &config);

        let mut agent = ExternalAgent::new(
            "local-7b",
            ReasoningMode::StepByStep,
            Arc::new(CannedTransport::new(dir.path())),
        );
        let err = agent.decide(&request).unwrap_err();
        let text = err.to_string();
        assert!(text.contains("transport failure during act"), "got: {text}");
        assert!(text.contains(".txt"), "got: {text}");

        let hints: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .filter(|name| name.ends_with(".request.json"))
            .collect();
        assert_eq!(hints.len(), 1);
        // The hint holds the exact request, ready to be answered offline.
        let body = fs::read_to_string(dir.path().join(&hints[0])).unwrap();
        assert!(body.contains("Basic game rules"));
    }

    #[test]
    fn malformed_replies_earn_bounded_reasks() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::NoMechanism);
        let request = one_shot(&game, &config);

        let transport = Arc::new(SequenceTransport::new(&[
            "not json at all",
            "{\"A0\": 60, \"A1\": 60}",
            "{\"A0\": 30, \"A1\": 70}",
        ]));
        let mut agent =
            ExternalAgent::new("local-7b", ReasoningMode::StepByStep, transport.clone());
        let response = agent.decide(&request).unwrap();
        assert_eq!(transport.calls.lock().unwrap().len(), 3);
        match response.payload {
            DecisionPayload::Act(mix) => assert_eq!(mix.weights(), &[30, 70]),
            other => panic!("expected an action, got {other:?}"),
        }

        // All three attempts malformed: the decision is abandoned, not repaired.
        let transport = Arc::new(SequenceTransport::new(&["nope", "nope", "nope"]));
        let mut agent =
            ExternalAgent::new("local-7b", ReasoningMode::StepByStep, transport.clone());
        match agent.decide(&request).unwrap_err() {
            AgentError::ParseFailed { attempts, .. } => assert_eq!(attempts, 3),
            other => panic!("expected a parse failure, got {other}"),
        }
        assert_eq!(transport.calls.lock().unwrap().len(), 3);
    }

    #[test]
    fn reasks_resend_the_same_messages() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::NoMechanism);
        let request = one_shot(&game, &config);

        let transport =
            Arc::new(SequenceTransport::new(&["garbage", "{\"A0\": 100, \"A1\": 0}"]));
        let mut agent =
            ExternalAgent::new("local-7b", ReasoningMode::StepByStep, transport.clone());
        agent.decide(&request).unwrap();
        let calls = transport.calls.lock().unwrap();
        assert_eq!(calls.len(), 2);
        assert_eq!(calls[0], calls[1]);
    }

    #[test]
    fn reasoning_mode_picks_the_instruction_block() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::NoMechanism);
        let request = one_shot(&game, &config);
        let reply = "{\"A0\": 100, \"A1\": 0}";

        let transport = Arc::new(SequenceTransport::new(&[reply]));
        let mut agent =
            ExternalAgent::new("local-7b", ReasoningMode::Direct, transport.clone());
        agent.decide(&request).unwrap();
        let calls = transport.calls.lock().unwrap();
        let user = calls[0].iter().find(|m| m.role == Role::User).unwrap();
        assert!(user.content.ends_with(DIRECT_INSTRUCTION));
        assert!(!user.content.contains(COT_INSTRUCTION));
        assert!(calls[0].iter().any(|m| m.role == Role::System && m.content == ACTION_SCHEMA));
    }

    #[test]
    fn transport_errors_surface_immediately_with_phase_context() {
        let game = Game::prisoners();
        let config = MechanismConfig::new(MechanismVariant::NoMechanism);
        let request = one_shot(&game, &config);

        struct FailingTransport;
        impl ChatTransport for FailingTransport {
            fn complete(
                &self,
                _messages: &[ChatMessage],
                _params: &SamplingParams,
            ) -> Result<String, TransportError> {
                Err(TransportError::Backend("timed out".into()))
            }
        }

        let mut agent =
            ExternalAgent::new("local-7b", ReasoningMode::StepByStep, Arc::new(FailingTransport));
        let err = agent.decide(&request).unwrap_err();
        match &err {
            AgentError::Transport { phase, .. } => assert_eq!(*phase, Phase::Act),
            other => panic!("expected a transport error, got {other}"),
        }
        assert_eq!(err.to_string(), "transport failure during act: backend: timed out");
    }
}
