//! The JSON wire formats agents answer in, one shape per phase:
//!
//! - act: `{"A0": <INT>, "A1": <INT>, ...}` — integer percentages, sum 100
//! - propose_mediator: `{"1": "A0", ..., "n": "A0"}` — action per delegation count
//! - propose_contract: `{"A0": <INT>, ...}` — signed payment per action
//! - vote: `{"M1": <BOOL>, ...}` or `{"C1": <BOOL>, ...}`
//! - sign: `{"sign": <BOOL>}`
//!
//! Parsing is deliberately forgiving about the surrounding prose — models
//! reason before answering — and deliberately strict about the object
//! itself: code fences are stripped, the *last* well-formed JSON object in
//! the text is taken, and then every key and value must check out exactly.
//! There is no weight repair; integers that don't sum to 100 are an error
//! the caller can surface or re-ask on.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::game::MixedAction;
use crate::mechanism::{ContractSpec, MediatorSpec};

use super::{DecisionPayload, DecisionRequest, MechanismContext, Phase};

/// A violated wire rule. Each variant names the rule so episode logs can
/// say exactly why an answer was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum WireError {
    #[error("no JSON object found in the response")]
    NoJsonObject,
    #[error("required key {0:?} is missing")]
    MissingKey(String),
    #[error("key {0:?} is not part of the expected schema")]
    UnknownKey(String),
    #[error("value for {0:?} must be a non-negative integer")]
    NonIntegerWeight(String),
    #[error("action weights sum to {0}, must be exactly 100")]
    WeightSum(u64),
    #[error("value for {0:?} must be an integer")]
    NonIntegerTransfer(String),
    #[error("value for {0:?} must be true or false")]
    NotABool(String),
    #[error("value for {key:?} must name an available action, got {got:?}")]
    NotAnAction { key: String, got: String },
}

/// Scans for top-level `{...}` spans (string- and escape-aware) and returns
/// the last one that parses as a JSON object.
fn last_json_object(raw: &str) -> Option<serde_json::Map<String, Value>> {
    // Code fences never nest inside the object; dropping the markers keeps
    // the brace scan from seeing fence text as part of a candidate.
    let cleaned = raw.replace("```", " ");
    let bytes = cleaned.as_bytes();
    let mut best = None;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(end) = find_balanced_end(bytes, i) {
                let candidate = &cleaned[i..=end];
                if let Ok(Value::Object(map)) = serde_json::from_str::<Value>(candidate) {
                    best = Some(map);
                }
                i = end + 1;
                continue;
            }
        }
        i += 1;
    }
    best
}

/// Index of the `}` closing the `{` at `start`, if balanced.
fn find_balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (offset, &b) in bytes[start..].iter().enumerate() {
        if in_string {
            if escaped {
                escaped = false;
            } else if b == b'\\' {
                escaped = true;
            } else if b == b'"' {
                in_string = false;
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(start + offset);
                }
            }
            _ => {}
        }
    }
    None
}

/// Checks the object holds exactly `keys` and nothing else.
fn check_key_set(
    object: &serde_json::Map<String, Value>,
    keys: &[String],
) -> Result<(), WireError> {
    for key in object.keys() {
        if !keys.iter().any(|k| k == key) {
            return Err(WireError::UnknownKey(key.clone()));
        }
    }
    for key in keys {
        if !object.contains_key(key) {
            return Err(WireError::MissingKey(key.clone()));
        }
    }
    Ok(())
}

/// Parses `raw` as an answer to `request`, enforcing the phase schema.
pub fn parse_response(
    request: &DecisionRequest<'_>,
    raw: &str,
) -> Result<DecisionPayload, WireError> {
    let object = last_json_object(raw).ok_or(WireError::NoJsonObject)?;
    match request.phase {
        Phase::Act => parse_act(&object, &request.action_labels()),
        Phase::ProposeMediator => parse_mediator(&object, request),
        Phase::ProposeContract => parse_contract(&object, request),
        Phase::Vote => {
            let (prefix, count) = ballot_shape(request);
            parse_vote(&object, prefix, count)
        }
        Phase::Sign => parse_sign(&object),
    }
}

/// Ballot prefix and size for a vote request: mediator ballots key off
/// "M1", "M2", ... and contract ballots off "C1", "C2", ....
fn ballot_shape(request: &DecisionRequest<'_>) -> (char, usize) {
    match &request.context {
        MechanismContext::MediatorBallot { proposals } => ('M', proposals.len()),
        MechanismContext::ContractBallot { proposals } => ('C', proposals.len()),
        _ => ('M', 0),
    }
}

fn parse_act(
    object: &serde_json::Map<String, Value>,
    labels: &[String],
) -> Result<DecisionPayload, WireError> {
    check_key_set(object, labels)?;
    let mut weights = Vec::with_capacity(labels.len());
    for label in labels {
        let value = &object[label];
        let w = value
            .as_u64()
            .ok_or_else(|| WireError::NonIntegerWeight(label.clone()))?;
        weights.push(w);
    }
    let sum: u64 = weights.iter().sum();
    if sum != 100 {
        return Err(WireError::WeightSum(sum));
    }
    let weights = weights.into_iter().map(|w| w as u32).collect();
    // The sum check above is exactly MixedAction's own invariant.
    let mix = MixedAction::new(weights).expect("validated weights");
    Ok(DecisionPayload::Act(mix))
}

fn parse_mediator(
    object: &serde_json::Map<String, Value>,
    request: &DecisionRequest<'_>,
) -> Result<DecisionPayload, WireError> {
    let game = request.game;
    let n = game.players();
    let labels = request.action_labels();
    let keys: Vec<String> = (1..=n).map(|d| d.to_string()).collect();
    check_key_set(object, &keys)?;
    let mut plan = Vec::with_capacity(n);
    for key in &keys {
        let value = &object[key];
        let name = value
            .as_str()
            .ok_or_else(|| WireError::NotAnAction { key: key.clone(), got: value.to_string() })?;
        let action = labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| WireError::NotAnAction { key: key.clone(), got: name.to_string() })?;
        plan.push(MixedAction::pure(action, labels.len()));
    }
    let spec = MediatorSpec::new(plan, game).expect("plan shape follows the key set");
    Ok(DecisionPayload::Mediator(spec))
}

fn parse_contract(
    object: &serde_json::Map<String, Value>,
    request: &DecisionRequest<'_>,
) -> Result<DecisionPayload, WireError> {
    let labels = request.action_labels();
    check_key_set(object, &labels)?;
    let mut transfers = Vec::with_capacity(labels.len());
    for label in &labels {
        let value = &object[label];
        let t = value
            .as_i64()
            .ok_or_else(|| WireError::NonIntegerTransfer(label.clone()))?;
        transfers.push(t);
    }
    let spec = ContractSpec::new(transfers, request.game).expect("one transfer per action");
    Ok(DecisionPayload::Contract(spec))
}

fn parse_vote(
    object: &serde_json::Map<String, Value>,
    prefix: char,
    count: usize,
) -> Result<DecisionPayload, WireError> {
    let keys: Vec<String> = (1..=count).map(|i| format!("{prefix}{i}")).collect();
    check_key_set(object, &keys)?;
    let mut approvals = Vec::with_capacity(count);
    for key in &keys {
        let value = &object[key];
        let b = value.as_bool().ok_or_else(|| WireError::NotABool(key.clone()))?;
        approvals.push(b);
    }
    Ok(DecisionPayload::Vote(approvals))
}

fn parse_sign(object: &serde_json::Map<String, Value>) -> Result<DecisionPayload, WireError> {
    check_key_set(object, &["sign".to_string()])?;
    let b = object["sign"]
        .as_bool()
        .ok_or_else(|| WireError::NotABool("sign".to_string()))?;
    Ok(DecisionPayload::Sign(b))
}

/// Serializes a payload into the exact object the schema asks for, with
/// keys in schema order. Returns `None` for payloads the wire cannot carry
/// (a mediator plan with genuinely mixed entries).
pub fn canonical_wire(request: &DecisionRequest<'_>, payload: &DecisionPayload) -> Option<String> {
    let quote = |s: &str| serde_json::to_string(s).expect("strings serialize");
    match payload {
        DecisionPayload::Act(mix) => {
            let labels = request.action_labels();
            let pairs: Vec<String> = labels
                .iter()
                .zip(mix.weights())
                .map(|(l, w)| format!("{}: {w}", quote(l)))
                .collect();
            Some(format!("{{{}}}", pairs.join(", ")))
        }
        DecisionPayload::Mediator(spec) => {
            let labels = request.action_labels();
            let mut pairs = Vec::with_capacity(spec.plan.len());
            for (i, mix) in spec.plan.iter().enumerate() {
                let action = pure_action(mix)?;
                pairs.push(format!("\"{}\": {}", i + 1, quote(&labels[action])));
            }
            Some(format!("{{{}}}", pairs.join(", ")))
        }
        DecisionPayload::Contract(spec) => {
            let labels = request.action_labels();
            let pairs: Vec<String> = labels
                .iter()
                .zip(&spec.transfers)
                .map(|(l, t)| format!("{}: {t}", quote(l)))
                .collect();
            Some(format!("{{{}}}", pairs.join(", ")))
        }
        DecisionPayload::Vote(approvals) => {
            let (prefix, _) = ballot_shape(request);
            let pairs: Vec<String> = approvals
                .iter()
                .enumerate()
                .map(|(i, b)| format!("\"{prefix}{}\": {b}", i + 1))
                .collect();
            Some(format!("{{{}}}", pairs.join(", ")))
        }
        DecisionPayload::Sign(b) => Some(format!("{{\"sign\": {b}}}")),
    }
}

/// The action a point-mass distribution puts everything on, if it is one.
fn pure_action(mix: &MixedAction) -> Option<usize> {
    mix.weights().iter().position(|&w| w == 100)
}
