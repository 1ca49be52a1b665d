//! Line-delimited JSON wire protocol between the optimizer and an external
//! evaluator process. Unknown fields are ignored; a version mismatch aborts
//! the connection.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::space::{FlowConfig, ParamValue};
use crate::{Error, Result};

pub const PROTOCOL_VERSION: u64 = 1;

/// Capability set exchanged in the handshake.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireCaps {
    #[serde(default = "default_batch")]
    pub batch_size: u32,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
}

fn default_batch() -> u32 {
    1
}

fn default_timeout() -> f64 {
    60.0
}

impl Default for WireCaps {
    fn default() -> Self {
        WireCaps {
            batch_size: default_batch(),
            timeout_s: default_timeout(),
        }
    }
}

/// Handshake record, sent by both sides before any request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hello {
    pub v: u64,
    #[serde(rename = "type")]
    pub msg_type: String,
    #[serde(default)]
    pub caps: Option<WireCaps>,
}

impl Hello {
    pub fn new(caps: WireCaps) -> Hello {
        Hello {
            v: PROTOCOL_VERSION,
            msg_type: "hello".into(),
            caps: Some(caps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRequest {
    pub v: u64,
    #[serde(rename = "type")]
    pub msg_type: String,
    pub req_id: String,
    pub trial: String,
    pub config: BTreeMap<String, ParamValue>,
    pub question: String,
}

impl EvalRequest {
    pub fn new(req_id: &str, trial: u64, config: &FlowConfig, question: &str) -> EvalRequest {
        EvalRequest {
            v: PROTOCOL_VERSION,
            msg_type: "eval".into(),
            req_id: req_id.to_string(),
            trial: trial.to_string(),
            config: config.assignments.clone(),
            question: question.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResponse {
    pub v: u64,
    pub req_id: String,
    pub passed: bool,
    pub cost_usd: f64,
    pub latency_s: f64,
    pub error: Option<String>,
}

/// Parses and version-checks one handshake line.
pub fn parse_hello(line: &str) -> Result<Hello> {
    let hello: Hello = serde_json::from_str(line)
        .map_err(|e| Error::Protocol(format!("malformed hello: {e}")))?;
    if hello.msg_type != "hello" {
        return Err(Error::Protocol(format!(
            "expected hello, got `{}`",
            hello.msg_type
        )));
    }
    if hello.v != PROTOCOL_VERSION {
        return Err(Error::VersionMismatch(hello.v));
    }
    Ok(hello)
}
