//! Blocking HTTP client for the control plane API.

use std::time::Duration;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::Deserialize;
use serde_json::Value;

/// Everything but RFC 3986 unreserved characters.
const SEGMENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

pub fn encode(part: &str) -> String {
    utf8_percent_encode(part, SEGMENT).to_string()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Violation {
    pub path: String,
    pub rule: String,
    pub message: String,
}

#[derive(Debug)]
pub enum ClientError {
    /// The server answered with an error body.
    Api { status: u16, code: String, message: String, details: Vec<Violation> },
    /// No usable answer: connection refused, timeout, garbled response.
    Transport(String),
}

impl std::fmt::Display for ClientError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClientError::Api { code, message, .. } => write!(f, "{code}: {message}"),
            ClientError::Transport(message) => f.write_str(message),
        }
    }
}

#[derive(Deserialize)]
struct ErrorBody {
    code: String,
    message: String,
    #[serde(default)]
    details: Vec<Violation>,
}

/// A successful response: the body text exactly as sent, plus its parsed form.
pub struct Reply {
    pub body: String,
    pub value: Value,
}

pub struct Client {
    base: String,
    agent: ureq::Agent,
}

impl Client {
    pub fn new(server: &str) -> Self {
        let server = server.trim_end_matches('/');
        let base = if server.contains("://") { server.to_owned() } else { format!("http://{server}") };
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build()
            .into();
        Self { base, agent }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub fn get(&self, path: &str) -> Result<Reply, ClientError> {
        self.finish(self.agent.get(&self.url(path)).call())
    }

    pub fn delete(&self, path: &str) -> Result<Reply, ClientError> {
        self.finish(self.agent.delete(&self.url(path)).call())
    }

    pub fn post(&self, path: &str, body: &Value) -> Result<Reply, ClientError> {
        let request = self.agent.post(&self.url(path)).header("content-type", "application/json");
        self.finish(request.send(body.to_string()))
    }

    pub fn put(&self, path: &str, body: &Value) -> Result<Reply, ClientError> {
        let request = self.agent.put(&self.url(path)).header("content-type", "application/json");
        self.finish(request.send(body.to_string()))
    }

    fn finish(&self, result: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> Result<Reply, ClientError> {
        let transport = |e: ureq::Error| ClientError::Transport(format!("cannot reach server at {}: {e}", self.base));
        let mut response = result.map_err(transport)?;
        let status = response.status().as_u16();
        let body = response.body_mut().read_to_string().map_err(transport)?;
        if (200..300).contains(&status) {
            let value = serde_json::from_str(&body)
                .map_err(|e| ClientError::Transport(format!("server sent invalid JSON: {e}")))?;
            return Ok(Reply { body, value });
        }
        match serde_json::from_str::<ErrorBody>(&body) {
            Ok(err) => Err(ClientError::Api { status, code: err.code, message: err.message, details: err.details }),
            Err(_) => Err(ClientError::Api {
                status,
                code: format!("HTTP_{status}"),
                message: body.trim().to_owned(),
                details: Vec::new(),
            }),
        }
    }
}
