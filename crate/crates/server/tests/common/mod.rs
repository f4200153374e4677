#![allow(dead_code)]

use std::path::Path;
use std::time::Duration;

use serde_json::Value;
use sha2::{Digest, Sha256};

pub const GROUP_DIFF: &str = include_str!("../fixtures/group_diff.json");

/// The two group versions whose diff is `GROUP_DIFF`.
pub const GROUP_REF_YAML: &str = "configA:\n  pA: vA\nconfigB:\n  pB: vB\n";
pub const GROUP_TARGET_YAML: &str = "configA:\n  pA: vA2\nconfigC:\n  pC: vC\n";

pub struct Http {
    base: String,
    agent: ureq::Agent,
}

impl Http {
    pub fn new(base: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Self { base: base.into(), agent }
    }

    fn finish(result: Result<ureq::http::Response<ureq::Body>, ureq::Error>) -> (u16, String) {
        let mut response = result.expect("request reaches the server");
        let status = response.status().as_u16();
        (status, response.body_mut().read_to_string().expect("readable body"))
    }

    pub fn get(&self, path: &str) -> (u16, String) {
        Self::finish(self.agent.get(&format!("{}{path}", self.base)).call())
    }

    pub fn delete(&self, path: &str) -> (u16, String) {
        Self::finish(self.agent.delete(&format!("{}{path}", self.base)).call())
    }

    pub fn post(&self, path: &str, body: &Value) -> (u16, String) {
        self.post_raw(path, &body.to_string())
    }

    pub fn post_raw(&self, path: &str, body: &str) -> (u16, String) {
        let request = self.agent.post(&format!("{}{path}", self.base)).header("content-type", "application/json");
        Self::finish(request.send(body))
    }

    pub fn put(&self, path: &str, body: &Value) -> (u16, String) {
        let request = self.agent.put(&format!("{}{path}", self.base)).header("content-type", "application/json");
        Self::finish(request.send(body.to_string()))
    }
}

pub fn json(body: &str) -> Value {
    serde_json::from_str(body).unwrap_or_else(|e| panic!("not JSON ({e}): {body}"))
}

pub fn file_hash(path: &Path) -> Vec<u8> {
    Sha256::digest(std::fs::read(path).expect("store file readable")).to_vec()
}
