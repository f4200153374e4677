//! Node pool with typed labels, conjunctive label queries, and placement of
//! stored configurations into namespaces on the selected nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::model::{ConfigId, ConfigKind};
use crate::store::{seq_key, KvRead, Store, StoreError};
use crate::versions::{config_key, VersionedRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelValue {
    Bool(bool),
    Number(f64),
    Text(String),
}

impl LabelValue {
    /// `true`/`false` become booleans, finite numerics become numbers, anything else text.
    pub fn parse(text: &str) -> Self {
        match text {
            "true" => return LabelValue::Bool(true),
            "false" => return LabelValue::Bool(false),
            _ => {}
        }
        let numeric =
            !text.is_empty() && text.chars().all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
        match text.parse::<f64>() {
            Ok(x) if numeric && x.is_finite() => LabelValue::Number(x),
            _ => LabelValue::Text(text.to_owned()),
        }
    }
}

impl fmt::Display for LabelValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelValue::Bool(b) => write!(f, "{b}"),
            LabelValue::Number(x) => write!(f, "{x}"),
            LabelValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Label {
    pub key: String,
    pub value: LabelValue,
}

impl Label {
    pub fn new(key: impl Into<String>, value: LabelValue) -> Self {
        Self { key: key.into(), value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Node {
    pub node_id: String,
    pub organization: String,
    pub labels: BTreeMap<String, LabelValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Eq,
    Ne,
    Gt,
    Lt,
    Ge,
    Le,
}

impl Op {
    pub fn symbol(self) -> &'static str {
        match self {
            Op::Eq => "=",
            Op::Ne => "!=",
            Op::Gt => ">",
            Op::Lt => "<",
            Op::Ge => ">=",
            Op::Le => "<=",
        }
    }

    fn is_ordering(self) -> bool {
        matches!(self, Op::Gt | Op::Lt | Op::Ge | Op::Le)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub key: String,
    pub op: Op,
    pub value: LabelValue,
}

impl Condition {
    pub fn new(key: impl Into<String>, op: Op, value: LabelValue) -> Self {
        Self { key: key.into(), op, value }
    }

    fn holds(&self, labels: &BTreeMap<String, LabelValue>) -> bool {
        let Some(actual) = labels.get(&self.key) else { return false };
        match (actual, &self.value) {
            (LabelValue::Number(a), LabelValue::Number(b)) => match self.op {
                Op::Eq => a == b,
                Op::Ne => a != b,
                Op::Gt => a > b,
                Op::Lt => a < b,
                Op::Ge => a >= b,
                Op::Le => a <= b,
            },
            (LabelValue::Text(a), LabelValue::Text(b)) => match self.op {
                Op::Eq => a == b,
                Op::Ne => a != b,
                _ => false,
            },
            (LabelValue::Bool(a), LabelValue::Bool(b)) => match self.op {
                Op::Eq => a == b,
                Op::Ne => a != b,
                _ => false,
            },
            _ => false,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.key, self.op.symbol(), self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid label query: {0}")]
pub struct QueryError(pub String);

/// Non-empty conjunction of label conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelQuery {
    conditions: Vec<Condition>,
}

impl LabelQuery {
    pub fn new(conditions: Vec<Condition>) -> Result<Self, QueryError> {
        if conditions.is_empty() {
            return Err(QueryError("a query needs at least one condition".into()));
        }
        for c in &conditions {
            if c.key.is_empty() {
                return Err(QueryError("condition keys must not be empty".into()));
            }
            if c.op.is_ordering() && !matches!(c.value, LabelValue::Number(_)) {
                return Err(QueryError(format!("operator {} needs a numeric value in {c}", c.op.symbol())));
            }
        }
        Ok(Self { conditions })
    }

    pub fn conditions(&self) -> &[Condition] {
        &self.conditions
    }

    pub fn matches(&self, node: &Node) -> bool {
        self.conditions.iter().all(|c| c.holds(&node.labels))
    }
}

/// True iff every condition of `query` holds on the node's labels.
pub fn matches(query: &LabelQuery, node: &Node) -> bool {
    query.matches(node)
}

const OPERATORS: [(&str, Op); 9] = [
    ("!=", Op::Ne),
    (">=", Op::Ge),
    ("<=", Op::Le),
    ("≠", Op::Ne),
    ("≥", Op::Ge),
    ("≤", Op::Le),
    ("=", Op::Eq),
    (">", Op::Gt),
    ("<", Op::Lt),
];

fn parse_condition(text: &str) -> Result<Condition, QueryError> {
    let start = text
        .char_indices()
        .find(|(_, c)| matches!(c, '=' | '!' | '<' | '>' | '≠' | '≥' | '≤'))
        .map(|(i, _)| i)
        .ok_or_else(|| QueryError(format!("no operator in condition {text:?}")))?;
    let rest = &text[start..];
    let (symbol, op) = OPERATORS
        .iter()
        .find(|(symbol, _)| rest.starts_with(symbol))
        .ok_or_else(|| QueryError(format!("unknown operator in condition {text:?}")))?;
    let key = text[..start].trim();
    let value = rest[symbol.len()..].trim();
    Ok(Condition::new(key, *op, LabelValue::parse(value)))
}

/// `region=eu,cores>4`: comma-separated conditions, all of which must hold.
impl FromStr for LabelQuery {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().is_empty() {
            return Err(QueryError("empty query".into()));
        }
        LabelQuery::new(s.split(',').map(parse_condition).collect::<Result<_, _>>()?)
    }
}

impl fmt::Display for LabelQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Placement {
    pub config_id: ConfigId,
    pub kind: ConfigKind,
    pub namespace: String,
    pub node_ids: Vec<String>,
    pub placed_seq: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum DisseminationError {
    #[error("node {0:?} is already registered")]
    AlreadyRegistered(String),
    #[error("node {0:?} not found")]
    NodeNotFound(String),
    #[error("invalid labels: {0}")]
    InvalidLabels(String),
    #[error("invalid {field}: {reason}")]
    InvalidName { field: &'static str, reason: String },
    #[error("{kind} config {id} not found")]
    ConfigNotFound { id: ConfigId, kind: ConfigKind },
    #[error("query {query} matched no nodes in organization {organization}")]
    NoMatchingNodes { organization: String, query: String },
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn check_name(field: &'static str, value: &str) -> Result<(), DisseminationError> {
    crate::model::check_segment(field, value)
        .map_err(|e| DisseminationError::InvalidName { field, reason: e.to_string() })
}

fn label_map(labels: Vec<Label>) -> Result<BTreeMap<String, LabelValue>, DisseminationError> {
    let mut map = BTreeMap::new();
    for Label { key, value } in labels {
        if key.is_empty() {
            return Err(DisseminationError::InvalidLabels("label keys must not be empty".into()));
        }
        if let LabelValue::Number(x) = value {
            if !x.is_finite() {
                return Err(DisseminationError::InvalidLabels(format!("label {key:?} is not a finite number")));
            }
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(DisseminationError::InvalidLabels(format!("duplicate label key {key:?}")));
        }
    }
    Ok(map)
}

fn node_key(node_id: &str) -> String {
    format!("node/{node_id}")
}

fn placement_key(seq: u64) -> String {
    format!("plc/{}", seq_key(seq))
}

fn index_prefix(node_id: &str, namespace: &str) -> String {
    format!("plx/{node_id}/{namespace}/")
}

fn select_from<R: KvRead>(view: &R, organization: &str, query: &LabelQuery) -> Result<Vec<Node>, StoreError> {
    Ok(view
        .scan_json::<Node>("node/")?
        .into_iter()
        .map(|(_, node)| node)
        .filter(|node| node.organization == organization && query.matches(node))
        .collect())
}

/// Node registry and placement journal over the shared store.
#[derive(Debug, Clone)]
pub struct Dissemination {
    store: Arc<Store>,
}

impl Dissemination {
    pub fn new(store: Arc<Store>) -> Self {
        Self { store }
    }

    pub fn register_node(
        &self,
        node_id: &str,
        organization: &str,
        labels: Vec<Label>,
    ) -> Result<Node, DisseminationError> {
        check_name("node id", node_id)?;
        check_name("organization", organization)?;
        let node =
            Node { node_id: node_id.to_owned(), organization: organization.to_owned(), labels: label_map(labels)? };
        let key = node_key(node_id);
        self.store.write(|batch| {
            if batch.contains(&key)? {
                return Err(DisseminationError::AlreadyRegistered(node_id.to_owned()));
            }
            batch.put_json(&key, &node)?;
            Ok(node)
        })
    }

    /// Replaces the node's whole label set.
    pub fn set_labels(&self, node_id: &str, labels: Vec<Label>) -> Result<Node, DisseminationError> {
        let labels = label_map(labels)?;
        let key = node_key(node_id);
        self.store.write(|batch| {
            let mut node: Node = batch
                .get_json(&key)?
                .filter(|_| check_name("node id", node_id).is_ok())
                .ok_or_else(|| DisseminationError::NodeNotFound(node_id.to_owned()))?;
            node.labels = labels;
            batch.put_json(&key, &node)?;
            Ok(node)
        })
    }

    pub fn get_node(&self, node_id: &str) -> Result<Node, DisseminationError> {
        if check_name("node id", node_id).is_err() {
            return Err(DisseminationError::NodeNotFound(node_id.to_owned()));
        }
        self.store
            .snapshot()?
            .get_json(&node_key(node_id))?
            .ok_or_else(|| DisseminationError::NodeNotFound(node_id.to_owned()))
    }

    /// All nodes of the organization, ordered by node id.
    pub fn list_nodes(&self, organization: &str) -> Result<Vec<Node>, DisseminationError> {
        Ok(self
            .store
            .snapshot()?
            .scan_json::<Node>("node/")?
            .into_iter()
            .map(|(_, node)| node)
            .filter(|node| node.organization == organization)
            .collect())
    }

    /// The organization's nodes matching `query`, ordered by node id.
    pub fn select_nodes(&self, organization: &str, query: &LabelQuery) -> Result<Vec<Node>, DisseminationError> {
        Ok(select_from(&self.store.snapshot()?, organization, query)?)
    }

    /// Places a stored config into `namespace` on every node of the config's
    /// organization that currently matches `query`.
    pub fn disseminate(
        &self,
        config_id: &ConfigId,
        kind: ConfigKind,
        namespace: &str,
        query: &LabelQuery,
    ) -> Result<Placement, DisseminationError> {
        check_name("namespace", namespace)?;
        self.store.write(|batch| {
            if !batch.contains(&config_key(kind, config_id))? {
                return Err(DisseminationError::ConfigNotFound { id: config_id.clone(), kind });
            }
            let organization = config_id.organization();
            let nodes = select_from(batch, organization, query)?;
            if nodes.is_empty() {
                return Err(DisseminationError::NoMatchingNodes {
                    organization: organization.to_owned(),
                    query: query.to_string(),
                });
            }
            let placed_seq = batch.next_seq()?;
            let placement = Placement {
                config_id: config_id.clone(),
                kind,
                namespace: namespace.to_owned(),
                node_ids: nodes.into_iter().map(|n| n.node_id).collect(),
                placed_seq,
            };
            batch.put_json(&placement_key(placed_seq), &placement)?;
            for node_id in &placement.node_ids {
                let index = format!("{}{}", index_prefix(node_id, namespace), seq_key(placed_seq));
                batch.put_json(&index, &placed_seq)?;
            }
            Ok(placement)
        })
    }

    /// Placements that put something on `node_id` in `namespace`, oldest first.
    pub fn placements_for(&self, node_id: &str, namespace: &str) -> Result<Vec<Placement>, DisseminationError> {
        let snapshot = self.store.snapshot()?;
        self.placements_in(&snapshot, node_id, namespace)
    }

    fn placements_in<R: KvRead>(
        &self,
        view: &R,
        node_id: &str,
        namespace: &str,
    ) -> Result<Vec<Placement>, DisseminationError> {
        let mut out = Vec::new();
        if check_name("namespace", namespace).is_err() {
            return Ok(out);
        }
        for (_, seq) in view.scan_json::<u64>(&index_prefix(node_id, namespace))? {
            if let Some(placement) = view.get_json::<Placement>(&placement_key(seq))? {
                out.push(placement);
            }
        }
        Ok(out)
    }

    /// Config versions placed on the node in the namespace, in placement order.
    /// A version placed more than once is returned once.
    pub fn fetch_config(
        &self,
        node_id: &str,
        namespace: &str,
        name: Option<&str>,
    ) -> Result<Vec<VersionedRecord>, DisseminationError> {
        if check_name("node id", node_id).is_err() {
            return Err(DisseminationError::NodeNotFound(node_id.to_owned()));
        }
        let snapshot = self.store.snapshot()?;
        if !snapshot.contains(&node_key(node_id))? {
            return Err(DisseminationError::NodeNotFound(node_id.to_owned()));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for placement in self.placements_in(&snapshot, node_id, namespace)? {
            if name.is_some_and(|n| n != placement.config_id.name()) {
                continue;
            }
            let key = config_key(placement.kind, &placement.config_id);
            if !seen.insert(key.clone()) {
                continue;
            }
            if let Some(record) = snapshot.get_json::<VersionedRecord>(&key)? {
                out.push(record);
            }
        }
        Ok(out)
    }
}
