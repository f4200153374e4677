//! Random labelled node pools and conjunctive queries in their textual form,
//! with a brute-force matcher that does not use the library.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    Num(f64),
    Text(String),
}

impl Value {
    pub fn json(&self) -> serde_json::Value {
        match self {
            Value::Bool(b) => (*b).into(),
            Value::Num(x) => (*x).into(),
            Value::Text(s) => s.as_str().into(),
        }
    }

    /// Inverse of the textual rendering used in queries.
    fn from_text(text: &str) -> Self {
        match text {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => match text.parse::<f64>() {
                Ok(x) => Value::Num(x),
                Err(_) => Value::Text(text.to_owned()),
            },
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Num(x) => write!(f, "{x}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

pub type Labels = BTreeMap<String, Value>;

#[derive(Debug, Clone)]
pub struct PoolNode {
    pub id: String,
    pub labels: Labels,
}

const TEXT_KEYS: [&str; 2] = ["zone", "tier"];
const NUM_KEYS: [&str; 2] = ["cores", "mem"];
const BOOL_KEYS: [&str; 1] = ["gpu"];
const WORDS: [&str; 4] = ["eu", "us", "web", "db"];

fn any_value<R: Rng>(rng: &mut R, key: &str) -> Value {
    // Mostly the key's usual type, sometimes another one.
    let kind = if rng.random_bool(0.85) {
        if TEXT_KEYS.contains(&key) {
            0
        } else if NUM_KEYS.contains(&key) {
            1
        } else {
            2
        }
    } else {
        rng.random_range(0..3)
    };
    match kind {
        0 => Value::Text(WORDS[rng.random_range(0..WORDS.len())].to_owned()),
        1 => Value::Num(rng.random_range(0..9) as f64),
        _ => Value::Bool(rng.random_bool(0.5)),
    }
}

fn all_keys() -> impl Iterator<Item = &'static str> {
    TEXT_KEYS.into_iter().chain(NUM_KEYS).chain(BOOL_KEYS)
}

pub fn pool<R: Rng>(rng: &mut R, max_nodes: usize, prefix: &str) -> Vec<PoolNode> {
    let n = rng.random_range(1..=max_nodes);
    (0..n)
        .map(|i| {
            let mut labels = Labels::new();
            for k in all_keys() {
                if rng.random_bool(0.8) {
                    labels.insert(k.to_owned(), any_value(rng, k));
                }
            }
            PoolNode { id: format!("{prefix}n{i:03}"), labels }
        })
        .collect()
}

/// A conjunction of one to three conditions rendered like `cores>=4,zone=eu`.
pub fn query<R: Rng>(rng: &mut R) -> String {
    let keys: Vec<&str> = all_keys().collect();
    let n = rng.random_range(1..=3);
    let mut parts = Vec::new();
    for _ in 0..n {
        let key = keys[rng.random_range(0..keys.len())];
        let value = any_value(rng, key);
        let op = match value {
            Value::Num(_) => ["=", "!=", ">", "<", ">=", "<="][rng.random_range(0..6)],
            _ => ["=", "!="][rng.random_range(0..2)],
        };
        parts.push(format!("{key}{op}{value}"));
    }
    parts.join(",")
}

fn holds(labels: &Labels, key: &str, op: &str, want: &Value) -> bool {
    let Some(have) = labels.get(key) else { return false };
    match (have, want) {
        (Value::Num(a), Value::Num(b)) => match op {
            "=" => a == b,
            "!=" => a != b,
            ">" => a > b,
            "<" => a < b,
            ">=" => a >= b,
            "<=" => a <= b,
            _ => unreachable!(),
        },
        (Value::Text(a), Value::Text(b)) => (op == "=") == (a == b) && matches!(op, "=" | "!="),
        (Value::Bool(a), Value::Bool(b)) => (op == "=") == (a == b) && matches!(op, "=" | "!="),
        _ => false,
    }
}

/// Ids of the nodes satisfying every condition of `query`, sorted.
pub fn brute_force(nodes: &[PoolNode], query: &str) -> Vec<String> {
    let conditions: Vec<(String, &str, Value)> = query
        .split(',')
        .map(|c| {
            let op = ["!=", ">=", "<=", "=", ">", "<"].into_iter().find(|op| c.contains(op)).unwrap();
            let (key, value) = c.split_once(op).unwrap();
            (key.to_owned(), op, Value::from_text(value))
        })
        .collect();
    let mut out: Vec<String> = nodes
        .iter()
        .filter(|n| conditions.iter().all(|(k, op, v)| holds(&n.labels, k, op, v)))
        .map(|n| n.id.clone())
        .collect();
    out.sort();
    out
}
