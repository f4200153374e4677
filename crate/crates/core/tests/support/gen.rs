//! Seeded generators for configs, groups and conflict-free mutation sets,
//! plus independent reference implementations used as oracles.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use confplane_core::diff::AtomicDiff;
use rand::seq::SliceRandom;
use rand::Rng;

pub type Params = BTreeMap<String, String>;
pub type Sets = BTreeMap<String, Params>;

/// Keys are short words over a five-symbol alphabet.
pub const KEY_ALPHABET: [char; 5] = ['a', 'b', 'c', 'd', 'e'];

pub fn key<R: Rng>(rng: &mut R) -> String {
    let len = rng.random_range(1..=2);
    (0..len).map(|_| KEY_ALPHABET[rng.random_range(0..KEY_ALPHABET.len())]).collect()
}

/// Values include characters that need quoting in YAML and JSON.
pub fn value<R: Rng>(rng: &mut R) -> String {
    const POOL: &[&str] = &["v", "1", "0x1F", "true", "", " ", "a b", "x: y", "#c", "\"q\"", "é", "null", "-", "3.0"];
    let parts = rng.random_range(1..=2);
    (0..parts).map(|_| POOL[rng.random_range(0..POOL.len())]).collect()
}

pub fn params<R: Rng>(rng: &mut R, max: usize) -> Params {
    let n = rng.random_range(0..=max);
    (0..n).map(|_| (key(rng), value(rng))).collect()
}

/// Groups whose named sets are all non-empty.
pub fn sets<R: Rng>(rng: &mut R, max_sets: usize) -> Sets {
    let n = rng.random_range(0..=max_sets);
    let mut out = Sets::new();
    for _ in 0..n {
        let name = format!("set{}", rng.random_range(0..6));
        let mut p = params(rng, 5);
        if p.is_empty() {
            p.insert(key(rng), value(rng));
        }
        out.insert(name, p);
    }
    out
}

/// A target related to `base`: some keys kept, some changed, some dropped, some added.
pub fn related_params<R: Rng>(rng: &mut R, base: &Params) -> Params {
    let mut out = Params::new();
    for (k, v) in base {
        match rng.random_range(0..4) {
            0 => {}
            1 => {
                out.insert(k.clone(), format!("{v}~"));
            }
            _ => {
                out.insert(k.clone(), v.clone());
            }
        }
    }
    for _ in 0..rng.random_range(0..3) {
        out.entry(key(rng)).or_insert_with(|| value(rng));
    }
    out
}

pub fn related_sets<R: Rng>(rng: &mut R, base: &Sets) -> Sets {
    let mut out = Sets::new();
    for (name, p) in base {
        if rng.random_range(0..5) == 0 {
            continue;
        }
        let q = related_params(rng, p);
        if !q.is_empty() {
            out.insert(name.clone(), q);
        }
    }
    if rng.random_bool(0.3) {
        let extra = sets(rng, 1);
        for (name, p) in extra {
            out.entry(name).or_insert(p);
        }
    }
    out
}

/// Conflict-free mutations of `base`: every key is touched at most once,
/// additions use absent keys, deletions and modifications use present ones.
pub fn mutations<R: Rng>(rng: &mut R, base: &Params) -> Vec<AtomicDiff> {
    let mut out = Vec::new();
    let mut touched = BTreeSet::new();
    for (k, v) in base {
        match rng.random_range(0..3) {
            0 => {
                out.push(AtomicDiff::deletion(k.clone(), v.clone()));
                touched.insert(k.clone());
            }
            1 => {
                out.push(AtomicDiff::modification(k.clone(), v.clone(), format!("{v}*")));
                touched.insert(k.clone());
            }
            _ => {}
        }
    }
    for _ in 0..rng.random_range(0..4) {
        let k = key(rng);
        if !base.contains_key(&k) && touched.insert(k.clone()) {
            out.push(AtomicDiff::addition(k, value(rng)));
        }
    }
    out.shuffle(rng);
    out
}

/// Reference application of a mutation set, written without the library.
pub fn oracle_apply(base: &Params, diffs: &[AtomicDiff]) -> Params {
    let mut out = base.clone();
    for d in diffs {
        match d {
            AtomicDiff::Addition { key, value } => {
                assert!(out.insert(key.clone(), value.clone()).is_none());
            }
            AtomicDiff::Deletion { key, .. } => {
                assert!(out.remove(key).is_some());
            }
            AtomicDiff::Modification { key, new_value, .. } => {
                assert!(out.insert(key.clone(), new_value.clone()).is_some());
            }
        }
    }
    out
}

/// Reference diff: classify every key of the union by membership and equality.
pub fn oracle_diff(reference: &Params, target: &Params) -> BTreeSet<AtomicDiff> {
    let keys: BTreeSet<&String> = reference.keys().chain(target.keys()).collect();
    let mut out = BTreeSet::new();
    for k in keys {
        match (reference.get(k), target.get(k)) {
            (None, Some(t)) => {
                out.insert(AtomicDiff::addition(k.clone(), t.clone()));
            }
            (Some(r), None) => {
                out.insert(AtomicDiff::deletion(k.clone(), r.clone()));
            }
            (Some(r), Some(t)) if r != t => {
                out.insert(AtomicDiff::modification(k.clone(), r.clone(), t.clone()));
            }
            _ => {}
        }
    }
    out
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).unwrap()
}

/// Block YAML with entries in the order given.
pub fn yaml_in_order(entries: &[(&String, &String)], indent: &str) -> String {
    entries.iter().map(|(k, v)| format!("{indent}{}: {}\n", quoted(k), quoted(v))).collect()
}

pub fn shuffled_standalone_yaml<R: Rng>(rng: &mut R, p: &Params) -> String {
    let mut entries: Vec<_> = p.iter().collect();
    entries.shuffle(rng);
    if entries.is_empty() {
        return "{}\n".into();
    }
    yaml_in_order(&entries, "")
}

pub fn shuffled_group_yaml<R: Rng>(rng: &mut R, s: &Sets) -> String {
    let mut names: Vec<_> = s.iter().collect();
    names.shuffle(rng);
    if names.is_empty() {
        return "{}\n".into();
    }
    let mut out = String::new();
    for (name, p) in names {
        let mut entries: Vec<_> = p.iter().collect();
        entries.shuffle(rng);
        if entries.is_empty() {
            out.push_str(&format!("{}: {{}}\n", quoted(name)));
        } else {
            out.push_str(&format!("{}:\n{}", quoted(name), yaml_in_order(&entries, "  ")));
        }
    }
    out
}
