//! Parameter-level diffs between param sets and between config groups,
//! the inverse patch operation, and the JSON rendering of diff results.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, Serializer};

use crate::model::{GroupSets, ParamSet};

/// One reportable change to a single parameter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum AtomicDiff {
    Addition {
        key: String,
        value: String,
    },
    Deletion {
        key: String,
        value: String,
    },
    Modification {
        key: String,
        #[serde(rename = "oldValue")]
        old_value: String,
        #[serde(rename = "newValue")]
        new_value: String,
    },
}

impl AtomicDiff {
    pub fn addition(key: impl Into<String>, value: impl Into<String>) -> Self {
        AtomicDiff::Addition { key: key.into(), value: value.into() }
    }

    pub fn deletion(key: impl Into<String>, value: impl Into<String>) -> Self {
        AtomicDiff::Deletion { key: key.into(), value: value.into() }
    }

    pub fn modification(key: impl Into<String>, old: impl Into<String>, new: impl Into<String>) -> Self {
        AtomicDiff::Modification { key: key.into(), old_value: old.into(), new_value: new.into() }
    }

    pub fn key(&self) -> &str {
        match self {
            AtomicDiff::Addition { key, .. }
            | AtomicDiff::Deletion { key, .. }
            | AtomicDiff::Modification { key, .. } => key,
        }
    }

    /// The change that undoes this one.
    pub fn inverse(&self) -> Self {
        match self.clone() {
            AtomicDiff::Addition { key, value } => AtomicDiff::Deletion { key, value },
            AtomicDiff::Deletion { key, value } => AtomicDiff::Addition { key, value },
            AtomicDiff::Modification { key, old_value, new_value } => {
                AtomicDiff::Modification { key, old_value: new_value, new_value: old_value }
            }
        }
    }
}

/// Diff between two param sets: additions and modifications by key, then deletions by key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamSetDiff(pub Vec<AtomicDiff>);

impl ParamSetDiff {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AtomicDiff> {
        self.0.iter()
    }
}

/// Diff between two groups, keyed by set name; unchanged sets are absent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupDiff(pub BTreeMap<String, ParamSetDiff>);

impl GroupDiff {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&ParamSetDiff> {
        self.0.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamSetDiff)> + '_ {
        self.0.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Result of comparing two stored configurations of the same kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ConfigDiff {
    Params(ParamSetDiff),
    Group(GroupDiff),
}

impl ConfigDiff {
    pub fn is_empty(&self) -> bool {
        match self {
            ConfigDiff::Params(d) => d.is_empty(),
            ConfigDiff::Group(d) => d.is_empty(),
        }
    }
}

pub fn param_set_diff(reference: &ParamSet, target: &ParamSet) -> ParamSetDiff {
    // BTreeMap iteration already yields keys in order, so each pass is sorted.
    let mut diffs = Vec::new();
    for (key, value) in target.iter() {
        match reference.get(key) {
            None => diffs.push(AtomicDiff::addition(key, value)),
            Some(old) if old != value => diffs.push(AtomicDiff::modification(key, old, value)),
            Some(_) => {}
        }
    }
    for (key, value) in reference.iter() {
        if !target.contains_key(key) {
            diffs.push(AtomicDiff::deletion(key, value));
        }
    }
    ParamSetDiff(diffs)
}

pub fn config_group_diff(reference: &GroupSets, target: &GroupSets) -> GroupDiff {
    let mut out = BTreeMap::new();
    for (name, set) in target {
        let diff = match reference.get(name) {
            None => ParamSetDiff(set.iter().map(|(k, v)| AtomicDiff::addition(k, v)).collect()),
            Some(old) => param_set_diff(old, set),
        };
        if !diff.is_empty() {
            out.insert(name.clone(), diff);
        }
    }
    for (name, set) in reference {
        if !target.contains_key(name) && !set.is_empty() {
            let diff = ParamSetDiff(set.iter().map(|(k, v)| AtomicDiff::deletion(k, v)).collect());
            out.insert(name.clone(), diff);
        }
    }
    GroupDiff(out)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("conflicting diff on key {key:?}: {reason}")]
pub struct ConflictingDiff {
    pub key: String,
    pub reason: String,
}

fn conflict(key: &str, reason: impl Into<String>) -> ConflictingDiff {
    ConflictingDiff { key: key.to_owned(), reason: reason.into() }
}

/// Applies `diffs` to `reference`. Every diff must have been computed against it.
pub fn apply_param_set_diff(reference: &ParamSet, diffs: &[AtomicDiff]) -> Result<ParamSet, ConflictingDiff> {
    let mut out = reference.clone();
    let mut touched = std::collections::BTreeSet::new();
    for diff in diffs {
        let key = diff.key();
        if !touched.insert(key) {
            return Err(conflict(key, "key changed more than once"));
        }
        match diff {
            AtomicDiff::Addition { value, .. } => {
                if reference.contains_key(key) {
                    return Err(conflict(key, "addition of a key that already exists"));
                }
                out.insert(key, value.as_str());
            }
            AtomicDiff::Deletion { value, .. } => match reference.get(key) {
                Some(stored) if stored == value => {
                    out.remove(key);
                }
                Some(stored) => return Err(conflict(key, format!("deletion expects {value:?} but found {stored:?}"))),
                None => return Err(conflict(key, "deletion of a missing key")),
            },
            AtomicDiff::Modification { old_value, new_value, .. } => {
                if old_value == new_value {
                    return Err(conflict(key, "modification without a value change"));
                }
                match reference.get(key) {
                    Some(stored) if stored == old_value => {
                        out.insert(key, new_value.as_str());
                    }
                    Some(stored) => {
                        return Err(conflict(key, format!("modification expects {old_value:?} but found {stored:?}")))
                    }
                    None => return Err(conflict(key, "modification of a missing key")),
                }
            }
        }
    }
    Ok(out)
}

/// Applies a group diff. Absent sets are created by additions; sets that were
/// changed and end up empty are removed.
pub fn apply_group_diff(reference: &GroupSets, diffs: &GroupDiff) -> Result<GroupSets, ConflictingDiff> {
    let mut out = reference.clone();
    let empty = ParamSet::new();
    for (name, diff) in diffs.iter() {
        let base = reference.get(name).unwrap_or(&empty);
        let applied = apply_param_set_diff(base, &diff.0)?;
        if applied.is_empty() && !diff.is_empty() {
            out.remove(name);
        } else {
            out.insert(name.to_owned(), applied);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JsonStyle {
    /// Four-space indent, arrays closed on the line of their last element.
    #[default]
    Pretty,
    Compact,
}

/// Indenting formatter that closes a non-empty array right after its last
/// element (`}]`) instead of on a line of its own.
struct DiffFormatter {
    indent: usize,
    has_value: bool,
}

impl DiffFormatter {
    fn newline<W: ?Sized + io::Write>(&self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b"\n")?;
        for _ in 0..self.indent {
            writer.write_all(b"    ")?;
        }
        Ok(())
    }
}

impl Formatter for DiffFormatter {
    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        writer.write_all(b"[")
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent -= 1;
        writer.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent += 1;
        self.has_value = false;
        writer.write_all(b"{")
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.indent -= 1;
        if self.has_value {
            self.newline(writer)?;
        }
        writer.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        writer.write_all(b": ")
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, _writer: &mut W) -> io::Result<()> {
        self.has_value = true;
        Ok(())
    }
}

fn render<T: Serialize + ?Sized>(value: &T, style: JsonStyle) -> String {
    let mut buf = Vec::new();
    let result = match style {
        JsonStyle::Pretty => {
            let mut ser = Serializer::with_formatter(&mut buf, DiffFormatter { indent: 0, has_value: false });
            value.serialize(&mut ser)
        }
        JsonStyle::Compact => {
            let mut ser = Serializer::with_formatter(&mut buf, CompactFormatter);
            value.serialize(&mut ser)
        }
    };
    result.expect("diff serialization is infallible");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn render_param_set_diff(diff: &ParamSetDiff, style: JsonStyle) -> String {
    render(diff, style)
}

pub fn render_group_diff(diff: &GroupDiff, style: JsonStyle) -> String {
    render(diff, style)
}

pub fn render_diff_json(diff: &ConfigDiff, style: JsonStyle) -> String {
    render(diff, style)
}
