//! Configuration domain types and their YAML / JSON forms.
//!
//! Standalone configs are flat string maps; groups are maps of named flat
//! string maps. Everything is keyed by `BTreeMap`, so param order never
//! affects equality and every rendering is lexicographic.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::yaml::{self, Node, NodeKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IdError {
    #[error("{field} must not be empty")]
    Empty { field: &'static str },
    #[error("{field} must not contain '/': {value:?}")]
    Slash { field: &'static str, value: String },
    #[error("expected <organization>/<name>/<version>, got {0:?}")]
    Format(String),
}

pub(crate) fn check_segment(field: &'static str, value: &str) -> Result<(), IdError> {
    if value.is_empty() {
        return Err(IdError::Empty { field });
    }
    if value.contains('/') {
        return Err(IdError::Slash { field, value: value.to_owned() });
    }
    Ok(())
}

macro_rules! identity_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
        pub struct $name {
            organization: String,
            name: String,
            version: String,
        }

        impl $name {
            pub fn new(
                organization: impl Into<String>,
                name: impl Into<String>,
                version: impl Into<String>,
            ) -> Result<Self, IdError> {
                let (organization, name, version) = (organization.into(), name.into(), version.into());
                check_segment("organization", &organization)?;
                check_segment("name", &name)?;
                check_segment("version", &version)?;
                Ok(Self { organization, name, version })
            }

            pub fn organization(&self) -> &str {
                &self.organization
            }

            pub fn name(&self) -> &str {
                &self.name
            }

            pub fn version(&self) -> &str {
                &self.version
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}/{}/{}", self.organization, self.name, self.version)
            }
        }

        impl FromStr for $name {
            type Err = IdError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let mut parts = s.split('/');
                match (parts.next(), parts.next(), parts.next(), parts.next()) {
                    (Some(org), Some(name), Some(version), None) => Self::new(org, name, version),
                    _ => Err(IdError::Format(s.to_owned())),
                }
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                #[derive(Deserialize)]
                struct Raw {
                    organization: String,
                    name: String,
                    version: String,
                }
                let raw = Raw::deserialize(deserializer)?;
                Self::new(raw.organization, raw.name, raw.version).map_err(D::Error::custom)
            }
        }
    };
}

identity_type!(
    /// Organization / name / version triple identifying one immutable config.
    ConfigId
);

identity_type!(
    /// Organization / name / version triple identifying one schema version.
    SchemaId
);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub key: String,
    pub value: String,
}

impl Param {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Self {
        Self { key: key.into(), value: value.into() }
    }
}

/// Key-unique collection of string parameters.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamSet(BTreeMap<String, String>);

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set, rejecting repeated keys and empty keys.
    pub fn try_from_params<I>(params: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = Param>,
    {
        let mut map = BTreeMap::new();
        for Param { key, value } in params {
            if key.is_empty() {
                return Err(ModelError::WrongShape("parameter keys must not be empty".into()));
            }
            if map.contains_key(&key) {
                return Err(ModelError::DuplicateKey(key));
            }
            map.insert(key, value);
        }
        Ok(Self(map))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    /// Inserts or overwrites; returns the previous value.
    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) -> Option<String> {
        self.0.insert(key.into(), value.into())
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Iterates `(key, value)` in lexicographic key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn params(&self) -> impl Iterator<Item = Param> + '_ {
        self.iter().map(|(k, v)| Param::new(k, v))
    }

    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.0
    }
}

/// Later pairs overwrite earlier ones; use [`ParamSet::try_from_params`] to reject duplicates.
impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for ParamSet {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedParamSet {
    pub name: String,
    pub params: ParamSet,
}

impl NamedParamSet {
    pub fn new(name: impl Into<String>, params: ParamSet) -> Self {
        Self { name: name.into(), params }
    }
}

/// Payload of a configuration group: set name to its parameters.
pub type GroupSets = BTreeMap<String, ParamSet>;

/// Builds group sets from named sets, rejecting repeated or empty names.
pub fn group_sets<I>(sets: I) -> Result<GroupSets, ModelError>
where
    I: IntoIterator<Item = NamedParamSet>,
{
    let mut map = BTreeMap::new();
    for NamedParamSet { name, params } in sets {
        if name.is_empty() {
            return Err(ModelError::WrongShape("set names must not be empty".into()));
        }
        if map.contains_key(&name) {
            return Err(ModelError::DuplicateKey(name));
        }
        map.insert(name, params);
    }
    Ok(map)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandaloneConfig {
    pub id: ConfigId,
    pub params: ParamSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigGroup {
    pub id: ConfigId,
    pub sets: GroupSets,
}

impl ConfigGroup {
    pub fn named_param_sets(&self) -> impl Iterator<Item = NamedParamSet> + '_ {
        self.sets.iter().map(|(name, params)| NamedParamSet::new(name, params.clone()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfigKind {
    Standalone,
    Group,
}

impl ConfigKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConfigKind::Standalone => "standalone",
            ConfigKind::Group => "group",
        }
    }
}

impl fmt::Display for ConfigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConfigKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standalone" => Ok(ConfigKind::Standalone),
            "group" => Ok(ConfigKind::Group),
            other => Err(format!("unknown config kind {other:?} (expected standalone or group)")),
        }
    }
}

/// Either kind of configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Config {
    Standalone(StandaloneConfig),
    Group(ConfigGroup),
}

impl Config {
    pub fn id(&self) -> &ConfigId {
        match self {
            Config::Standalone(c) => &c.id,
            Config::Group(g) => &g.id,
        }
    }

    pub fn kind(&self) -> ConfigKind {
        match self {
            Config::Standalone(_) => ConfigKind::Standalone,
            Config::Group(_) => ConfigKind::Group,
        }
    }

    /// Parses a YAML payload of the given kind under `id`.
    pub fn from_yaml(id: ConfigId, kind: ConfigKind, text: &str) -> Result<Self, ModelError> {
        Ok(match kind {
            ConfigKind::Standalone => Config::Standalone(StandaloneConfig {
                id,
                params: ParamSet::try_from_params(parse_standalone_yaml(text)?)?,
            }),
            ConfigKind::Group => Config::Group(ConfigGroup { id, sets: group_sets(parse_group_yaml(text)?)? }),
        })
    }

    /// Same payload, ignoring identity.
    pub fn payload_eq(&self, other: &Config) -> bool {
        match (self, other) {
            (Config::Standalone(a), Config::Standalone(b)) => a.params == b.params,
            (Config::Group(a), Config::Group(b)) => a.sets == b.sets,
            _ => false,
        }
    }

    pub fn to_validation_document(&self) -> Value {
        match self {
            Config::Standalone(c) => standalone_document(&c.params),
            Config::Group(g) => group_document(&g.sets),
        }
    }

    pub fn render_yaml(&self) -> String {
        match self {
            Config::Standalone(c) => render_standalone_yaml(&c.params),
            Config::Group(g) => render_group_yaml(&g.sets),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("malformed YAML: {0}")]
    MalformedYaml(String),
    #[error("wrong shape: {0}")]
    WrongShape(String),
    #[error("duplicate key {0:?}")]
    DuplicateKey(String),
}

fn load_mapping(text: &str) -> Result<Vec<(Node, Node)>, ModelError> {
    let root = yaml::load(text).map_err(|e| ModelError::MalformedYaml(e.to_string()))?;
    let Some(root) = root else { return Ok(Vec::new()) };
    if root.tag.is_some() {
        return Err(ModelError::WrongShape("YAML tags are not supported".into()));
    }
    match root.kind {
        NodeKind::Mapping(entries) => Ok(entries),
        _ if root.is_null() => Ok(Vec::new()),
        _ => Err(ModelError::WrongShape(format!("top level must be a mapping, found a {}", root.kind_name()))),
    }
}

fn scalar_text(node: Node, what: &str) -> Result<String, ModelError> {
    if let Some(tag) = node.tag {
        return Err(ModelError::WrongShape(format!("YAML tag {tag} is not supported on a {what}")));
    }
    match node.kind {
        NodeKind::Scalar { text, .. } => Ok(text),
        _ => Err(ModelError::WrongShape(format!("{what} must be a scalar, found a {}", node.kind_name()))),
    }
}

fn flat_params(entries: Vec<(Node, Node)>) -> Result<Vec<Param>, ModelError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut params = Vec::with_capacity(entries.len());
    for (k, v) in entries {
        let key = scalar_text(k, "key")?;
        if key.is_empty() {
            return Err(ModelError::WrongShape("parameter keys must not be empty".into()));
        }
        let value = scalar_text(v, &format!("value of {key:?}"))?;
        if !seen.insert(key.clone()) {
            return Err(ModelError::DuplicateKey(key));
        }
        params.push(Param { key, value });
    }
    Ok(params)
}

/// Parses a flat standalone config. Scalars keep their source text.
pub fn parse_standalone_yaml(text: &str) -> Result<Vec<Param>, ModelError> {
    flat_params(load_mapping(text)?)
}

/// Parses a two-level group config.
pub fn parse_group_yaml(text: &str) -> Result<Vec<NamedParamSet>, ModelError> {
    let mut seen = std::collections::BTreeSet::new();
    let mut sets = Vec::new();
    for (k, v) in load_mapping(text)? {
        let name = scalar_text(k, "set name")?;
        if name.is_empty() {
            return Err(ModelError::WrongShape("set names must not be empty".into()));
        }
        if v.tag.is_some() {
            return Err(ModelError::WrongShape(format!("YAML tags are not supported on set {name:?}")));
        }
        let entries = match v.kind {
            NodeKind::Mapping(entries) => entries,
            other => {
                let found = Node { tag: None, kind: other }.kind_name();
                return Err(ModelError::WrongShape(format!("set {name:?} must be a mapping, found a {found}")));
            }
        };
        let params = flat_params(entries)?;
        if !seen.insert(name.clone()) {
            return Err(ModelError::DuplicateKey(name));
        }
        sets.push(NamedParamSet { name, params: ParamSet::try_from_params(params)? });
    }
    Ok(sets)
}

pub fn standalone_document(params: &ParamSet) -> Value {
    Value::Object(params.iter().map(|(k, v)| (k.to_owned(), Value::String(v.to_owned()))).collect())
}

pub fn group_document(sets: &GroupSets) -> Value {
    Value::Object(sets.iter().map(|(name, params)| (name.clone(), standalone_document(params))).collect())
}

/// The document a schema sees for a YAML payload of `kind`, without needing an identity.
pub fn validation_document_from_yaml(kind: ConfigKind, text: &str) -> Result<Value, ModelError> {
    Ok(match kind {
        ConfigKind::Standalone => standalone_document(&ParamSet::try_from_params(parse_standalone_yaml(text)?)?),
        ConfigKind::Group => group_document(&group_sets(parse_group_yaml(text)?)?),
    })
}

fn is_plain_key(key: &str) -> bool {
    let mut chars = key.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn yaml_quoted(s: &str) -> String {
    // JSON string escapes are a subset of YAML double-quoted escapes.
    serde_json::to_string(s).expect("string serialization is infallible")
}

fn yaml_key(key: &str) -> String {
    if is_plain_key(key) {
        key.to_owned()
    } else {
        yaml_quoted(key)
    }
}

pub fn render_standalone_yaml(params: &ParamSet) -> String {
    if params.is_empty() {
        return "{}\n".to_owned();
    }
    let mut out = String::new();
    for (k, v) in params.iter() {
        out.push_str(&format!("{}: {}\n", yaml_key(k), yaml_quoted(v)));
    }
    out
}

pub fn render_group_yaml(sets: &GroupSets) -> String {
    if sets.is_empty() {
        return "{}\n".to_owned();
    }
    let mut out = String::new();
    for (name, params) in sets {
        if params.is_empty() {
            out.push_str(&format!("{}: {{}}\n", yaml_key(name)));
            continue;
        }
        out.push_str(&format!("{}:\n", yaml_key(name)));
        for (k, v) in params.iter() {
            out.push_str(&format!("  {}: {}\n", yaml_key(k), yaml_quoted(v)));
        }
    }
    out
}

// JSON shape of a config: identity fields plus `params` (standalone) or
// `namedParamSets` (group), as exchanged over the API.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ConfigRepr {
    organization: String,
    name: String,
    version: String,
    kind: ConfigKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<ParamSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    named_param_sets: Option<Vec<NamedParamSet>>,
}

impl Serialize for Config {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let id = self.id();
        let mut repr = ConfigRepr {
            organization: id.organization.clone(),
            name: id.name.clone(),
            version: id.version.clone(),
            kind: self.kind(),
            params: None,
            named_param_sets: None,
        };
        match self {
            Config::Standalone(c) => repr.params = Some(c.params.clone()),
            Config::Group(g) => repr.named_param_sets = Some(g.named_param_sets().collect()),
        }
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Config {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ConfigRepr::deserialize(deserializer)?;
        let id = ConfigId::new(repr.organization, repr.name, repr.version).map_err(D::Error::custom)?;
        match (repr.kind, repr.params, repr.named_param_sets) {
            (ConfigKind::Standalone, Some(params), None) => Ok(Config::Standalone(StandaloneConfig { id, params })),
            (ConfigKind::Group, None, Some(sets)) => {
                Ok(Config::Group(ConfigGroup { id, sets: group_sets(sets).map_err(D::Error::custom)? }))
            }
            _ => Err(D::Error::custom("config kind does not match its payload fields")),
        }
    }
}
