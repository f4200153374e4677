//! Versioned validation schemas: YAML source, compiled JSON-Schema
//! (draft 2020-12) document, and the validation gate itself.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use crate::model::SchemaId;
use crate::store::{KvRead, Store, StoreError};
use crate::yaml::{self, Node, NodeKind};

/// One failed assertion found while validating a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// JSON pointer into the validated document; `""` is the root.
    pub path: String,
    /// The schema keyword that failed.
    pub rule: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let path = if self.path.is_empty() { "/" } else { &self.path };
        write!(f, "{path}: [{}] {}", self.rule, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SchemaError {
    #[error("malformed YAML: {0}")]
    MalformedYaml(String),
    #[error("unsupported YAML feature: {0}")]
    UnsupportedYamlFeature(String),
    #[error("not a valid JSON schema ({} violations)", .0.len())]
    InvalidSchema(Vec<Violation>),
    #[error("schema {0} already exists")]
    AlreadyExists(SchemaId),
    #[error("schema {0} not found")]
    NotFound(SchemaId),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemaRecord {
    #[serde(flatten)]
    pub id: SchemaId,
    pub source_yaml: String,
    pub compiled: Value,
    pub created_seq: u64,
}

fn unsupported(msg: impl Into<String>) -> SchemaError {
    SchemaError::UnsupportedYamlFeature(msg.into())
}

fn is_digits(s: &str, radix: u32) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_digit(radix))
}

fn strip_sign(s: &str) -> &str {
    s.strip_prefix(['-', '+']).unwrap_or(s)
}

fn is_float_literal(s: &str) -> bool {
    let body = strip_sign(s);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], Some(&body[i + 1..])),
        None => (body, None),
    };
    let mantissa_ok = match mantissa.split_once('.') {
        Some((int, frac)) => {
            (int.is_empty() || is_digits(int, 10))
                && (frac.is_empty() || is_digits(frac, 10))
                && !(int.is_empty() && frac.is_empty())
        }
        None => is_digits(mantissa, 10),
    };
    mantissa_ok && exponent.is_none_or(|e| is_digits(strip_sign(e), 10))
}

fn float_value(x: f64) -> Value {
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn integer_value(digits: &str, radix: u32, negative: bool) -> Value {
    if let Ok(n) = u64::from_str_radix(digits, radix) {
        if !negative {
            return Value::Number(n.into());
        }
        if let Ok(signed) = i64::try_from(n) {
            return Value::Number((-signed).into());
        }
    }
    // Out of 64-bit range: fall back to the nearest double.
    let magnitude = digits.chars().fold(0f64, |acc, c| acc * radix as f64 + c.to_digit(radix).unwrap() as f64);
    float_value(if negative { -magnitude } else { magnitude })
}

/// Resolves a plain scalar under the YAML 1.2 core schema.
fn resolve_plain(text: &str) -> Result<Value, SchemaError> {
    match text {
        "" | "~" | "null" | "Null" | "NULL" => return Ok(Value::Null),
        "true" | "True" | "TRUE" => return Ok(Value::Bool(true)),
        "false" | "False" | "FALSE" => return Ok(Value::Bool(false)),
        ".nan" | ".NaN" | ".NAN" => return Err(unsupported("NaN has no JSON representation")),
        _ => {}
    }
    let body = strip_sign(text);
    if matches!(body, ".inf" | ".Inf" | ".INF") {
        return Err(unsupported("infinity has no JSON representation"));
    }
    if let Some(hex) = text.strip_prefix("0x").filter(|h| is_digits(h, 16)) {
        return Ok(integer_value(hex, 16, false));
    }
    if let Some(oct) = text.strip_prefix("0o").filter(|o| is_digits(o, 8)) {
        return Ok(integer_value(oct, 8, false));
    }
    if is_digits(body, 10) {
        return Ok(integer_value(body, 10, text.starts_with('-')));
    }
    if is_float_literal(text) {
        let x: f64 = text.parse().map_err(|_| unsupported(format!("unparseable number {text:?}")))?;
        if !x.is_finite() {
            return Err(unsupported(format!("number {text:?} is out of range")));
        }
        return Ok(float_value(x));
    }
    Ok(Value::String(text.to_owned()))
}

fn node_to_json(node: Node) -> Result<Value, SchemaError> {
    if let Some(tag) = node.tag {
        return Err(unsupported(format!("YAML tag {tag}")));
    }
    match node.kind {
        NodeKind::Scalar { text, plain: true } => resolve_plain(&text),
        NodeKind::Scalar { text, plain: false } => Ok(Value::String(text)),
        NodeKind::Sequence(items) => items.into_iter().map(node_to_json).collect::<Result<_, _>>().map(Value::Array),
        NodeKind::Mapping(entries) => {
            let mut map = Map::new();
            for (k, v) in entries {
                let key = match node_to_json(k)? {
                    Value::String(s) => s,
                    other => return Err(unsupported(format!("non-string mapping key {other}"))),
                };
                if map.contains_key(&key) {
                    return Err(SchemaError::MalformedYaml(format!("duplicate mapping key {key:?}")));
                }
                map.insert(key, node_to_json(v)?);
            }
            Ok(Value::Object(map))
        }
    }
}

/// Structure-preserving YAML to JSON translation; scalars keep their native types.
pub fn translate_schema_yaml_to_json(text: &str) -> Result<Value, SchemaError> {
    match yaml::load(text).map_err(|e| SchemaError::MalformedYaml(e.to_string()))? {
        Some(node) => node_to_json(node),
        None => Ok(Value::Null),
    }
}

fn violation_from(error: &jsonschema::ValidationError<'_>) -> Vec<Violation> {
    use jsonschema::error::ValidationErrorKind;

    let path = error.instance_path().as_str().to_owned();
    let rule = error.kind().keyword().to_owned();
    let message = error.to_string();
    let child = |name: &str| format!("{path}/{}", name.replace('~', "~0").replace('/', "~1"));
    match error.kind() {
        ValidationErrorKind::Required { property } => {
            let name = property.as_str().map(str::to_owned).unwrap_or_else(|| property.to_string());
            vec![Violation { path: child(&name), rule, message }]
        }
        ValidationErrorKind::AdditionalProperties { unexpected } if !unexpected.is_empty() => unexpected
            .iter()
            .map(|name| Violation {
                path: child(name),
                rule: rule.clone(),
                message: format!("additional property {name:?} is not allowed"),
            })
            .collect(),
        _ => vec![Violation { path, rule, message }],
    }
}

/// A compiled, ready-to-use validator.
#[derive(Clone)]
pub struct CompiledSchema {
    validator: Arc<jsonschema::Validator>,
}

impl std::fmt::Debug for CompiledSchema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompiledSchema").finish_non_exhaustive()
    }
}

impl CompiledSchema {
    /// Checks `schema` against the draft 2020-12 meta-schema and compiles it.
    pub fn compile(schema: &Value) -> Result<Self, SchemaError> {
        let meta = jsonschema::draft202012::meta::validator();
        let violations: Vec<Violation> = meta.iter_errors(schema).flat_map(|e| violation_from(&e)).collect();
        if !violations.is_empty() {
            return Err(SchemaError::InvalidSchema(violations));
        }
        let validator = jsonschema::draft202012::new(schema).map_err(|e| {
            SchemaError::InvalidSchema(vec![Violation {
                path: e.instance_path().as_str().to_owned(),
                rule: e.kind().keyword().to_owned(),
                message: e.to_string(),
            }])
        })?;
        Ok(Self { validator: Arc::new(validator) })
    }

    /// Every violation of `document`; empty when it is accepted.
    pub fn validate(&self, document: &Value) -> Vec<Violation> {
        self.validator.iter_errors(document).flat_map(|e| violation_from(&e)).collect()
    }
}

pub(crate) fn schema_key(id: &SchemaId) -> String {
    format!("sch/{}/{}/{}", id.organization(), id.name(), id.version())
}

fn history_prefix(organization: &str, name: &str) -> String {
    format!("sch/{organization}/{name}/")
}

/// Schema storage and validation over the shared store.
#[derive(Debug, Clone)]
pub struct SchemaRegistry {
    store: Arc<Store>,
}

impl SchemaRegistry {
    pub fn new(store: Arc<Store>) -> Self {
        Self { store }
    }

    pub fn store_schema(&self, id: &SchemaId, source_yaml: &str) -> Result<SchemaRecord, SchemaError> {
        let compiled = translate_schema_yaml_to_json(source_yaml)?;
        CompiledSchema::compile(&compiled)?;
        let key = schema_key(id);
        self.store.write(|batch| {
            if batch.contains(&key)? {
                return Err(SchemaError::AlreadyExists(id.clone()));
            }
            let record = SchemaRecord {
                id: id.clone(),
                source_yaml: source_yaml.to_owned(),
                compiled,
                created_seq: batch.next_seq()?,
            };
            batch.put_json(&key, &record)?;
            Ok(record)
        })
    }

    pub fn get_schema(&self, id: &SchemaId) -> Result<SchemaRecord, SchemaError> {
        self.store.snapshot()?.get_json(&schema_key(id))?.ok_or_else(|| SchemaError::NotFound(id.clone()))
    }

    /// All undeleted versions of `organization/name`, oldest first.
    pub fn schema_history(&self, organization: &str, name: &str) -> Result<Vec<SchemaRecord>, SchemaError> {
        if crate::model::check_segment("organization", organization).is_err()
            || crate::model::check_segment("name", name).is_err()
        {
            return Ok(Vec::new());
        }
        let mut records: Vec<SchemaRecord> = self
            .store
            .snapshot()?
            .scan_json(&history_prefix(organization, name))?
            .into_iter()
            .map(|(_, r)| r)
            .collect();
        records.sort_by_key(|r| r.created_seq);
        Ok(records)
    }

    pub fn delete_schema(&self, id: &SchemaId) -> Result<(), SchemaError> {
        let key = schema_key(id);
        self.store.write(|batch| if batch.remove(&key)? { Ok(()) } else { Err(SchemaError::NotFound(id.clone())) })
    }

    pub fn compiled(&self, id: &SchemaId) -> Result<(SchemaRecord, CompiledSchema), SchemaError> {
        let record = self.get_schema(id)?;
        let compiled = CompiledSchema::compile(&record.compiled)?;
        Ok((record, compiled))
    }

    pub fn validate(&self, document: &Value, id: &SchemaId) -> Result<Vec<Violation>, SchemaError> {
        let (_, compiled) = self.compiled(id)?;
        Ok(compiled.validate(document))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    const REQUIRED_PARAM1: &str = "type: object\nrequired:\n  - param1\nproperties:\n  param1:\n    type: string";

    fn registry() -> SchemaRegistry {
        SchemaRegistry::new(Arc::new(Store::in_memory().unwrap()))
    }

    fn sid(org: &str, name: &str, version: &str) -> SchemaId {
        SchemaId::new(org, name, version).unwrap()
    }

    #[test]
    fn translate_examples() {
        assert_eq!(translate_schema_yaml_to_json("type: object").unwrap(), json!({"type": "object"}));
        assert_eq!(
            translate_schema_yaml_to_json(REQUIRED_PARAM1).unwrap(),
            json!({"type": "object", "required": ["param1"], "properties": {"param1": {"type": "string"}}})
        );
        assert!(matches!(
            translate_schema_yaml_to_json("a: !!binary Zm9v"),
            Err(SchemaError::UnsupportedYamlFeature(_))
        ));
    }

    #[test]
    fn translate_scalar_types() {
        let v = translate_schema_yaml_to_json(
            "a: 3\nb: -4\nc: 2.5\nd: true\ne: ~\nf: '3'\ng: 0x10\nh: 1e3\ni: text\nj: 18446744073709551616",
        )
        .unwrap();
        assert_eq!(v["a"], json!(3));
        assert_eq!(v["b"], json!(-4));
        assert_eq!(v["c"], json!(2.5));
        assert_eq!(v["d"], json!(true));
        assert_eq!(v["e"], Value::Null);
        assert_eq!(v["f"], json!("3"));
        assert_eq!(v["g"], json!(16));
        assert_eq!(v["h"], json!(1000.0));
        assert_eq!(v["i"], json!("text"));
        assert_eq!(v["j"], json!(18446744073709551616f64));
    }

    #[test]
    fn translate_rejects_non_string_keys_and_nan() {
        assert!(matches!(translate_schema_yaml_to_json("1: x"), Err(SchemaError::UnsupportedYamlFeature(_))));
        assert!(matches!(translate_schema_yaml_to_json("? [a]\n: x"), Err(SchemaError::UnsupportedYamlFeature(_))));
        assert!(matches!(translate_schema_yaml_to_json("a: .nan"), Err(SchemaError::UnsupportedYamlFeature(_))));
        assert!(matches!(translate_schema_yaml_to_json("'1': x").unwrap(), Value::Object(_)));
    }

    #[test]
    fn store_and_get() {
        let reg = registry();
        let id = sid("orgA", "net-schema", "v1");
        let rec = reg.store_schema(&id, "type: object").unwrap();
        assert_eq!(rec.compiled, json!({"type": "object"}));
        assert_eq!(reg.get_schema(&id).unwrap(), rec);
        assert!(matches!(reg.store_schema(&id, "type: string"), Err(SchemaError::AlreadyExists(_))));
        assert_eq!(reg.get_schema(&id).unwrap().source_yaml, "type: object");
    }

    #[test]
    fn invalid_schema_rejected() {
        let reg = registry();
        let err = reg.store_schema(&sid("orgA", "s", "v1"), "type: 17").unwrap_err();
        let SchemaError::InvalidSchema(violations) = err else { panic!("expected InvalidSchema") };
        assert!(!violations.is_empty());
        assert!(matches!(reg.get_schema(&sid("orgA", "s", "v1")), Err(SchemaError::NotFound(_))));
        assert!(matches!(
            reg.store_schema(&sid("orgA", "s", "v1"), "pattern: '(unclosed'"),
            Err(SchemaError::InvalidSchema(_))
        ));
    }

    #[test]
    fn remote_refs_do_not_resolve() {
        let reg = registry();
        let err = reg.store_schema(&sid("o", "s", "v"), "$ref: 'https://example.com/schema.json'").unwrap_err();
        assert!(matches!(err, SchemaError::InvalidSchema(_)));
        reg.store_schema(
            &sid("o", "local", "v"),
            "$defs:\n  port:\n    type: string\n    pattern: '^[0-9]+$'\nproperties:\n  port:\n    $ref: '#/$defs/port'",
        )
        .unwrap();
        let violations = reg.validate(&json!({"port": "eighty"}), &sid("o", "local", "v")).unwrap();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].path, "/port");
        assert_eq!(violations[0].rule, "pattern");
    }

    #[test]
    fn lookups_are_exact() {
        let reg = registry();
        reg.store_schema(&sid("o", "s", "v1"), "type: object").unwrap();
        assert!(matches!(reg.get_schema(&sid("o", "s", "v2")), Err(SchemaError::NotFound(_))));
        assert!(matches!(reg.get_schema(&sid("o", "x", "v1")), Err(SchemaError::NotFound(_))));
    }

    #[test]
    fn history_order_and_isolation() {
        let reg = registry();
        reg.store_schema(&sid("o", "s", "v2"), "type: object").unwrap();
        reg.store_schema(&sid("o", "s", "v1"), "type: object").unwrap();
        reg.store_schema(&sid("p", "s", "v1"), "type: object").unwrap();
        reg.store_schema(&sid("o", "s2", "v1"), "type: object").unwrap();
        let versions: Vec<_> =
            reg.schema_history("o", "s").unwrap().into_iter().map(|r| r.id.version().to_owned()).collect();
        assert_eq!(versions, ["v2", "v1"]);
        assert_eq!(reg.schema_history("p", "s").unwrap().len(), 1);
        assert!(reg.schema_history("o", "unknown").unwrap().is_empty());
        assert!(reg.schema_history("o/x", "s").unwrap().is_empty());
    }

    #[test]
    fn delete() {
        let reg = registry();
        reg.store_schema(&sid("o", "s", "v1"), "type: object").unwrap();
        reg.store_schema(&sid("o", "s", "v2"), "type: object").unwrap();
        reg.delete_schema(&sid("o", "s", "v1")).unwrap();
        assert!(matches!(reg.get_schema(&sid("o", "s", "v1")), Err(SchemaError::NotFound(_))));
        assert!(matches!(reg.delete_schema(&sid("o", "s", "v1")), Err(SchemaError::NotFound(_))));
        let history = reg.schema_history("o", "s").unwrap();
        assert_eq!(history.len(), 1);
        assert_eq!(history[0].id.version(), "v2");
    }

    #[test]
    fn validate_examples() {
        let reg = registry();
        reg.store_schema(&sid("o", "obj", "v1"), "type: object").unwrap();
        reg.store_schema(&sid("o", "req", "v1"), REQUIRED_PARAM1).unwrap();
        reg.store_schema(&sid("o", "any", "v1"), "{}").unwrap();
        assert!(reg.validate(&json!({"param1": "value1"}), &sid("o", "obj", "v1")).unwrap().is_empty());
        let v = reg.validate(&json!({"param2": "v"}), &sid("o", "req", "v1")).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!((v[0].path.as_str(), v[0].rule.as_str()), ("/param1", "required"));
        assert!(reg.validate(&json!([1, "x"]), &sid("o", "any", "v1")).unwrap().is_empty());
        assert!(matches!(reg.validate(&json!({}), &sid("o", "nope", "v1")), Err(SchemaError::NotFound(_))));
    }

    #[test]
    fn violations_are_exhaustive() {
        let reg = registry();
        reg.store_schema(
            &sid("o", "s", "v1"),
            "type: object\nrequired: [a, b]\nadditionalProperties: false\nproperties:\n  a: {type: string}\n  b: {type: string}",
        )
        .unwrap();
        let v = reg.validate(&json!({"x": "1", "y": "2"}), &sid("o", "s", "v1")).unwrap();
        let mut got: Vec<_> = v.iter().map(|v| (v.path.as_str(), v.rule.as_str())).collect();
        got.sort();
        assert_eq!(
            got,
            [("/a", "required"), ("/b", "required"), ("/x", "additionalProperties"), ("/y", "additionalProperties")]
        );
    }
}
