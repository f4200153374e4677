//! (schema, config) pairs for checking the validation gate against an
//! independent JSON-Schema implementation. Schemas and configs are written
//! as JSON, which is also valid YAML, so the reference side never depends
//! on the library's YAML handling.

#![allow(dead_code)]

use serde_json::Value;

pub struct GateCase {
    pub schema: &'static str,
    /// "standalone" or "group".
    pub kind: &'static str,
    pub config: &'static str,
}

const S: &str = "standalone";
const G: &str = "group";

/// Each schema comes with documents that are meant to pass and to fail it;
/// the verdict used for comparison always comes from the reference validator.
const GROUPS: &[(&str, &str, &[&str], &[&str])] = &[
    (
        r#"{"type": "object", "required": ["param1"], "properties": {"param1": {"type": "string"}}}"#,
        S,
        &[r#"{"param1": "value1"}"#, r#"{"param1": "", "other": "x"}"#],
        &[r#"{"param2": "v"}"#, r#"{}"#],
    ),
    (
        r#"{"properties": {"port": {"type": "string"}, "debug": {"type": "string"}}}"#,
        S,
        &[r#"{"port": "8080"}"#, r#"{"debug": "true"}"#],
        &[],
    ),
    (
        r#"{"properties": {"port": {"type": "integer"}}}"#,
        S,
        &[r#"{"host": "h"}"#, r#"{}"#],
        &[r#"{"port": "8080"}"#, r#"{"port": "x", "host": "h"}"#],
    ),
    (
        r#"{"properties": {"port": {"type": "string", "pattern": "^[0-9]{2,5}$"}}}"#,
        S,
        &[r#"{"port": "8080"}"#, r#"{"port": "22"}"#],
        &[r#"{"port": "http"}"#, r#"{"port": "123456"}"#],
    ),
    (
        r#"{"properties": {"env": {"enum": ["dev", "staging", "prod"]}}}"#,
        S,
        &[r#"{"env": "prod"}"#, r#"{"env": "dev"}"#],
        &[r#"{"env": "test"}"#, r#"{"env": "Prod"}"#],
    ),
    (
        r#"{"properties": {"name": {"minLength": 3, "maxLength": 8}}}"#,
        S,
        &[r#"{"name": "abc"}"#, r#"{"name": "abcdefgh"}"#],
        &[r#"{"name": "ab"}"#, r#"{"name": "abcdefghi"}"#],
    ),
    (
        r#"{"minProperties": 2, "maxProperties": 3}"#,
        S,
        &[r#"{"a": "1", "b": "2"}"#, r#"{"a": "1", "b": "2", "c": "3"}"#],
        &[r#"{"a": "1"}"#, r#"{"a": "1", "b": "2", "c": "3", "d": "4"}"#],
    ),
    (
        // numeric bounds only constrain numbers; config values are strings
        r#"{"properties": {"replicas": {"minimum": 1, "maximum": 5}}}"#,
        S,
        &[r#"{"replicas": "3"}"#, r#"{"replicas": "99"}"#],
        &[],
    ),
    (
        r#"{"properties": {"replicas": {"type": "number", "minimum": 1, "maximum": 5}}}"#,
        S,
        &[r#"{}"#],
        &[r#"{"replicas": "3"}"#],
    ),
    (
        r#"{"properties": {"a": {}, "b": {}}, "additionalProperties": false}"#,
        S,
        &[r#"{"a": "1"}"#, r#"{"a": "1", "b": "2"}"#],
        &[r#"{"c": "3"}"#, r#"{"a": "1", "z": "2"}"#],
    ),
    (
        r#"{"additionalProperties": {"type": "string", "maxLength": 2}}"#,
        S,
        &[r#"{"a": "12"}"#, r#"{}"#],
        &[r#"{"a": "123"}"#, r#"{"a": "1", "b": "long"}"#],
    ),
    (
        r#"{"propertyNames": {"pattern": "^[a-z_]+$"}}"#,
        S,
        &[r#"{"max_conn": "10"}"#, r#"{"a": "b"}"#],
        &[r#"{"MaxConn": "10"}"#, r#"{"max-conn": "10"}"#],
    ),
    (
        r#"{"type": "object", "required": ["db"], "properties": {"db": {"type": "object", "required": ["host", "port"], "properties": {"port": {"pattern": "^[0-9]+$"}}}}}"#,
        G,
        &[r#"{"db": {"host": "h", "port": "5432"}}"#, r#"{"db": {"host": "h", "port": "1"}, "cache": {"ttl": "5"}}"#],
        &[r#"{"db": {"host": "h"}}"#, r#"{"db": {"host": "h", "port": "p"}}"#],
    ),
    (
        r#"{"additionalProperties": {"type": "object", "additionalProperties": {"enum": ["on", "off"]}}}"#,
        G,
        &[r#"{"f": {"x": "on", "y": "off"}}"#, r#"{}"#],
        &[r#"{"f": {"x": "maybe"}}"#, r#"{"f": {"x": "on"}, "g": {"y": "1"}}"#],
    ),
    (
        r#"{"properties": {"configA": {"required": ["pA"], "properties": {"pA": {"const": "vA"}}}}, "required": ["configA"]}"#,
        G,
        &[r#"{"configA": {"pA": "vA"}}"#, r#"{"configA": {"pA": "vA"}, "configB": {"pB": "vB"}}"#],
        &[r#"{"configA": {"pA": "vA2"}}"#, r#"{"configC": {"pC": "vC"}}"#],
    ),
    (
        r##"{"$defs": {"port": {"type": "string", "pattern": "^[0-9]+$"}}, "properties": {"http": {"$ref": "#/$defs/port"}, "https": {"$ref": "#/$defs/port"}}}"##,
        S,
        &[r#"{"http": "80", "https": "443"}"#],
        &[r#"{"http": "eighty"}"#],
    ),
];

pub fn corpus() -> Vec<GateCase> {
    let mut out = Vec::new();
    for (schema, kind, pass, fail) in GROUPS {
        for config in pass.iter().chain(fail.iter()) {
            out.push(GateCase { schema, kind, config });
        }
    }
    out
}

/// Verdict of the reference implementation (draft 2020-12).
pub fn reference_accepts(schema: &Value, document: &Value) -> bool {
    let mut schemas = boon::Schemas::new();
    let mut compiler = boon::Compiler::new();
    compiler.set_default_draft(boon::Draft::V2020_12);
    compiler.add_resource("urn:gate:schema", schema.clone()).expect("reference loads the schema");
    let index = compiler.compile("urn:gate:schema", &mut schemas).expect("reference compiles the schema");
    schemas.validate(document, index).is_ok()
}
