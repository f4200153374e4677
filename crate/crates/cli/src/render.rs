//! Human-oriented renderings of API responses.

use std::fmt::Write as _;

use serde_json::{Map, Value};

fn text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".to_owned(),
        other => other.to_string(),
    }
}

fn field<'a>(v: &'a Value, name: &str) -> &'a Value {
    v.get(name).unwrap_or(&Value::Null)
}

fn id(v: &Value) -> String {
    format!("{}/{}/{}", text(field(v, "organization")), text(field(v, "name")), text(field(v, "version")))
}

/// Left-aligned columns separated by two spaces, no trailing blanks.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    for row in std::iter::once(&header).chain(rows) {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let _ = write!(line, "{cell:<width$}", width = widths[i]);
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn params_block(params: &Map<String, Value>, indent: &str, out: &mut String) {
    let width = params.keys().map(|k| k.chars().count()).max().unwrap_or(0);
    for (k, v) in params {
        let _ = writeln!(out, "{indent}{k:<width$} = {}", text(v));
    }
}

pub fn record(v: &Value) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} (seq {}, {})",
        text(field(v, "kind")),
        id(v),
        text(field(v, "createdSeq")),
        text(field(v, "createdAt"))
    );
    if let Some(schema) = v.get("schemaRef").filter(|s| !s.is_null()) {
        let _ = writeln!(out, "validated against schema {}", id(schema));
    }
    if let Some(Value::Object(params)) = v.get("params") {
        params_block(params, "  ", &mut out);
    }
    if let Some(Value::Array(sets)) = v.get("namedParamSets") {
        for set in sets {
            let _ = writeln!(out, "  [{}]", text(field(set, "name")));
            if let Value::Object(params) = field(set, "params") {
                params_block(params, "    ", &mut out);
            }
        }
    }
    out
}

pub fn stored(v: &Value) -> String {
    format!("stored {} {} (seq {})\n", text(field(v, "kind")), id(v), text(field(v, "createdSeq")))
}

pub fn timeline(v: &Value) -> String {
    let entries = field(v, "entries").as_array().cloned().unwrap_or_default();
    if entries.is_empty() {
        return format!("no versions of {} {}\n", text(field(v, "kind")), text(field(v, "name")));
    }
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            let schema = e.get("schemaRef").filter(|s| !s.is_null()).map(id).unwrap_or_else(|| "-".into());
            vec![text(field(e, "createdSeq")), text(field(e, "version")), text(field(e, "createdAt")), schema]
        })
        .collect();
    table(&["SEQ", "VERSION", "CREATED", "SCHEMA"], &rows)
}

pub fn names(v: &Value) -> String {
    let rows: Vec<Vec<String>> =
        v.as_array().into_iter().flatten().map(|n| vec![text(field(n, "name")), text(field(n, "latestSeq"))]).collect();
    table(&["NAME", "LATEST SEQ"], &rows)
}

fn diff_rows(diffs: &[Value], indent: &str, out: &mut String) {
    let width = diffs.iter().map(|d| text(field(d, "key")).chars().count()).max().unwrap_or(0);
    for d in diffs {
        let key = text(field(d, "key"));
        let line = match field(d, "type").as_str() {
            Some("Addition") => format!("+ {key:<width$}  {}", text(field(d, "value"))),
            Some("Deletion") => format!("- {key:<width$}  {}", text(field(d, "value"))),
            Some("Modification") => {
                format!("~ {key:<width$}  {} -> {}", text(field(d, "oldValue")), text(field(d, "newValue")))
            }
            _ => format!("? {key}"),
        };
        let _ = writeln!(out, "{indent}{}", line.trim_end());
    }
}

/// `+` addition, `-` deletion, `~` modification; group diffs are sectioned by set.
pub fn diff(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Array(diffs) if !diffs.is_empty() => diff_rows(diffs, "", &mut out),
        Value::Object(sets) if !sets.is_empty() => {
            for (name, diffs) in sets {
                let _ = writeln!(out, "{name}");
                diff_rows(diffs.as_array().map(Vec::as_slice).unwrap_or_default(), "  ", &mut out);
            }
        }
        _ => out.push_str("no differences\n"),
    }
    out
}

pub fn schema(v: &Value) -> String {
    let mut out = format!("schema {} (seq {})\n", id(v), text(field(v, "createdSeq")));
    let source = text(field(v, "sourceYaml"));
    out.push_str(&source);
    if !source.ends_with('\n') {
        out.push('\n');
    }
    out
}

pub fn schema_stored(v: &Value) -> String {
    format!("stored schema {} (seq {})\n", id(v), text(field(v, "createdSeq")))
}

pub fn schema_history(v: &Value) -> String {
    let rows: Vec<Vec<String>> = v
        .as_array()
        .into_iter()
        .flatten()
        .map(|s| vec![text(field(s, "createdSeq")), text(field(s, "version"))])
        .collect();
    table(&["SEQ", "VERSION"], &rows)
}

pub fn deleted(v: &Value) -> String {
    format!("deleted schema {}\n", id(field(v, "deleted")))
}

fn labels(v: &Value) -> String {
    match v.get("labels") {
        Some(Value::Object(labels)) if !labels.is_empty() => {
            labels.iter().map(|(k, v)| format!("{k}={}", text(v))).collect::<Vec<_>>().join(",")
        }
        _ => "-".to_owned(),
    }
}

pub fn node(v: &Value) -> String {
    format!("node {} ({}) labels {}\n", text(field(v, "nodeId")), text(field(v, "organization")), labels(v))
}

pub fn nodes(v: &Value) -> String {
    let rows: Vec<Vec<String>> = v
        .as_array()
        .into_iter()
        .flatten()
        .map(|n| vec![text(field(n, "nodeId")), text(field(n, "organization")), labels(n)])
        .collect();
    table(&["NODE", "ORG", "LABELS"], &rows)
}

pub fn placement(v: &Value) -> String {
    let nodes: Vec<String> = field(v, "nodeIds").as_array().into_iter().flatten().map(text).collect();
    let config = field(v, "configId");
    format!(
        "placed {} {} into namespace {} on {} (seq {})\n",
        text(field(v, "kind")),
        id(config),
        text(field(v, "namespace")),
        nodes.join(", "),
        text(field(v, "placedSeq"))
    )
}

pub fn fetched(v: &Value) -> String {
    let records = v.as_array().cloned().unwrap_or_default();
    if records.is_empty() {
        return "no configs placed\n".to_owned();
    }
    records.iter().map(record).collect()
}

pub fn validation(v: &Value) -> String {
    let violations = field(v, "violations").as_array().cloned().unwrap_or_default();
    if violations.is_empty() {
        return "valid\n".to_owned();
    }
    violations.iter().map(|x| format!("{}\n", violation(x))).collect()
}

pub fn violation(v: &Value) -> String {
    let path = text(field(v, "path"));
    let path = if path.is_empty() { "/".to_owned() } else { path };
    format!("{path}: [{}] {}", text(field(v, "rule")), text(field(v, "message")))
}
