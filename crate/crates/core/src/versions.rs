//! Immutable configuration versions, the schema gate on write, timelines and
//! version-to-version diffs.

use std::sync::Arc;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::diff::{config_group_diff, param_set_diff, ConfigDiff};
use crate::model::{check_segment, Config, ConfigId, ConfigKind, SchemaId};
use crate::schema::{schema_key, CompiledSchema, SchemaError, SchemaRecord, SchemaRegistry, Violation};
use crate::store::{KvRead, Store, StoreError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VersionedRecord {
    #[serde(flatten)]
    pub config: Config,
    pub created_seq: u64,
    /// RFC 3339 wall-clock time of the write; ordering uses `created_seq`.
    pub created_at: String,
    pub schema_ref: Option<SchemaId>,
}

impl VersionedRecord {
    pub fn id(&self) -> &ConfigId {
        self.config.id()
    }

    pub fn kind(&self) -> ConfigKind {
        self.config.kind()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub organization: String,
    pub name: String,
    pub kind: ConfigKind,
    pub entries: Vec<VersionedRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NameSummary {
    pub name: String,
    pub latest_seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffSide {
    Reference,
    Target,
}

impl std::fmt::Display for DiffSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DiffSide::Reference => "reference",
            DiffSide::Target => "target",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum VersionError {
    #[error("{kind} config {id} already exists")]
    AlreadyExists { id: ConfigId, kind: ConfigKind },
    #[error("config failed validation with {} violation(s)", .0.len())]
    ValidationFailed(Vec<Violation>),
    #[error("schema {0} not found")]
    SchemaNotFound(SchemaId),
    #[error("{kind} config {id} not found")]
    NotFound { id: ConfigId, kind: ConfigKind },
    #[error("{side} {kind} config {id} not found")]
    DiffOperandNotFound { side: DiffSide, id: ConfigId, kind: ConfigKind },
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

pub(crate) fn config_key(kind: ConfigKind, id: &ConfigId) -> String {
    format!("cfg/{}/{}/{}/{}", kind, id.organization(), id.name(), id.version())
}

fn name_prefix(kind: ConfigKind, organization: &str, name: &str) -> String {
    format!("cfg/{kind}/{organization}/{name}/")
}

/// Storage of immutable configuration versions.
#[derive(Debug, Clone)]
pub struct VersionStore {
    store: Arc<Store>,
    schemas: SchemaRegistry,
}

impl VersionStore {
    pub fn new(store: Arc<Store>) -> Self {
        let schemas = SchemaRegistry::new(store.clone());
        Self { store, schemas }
    }

    pub fn schemas(&self) -> &SchemaRegistry {
        &self.schemas
    }

    fn gate(&self, config: &Config, schema_id: &SchemaId) -> Result<SchemaRecord, VersionError> {
        let (record, compiled) = self.schemas.compiled(schema_id).map_err(|e| match e {
            SchemaError::NotFound(id) => VersionError::SchemaNotFound(id),
            other => other.into(),
        })?;
        let violations = compiled.validate(&config.to_validation_document());
        if violations.is_empty() {
            Ok(record)
        } else {
            Err(VersionError::ValidationFailed(violations))
        }
    }

    /// Stores a new version. When `schema_ref` is given the payload must pass
    /// that schema; nothing is written otherwise.
    pub fn put_config(&self, config: &Config, schema_ref: Option<&SchemaId>) -> Result<VersionedRecord, VersionError> {
        let validated = schema_ref.map(|id| self.gate(config, id)).transpose()?;
        let key = config_key(config.kind(), config.id());
        self.store.write(|batch| {
            if let (Some(id), Some(seen)) = (schema_ref, &validated) {
                // The schema may have been deleted or re-created since the
                // check above ran outside the transaction.
                let current: SchemaRecord =
                    batch.get_json(&schema_key(id))?.ok_or_else(|| VersionError::SchemaNotFound(id.clone()))?;
                if current.created_seq != seen.created_seq {
                    let violations =
                        CompiledSchema::compile(&current.compiled)?.validate(&config.to_validation_document());
                    if !violations.is_empty() {
                        return Err(VersionError::ValidationFailed(violations));
                    }
                }
            }
            if batch.contains(&key)? {
                return Err(VersionError::AlreadyExists { id: config.id().clone(), kind: config.kind() });
            }
            let record = VersionedRecord {
                config: config.clone(),
                created_seq: batch.next_seq()?,
                created_at: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
                schema_ref: schema_ref.cloned(),
            };
            batch.put_json(&key, &record)?;
            Ok(record)
        })
    }

    pub fn get_config(&self, id: &ConfigId, kind: ConfigKind) -> Result<VersionedRecord, VersionError> {
        self.store
            .snapshot()?
            .get_json(&config_key(kind, id))?
            .ok_or_else(|| VersionError::NotFound { id: id.clone(), kind })
    }

    /// Every version of `organization/name`, oldest first.
    pub fn timeline(&self, organization: &str, name: &str, kind: ConfigKind) -> Result<Timeline, VersionError> {
        let mut entries = Vec::new();
        if check_segment("organization", organization).is_ok() && check_segment("name", name).is_ok() {
            entries = self
                .store
                .snapshot()?
                .scan_json::<VersionedRecord>(&name_prefix(kind, organization, name))?
                .into_iter()
                .map(|(_, r)| r)
                .collect();
            entries.sort_by_key(|r| r.created_seq);
        }
        Ok(Timeline { organization: organization.to_owned(), name: name.to_owned(), kind, entries })
    }

    pub fn diff_versions(
        &self,
        reference: &ConfigId,
        target: &ConfigId,
        kind: ConfigKind,
    ) -> Result<ConfigDiff, VersionError> {
        let snapshot = self.store.snapshot()?;
        let load = |side: DiffSide, id: &ConfigId| -> Result<VersionedRecord, VersionError> {
            snapshot.get_json(&config_key(kind, id))?.ok_or_else(|| VersionError::DiffOperandNotFound {
                side,
                id: id.clone(),
                kind,
            })
        };
        let reference = load(DiffSide::Reference, reference)?;
        let target = load(DiffSide::Target, target)?;
        Ok(match (&reference.config, &target.config) {
            (Config::Standalone(r), Config::Standalone(t)) => ConfigDiff::Params(param_set_diff(&r.params, &t.params)),
            (Config::Group(r), Config::Group(t)) => ConfigDiff::Group(config_group_diff(&r.sets, &t.sets)),
            _ => unreachable!("records under one kind prefix share that kind"),
        })
    }

    /// Distinct names in the organization with the sequence of their latest version.
    pub fn list_names(&self, organization: &str, kind: ConfigKind) -> Result<Vec<NameSummary>, VersionError> {
        if check_segment("organization", organization).is_err() {
            return Ok(Vec::new());
        }
        let mut out: Vec<NameSummary> = Vec::new();
        for (_, record) in
            self.store.snapshot()?.scan_json::<VersionedRecord>(&format!("cfg/{kind}/{organization}/"))?
        {
            let name = record.id().name();
            match out.last_mut() {
                Some(last) if last.name == name => last.latest_seq = last.latest_seq.max(record.created_seq),
                _ => out.push(NameSummary { name: name.to_owned(), latest_seq: record.created_seq }),
            }
        }
        // Key order puts "a-b/" before "a/"; names sort the other way.
        out.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(out)
    }
}
