//! Configuration control plane: parameter models, structural diffs, a schema
//! registry, an append-only version store, and label-based dissemination.

pub mod canonical;
pub mod diff;
pub mod dissemination;
pub mod model;
pub mod schema;
pub mod store;
pub mod versions;
mod yaml;

use std::path::Path;
use std::sync::Arc;

pub use diff::{AtomicDiff, ConfigDiff, ConflictingDiff, GroupDiff, JsonStyle, ParamSetDiff};
pub use dissemination::{Dissemination, DisseminationError, Label, LabelQuery, LabelValue, Node, Placement};
pub use model::{Config, ConfigGroup, ConfigId, ConfigKind, ModelError, ParamSet, SchemaId, StandaloneConfig};
pub use schema::{SchemaError, SchemaRecord, SchemaRegistry, Violation};
pub use store::{Store, StoreError};
pub use versions::{VersionError, VersionStore, VersionedRecord};

/// All registries over one shared store.
#[derive(Debug, Clone)]
pub struct ControlPlane {
    versions: VersionStore,
    dissemination: Dissemination,
}

impl ControlPlane {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        Ok(Self::with_store(Arc::new(Store::open(path)?)))
    }

    pub fn in_memory() -> Result<Self, StoreError> {
        Ok(Self::with_store(Arc::new(Store::in_memory()?)))
    }

    pub fn with_store(store: Arc<Store>) -> Self {
        Self { versions: VersionStore::new(store.clone()), dissemination: Dissemination::new(store) }
    }

    pub fn schemas(&self) -> &SchemaRegistry {
        self.versions.schemas()
    }

    pub fn versions(&self) -> &VersionStore {
        &self.versions
    }

    pub fn dissemination(&self) -> &Dissemination {
        &self.dissemination
    }
}
