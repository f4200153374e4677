//! Embedded key-value namespace backing every registry.
//!
//! A single `redb` table maps string keys to canonical JSON bytes. Writes run
//! inside one serialized write transaction, which is what makes
//! check-and-insert and sequence allocation atomic.

use std::path::Path;

use redb::{Database, ReadOnlyTable, ReadableDatabase, ReadableTable, Table, TableDefinition};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::canonical;

const KV: TableDefinition<&str, &[u8]> = TableDefinition::new("kv");
const SEQ_KEY: &str = "seq";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("storage backend: {0}")]
    Backend(#[from] redb::Error),
    #[error("corrupt record at {key}: {source}")]
    Corrupt {
        key: String,
        #[source]
        source: serde_json::Error,
    },
}

macro_rules! backend_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for StoreError {
            fn from(e: $ty) -> Self {
                StoreError::Backend(e.into())
            }
        }
    )*};
}

backend_from!(redb::DatabaseError, redb::TransactionError, redb::TableError, redb::StorageError, redb::CommitError);

pub struct Store {
    db: Database,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").finish_non_exhaustive()
    }
}

impl Store {
    /// Opens the store file, creating it if needed.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        Self::init(Database::create(path)?)
    }

    pub fn in_memory() -> Result<Self, StoreError> {
        let db = Database::builder().create_with_backend(redb::backends::InMemoryBackend::new())?;
        Self::init(db)
    }

    fn init(db: Database) -> Result<Self, StoreError> {
        let exists = {
            let txn = db.begin_read()?;
            match txn.open_table(KV) {
                Ok(_) => true,
                Err(redb::TableError::TableDoesNotExist(_)) => false,
                Err(e) => return Err(e.into()),
            }
        };
        if !exists {
            let txn = db.begin_write()?;
            txn.open_table(KV)?;
            txn.commit()?;
        }
        Ok(Self { db })
    }

    /// Consistent read-only view of the whole namespace.
    pub fn snapshot(&self) -> Result<Snapshot, StoreError> {
        let txn = self.db.begin_read()?;
        Ok(Snapshot { table: txn.open_table(KV)? })
    }

    /// Runs `f` in one write transaction; commits on `Ok`, discards on `Err`.
    pub fn write<T, E>(&self, f: impl FnOnce(&mut Batch<'_>) -> Result<T, E>) -> Result<T, E>
    where
        E: From<StoreError>,
    {
        let txn = self.db.begin_write().map_err(StoreError::from)?;
        let result = {
            let table = txn.open_table(KV).map_err(StoreError::from)?;
            let mut batch = Batch { table };
            f(&mut batch)
        };
        match result {
            Ok(value) => {
                txn.commit().map_err(StoreError::from)?;
                Ok(value)
            }
            Err(e) => {
                txn.abort().map_err(StoreError::from)?;
                Err(e)
            }
        }
    }
}

/// Read access shared by snapshots and write batches.
pub trait KvRead {
    fn get_raw(&self, key: &str) -> Result<Option<Vec<u8>>, StoreError>;

    /// All entries whose key starts with `prefix`, in key order.
    fn scan_raw(&self, prefix: &str) -> Result<Vec<(String, Vec<u8>)>, StoreError>;

    fn contains(&self, key: &str) -> Result<bool, StoreError> {
        Ok(self.get_raw(key)?.is_some())
    }

    fn get_json<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, StoreError> {
        self.get_raw(key)?.map(|bytes| decode(key, &bytes)).transpose()
    }

    fn scan_json<T: DeserializeOwned>(&self, prefix: &str) -> Result<Vec<(String, T)>, StoreError> {
        self.scan_raw(prefix)?
            .into_iter()
            .map(|(key, bytes)| {
                let value = decode(&key, &bytes)?;
                Ok((key, value))
            })
            .collect()
    }
}

fn decode<T: DeserializeOwned>(key: &str, bytes: &[u8]) -> Result<T, StoreError> {
    serde_json::from_slice(bytes).map_err(|source| StoreError::Corrupt { key: key.to_owned(), source })
}

fn get_from<T>(table: &T, key: &str) -> Result<Option<Vec<u8>>, StoreError>
where
    T: ReadableTable<&'static str, &'static [u8]>,
{
    Ok(table.get(key)?.map(|guard| guard.value().to_vec()))
}

fn scan_from<T>(table: &T, prefix: &str) -> Result<Vec<(String, Vec<u8>)>, StoreError>
where
    T: ReadableTable<&'static str, &'static [u8]>,
{
    let mut out = Vec::new();
    for entry in table.range(prefix..)? {
        let (key, value) = entry?;
        let key = key.value();
        if !key.starts_with(prefix) {
            break;
        }
        out.push((key.to_owned(), value.value().to_vec()));
    }
    Ok(out)
}

pub struct Snapshot {
    table: ReadOnlyTable<&'static str, &'static [u8]>,
}

impl KvRead for Snapshot {
    fn get_raw(&self, key: &str) -> Result<Option<Vec<u8>>, StoreError> {
        get_from(&self.table, key)
    }

    fn scan_raw(&self, prefix: &str) -> Result<Vec<(String, Vec<u8>)>, StoreError> {
        scan_from(&self.table, prefix)
    }
}

pub struct Batch<'t> {
    table: Table<'t, &'static str, &'static [u8]>,
}

impl KvRead for Batch<'_> {
    fn get_raw(&self, key: &str) -> Result<Option<Vec<u8>>, StoreError> {
        get_from(&self.table, key)
    }

    fn scan_raw(&self, prefix: &str) -> Result<Vec<(String, Vec<u8>)>, StoreError> {
        scan_from(&self.table, prefix)
    }
}

impl Batch<'_> {
    pub fn put_raw(&mut self, key: &str, value: &[u8]) -> Result<(), StoreError> {
        self.table.insert(key, value)?;
        Ok(())
    }

    /// Stores `value` as canonical JSON.
    pub fn put_json<T: Serialize>(&mut self, key: &str, value: &T) -> Result<(), StoreError> {
        let text =
            canonical::to_string_from(value).map_err(|source| StoreError::Corrupt { key: key.to_owned(), source })?;
        self.put_raw(key, text.as_bytes())
    }

    pub fn remove(&mut self, key: &str) -> Result<bool, StoreError> {
        Ok(self.table.remove(key)?.is_some())
    }

    /// Allocates the next store-wide sequence number (first is 1).
    pub fn next_seq(&mut self) -> Result<u64, StoreError> {
        let current: u64 = self.get_json(SEQ_KEY)?.unwrap_or(0);
        let next = current + 1;
        self.put_json(SEQ_KEY, &next)?;
        Ok(next)
    }
}

/// Fixed-width sequence rendering so key order equals numeric order.
pub(crate) fn seq_key(seq: u64) -> String {
    format!("{seq:020}")
}
