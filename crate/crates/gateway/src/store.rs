//! Append-only revision store. Every write creates revision `n + 1` of a
//! document and succeeds only if the writer saw revision `n`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("document '{0}' does not exist")]
    NotFound(String),
    #[error("document '{0}' already exists")]
    Exists(String),
    #[error("revision {expected} is stale; the current revision is {current}")]
    Conflict { expected: u64, current: u64 },
    #[error("'{0}' is not a valid document id")]
    BadId(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Ids become file names, so they are kept to a safe alphabet.
pub fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
        && !id.starts_with('-')
}

fn check_id(id: &str) -> Result<(), StoreError> {
    if valid_id(id) {
        Ok(())
    } else {
        Err(StoreError::BadId(id.to_string()))
    }
}

pub trait DocumentStore: Send + Sync {
    /// Stores revision 1.
    fn create(&self, id: &str, bytes: &[u8]) -> Result<u64, StoreError>;
    fn latest(&self, id: &str) -> Result<(u64, Vec<u8>), StoreError>;
    fn revision(&self, id: &str, rev: u64) -> Result<Vec<u8>, StoreError>;
    /// Stores `expected + 1` if `expected` is the latest revision.
    fn append(&self, id: &str, expected: u64, bytes: &[u8]) -> Result<u64, StoreError>;
    fn list(&self) -> Result<Vec<(String, u64)>, StoreError>;
    /// Side documents such as issued reports. Written once, never replaced.
    fn put_artifact(&self, id: &str, name: &str, bytes: &[u8]) -> Result<(), StoreError>;
    fn artifact(&self, id: &str, name: &str) -> Result<Vec<u8>, StoreError>;
}

/// One directory per document, one file per revision.
#[derive(Debug, Clone)]
pub struct FsStore {
    root: PathBuf,
}

impl FsStore {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    fn rev_path(&self, id: &str, rev: u64) -> PathBuf {
        self.dir(id).join(format!("rev-{rev:08}.json"))
    }

    fn revisions(&self, id: &str) -> Result<Vec<u64>, StoreError> {
        let entries = match fs::read_dir(self.dir(id)) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_string())),
            Err(e) => return Err(e.into()),
        };
        let mut revs = Vec::new();
        for entry in entries {
            let name = entry?.file_name();
            let name = name.to_string_lossy();
            if let Some(n) = name.strip_prefix("rev-").and_then(|s| s.strip_suffix(".json")) {
                if let Ok(n) = n.parse() {
                    revs.push(n);
                }
            }
        }
        revs.sort_unstable();
        Ok(revs)
    }

    fn current(&self, id: &str) -> Result<u64, StoreError> {
        self.revisions(id)?
            .last()
            .copied()
            .ok_or_else(|| StoreError::NotFound(id.to_string()))
    }

    /// Writes the bytes to a private temporary file and links it into
    /// place. Linking fails if the target exists, which makes the link the
    /// compare-and-set.
    fn link_new(&self, dir: &Path, target: &Path, bytes: &[u8]) -> io::Result<()> {
        let tmp = dir.join(format!(".tmp-{}", uuid::Uuid::new_v4()));
        let result = (|| {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
            fs::hard_link(&tmp, target)
        })();
        let _ = fs::remove_file(&tmp);
        result
    }
}

impl DocumentStore for FsStore {
    fn create(&self, id: &str, bytes: &[u8]) -> Result<u64, StoreError> {
        check_id(id)?;
        let dir = self.dir(id);
        match fs::create_dir(&dir) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => return Err(StoreError::Exists(id.to_string())),
            Err(e) => return Err(e.into()),
        }
        match self.link_new(&dir, &self.rev_path(id, 1), bytes) {
            Ok(()) => Ok(1),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(StoreError::Exists(id.to_string())),
            Err(e) => Err(e.into()),
        }
    }

    fn latest(&self, id: &str) -> Result<(u64, Vec<u8>), StoreError> {
        check_id(id)?;
        let rev = self.current(id)?;
        Ok((rev, fs::read(self.rev_path(id, rev))?))
    }

    fn revision(&self, id: &str, rev: u64) -> Result<Vec<u8>, StoreError> {
        check_id(id)?;
        fs::read(self.rev_path(id, rev)).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => StoreError::NotFound(format!("{id}@{rev}")),
            _ => e.into(),
        })
    }

    fn append(&self, id: &str, expected: u64, bytes: &[u8]) -> Result<u64, StoreError> {
        check_id(id)?;
        let current = self.current(id)?;
        if current != expected {
            return Err(StoreError::Conflict { expected, current });
        }
        let next = expected + 1;
        match self.link_new(&self.dir(id), &self.rev_path(id, next), bytes) {
            Ok(()) => Ok(next),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(StoreError::Conflict {
                expected,
                current: self.current(id)?,
            }),
            Err(e) => Err(e.into()),
        }
    }

    fn list(&self) -> Result<Vec<(String, u64)>, StoreError> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if entry.file_type()?.is_dir() && valid_id(&name) {
                if let Ok(rev) = self.current(&name) {
                    out.push((name, rev));
                }
            }
        }
        out.sort();
        Ok(out)
    }

    fn put_artifact(&self, id: &str, name: &str, bytes: &[u8]) -> Result<(), StoreError> {
        check_id(id)?;
        check_id(name)?;
        self.current(id)?;
        let dir = self.dir(id).join("artifacts");
        fs::create_dir_all(&dir)?;
        match self.link_new(&dir, &dir.join(format!("{name}.json")), bytes) {
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(StoreError::Exists(format!("{id}/{name}"))),
            other => Ok(other?),
        }
    }

    fn artifact(&self, id: &str, name: &str) -> Result<Vec<u8>, StoreError> {
        check_id(id)?;
        check_id(name)?;
        fs::read(self.dir(id).join("artifacts").join(format!("{name}.json"))).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => StoreError::NotFound(format!("{id}/{name}")),
            _ => e.into(),
        })
    }
}

#[derive(Debug, Default)]
struct Doc {
    revisions: Vec<Vec<u8>>,
    artifacts: BTreeMap<String, Vec<u8>>,
}

/// In-process store for tests and throwaway servers.
#[derive(Debug, Default)]
pub struct MemoryStore {
    docs: Mutex<BTreeMap<String, Doc>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    fn with<T>(&self, id: &str, f: impl FnOnce(&mut Doc) -> Result<T, StoreError>) -> Result<T, StoreError> {
        check_id(id)?;
        let mut docs = self.docs.lock().expect("store lock poisoned");
        let doc = docs.get_mut(id).ok_or_else(|| StoreError::NotFound(id.to_string()))?;
        f(doc)
    }
}

impl DocumentStore for MemoryStore {
    fn create(&self, id: &str, bytes: &[u8]) -> Result<u64, StoreError> {
        check_id(id)?;
        let mut docs = self.docs.lock().expect("store lock poisoned");
        if docs.contains_key(id) {
            return Err(StoreError::Exists(id.to_string()));
        }
        docs.insert(
            id.to_string(),
            Doc {
                revisions: vec![bytes.to_vec()],
                artifacts: BTreeMap::new(),
            },
        );
        Ok(1)
    }

    fn latest(&self, id: &str) -> Result<(u64, Vec<u8>), StoreError> {
        self.with(id, |d| Ok((d.revisions.len() as u64, d.revisions.last().cloned().unwrap_or_default())))
    }

    fn revision(&self, id: &str, rev: u64) -> Result<Vec<u8>, StoreError> {
        self.with(id, |d| {
            rev.checked_sub(1)
                .and_then(|i| d.revisions.get(i as usize))
                .cloned()
                .ok_or_else(|| StoreError::NotFound(format!("{id}@{rev}")))
        })
    }

    fn append(&self, id: &str, expected: u64, bytes: &[u8]) -> Result<u64, StoreError> {
        self.with(id, |d| {
            let current = d.revisions.len() as u64;
            if current != expected {
                return Err(StoreError::Conflict { expected, current });
            }
            d.revisions.push(bytes.to_vec());
            Ok(current + 1)
        })
    }

    fn list(&self) -> Result<Vec<(String, u64)>, StoreError> {
        let docs = self.docs.lock().expect("store lock poisoned");
        Ok(docs.iter().map(|(k, d)| (k.clone(), d.revisions.len() as u64)).collect())
    }

    fn put_artifact(&self, id: &str, name: &str, bytes: &[u8]) -> Result<(), StoreError> {
        check_id(name)?;
        self.with(id, |d| {
            if d.artifacts.contains_key(name) {
                return Err(StoreError::Exists(format!("{id}/{name}")));
            }
            d.artifacts.insert(name.to_string(), bytes.to_vec());
            Ok(())
        })
    }

    fn artifact(&self, id: &str, name: &str) -> Result<Vec<u8>, StoreError> {
        self.with(id, |d| {
            d.artifacts
                .get(name)
                .cloned()
                .ok_or_else(|| StoreError::NotFound(format!("{id}/{name}")))
        })
    }
}
