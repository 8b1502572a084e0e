//! Request/response cassettes for bit-exact offline replay.
//!
//! A cassette is a JSON array of entries, each carrying the canonical digest of
//! its request. Digests are verified on load, so a hand-edited request that no
//! longer matches its stored digest is rejected rather than silently replayed.

use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::backend::{Backend, BackendError, GenerationRequest, GenerationResponse};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub digest: String,
    pub request: GenerationRequest,
    pub response: GenerationResponse,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cassette {
    pub entries: Vec<CassetteEntry>,
}

impl Cassette {
    pub fn load(path: &Path) -> Result<Cassette, BackendError> {
        let raw = std::fs::read_to_string(path)?;
        let cassette: Cassette = serde_json::from_str(&raw)?;
        cassette.verify()?;
        Ok(cassette)
    }

    pub fn save(&self, path: &Path) -> Result<(), BackendError> {
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        std::fs::write(path, body)?;
        Ok(())
    }

    /// Recompute every entry's digest against the stored one and require
    /// digests to be unique within the cassette.
    pub fn verify(&self) -> Result<(), BackendError> {
        let mut seen: Vec<&str> = Vec::with_capacity(self.entries.len());
        for (index, entry) in self.entries.iter().enumerate() {
            let computed = entry.request.digest();
            if computed != entry.digest {
                return Err(BackendError::CorruptCassette {
                    index,
                    stored: entry.digest.clone(),
                    computed,
                });
            }
            if seen.contains(&entry.digest.as_str()) {
                return Err(BackendError::DuplicateDigest {
                    digest: entry.digest.clone(),
                });
            }
            seen.push(&entry.digest);
        }
        Ok(())
    }

    pub fn lookup(&self, digest: &str) -> Option<&CassetteEntry> {
        self.entries.iter().find(|e| e.digest == digest)
    }

    /// Append an entry. Recording the same request with the same response is
    /// an idempotent no-op; a conflicting response is a `DuplicateDigest`.
    pub fn record(
        &mut self,
        request: GenerationRequest,
        response: GenerationResponse,
    ) -> Result<(), BackendError> {
        let digest = request.digest();
        if let Some(existing) = self.lookup(&digest) {
            if existing.response == response {
                return Ok(());
            }
            return Err(BackendError::DuplicateDigest { digest });
        }
        self.entries.push(CassetteEntry {
            digest,
            request,
            response,
        });
        Ok(())
    }
}

/// Record one exchange into the cassette file at `path`, creating it if absent.
pub fn record(
    path: &Path,
    request: &GenerationRequest,
    response: &GenerationResponse,
) -> Result<(), BackendError> {
    let mut cassette = if path.exists() {
        Cassette::load(path)?
    } else {
        Cassette::default()
    };
    cassette.record(request.clone(), response.clone())?;
    cassette.save(path)
}

/// Serves responses from a cassette; never dispatches to a provider.
pub struct ReplayBackend {
    cassette: Cassette,
}

impl ReplayBackend {
    pub fn from_path(path: &Path) -> Result<Self, BackendError> {
        Ok(ReplayBackend {
            cassette: Cassette::load(path)?,
        })
    }

    pub fn from_cassette(cassette: Cassette) -> Result<Self, BackendError> {
        cassette.verify()?;
        Ok(ReplayBackend { cassette })
    }
}

impl Backend for ReplayBackend {
    fn complete(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        request.validate()?;
        let digest = request.digest();
        self.cassette
            .lookup(&digest)
            .map(|e| e.response.clone())
            .ok_or(BackendError::NoCassetteMatch { digest })
    }

    fn name(&self) -> &str {
        "replay"
    }
}

/// Wraps a live backend and persists every exchange. Writes are serialized by
/// an internal mutex so concurrent runs can share one recorder.
pub struct RecordingBackend<B> {
    inner: B,
    path: PathBuf,
    lock: Mutex<()>,
}

impl<B: Backend> RecordingBackend<B> {
    pub fn new(inner: B, path: impl Into<PathBuf>) -> Self {
        RecordingBackend {
            inner,
            path: path.into(),
            lock: Mutex::new(()),
        }
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn complete(&self, request: &GenerationRequest) -> Result<GenerationResponse, BackendError> {
        let response = self.inner.complete(request)?;
        let _guard = self.lock.lock().expect("cassette lock");
        record(&self.path, request, &response)?;
        Ok(response)
    }

    fn embed(&self, text: &str) -> Result<crate::embedding::Embedding, BackendError> {
        self.inner.embed(text)
    }

    fn name(&self) -> &str {
        "recording"
    }
}
