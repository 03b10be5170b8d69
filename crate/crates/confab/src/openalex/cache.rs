use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A GET request against the service, identified by endpoint and sorted params.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub endpoint: String,
    pub params: BTreeMap<String, String>,
}

impl Request {
    pub fn new<'a>(endpoint: &str, params: impl IntoIterator<Item = (&'a str, String)>) -> Self {
        Request {
            endpoint: endpoint.to_string(),
            params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    /// SHA-256 over the endpoint and `key=value` lines in key order.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.endpoint.as_bytes());
        for (k, v) in &self.params {
            h.update(b"\n");
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn describe(&self) -> String {
        let q: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}?{}", self.endpoint, q.join("&"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub fingerprint: String,
    pub request: Request,
    /// Unix seconds at capture time.
    pub fetched_at: u64,
    /// Response body exactly as received.
    pub body: String,
}

/// Content-addressed directory of recorded responses, one `<fingerprint>.json` per request.
#[derive(Debug, Clone)]
pub struct FixtureCache {
    dir: PathBuf,
}

impl FixtureCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FixtureCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, fingerprint: &str) -> PathBuf {
        self.dir.join(format!("{fingerprint}.json"))
    }

    pub fn contains(&self, req: &Request) -> bool {
        self.path_for(&req.fingerprint()).is_file()
    }

    pub fn get(&self, req: &Request) -> std::io::Result<Option<CacheEntry>> {
        let path = self.path_for(&req.fingerprint());
        match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Stores `body` for `req`, replacing the entry atomically.
    pub fn put(&self, req: &Request, body: &str, fetched_at: u64) -> std::io::Result<CacheEntry> {
        let entry = CacheEntry {
            fingerprint: req.fingerprint(),
            request: req.clone(),
            fetched_at,
            body: body.to_string(),
        };
        let mut bytes = serde_json::to_vec_pretty(&entry).map_err(std::io::Error::other)?;
        bytes.push(b'\n');
        write_atomic(&self.path_for(&entry.fingerprint), &bytes)?;
        Ok(entry)
    }
}

/// Writes to a sibling temp file, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
