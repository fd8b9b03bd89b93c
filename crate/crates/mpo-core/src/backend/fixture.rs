//! Record/replay transport: one JSON file per request digest holding the
//! digest and the response body. Replay is byte-identical and verifiable.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use super::{ChatRequest, ChatTransport, TransportError};

#[derive(Debug, Serialize, Deserialize)]
struct FixtureFile {
    digest: String,
    response: String,
}

/// In record mode (`inner` present) misses are forwarded and stored; in
/// replay mode a miss is a fatal error so test runs cannot silently reach
/// the network.
pub struct FixtureTransport {
    dir: PathBuf,
    inner: Option<Arc<dyn ChatTransport>>,
}

impl FixtureTransport {
    pub fn replay(dir: impl Into<PathBuf>) -> Self {
        FixtureTransport {
            dir: dir.into(),
            inner: None,
        }
    }

    pub fn record(dir: impl Into<PathBuf>, inner: Arc<dyn ChatTransport>) -> Self {
        FixtureTransport {
            dir: dir.into(),
            inner: Some(inner),
        }
    }

    fn path(&self, digest: &str) -> PathBuf {
        self.dir.join(format!("{digest}.json"))
    }
}

impl ChatTransport for FixtureTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let digest = request.digest();
        let path = self.path(&digest);
        if path.exists() {
            let body = fs::read_to_string(&path)
                .map_err(|e| TransportError::Fatal(format!("unreadable fixture {digest}: {e}")))?;
            let fixture: FixtureFile = serde_json::from_str(&body)
                .map_err(|e| TransportError::Fatal(format!("corrupt fixture {digest}: {e}")))?;
            if fixture.digest != digest {
                return Err(TransportError::Fatal(format!(
                    "fixture digest mismatch: file says {}, request is {digest}",
                    fixture.digest
                )));
            }
            return Ok(fixture.response);
        }
        match &self.inner {
            Some(inner) => {
                let response = inner.send(request)?;
                let fixture = FixtureFile {
                    digest: digest.clone(),
                    response: response.clone(),
                };
                fs::create_dir_all(&self.dir)
                    .and_then(|_| {
                        fs::write(&path, serde_json::to_string_pretty(&fixture).expect("fixture json"))
                    })
                    .map_err(|e| TransportError::Fatal(format!("cannot record fixture: {e}")))?;
                Ok(response)
            }
            None => Err(TransportError::Fatal(format!(
                "no fixture recorded for request {digest}"
            ))),
        }
    }
}
