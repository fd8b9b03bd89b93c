//! Content-addressed asset store.
//!
//! Blobs live under `<run_dir>/assets/<hash>` where the hash is the SHA-256
//! of the bytes, so identical assets deduplicate and any reference can be
//! verified against the content it points at.

use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::prompt::{AssetContent, AssetRef, Modality};

#[derive(Debug, Clone)]
pub struct AssetStore {
    root: PathBuf,
}

impl AssetStore {
    /// Opens (creating if needed) the asset directory.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(Error::storage)?;
        Ok(AssetStore { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn blob_path(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    /// Stores bytes once under their content hash. Idempotent for
    /// identical bytes.
    pub fn store(
        &self,
        bytes: &[u8],
        modality: Modality,
        media_hint: Option<String>,
    ) -> Result<AssetRef> {
        if bytes.is_empty() {
            return Err(Error::Storage("refusing to store an empty blob".into()));
        }
        let id = hex::encode(Sha256::digest(bytes));
        let path = self.blob_path(&id);
        if !path.exists() {
            let tmp = self.root.join(format!(".tmp-{id}"));
            fs::write(&tmp, bytes).map_err(Error::storage)?;
            fs::rename(&tmp, &path).map_err(Error::storage)?;
        }
        Ok(AssetRef::blob(modality, id, media_hint))
    }

    /// Loads the bytes behind a blob reference. Inline assets resolve to
    /// their UTF-8 content.
    pub fn resolve(&self, asset: &AssetRef) -> Result<Vec<u8>> {
        match &asset.content {
            AssetContent::Inline(text) => Ok(text.as_bytes().to_vec()),
            AssetContent::Blob(id) => {
                fs::read(self.blob_path(id)).map_err(|e| {
                    Error::Storage(format!("blob {id} does not resolve: {e}"))
                })
            }
        }
    }

    /// Checks that a reference resolves and, for blobs, that the stored
    /// bytes hash back to the blob id.
    pub fn verify(&self, asset: &AssetRef) -> Result<()> {
        match &asset.content {
            AssetContent::Inline(text) => {
                if !asset.modality.allows_inline() {
                    return Err(Error::Storage(format!(
                        "inline content is not permitted for modality `{}`",
                        asset.modality
                    )));
                }
                if text.is_empty() {
                    return Err(Error::Storage("inline asset is empty".into()));
                }
                Ok(())
            }
            AssetContent::Blob(id) => {
                let bytes = self.resolve(asset)?;
                let actual = hex::encode(Sha256::digest(&bytes));
                if &actual != id {
                    return Err(Error::Storage(format!(
                        "blob {id} fails content addressing (bytes hash to {actual})"
                    )));
                }
                Ok(())
            }
        }
    }
}
