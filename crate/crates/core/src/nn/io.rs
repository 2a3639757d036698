//! Model persistence: a versioned JSON container with a payload checksum.
//!
//! The model body is serialized to canonical JSON (fixed field order,
//! shortest round-trip float formatting), hashed with SHA-256, and wrapped
//! in an envelope carrying the format version and the hex digest. Loading
//! re-serializes the parsed body and compares digests, so a corrupt or
//! hand-edited file fails with an integrity error while parameters round-trip
//! bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::nn::MlpModel;

pub const MODEL_FORMAT: &str = "survey-transfer-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    sha256: String,
    model: MlpModel,
}

/// Canonical body bytes used for hashing and identity.
pub fn model_body_json(model: &MlpModel) -> String {
    serde_json::to_string(model).expect("model serializes")
}

/// SHA-256 hex digest of the canonical model body; used as the model's
/// content reference in reports and manifests.
pub fn model_ref(model: &MlpModel) -> String {
    hex::encode(Sha256::digest(model_body_json(model).as_bytes()))
}

pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    for layer in model.trunk.iter().chain(model.heads.iter().map(|h| &h.layer)) {
        if layer.weights.iter().chain(&layer.biases).any(|v| !v.is_finite()) {
            return Err(Error::Integrity {
                detail: "refusing to save a model with non-finite parameters".to_string(),
            });
        }
    }
    let envelope = Envelope {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        sha256: model_ref(model),
        model: model.clone(),
    };
    let text = serde_json::to_string_pretty(&envelope).expect("envelope serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Integrity {
        detail: format!("unreadable model file {}: {e}", path.display()),
    })?;
    let version = value.get("version").and_then(serde_json::Value::as_u64);
    let format = value.get("format").and_then(serde_json::Value::as_str);
    if format != Some(MODEL_FORMAT) || version != Some(u64::from(MODEL_VERSION)) {
        return Err(Error::UnsupportedVersion {
            found: format!(
                "{}/{}",
                format.unwrap_or("?"),
                version.map_or("?".to_string(), |v| v.to_string())
            ),
            supported: MODEL_VERSION,
        });
    }
    let envelope: Envelope = serde_json::from_value(value).map_err(|e| Error::Integrity {
        detail: format!("malformed model body: {e}"),
    })?;
    let recomputed = model_ref(&envelope.model);
    if recomputed != envelope.sha256 {
        return Err(Error::Integrity {
            detail: format!(
                "checksum mismatch: file says {}, body hashes to {recomputed}",
                envelope.sha256
            ),
        });
    }
    Ok(envelope.model)
}
