//! Self-describing JSON model container with a SHA-256 integrity checksum.
//! The layout is documented in `docs/model-format.md`.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ModelKind, ModelParams, ModelState, TrainedModel, TrainingMetadata};
use crate::error::{Error, Result};
use crate::features::FeatureSchema;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u64,
    kind: ModelKind,
    params: ModelParams,
    schema_hash: String,
    feature_names: Vec<String>,
    /// Seconds since the Unix epoch.
    created_utc: u64,
    metadata: TrainingMetadata,
    state: ModelState,
    checksum: String,
}

fn checksum(file: &mut ModelFile) -> Result<String> {
    let saved = std::mem::take(&mut file.checksum);
    let bytes = serde_json::to_vec(file)?;
    file.checksum = saved;
    Ok(hex::encode(Sha256::digest(bytes)))
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let created_utc = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut file = ModelFile {
        format_version: FORMAT_VERSION,
        kind: model.kind,
        params: model.params.clone(),
        schema_hash: model.schema_hash.clone(),
        feature_names: model.feature_names.clone(),
        created_utc,
        metadata: model.metadata.clone(),
        state: model.state.clone(),
        checksum: String::new(),
    };
    file.checksum = checksum(&mut file)?;
    std::fs::write(path, serde_json::to_vec(&file)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|e| Error::Corrupted(format!("not JSON: {e}")))?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(Error::FormatVersion(v)),
        None => return Err(Error::Corrupted("missing format_version".into())),
    }
    let mut file: ModelFile =
        serde_json::from_value(value).map_err(|e| Error::Corrupted(format!("unexpected layout: {e}")))?;
    if checksum(&mut file)? != file.checksum {
        return Err(Error::Corrupted("checksum mismatch".into()));
    }
    let schema = FeatureSchema::from_names(file.feature_names.clone())
        .map_err(|e| Error::Corrupted(e.to_string()))?;
    if schema.hash() != file.schema_hash {
        return Err(Error::Corrupted("schema hash does not match feature names".into()));
    }
    let d = file.feature_names.len();
    let consistent = match &file.state {
        ModelState::RandomForest(rf) => {
            rf.n_features == d
                && rf.trees.len() == file.params.n_trees
                && rf.trees.iter().all(|t| t.validate(d).is_ok())
        }
        ModelState::GaussianNb(nb) => nb.means.iter().chain(&nb.variances).all(|v| v.len() == d),
        ModelState::LogisticRegression(lr) => {
            lr.weights.len() == d && lr.mean.len() == d && lr.scale.len() == d
        }
    };
    let kind_matches = matches!(
        (&file.state, file.kind),
        (ModelState::RandomForest(_), ModelKind::RandomForest)
            | (ModelState::GaussianNb(_), ModelKind::GaussianNb)
            | (ModelState::LogisticRegression(_), ModelKind::LogisticRegression)
    );
    if !consistent || !kind_matches {
        return Err(Error::Corrupted("model state inconsistent with its header".into()));
    }
    Ok(TrainedModel {
        kind: file.kind,
        params: file.params,
        schema_hash: file.schema_hash,
        feature_names: file.feature_names,
        state: file.state,
        metadata: file.metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{toy, train};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_identical() {
        let m = toy::separable();
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let probes: Vec<Vec<f64>> = (0..100).map(|_| vec![rng.random_range(-1.0..2.0), rng.random_range(-1.0..2.0)]).collect();
        for kind in [ModelKind::RandomForest, ModelKind::GaussianNb, ModelKind::LogisticRegression] {
            let model = train(&m, &ModelParams::with_kind(kind)).unwrap();
            let path = dir.path().join("m.json");
            save_model(&model, &path).unwrap();
            let back = load_model(&path).unwrap();
            assert_eq!(back, model);
            for x in &probes {
                assert_eq!(model.p_confused(x).to_bits(), back.p_confused(x).to_bits());
            }
        }
    }

    #[test]
    fn tampering_is_detected() {
        let model = train(&toy::separable(), &ModelParams::with_kind(ModelKind::GaussianNb)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&model, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["checksum"] = "00".into();
        std::fs::write(&path, v.to_string()).unwrap();
        assert!(matches!(load_model(&path), Err(Error::Corrupted(_))));

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["state"]["log_prior"][0] = 0.25.into();
        std::fs::write(&path, v.to_string()).unwrap();
        assert!(matches!(load_model(&path), Err(Error::Corrupted(_))));

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["format_version"] = 2.into();
        std::fs::write(&path, v.to_string()).unwrap();
        assert!(matches!(load_model(&path), Err(Error::FormatVersion(2))));

        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&path), Err(Error::Corrupted(_))));
    }
}
