//! Checkpoint container: a one-line JSON header carrying the schema tag and
//! a SHA-256 digest of the body, followed by the JSON body itself.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PairedState, PoetState};
use crate::error::{Error, Result};
use crate::runtime::seed::Seed;

pub const CHECKPOINT_SCHEMA: &str = "coevo-checkpoint/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum CheckpointState {
    Poet(PoetState),
    Paired(PairedState),
}

/// Everything needed to continue a run. Randomness is derived from the
/// experiment seed and the loop index, so no generator state is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub seed: Seed,
    #[serde(rename = "loop")]
    pub loop_idx: u64,
    /// Sequence number the log continues from after restoring.
    pub log_next_seq: u64,
    pub config_digest: String,
    /// Resolved configuration the run was started with.
    pub config: serde_json::Value,
    pub state: CheckpointState,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: String,
    digest: String,
    bytes: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes atomically via a temporary sibling file. Returns the body digest.
pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<String> {
    let body = serde_json::to_string(ckpt)?;
    let digest = sha256_hex(body.as_bytes());
    let header = Header {
        schema: CHECKPOINT_SCHEMA.into(),
        digest: digest.clone(),
        bytes: body.len(),
    };
    let text = format!("{}\n{body}\n", serde_json::to_string(&header)?);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))?;
    Ok(digest)
}

/// Reads and verifies a checkpoint. With `expected_config` set, a
/// checkpoint from a different configuration is refused.
pub fn load_checkpoint(path: &Path, expected_config: Option<&str>) -> Result<Checkpoint> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (head, rest) = text
        .split_once('\n')
        .ok_or_else(|| Error::Integrity(format!("{}: missing header", path.display())))?;
    let header: Header =
        serde_json::from_str(head).map_err(|e| Error::Integrity(format!("{}: bad header: {e}", path.display())))?;
    if header.schema != CHECKPOINT_SCHEMA {
        return Err(Error::Schema(format!("checkpoint schema {}", header.schema)));
    }
    let body = rest.strip_suffix('\n').unwrap_or(rest);
    if body.len() != header.bytes || sha256_hex(body.as_bytes()) != header.digest {
        return Err(Error::Integrity(format!("{}: body digest mismatch", path.display())));
    }
    let ckpt: Checkpoint =
        serde_json::from_str(body).map_err(|e| Error::Integrity(format!("{}: bad body: {e}", path.display())))?;
    if let Some(expected) = expected_config {
        if ckpt.config_digest != expected {
            return Err(Error::ConfigMismatch {
                expected: ckpt.config_digest,
                found: expected.to_string(),
            });
        }
    }
    Ok(ckpt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{DirectGenome, GenomeId};
    use crate::managers::{Pair, PairId};
    use crate::maze::carved_maze;
    use crate::solvers::{Arch, PolicyParams};

    fn sample() -> Checkpoint {
        let level = carved_maze(9, 9, 2).unwrap();
        Checkpoint {
            seed: Seed(7),
            loop_idx: 10,
            log_next_seq: 42,
            config_digest: "cafe".into(),
            config: serde_json::json!({"seed": 7}),
            state: CheckpointState::Poet(PoetState {
                archive: vec![Pair {
                    id: PairId(0),
                    genome: DirectGenome::seed(level, GenomeId(0), 0).unwrap(),
                    agent: PolicyParams::random(Arch::agent(), Seed(3)),
                    birth_loop: 0,
                    steps_optimized: 10,
                }],
                next_id: 5,
            }),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        save_checkpoint(&path, &sample()).unwrap();
        assert_eq!(load_checkpoint(&path, Some("cafe")).unwrap(), sample());
    }

    #[test]
    fn config_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        save_checkpoint(&path, &sample()).unwrap();
        assert!(matches!(load_checkpoint(&path, Some("beef")), Err(Error::ConfigMismatch { .. })));
    }

    #[test]
    fn truncated_or_edited_files_fail_integrity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        save_checkpoint(&path, &sample()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        for cut in [text.len() / 2, text.find('\n').unwrap() + 10, 5] {
            fs::write(&path, &text[..cut]).unwrap();
            assert!(matches!(load_checkpoint(&path, None), Err(Error::Integrity(_))), "cut at {cut}");
        }
        fs::write(&path, text.replacen("\"loop\":10", "\"loop\":11", 1)).unwrap();
        assert!(matches!(load_checkpoint(&path, None), Err(Error::Integrity(_))));
    }
}
