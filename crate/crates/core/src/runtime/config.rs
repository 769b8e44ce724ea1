//! Experiment configuration, read from TOML.
//!
//! ```toml
//! algorithm = "poet"        # poet | pinsky | paired
//! seed = 7
//! workers = 4
//! output_dir = "runs/poet-7"
//! checkpoint_every = 50     # 0 disables checkpoints
//!
//! [level]
//! kind = "carved"           # carved | open_room | file | inline
//! width = 11
//! height = 11
//! seed = 3
//!
//! [poet]
//! total_loops = 200
//! evolve_every = 5
//! transfer_every = 10
//! optimize_steps_per_loop = 1
//!
//! [poet.evolution]
//! parents_per_step = 2
//! children_per_parent = 4
//! max_population = 8
//! validator = { kind = "mc_range", mc_min = 0.1, mc_max = 0.9 }
//! ```
//!
//! `pinsky` runs the `[poet]` section with the validator replaced by the
//! solvability check. `paired` reads a `[paired]` section instead.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::managers::{sha256_hex, PairedConfig, PoetConfig};
use crate::maze::{carved_maze, open_room, Level, Pos};
use crate::validators::ValidatorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Poet,
    Pinsky,
    Paired,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Poet => "poet",
            Algorithm::Pinsky => "pinsky",
            Algorithm::Paired => "paired",
        }
    }
}

/// Where the seed level comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LevelSource {
    File { path: PathBuf },
    Inline { text: String },
    Carved { width: usize, height: usize, seed: u64 },
    OpenRoom { width: usize, height: usize, start: (usize, usize), goal: (usize, usize) },
}

impl LevelSource {
    pub fn build(&self) -> Result<Level> {
        Ok(match self {
            LevelSource::File { path } => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                Level::parse(&text)?
            }
            LevelSource::Inline { text } => Level::parse(text)?,
            LevelSource::Carved { width, height, seed } => carved_maze(*width, *height, *seed)?,
            LevelSource::OpenRoom { width, height, start, goal } => {
                open_room(*width, *height, Pos::new(start.0, start.1), Pos::new(goal.0, goal.1))?
            }
        })
    }
}

fn default_workers() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub checkpoint_every: u64,
    #[serde(default)]
    pub level: Option<LevelSource>,
    #[serde(default)]
    pub poet: Option<PoetConfig>,
    #[serde(default)]
    pub paired: Option<PairedConfig>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses `path` and resolves it fully: file-backed levels are read and
    /// inlined, and a relative output directory is taken relative to the
    /// config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(LevelSource::File { path: level_path }) = &cfg.level {
            let full = base.join(level_path);
            let text = fs::read_to_string(&full).map_err(|e| Error::io(&full, e))?;
            Level::parse(&text)?;
            cfg.level = Some(LevelSource::Inline { text });
        }
        if let Some(dir) = &cfg.output_dir {
            if dir.is_relative() {
                cfg.output_dir = Some(base.join(dir));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        match self.algorithm {
            Algorithm::Poet | Algorithm::Pinsky => {
                self.poet
                    .as_ref()
                    .ok_or_else(|| Error::Config("missing [poet] section".into()))?
                    .validate()?;
                if self.level.is_none() {
                    return Err(Error::Config("missing [level] section".into()));
                }
                if self.paired.is_some() {
                    return Err(Error::Config("[paired] section given for a poet run".into()));
                }
            }
            Algorithm::Paired => {
                self.paired
                    .as_ref()
                    .ok_or_else(|| Error::Config("missing [paired] section".into()))?
                    .validate()?;
                if self.poet.is_some() {
                    return Err(Error::Config("[poet] section given for a paired run".into()));
                }
            }
        }
        Ok(())
    }

    /// The archive-loop configuration actually run, after the pinsky
    /// validator substitution.
    pub fn poet_config(&self) -> Result<PoetConfig> {
        let mut cfg = self
            .poet
            .clone()
            .ok_or_else(|| Error::Config("missing [poet] section".into()))?;
        if self.algorithm == Algorithm::Pinsky {
            cfg.evolution.validator = ValidatorKind::Solvability {};
        }
        Ok(cfg)
    }

    pub fn paired_config(&self) -> Result<PairedConfig> {
        self.paired
            .clone()
            .ok_or_else(|| Error::Config("missing [paired] section".into()))
    }

    pub fn seed_level(&self) -> Result<Level> {
        self.level
            .as_ref()
            .ok_or_else(|| Error::Config("missing [level] section".into()))?
            .build()
    }

    /// Everything that determines the run's results. Worker count and
    /// output location are left out, so they cannot change the log.
    pub fn snapshot(&self) -> Result<serde_json::Value> {
        let mut v = serde_json::to_value(self)?;
        let map = v.as_object_mut().expect("config serializes to an object");
        map.remove("workers");
        map.remove("output_dir");
        Ok(v)
    }

    /// SHA-256 of the compact JSON snapshot.
    pub fn digest(&self) -> Result<String> {
        Ok(sha256_hex(serde_json::to_string(&self.snapshot()?)?.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::solvable;

    const POET: &str = r#"
algorithm = "poet"
seed = 7
workers = 2

[level]
kind = "carved"
width = 9
height = 9
seed = 1

[poet]
total_loops = 10
evolve_every = 2
transfer_every = 5
optimize_steps_per_loop = 1

[poet.es]
pop_size = 8

[poet.evolution]
parents_per_step = 1
children_per_parent = 2
max_population = 4
validator = { kind = "mc_range", mc_min = 0.1, mc_max = 0.9 }
"#;

    #[test]
    fn parses_and_defaults() {
        let cfg = ExperimentConfig::from_toml_str(POET).unwrap();
        let poet = cfg.poet_config().unwrap();
        assert_eq!(poet.es.pop_size, 8);
        assert_eq!(poet.es.sigma, 0.05);
        assert_eq!(poet.horizon, 500);
        assert!(cfg.seed_level().unwrap().is_complete());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml_str(&format!("{POET}\nbogus = 1\n")).is_err());
        let typo = POET.replace("pop_size", "popsize");
        assert!(ExperimentConfig::from_toml_str(&typo).is_err());
    }

    #[test]
    fn pinsky_swaps_only_the_validator() {
        let poet = ExperimentConfig::from_toml_str(POET).unwrap();
        let pinsky = ExperimentConfig::from_toml_str(&POET.replace("\"poet\"", "\"pinsky\"")).unwrap();
        let (a, b) = (poet.poet_config().unwrap(), pinsky.poet_config().unwrap());
        assert_eq!(b.evolution.validator, ValidatorKind::Solvability {});
        assert_eq!(a.es, b.es);
        assert_eq!(a.evolution.mutation, b.evolution.mutation);
    }

    #[test]
    fn digest_ignores_workers_only() {
        let a = ExperimentConfig::from_toml_str(POET).unwrap();
        let b = ExperimentConfig { workers: 8, output_dir: Some("x".into()), ..a.clone() };
        assert_eq!(a.digest().unwrap(), b.digest().unwrap());
        let c = ExperimentConfig { seed: 8, ..a.clone() };
        assert_ne!(a.digest().unwrap(), c.digest().unwrap());
    }

    #[test]
    fn file_levels_are_inlined() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("m.txt"), "#####\n#S..#\n#..G#\n#####\n").unwrap();
        let text = POET.replace("kind = \"carved\"\nwidth = 9\nheight = 9\nseed = 1", "kind = \"file\"\npath = \"m.txt\"");
        fs::write(dir.path().join("c.toml"), text).unwrap();
        let cfg = ExperimentConfig::load(&dir.path().join("c.toml")).unwrap();
        assert!(matches!(cfg.level, Some(LevelSource::Inline { .. })));
        assert_eq!(cfg.seed_level().unwrap().width(), 5);
    }

    #[test]
    fn shipped_configs_load() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = 0;
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "toml") {
                let cfg = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                if cfg.algorithm != Algorithm::Paired {
                    assert!(solvable(&cfg.seed_level().unwrap()), "{}", path.display());
                }
                seen += 1;
            }
        }
        assert!(seen >= 4);
    }

    #[test]
    fn missing_sections() {
        let no_level = POET.replace("[level]\nkind = \"carved\"\nwidth = 9\nheight = 9\nseed = 1\n", "");
        assert!(ExperimentConfig::from_toml_str(&no_level).is_err());
        assert!(ExperimentConfig::from_toml_str("algorithm = \"paired\"\nseed = 1\n").is_err());
        let paired = "algorithm = \"paired\"\nseed = 1\n[paired]\ngenerations = 2\ncanvas = [6, 6]\n";
        assert!(ExperimentConfig::from_toml_str(paired).is_ok());
    }
}
