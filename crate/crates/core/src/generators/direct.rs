use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maze::{Level, Pos, Tile};
use crate::runtime::seed::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GenomeId(pub u64);

impl std::fmt::Display for GenomeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub genome_id: GenomeId,
    pub parent_id: Option<GenomeId>,
    pub birth_loop: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MutationConfig {
    /// Per interior cell probability of a wall/floor flip.
    pub tile_flip_rate: f64,
    pub move_goal_prob: f64,
    pub move_start_prob: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            tile_flip_rate: 0.01,
            move_goal_prob: 0.1,
            move_start_prob: 0.1,
        }
    }
}

impl MutationConfig {
    pub fn none() -> Self {
        MutationConfig {
            tile_flip_rate: 0.0,
            move_goal_prob: 0.0,
            move_start_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tile_flip_rate", self.tile_flip_rate),
            ("move_goal_prob", self.move_goal_prob),
            ("move_start_prob", self.move_start_prob),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("mutation.{name} = {v} is not a probability")));
            }
        }
        Ok(())
    }
}

/// Directly encoded maze: the genome is its own phenotype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectGenome {
    level: Level,
    pub lineage: Lineage,
}

impl DirectGenome {
    /// Root genome; the level must be complete.
    pub fn seed(level: Level, genome_id: GenomeId, birth_loop: u64) -> Result<Self> {
        if !level.is_complete() {
            return Err(Error::Config("seed genome needs a start and a goal".into()));
        }
        Ok(DirectGenome {
            level,
            lineage: Lineage {
                genome_id,
                parent_id: None,
                birth_loop,
            },
        })
    }

    pub fn id(&self) -> GenomeId {
        self.lineage.genome_id
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn generate(&self) -> Level {
        self.level.clone()
    }

    /// Child genome under `cfg`.
    ///
    /// Every interior wall or floor cell flips with `tile_flip_rate`; then the
    /// goal and the start may each jump to a uniformly drawn floor cell. When
    /// no floor cell is left the jump is skipped. Random draws happen in a
    /// fixed order (cells row-major, goal, start) so children depend only on
    /// `seed`.
    pub fn mutate(&self, cfg: &MutationConfig, child_id: GenomeId, birth_loop: u64, seed: Seed) -> Result<DirectGenome> {
        cfg.validate()?;
        if birth_loop <= self.lineage.birth_loop {
            return Err(Error::Config(format!(
                "child birth loop {birth_loop} must follow parent's {}",
                self.lineage.birth_loop
            )));
        }
        let mut rng = seed.rng();
        let mut level = self.level.clone();
        let interior: Vec<Pos> = level.interior().collect();
        for &p in &interior {
            let flip = rng.random::<f64>() < cfg.tile_flip_rate;
            match level.tile(p) {
                Tile::Wall if flip => {
                    level.place(p, Tile::Floor);
                }
                Tile::Floor if flip => {
                    level.place(p, Tile::Wall);
                }
                _ => {}
            }
        }
        for (marker, prob) in [(Tile::Goal, cfg.move_goal_prob), (Tile::Start, cfg.move_start_prob)] {
            if rng.random::<f64>() >= prob {
                continue;
            }
            let floors: Vec<Pos> = interior.iter().copied().filter(|&p| level.tile(p) == Tile::Floor).collect();
            if let Some(&target) = floors.choose(&mut rng) {
                let old = if marker == Tile::Goal { level.goal() } else { level.start() }.expect("complete level");
                level.place(old, Tile::Floor);
                level.place(target, marker);
            }
        }
        debug_assert!(level.is_complete());
        Ok(DirectGenome {
            level,
            lineage: Lineage {
                genome_id: child_id,
                parent_id: Some(self.lineage.genome_id),
                birth_loop,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::{carved_maze, open_room};
    use proptest::prelude::*;

    fn genome(level: Level) -> DirectGenome {
        DirectGenome::seed(level, GenomeId(0), 0).unwrap()
    }

    #[test]
    fn generate_is_identity() {
        let room = open_room(5, 5, Pos::new(1, 1), Pos::new(3, 3)).unwrap();
        let g = genome(room.clone());
        assert_eq!(g.generate(), room);
        assert_eq!(g.generate(), g.generate());
    }

    #[test]
    fn zero_mutation_clones_level() {
        let g = genome(carved_maze(9, 9, 1).unwrap());
        let child = g.mutate(&MutationConfig::none(), GenomeId(7), 1, Seed(3)).unwrap();
        assert_eq!(child.level(), g.level());
        assert_eq!(child.id(), GenomeId(7));
        assert_eq!(child.lineage.parent_id, Some(GenomeId(0)));
        assert_eq!(child.lineage.birth_loop, 1);
    }

    #[test]
    fn full_flip_rate_flips_every_cell() {
        let g = genome(carved_maze(6, 6, 4).unwrap());
        let cfg = MutationConfig {
            tile_flip_rate: 1.0,
            ..MutationConfig::none()
        };
        let child = g.mutate(&cfg, GenomeId(1), 1, Seed(0)).unwrap();
        for p in g.level().interior() {
            let (a, b) = (g.level().tile(p), child.level().tile(p));
            match a {
                Tile::Wall => assert_eq!(b, Tile::Floor),
                Tile::Floor => assert_eq!(b, Tile::Wall),
                marker => assert_eq!(b, marker),
            }
        }
    }

    #[test]
    fn a_forced_flip_changes_the_phenotype() {
        let g = genome(open_room(8, 8, Pos::new(1, 1), Pos::new(6, 6)).unwrap());
        let cfg = MutationConfig {
            tile_flip_rate: 0.05,
            ..MutationConfig::none()
        };
        // Enumerate seeds and count flips independently from the tile diff.
        let mut checked = 0;
        for s in 0..50u64 {
            let mut rng = Seed(s).rng();
            let flips = g
                .level()
                .interior()
                .filter(|&p| {
                    let hit = rng.random::<f64>() < 0.05;
                    hit && matches!(g.level().tile(p), Tile::Wall | Tile::Floor)
                })
                .count();
            let child = g.mutate(&cfg, GenomeId(1), 1, Seed(s)).unwrap();
            let diff = g
                .level()
                .tiles()
                .iter()
                .zip(child.level().tiles())
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(diff, flips);
            if flips > 0 {
                assert_ne!(child.generate(), g.generate());
                checked += 1;
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn flip_fraction_matches_rate() {
        let g = genome(carved_maze(10, 10, 2).unwrap());
        let cfg = MutationConfig {
            tile_flip_rate: 0.05,
            ..MutationConfig::none()
        };
        let flippable = g
            .level()
            .interior()
            .filter(|&p| matches!(g.level().tile(p), Tile::Wall | Tile::Floor))
            .count();
        let trials = 10_000;
        let mut flipped = 0;
        for s in 0..trials {
            let child = g.mutate(&cfg, GenomeId(1), 1, Seed(s)).unwrap();
            flipped += g
                .level()
                .tiles()
                .iter()
                .zip(child.level().tiles())
                .filter(|(a, b)| a != b)
                .count();
        }
        let fraction = flipped as f64 / (trials as usize * flippable) as f64;
        assert!((fraction - 0.05).abs() < 0.01, "{fraction}");
    }

    #[test]
    fn relocation_skipped_without_floor() {
        // Interior is start, goal and walls only.
        let level = Level::parse("####\n#SG#\n####\n####\n").unwrap();
        let g = genome(level.clone());
        let cfg = MutationConfig {
            tile_flip_rate: 0.0,
            move_goal_prob: 1.0,
            move_start_prob: 1.0,
        };
        let child = g.mutate(&cfg, GenomeId(1), 1, Seed(0)).unwrap();
        assert_eq!(child.level(), &level);
    }

    #[test]
    fn rejects_bad_config_and_lineage() {
        let g = genome(open_room(6, 6, Pos::new(1, 1), Pos::new(4, 4)).unwrap());
        let bad = MutationConfig {
            tile_flip_rate: 1.5,
            ..MutationConfig::none()
        };
        assert!(g.mutate(&bad, GenomeId(1), 1, Seed(0)).is_err());
        assert!(g.mutate(&MutationConfig::none(), GenomeId(1), 0, Seed(0)).is_err());
    }

    proptest! {
        #[test]
        fn children_stay_valid(
            maze_seed in 0u64..50,
            side in 6usize..16,
            flip in 0.0f64..1.0,
            mg in 0.0f64..1.0,
            ms in 0.0f64..1.0,
            s in any::<u64>(),
        ) {
            let g = genome(carved_maze(side, side, maze_seed).unwrap());
            let cfg = MutationConfig { tile_flip_rate: flip, move_goal_prob: mg, move_start_prob: ms };
            let child = g.mutate(&cfg, GenomeId(1), 1, Seed(s)).unwrap();
            let text = child.level().render();
            prop_assert_eq!(Level::parse(&text).unwrap(), child.level().clone());
            let again = g.mutate(&cfg, GenomeId(1), 1, Seed(s)).unwrap();
            prop_assert_eq!(again, child);
        }
    }
}
