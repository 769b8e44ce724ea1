//! Minimal criteria: predicates deciding whether a candidate level may join
//! the population.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maze::{solvable, Level};
use crate::runtime::seed::Seed;
use crate::solvers::{evaluate, PolicyParams};

/// Closed interval of acceptable parent returns on a child level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McRange {
    pub mc_min: f64,
    pub mc_max: f64,
}

impl McRange {
    pub fn new(mc_min: f64, mc_max: f64) -> Result<Self> {
        if mc_min.is_nan() || mc_max.is_nan() || mc_min > mc_max {
            return Err(Error::Config(format!("mc_min {mc_min} exceeds mc_max {mc_max}")));
        }
        Ok(McRange { mc_min, mc_max })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Accepted,
    TooEasy,
    TooHard,
    Unsolvable,
    BelowRegret,
}

impl Reason {
    pub const ALL: [Reason; 5] = [
        Reason::Accepted,
        Reason::TooEasy,
        Reason::TooHard,
        Reason::Unsolvable,
        Reason::BelowRegret,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Reason::Accepted => "accepted",
            Reason::TooEasy => "too_easy",
            Reason::TooHard => "too_hard",
            Reason::Unsolvable => "unsolvable",
            Reason::BelowRegret => "below_regret",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationOutcome {
    pub accepted: bool,
    pub reason: Reason,
    pub score: f64,
}

impl ValidationOutcome {
    fn new(reason: Reason, score: f64) -> Self {
        ValidationOutcome {
            accepted: reason == Reason::Accepted,
            reason,
            score,
        }
    }
}

/// Range test on an already measured score.
pub fn mc_range_check(score: f64, range: McRange) -> ValidationOutcome {
    let reason = if score < range.mc_min {
        Reason::TooHard
    } else if score > range.mc_max {
        Reason::TooEasy
    } else {
        Reason::Accepted
    };
    ValidationOutcome::new(reason, score)
}

/// Scores the parent agent on the child level and applies the range.
pub fn mc_range_validate(
    parent_agent: &PolicyParams,
    child_level: &Level,
    range: McRange,
    episodes: usize,
    horizon: usize,
    seed: Seed,
) -> Result<ValidationOutcome> {
    let score = evaluate(parent_agent, child_level, episodes, horizon, seed)?;
    Ok(mc_range_check(score, range))
}

pub fn solvability_validate(child_level: &Level) -> ValidationOutcome {
    if solvable(child_level) {
        ValidationOutcome::new(Reason::Accepted, 1.0)
    } else {
        ValidationOutcome::new(Reason::Unsolvable, 0.0)
    }
}

/// Antagonist return minus protagonist return.
pub fn regret(score_antagonist: f64, score_protagonist: f64) -> f64 {
    score_antagonist - score_protagonist
}

pub fn regret_validate(score_antagonist: f64, score_protagonist: f64, threshold: f64) -> ValidationOutcome {
    let r = regret(score_antagonist, score_protagonist);
    let reason = if r >= threshold {
        Reason::Accepted
    } else {
        Reason::BelowRegret
    };
    ValidationOutcome::new(reason, r)
}

fn default_episodes() -> usize {
    3
}

/// Which criterion the evolution step applies to children.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ValidatorKind {
    McRange {
        mc_min: f64,
        mc_max: f64,
        #[serde(default = "default_episodes")]
        episodes: usize,
    },
    Solvability {},
    /// Regret of the child's parent against the best other archive agent.
    Regret {
        #[serde(default)]
        threshold: f64,
        #[serde(default = "default_episodes")]
        episodes: usize,
    },
}

impl ValidatorKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ValidatorKind::McRange { mc_min, mc_max, episodes } => {
                McRange::new(mc_min, mc_max)?;
                if episodes == 0 {
                    return Err(Error::Config("validator episodes must be positive".into()));
                }
            }
            ValidatorKind::Regret { threshold, episodes } => {
                if !(-1.0..=1.0).contains(&threshold) {
                    return Err(Error::Config(format!("regret threshold {threshold} outside [-1, 1]")));
                }
                if episodes == 0 {
                    return Err(Error::Config("validator episodes must be positive".into()));
                }
            }
            ValidatorKind::Solvability {} => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::{carved_maze, open_room, Pos};
    use crate::solvers::Arch;
    use proptest::prelude::*;

    #[test]
    fn untrained_agent_finds_big_maze_too_hard() {
        let maze = carved_maze(15, 15, 0).unwrap();
        let agent = PolicyParams::random(Arch::agent(), Seed(1));
        let out = mc_range_validate(&agent, &maze, McRange::new(0.1, 0.9).unwrap(), 3, 500, Seed(2)).unwrap();
        assert_eq!(out.reason, Reason::TooHard);
        assert!(!out.accepted);
    }

    #[test]
    fn full_range_accepts_everything() {
        let agent = PolicyParams::random(Arch::agent(), Seed(1));
        let full = McRange::new(0.0, 1.0).unwrap();
        for level in [carved_maze(9, 9, 1).unwrap(), open_room(6, 6, Pos::new(1, 1), Pos::new(2, 1)).unwrap()] {
            assert!(mc_range_validate(&agent, &level, full, 2, 500, Seed(0)).unwrap().accepted);
        }
    }

    #[test]
    fn interval_is_closed() {
        let r = McRange::new(0.1, 0.9).unwrap();
        assert!(mc_range_check(0.1, r).accepted);
        assert!(mc_range_check(0.9, r).accepted);
        assert_eq!(mc_range_check(0.0999, r).reason, Reason::TooHard);
        assert_eq!(mc_range_check(0.9001, r).reason, Reason::TooEasy);
        assert!(McRange::new(0.5, 0.4).is_err());
    }

    #[test]
    fn solvability() {
        let open = open_room(5, 5, Pos::new(1, 1), Pos::new(3, 3)).unwrap();
        let out = solvability_validate(&open);
        assert!(out.accepted);
        assert_eq!(out.score, 1.0);
        let shut = Level::parse("#######\n#S....#\n#..#..#\n#.#G#.#\n#..#..#\n#######\n").unwrap();
        let out = solvability_validate(&shut);
        assert_eq!(out.reason, Reason::Unsolvable);
        assert_eq!(out.score, 0.0);
    }

    #[test]
    fn regret_values() {
        assert!((regret(0.9, 0.4) - 0.5).abs() < 1e-15);
        assert_eq!(regret(0.0, 0.0), 0.0);
        assert!(regret_validate(0.9, 0.4, 0.1).accepted);
        assert_eq!(regret_validate(0.0, 0.0, 0.1).reason, Reason::BelowRegret);
        assert!(regret_validate(0.0, 1.0, -1.0).accepted);
    }

    #[test]
    fn kind_parses_from_toml() {
        let k: ValidatorKind = toml::from_str("kind = \"mc_range\"\nmc_min = 0.1\nmc_max = 0.9\n").unwrap();
        assert_eq!(k, ValidatorKind::McRange { mc_min: 0.1, mc_max: 0.9, episodes: 3 });
        let k: ValidatorKind = toml::from_str("kind = \"regret\"\n").unwrap();
        assert_eq!(k, ValidatorKind::Regret { threshold: 0.0, episodes: 3 });
        assert!(toml::from_str::<ValidatorKind>("kind = \"solvability\"\nextra = 1\n").is_err());
        assert!(toml::from_str::<ValidatorKind>("kind = \"mc_range\"\nmc_min = 0.1\nmc_max = 0.9\nmc_mid = 1\n").is_err());
    }

    proptest! {
        #[test]
        fn regret_is_antisymmetric(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            prop_assert_eq!(regret(a, b), -regret(b, a));
            prop_assert_eq!(regret(a, a), 0.0);
            let r = regret(a, b);
            prop_assert!((-1.0..=1.0).contains(&r));
        }

        #[test]
        fn widening_never_rejects(score in 0.0f64..=1.0, lo in 0.0f64..=1.0, hi in 0.0f64..=1.0, widen in 0.0f64..0.5) {
            let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
            let narrow = mc_range_check(score, McRange::new(lo, hi).unwrap());
            let wide = mc_range_check(score, McRange::new(lo - widen, hi + widen).unwrap());
            prop_assert!(!narrow.accepted || wide.accepted);
        }
    }
}
