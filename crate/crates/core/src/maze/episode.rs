use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::level::{Level, Pos};
use super::observe::{observe_into, OBS_DIM};
use crate::error::{Error, Result};

pub const DEFAULT_HORIZON: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Up,
    Down,
    Left,
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Up, Action::Down, Action::Left, Action::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Target cell, or `None` when the move would leave the grid.
    pub fn apply(self, p: Pos) -> Option<Pos> {
        Some(match self {
            Action::Up => Pos::new(p.x, p.y.checked_sub(1)?),
            Action::Down => Pos::new(p.x, p.y + 1),
            Action::Left => Pos::new(p.x.checked_sub(1)?, p.y),
            Action::Right => Pos::new(p.x + 1, p.y),
        })
    }
}

/// Anything that picks an action from an observation.
///
/// All randomness must come from `rng` so that episodes replay exactly.
pub trait Controller {
    fn input_dim(&self) -> usize;
    fn act(&self, obs: &[f64], rng: &mut ChaCha8Rng) -> Result<Action>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub steps_taken: usize,
    pub solved: bool,
    /// FNV-1a digest of the action sequence.
    pub trajectory_hash: u64,
}

impl EpisodeResult {
    fn unsolved(horizon: usize, trajectory_hash: u64) -> Self {
        EpisodeResult {
            episode_return: 0.0,
            steps_taken: horizon,
            solved: false,
            trajectory_hash,
        }
    }
}

/// Sparse time-decayed reward: `1 - steps/horizon` on reaching the goal.
pub fn goal_reward(steps: usize, horizon: usize) -> f64 {
    1.0 - steps as f64 / horizon as f64
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Simulates one episode of at most `horizon` steps.
///
/// The agent starts on the start tile; bumping into a wall wastes the step.
/// The seed only drives the controller's action sampling. Incomplete levels
/// have nothing to reach and end immediately with zero return.
pub fn run_episode<C: Controller + ?Sized>(
    level: &Level,
    controller: &C,
    horizon: usize,
    seed: u64,
) -> Result<EpisodeResult> {
    if controller.input_dim() != OBS_DIM {
        return Err(Error::DimensionMismatch {
            expected: OBS_DIM,
            got: controller.input_dim(),
        });
    }
    if horizon == 0 {
        return Err(Error::Config("episode horizon must be positive".into()));
    }
    let (Some(mut agent), Some(goal)) = (level.start(), level.goal()) else {
        return Ok(EpisodeResult::unsolved(horizon, FNV_OFFSET));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obs = vec![0.0; OBS_DIM];
    let mut hash = FNV_OFFSET;
    for step in 1..=horizon {
        observe_into(level, agent, &mut obs)?;
        let action = controller.act(&obs, &mut rng)?;
        hash = (hash ^ action.index() as u64).wrapping_mul(FNV_PRIME);
        if let Some(next) = action.apply(agent) {
            if level.contains(next) && !level.tile(next).is_wall() {
                agent = next;
            }
        }
        // Arriving on the final step earns 1 - T/T = 0, which counts as a miss.
        if agent == goal && step < horizon {
            return Ok(EpisodeResult {
                episode_return: goal_reward(step, horizon),
                steps_taken: step,
                solved: true,
                trajectory_hash: hash,
            });
        }
    }
    Ok(EpisodeResult::unsolved(horizon, hash))
}
