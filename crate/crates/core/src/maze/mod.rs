//! Single-agent gridworld maze.
//!
//! The agent moves in four absolute directions, bumping into walls wastes a
//! step, and the only reward is `1 - M/T` for reaching the goal on step `M`
//! of a `T`-step horizon. Transitions are deterministic; an episode seed only
//! feeds the controller's sampling.

mod corpus;
mod episode;
mod level;
mod observe;
mod search;

pub use corpus::{carved_maze, open_room};
pub use episode::{goal_reward, run_episode, Action, Controller, EpisodeResult, DEFAULT_HORIZON};
pub use level::{Level, LevelError, Pos, Tile, MAX_SIDE, MIN_SIDE};
pub use observe::{observe, observe_into, OBS_DIM, WINDOW};
pub use search::{distances, shortest_path, solvable};

/// Strict ASCII parse, see [`Level::parse`].
pub fn parse_level(text: &str) -> Result<Level, LevelError> {
    Level::parse(text)
}

pub fn render_level(level: &Level) -> String {
    level.render()
}
