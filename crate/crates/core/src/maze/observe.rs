use super::level::{Level, LevelError, Pos, Tile};

/// Side of the egocentric window.
pub const WINDOW: usize = 5;
/// Observation length: wall and goal channels over the window, then the
/// unit goal direction.
pub const OBS_DIM: usize = WINDOW * WINDOW * 2 + 2;

const HALF: isize = (WINDOW / 2) as isize;
const CELLS: usize = WINDOW * WINDOW;

/// Encodes what the agent sees from `agent`.
///
/// Layout: `[wall channel; 25][goal channel; 25][dx, dy]`, windows row-major
/// from the top-left. Cells outside the grid read as wall.
pub fn observe(level: &Level, agent: Pos) -> Result<Vec<f64>, LevelError> {
    let mut obs = vec![0.0; OBS_DIM];
    observe_into(level, agent, &mut obs)?;
    Ok(obs)
}

pub fn observe_into(level: &Level, agent: Pos, obs: &mut [f64]) -> Result<(), LevelError> {
    if !level.contains(agent) {
        return Err(LevelError::OutOfBounds {
            x: agent.x,
            y: agent.y,
        });
    }
    debug_assert_eq!(obs.len(), OBS_DIM);
    obs.fill(0.0);
    let (ax, ay) = (agent.x as isize, agent.y as isize);
    for wy in 0..WINDOW as isize {
        for wx in 0..WINDOW as isize {
            let cell = (wy as usize) * WINDOW + wx as usize;
            match level.tile_or_wall(ax + wx - HALF, ay + wy - HALF) {
                Tile::Wall => obs[cell] = 1.0,
                Tile::Goal => obs[CELLS + cell] = 1.0,
                _ => {}
            }
        }
    }
    if let Some(goal) = level.goal() {
        let dx = goal.x as f64 - agent.x as f64;
        let dy = goal.y as f64 - agent.y as f64;
        let norm = dx.hypot(dy);
        if norm > 0.0 {
            obs[2 * CELLS] = dx / norm;
            obs[2 * CELLS + 1] = dy / norm;
        }
    }
    Ok(())
}
