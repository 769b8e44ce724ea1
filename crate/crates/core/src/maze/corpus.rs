//! Seed levels: open rooms and randomly carved mazes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::level::{Level, LevelError, Pos, Tile};
use super::search::distances;

/// Walled room with a floor interior and the given start and goal.
pub fn open_room(width: usize, height: usize, start: Pos, goal: Pos) -> Result<Level, LevelError> {
    let mut level = Level::canvas(width, height)?;
    for p in [start, goal] {
        if !level.contains(p) || level.is_border(p) {
            return Err(LevelError::OutOfBounds { x: p.x, y: p.y });
        }
    }
    level.place(start, Tile::Start);
    if !level.place(goal, Tile::Goal) || start == goal {
        return Err(LevelError::MissingGoal);
    }
    Ok(level)
}

/// Perfect maze carved by a randomized depth-first backtracker.
///
/// Cells live on odd coordinates; on even-sized grids the last interior
/// row/column stays solid. The start sits in the top-left cell and the goal
/// on the floor cell farthest from it.
pub fn carved_maze(width: usize, height: usize, seed: u64) -> Result<Level, LevelError> {
    Level::canvas(width, height)?;
    let mut tiles = vec![Tile::Wall; width * height];
    let cols = (width - 1) / 2;
    let rows = (height - 1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut visited = vec![false; cols * rows];
    let mut stack = vec![(0usize, 0usize)];
    visited[0] = true;
    let open = |tiles: &mut Vec<Tile>, x: usize, y: usize| tiles[y * width + x] = Tile::Floor;
    open(&mut tiles, 1, 1);
    while let Some(&(cx, cy)) = stack.last() {
        let mut dirs: Vec<(isize, isize)> = vec![(0, -1), (0, 1), (-1, 0), (1, 0)];
        dirs.shuffle(&mut rng);
        let next = dirs.into_iter().find_map(|(dx, dy)| {
            let nx = cx as isize + dx;
            let ny = cy as isize + dy;
            (nx >= 0 && ny >= 0 && (nx as usize) < cols && (ny as usize) < rows)
                .then_some((nx as usize, ny as usize))
                .filter(|&(nx, ny)| !visited[ny * cols + nx])
        });
        match next {
            Some((nx, ny)) => {
                visited[ny * cols + nx] = true;
                open(&mut tiles, cx + nx + 1, cy + ny + 1);
                open(&mut tiles, 2 * nx + 1, 2 * ny + 1);
                stack.push((nx, ny));
            }
            None => {
                stack.pop();
            }
        }
    }
    let mut level = Level::from_canvas_tiles(width, height, tiles)?;
    let start = Pos::new(1, 1);
    level.place(start, Tile::Start);
    let dist = distances(&level, start);
    let goal = level
        .interior()
        .filter_map(|p| dist[p.y * width + p.x].map(|d| (d, p)))
        .max_by_key(|&(d, p)| (d, std::cmp::Reverse(p)))
        .map(|(_, p)| p)
        .expect("maze has floor cells");
    level.place(goal, Tile::Goal);
    Ok(level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::search::{shortest_path, solvable};

    #[test]
    fn mazes_are_solvable_and_deterministic() {
        for side in 8..=15 {
            for seed in 0..4 {
                let m = carved_maze(side, side, seed).unwrap();
                assert!(m.is_complete());
                assert!(solvable(&m));
                assert!(shortest_path(&m).unwrap() >= side - 2);
                assert_eq!(m, carved_maze(side, side, seed).unwrap());
            }
        }
        assert_ne!(carved_maze(15, 15, 0).unwrap(), carved_maze(15, 15, 1).unwrap());
    }

    #[test]
    fn open_room_places_markers() {
        let r = open_room(8, 8, Pos::new(1, 1), Pos::new(4, 1)).unwrap();
        assert_eq!(shortest_path(&r), Some(3));
        assert!(open_room(8, 8, Pos::new(0, 1), Pos::new(4, 1)).is_err());
        assert!(open_room(8, 8, Pos::new(2, 2), Pos::new(2, 2)).is_err());
    }
}
