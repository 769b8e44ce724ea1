use std::collections::VecDeque;

use super::level::{Level, Pos};

/// Breadth-first distances from `from` over non-wall tiles; `None` marks
/// unreachable cells.
pub fn distances(level: &Level, from: Pos) -> Vec<Option<usize>> {
    let w = level.width();
    let mut dist = vec![None; w * level.height()];
    if !level.contains(from) || level.tile(from).is_wall() {
        return dist;
    }
    let mut queue = VecDeque::new();
    dist[from.y * w + from.x] = Some(0);
    queue.push_back(from);
    while let Some(p) = queue.pop_front() {
        let d = dist[p.y * w + p.x].expect("queued cells have a distance");
        for n in neighbours(p).filter(|&n| level.contains(n)) {
            let idx = n.y * w + n.x;
            if dist[idx].is_none() && !level.tile(n).is_wall() {
                dist[idx] = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Shortest start-to-goal path length in moves.
pub fn shortest_path(level: &Level) -> Option<usize> {
    let (start, goal) = (level.start()?, level.goal()?);
    distances(level, start)[goal.y * level.width() + goal.x]
}

/// Whether a 4-connected path of non-wall tiles links start and goal.
///
/// Incomplete levels are never solvable.
pub fn solvable(level: &Level) -> bool {
    shortest_path(level).is_some()
}

fn neighbours(p: Pos) -> impl Iterator<Item = Pos> {
    [
        (p.x, p.y.wrapping_sub(1)),
        (p.x, p.y + 1),
        (p.x.wrapping_sub(1), p.y),
        (p.x + 1, p.y),
    ]
    .into_iter()
    .filter(|&(x, y)| x != usize::MAX && y != usize::MAX)
    .map(|(x, y)| Pos::new(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_room_is_solvable() {
        let level = Level::parse("#####\n#S..#\n#...#\n#..G#\n#####\n").unwrap();
        assert!(solvable(&level));
        assert_eq!(shortest_path(&level), Some(4));
    }

    #[test]
    fn enclosed_goal_is_not() {
        let level = Level::parse("#######\n#S....#\n#..#..#\n#.#G#.#\n#..#..#\n#######\n").unwrap();
        assert!(!solvable(&level));
    }

    #[test]
    fn blank_canvas_is_not() {
        assert!(!solvable(&Level::canvas(6, 6).unwrap()));
    }
}
