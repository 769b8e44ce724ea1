use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const MIN_SIDE: usize = 4;
pub const MAX_SIDE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tile {
    Wall,
    Floor,
    Start,
    Goal,
}

impl Tile {
    pub fn symbol(self) -> char {
        match self {
            Tile::Wall => '#',
            Tile::Floor => '.',
            Tile::Start => 'S',
            Tile::Goal => 'G',
        }
    }

    pub fn from_symbol(ch: char) -> Option<Self> {
        match ch {
            '#' => Some(Tile::Wall),
            '.' => Some(Tile::Floor),
            'S' => Some(Tile::Start),
            'G' => Some(Tile::Goal),
            _ => None,
        }
    }

    pub fn is_wall(self) -> bool {
        self == Tile::Wall
    }
}

/// Grid coordinate, `x` grows rightwards and `y` downwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: usize,
    pub y: usize,
}

impl Pos {
    pub const fn new(x: usize, y: usize) -> Self {
        Pos { x, y }
    }

    pub fn manhattan(self, other: Pos) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LevelError {
    #[error("level text is empty")]
    Empty,
    #[error("row {row} has {got} tiles, expected {expected}")]
    NonRectangular { row: usize, expected: usize, got: usize },
    #[error("unknown tile {ch:?} at row {row}, column {col}")]
    UnknownTile { ch: char, row: usize, col: usize },
    #[error("level size {width}x{height} outside {MIN_SIDE}..={MAX_SIDE}")]
    Size { width: usize, height: usize },
    #[error("border cell ({x}, {y}) is not a wall")]
    OpenBorder { x: usize, y: usize },
    #[error("level has no start")]
    MissingStart,
    #[error("level has no goal")]
    MissingGoal,
    #[error("level has more than one start")]
    DuplicateStart,
    #[error("level has more than one goal")]
    DuplicateGoal,
    #[error("position ({x}, {y}) is outside the level")]
    OutOfBounds { x: usize, y: usize },
}

/// Rectangular tile grid describing one maze task.
///
/// A `Level` always has a walled border and at most one start and one goal.
/// Levels built by [`Level::parse`] or [`Level::from_tiles`] are *complete*
/// (exactly one of each); the sequential generator may also emit incomplete
/// canvases, which [`Level::is_complete`] reports.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Level {
    width: usize,
    height: usize,
    tiles: Vec<Tile>,
    start: Option<Pos>,
    goal: Option<Pos>,
}

impl Level {
    /// Strict parse: the result satisfies every level invariant.
    pub fn parse(text: &str) -> Result<Self, LevelError> {
        let level = Self::parse_canvas(text)?;
        level.check_complete()?;
        Ok(level)
    }

    /// Like [`Level::parse`] but tolerates a missing start or goal.
    pub fn parse_canvas(text: &str) -> Result<Self, LevelError> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        if body.is_empty() {
            return Err(LevelError::Empty);
        }
        let mut width = None;
        let mut tiles = Vec::new();
        let mut height = 0;
        for (row, line) in body.split('\n').enumerate() {
            let mut count = 0;
            for (col, ch) in line.chars().enumerate() {
                let tile = Tile::from_symbol(ch).ok_or(LevelError::UnknownTile { ch, row, col })?;
                tiles.push(tile);
                count += 1;
            }
            match width {
                None => width = Some(count),
                Some(expected) if expected != count => {
                    return Err(LevelError::NonRectangular {
                        row,
                        expected,
                        got: count,
                    })
                }
                _ => {}
            }
            height += 1;
        }
        Self::build(width.unwrap_or(0), height, tiles)
    }

    /// Builds a complete level from row-major tiles.
    pub fn from_tiles(width: usize, height: usize, tiles: Vec<Tile>) -> Result<Self, LevelError> {
        let level = Self::from_canvas_tiles(width, height, tiles)?;
        level.check_complete()?;
        Ok(level)
    }

    /// Structural checks only; start and goal may be missing.
    pub(crate) fn from_canvas_tiles(
        width: usize,
        height: usize,
        tiles: Vec<Tile>,
    ) -> Result<Self, LevelError> {
        if tiles.len() != width * height {
            return Err(LevelError::Size { width, height });
        }
        Self::build(width, height, tiles)
    }

    /// A blank canvas: walled border, floor interior, no start or goal.
    pub fn canvas(width: usize, height: usize) -> Result<Self, LevelError> {
        check_size(width, height)?;
        let tiles = (0..width * height)
            .map(|i| {
                let (x, y) = (i % width, i / width);
                if is_border(x, y, width, height) {
                    Tile::Wall
                } else {
                    Tile::Floor
                }
            })
            .collect();
        Ok(Level {
            width,
            height,
            tiles,
            start: None,
            goal: None,
        })
    }

    fn build(width: usize, height: usize, tiles: Vec<Tile>) -> Result<Self, LevelError> {
        check_size(width, height)?;
        debug_assert_eq!(tiles.len(), width * height);
        let mut start = None;
        let mut goal = None;
        for (i, &tile) in tiles.iter().enumerate() {
            let (x, y) = (i % width, i / width);
            if is_border(x, y, width, height) && !tile.is_wall() {
                return Err(LevelError::OpenBorder { x, y });
            }
            match tile {
                Tile::Start if start.is_some() => return Err(LevelError::DuplicateStart),
                Tile::Start => start = Some(Pos::new(x, y)),
                Tile::Goal if goal.is_some() => return Err(LevelError::DuplicateGoal),
                Tile::Goal => goal = Some(Pos::new(x, y)),
                _ => {}
            }
        }
        Ok(Level {
            width,
            height,
            tiles,
            start,
            goal,
        })
    }

    fn check_complete(&self) -> Result<(), LevelError> {
        if self.start.is_none() {
            return Err(LevelError::MissingStart);
        }
        if self.goal.is_none() {
            return Err(LevelError::MissingGoal);
        }
        Ok(())
    }

    /// Exactly one start and one goal are present.
    pub fn is_complete(&self) -> bool {
        self.start.is_some() && self.goal.is_some()
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in self.tiles.chunks(self.width) {
            out.extend(row.iter().map(|t| t.symbol()));
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn start(&self) -> Option<Pos> {
        self.start
    }

    pub fn goal(&self) -> Option<Pos> {
        self.goal
    }

    pub fn contains(&self, pos: Pos) -> bool {
        pos.x < self.width && pos.y < self.height
    }

    pub fn tile(&self, pos: Pos) -> Tile {
        self.tiles[pos.y * self.width + pos.x]
    }

    /// Tile lookup where everything outside the grid reads as wall.
    pub fn tile_or_wall(&self, x: isize, y: isize) -> Tile {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            Tile::Wall
        } else {
            self.tiles[y as usize * self.width + x as usize]
        }
    }

    pub fn is_border(&self, pos: Pos) -> bool {
        is_border(pos.x, pos.y, self.width, self.height)
    }

    /// Interior positions in row-major order.
    pub fn interior(&self) -> impl Iterator<Item = Pos> + '_ {
        (1..self.height - 1).flat_map(move |y| (1..self.width - 1).map(move |x| Pos::new(x, y)))
    }

    /// Writes one tile, keeping the start/goal bookkeeping consistent.
    ///
    /// Border cells stay walls and a second start or goal is refused; both
    /// cases return `false` and leave the level untouched.
    pub(crate) fn place(&mut self, pos: Pos, tile: Tile) -> bool {
        if !self.contains(pos) || self.is_border(pos) {
            return false;
        }
        match tile {
            Tile::Start if self.start.is_some_and(|s| s != pos) => return false,
            Tile::Goal if self.goal.is_some_and(|g| g != pos) => return false,
            _ => {}
        }
        let idx = pos.y * self.width + pos.x;
        match self.tiles[idx] {
            Tile::Start => self.start = None,
            Tile::Goal => self.goal = None,
            _ => {}
        }
        self.tiles[idx] = tile;
        match tile {
            Tile::Start => self.start = Some(pos),
            Tile::Goal => self.goal = Some(pos),
            _ => {}
        }
        true
    }
}

fn check_size(width: usize, height: usize) -> Result<(), LevelError> {
    let ok = |n: usize| (MIN_SIDE..=MAX_SIDE).contains(&n);
    if ok(width) && ok(height) {
        Ok(())
    } else {
        Err(LevelError::Size { width, height })
    }
}

fn is_border(x: usize, y: usize, width: usize, height: usize) -> bool {
    x == 0 || y == 0 || x + 1 == width || y + 1 == height
}

impl fmt::Debug for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Level {}x{}", self.width, self.height)?;
        f.write_str(&self.render())
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Level::parse_canvas(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ROOM: &str = "#####\n#S..#\n#...#\n#..G#\n#####\n";

    #[test]
    fn parses_open_room() {
        let level = Level::parse(ROOM).unwrap();
        assert_eq!((level.width(), level.height()), (5, 5));
        assert_eq!(level.start(), Some(Pos::new(1, 1)));
        assert_eq!(level.goal(), Some(Pos::new(3, 3)));
        let special = level
            .interior()
            .filter(|&p| level.tile(p) != Tile::Floor)
            .count();
        assert_eq!(special, 2);
    }

    #[test]
    fn parse_errors() {
        let two_goals = "#####\n#S.G#\n#...#\n#..G#\n#####\n";
        assert_eq!(Level::parse(two_goals), Err(LevelError::DuplicateGoal));
        let two_starts = "#####\n#S.S#\n#...#\n#..G#\n#####\n";
        assert_eq!(Level::parse(two_starts), Err(LevelError::DuplicateStart));
        let no_goal = "#####\n#S..#\n#...#\n#...#\n#####\n";
        assert_eq!(Level::parse(no_goal), Err(LevelError::MissingGoal));
        let no_start = "#####\n#...#\n#...#\n#..G#\n#####\n";
        assert_eq!(Level::parse(no_start), Err(LevelError::MissingStart));
        let ragged = "#####\n#S..#\n#...\n#..G#\n#####\n";
        assert!(matches!(
            Level::parse(ragged),
            Err(LevelError::NonRectangular { row: 2, .. })
        ));
        let odd = "#####\n#S.x#\n#...#\n#..G#\n#####\n";
        assert!(matches!(
            Level::parse(odd),
            Err(LevelError::UnknownTile { ch: 'x', .. })
        ));
        let open = "##.##\n#S..#\n#...#\n#..G#\n#####\n";
        assert_eq!(Level::parse(open), Err(LevelError::OpenBorder { x: 2, y: 0 }));
        assert_eq!(Level::parse(""), Err(LevelError::Empty));
        assert!(matches!(
            Level::parse("###\n#SG\n###\n"),
            Err(LevelError::Size { .. })
        ));
        assert!(matches!(
            Level::parse("#####\r\n#S.G#\r\n#####\r\n"),
            Err(LevelError::UnknownTile { ch: '\r', .. })
        ));
    }

    #[test]
    fn accepts_text_without_final_newline() {
        let level = Level::parse(ROOM.trim_end()).unwrap();
        assert_eq!(level.render(), ROOM);
    }

    #[test]
    fn canvas_is_blank_and_incomplete() {
        let c = Level::canvas(6, 4).unwrap();
        assert!(!c.is_complete());
        assert_eq!(Level::parse_canvas(&c.render()).unwrap(), c);
        assert_eq!(Level::parse(&c.render()), Err(LevelError::MissingStart));
    }

    #[test]
    fn place_keeps_bookkeeping() {
        let mut c = Level::canvas(6, 6).unwrap();
        assert!(c.place(Pos::new(1, 1), Tile::Start));
        assert!(!c.place(Pos::new(2, 2), Tile::Start));
        assert!(!c.place(Pos::new(0, 2), Tile::Floor));
        assert!(c.place(Pos::new(4, 4), Tile::Goal));
        assert!(c.is_complete());
        assert!(c.place(Pos::new(4, 4), Tile::Wall));
        assert_eq!(c.goal(), None);
    }

    fn level_text() -> impl Strategy<Value = String> {
        (MIN_SIDE..12usize, MIN_SIDE..12usize)
            .prop_flat_map(|(w, h)| {
                let n = (w - 2) * (h - 2);
                (
                    Just((w, h)),
                    prop::collection::vec(prop::bool::weighted(0.3), n),
                    0..n,
                    0..n - 1,
                )
            })
            .prop_map(|((w, h), walls, s, g)| {
                let n = (w - 2) * (h - 2);
                let g = if g >= s { g + 1 } else { g };
                let mut out = String::new();
                for y in 0..h {
                    for x in 0..w {
                        let ch = if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                            '#'
                        } else {
                            let i = (y - 1) * (w - 2) + (x - 1);
                            debug_assert!(i < n);
                            if i == s {
                                'S'
                            } else if i == g {
                                'G'
                            } else if walls[i] {
                                '#'
                            } else {
                                '.'
                            }
                        };
                        out.push(ch);
                    }
                    out.push('\n');
                }
                out
            })
    }

    proptest! {
        #[test]
        fn render_parse_roundtrip(text in level_text()) {
            let level = Level::parse(&text).unwrap();
            prop_assert_eq!(level.render(), text);
        }
    }
}
