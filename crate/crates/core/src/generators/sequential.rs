use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maze::{Level, Pos, Tile};
use crate::runtime::seed::Seed;
use crate::solvers::{sample_index, softmax, Arch, PolicyParams};

/// How the placement network's choices are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementMode {
    /// Start first, then goal, then walls; only the cell is chosen.
    Constrained,
    /// Every step picks no-op or any (object, cell) pair.
    Relaxed,
}

/// Object vocabulary of one placement, in logit order after the no-op.
const OBJECTS: [Tile; 3] = [Tile::Wall, Tile::Start, Tile::Goal];
const CANVAS_CHANNELS: [Tile; 4] = [Tile::Wall, Tile::Floor, Tile::Start, Tile::Goal];

/// A neural level builder placing objects one at a time on a blank canvas.
///
/// The network sees a one-hot encoding of every interior cell (wall, floor,
/// start, goal) and of the step index, and emits `1 + 3 * cells` logits: a
/// no-op followed by wall, start and goal placements for each interior
/// cell in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeqGenParams {
    pub net: PolicyParams,
    pub placement_budget: usize,
    pub canvas: (usize, usize),
    pub mode: PlacementMode,
}

/// Half the canvas area.
pub fn default_budget(width: usize, height: usize) -> usize {
    width * height / 2
}

impl SeqGenParams {
    pub fn arch_for(canvas: (usize, usize), budget: usize, hidden: &[usize]) -> Arch {
        let cells = interior_cells(canvas);
        Arch {
            input_dim: CANVAS_CHANNELS.len() * cells + budget,
            hidden: hidden.to_vec(),
            output_dim: 1 + OBJECTS.len() * cells,
        }
    }

    pub fn new(net: PolicyParams, canvas: (usize, usize), placement_budget: usize, mode: PlacementMode) -> Result<Self> {
        Level::canvas(canvas.0, canvas.1)?;
        let g = SeqGenParams {
            net,
            placement_budget,
            canvas,
            mode,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn random(canvas: (usize, usize), budget: usize, hidden: &[usize], mode: PlacementMode, seed: Seed) -> Result<Self> {
        let net = PolicyParams::random(Self::arch_for(canvas, budget, hidden), seed);
        Self::new(net, canvas, budget, mode)
    }

    /// An adversary that always declines to place anything.
    pub fn always_noop(canvas: (usize, usize), budget: usize, hidden: &[usize], mode: PlacementMode) -> Result<Self> {
        let arch = Self::arch_for(canvas, budget, hidden);
        let out_dim = arch.output_dim;
        let mut w = vec![0.0; arch.param_count()];
        // bias of the no-op logit is the first output bias
        let n = w.len();
        w[n - out_dim] = 1000.0;
        Self::new(PolicyParams::new(arch, w)?, canvas, budget, mode)
    }

    pub fn validate(&self) -> Result<()> {
        let expected = Self::arch_for(self.canvas, self.placement_budget, &self.net.arch.hidden);
        if self.net.arch != expected {
            return Err(Error::DimensionMismatch {
                expected: expected.param_count(),
                got: self.net.dim(),
            });
        }
        Ok(())
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Ok(SeqGenParams {
            net: self.net.with_weights(weights)?,
            ..self.clone()
        })
    }

    /// Runs the placement policy on a blank canvas.
    ///
    /// Placing onto an occupied start or goal cell, or placing a second
    /// start or goal, is a no-op. In constrained mode a start or goal that
    /// never got placed (budget below two) lands on the first or last free
    /// interior cell. Relaxed mode returns whatever was built, so the
    /// result may be incomplete; check [`Level::is_complete`].
    pub fn decode_level(&self, noise_seed: Seed) -> Level {
        let (w, h) = self.canvas;
        let mut level = Level::canvas(w, h).expect("canvas size validated");
        let cells: Vec<Pos> = level.interior().collect();
        let n = cells.len();
        let mut rng = noise_seed.rng();
        let mut input = vec![0.0; self.net.arch.input_dim];
        for step in 0..self.placement_budget {
            encode(&level, &cells, step, &mut input);
            let logits = self.net.logits(&input).expect("architecture validated");
            let choice = match self.mode {
                PlacementMode::Relaxed => {
                    let k = sample_index(&softmax(&logits), &mut rng);
                    (k > 0).then(|| (OBJECTS[(k - 1) / n], cells[(k - 1) % n]))
                }
                PlacementMode::Constrained => {
                    let (slot, object) = match step {
                        0 => (1, Tile::Start),
                        1 => (2, Tile::Goal),
                        _ => (0, Tile::Wall),
                    };
                    let mut slice = logits[1 + slot * n..1 + (slot + 1) * n].to_vec();
                    if object == Tile::Goal {
                        if let Some(s) = level.start() {
                            slice[cells.iter().position(|&c| c == s).expect("start is interior")] = f64::NEG_INFINITY;
                        }
                    }
                    Some((object, cells[sample_index(&softmax(&slice), &mut rng)]))
                }
            };
            if let Some((object, pos)) = choice {
                if !matches!(level.tile(pos), Tile::Start | Tile::Goal) {
                    level.place(pos, object);
                }
            }
        }
        if self.mode == PlacementMode::Constrained {
            if level.start().is_none() {
                let free = cells.iter().find(|&&p| level.tile(p) != Tile::Goal).copied();
                if let Some(p) = free {
                    level.place(p, Tile::Start);
                }
            }
            if level.goal().is_none() {
                let free = cells.iter().rev().find(|&&p| level.tile(p) != Tile::Start).copied();
                if let Some(p) = free {
                    level.place(p, Tile::Goal);
                }
            }
        }
        level
    }
}

fn interior_cells((w, h): (usize, usize)) -> usize {
    w.saturating_sub(2) * h.saturating_sub(2)
}

fn encode(level: &Level, cells: &[Pos], step: usize, input: &mut [f64]) {
    input.fill(0.0);
    for (i, &p) in cells.iter().enumerate() {
        let channel = CANVAS_CHANNELS
            .iter()
            .position(|&t| t == level.tile(p))
            .expect("every tile has a channel");
        input[i * CANVAS_CHANNELS.len() + channel] = 1.0;
    }
    input[CANVAS_CHANNELS.len() * cells.len() + step] = 1.0;
}
