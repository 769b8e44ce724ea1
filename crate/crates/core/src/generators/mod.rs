//! Environment generators.
//!
//! Two encodings sit behind [`Generator`]: [`DirectGenome`], a tile map that
//! is mutated in place, and [`SeqGenParams`], a network that builds a level
//! by sequential object placement.

mod direct;
mod record;
mod sequential;

pub use direct::{DirectGenome, GenomeId, Lineage, MutationConfig};
pub use record::{genome_from_record, GenomeRecord};
pub use sequential::{default_budget, PlacementMode, SeqGenParams};

use crate::maze::Level;
use crate::runtime::seed::Seed;

pub trait Generator {
    /// Produces a level. Direct encodings ignore `seed`.
    fn generate(&self, seed: Seed) -> Level;
}

impl Generator for DirectGenome {
    fn generate(&self, _seed: Seed) -> Level {
        DirectGenome::generate(self)
    }
}

impl Generator for SeqGenParams {
    fn generate(&self, seed: Seed) -> Level {
        self.decode_level(seed)
    }
}
