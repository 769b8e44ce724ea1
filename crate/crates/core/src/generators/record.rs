//! Line-oriented text records for genomes.
//!
//! ```text
//! genome direct            genome sequential
//! id 4                     canvas 8 8
//! parent 1                 budget 32
//! birth_loop 3             mode relaxed
//! level                    arch 176 32 109
//! #####                    params <base-16 little-endian f64s>
//! ...
//! ```

use super::direct::{DirectGenome, GenomeId, Lineage};
use super::sequential::{PlacementMode, SeqGenParams};
use crate::codec::{decode_f64s, encode_f64s};
use crate::error::{Error, Result};
use crate::maze::Level;
use crate::solvers::{Arch, PolicyParams};

#[derive(Debug, Clone, PartialEq)]
pub enum GenomeRecord {
    Direct(DirectGenome),
    Sequential(SeqGenParams),
}

impl DirectGenome {
    pub fn to_record(&self) -> String {
        let parent = self
            .lineage
            .parent_id
            .map_or_else(|| "-".to_string(), |p| p.0.to_string());
        format!(
            "genome direct\nid {}\nparent {}\nbirth_loop {}\nlevel\n{}",
            self.lineage.genome_id.0,
            parent,
            self.lineage.birth_loop,
            self.level().render()
        )
    }
}

impl SeqGenParams {
    pub fn to_record(&self) -> String {
        let mode = match self.mode {
            PlacementMode::Constrained => "constrained",
            PlacementMode::Relaxed => "relaxed",
        };
        let arch = &self.net.arch;
        let dims: Vec<String> = std::iter::once(arch.input_dim)
            .chain(arch.hidden.iter().copied())
            .chain(std::iter::once(arch.output_dim))
            .map(|d| d.to_string())
            .collect();
        format!(
            "genome sequential\ncanvas {} {}\nbudget {}\nmode {}\narch {}\nparams {}\n",
            self.canvas.0,
            self.canvas.1,
            self.placement_budget,
            mode,
            dims.join(" "),
            encode_f64s(self.net.weights())
        )
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn field<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| bad(format!("missing `{key}`")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| bad(format!("expected `{key} ...`, got `{line}`")))
}

fn number<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| bad(format!("bad {what} `{s}`")))
}

pub fn genome_from_record(text: &str) -> Result<GenomeRecord> {
    let mut lines = text.split('\n');
    match lines.next() {
        Some("genome direct") => {
            let id = number(field(lines.next(), "id")?, "id")?;
            let parent = match field(lines.next(), "parent")? {
                "-" => None,
                p => Some(GenomeId(number(p, "parent")?)),
            };
            let birth_loop = number(field(lines.next(), "birth_loop")?, "birth_loop")?;
            if lines.next() != Some("level") {
                return Err(bad("missing `level` section"));
            }
            let rest: Vec<&str> = lines.collect();
            let level = Level::parse(&rest.join("\n"))?;
            let mut genome = DirectGenome::seed(level, GenomeId(id), birth_loop)?;
            genome.lineage = Lineage {
                genome_id: GenomeId(id),
                parent_id: parent,
                birth_loop,
            };
            Ok(GenomeRecord::Direct(genome))
        }
        Some("genome sequential") => {
            let canvas: Vec<usize> = field(lines.next(), "canvas")?
                .split(' ')
                .map(|d| number(d, "canvas"))
                .collect::<Result<_>>()?;
            let [w, h] = canvas[..] else {
                return Err(bad("canvas needs width and height"));
            };
            let budget = number(field(lines.next(), "budget")?, "budget")?;
            let mode = match field(lines.next(), "mode")? {
                "constrained" => PlacementMode::Constrained,
                "relaxed" => PlacementMode::Relaxed,
                other => return Err(bad(format!("unknown mode `{other}`"))),
            };
            let dims: Vec<usize> = field(lines.next(), "arch")?
                .split(' ')
                .map(|d| number(d, "arch"))
                .collect::<Result<_>>()?;
            if dims.len() < 2 {
                return Err(bad("arch needs input and output sizes"));
            }
            let arch = Arch {
                input_dim: dims[0],
                hidden: dims[1..dims.len() - 1].to_vec(),
                output_dim: dims[dims.len() - 1],
            };
            let weights = decode_f64s(field(lines.next(), "params")?)?;
            let net = PolicyParams::new(arch, weights)?;
            Ok(GenomeRecord::Sequential(SeqGenParams::new(net, (w, h), budget, mode)?))
        }
        other => Err(bad(format!("unknown genome kind {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::MutationConfig;
    use crate::maze::carved_maze;
    use crate::runtime::seed::Seed;

    #[test]
    fn direct_record_roundtrip() {
        let root = DirectGenome::seed(carved_maze(9, 7, 3).unwrap(), GenomeId(0), 0).unwrap();
        let child = root.mutate(&MutationConfig::default(), GenomeId(5), 2, Seed(1)).unwrap();
        for g in [root, child] {
            let text = g.to_record();
            assert_eq!(genome_from_record(&text).unwrap(), GenomeRecord::Direct(g));
        }
    }

    #[test]
    fn sequential_record_roundtrip() {
        let g = SeqGenParams::random((6, 7), 12, &[8], PlacementMode::Relaxed, Seed(2)).unwrap();
        let text = g.to_record();
        assert!(text.starts_with("genome sequential\ncanvas 6 7\n"));
        assert_eq!(genome_from_record(&text).unwrap(), GenomeRecord::Sequential(g));
    }

    #[test]
    fn rejects_garbage() {
        assert!(genome_from_record("genome fancy\n").is_err());
        assert!(genome_from_record("genome direct\nid x\n").is_err());
        let g = SeqGenParams::random((6, 6), 4, &[4], PlacementMode::Relaxed, Seed(2)).unwrap();
        let truncated = g.to_record().replace("params ", "params 00");
        assert!(genome_from_record(&truncated).is_err());
    }
}
