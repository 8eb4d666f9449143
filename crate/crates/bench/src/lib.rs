//! Fixtures shared by the benchmarks in `benches/`.

use untangle_core::scramble::{self, GenParams};
use untangle_core::{BraidWord, Checkpoint, Encoding, ModelConfig, PolicyNet};

pub const STRANDS: usize = 4;
pub const SLOTS: usize = 20;

/// `count` scrambled trivial braids with `crossings` crossings.
pub fn braids(crossings: usize, count: usize, seed: u64) -> Vec<BraidWord> {
    scramble::generate(count, &GenParams::new(STRANDS, SLOTS, crossings, 20, seed))
        .expect("benchmark parameters are valid")
}

/// An untrained network; inference cost does not depend on the weights.
pub fn untrained_model(seed: u64) -> Checkpoint {
    let config = ModelConfig {
        strands: STRANDS,
        slots: SLOTS,
        insertion: false,
        encoding: Encoding::Scaled,
    };
    Checkpoint::new(
        config,
        PolicyNet::init(config.dims(), seed).expect("valid dims"),
    )
    .expect("dims match config")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_fit_each_other() {
        let model = untrained_model(0);
        for w in braids(8, 4, 1) {
            assert!(model.config.table().fits(&w));
            assert_eq!(w.crossing_count(), 8);
        }
    }
}
