use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How to pick among equal-priority instances. Candidates are always
/// presented in lexicographic order, so `Lex` takes the first.
#[derive(Clone, Debug)]
#[derive(Default)]
pub enum TieBreak {
    #[default]
    Lex,
    Random(ChaCha8Rng),
}

impl TieBreak {
    pub fn seeded(seed: u64) -> TieBreak {
        TieBreak::Random(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn pick(&mut self, n: usize) -> usize {
        match self {
            TieBreak::Lex => 0,
            TieBreak::Random(rng) => rng.gen_range(0..n),
        }
    }
}

