//! Seeded generators with planted structure, and slow but obviously correct
//! reference computations to check the library against.

pub mod fixture;
pub mod gen;
pub mod oracle;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
