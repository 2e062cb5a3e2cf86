use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator behind every sampler: a counter-based stream cipher with a
/// 2^64 period per stream and 53-bit uniform doubles in `[0, 1)`.
pub type SamplerRng = ChaCha8Rng;

/// A 64-bit seed. Equal seeds give identical streams on every platform.
pub type RngSeed = u64;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn rng_from_seed(seed: RngSeed) -> SamplerRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One round of the splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `index` under `master`: the `index + 1`-th output of a
/// splitmix64 sequence started at `master`.
pub fn derive_seed(master: RngSeed, index: u64) -> RngSeed {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}
