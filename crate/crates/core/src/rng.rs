//! Seed derivation. Every randomized stage draws from a ChaCha stream keyed by
//! the global seed plus stable identifiers, so output never depends on
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type DetRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    fnv1a64_extend(FNV_OFFSET, bytes)
}

pub fn fnv1a64_extend(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one document: `hash(global_seed, doc_id)`.
pub fn doc_seed(global_seed: u64, doc_id: &str) -> u64 {
    let h = fnv1a64_extend(fnv1a64(&global_seed.to_le_bytes()), doc_id.as_bytes());
    splitmix64(h)
}

pub fn doc_rng(global_seed: u64, doc_id: &str) -> DetRng {
    DetRng::seed_from_u64(doc_seed(global_seed, doc_id))
}

/// Independent stream for item `index` of a document (e.g. one mining anchor).
pub fn item_rng(global_seed: u64, doc_id: &str, index: u64) -> DetRng {
    let s = doc_seed(global_seed, doc_id);
    DetRng::seed_from_u64(splitmix64(s ^ splitmix64(index.wrapping_add(1))))
}
