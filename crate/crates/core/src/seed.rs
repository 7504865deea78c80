//! Sub-seed derivation.
//!
//! Every random stream in the pipeline is seeded from a base seed mixed with
//! stable identifiers (label, trial index, fold, purpose tag), so results do
//! not depend on evaluation order or thread count.

pub const TAG_TRACKS: u64 = 0x7472_6163_6b73;
pub const TAG_NOISE: u64 = 0x6e_6f69_7365;
pub const TAG_BACKGROUND: u64 = 0x6267;
pub const TAG_TRIAL: u64 = 0x74_7269_616c;
pub const TAG_FOLDS: u64 = 0x66_6f6c_6473;
pub const TAG_INIT: u64 = 0x696e_6974;
pub const TAG_SGD: u64 = 0x73_6764;
pub const TAG_REPEAT: u64 = 0x7265_7065_6174;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `parts` into `base`. Order of `parts` matters; the result is a pure
/// function of its inputs.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}
