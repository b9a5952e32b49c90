/// Derives an independent 64-bit seed for item `index` of the stream named
/// `label`. Stateless and platform independent: an FNV-1a hash of the label
/// is mixed with the master seed and the index (multiplied by the odd golden
/// ratio constant, so distinct indices never collide) and passed through the
/// SplitMix64 finalizer.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = master ^ h.rotate_left(29) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
