//! Bit-packed binary sequences and popcount cell counting.
//!
//! Decoder scans are dominated by joint-type extraction, so binary rows are
//! stored as `u64` words (LSB-first, tail bits zero) and pair/triple cell
//! counts come from a handful of popcounts per word.

/// Words needed for `n` bits.
pub(crate) fn words_per_row(n: usize) -> usize {
    n.div_ceil(64)
}

pub(crate) fn get_bit(row: &[u64], i: usize) -> u8 {
    ((row[i / 64] >> (i % 64)) & 1) as u8
}

pub(crate) fn set_bit(row: &mut [u64], i: usize) {
    row[i / 64] |= 1u64 << (i % 64);
}

/// Pack a 0/1 symbol slice into words (tail bits zero).
pub(crate) fn pack_row(sym: &[u8], out: &mut [u64]) {
    out.fill(0);
    for (i, &b) in sym.iter().enumerate() {
        debug_assert!(b < 2);
        if b == 1 {
            set_bit(out, i);
        }
    }
}

/// Joint counts of `(a_i, b_i)` cells, indexed `a*2 + b`.
///
/// Both rows must have zeroed tails; the `(0,0)` cell is recovered from `n`.
pub(crate) fn pair_counts(a: &[u64], b: &[u64], n: usize) -> [u32; 4] {
    let mut c11 = 0u32;
    let mut c10 = 0u32;
    let mut c01 = 0u32;
    for (wa, wb) in a.iter().zip(b) {
        c11 += (wa & wb).count_ones();
        c10 += (wa & !wb).count_ones();
        c01 += (!wa & wb).count_ones();
    }
    [n as u32 - c11 - c10 - c01, c01, c10, c11]
}

/// Joint counts of `(a_i, b_i, c_i)` cells, indexed `(a*2 + b)*2 + c`.
pub(crate) fn triple_counts(a: &[u64], b: &[u64], c: &[u64], n: usize) -> [u32; 8] {
    let mut out = [0u32; 8];
    for ((wa, wb), wc) in a.iter().zip(b).zip(c) {
        out[0b111] += (wa & wb & wc).count_ones();
        out[0b110] += (wa & wb & !wc).count_ones();
        out[0b101] += (wa & !wb & wc).count_ones();
        out[0b100] += (wa & !wb & !wc).count_ones();
        out[0b011] += (!wa & wb & wc).count_ones();
        out[0b010] += (!wa & wb & !wc).count_ones();
        out[0b001] += (!wa & !wb & wc).count_ones();
    }
    out[0] = n as u32 - out[1..].iter().sum::<u32>();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{derive_rng, uniform_below};

    fn random_bits(seed: u64, n: usize) -> Vec<u8> {
        let mut rng = derive_rng(seed, 0x99, 0);
        (0..n).map(|_| uniform_below(&mut rng, 2) as u8).collect()
    }

    #[test]
    fn test_pack_round_trip() {
        let sym = random_bits(5, 131);
        let mut row = vec![0u64; words_per_row(131)];
        pack_row(&sym, &mut row);
        for (i, &b) in sym.iter().enumerate() {
            assert_eq!(get_bit(&row, i), b);
        }
        // tail bits stay zero
        assert_eq!(row[2] >> (131 - 128), 0);
    }

    #[test]
    fn test_pair_counts_match_naive() {
        for n in [1usize, 63, 64, 65, 130] {
            let a = random_bits(n as u64, n);
            let b = random_bits(n as u64 + 100, n);
            let mut pa = vec![0u64; words_per_row(n)];
            let mut pb = pa.clone();
            pack_row(&a, &mut pa);
            pack_row(&b, &mut pb);
            let fast = pair_counts(&pa, &pb, n);
            let mut naive = [0u32; 4];
            for i in 0..n {
                naive[(a[i] * 2 + b[i]) as usize] += 1;
            }
            assert_eq!(fast, naive);
        }
    }

    #[test]
    fn test_triple_counts_match_naive() {
        for n in [2usize, 64, 127, 200] {
            let a = random_bits(n as u64, n);
            let b = random_bits(n as u64 + 1, n);
            let c = random_bits(n as u64 + 2, n);
            let mut pa = vec![0u64; words_per_row(n)];
            let mut pb = pa.clone();
            let mut pc = pa.clone();
            pack_row(&a, &mut pa);
            pack_row(&b, &mut pb);
            pack_row(&c, &mut pc);
            let fast = triple_counts(&pa, &pb, &pc, n);
            let mut naive = [0u32; 8];
            for i in 0..n {
                naive[((a[i] * 2 + b[i]) * 2 + c[i]) as usize] += 1;
            }
            assert_eq!(fast, naive);
        }
    }
}
