//! Superposition strategy codebooks and the causal encoder.
//!
//! A codebook holds `m0_count` cloud rows over U0 and, for each cloud row,
//! `m1_count` satellite rows over U1 drawn conditionally i.i.d. given the
//! cloud letters. Rows derive from per-row seeds, so small books are
//! materialized while books too large to store are regenerated on demand
//! (binary alphabets only) with identical contents.

use crate::channel::{StrategyDist, StrategyMap};
use crate::error::{Error, Result};
use crate::prob::Pmf;
use crate::sim::rng::{derive_rng, uniform_f64, TAG_U0, TAG_U1};
use crate::sim::words::{pack_row, words_per_row};

/// Largest total row count kept in memory; larger binary books go virtual.
const MATERIALIZE_ROWS: u128 = 1 << 24;
/// Byte budget for bit-packed (binary) storage; books over it go virtual.
const PACKED_BYTES: u128 = 1 << 28;
/// Byte budget for unpacked (non-binary) storage.
const DENSE_BYTES: u128 = 1 << 26;
/// Message-count cap so `log2` stays exact and indices fit comfortably.
const MAX_COUNT: u64 = 1 << 52;

#[derive(Debug, Clone)]
enum Store {
    /// Bit-packed rows, binary U0/U1.
    Packed { wpr: usize, u0: Vec<u64>, u1: Vec<u64> },
    /// One byte per letter, any alphabet.
    Dense { u0: Vec<u8>, u1: Vec<u8> },
    /// Rows regenerated from per-row seeds (binary U0/U1 only).
    Virtual,
}

#[derive(Debug, Clone)]
pub struct Codebook {
    n: usize,
    m0_count: u64,
    m1_count: u64,
    r0: f64,
    r1: f64,
    p: StrategyDist,
    xi: StrategyMap,
    seed: u64,
    u0_marginal: Pmf,
    u1_conditionals: Vec<Pmf>,
    store: Store,
}

/// Message count `2^{nR}` from a rate, which must hit an integer.
pub fn rate_to_count(n: usize, rate: f64) -> Result<u64> {
    if !(rate >= 0.0) {
        return Err(Error::domain(format!("rate {rate} must be nonnegative")));
    }
    let x = (n as f64 * rate).exp2();
    let m = x.round();
    if (x - m).abs() > 1e-9 * m.max(1.0) {
        return Err(Error::domain(format!(
            "message count 2^(n*rate) = {x} is not an integer (n = {n}, rate = {rate})"
        )));
    }
    if m > MAX_COUNT as f64 {
        return Err(Error::domain(format!("message count {m} exceeds 2^52")));
    }
    Ok(m as u64)
}

impl Codebook {
    /// Generate from rates in bits per channel use.
    pub fn generate(
        p: StrategyDist,
        xi: StrategyMap,
        n: usize,
        r0: f64,
        r1: f64,
        seed: u64,
    ) -> Result<Codebook> {
        let m0 = rate_to_count(n, r0)?;
        let m1 = rate_to_count(n, r1)?;
        Codebook::with_counts(p, xi, n, m0, m1, seed)
    }

    /// Generate from explicit message counts.
    pub fn with_counts(
        p: StrategyDist,
        xi: StrategyMap,
        n: usize,
        m0_count: u64,
        m1_count: u64,
        seed: u64,
    ) -> Result<Codebook> {
        Codebook::build(p, xi, n, m0_count, m1_count, seed, false)
    }

    /// Virtual storage regardless of size (binary only; for tests).
    #[cfg(test)]
    pub(crate) fn with_counts_forced_virtual(
        p: StrategyDist,
        xi: StrategyMap,
        n: usize,
        m0_count: u64,
        m1_count: u64,
        seed: u64,
    ) -> Result<Codebook> {
        Codebook::build(p, xi, n, m0_count, m1_count, seed, true)
    }

    fn build(
        p: StrategyDist,
        xi: StrategyMap,
        n: usize,
        m0_count: u64,
        m1_count: u64,
        seed: u64,
        force_virtual: bool,
    ) -> Result<Codebook> {
        if n == 0 {
            return Err(Error::shape("blocklength must be positive"));
        }
        if m0_count == 0 || m1_count == 0 {
            return Err(Error::domain("message counts must be at least 1"));
        }
        if m0_count > MAX_COUNT || m1_count > MAX_COUNT {
            return Err(Error::domain("message count exceeds 2^52"));
        }
        if p.nu0() != xi.nu0() || p.nu1() != xi.nu1() {
            return Err(Error::shape(format!(
                "strategy distribution over {}x{} but map over {}x{}",
                p.nu0(),
                p.nu1(),
                xi.nu0(),
                xi.nu1()
            )));
        }
        let total_rows = m0_count as u128 + m0_count as u128 * m1_count as u128;
        let binary = xi.nu0() == 2 && xi.nu1() == 2;
        let u0_marginal = p.marginal_u0();
        let u1_conditionals: Vec<Pmf> = (0..p.nu0()).map(|u0| p.conditional_u1(u0)).collect();
        let r0 = (m0_count as f64).log2() / n as f64;
        let r1 = (m1_count as f64).log2() / n as f64;
        let mut cb = Codebook {
            n,
            m0_count,
            m1_count,
            r0,
            r1,
            p,
            xi,
            seed,
            u0_marginal,
            u1_conditionals,
            store: Store::Virtual,
        };
        let packed_bytes = total_rows * words_per_row(n) as u128 * 8;
        if force_virtual || total_rows > MATERIALIZE_ROWS || (binary && packed_bytes > PACKED_BYTES)
        {
            if !binary {
                return Err(Error::too_large(format!(
                    "{total_rows} rows over non-binary alphabets cannot be regenerated on demand"
                )));
            }
            return Ok(cb);
        }
        if binary {
            let wpr = words_per_row(n);
            let mut u0 = vec![0u64; m0_count as usize * wpr];
            let mut u1 = vec![0u64; (m0_count * m1_count) as usize * wpr];
            let mut sym0 = vec![0u8; n];
            let mut sym1 = vec![0u8; n];
            for m0 in 0..m0_count {
                cb.gen_u0_symbols(m0, &mut sym0);
                pack_row(&sym0, row_mut(&mut u0, m0 as usize, wpr));
                for m1 in 0..m1_count {
                    cb.gen_u1_symbols(m0, m1, &sym0, &mut sym1);
                    pack_row(&sym1, row_mut(&mut u1, (m0 * m1_count + m1) as usize, wpr));
                }
            }
            cb.store = Store::Packed { wpr, u0, u1 };
        } else {
            if total_rows * n as u128 > DENSE_BYTES {
                return Err(Error::too_large(format!(
                    "{total_rows} rows of {n} letters exceed the dense storage budget"
                )));
            }
            let mut u0 = vec![0u8; m0_count as usize * n];
            let mut u1 = vec![0u8; (m0_count * m1_count) as usize * n];
            let mut sym0 = vec![0u8; n];
            let mut sym1 = vec![0u8; n];
            for m0 in 0..m0_count {
                cb.gen_u0_symbols(m0, &mut sym0);
                row_mut(&mut u0, m0 as usize, n).copy_from_slice(&sym0);
                for m1 in 0..m1_count {
                    cb.gen_u1_symbols(m0, m1, &sym0, &mut sym1);
                    row_mut(&mut u1, (m0 * m1_count + m1) as usize, n).copy_from_slice(&sym1);
                }
            }
            cb.store = Store::Dense { u0, u1 };
        }
        Ok(cb)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m0_count(&self) -> u64 {
        self.m0_count
    }

    pub fn m1_count(&self) -> u64 {
        self.m1_count
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn p(&self) -> &StrategyDist {
        &self.p
    }

    pub fn xi(&self) -> &StrategyMap {
        &self.xi
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn is_binary(&self) -> bool {
        self.xi.nu0() == 2 && self.xi.nu1() == 2
    }

    pub(crate) fn is_virtual(&self) -> bool {
        matches!(self.store, Store::Virtual)
    }

    pub(crate) fn words_per_row(&self) -> usize {
        words_per_row(self.n)
    }

    fn gen_u0_symbols(&self, m0: u64, out: &mut [u8]) {
        let mut rng = derive_rng(self.seed, TAG_U0, m0);
        for o in out.iter_mut() {
            *o = self.u0_marginal.sample_with(uniform_f64(&mut rng)) as u8;
        }
    }

    fn gen_u1_symbols(&self, m0: u64, m1: u64, u0_sym: &[u8], out: &mut [u8]) {
        let mut rng = derive_rng(self.seed, TAG_U1, m0 * self.m1_count + m1);
        for (o, &u0) in out.iter_mut().zip(u0_sym) {
            *o = self.u1_conditionals[u0 as usize].sample_with(uniform_f64(&mut rng)) as u8;
        }
    }

    /// Cloud-row letters (any storage mode).
    pub(crate) fn u0_symbols(&self, m0: u64, out: &mut Vec<u8>) {
        out.resize(self.n, 0);
        match &self.store {
            Store::Packed { wpr, u0, .. } => {
                let row = row(u0, m0 as usize, *wpr);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = crate::sim::words::get_bit(row, i);
                }
            }
            Store::Dense { u0, .. } => out.copy_from_slice(row(u0, m0 as usize, self.n)),
            Store::Virtual => self.gen_u0_symbols(m0, out),
        }
    }

    /// Satellite-row letters (any storage mode); `u0_sym` must be the matching cloud row.
    pub(crate) fn u1_symbols(&self, m0: u64, m1: u64, u0_sym: &[u8], out: &mut Vec<u8>) {
        out.resize(self.n, 0);
        match &self.store {
            Store::Packed { wpr, u1, .. } => {
                let row = row(u1, (m0 * self.m1_count + m1) as usize, *wpr);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = crate::sim::words::get_bit(row, i);
                }
            }
            Store::Dense { u1, .. } => {
                out.copy_from_slice(row(u1, (m0 * self.m1_count + m1) as usize, self.n))
            }
            Store::Virtual => self.gen_u1_symbols(m0, m1, u0_sym, out),
        }
    }

    /// Packed cloud row: a borrow for materialized books, regenerated into
    /// `scratch` for virtual ones.
    pub(crate) fn u0_packed<'a>(
        &'a self,
        m0: u64,
        sym_scratch: &mut Vec<u8>,
        scratch: &'a mut Vec<u64>,
    ) -> &'a [u64] {
        match &self.store {
            Store::Packed { wpr, u0, .. } => row(u0, m0 as usize, *wpr),
            Store::Dense { .. } => unreachable!("packed access to a dense store"),
            Store::Virtual => {
                sym_scratch.resize(self.n, 0);
                self.gen_u0_symbols(m0, sym_scratch);
                scratch.resize(self.words_per_row(), 0);
                pack_row(sym_scratch, scratch);
                scratch
            }
        }
    }

    /// Packed satellite row; `u0_sym` must be the matching cloud row letters.
    pub(crate) fn u1_packed<'a>(
        &'a self,
        m0: u64,
        m1: u64,
        u0_sym: &[u8],
        sym_scratch: &mut Vec<u8>,
        scratch: &'a mut Vec<u64>,
    ) -> &'a [u64] {
        match &self.store {
            Store::Packed { wpr, u1, .. } => row(u1, (m0 * self.m1_count + m1) as usize, *wpr),
            Store::Dense { .. } => unreachable!("packed access to a dense store"),
            Store::Virtual => {
                sym_scratch.resize(self.n, 0);
                self.gen_u1_symbols(m0, m1, u0_sym, sym_scratch);
                scratch.resize(self.words_per_row(), 0);
                pack_row(sym_scratch, scratch);
                scratch
            }
        }
    }

    /// Streaming causal encoder for one message pair.
    pub fn encoder(&self, m0: u64, m1: u64) -> Result<Encoder<'_>> {
        if m0 >= self.m0_count || m1 >= self.m1_count {
            return Err(Error::domain(format!(
                "message ({m0}, {m1}) outside ({}, {})",
                self.m0_count, self.m1_count
            )));
        }
        let mut u0 = Vec::new();
        self.u0_symbols(m0, &mut u0);
        let mut u1 = Vec::new();
        self.u1_symbols(m0, m1, &u0, &mut u1);
        Ok(Encoder { xi: &self.xi, u0, u1, pos: 0 })
    }

    /// Encode against a full state sequence (must have length `n`).
    pub fn encode(&self, m0: u64, m1: u64, s: &[u8]) -> Result<Vec<u8>> {
        if s.len() != self.n {
            return Err(Error::shape(format!(
                "state sequence length {} against blocklength {}",
                s.len(),
                self.n
            )));
        }
        let mut enc = self.encoder(m0, m1)?;
        s.iter().map(|&si| enc.step(si)).collect()
    }
}

/// Letter-by-letter encoder: `step` consumes the next state and emits the
/// next input, so lookahead is impossible by construction.
#[derive(Debug)]
pub struct Encoder<'c> {
    xi: &'c StrategyMap,
    u0: Vec<u8>,
    u1: Vec<u8>,
    pos: usize,
}

impl Encoder<'_> {
    pub fn step(&mut self, s: u8) -> Result<u8> {
        if self.pos >= self.u0.len() {
            return Err(Error::shape("encoder stepped past the blocklength"));
        }
        if (s as usize) >= self.xi.ns() {
            return Err(Error::domain(format!("state {s} outside alphabet {}", self.xi.ns())));
        }
        let i = self.pos;
        self.pos += 1;
        Ok(self.xi.apply(self.u0[i] as usize, self.u1[i] as usize, s as usize) as u8)
    }

    pub fn position(&self) -> usize {
        self.pos
    }
}

fn row<T>(data: &[T], m: usize, stride: usize) -> &[T] {
    &data[m * stride..(m + 1) * stride]
}

fn row_mut<T>(data: &mut [T], m: usize, stride: usize) -> &mut [T] {
    &mut data[m * stride..(m + 1) * stride]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::StrategyMap;
    use crate::prob::JointPmf;

    fn uniform_pair() -> StrategyDist {
        StrategyDist::product_bernoulli(0.5, 0.5).unwrap()
    }

    #[test]
    fn test_rate_to_count() {
        assert_eq!(rate_to_count(64, 0.0).unwrap(), 1);
        assert_eq!(rate_to_count(64, 0.25).unwrap(), 1 << 16);
        assert_eq!(rate_to_count(10, 0.5).unwrap(), 32);
        // 2^(8*0.3) = 2^2.4 is not an integer count
        assert!(rate_to_count(8, 0.3).is_err());
        assert!(rate_to_count(8, -0.1).is_err());
        assert!(rate_to_count(64, 1.0).is_err(), "2^64 rows exceed the count cap");
    }

    #[test]
    fn test_zero_rates_give_single_codeword_pair() {
        let cb = Codebook::generate(uniform_pair(), StrategyMap::xor3(), 32, 0.0, 0.0, 9).unwrap();
        assert_eq!(cb.m0_count(), 1);
        assert_eq!(cb.m1_count(), 1);
        let mut u0 = Vec::new();
        cb.u0_symbols(0, &mut u0);
        assert_eq!(u0.len(), 32);
    }

    #[test]
    fn test_degenerate_distribution_gives_constant_words() {
        let joint = JointPmf::new(vec![2, 2], vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let p = StrategyDist::from_joint(joint).unwrap();
        let cb = Codebook::with_counts(p, StrategyMap::xor3(), 50, 4, 4, 3).unwrap();
        let (mut u0, mut u1) = (Vec::new(), Vec::new());
        for m0 in 0..4 {
            cb.u0_symbols(m0, &mut u0);
            assert!(u0.iter().all(|&b| b == 0));
            for m1 in 0..4 {
                cb.u1_symbols(m0, m1, &u0, &mut u1);
                assert!(u1.iter().all(|&b| b == 1));
            }
        }
    }

    #[test]
    fn test_empirical_type_tracks_marginals() {
        // U0 ~ Bern(0.3), U1 | U0 correlated: long rows land near the law.
        let joint = JointPmf::new(vec![2, 2], vec![0.56, 0.14, 0.06, 0.24]).unwrap();
        let p = StrategyDist::from_joint(joint).unwrap();
        let n = 10_000;
        let cb = Codebook::with_counts(p, StrategyMap::xor3(), n, 2, 2, 17).unwrap();
        let (mut u0, mut u1) = (Vec::new(), Vec::new());
        cb.u0_symbols(0, &mut u0);
        cb.u1_symbols(0, 0, &u0, &mut u1);
        let f0 = u0.iter().filter(|&&b| b == 1).count() as f64 / n as f64;
        assert!((f0 - 0.3).abs() < 0.02, "u0 ones fraction {f0}");
        let both = u0.iter().zip(&u1).filter(|&(&a, &b)| a == 1 && b == 1).count() as f64;
        assert!((both / n as f64 - 0.24).abs() < 0.02);
    }

    #[test]
    fn test_encode_applies_strategy_letterwise() {
        let cb = Codebook::with_counts(uniform_pair(), StrategyMap::xor3(), 40, 2, 2, 5).unwrap();
        let (mut u0, mut u1) = (Vec::new(), Vec::new());
        cb.u0_symbols(1, &mut u0);
        cb.u1_symbols(1, 0, &u0, &mut u1);
        // all-zero states: xor3 reduces to u0 ^ u1
        let x = cb.encode(1, 0, &vec![0u8; 40]).unwrap();
        for i in 0..40 {
            assert_eq!(x[i], u0[i] ^ u1[i]);
        }
        // mixed states flip exactly where s = 1
        let s: Vec<u8> = (0..40).map(|i| (i % 3 == 0) as u8).collect();
        let y = cb.encode(1, 0, &s).unwrap();
        for i in 0..40 {
            assert_eq!(y[i], x[i] ^ s[i]);
        }
    }

    #[test]
    fn test_streaming_encoder_matches_batch_and_is_causal() {
        let cb = Codebook::with_counts(uniform_pair(), StrategyMap::xor3(), 24, 4, 4, 21).unwrap();
        let s: Vec<u8> = (0..24).map(|i| (i % 2) as u8).collect();
        let batch = cb.encode(2, 3, &s).unwrap();
        let mut enc = cb.encoder(2, 3).unwrap();
        let streamed: Vec<u8> = s.iter().map(|&si| enc.step(si).unwrap()).collect();
        assert_eq!(batch, streamed);
        assert!(enc.step(0).is_err(), "stepping past the block must fail");

        // causality: two state words sharing a prefix produce the same
        // output prefix, whatever comes later
        let mut a = cb.encoder(2, 3).unwrap();
        let mut b = cb.encoder(2, 3).unwrap();
        for i in 0..12 {
            assert_eq!(a.step(s[i]).unwrap(), b.step(s[i]).unwrap());
        }
        let xa = a.step(0).unwrap();
        let xb = b.step(1).unwrap();
        // the divergent tail may differ, but positions stay in lockstep
        assert_eq!(a.position(), b.position());
        let _ = (xa, xb);
    }

    #[test]
    fn test_rejects_bad_arguments() {
        assert!(Codebook::with_counts(uniform_pair(), StrategyMap::xor3(), 0, 1, 1, 0).is_err());
        assert!(Codebook::with_counts(uniform_pair(), StrategyMap::xor3(), 8, 0, 1, 0).is_err());
        let cb = Codebook::with_counts(uniform_pair(), StrategyMap::xor3(), 8, 2, 2, 0).unwrap();
        assert!(cb.encoder(2, 0).is_err());
        assert!(cb.encode(0, 0, &[0u8; 7]).is_err());
        let mut enc = cb.encoder(0, 0).unwrap();
        assert!(enc.step(2).is_err(), "state letter outside the alphabet");
    }

    #[test]
    fn test_virtual_rows_match_materialized() {
        let p = uniform_pair();
        let mat = Codebook::with_counts(p.clone(), StrategyMap::xor3(), 33, 8, 4, 77).unwrap();
        let virt =
            Codebook::with_counts_forced_virtual(p, StrategyMap::xor3(), 33, 8, 4, 77).unwrap();
        assert!(!mat.is_virtual() && virt.is_virtual());
        let (mut a0, mut a1, mut b0, mut b1) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for m0 in 0..8 {
            mat.u0_symbols(m0, &mut a0);
            virt.u0_symbols(m0, &mut b0);
            assert_eq!(a0, b0);
            for m1 in 0..4 {
                mat.u1_symbols(m0, m1, &a0, &mut a1);
                virt.u1_symbols(m0, m1, &b0, &mut b1);
                assert_eq!(a1, b1);
            }
        }
    }
}
