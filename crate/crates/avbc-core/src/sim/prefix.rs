//! Index prefix and the two-stage concatenated code built on it.
//!
//! A short prefix announces which permutation from a [`ReducedFamily`] the
//! encoder drew for the payload block. The prefix encodes the index bits with
//! a public (state-aware, message-oblivious) strategy letter repeated `reps`
//! times per bit, and each receiver recovers the bits by per-block majority
//! vote. Because the prefix length grows like `log n` while the payload is
//! `n` letters, the rate loss vanishes as the blocklength grows.

use crate::channel::{BroadcastChannel, PublicStrategyMap};
use crate::error::{Error, Result};

use super::permute::ReducedFamily;
use super::rng::{derive_rng, uniform_below, uniform_f64, TAG_INDEX, TAG_JAM, TAG_MSG, TAG_NOISE};
use super::run::{sample_row, thread_count, RunStats, Simulation, TrialResult};

/// Binary index code: each of the `ceil(log2 k)` index bits is sent `reps`
/// times through a public strategy letter, and decoded by majority vote.
#[derive(Debug, Clone)]
pub struct RepetitionIndexCode {
    k: usize,
    bits: usize,
    reps: usize,
    xi: PublicStrategyMap,
}

impl RepetitionIndexCode {
    /// Code for indices `0..k` with `reps` channel uses per bit.
    ///
    /// The strategy map must take binary inputs (one index bit at a time).
    pub fn new(k: usize, reps: usize, xi: PublicStrategyMap) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("index count must be positive"));
        }
        if reps == 0 {
            return Err(Error::domain("repetition count must be positive"));
        }
        if xi.nu() != 2 {
            return Err(Error::shape("index-code strategy must take a binary input"));
        }
        let bits = if k <= 1 { 0 } else { (usize::BITS - (k - 1).leading_zeros()) as usize };
        Ok(RepetitionIndexCode { k, bits, reps, xi })
    }

    /// Number of distinct indices the code carries.
    pub fn index_count(&self) -> usize {
        self.k
    }

    /// Number of distinct messages the bit pattern can address (`2^bits`).
    pub fn message_capacity(&self) -> u64 {
        1u64 << self.bits
    }

    /// Prefix length in channel uses.
    pub fn blocklength(&self) -> usize {
        self.bits * self.reps
    }

    /// Channel-input letter for position `i` of the prefix carrying `gamma`,
    /// given the current state letter (causal: only `s[i]` is consumed).
    pub fn encode_letter(&self, gamma: usize, i: usize, s: u8) -> Result<u8> {
        if gamma >= self.k {
            return Err(Error::domain(format!("index {gamma} outside 0..{}", self.k)));
        }
        if i >= self.blocklength() {
            return Err(Error::domain("prefix position out of range"));
        }
        let bit = (gamma >> (i / self.reps)) & 1;
        Ok(self.xi.apply(bit, s as usize) as u8)
    }

    /// Majority-vote decode of a received prefix word (binary outputs).
    ///
    /// The returned value may be `>= index_count()` when the channel corrupts
    /// the bit pattern; callers must treat that as a decoding failure. Ties
    /// resolve to bit 0.
    pub fn decode(&self, y: &[u8]) -> Result<usize> {
        if y.len() != self.blocklength() {
            return Err(Error::shape(format!(
                "prefix word length {} against blocklength {}",
                y.len(),
                self.blocklength()
            )));
        }
        let mut gamma = 0usize;
        for j in 0..self.bits {
            let ones = y[j * self.reps..(j + 1) * self.reps]
                .iter()
                .filter(|&&b| b != 0)
                .count();
            if 2 * ones > self.reps {
                gamma |= 1 << j;
            }
        }
        Ok(gamma)
    }
}

/// Two-stage code: an index prefix announcing a permutation from a reduced
/// family, followed by the permuted payload code.
///
/// The encoder draws the permutation index uniformly per trial; each receiver
/// first decodes the prefix, then undoes the announced permutation on its
/// payload word and runs the ordinary typicality decoder.
pub struct TwoStageCode<'a> {
    sim: &'a Simulation,
    index: RepetitionIndexCode,
    family: &'a ReducedFamily,
    prefix_channel: BroadcastChannel,
}

impl<'a> TwoStageCode<'a> {
    /// Couples a payload simulation with an index prefix over the same
    /// channel. All permutations in the family must match the payload
    /// blocklength, and the index code must be able to address the family.
    pub fn new(
        sim: &'a Simulation,
        index: RepetitionIndexCode,
        family: &'a ReducedFamily,
    ) -> Result<Self> {
        if index.index_count() != family.k() {
            return Err(Error::shape(format!(
                "index code addresses {} values but the family has {}",
                index.index_count(),
                family.k()
            )));
        }
        let n = sim.codebook().n();
        for pi in family.perms() {
            if pi.len() != n {
                return Err(Error::shape("family permutation length does not match the payload"));
            }
        }
        let w = sim.channel();
        if w.nx() != 2 || w.ny1() != 2 || w.ny2() != 2 {
            return Err(Error::domain(
                "the majority-vote prefix requires binary channel inputs and outputs",
            ));
        }
        if index.xi.ns() != w.ns() {
            return Err(Error::shape("index-code strategy state alphabet does not match the channel"));
        }
        let prefix_channel = w.clone();
        Ok(TwoStageCode { sim, index, family, prefix_channel })
    }

    /// Replaces the channel used for the prefix letters (the payload still
    /// goes through the simulation channel). Alphabets must agree.
    pub fn with_prefix_channel(mut self, w: BroadcastChannel) -> Result<Self> {
        let base = self.sim.channel();
        if w.nx() != base.nx()
            || w.ns() != base.ns()
            || w.ny1() != base.ny1()
            || w.ny2() != base.ny2()
        {
            return Err(Error::shape("prefix channel alphabets do not match the payload channel"));
        }
        self.prefix_channel = w;
        Ok(self)
    }

    /// Prefix length in channel uses.
    pub fn prefix_len(&self) -> usize {
        self.index.blocklength()
    }

    /// Total blocklength: prefix plus payload.
    pub fn total_blocklength(&self) -> usize {
        self.index.blocklength() + self.sim.codebook().n()
    }

    /// Rate pair of the concatenated code: the payload rates scaled by the
    /// fraction of channel uses the payload occupies.
    pub fn effective_rates(&self) -> (f64, f64) {
        let n = self.sim.codebook().n() as f64;
        let total = self.total_blocklength() as f64;
        let scale = n / total;
        (scale * self.sim.codebook().r0(), scale * self.sim.codebook().r1())
    }

    /// One trial against a fixed full-length state word: draw the index and
    /// messages, send prefix + permuted payload, decode both stages at each
    /// receiver.
    pub fn outcome(
        &self,
        gamma: usize,
        m0: u64,
        m1: u64,
        s: &[u8],
        noise: &[f64],
    ) -> Result<TrialResult> {
        if gamma >= self.family.k() {
            return Err(Error::domain(format!("index {gamma} outside 0..{}", self.family.k())));
        }
        let nu = self.index.blocklength();
        let n = self.sim.codebook().n();
        if s.len() != nu + n || noise.len() != nu + n {
            return Err(Error::shape(format!(
                "state/noise lengths ({}, {}) against total blocklength {}",
                s.len(),
                noise.len(),
                nu + n
            )));
        }
        let ns = self.prefix_channel.ns();
        let mut y1p = vec![0u8; nu];
        let mut y2p = vec![0u8; nu];
        for i in 0..nu {
            let si = s[i] as usize;
            if si >= ns {
                return Err(Error::domain(format!("state {si} outside alphabet {ns}")));
            }
            let x = self.index.encode_letter(gamma, i, s[i])?;
            let f = sample_row(self.prefix_channel.output_row(x as usize, si), noise[i]);
            y1p[i] = (f / 2) as u8;
            y2p[i] = (f % 2) as u8;
        }
        let (y1, y2) =
            self.sim.channel_pass(m0, m1, Some(self.family.get(gamma)), &s[nu..], &noise[nu..])?;

        let ghat1 = self.index.decode(&y1p)?;
        let (d1, c1) = if ghat1 < self.family.k() {
            let z1 = self.family.get(ghat1).apply(&y1);
            self.sim.decode1_output(&z1)?
        } else {
            (None, 0)
        };
        let ghat2 = self.index.decode(&y2p)?;
        let (d2, c2) = if ghat2 < self.family.k() {
            let z2 = self.family.get(ghat2).apply(&y2);
            self.sim.decode2_output(&z2)?
        } else {
            (None, 0)
        };

        let mut state_counts = vec![0u32; ns];
        for &si in s {
            state_counts[si as usize] += 1;
        }
        Ok(TrialResult {
            dec1_ok: d1 == Some((m0, m1)),
            dec2_ok: d2 == Some(m0),
            dec1_candidates: c1,
            dec2_candidates: c2,
            state_counts,
        })
    }

    /// Monte Carlo over trials with states drawn from the payload
    /// simulation's jammer, extended over the full prefix + payload block.
    pub fn run(&self, trials: u64, seed: u64) -> Result<RunStats> {
        self.run_impl(trials, seed, None)
    }

    /// Monte Carlo against one fixed full-length state word.
    pub fn run_fixed_state(&self, s: &[u8], trials: u64, seed: u64) -> Result<RunStats> {
        if s.len() != self.total_blocklength() {
            return Err(Error::shape(format!(
                "state word length {} against total blocklength {}",
                s.len(),
                self.total_blocklength()
            )));
        }
        self.run_impl(trials, seed, Some(s))
    }

    fn run_impl(&self, trials: u64, seed: u64, fixed: Option<&[u8]>) -> Result<RunStats> {
        if trials == 0 {
            return Err(Error::domain("trial count must be positive"));
        }
        let threads = thread_count().max(1).min(trials as usize) as u64;
        let chunk = trials.div_ceil(threads);
        let mut bounds = Vec::new();
        let mut lo = 0u64;
        while lo < trials {
            let hi = (lo + chunk).min(trials);
            bounds.push((lo, hi));
            lo = hi;
        }
        let results: Vec<Result<RunStats>> = std::thread::scope(|scope| {
            let handles: Vec<_> = bounds
                .iter()
                .map(|&(lo, hi)| scope.spawn(move || self.run_range(lo, hi, seed, fixed)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
        });
        let mut stats = RunStats::default();
        for r in results {
            stats.merge(&r?);
        }
        Ok(stats)
    }

    fn run_range(&self, lo: u64, hi: u64, seed: u64, fixed: Option<&[u8]>) -> Result<RunStats> {
        let total = self.total_blocklength();
        let k = self.family.k() as u64;
        let mut stats = RunStats::default();
        for t in lo..hi {
            let mut idx_rng = derive_rng(seed, TAG_INDEX, t);
            let gamma = uniform_below(&mut idx_rng, k) as usize;
            let mut msg_rng = derive_rng(seed, TAG_MSG, t);
            let m0 = uniform_below(&mut msg_rng, self.sim.codebook().m0_count());
            let m1 = uniform_below(&mut msg_rng, self.sim.codebook().m1_count());
            let s_own;
            let s: &[u8] = match fixed {
                Some(s) => s,
                None => {
                    let mut jam_rng = derive_rng(seed, TAG_JAM, t);
                    s_own = self.sim.jammer().sequence(
                        total,
                        self.prefix_channel.ns(),
                        &mut jam_rng,
                    )?;
                    &s_own
                }
            };
            let mut noise_rng = derive_rng(seed, TAG_NOISE, t);
            let noise: Vec<f64> = (0..total).map(|_| uniform_f64(&mut noise_rng)).collect();
            stats.absorb(&self.outcome(gamma, m0, m1, s, &noise)?);
        }
        Ok(stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{BroadcastChannel, StrategyDist, StrategyMap};
    use crate::prob::TypeGrid;
    use crate::sim::codebook::Codebook;
    use crate::sim::jammer::JammerSpec;
    use crate::sim::permute::{eliminate, Permutation, ReducedFamily};

    fn xor_public() -> PublicStrategyMap {
        PublicStrategyMap::new(2, 2, 2, vec![0, 1, 1, 0]).unwrap()
    }

    /// `x = b` regardless of the state: the right prefix strategy when the
    /// channel itself ignores the state (xor pre-compensation would turn the
    /// state word into bit errors here).
    fn identity_public() -> PublicStrategyMap {
        PublicStrategyMap::new(2, 2, 2, vec![0, 0, 1, 1]).unwrap()
    }

    /// Channel that reproduces x at both receivers regardless of the state.
    fn noiseless_channel() -> BroadcastChannel {
        let mut w = vec![0.0; 2 * 2 * 2 * 2];
        for x in 0..2usize {
            for s in 0..2usize {
                w[((x * 2 + s) * 2 + x) * 2 + x] = 1.0;
            }
        }
        BroadcastChannel::new(2, 2, 2, 2, w).unwrap()
    }

    fn payload_sim(n: usize, jam: JammerSpec) -> Simulation {
        let p = StrategyDist::product_bernoulli(0.5, 0.5).unwrap();
        // x = u0 AND u1: both receivers learn about their messages through
        // the zero-mass cells (y = 1 forces u0 = u1 = 1), so a noiseless
        // channel decodes both with room to spare.
        let xi = StrategyMap::new(2, 2, 2, 2, vec![0, 0, 0, 0, 0, 0, 1, 1]).unwrap();
        let cb = Codebook::with_counts(p, xi, n, 2, 2, 7).unwrap();
        let grid = TypeGrid::full(n, 2).unwrap();
        Simulation::new(noiseless_channel(), cb, jam, grid, 0.2).unwrap()
    }

    #[test]
    fn test_index_code_shapes_and_roundtrip() {
        let code = RepetitionIndexCode::new(1024, 5, xor_public()).unwrap();
        assert_eq!(code.blocklength(), 50);
        assert!(code.message_capacity() >= 1024);
        // Clean repetition words decode back to the index: encode over the
        // all-zero state (xor leaves bits intact) and majority-vote.
        for gamma in [0usize, 1, 511, 707, 1023] {
            let y: Vec<u8> =
                (0..code.blocklength()).map(|i| code.encode_letter(gamma, i, 0).unwrap()).collect();
            assert_eq!(code.decode(&y).unwrap(), gamma);
        }
        // Majority survives a minority of flips in each bit block.
        let gamma = 613usize;
        let mut y: Vec<u8> =
            (0..code.blocklength()).map(|i| code.encode_letter(gamma, i, 0).unwrap()).collect();
        for j in 0..10 {
            y[j * 5] ^= 1;
            y[j * 5 + 3] ^= 1;
        }
        assert_eq!(code.decode(&y).unwrap(), gamma);
    }

    #[test]
    fn test_index_code_rejects_bad_args() {
        assert!(RepetitionIndexCode::new(0, 5, xor_public()).is_err());
        assert!(RepetitionIndexCode::new(4, 0, xor_public()).is_err());
        let code = RepetitionIndexCode::new(4, 3, xor_public()).unwrap();
        assert!(code.encode_letter(4, 0, 0).is_err());
        assert!(code.decode(&[0u8; 5]).is_err());
    }

    #[test]
    fn test_effective_rates_approach_payload_rates() {
        // With k = n^2 permutations the prefix costs O(log n) letters, so the
        // effective rates climb back toward the payload rates as n grows.
        let mut prev = 0.0;
        for n in [32usize, 64, 128] {
            let sim = payload_sim(n, JammerSpec::Iid { q: vec![0.5, 0.5] });
            let family = eliminate(n, 11);
            let index = RepetitionIndexCode::new(family.k(), 5, xor_public()).unwrap();
            let code = TwoStageCode::new(&sim, index, &family).unwrap();
            let nu = code.prefix_len();
            let (e0, e1) = code.effective_rates();
            let scale = n as f64 / (nu + n) as f64;
            assert!((e0 - scale * sim.codebook().r0()).abs() < 1e-12);
            assert!((e1 - scale * sim.codebook().r1()).abs() < 1e-12);
            assert!(scale > prev, "rate fraction should grow with n");
            prev = scale;
        }
    }

    #[test]
    fn test_noiseless_prefix_matches_plain_permuted_code() {
        // With a noiseless prefix the announced index always survives, so the
        // two-stage verdicts must coincide with running the permuted payload
        // code directly (same messages, same payload noise and states).
        let n = 96usize;
        let sim = payload_sim(n, JammerSpec::Iid { q: vec![0.5, 0.5] });
        let family = eliminate(n, 3);
        let index = RepetitionIndexCode::new(family.k(), 3, identity_public()).unwrap();
        let code = TwoStageCode::new(&sim, index, &family).unwrap();
        let nu = code.prefix_len();

        let mut rng = derive_rng(99, 0x77, 0);
        for t in 0..25u64 {
            let gamma = uniform_below(&mut rng, family.k() as u64) as usize;
            let m0 = uniform_below(&mut rng, 2);
            let m1 = uniform_below(&mut rng, 2);
            let s: Vec<u8> = (0..nu + n).map(|_| (uniform_f64(&mut rng) < 0.5) as u8).collect();
            let noise: Vec<f64> = (0..nu + n).map(|_| uniform_f64(&mut rng)).collect();
            let two = code.outcome(gamma, m0, m1, &s, &noise).unwrap();
            let plain = sim
                .outcome_permuted(m0, m1, family.get(gamma), &s[nu..], &noise[nu..])
                .unwrap();
            assert_eq!(two.dec1_ok, plain.dec1_ok, "trial {t}");
            assert_eq!(two.dec2_ok, plain.dec2_ok, "trial {t}");
            assert_eq!(two.dec1_candidates, plain.dec1_candidates);
            assert_eq!(two.dec2_candidates, plain.dec2_candidates);
        }
    }

    #[test]
    fn test_two_stage_run_noiseless_channel_no_errors() {
        // Identity-family prefix over a noiseless channel: everything decodes.
        let n = 64usize;
        let sim = payload_sim(n, JammerSpec::Iid { q: vec![0.5, 0.5] });
        let family =
            ReducedFamily::from_permutations(vec![Permutation::identity(n), Permutation::reversal(n)])
                .unwrap();
        let index = RepetitionIndexCode::new(family.k(), 3, identity_public()).unwrap();
        let code = TwoStageCode::new(&sim, index, &family).unwrap();
        let stats = code.run(60, 5).unwrap();
        assert_eq!(stats.trials, 60);
        assert_eq!(stats.dec1_errors, 0);
        assert_eq!(stats.dec2_errors, 0);
    }

    #[test]
    fn test_two_stage_rejects_mismatched_family() {
        let n = 32usize;
        let sim = payload_sim(n, JammerSpec::Iid { q: vec![0.5, 0.5] });
        let family = eliminate(n, 3);
        let index = RepetitionIndexCode::new(family.k() + 1, 3, xor_public()).unwrap();
        assert!(TwoStageCode::new(&sim, index, &family).is_err());
        let short = eliminate(n - 1, 3);
        let index = RepetitionIndexCode::new(short.k(), 3, xor_public()).unwrap();
        assert!(TwoStageCode::new(&sim, index, &short).is_err());
    }
}
