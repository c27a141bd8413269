//! Monte Carlo trials: encode under a causal state stream, pass through the
//! broadcast channel, decode at both receivers, and aggregate error rates.
//!
//! Decoding is exhaustive over messages with early exit on the second
//! candidate (zero or multiple candidates is an error by the tie rule).
//! Every stream a trial consumes derives from `(seed, tag, trial)`, so runs
//! are bit-reproducible regardless of thread count, and paired variants
//! (base vs permuted code) share message, state, and noise streams.

use crate::channel::BroadcastChannel;
use crate::error::{Error, Result};
use crate::prob::{JointPmf, TypeGrid};
use crate::sim::codebook::Codebook;
use crate::sim::jammer::JammerSpec;
use crate::sim::permute::Permutation;
use crate::sim::rng::{
    derive_rng, uniform_below, uniform_f64, TAG_JAM, TAG_MSG, TAG_NOISE, TAG_PERM,
};
use crate::sim::typicality::{
    counts_typical, pair1_targets, pair2_targets, triple1_targets, DecoderTables,
};
use crate::sim::words::{pack_row, pair_counts, triple_counts, words_per_row};

/// Row-visit budget per decode against an on-demand (virtual) codebook.
const SCAN_CAP: u64 = 1 << 24;

/// Verdicts and diagnostics of one coding trial. Candidate counts saturate
/// at 2 because the scan stops once uniqueness is impossible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialResult {
    pub dec1_ok: bool,
    pub dec2_ok: bool,
    pub dec1_candidates: u32,
    pub dec2_candidates: u32,
    /// Observed state letter counts.
    pub state_counts: Vec<u32>,
}

/// Aggregated error counts over a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunStats {
    pub trials: u64,
    pub dec1_errors: u64,
    pub dec2_errors: u64,
    /// Trials where either decoder failed.
    pub total_errors: u64,
}

impl RunStats {
    pub(crate) fn absorb(&mut self, r: &TrialResult) {
        self.trials += 1;
        if !r.dec1_ok {
            self.dec1_errors += 1;
        }
        if !r.dec2_ok {
            self.dec2_errors += 1;
        }
        if !r.dec1_ok || !r.dec2_ok {
            self.total_errors += 1;
        }
    }

    pub(crate) fn merge(&mut self, o: &RunStats) {
        self.trials += o.trials;
        self.dec1_errors += o.dec1_errors;
        self.dec2_errors += o.dec2_errors;
        self.total_errors += o.total_errors;
    }

    pub fn dec1_rate(&self) -> f64 {
        self.dec1_errors as f64 / self.trials.max(1) as f64
    }

    pub fn dec2_rate(&self) -> f64 {
        self.dec2_errors as f64 / self.trials.max(1) as f64
    }

    pub fn total_rate(&self) -> f64 {
        self.total_errors as f64 / self.trials.max(1) as f64
    }

    pub fn total_wilson(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.total_errors, self.trials, z)
    }
}

/// Wilson score interval for an error proportion.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

enum DecodeMode {
    /// Interval tables; binary alphabets and a sorted binary-state grid.
    Tables { tab2: DecoderTables, tab1pre: DecoderTables, tab1: DecoderTables },
    /// Direct per-type checks for everything else.
    Generic { t2: Vec<JointPmf>, t1pre: Vec<JointPmf>, t1: Vec<JointPmf> },
}

#[derive(Clone, Copy)]
enum CodeVariant<'a> {
    Base,
    Permuted(&'a Permutation),
    /// Fresh uniform permutation per trial, shared by encoder and decoders.
    FreshPermutation,
}

#[derive(Clone, Copy)]
enum StateSource<'a> {
    FromJammer,
    Fixed(&'a [u8]),
}

pub struct Simulation {
    w: BroadcastChannel,
    cb: Codebook,
    jammer: JammerSpec,
    grid: TypeGrid,
    delta: f64,
    mode: DecodeMode,
}

impl Simulation {
    pub fn new(
        w: BroadcastChannel,
        cb: Codebook,
        jammer: JammerSpec,
        grid: TypeGrid,
        delta: f64,
    ) -> Result<Simulation> {
        if cb.xi().nx() != w.nx() || cb.xi().ns() != w.ns() {
            return Err(Error::shape(format!(
                "strategy map over ({}, {}) against channel ({}, {})",
                cb.xi().nx(),
                cb.xi().ns(),
                w.nx(),
                w.ns()
            )));
        }
        if grid.n() != cb.n() {
            return Err(Error::shape(format!(
                "type grid blocklength {} against codebook {}",
                grid.n(),
                cb.n()
            )));
        }
        if grid.is_empty() {
            return Err(Error::config("decoder type grid is empty"));
        }
        if grid.types()[0].len() != w.ns() {
            return Err(Error::shape("type grid state alphabet does not match the channel"));
        }
        if !(delta >= 0.0) {
            return Err(Error::domain(format!("decoder slack {delta} must be nonnegative")));
        }
        let t2 = pair2_targets(cb.p(), cb.xi(), &w, &grid)?;
        let t1pre = pair1_targets(cb.p(), cb.xi(), &w, &grid)?;
        let t1 = triple1_targets(cb.p(), cb.xi(), &w, &grid)?;
        let delta_pre = cb.xi().nu1() as f64 * delta;
        let binary = cb.is_binary() && w.ns() == 2 && w.ny1() == 2 && w.ny2() == 2;
        let mode = if binary {
            DecodeMode::Tables {
                tab2: DecoderTables::build(&t2, cb.n(), delta)?,
                tab1pre: DecoderTables::build(&t1pre, cb.n(), delta_pre)?,
                tab1: DecoderTables::build(&t1, cb.n(), delta)?,
            }
        } else {
            if cb.is_virtual() {
                return Err(Error::too_large(
                    "on-demand codebooks are only supported for fully binary systems",
                ));
            }
            DecodeMode::Generic { t2, t1pre, t1 }
        };
        Ok(Simulation { w, cb, jammer, grid, delta, mode })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.cb
    }

    pub fn channel(&self) -> &BroadcastChannel {
        &self.w
    }

    pub fn grid(&self) -> &TypeGrid {
        &self.grid
    }

    pub fn jammer(&self) -> &JammerSpec {
        &self.jammer
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// One trial of the base code at explicit messages, states, and per-letter
    /// noise variates.
    pub fn outcome(&self, m0: u64, m1: u64, s: &[u8], noise: &[f64]) -> Result<TrialResult> {
        self.outcome_inner(m0, m1, None, s, noise)
    }

    /// One trial of the permuted code (encoder reads permuted strategy rows,
    /// decoders see the permuted channel output).
    pub fn outcome_permuted(
        &self,
        m0: u64,
        m1: u64,
        pi: &Permutation,
        s: &[u8],
        noise: &[f64],
    ) -> Result<TrialResult> {
        self.outcome_inner(m0, m1, Some(pi), s, noise)
    }

    /// Jammer-driven trials of the base code.
    pub fn run(&self, trials: u64, seed: u64) -> Result<RunStats> {
        self.run_impl(trials, seed, CodeVariant::Base, StateSource::FromJammer, thread_count())
    }

    /// Jammer-driven trials of one fixed permuted code.
    pub fn run_permuted(&self, pi: &Permutation, trials: u64, seed: u64) -> Result<RunStats> {
        self.run_impl(trials, seed, CodeVariant::Permuted(pi), StateSource::FromJammer, thread_count())
    }

    /// Jammer-driven trials of the permutation random code: a fresh uniform
    /// permutation per trial, shared by the encoder and both decoders.
    pub fn run_permutation_ensemble(&self, trials: u64, seed: u64) -> Result<RunStats> {
        self.run_impl(trials, seed, CodeVariant::FreshPermutation, StateSource::FromJammer, thread_count())
    }

    /// Trials of the base code against one fixed state sequence.
    pub fn run_fixed_state(&self, s: &[u8], trials: u64, seed: u64) -> Result<RunStats> {
        self.run_impl(trials, seed, CodeVariant::Base, StateSource::Fixed(s), thread_count())
    }

    /// Trials of one fixed permuted code against one fixed state sequence.
    pub fn run_fixed_state_permuted(
        &self,
        s: &[u8],
        pi: &Permutation,
        trials: u64,
        seed: u64,
    ) -> Result<RunStats> {
        self.run_impl(trials, seed, CodeVariant::Permuted(pi), StateSource::Fixed(s), thread_count())
    }

    /// Trials of the permutation random code against one fixed state sequence.
    pub fn run_fixed_state_ensemble(&self, s: &[u8], trials: u64, seed: u64) -> Result<RunStats> {
        self.run_impl(trials, seed, CodeVariant::FreshPermutation, StateSource::Fixed(s), thread_count())
    }

    #[cfg(test)]
    pub(crate) fn run_with_threads(&self, trials: u64, seed: u64, threads: usize) -> Result<RunStats> {
        self.run_impl(trials, seed, CodeVariant::Base, StateSource::FromJammer, threads)
    }

    fn run_impl(
        &self,
        trials: u64,
        seed: u64,
        variant: CodeVariant<'_>,
        state: StateSource<'_>,
        threads: usize,
    ) -> Result<RunStats> {
        if trials == 0 {
            return Err(Error::domain("a run needs at least one trial"));
        }
        if let StateSource::Fixed(s) = state {
            if s.len() != self.cb.n() {
                return Err(Error::shape(format!(
                    "fixed state length {} against blocklength {}",
                    s.len(),
                    self.cb.n()
                )));
            }
        }
        let threads = threads.max(1).min(trials as usize);
        if threads <= 1 {
            return self.run_range(0, trials, seed, variant, state);
        }
        let per = trials.div_ceil(threads as u64);
        let chunks: Vec<(u64, u64)> =
            (0..threads as u64).map(|c| (c * per, ((c + 1) * per).min(trials))).filter(|(a, b)| a < b).collect();
        let results: Vec<Result<RunStats>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .iter()
                .map(|&(lo, hi)| scope.spawn(move || self.run_range(lo, hi, seed, variant, state)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("trial worker panicked")).collect()
        });
        let mut stats = RunStats::default();
        for r in results {
            stats.merge(&r?);
        }
        Ok(stats)
    }

    fn run_range(
        &self,
        lo: u64,
        hi: u64,
        seed: u64,
        variant: CodeVariant<'_>,
        state: StateSource<'_>,
    ) -> Result<RunStats> {
        let n = self.cb.n();
        let mut stats = RunStats::default();
        let mut noise = vec![0.0f64; n];
        for t in lo..hi {
            let mut msg_rng = derive_rng(seed, TAG_MSG, t);
            let m0 = uniform_below(&mut msg_rng, self.cb.m0_count());
            let m1 = uniform_below(&mut msg_rng, self.cb.m1_count());
            let s_own;
            let s: &[u8] = match state {
                StateSource::Fixed(s) => s,
                StateSource::FromJammer => {
                    let mut jam_rng = derive_rng(seed, TAG_JAM, t);
                    s_own = self.jammer.sequence(n, self.w.ns(), &mut jam_rng)?;
                    &s_own
                }
            };
            let mut noise_rng = derive_rng(seed, TAG_NOISE, t);
            for v in noise.iter_mut() {
                *v = uniform_f64(&mut noise_rng);
            }
            let res = match variant {
                CodeVariant::Base => self.outcome_inner(m0, m1, None, s, &noise)?,
                CodeVariant::Permuted(pi) => self.outcome_inner(m0, m1, Some(pi), s, &noise)?,
                CodeVariant::FreshPermutation => {
                    let mut perm_rng = derive_rng(seed, TAG_PERM, t);
                    let pi = Permutation::random(n, &mut perm_rng);
                    self.outcome_inner(m0, m1, Some(&pi), s, &noise)?
                }
            };
            stats.absorb(&res);
        }
        Ok(stats)
    }

    fn outcome_inner(
        &self,
        m0: u64,
        m1: u64,
        pi: Option<&Permutation>,
        s: &[u8],
        noise: &[f64],
    ) -> Result<TrialResult> {
        let (y1, y2) = self.channel_pass(m0, m1, pi, s, noise)?;
        let (z1, z2) = match pi {
            Some(p) => (p.apply(&y1), p.apply(&y2)),
            None => (y1, y2),
        };
        let (d1, c1) = self.decode1_output(&z1)?;
        let (d2, c2) = self.decode2_output(&z2)?;
        let ns = self.w.ns();
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

    /// Encode (optionally through a permuted code) and pass through the
    /// channel, returning the raw received words.
    pub(crate) fn channel_pass(
        &self,
        m0: u64,
        m1: u64,
        pi: Option<&Permutation>,
        s: &[u8],
        noise: &[f64],
    ) -> Result<(Vec<u8>, Vec<u8>)> {
        let n = self.cb.n();
        if s.len() != n || noise.len() != n {
            return Err(Error::shape(format!(
                "state/noise lengths ({}, {}) against blocklength {n}",
                s.len(),
                noise.len()
            )));
        }
        if m0 >= self.cb.m0_count() || m1 >= self.cb.m1_count() {
            return Err(Error::domain(format!(
                "message ({m0}, {m1}) outside ({}, {})",
                self.cb.m0_count(),
                self.cb.m1_count()
            )));
        }
        if let Some(pi) = pi {
            if pi.len() != n {
                return Err(Error::shape("permutation length does not match the blocklength"));
            }
        }
        let ns = self.w.ns();
        for &si in s {
            if si as usize >= ns {
                return Err(Error::domain(format!("state {si} outside alphabet {ns}")));
            }
        }
        let mut u0 = Vec::new();
        let mut u1 = Vec::new();
        self.cb.u0_symbols(m0, &mut u0);
        self.cb.u1_symbols(m0, m1, &u0, &mut u1);
        let xi = self.cb.xi();
        let ny2 = self.w.ny2();
        let mut y1 = vec![0u8; n];
        let mut y2 = vec![0u8; n];
        for i in 0..n {
            let j = pi.map_or(i, |p| p.image(i));
            let x = xi.apply(u0[j] as usize, u1[j] as usize, s[i] as usize);
            let f = sample_row(self.w.output_row(x, s[i] as usize), noise[i]);
            y1[i] = (f / ny2) as u8;
            y2[i] = (f % ny2) as u8;
        }
        Ok((y1, y2))
    }

    /// Receiver-1 verdict on an (already permuted) output word.
    pub(crate) fn decode1_output(&self, z1: &[u8]) -> Result<(Option<(u64, u64)>, u32)> {
        match &self.mode {
            DecodeMode::Tables { tab1pre, tab1, .. } => {
                let mut z1p = vec![0u64; words_per_row(self.cb.n())];
                pack_row(z1, &mut z1p);
                self.decode1_tables(tab1pre, tab1, &z1p)
            }
            DecodeMode::Generic { t1pre, t1, .. } => self.decode1_generic(t1pre, t1, z1),
        }
    }

    /// Receiver-2 verdict on an (already permuted) output word.
    pub(crate) fn decode2_output(&self, z2: &[u8]) -> Result<(Option<u64>, u32)> {
        match &self.mode {
            DecodeMode::Tables { tab2, .. } => {
                let mut z2p = vec![0u64; words_per_row(self.cb.n())];
                pack_row(z2, &mut z2p);
                self.decode2_tables(tab2, &z2p)
            }
            DecodeMode::Generic { t2, .. } => self.decode2_generic(t2, z2),
        }
    }

    fn bump_scan(&self, scanned: &mut u64) -> Result<()> {
        *scanned += 1;
        if self.cb.is_virtual() && *scanned > SCAN_CAP {
            return Err(Error::too_large(format!(
                "decoder visited more than {SCAN_CAP} on-demand rows in one trial; \
                 this configuration is outside the simulator's envelope"
            )));
        }
        Ok(())
    }

    /// Receiver-2 scan: unique cloud index whose pair type with `z2` is
    /// accepted, plus the candidate count (saturated at 2).
    fn decode2_tables(&self, tab2: &DecoderTables, z2: &[u64]) -> Result<(Option<u64>, u32)> {
        let n = self.cb.n();
        let mut sym = Vec::new();
        let mut rowbuf = Vec::new();
        let mut found = None;
        let mut count = 0u32;
        let mut scanned = 0u64;
        for m0 in 0..self.cb.m0_count() {
            self.bump_scan(&mut scanned)?;
            let row = self.cb.u0_packed(m0, &mut sym, &mut rowbuf);
            if tab2.accepts(&pair_counts(row, z2, n)) {
                count += 1;
                if count >= 2 {
                    return Ok((None, 2));
                }
                found = Some(m0);
            }
        }
        Ok((if count == 1 { found } else { None }, count))
    }

    /// Receiver-1 scan over message pairs with a cloud prefilter: the pair
    /// type test at `nu1 * delta` is implied by any accepted triple, so
    /// failing clouds are skipped without touching their satellites.
    fn decode1_tables(
        &self,
        tab1pre: &DecoderTables,
        tab1: &DecoderTables,
        z1: &[u64],
    ) -> Result<(Option<(u64, u64)>, u32)> {
        let n = self.cb.n();
        let mut sym0 = Vec::new();
        let mut row0buf = Vec::new();
        let mut sym1 = Vec::new();
        let mut row1buf = Vec::new();
        let mut found = None;
        let mut count = 0u32;
        let mut scanned = 0u64;
        for m0 in 0..self.cb.m0_count() {
            self.bump_scan(&mut scanned)?;
            let row0 = self.cb.u0_packed(m0, &mut sym0, &mut row0buf);
            if !tab1pre.accepts(&pair_counts(row0, z1, n)) {
                continue;
            }
            for m1 in 0..self.cb.m1_count() {
                self.bump_scan(&mut scanned)?;
                let row1 = self.cb.u1_packed(m0, m1, &sym0, &mut sym1, &mut row1buf);
                if tab1.accepts(&triple_counts(row0, row1, z1, n)) {
                    count += 1;
                    if count >= 2 {
                        return Ok((None, 2));
                    }
                    found = Some((m0, m1));
                }
            }
        }
        Ok((if count == 1 { found } else { None }, count))
    }

    fn decode2_generic(&self, t2: &[JointPmf], z2: &[u8]) -> Result<(Option<u64>, u32)> {
        let n = self.cb.n();
        let ny2 = self.w.ny2();
        let mut sym = Vec::new();
        let mut counts = vec![0u32; self.cb.xi().nu0() * ny2];
        let mut found = None;
        let mut count = 0u32;
        for m0 in 0..self.cb.m0_count() {
            self.cb.u0_symbols(m0, &mut sym);
            counts.fill(0);
            for i in 0..n {
                counts[sym[i] as usize * ny2 + z2[i] as usize] += 1;
            }
            if t2.iter().any(|t| counts_typical(&counts, n, t, self.delta)) {
                count += 1;
                if count >= 2 {
                    return Ok((None, 2));
                }
                found = Some(m0);
            }
        }
        Ok((if count == 1 { found } else { None }, count))
    }

    fn decode1_generic(
        &self,
        t1pre: &[JointPmf],
        t1: &[JointPmf],
        z1: &[u8],
    ) -> Result<(Option<(u64, u64)>, u32)> {
        let n = self.cb.n();
        let ny1 = self.w.ny1();
        let nu1 = self.cb.xi().nu1();
        let delta_pre = nu1 as f64 * self.delta;
        let mut sym0 = Vec::new();
        let mut sym1 = Vec::new();
        let mut pre = vec![0u32; self.cb.xi().nu0() * ny1];
        let mut counts = vec![0u32; self.cb.xi().nu0() * nu1 * ny1];
        let mut found = None;
        let mut count = 0u32;
        for m0 in 0..self.cb.m0_count() {
            self.cb.u0_symbols(m0, &mut sym0);
            pre.fill(0);
            for i in 0..n {
                pre[sym0[i] as usize * ny1 + z1[i] as usize] += 1;
            }
            if !t1pre.iter().any(|t| counts_typical(&pre, n, t, delta_pre)) {
                continue;
            }
            for m1 in 0..self.cb.m1_count() {
                self.cb.u1_symbols(m0, m1, &sym0, &mut sym1);
                counts.fill(0);
                for i in 0..n {
                    counts[(sym0[i] as usize * nu1 + sym1[i] as usize) * ny1 + z1[i] as usize] += 1;
                }
                if t1.iter().any(|t| counts_typical(&counts, n, t, self.delta)) {
                    count += 1;
                    if count >= 2 {
                        return Ok((None, 2));
                    }
                    found = Some((m0, m1));
                }
            }
        }
        Ok((if count == 1 { found } else { None }, count))
    }
}

/// Worker count: `AVBC_THREADS` when set to a positive integer, otherwise
/// the machine's available parallelism.
pub(crate) fn thread_count() -> usize {
    if let Ok(v) = std::env::var("AVBC_THREADS") {
        if let Ok(t) = v.trim().parse::<usize>() {
            if t >= 1 {
                return t;
            }
        }
    }
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Inverse-CDF draw from an unnormalized-by-construction probability row.
pub(crate) fn sample_row(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    row.len() - 1
}
