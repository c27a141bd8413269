//! Joint-typicality acceptance reduced to integer table lookups.
//!
//! A decoder accepts a candidate when its joint type with the received word
//! is within `delta` of the strategy-channel law for *some* state type in the
//! governing grid. For binary-state grids each cell's target probability is
//! affine in the state frequency, so the grid positions accepting a given
//! cell count form a contiguous run; acceptance over the whole grid then
//! collapses to intersecting one precomputed position interval per cell.
//! Tables are built from the same letter-frequency predicate the generic
//! checker uses, so both paths agree verdict-for-verdict.

use crate::channel::{induced_joint, BroadcastChannel, StrategyDist, StrategyMap};
use crate::error::{Error, Result};
use crate::prob::{JointPmf, TypeGrid, ZERO_MASS};

/// One cell of the typicality predicate: empirical frequency within `delta`
/// of `p`, with zero-probability cells required to stay empty.
#[inline]
pub(crate) fn cell_ok(c: u32, inv_n: f64, p: f64, delta: f64) -> bool {
    if p < ZERO_MASS {
        c == 0
    } else {
        (c as f64 * inv_n - p).abs() <= delta
    }
}

/// Typicality of a full count vector against one target law.
pub(crate) fn counts_typical(counts: &[u32], n: usize, target: &JointPmf, delta: f64) -> bool {
    let inv_n = 1.0 / n as f64;
    counts
        .iter()
        .zip(target.probs())
        .all(|(&c, &p)| cell_ok(c, inv_n, p, delta))
}

/// Precomputed acceptance intervals for one decoder test over one grid.
#[derive(Debug, Clone)]
pub struct DecoderTables {
    n: usize,
    cells: usize,
    grid_len: usize,
    /// Per (cell, count): inclusive accepted position range; min > max = empty.
    gmin: Vec<u32>,
    gmax: Vec<u32>,
}

impl DecoderTables {
    /// Build from per-grid-position target laws (one `JointPmf` per state type,
    /// all of the same shape; the grid must be sorted so that every cell's
    /// target is monotone along it, as binary-state grids are).
    pub(crate) fn build(targets: &[JointPmf], n: usize, delta: f64) -> Result<DecoderTables> {
        if targets.is_empty() {
            return Err(Error::config("decoder tables need a nonempty grid"));
        }
        if delta < 0.0 {
            return Err(Error::domain(format!("typicality slack {delta} is negative")));
        }
        let cells = targets[0].probs().len();
        if targets.iter().any(|t| t.probs().len() != cells) {
            return Err(Error::shape("grid targets have mixed shapes"));
        }
        let grid_len = targets.len();
        let inv_n = 1.0 / n as f64;
        let empty_c = (1u32, 0u32);
        let mut cmin = vec![0u32; grid_len * cells];
        let mut cmax = vec![0u32; grid_len * cells];
        for (g, t) in targets.iter().enumerate() {
            for (k, &p) in t.probs().iter().enumerate() {
                let mut range = empty_c;
                let mut prev_ok = false;
                for c in 0..=n as u32 {
                    let ok = cell_ok(c, inv_n, p, delta);
                    if ok && range.0 > range.1 {
                        range = (c, c);
                    } else if ok {
                        if !prev_ok {
                            return Err(Error::config(
                                "typicality acceptance is not contiguous in the count",
                            ));
                        }
                        range.1 = c;
                    }
                    prev_ok = ok;
                }
                cmin[g * cells + k] = range.0;
                cmax[g * cells + k] = range.1;
            }
        }
        let empty_g = (grid_len as u32, 0u32);
        let mut gmin = vec![0u32; cells * (n + 1)];
        let mut gmax = vec![0u32; cells * (n + 1)];
        for k in 0..cells {
            for c in 0..=n as u32 {
                let mut range = empty_g;
                let mut prev_ok = false;
                for g in 0..grid_len {
                    let ok = cmin[g * cells + k] <= c && c <= cmax[g * cells + k];
                    if ok && range.0 > range.1 {
                        range = (g as u32, g as u32);
                    } else if ok {
                        if !prev_ok {
                            return Err(Error::config(
                                "typicality acceptance is not contiguous along the grid; \
                                 decoder tables require a sorted binary-state grid",
                            ));
                        }
                        range.1 = g as u32;
                    }
                    prev_ok = ok;
                }
                gmin[k * (n + 1) + c as usize] = range.0;
                gmax[k * (n + 1) + c as usize] = range.1;
            }
        }
        Ok(DecoderTables { n, cells, grid_len, gmin, gmax })
    }

    /// True iff some grid state type accepts this count vector.
    #[inline]
    pub(crate) fn accepts(&self, counts: &[u32]) -> bool {
        debug_assert_eq!(counts.len(), self.cells);
        let mut lo = 0u32;
        let mut hi = (self.grid_len - 1) as u32;
        for (k, &c) in counts.iter().enumerate() {
            let i = k * (self.n + 1) + c as usize;
            lo = lo.max(self.gmin[i]);
            hi = hi.min(self.gmax[i]);
            if lo > hi {
                return false;
            }
        }
        true
    }

    /// True iff grid position `g` accepts this count vector.
    #[cfg(test)]
    pub(crate) fn accepts_at(&self, counts: &[u32], g: usize) -> bool {
        let g = g as u32;
        counts.iter().enumerate().all(|(k, &c)| {
            let i = k * (self.n + 1) + c as usize;
            self.gmin[i] <= g && g <= self.gmax[i]
        })
    }
}

fn grid_targets(
    p: &StrategyDist,
    xi: &StrategyMap,
    w: &BroadcastChannel,
    grid: &TypeGrid,
    axes: &[usize],
) -> Result<Vec<JointPmf>> {
    grid.types()
        .iter()
        .map(|q| induced_joint(p, xi, w, q)?.marginal(axes))
        .collect()
}

/// Decoder-2 targets: the (U0, Y2) law per grid state type.
pub(crate) fn pair2_targets(
    p: &StrategyDist,
    xi: &StrategyMap,
    w: &BroadcastChannel,
    grid: &TypeGrid,
) -> Result<Vec<JointPmf>> {
    grid_targets(p, xi, w, grid, &[0, 3])
}

/// Decoder-1 cloud-prefilter targets: the (U0, Y1) law per grid state type.
pub(crate) fn pair1_targets(
    p: &StrategyDist,
    xi: &StrategyMap,
    w: &BroadcastChannel,
    grid: &TypeGrid,
) -> Result<Vec<JointPmf>> {
    grid_targets(p, xi, w, grid, &[0, 2])
}

/// Decoder-1 targets: the (U0, U1, Y1) law per grid state type.
pub(crate) fn triple1_targets(
    p: &StrategyDist,
    xi: &StrategyMap,
    w: &BroadcastChannel,
    grid: &TypeGrid,
) -> Result<Vec<JointPmf>> {
    grid_targets(p, xi, w, grid, &[0, 1, 2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{derive_rng, uniform_below, uniform_f64};
    use rand_chacha::ChaCha12Rng;

    fn random_channel(rng: &mut ChaCha12Rng) -> BroadcastChannel {
        let mut w = Vec::with_capacity(16);
        for _ in 0..4 {
            let mut joint = [0.0f64; 4];
            let mut tot = 0.0;
            for v in joint.iter_mut() {
                *v = uniform_f64(rng) + 0.05;
                tot += *v;
            }
            w.extend(joint.iter().map(|v| v / tot));
        }
        BroadcastChannel::new(2, 2, 2, 2, w).unwrap()
    }

    #[test]
    fn test_tables_match_generic_checker() {
        let mut rng = derive_rng(11, 0x77, 0);
        for case in 0..20 {
            let n = 8 + (case % 3) * 5;
            let w = random_channel(&mut rng);
            let gamma = 0.2 + 0.6 * uniform_f64(&mut rng);
            let beta = 0.2 + 0.6 * uniform_f64(&mut rng);
            let p = StrategyDist::product_bernoulli(gamma, beta).unwrap();
            let xi = StrategyMap::xor3();
            let grid = TypeGrid::full(n, 2).unwrap();
            let targets = pair2_targets(&p, &xi, &w, &grid).unwrap();
            let tab = DecoderTables::build(&targets, n, 0.12).unwrap();
            // all count vectors with the right total
            for c11 in 0..=n as u32 {
                for c10 in 0..=(n as u32 - c11) {
                    for c01 in 0..=(n as u32 - c11 - c10) {
                        let c00 = n as u32 - c11 - c10 - c01;
                        let counts = [c00, c01, c10, c11];
                        let generic =
                            targets.iter().any(|t| counts_typical(&counts, n, t, 0.12));
                        assert_eq!(tab.accepts(&counts), generic, "counts {counts:?} n {n}");
                    }
                }
            }
        }
    }

    #[test]
    fn test_accepts_at_matches_single_target() {
        let mut rng = derive_rng(13, 0x78, 0);
        let n = 12;
        let w = random_channel(&mut rng);
        let p = StrategyDist::product_bernoulli(0.5, 0.3).unwrap();
        let xi = StrategyMap::xor3();
        let grid = TypeGrid::full(n, 2).unwrap();
        let targets = triple1_targets(&p, &xi, &w, &grid).unwrap();
        let tab = DecoderTables::build(&targets, n, 0.1).unwrap();
        for trial in 0..500 {
            let g = (trial % grid.len()) as usize;
            let mut counts = [0u32; 8];
            for _ in 0..n {
                counts[uniform_below(&mut rng, 8) as usize] += 1;
            }
            assert_eq!(
                tab.accepts_at(&counts, g),
                counts_typical(&counts, n, &targets[g], 0.1)
            );
        }
    }

    #[test]
    fn test_zero_mass_rule_respected() {
        // degenerate strategy distribution puts zero mass on u0 = 1 cells
        let joint = JointPmf::new(vec![2, 2], vec![0.7, 0.3, 0.0, 0.0]).unwrap();
        let p = StrategyDist::from_joint(joint).unwrap();
        let xi = StrategyMap::xor3();
        let w = BroadcastChannel::example1(0.1, 0.9, 0.2).unwrap();
        let n = 10;
        let grid = TypeGrid::full(n, 2).unwrap();
        let targets = pair2_targets(&p, &xi, &w, &grid).unwrap();
        let tab = DecoderTables::build(&targets, n, 0.5).unwrap();
        // a count in a zero-probability cell rejects even at huge delta
        assert!(!tab.accepts(&[4, 5, 1, 0]));
        assert!(tab.accepts(&[5, 5, 0, 0]));
    }
}
