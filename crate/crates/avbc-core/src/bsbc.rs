//! Closed-form capacity frontiers for two binary symmetric broadcast
//! families with a jamming state.
//!
//! Both families fold the binary state into an effective crossover through
//! the xor strategy (send the auxiliary bit when `s = 0`, its complement when
//! `s = 1`): under state frequency `q` the strategy channel to the stronger
//! user is a BSC with crossover `(1-q)·θ₀ + q·(1-θ₁)`. The frontiers are
//! unions over an auxiliary Bernoulli parameter `β`; `h(a ⊛ b) = h(a ⊛ (1-b))`
//! folds the sweep onto `β ∈ [0, ½]`.

use serde::{Deserialize, Serialize};

use crate::channel::BroadcastChannel;
use crate::error::{Error, Result};
use crate::prob::{binary_convolve, binary_entropy};
use crate::regions::{RateRegion, RegionGrid};

/// Default resolution of the `β` sweep on `[0, ½]`.
pub const DEFAULT_BETA_POINTS: usize = 1001;

fn check_prob(x: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || x.is_nan() {
        return Err(Error::domain(format!("{name} = {x} is not a probability")));
    }
    Ok(())
}

/// Physically degraded family: `Y₁ = X ⊕ Z_S`, `Y₂ = Y₁ ⊕ N` with
/// `Z_s ~ Bern(θ_s)` and `N ~ Bern(α)`. Private messages only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example1Params {
    pub theta0: f64,
    pub theta1: f64,
    pub alpha: f64,
}

impl Example1Params {
    /// Requires `θ₀ ≤ 1−θ₁ ≤ ½` (state 1 is the noisier one) and `α < ½`.
    pub fn new(theta0: f64, theta1: f64, alpha: f64) -> Result<Example1Params> {
        check_prob(theta0, "theta0")?;
        check_prob(theta1, "theta1")?;
        check_prob(alpha, "alpha")?;
        if theta0 > 1.0 - theta1 {
            return Err(Error::domain(format!(
                "theta0 = {theta0} must not exceed 1 - theta1 = {}",
                1.0 - theta1
            )));
        }
        if 1.0 - theta1 > 0.5 {
            return Err(Error::domain(format!("1 - theta1 = {} must not exceed 1/2", 1.0 - theta1)));
        }
        if alpha >= 0.5 {
            return Err(Error::domain(format!("alpha = {alpha} must be below 1/2")));
        }
        Ok(Example1Params { theta0, theta1, alpha })
    }

    /// Effective strategy-channel crossover to user 1 under state frequency `q`.
    fn crossover(&self, q: f64) -> f64 {
        (1.0 - q) * self.theta0 + q * (1.0 - self.theta1)
    }

    pub fn channel(&self) -> Result<BroadcastChannel> {
        BroadcastChannel::example1(self.theta0, self.theta1, self.alpha)
    }
}

/// Which side of the `ε₀ = 1−ε₁` split a parameter set falls on. On the
/// boundary the two closed forms coincide and `Case1` is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Example2Case {
    Case1,
    Case2,
}

/// Degraded-message-set family: `Y₁ = X ⊕ Z_S` with `Z_s ~ Bern(θ_s)` and
/// `Y₂ = X ⊕ N_S` with `N_s ~ Bern(ε_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example2Params {
    pub theta0: f64,
    pub theta1: f64,
    pub eps0: f64,
    pub eps1: f64,
}

impl Example2Params {
    /// Requires `θ₀ ≤ ε₀ ≤ ½ ≤ ε₁`, `½ ≤ θ₁`, and `θ₀ ≤ 1−θ₁`: in state 0
    /// user 2 is the noisier one and state 1 flips more often than not for
    /// both users, with state 1 the worse state for user 1. (The split-case
    /// parameter sets have `ε₁ > θ₁`, so no ordering between those two is
    /// imposed.)
    pub fn new(theta0: f64, theta1: f64, eps0: f64, eps1: f64) -> Result<Example2Params> {
        check_prob(theta0, "theta0")?;
        check_prob(theta1, "theta1")?;
        check_prob(eps0, "eps0")?;
        check_prob(eps1, "eps1")?;
        if !(theta0 <= eps0 && eps0 <= 0.5) {
            return Err(Error::domain(format!(
                "need theta0 <= eps0 <= 1/2, got theta0 = {theta0}, eps0 = {eps0}"
            )));
        }
        if !(0.5 <= eps1 && 0.5 <= theta1) {
            return Err(Error::domain(format!(
                "need eps1 and theta1 at least 1/2, got eps1 = {eps1}, theta1 = {theta1}"
            )));
        }
        if theta0 > 1.0 - theta1 {
            return Err(Error::domain(format!(
                "theta0 = {theta0} must not exceed 1 - theta1 = {}",
                1.0 - theta1
            )));
        }
        Ok(Example2Params { theta0, theta1, eps0, eps1 })
    }

    /// `ε₀ ≤ 1−ε₁`: a single state frequency is worst for both constraints.
    pub fn is_case1(&self) -> bool {
        self.eps0 <= 1.0 - self.eps1
    }

    /// `1−ε₁ ≤ ε₀`: the worst state frequencies for the two constraints
    /// differ and the bounds split.
    pub fn is_case2(&self) -> bool {
        1.0 - self.eps1 <= self.eps0
    }

    pub fn case(&self) -> Example2Case {
        if self.is_case1() {
            Example2Case::Case1
        } else {
            Example2Case::Case2
        }
    }

    /// Strategy-channel crossovers `(to user 1, to user 2)` at frequency `q`.
    fn crossovers(&self, q: f64) -> (f64, f64) {
        (
            (1.0 - q) * self.theta0 + q * (1.0 - self.theta1),
            (1.0 - q) * self.eps0 + q * (1.0 - self.eps1),
        )
    }

    pub fn channel(&self) -> Result<BroadcastChannel> {
        BroadcastChannel::example2(self.theta0, self.theta1, self.eps0, self.eps1)
    }
}

fn beta_sweep(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::config(format!("beta sweep needs at least 2 points, got {points}")));
    }
    Ok((0..points).map(|i| 0.5 * i as f64 / (points - 1) as f64).collect())
}

/// Union of the per-`β` rectangles `{x ≤ x_lim(β), y ≤ y_lim(β)}`.
fn sweep_union(
    betas: &[f64],
    grid: RegionGrid,
    mut corner: impl FnMut(f64) -> Result<(f64, f64)>,
) -> Result<RateRegion> {
    let mut region = RateRegion::empty(grid);
    for &beta in betas {
        let (x_lim, y_lim) = corner(beta)?;
        region = region.union(&RateRegion::rectangle(x_lim, y_lim, grid))?;
    }
    Ok(region)
}

/// Per-`q` member region of the first family: the known-state-frequency
/// frontier `∪_β {R₂ ≤ 1−h(α ⊛ β ⊛ d_q), R₁ ≤ h(β ⊛ d_q) − h(d_q)}` with
/// `d_q = (1−q)θ₀ + q(1−θ₁)`. Axes `(R₂, R₁)`.
pub fn example1_member(
    params: &Example1Params,
    q: f64,
    beta_points: usize,
    grid: RegionGrid,
) -> Result<RateRegion> {
    check_prob(q, "q")?;
    let d = params.crossover(q);
    let hd = binary_entropy(d)?;
    let region = sweep_union(&beta_sweep(beta_points)?, grid, |beta| {
        let bd = binary_convolve(beta, d)?;
        let x = 1.0 - binary_entropy(binary_convolve(params.alpha, bd)?)?;
        let y = binary_entropy(bd)? - hd;
        Ok((x, y))
    })?;
    Ok(region.with_labels("R2", "R1"))
}

/// Worst-state capacity of the first family:
/// `∪_β {R₂ ≤ 1−h(α ⊛ β ⊛ θ₁), R₁ ≤ h(β ⊛ θ₁) − h(θ₁)}`. Axes `(R₂, R₁)`.
///
/// Equals [`example1_member`] at `q = 1` (entropy is symmetric in
/// `θ₁ ↔ 1−θ₁`); the separate formula keeps this evaluator independent of
/// the per-`q` sweep.
pub fn example1_capacity(
    params: &Example1Params,
    beta_points: usize,
    grid: RegionGrid,
) -> Result<RateRegion> {
    let ht1 = binary_entropy(params.theta1)?;
    let region = sweep_union(&beta_sweep(beta_points)?, grid, |beta| {
        let bt = binary_convolve(beta, params.theta1)?;
        let x = 1.0 - binary_entropy(binary_convolve(params.alpha, bt)?)?;
        let y = binary_entropy(bt)? - ht1;
        Ok((x, y))
    })?;
    Ok(region.with_labels("R2", "R1"))
}

/// Known-state-frequency capacity of the second family:
/// `∪_β {R₀ ≤ 1−h(β ⊛ e_q), R₁ ≤ h(β ⊛ d_q) − h(d_q)}` with
/// `d_q = (1−q)θ₀ + q(1−θ₁)`, `e_q = (1−q)ε₀ + q(1−ε₁)`. Axes `(R₀, R₁)`.
pub fn example2_rp_capacity(
    params: &Example2Params,
    q: f64,
    beta_points: usize,
    grid: RegionGrid,
) -> Result<RateRegion> {
    check_prob(q, "q")?;
    let (d, e) = params.crossovers(q);
    let hd = binary_entropy(d)?;
    sweep_union(&beta_sweep(beta_points)?, grid, |beta| {
        let x = 1.0 - binary_entropy(binary_convolve(beta, e)?)?;
        let y = binary_entropy(binary_convolve(beta, d)?)? - hd;
        Ok((x, y))
    })
}

/// Worst-state capacity of the second family when one frequency dominates
/// (`ε₀ ≤ 1−ε₁`): the `q = 1` member, by the same code path.
pub fn example2_avbc_case1(
    params: &Example2Params,
    beta_points: usize,
    grid: RegionGrid,
) -> Result<RateRegion> {
    if !params.is_case1() {
        return Err(Error::domain(format!(
            "single-frequency form needs eps0 <= 1 - eps1, got eps0 = {}, 1 - eps1 = {}",
            params.eps0,
            1.0 - params.eps1
        )));
    }
    example2_rp_capacity(params, 1.0, beta_points, grid)
}

/// Bounds for the split case (`1−ε₁ ≤ ε₀`): the inner bound pairs the worst
/// crossover per constraint (`ε₀` for user 2, `1−θ₁` for user 1) inside one
/// sweep; the outer bound intersects the two endpoint-frequency capacities.
pub fn example2_avbc_case2_bounds(
    params: &Example2Params,
    beta_points: usize,
    grid: RegionGrid,
) -> Result<(RateRegion, RateRegion)> {
    if !params.is_case2() {
        return Err(Error::domain(format!(
            "split form needs 1 - eps1 <= eps0, got 1 - eps1 = {}, eps0 = {}",
            1.0 - params.eps1,
            params.eps0
        )));
    }
    let d1 = 1.0 - params.theta1;
    let hd1 = binary_entropy(d1)?;
    let inner = sweep_union(&beta_sweep(beta_points)?, grid, |beta| {
        let x = 1.0 - binary_entropy(binary_convolve(beta, params.eps0)?)?;
        let y = binary_entropy(binary_convolve(beta, d1)?)? - hd1;
        Ok((x, y))
    })?;
    let outer = example2_rp_capacity(params, 0.0, beta_points, grid)?
        .intersection(&example2_rp_capacity(params, 1.0, beta_points, grid)?)?;
    Ok((inner, outer))
}
