//! Symmetrizability of single-user state channels.
//!
//! A channel `V(y|u,s)` is symmetrizable when a stochastic kernel `J(s|u)`
//! makes the jammed outputs statistically confusable between any two inputs:
//!
//! ```text
//! sum_s J(s|u') V(y|u,s) = sum_s J(s|u) V(y|u',s)   for all u != u', y.
//! ```
//!
//! A jammer drawing its state from `J(·|u'')` for a spoofed input word
//! `u''` then makes the true and spoofed words indistinguishable on average,
//! forcing the deterministic-code capacity to zero. Feasibility is decided
//! as a phase-1 linear program in the `|U||S|` kernel entries.

use crate::channel::{strategy_channels, BroadcastChannel, PublicStrategyMap, StateDmc, StrategyMap};
use crate::error::{Error, Result};
use crate::lp;

/// Default feasibility tolerance (total constraint violation, max over rows
/// bounded by the phase-1 objective).
pub const DEFAULT_SYM_TOL: f64 = 1e-9;

/// A symmetrizing kernel `J(s|u)`, row-stochastic over `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizerWitness {
    nu: usize,
    ns: usize,
    /// row-major over (u, s)
    kernel: Vec<f64>,
}

impl SymmetrizerWitness {
    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn ns(&self) -> usize {
        self.ns
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    #[inline]
    pub fn prob(&self, u: usize, s: usize) -> f64 {
        self.kernel[u * self.ns + s]
    }

    /// Largest violation of the defining equalities and the row sums under
    /// the given channel; a valid witness keeps this within the solver
    /// tolerance.
    pub fn max_violation(&self, v: &StateDmc) -> f64 {
        let mut worst: f64 = 0.0;
        for u in 0..self.nu {
            let row: f64 = (0..self.ns).map(|s| self.prob(u, s)).sum();
            worst = worst.max((row - 1.0).abs());
        }
        for u in 0..self.nu {
            for up in (u + 1)..self.nu {
                for y in 0..v.ny() {
                    let lhs: f64 = (0..self.ns).map(|s| self.prob(up, s) * v.prob(u, s, y)).sum();
                    let rhs: f64 = (0..self.ns).map(|s| self.prob(u, s) * v.prob(up, s, y)).sum();
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
        worst
    }
}

/// Decides symmetrizability of `v`, returning a witness kernel when one
/// exists within `tol`. A single-letter input alphabet is symmetrizable by
/// convention (the pairwise condition is vacuous), with a uniform witness.
pub fn is_symmetrizable(v: &StateDmc, tol: f64) -> Result<Option<SymmetrizerWitness>> {
    if tol < 0.0 {
        return Err(Error::domain(format!("tolerance {tol} is negative")));
    }
    let (nu, ns, ny) = (v.nu(), v.ns(), v.ny());
    if nu == 1 {
        return Ok(Some(SymmetrizerWitness { nu, ns, kernel: vec![1.0 / ns as f64; ns] }));
    }
    let nv = nu * ns;
    let mut rows = Vec::with_capacity(nu + nu * (nu - 1) / 2 * ny);
    let mut rhs = Vec::with_capacity(rows.capacity());
    for u in 0..nu {
        let mut r = vec![0.0; nv];
        for s in 0..ns {
            r[u * ns + s] = 1.0;
        }
        rows.push(r);
        rhs.push(1.0);
    }
    for u in 0..nu {
        for up in (u + 1)..nu {
            for y in 0..ny {
                // sum_s J(s|up) V(y|u,s) - sum_s J(s|u) V(y|up,s) = 0
                let mut r = vec![0.0; nv];
                for s in 0..ns {
                    r[up * ns + s] += v.prob(u, s, y);
                    r[u * ns + s] -= v.prob(up, s, y);
                }
                rows.push(r);
                rhs.push(0.0);
            }
        }
    }
    Ok(lp::feasible_point(&rows, &rhs, tol)
        .map(|kernel| SymmetrizerWitness { nu, ns, kernel }))
}

/// Sufficient condition for a nonempty deterministic-code capacity interior:
/// both strategy channels induced by the supplied maps are non-symmetrizable.
pub fn nonempty_interior_check(
    w: &BroadcastChannel,
    xi: &StrategyMap,
    xi_pub: &PublicStrategyMap,
    tol: f64,
) -> Result<bool> {
    let (v1, v2) = strategy_channels(xi, xi_pub, w)?;
    Ok(is_symmetrizable(&v1, tol)?.is_none() && is_symmetrizable(&v2, tol)?.is_none())
}

// ============================================================================
// tests
// ============================================================================
