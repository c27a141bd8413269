//! Rate-region geometry and the capacity-bound computations built on it.
//!
//! A [`RateRegion`] is a downward-closed planar set stored as a frontier
//! sampled on a uniform grid of the horizontal rate. Unions and
//! intersections are pointwise max/min of frontiers, which is exact for
//! downward-closed sets on a shared grid. The bound engines sweep a
//! [`SearchSpace`] of auxiliary-input distributions, strategy maps, and
//! state distributions:
//!
//! * inner (compound) bound: union over `(p, xi)` of the intersection over
//!   `q` of the three-constraint pentagons;
//! * outer bound: intersection over `q` of the per-`q` unions;
//! * the arbitrarily-varying bounds are the compound bounds evaluated with
//!   `q` ranging over a discretized full simplex.
//!
//! The intersection over `q` of pentagons equals the pentagon of the
//! componentwise minima — a point satisfies every pentagon's constraints
//! exactly when it satisfies each constraint's minimum — so the inner bound
//! needs only one pentagon per `(p, xi)` pair.

use serde::{Deserialize, Serialize};

use crate::channel::{
    induced_joint, mutual_infos, BroadcastChannel, MiTriple, StrategyDist, StrategyMap,
};
use crate::error::{Error, Result};
use crate::prob::{enumerate_compositions, JointPmf, Pmf};

/// Grid points used for frontier sampling when the caller has no preference.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Feasibility slack when testing a grid abscissa against a rate constraint,
/// so exact-boundary points are kept despite rounding.
const FEAS_TOL: f64 = 1e-12;

// ============================================================================
// grids and regions
// ============================================================================

/// Uniform sampling grid for region frontiers: `points` abscissas covering
/// `[0, x_max]` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionGrid {
    x_max: f64,
    points: usize,
}

impl RegionGrid {
    pub fn new(x_max: f64, points: usize) -> Result<Self> {
        if !x_max.is_finite() || x_max <= 0.0 {
            return Err(Error::domain(format!("grid extent {x_max} must be positive")));
        }
        if points < 2 {
            return Err(Error::domain(format!("grid needs at least 2 points, got {points}")));
        }
        Ok(RegionGrid { x_max, points })
    }

    /// Default grid for regions of a given channel: extent `log2 |Y2|` (the
    /// largest possible common-message rate), or 1 bit for a trivial output
    /// alphabet, at [`DEFAULT_GRID_POINTS`].
    pub fn for_channel(w: &BroadcastChannel) -> RegionGrid {
        let x_max = if w.ny2() > 1 { (w.ny2() as f64).log2() } else { 1.0 };
        RegionGrid { x_max, points: DEFAULT_GRID_POINTS }
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn points(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn x_at(&self, i: usize) -> f64 {
        self.x_max * i as f64 / (self.points - 1) as f64
    }

    /// Horizontal spacing between adjacent grid points.
    pub fn cell(&self) -> f64 {
        self.x_max / (self.points - 1) as f64
    }
}

/// A downward-closed rate region: for each grid abscissa, the largest
/// achievable vertical rate, or `NEG_INFINITY` where no rate pair with that
/// abscissa is achievable. Finite entries are nonnegative and nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RegionJson", into = "RegionJson")]
pub struct RateRegion {
    x_label: String,
    y_label: String,
    x_max: f64,
    frontier: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RegionJson {
    x_label: String,
    y_label: String,
    x_max: f64,
    frontier: Vec<Option<f64>>,
}

impl TryFrom<RegionJson> for RateRegion {
    type Error = Error;
    fn try_from(j: RegionJson) -> Result<Self> {
        if !j.x_max.is_finite() || j.x_max <= 0.0 || j.frontier.len() < 2 {
            return Err(Error::shape("region needs positive extent and at least 2 grid points"));
        }
        let frontier: Vec<f64> = j
            .frontier
            .into_iter()
            .map(|v| v.unwrap_or(f64::NEG_INFINITY))
            .collect();
        for &v in &frontier {
            if v.is_nan() || (v.is_finite() && v < 0.0) {
                return Err(Error::domain(format!("frontier entry {v} invalid")));
            }
        }
        Ok(RateRegion { x_label: j.x_label, y_label: j.y_label, x_max: j.x_max, frontier })
    }
}

impl From<RateRegion> for RegionJson {
    fn from(r: RateRegion) -> RegionJson {
        RegionJson {
            x_label: r.x_label,
            y_label: r.y_label,
            x_max: r.x_max,
            frontier: r.frontier.iter().map(|&v| v.is_finite().then_some(v)).collect(),
        }
    }
}

impl RateRegion {
    /// The empty region on a grid (every abscissa infeasible).
    pub fn empty(grid: RegionGrid) -> RateRegion {
        RateRegion {
            x_label: "R0".into(),
            y_label: "R1".into(),
            x_max: grid.x_max,
            frontier: vec![f64::NEG_INFINITY; grid.points],
        }
    }

    /// Region `{x <= i0, y <= i1, x + y <= isum}` sampled on the grid. With
    /// `isum = INFINITY` this is the two-constraint rectangle. Tiny negative
    /// inputs (mutual informations rounding below zero) are clamped to 0.
    pub fn pentagon(mi: MiTriple, grid: RegionGrid) -> RateRegion {
        let mut region = RateRegion::empty(grid);
        apply_pentagon(&mut region.frontier, grid, mi);
        region
    }

    /// Rectangle `{x <= x_lim, y <= y_lim}`.
    pub fn rectangle(x_lim: f64, y_lim: f64, grid: RegionGrid) -> RateRegion {
        RateRegion::pentagon(MiTriple { i0: x_lim, i1: y_lim, isum: f64::INFINITY }, grid)
    }

    pub fn with_labels(mut self, x_label: &str, y_label: &str) -> RateRegion {
        self.x_label = x_label.into();
        self.y_label = y_label.into();
        self
    }

    pub fn x_label(&self) -> &str {
        &self.x_label
    }

    pub fn y_label(&self) -> &str {
        &self.y_label
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn grid(&self) -> RegionGrid {
        RegionGrid { x_max: self.x_max, points: self.frontier.len() }
    }

    pub fn frontier(&self) -> &[f64] {
        &self.frontier
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.grid().x_at(i)
    }

    fn check_compatible(&self, other: &RateRegion) -> Result<()> {
        if self.frontier.len() != other.frontier.len()
            || (self.x_max - other.x_max).abs() > 1e-9 * self.x_max.max(1.0)
        {
            return Err(Error::shape(format!(
                "region grids differ: {} points to {}, extent {} to {}",
                self.frontier.len(),
                other.frontier.len(),
                self.x_max,
                other.x_max
            )));
        }
        Ok(())
    }

    /// Pointwise union (exact for downward-closed sets on one grid).
    pub fn union(&self, other: &RateRegion) -> Result<RateRegion> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, &b) in out.frontier.iter_mut().zip(&other.frontier) {
            *a = a.max(b);
        }
        Ok(out)
    }

    /// Pointwise intersection (exact for downward-closed sets on one grid).
    pub fn intersection(&self, other: &RateRegion) -> Result<RateRegion> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (a, &b) in out.frontier.iter_mut().zip(&other.frontier) {
            *a = a.min(b);
        }
        Ok(out)
    }

    /// Largest frontier value, or `NEG_INFINITY` for an empty region.
    pub fn y_max(&self) -> f64 {
        self.frontier.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the last feasible grid point.
    fn last_feasible(&self) -> Option<usize> {
        self.frontier.iter().rposition(|v| v.is_finite())
    }

    /// Whether the region is contained in the origin corner `{(0,0)}` up to
    /// `tol`: only the first abscissa is feasible and its frontier is ≤ tol.
    pub fn is_origin_only(&self, tol: f64) -> bool {
        match self.last_feasible() {
            None => true,
            Some(0) => self.frontier[0] <= tol,
            Some(_) => false,
        }
    }

    /// Frontier height at an arbitrary abscissa by linear interpolation;
    /// `NEG_INFINITY` outside the feasible range.
    pub fn height_at(&self, x: f64) -> f64 {
        let grid = self.grid();
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let t = x / grid.cell();
        let lo = (t.floor() as usize).min(self.frontier.len() - 1);
        let hi = (lo + 1).min(self.frontier.len() - 1);
        let (a, b) = (self.frontier[lo], self.frontier[hi]);
        if x > grid.x_at(hi) + FEAS_TOL || !a.is_finite() {
            return f64::NEG_INFINITY;
        }
        if lo == hi || !b.is_finite() {
            // beyond the last feasible point the region ends at its abscissa
            return if x <= grid.x_at(lo) + FEAS_TOL { a } else { f64::NEG_INFINITY };
        }
        let frac = t - lo as f64;
        a + (b - a) * frac
    }

    /// Whether `(x, y)` lies in the region, with `tol` slack on the height.
    pub fn contains_point(&self, x: f64, y: f64, tol: f64) -> bool {
        y <= self.height_at(x) + tol
    }

    /// Whether `other` is contained in `self` within `tol` (checked at
    /// other's grid points).
    pub fn contains_region(&self, other: &RateRegion, tol: f64) -> bool {
        let grid = other.grid();
        other
            .frontier
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .all(|(i, &v)| self.contains_point(grid.x_at(i), v.max(0.0), tol))
    }

    /// Boundary polyline: the feasible frontier vertices plus the drop to the
    /// horizontal axis at the right end. An empty region contributes the
    /// origin.
    fn boundary(&self) -> Vec<(f64, f64)> {
        let grid = self.grid();
        let mut pts: Vec<(f64, f64)> = self
            .frontier
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, &v)| (grid.x_at(i), v.max(0.0)))
            .collect();
        if pts.is_empty() {
            return vec![(0.0, 0.0)];
        }
        let (xe, ye) = *pts.last().expect("nonempty");
        if ye > 0.0 {
            pts.push((xe, 0.0));
        }
        pts
    }

    /// Hausdorff distance between two regions (as planar sets), computed from
    /// boundary vertices against boundary polylines. Grids need not match.
    pub fn hausdorff_distance(&self, other: &RateRegion) -> f64 {
        let ba = self.boundary();
        let bb = other.boundary();
        directed_hausdorff(&ba, other, &bb).max(directed_hausdorff(&bb, self, &ba))
    }

    /// CSV rendering: header with the axis labels, then one feasible grid
    /// point per line at 6-decimal precision.
    pub fn to_csv(&self) -> String {
        let grid = self.grid();
        let mut out = format!("{},{}\n", self.x_label, self.y_label);
        for (i, &v) in self.frontier.iter().enumerate() {
            if v.is_finite() {
                out.push_str(&format!("{:.6},{:.6}\n", grid.x_at(i), v.max(0.0)));
            }
        }
        out
    }
}

/// Max distance from `pts` to the region `target` (0 for points inside,
/// distance to the boundary polyline otherwise).
fn directed_hausdorff(pts: &[(f64, f64)], target: &RateRegion, target_boundary: &[(f64, f64)]) -> f64 {
    let mut worst: f64 = 0.0;
    for &(x, y) in pts {
        if target.contains_point(x, y, 0.0) {
            continue;
        }
        let mut best = f64::INFINITY;
        if target_boundary.len() == 1 {
            let (bx, by) = target_boundary[0];
            best = ((x - bx).powi(2) + (y - by).powi(2)).sqrt();
        }
        for seg in target_boundary.windows(2) {
            best = best.min(point_segment_distance(x, y, seg[0], seg[1]));
        }
        worst = worst.max(best);
    }
    worst
}

fn point_segment_distance(x: f64, y: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((x - a.0) * dx + (y - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (px, py) = (a.0 + t * dx, a.1 + t * dy);
    ((x - px).powi(2) + (y - py).powi(2)).sqrt()
}

/// Raises `frontier` to cover the pentagon `{x <= i0, y <= i1, x+y <= isum}`.
fn apply_pentagon(frontier: &mut [f64], grid: RegionGrid, mi: MiTriple) {
    let i0 = mi.i0.max(0.0);
    let i1 = mi.i1.max(0.0);
    let isum = mi.isum.max(0.0);
    let x_lim = i0.min(isum);
    for (i, f) in frontier.iter_mut().enumerate() {
        let x = grid.x_at(i);
        if x > x_lim + FEAS_TOL {
            break;
        }
        let y = i1.min(isum - x).max(0.0);
        if y > *f {
            *f = y;
        }
    }
}

// ============================================================================
// search spaces
// ============================================================================

/// The finite families swept by the bound engines: auxiliary-input
/// distributions, strategy maps, and state distributions.
#[derive(Debug, Clone)]
pub struct SearchSpace {
    pub p_grid: Vec<StrategyDist>,
    pub xi_family: Vec<StrategyMap>,
    pub q_grid: Vec<Pmf>,
}

impl SearchSpace {
    /// Validates family consistency against a channel, including the
    /// auxiliary cardinality caps `|U0| <= |X||S| + 2` and
    /// `|U1| <= |X||S| (|X||S| + 2)` that bound the useful search.
    pub fn validate(&self, w: &BroadcastChannel) -> Result<()> {
        if self.p_grid.is_empty() || self.xi_family.is_empty() || self.q_grid.is_empty() {
            return Err(Error::config("search space families must be nonempty"));
        }
        let (nu0, nu1) = (self.xi_family[0].nu0(), self.xi_family[0].nu1());
        let cap = w.nx() * w.ns() + 2;
        if nu0 > cap || nu1 > w.nx() * w.ns() * cap {
            return Err(Error::config(format!(
                "auxiliary alphabets ({nu0}, {nu1}) exceed the cardinality caps ({cap}, {})",
                w.nx() * w.ns() * cap
            )));
        }
        for xi in &self.xi_family {
            if xi.nu0() != nu0 || xi.nu1() != nu1 {
                return Err(Error::config("strategy maps disagree on auxiliary alphabets"));
            }
            if xi.ns() != w.ns() || xi.nx() != w.nx() {
                return Err(Error::config("strategy maps disagree with the channel alphabets"));
            }
        }
        for p in &self.p_grid {
            if p.nu0() != nu0 || p.nu1() != nu1 {
                return Err(Error::config("auxiliary distributions disagree with the strategy maps"));
            }
        }
        for q in &self.q_grid {
            if q.len() != w.ns() {
                return Err(Error::config("state distributions disagree with the channel"));
            }
        }
        Ok(())
    }

    /// Uniform grid of binary state distributions `Bern(i / (points - 1))`.
    pub fn binary_q_grid(points: usize) -> Result<Vec<Pmf>> {
        if points < 2 {
            return Err(Error::config("state grid needs at least 2 points"));
        }
        (0..points)
            .map(|i| Pmf::bernoulli(i as f64 / (points - 1) as f64))
            .collect()
    }

    /// Discretized state simplex: uniform binary grid for two states, a
    /// lattice of the given resolution otherwise.
    pub fn simplex_q_grid(ns: usize, points: usize, lattice_resolution: usize) -> Result<Vec<Pmf>> {
        if ns == 2 {
            Self::binary_q_grid(points)
        } else {
            simplex_lattice(ns, lattice_resolution)
        }
    }

    /// Product-Bernoulli auxiliary family `U0 ~ Bern(g), U1 ~ Bern(b)` on
    /// uniform grids over `[lo, hi]` per coordinate.
    pub fn product_bernoulli_grid(points: usize, lo: f64, hi: f64) -> Result<Vec<StrategyDist>> {
        if points < 2 || !(0.0..=1.0).contains(&lo) || !(lo..=1.0).contains(&hi) {
            return Err(Error::config(format!(
                "invalid product-Bernoulli grid: {points} points on [{lo}, {hi}]"
            )));
        }
        let mut out = Vec::with_capacity(points * points);
        for i in 0..points {
            let g = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            for j in 0..points {
                let b = lo + (hi - lo) * j as f64 / (points - 1) as f64;
                out.push(StrategyDist::product_bernoulli(g, b)?);
            }
        }
        Ok(out)
    }

    /// Lattice of full joint pmfs over `U0 x U1` with the given resolution
    /// (all compositions of `resolution` into `nu0*nu1` parts).
    pub fn joint_lattice(nu0: usize, nu1: usize, resolution: usize) -> Result<Vec<StrategyDist>> {
        let mut out = Vec::new();
        let denom = resolution as f64;
        enumerate_compositions(resolution, nu0 * nu1, &mut |counts| {
            let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / denom).collect();
            out.push(probs);
        })?;
        out.into_iter()
            .map(|probs| StrategyDist::from_joint(JointPmf::new(vec![nu0, nu1], probs)?))
            .collect()
    }

    /// Exhaustive binary search space: every strategy map, product-Bernoulli
    /// auxiliaries on `[0,1]^2` plus a coarse joint lattice, and a uniform
    /// binary state grid. Only valid for binary-input binary-state channels.
    pub fn binary_exhaustive(w: &BroadcastChannel, p_points: usize, q_points: usize) -> Result<SearchSpace> {
        if w.nx() != 2 || w.ns() != 2 {
            return Err(Error::config("exhaustive preset requires binary input and state"));
        }
        let mut p_grid = Self::product_bernoulli_grid(p_points, 0.0, 1.0)?;
        p_grid.extend(Self::joint_lattice(2, 2, 10)?);
        Ok(SearchSpace {
            p_grid,
            xi_family: StrategyMap::enumerate_all(2, 2, 2, 2)?,
            q_grid: Self::binary_q_grid(q_points)?,
        })
    }

    /// The mod-2 strategy with product-Bernoulli auxiliaries folded onto
    /// `[0, 1/2]^2` — for binary-symmetric channel families the response is
    /// invariant under flipping an auxiliary letter together with its
    /// Bernoulli parameter, so the folded grid loses nothing and doubles the
    /// effective resolution. Used by the worked-example presets.
    pub fn xor_product_family(p_points: usize, q_points: usize) -> Result<SearchSpace> {
        Ok(SearchSpace {
            p_grid: Self::product_bernoulli_grid(p_points, 0.0, 0.5)?,
            xi_family: vec![StrategyMap::xor3()],
            q_grid: Self::binary_q_grid(q_points)?,
        })
    }
}

/// All pmfs with `cells` entries on the lattice `{0, 1/res, ..., 1}`.
fn simplex_lattice(cells: usize, resolution: usize) -> Result<Vec<Pmf>> {
    let mut out = Vec::new();
    let denom = resolution as f64;
    enumerate_compositions(resolution, cells, &mut |counts| {
        out.push(counts.iter().map(|&c| c as f64 / denom).collect::<Vec<f64>>());
    })?;
    out.into_iter().map(Pmf::new).collect()
}

// ============================================================================
// bound engines
// ============================================================================

#[derive(Clone, Copy, PartialEq)]
enum ConstraintMode {
    /// Three constraints: `x <= i0`, `y <= i1`, `x + y <= isum`.
    Three,
    /// Two constraints only (degraded setting): `x <= i0`, `y <= i1`.
    Two,
}

fn mode_triple(mi: MiTriple, mode: ConstraintMode) -> MiTriple {
    match mode {
        ConstraintMode::Three => mi,
        ConstraintMode::Two => MiTriple { isum: f64::INFINITY, ..mi },
    }
}

fn bounds_impl(
    w: &BroadcastChannel,
    space: &SearchSpace,
    grid: RegionGrid,
    mode: ConstraintMode,
) -> Result<(RateRegion, RateRegion)> {
    space.validate(w)?;
    let mut inner = RateRegion::empty(grid);
    let mut per_q: Vec<Vec<f64>> =
        vec![vec![f64::NEG_INFINITY; grid.points]; space.q_grid.len()];
    for p in &space.p_grid {
        for xi in &space.xi_family {
            let mut mins = MiTriple { i0: f64::INFINITY, i1: f64::INFINITY, isum: f64::INFINITY };
            for (k, q) in space.q_grid.iter().enumerate() {
                let mi = mutual_infos(&induced_joint(p, xi, w, q)?)?;
                mins.i0 = mins.i0.min(mi.i0);
                mins.i1 = mins.i1.min(mi.i1);
                mins.isum = mins.isum.min(mi.isum);
                apply_pentagon(&mut per_q[k], grid, mode_triple(mi, mode));
            }
            apply_pentagon(&mut inner.frontier, grid, mode_triple(mins, mode));
        }
    }
    let mut outer = RateRegion::empty(grid);
    outer.frontier.copy_from_slice(&per_q[0]);
    for f in per_q.iter().skip(1) {
        for (o, &v) in outer.frontier.iter_mut().zip(f) {
            *o = o.min(v);
        }
    }
    Ok((inner, outer))
}

/// Achievable (inner) bound for the compound channel governed by the space's
/// state family: union over `(p, xi)` of the intersection over `q`.
pub fn inner_bound_compound(
    w: &BroadcastChannel,
    space: &SearchSpace,
    grid: RegionGrid,
) -> Result<RateRegion> {
    Ok(bounds_impl(w, space, grid, ConstraintMode::Three)?.0)
}

/// Converse (outer) bound: intersection over `q` of the per-`q` unions.
pub fn outer_bound(w: &BroadcastChannel, space: &SearchSpace, grid: RegionGrid) -> Result<RateRegion> {
    Ok(bounds_impl(w, space, grid, ConstraintMode::Three)?.1)
}

/// Inner and outer bounds for the arbitrarily varying channel: the compound
/// bounds with `q` sweeping a discretized full simplex (the caller supplies
/// the discretization in `space.q_grid`).
pub fn avbc_bounds(
    w: &BroadcastChannel,
    space: &SearchSpace,
    grid: RegionGrid,
) -> Result<(RateRegion, RateRegion)> {
    bounds_impl(w, space, grid, ConstraintMode::Three)
}

/// Capacity region of the random-parameter channel (singleton state
/// distribution): union over `(p, xi)` of the pentagon at `q`.
pub fn region_random_parameter(
    w: &BroadcastChannel,
    q: &Pmf,
    space: &SearchSpace,
    grid: RegionGrid,
) -> Result<RateRegion> {
    let single = SearchSpace {
        p_grid: space.p_grid.clone(),
        xi_family: space.xi_family.clone(),
        q_grid: vec![q.clone()],
    };
    Ok(bounds_impl(w, &single, grid, ConstraintMode::Three)?.0)
}

/// Inner and outer bounds for a degraded channel: the same minimax sweep with
/// the sum constraint dropped, axes labeled `(R2, R1)` — the horizontal axis
/// carries the coarse-message rate decoded by the weaker user.
pub fn degraded_bounds(
    w: &BroadcastChannel,
    space: &SearchSpace,
    grid: RegionGrid,
) -> Result<(RateRegion, RateRegion)> {
    let (inner, outer) = bounds_impl(w, space, grid, ConstraintMode::Two)?;
    Ok((inner.with_labels("R2", "R1"), outer.with_labels("R2", "R1")))
}

/// Random-code achievable region when the encoder ignores the state (no side
/// information): union over joint laws `p(u, x)` of the intersection over
/// `q` of `{R0 <= I(U;Y2), R1 <= I(X;Y1|U), R0+R1 <= I(X;Y1)}`.
///
/// Implemented by routing the direct input through the private-auxiliary slot
/// with the state-independent identity strategy; the Markov chain `U - X - Y1`
/// then makes the generic sum bound `I(U,X;Y1)` coincide with `I(X;Y1)`.
pub fn region_jahn_no_si(
    w: &BroadcastChannel,
    p_ux_grid: &[StrategyDist],
    q_grid: &[Pmf],
    grid: RegionGrid,
) -> Result<RateRegion> {
    let Some(first) = p_ux_grid.first() else {
        return Err(Error::config("empty joint-input family"));
    };
    let (nu, nx) = (first.nu0(), first.nu1());
    if nx != w.nx() {
        return Err(Error::config(format!(
            "joint laws drive the input directly: second axis {nx} must match |X| = {}",
            w.nx()
        )));
    }
    let mut table = Vec::with_capacity(nu * nx * w.ns());
    for _u in 0..nu {
        for x in 0..nx {
            for _s in 0..w.ns() {
                table.push(x);
            }
        }
    }
    let space = SearchSpace {
        p_grid: p_ux_grid.to_vec(),
        xi_family: vec![StrategyMap::new(nu, nx, w.ns(), w.nx(), table)?],
        q_grid: q_grid.to_vec(),
    };
    Ok(bounds_impl(w, &space, grid, ConstraintMode::Three)?.0)
}

// ============================================================================
// simultaneous-minimizer check
// ============================================================================

/// Per-distribution argmin sets over the state grid, one per constraint,
/// stored as grid indices whose value is within tolerance of the minimum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArgminSets {
    pub i0: Vec<usize>,
    pub i1: Vec<usize>,
    pub isum: Vec<usize>,
}

/// Outcome of the simultaneous-minimizer check: whether one state
/// distribution minimizes all three mutual informations for every member of
/// the auxiliary family — the condition under which the inner and outer
/// bounds coincide.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionTReport {
    pub holds: bool,
    /// A common minimizer when the check holds.
    pub q_star: Option<Pmf>,
    /// Index of `q_star` in the supplied state grid.
    pub q_star_index: Option<usize>,
    pub tolerance: f64,
    /// Argmin sets per auxiliary distribution, in input order.
    pub argmins: Vec<ArgminSets>,
}

fn sublevel_indices(values: &[f64], tol: f64) -> Vec<usize> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= min + tol)
        .map(|(i, _)| i)
        .collect()
}

/// Checks for a single state distribution in `q_grid` that minimizes all
/// three mutual informations simultaneously, for every `p` in `dists`, using
/// sublevel sets at `tol` bits in place of exact argmins.
pub fn check_condition_t(
    w: &BroadcastChannel,
    xi: &StrategyMap,
    dists: &[StrategyDist],
    q_grid: &[Pmf],
    tol: f64,
) -> Result<ConditionTReport> {
    if dists.is_empty() || q_grid.is_empty() {
        return Err(Error::config("simultaneous-minimizer check needs nonempty families"));
    }
    if tol <= 0.0 {
        return Err(Error::domain(format!("tolerance {tol} must be positive")));
    }
    let nq = q_grid.len();
    let mut common = vec![true; nq];
    let mut argmins = Vec::with_capacity(dists.len());
    let (mut v0, mut v1, mut vs) = (vec![0.0; nq], vec![0.0; nq], vec![0.0; nq]);
    for p in dists {
        for (k, q) in q_grid.iter().enumerate() {
            let mi = mutual_infos(&induced_joint(p, xi, w, q)?)?;
            v0[k] = mi.i0;
            v1[k] = mi.i1;
            vs[k] = mi.isum;
        }
        let sets = ArgminSets {
            i0: sublevel_indices(&v0, tol),
            i1: sublevel_indices(&v1, tol),
            isum: sublevel_indices(&vs, tol),
        };
        let mut member = vec![false; nq];
        for &i in &sets.i0 {
            member[i] = true;
        }
        for (c, m) in common.iter_mut().zip(&member) {
            *c &= m;
        }
        member.iter_mut().for_each(|m| *m = false);
        for &i in &sets.i1 {
            member[i] = true;
        }
        for (c, m) in common.iter_mut().zip(&member) {
            *c &= m;
        }
        member.iter_mut().for_each(|m| *m = false);
        for &i in &sets.isum {
            member[i] = true;
        }
        for (c, m) in common.iter_mut().zip(&member) {
            *c &= m;
        }
        argmins.push(sets);
    }
    // prefer the largest common index so boundary minimizers report cleanly
    let q_star_index = common.iter().rposition(|&c| c);
    Ok(ConditionTReport {
        holds: q_star_index.is_some(),
        q_star: q_star_index.map(|i| q_grid[i].clone()),
        q_star_index,
        tolerance: tol,
        argmins,
    })
}

// ============================================================================
// tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{conv, h2};

    fn grid(points: usize) -> RegionGrid {
        RegionGrid::new(1.0, points).unwrap()
    }

    fn mi(i0: f64, i1: f64, isum: f64) -> MiTriple {
        MiTriple { i0, i1, isum }
    }

    #[test]
    fn test_pentagon_shapes() {
        let g = grid(11);
        // degenerate triple gives the origin only
        let z = RateRegion::pentagon(mi(0.0, 0.0, 0.0), g);
        assert!(z.is_origin_only(0.0));
        // inactive sum constraint gives the rectangle
        let r = RateRegion::pentagon(mi(0.6, 0.4, 1.5), g);
        for (i, &v) in r.frontier().iter().enumerate() {
            let x = g.x_at(i);
            if x <= 0.6 + 1e-12 {
                assert_eq!(v, 0.4, "at x={x}");
            } else {
                assert_eq!(v, f64::NEG_INFINITY);
            }
        }
        // active sum constraint bevels the corner
        let p = RateRegion::pentagon(mi(1.0, 1.0, 1.5), g);
        for (i, &v) in p.frontier().iter().enumerate() {
            let x = g.x_at(i);
            assert!((v - 1.0f64.min(1.5 - x)).abs() < 1e-12, "at x={x}");
        }
    }

    #[test]
    fn test_union_intersection_laws() {
        let g = grid(21);
        let a = RateRegion::rectangle(0.5, 0.2, g);
        let b = RateRegion::rectangle(0.2, 0.5, g);
        let u = a.union(&b).unwrap();
        // both corners survive in the staircase
        assert!(u.contains_point(0.5, 0.2, 1e-12));
        assert!(u.contains_point(0.2, 0.5, 1e-12));
        assert!(!u.contains_point(0.35, 0.45, 1e-9));
        // identity, idempotence, commutativity
        let origin = RateRegion::pentagon(mi(0.0, 0.0, 0.0), g);
        assert_eq!(a.union(&origin).unwrap(), a);
        assert_eq!(a.union(&a).unwrap(), a);
        assert_eq!(a.union(&b).unwrap(), b.union(&a).unwrap());
        // intersection of nested regions is the smaller one
        let small = RateRegion::rectangle(0.3, 0.1, g);
        assert_eq!(a.intersection(&small).unwrap(), small);
        // associativity on a shared grid
        let c = RateRegion::rectangle(0.4, 0.4, g);
        assert_eq!(
            a.union(&b).unwrap().union(&c).unwrap(),
            a.union(&b.union(&c).unwrap()).unwrap()
        );
    }

    #[test]
    fn test_grid_mismatch_rejected() {
        let a = RateRegion::rectangle(0.5, 0.2, grid(21));
        let b = RateRegion::rectangle(0.5, 0.2, grid(22));
        assert!(a.union(&b).is_err());
    }

    #[test]
    fn test_hausdorff_rectangles() {
        let g = grid(201);
        let a = RateRegion::rectangle(0.5, 0.5, g);
        let b = RateRegion::rectangle(0.5, 0.4, g);
        let d = a.hausdorff_distance(&b);
        assert!((d - 0.1).abs() < 1e-9, "d = {d}");
        assert_eq!(b.hausdorff_distance(&b), 0.0);
        // distance to the origin region is the far-corner norm
        let origin = RateRegion::pentagon(mi(0.0, 0.0, 0.0), g);
        let d0 = a.hausdorff_distance(&origin);
        assert!((d0 - 0.5f64.hypot(0.5)).abs() < 1e-9, "d0 = {d0}");
    }

    #[test]
    fn test_hausdorff_across_grids() {
        // the 512-point grid has no node at x = 0.5, so the corners disagree
        // by up to one cell width
        let a = RateRegion::rectangle(0.5, 0.25, grid(101));
        let b = RateRegion::rectangle(0.5, 0.25, grid(512));
        assert!(a.hausdorff_distance(&b) < 1.5e-3);
    }

    #[test]
    fn test_region_serialization() {
        let r = RateRegion::pentagon(mi(0.6, 0.4, 0.8), grid(6)).with_labels("R2", "R1");
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("null"), "infeasible points serialize as null");
        let back: RateRegion = serde_json::from_str(&json).unwrap();
        assert_eq!(r, back);
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("R2,R1"));
        assert_eq!(lines.next(), Some("0.000000,0.400000"));
        // infeasible tail omitted: feasible x are 0, 0.2, 0.4, 0.6
        assert_eq!(csv.lines().count(), 5);
    }

    fn example1_space(p_points: usize, q_points: usize) -> SearchSpace {
        SearchSpace::xor_product_family(p_points, q_points).unwrap()
    }

    #[test]
    fn test_inner_subset_of_outer() {
        let w = BroadcastChannel::example2(0.12, 0.85, 0.22, 0.88).unwrap();
        let g = grid(101);
        let (inner, outer) = avbc_bounds(&w, &example1_space(11, 11), g).unwrap();
        assert!(outer.contains_region(&inner, 1e-12));
    }

    #[test]
    fn test_singleton_q_collapses_bounds() {
        let w = BroadcastChannel::example2(0.12, 0.85, 0.18, 0.78).unwrap();
        let mut space = example1_space(11, 11);
        space.q_grid = vec![Pmf::bernoulli(0.3).unwrap()];
        let g = grid(64);
        let (inner, outer) = avbc_bounds(&w, &space, g).unwrap();
        assert_eq!(inner.frontier(), outer.frontier());
        // and the random-parameter region is the same union
        let rp = region_random_parameter(&w, &Pmf::bernoulli(0.3).unwrap(), &space, g).unwrap();
        assert_eq!(rp.frontier(), inner.frontier());
    }

    #[test]
    fn test_grid_growth_monotonicity() {
        let w = BroadcastChannel::example2(0.12, 0.85, 0.22, 0.88).unwrap();
        let g = grid(64);
        // enlarging the state family shrinks the inner bound
        let small = example1_space(6, 3);
        let mut large_q = small.clone();
        large_q.q_grid = SearchSpace::binary_q_grid(11).unwrap();
        let inner_small = inner_bound_compound(&w, &small, g).unwrap();
        let inner_large = inner_bound_compound(&w, &large_q, g).unwrap();
        assert!(inner_small.contains_region(&inner_large, 1e-12));
        // enlarging the auxiliary family grows both bounds
        let mut large_p = small.clone();
        large_p.p_grid = SearchSpace::product_bernoulli_grid(11, 0.0, 0.5).unwrap();
        let (i2, o2) = avbc_bounds(&w, &large_p, g).unwrap();
        let (i1, o1) = avbc_bounds(&w, &small, g).unwrap();
        assert!(i2.contains_region(&i1, 1e-12));
        assert!(o2.contains_region(&o1, 1e-12));
    }

    #[test]
    fn test_degraded_engine_against_formulas() {
        // coarse sweep of the cascade family against its closed forms at q=1
        let (t0, t1, al) = (0.005, 0.9, 0.2);
        let w = BroadcastChannel::example1(t0, t1, al).unwrap();
        let g = grid(128);
        let (inner, outer) = degraded_bounds(&w, &example1_space(41, 21), g).unwrap();
        assert_eq!(inner.x_label(), "R2");
        // formula frontier: union over beta of rectangles at delta = 1 - theta1
        let delta = 1.0 - t1;
        let mut formula = RateRegion::empty(g).with_labels("R2", "R1");
        for j in 0..2001 {
            let beta = 0.5 * j as f64 / 2000.0;
            let r2 = 1.0 - h2(conv(al, conv(beta, delta)));
            let r1 = h2(conv(beta, delta)) - h2(delta);
            formula = formula.union(&RateRegion::rectangle(r2, r1, g)).unwrap();
        }
        // the dominant state distribution sits on the coarse q grid, so the
        // engine matches the formula up to the beta-grid resolution
        assert!(inner.hausdorff_distance(&formula) < 8e-3);
        assert!(outer.hausdorff_distance(&formula) < 8e-3);
    }

    #[test]
    fn test_pentagon_dominance_across_state_grid() {
        // for the cascade family, the q=1 rectangle sits inside every other
        // q rectangle at the same auxiliary parameter
        let (t0, t1, al) = (0.005, 0.9, 0.2);
        let w = BroadcastChannel::example1(t0, t1, al).unwrap();
        let xi = StrategyMap::xor3();
        for bi in 0..51 {
            let beta = 0.5 * bi as f64 / 50.0;
            let p = StrategyDist::product_bernoulli(0.5, beta).unwrap();
            let at = |qv: f64| {
                let q = Pmf::bernoulli(qv).unwrap();
                mutual_infos(&induced_joint(&p, &xi, &w, &q).unwrap()).unwrap()
            };
            let end = at(1.0);
            for qi in 0..51 {
                let m = at(qi as f64 / 50.0);
                assert!(end.i0 <= m.i0 + 1e-12, "i0 at beta={beta} q={qi}");
                assert!(end.i1 <= m.i1 + 1e-12, "i1 at beta={beta} q={qi}");
            }
        }
    }

    #[test]
    fn test_jahn_no_si_state_independent_channel() {
        // a channel that ignores the state reduces to the single-q region
        let w = BroadcastChannel::example1(0.1, 0.1, 0.2).unwrap();
        let g = grid(128);
        let p_grid = SearchSpace::joint_lattice(2, 2, 10).unwrap();
        let q_grid = SearchSpace::binary_q_grid(5).unwrap();
        let region = region_jahn_no_si(&w, &p_grid, &q_grid, g).unwrap();
        // the best product input reaches the single-user capacity on the sum
        let best = region.frontier()[0];
        assert!((best - (1.0 - h2(0.1))).abs() < 2e-3, "best = {best}");
    }

    #[test]
    fn test_jahn_no_si_degenerate() {
        // crossover crosses 1/2 for both users: every rate vanishes
        let w = BroadcastChannel::example2(0.12, 0.85, 0.18, 0.78).unwrap();
        let g = grid(512);
        let p_grid = SearchSpace::joint_lattice(2, 2, 20).unwrap();
        let q_grid = SearchSpace::binary_q_grid(101).unwrap();
        let region = region_jahn_no_si(&w, &p_grid, &q_grid, g).unwrap();
        assert!(region.is_origin_only(1e-4));
    }

    #[test]
    fn test_condition_t_constant_channel() {
        // with x = u0 ^ u1 ^ s the effective crossover is (1-q) t0 + q (1-t1),
        // so t1 = 1 - t0 makes the strategy channel state-independent and
        // every q minimizes everything
        let w = BroadcastChannel::example1(0.1, 0.9, 0.2).unwrap();
        let dists = vec![StrategyDist::product_bernoulli(0.5, 0.3).unwrap()];
        let q_grid = SearchSpace::binary_q_grid(11).unwrap();
        let rep = check_condition_t(&w, &StrategyMap::xor3(), &dists, &q_grid, 1e-6).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.argmins[0].i0.len(), 11);
        assert_eq!(rep.argmins[0].i1.len(), 11);
    }

    #[test]
    fn test_condition_t_dichotomy_small() {
        let q_grid = SearchSpace::binary_q_grid(21).unwrap();
        let dists = vec![StrategyDist::product_bernoulli(0.25, 0.25).unwrap()];
        let w_holds = BroadcastChannel::example2(0.12, 0.85, 0.18, 0.78).unwrap();
        let rep = check_condition_t(&w_holds, &StrategyMap::xor3(), &dists, &q_grid, 1e-6).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.q_star_index, Some(20));
        let w_fails = BroadcastChannel::example2(0.12, 0.85, 0.22, 0.88).unwrap();
        let rep = check_condition_t(&w_fails, &StrategyMap::xor3(), &dists, &q_grid, 1e-6).unwrap();
        assert!(!rep.holds);
        assert!(rep.q_star.is_none());
        assert_eq!(rep.argmins[0].i0, vec![0]);
        assert_eq!(rep.argmins[0].i1, vec![20]);
    }

    #[test]
    fn test_search_space_validation() {
        let w = BroadcastChannel::example1(0.1, 0.8, 0.2).unwrap();
        let mut space = example1_space(3, 3);
        space.p_grid.clear();
        assert!(space.validate(&w).is_err());
        let space = example1_space(3, 3);
        assert!(space.validate(&w).is_ok());
    }

    #[test]
    fn test_height_interpolation() {
        let g = grid(11);
        let p = RateRegion::pentagon(mi(1.0, 1.0, 1.5), g);
        assert!((p.height_at(0.55) - 0.95).abs() < 1e-12);
        assert_eq!(p.height_at(1.2), f64::NEG_INFINITY);
        assert!(p.contains_point(0.5, 0.9999, 1e-9));
    }
}
