//! State-dependent two-user broadcast channels, encoding strategies over
//! auxiliary alphabets, and the joint distributions they induce.
//!
//! A channel `W(y1, y2 | x, s)` is stored as a validated row-stochastic
//! table. Encoding strategies map auxiliary letters and the current state to
//! an input letter; together with a distribution on the auxiliary letters and
//! a state distribution `q` they induce a joint pmf over `(U0, U1, Y1, Y2)`
//! from which all rate-region quantities are computed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp;
use crate::prob::{JointPmf, Pmf, NORM_TOL};

// ============================================================================
// BroadcastChannel
// ============================================================================

/// Discrete memoryless broadcast channel with a state: `W(y1, y2 | x, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelJson", into = "ChannelJson")]
pub struct BroadcastChannel {
    nx: usize,
    ns: usize,
    ny1: usize,
    ny2: usize,
    /// row-major over (x, s, y1, y2)
    w: Vec<f64>,
    /// cached marginal to user 1, row-major over (x, s, y1)
    w1: Vec<f64>,
    /// cached marginal to user 2, row-major over (x, s, y2)
    w2: Vec<f64>,
}

/// JSON schema: dimensions plus a nested row-major table `w[x][s][y1][y2]`.
#[derive(Serialize, Deserialize)]
struct ChannelJson {
    nx: usize,
    ns: usize,
    ny1: usize,
    ny2: usize,
    w: Vec<Vec<Vec<Vec<f64>>>>,
}

impl TryFrom<ChannelJson> for BroadcastChannel {
    type Error = Error;
    fn try_from(j: ChannelJson) -> Result<Self> {
        let mut flat = Vec::with_capacity(j.nx * j.ns * j.ny1 * j.ny2);
        if j.w.len() != j.nx {
            return Err(Error::shape(format!("w has {} input slices, nx = {}", j.w.len(), j.nx)));
        }
        for xs in &j.w {
            if xs.len() != j.ns {
                return Err(Error::shape("w state dimension mismatch"));
            }
            for ss in xs {
                if ss.len() != j.ny1 {
                    return Err(Error::shape("w y1 dimension mismatch"));
                }
                for ys in ss {
                    if ys.len() != j.ny2 {
                        return Err(Error::shape("w y2 dimension mismatch"));
                    }
                    flat.extend_from_slice(ys);
                }
            }
        }
        BroadcastChannel::new(j.nx, j.ns, j.ny1, j.ny2, flat)
    }
}

impl From<BroadcastChannel> for ChannelJson {
    fn from(c: BroadcastChannel) -> ChannelJson {
        let mut w = vec![vec![vec![vec![0.0; c.ny2]; c.ny1]; c.ns]; c.nx];
        for x in 0..c.nx {
            for s in 0..c.ns {
                for y1 in 0..c.ny1 {
                    for y2 in 0..c.ny2 {
                        w[x][s][y1][y2] = c.prob(x, s, y1, y2);
                    }
                }
            }
        }
        ChannelJson { nx: c.nx, ns: c.ns, ny1: c.ny1, ny2: c.ny2, w }
    }
}

impl BroadcastChannel {
    pub fn new(nx: usize, ns: usize, ny1: usize, ny2: usize, w: Vec<f64>) -> Result<Self> {
        if nx == 0 || ns == 0 || ny1 == 0 || ny2 == 0 {
            return Err(Error::shape("channel alphabets must be nonempty"));
        }
        if w.len() != nx * ns * ny1 * ny2 {
            return Err(Error::shape(format!(
                "channel table has {} entries, expected {}",
                w.len(),
                nx * ns * ny1 * ny2
            )));
        }
        for (x, s) in (0..nx).flat_map(|x| (0..ns).map(move |s| (x, s))) {
            let base = (x * ns + s) * ny1 * ny2;
            let row = &w[base..base + ny1 * ny2];
            let mut sum = 0.0;
            for &p in row {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::dist(format!("channel row (x={x}, s={s}) has entry {p}")));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > NORM_TOL {
                return Err(Error::dist(format!(
                    "channel row (x={x}, s={s}) sums to {sum}"
                )));
            }
        }
        let mut w1 = vec![0.0; nx * ns * ny1];
        let mut w2 = vec![0.0; nx * ns * ny2];
        for x in 0..nx {
            for s in 0..ns {
                for y1 in 0..ny1 {
                    for y2 in 0..ny2 {
                        let p = w[((x * ns + s) * ny1 + y1) * ny2 + y2];
                        w1[(x * ns + s) * ny1 + y1] += p;
                        w2[(x * ns + s) * ny2 + y2] += p;
                    }
                }
            }
        }
        Ok(BroadcastChannel { nx, ns, ny1, ny2, w, w1, w2 })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ns(&self) -> usize {
        self.ns
    }
    pub fn ny1(&self) -> usize {
        self.ny1
    }
    pub fn ny2(&self) -> usize {
        self.ny2
    }

    #[inline]
    pub fn prob(&self, x: usize, s: usize, y1: usize, y2: usize) -> f64 {
        self.w[((x * self.ns + s) * self.ny1 + y1) * self.ny2 + y2]
    }

    /// Marginal law of user 1's output: `W1(y1 | x, s)`.
    #[inline]
    pub fn prob1(&self, x: usize, s: usize, y1: usize) -> f64 {
        self.w1[(x * self.ns + s) * self.ny1 + y1]
    }

    /// Marginal law of user 2's output: `W2(y2 | x, s)`.
    #[inline]
    pub fn prob2(&self, x: usize, s: usize, y2: usize) -> f64 {
        self.w2[(x * self.ns + s) * self.ny2 + y2]
    }

    /// Joint output row for `(x, s)`, row-major over `(y1, y2)`; used to draw
    /// both outputs from a single uniform variate.
    #[inline]
    pub(crate) fn output_row(&self, x: usize, s: usize) -> &[f64] {
        let base = (x * self.ns + s) * self.ny1 * self.ny2;
        &self.w[base..base + self.ny1 * self.ny2]
    }

    /// Binary symmetric broadcast family in which user 2 observes a further
    /// degraded copy of user 1's output: `Y1 = X + Z_s`, `Y2 = Y1 + K` with
    /// `Z_s ~ Bern(theta_s)` and `K ~ Bern(alpha)` (mod-2 addition).
    pub fn example1(theta0: f64, theta1: f64, alpha: f64) -> Result<Self> {
        for (name, v) in [("theta0", theta0), ("theta1", theta1), ("alpha", alpha)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("{name} = {v} not in [0,1]")));
            }
        }
        let theta = [theta0, theta1];
        let mut w = Vec::with_capacity(16);
        for x in 0..2usize {
            for s in 0..2usize {
                for y1 in 0..2usize {
                    for y2 in 0..2usize {
                        let pz = if y1 ^ x == 1 { theta[s] } else { 1.0 - theta[s] };
                        let pk = if y2 ^ y1 == 1 { alpha } else { 1.0 - alpha };
                        w.push(pz * pk);
                    }
                }
            }
        }
        BroadcastChannel::new(2, 2, 2, 2, w)
    }

    /// Binary symmetric broadcast family with per-user state noise:
    /// `Y1 = X + Z_s`, `Y2 = X + N_s` with `Z_s ~ Bern(theta_s)`,
    /// `N_s ~ Bern(eps_s)`, independent given the state.
    pub fn example2(theta0: f64, theta1: f64, eps0: f64, eps1: f64) -> Result<Self> {
        for (name, v) in [("theta0", theta0), ("theta1", theta1), ("eps0", eps0), ("eps1", eps1)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::domain(format!("{name} = {v} not in [0,1]")));
            }
        }
        let theta = [theta0, theta1];
        let eps = [eps0, eps1];
        let mut w = Vec::with_capacity(16);
        for x in 0..2usize {
            for s in 0..2usize {
                for y1 in 0..2usize {
                    for y2 in 0..2usize {
                        let pz = if y1 ^ x == 1 { theta[s] } else { 1.0 - theta[s] };
                        let pn = if y2 ^ x == 1 { eps[s] } else { 1.0 - eps[s] };
                        w.push(pz * pn);
                    }
                }
            }
        }
        BroadcastChannel::new(2, 2, 2, 2, w)
    }

    /// Witness kernel `p(y2 | y1)` exhibiting user 2 as stochastically
    /// degraded with respect to user 1 under every state, or `None`.
    pub fn degraded_witness(&self, tol: f64) -> Option<Vec<f64>> {
        // variables: kernel entries k[y1][y2] >= 0
        let nv = self.ny1 * self.ny2;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        // row-stochastic rows
        for y1 in 0..self.ny1 {
            let mut r = vec![0.0; nv];
            for y2 in 0..self.ny2 {
                r[y1 * self.ny2 + y2] = 1.0;
            }
            rows.push(r);
            rhs.push(1.0);
        }
        // matching rows: sum_y1 W1(y1|x,s) k(y2|y1) = W2(y2|x,s)
        for x in 0..self.nx {
            for s in 0..self.ns {
                for y2 in 0..self.ny2 {
                    let mut r = vec![0.0; nv];
                    for y1 in 0..self.ny1 {
                        r[y1 * self.ny2 + y2] = self.prob1(x, s, y1);
                    }
                    rows.push(r);
                    rhs.push(self.prob2(x, s, y2));
                }
            }
        }
        lp::feasible_point(&rows, &rhs, tol)
    }
}

// ============================================================================
// strategies
// ============================================================================

/// Deterministic encoding strategy `x = xi(u0, u1, s)` applied letterwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyMap {
    nu0: usize,
    nu1: usize,
    ns: usize,
    nx: usize,
    /// row-major over (u0, u1, s)
    table: Vec<usize>,
}

impl StrategyMap {
    pub fn new(nu0: usize, nu1: usize, ns: usize, nx: usize, table: Vec<usize>) -> Result<Self> {
        if nu0 == 0 || nu1 == 0 || ns == 0 || nx == 0 {
            return Err(Error::shape("strategy alphabets must be nonempty"));
        }
        if table.len() != nu0 * nu1 * ns {
            return Err(Error::shape(format!(
                "strategy table has {} entries, expected {}",
                table.len(),
                nu0 * nu1 * ns
            )));
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= nx) {
            return Err(Error::shape(format!("strategy output {bad} outside input alphabet {nx}")));
        }
        Ok(StrategyMap { nu0, nu1, ns, nx, table })
    }

    /// Binary mod-2 strategy `x = u0 + u1 + s`.
    pub fn xor3() -> Self {
        let table = (0..8).map(|i| ((i >> 2) ^ (i >> 1) ^ i) & 1).collect();
        StrategyMap { nu0: 2, nu1: 2, ns: 2, nx: 2, table }
    }

    pub fn nu0(&self) -> usize {
        self.nu0
    }
    pub fn nu1(&self) -> usize {
        self.nu1
    }
    pub fn ns(&self) -> usize {
        self.ns
    }
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn apply(&self, u0: usize, u1: usize, s: usize) -> usize {
        self.table[(u0 * self.nu1 + u1) * self.ns + s]
    }

    /// Every strategy map for the given alphabets; errors beyond 65536 maps.
    pub fn enumerate_all(nu0: usize, nu1: usize, ns: usize, nx: usize) -> Result<Vec<StrategyMap>> {
        let cells = nu0 * nu1 * ns;
        let count = (nx as f64).powi(cells as i32);
        if count > 65536.0 {
            return Err(Error::TooLarge(format!(
                "{nx}^{cells} strategy maps exceed the 65536 enumeration cap"
            )));
        }
        let count = count as usize;
        let mut out = Vec::with_capacity(count);
        for code in 0..count {
            let mut table = Vec::with_capacity(cells);
            let mut c = code;
            for _ in 0..cells {
                table.push(c % nx);
                c /= nx;
            }
            out.push(StrategyMap { nu0, nu1, ns, nx, table });
        }
        Ok(out)
    }
}

/// Deterministic single-auxiliary strategy `x = xi(u, s)`, used for the
/// common-message codeword stream and for single-user strategy channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicStrategyMap {
    nu: usize,
    ns: usize,
    nx: usize,
    /// row-major over (u, s)
    table: Vec<usize>,
}

impl PublicStrategyMap {
    pub fn new(nu: usize, ns: usize, nx: usize, table: Vec<usize>) -> Result<Self> {
        if nu == 0 || ns == 0 || nx == 0 {
            return Err(Error::shape("strategy alphabets must be nonempty"));
        }
        if table.len() != nu * ns {
            return Err(Error::shape(format!(
                "strategy table has {} entries, expected {}",
                table.len(),
                nu * ns
            )));
        }
        if let Some(&bad) = table.iter().find(|&&v| v >= nx) {
            return Err(Error::shape(format!("strategy output {bad} outside input alphabet {nx}")));
        }
        Ok(PublicStrategyMap { nu, ns, nx, table })
    }

    /// Binary mod-2 strategy `x = u + s`.
    pub fn xor2() -> Self {
        PublicStrategyMap { nu: 2, ns: 2, nx: 2, table: vec![0, 1, 1, 0] }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }
    pub fn ns(&self) -> usize {
        self.ns
    }

    #[inline]
    pub fn apply(&self, u: usize, s: usize) -> usize {
        self.table[u * self.ns + s]
    }
}

// ============================================================================
// auxiliary-input distributions
// ============================================================================

/// Joint distribution of the auxiliary letters `(U0, U1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyDist {
    joint: JointPmf,
}

impl StrategyDist {
    pub fn from_joint(joint: JointPmf) -> Result<Self> {
        if joint.rank() != 2 {
            return Err(Error::shape(format!(
                "auxiliary joint must have rank 2, got {}",
                joint.rank()
            )));
        }
        Ok(StrategyDist { joint })
    }

    /// Independent `U0 ~ Bern(gamma)`, `U1 ~ Bern(beta)`.
    pub fn product_bernoulli(gamma: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) || !(0.0..=1.0).contains(&beta) {
            return Err(Error::domain(format!("bernoulli parameters ({gamma},{beta}) not in [0,1]")));
        }
        let probs = vec![
            (1.0 - gamma) * (1.0 - beta),
            (1.0 - gamma) * beta,
            gamma * (1.0 - beta),
            gamma * beta,
        ];
        Ok(StrategyDist { joint: JointPmf::new(vec![2, 2], probs)? })
    }

    pub fn nu0(&self) -> usize {
        self.joint.dims()[0]
    }

    pub fn nu1(&self) -> usize {
        self.joint.dims()[1]
    }

    #[inline]
    pub fn prob(&self, u0: usize, u1: usize) -> f64 {
        self.joint.get(&[u0, u1])
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    pub fn marginal_u0(&self) -> Pmf {
        let m = self.joint.marginal(&[0]).expect("axis 0 exists");
        Pmf::new(m.probs().to_vec()).expect("marginal of valid joint")
    }

    /// Conditional law of `U1` given `U0 = u0`; uniform when `u0` has zero mass
    /// (such letters are never drawn).
    pub fn conditional_u1(&self, u0: usize) -> Pmf {
        let nu1 = self.nu1();
        let mass: f64 = (0..nu1).map(|u1| self.prob(u0, u1)).sum();
        if mass < crate::prob::ZERO_MASS {
            return Pmf::uniform(nu1).expect("nonempty alphabet");
        }
        Pmf::new((0..nu1).map(|u1| self.prob(u0, u1) / mass).collect())
            .expect("normalized conditional")
    }
}

// ============================================================================
// induced joints and mutual informations
// ============================================================================

/// The three mutual informations that bound a degraded-message-set rate pair:
/// `i0 = I(U0;Y2)`, `i1 = I(U1;Y1|U0)`, `isum = I(U0,U1;Y1)`, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiTriple {
    pub i0: f64,
    pub i1: f64,
    pub isum: f64,
}

/// Joint law of `(U0, U1, Y1, Y2)` under auxiliary distribution `p`, strategy
/// `xi`, channel `w`, and state distribution `q`.
pub fn induced_joint(
    p: &StrategyDist,
    xi: &StrategyMap,
    w: &BroadcastChannel,
    q: &Pmf,
) -> Result<JointPmf> {
    if xi.nu0() != p.nu0() || xi.nu1() != p.nu1() {
        return Err(Error::shape(format!(
            "strategy over ({}, {}) auxiliaries, distribution over ({}, {})",
            xi.nu0(),
            xi.nu1(),
            p.nu0(),
            p.nu1()
        )));
    }
    if xi.ns() != w.ns() || xi.nx() != w.nx() {
        return Err(Error::shape("strategy and channel disagree on state or input alphabet"));
    }
    if q.len() != w.ns() {
        return Err(Error::shape(format!(
            "state distribution over {} letters, channel has {}",
            q.len(),
            w.ns()
        )));
    }
    let (nu0, nu1, ny1, ny2) = (p.nu0(), p.nu1(), w.ny1(), w.ny2());
    let mut probs = vec![0.0; nu0 * nu1 * ny1 * ny2];
    for u0 in 0..nu0 {
        for u1 in 0..nu1 {
            let pu = p.prob(u0, u1);
            if pu == 0.0 {
                continue;
            }
            for (s, &qs) in q.probs().iter().enumerate() {
                if qs == 0.0 {
                    continue;
                }
                let x = xi.apply(u0, u1, s);
                let row = w.output_row(x, s);
                let base = (u0 * nu1 + u1) * ny1 * ny2;
                let scale = pu * qs;
                for (i, &wv) in row.iter().enumerate() {
                    probs[base + i] += scale * wv;
                }
            }
        }
    }
    JointPmf::new(vec![nu0, nu1, ny1, ny2], probs)
}

/// The rate-bounding mutual informations of an induced joint over
/// `(U0, U1, Y1, Y2)`.
pub fn mutual_infos(joint: &JointPmf) -> Result<MiTriple> {
    if joint.rank() != 4 {
        return Err(Error::shape(format!(
            "mutual_infos needs a rank-4 joint, got rank {}",
            joint.rank()
        )));
    }
    let i0 = joint.mutual_information(&[0], &[3])?;
    let i1 = joint.conditional_mutual_information(&[1], &[2], &[0])?;
    let isum = joint.mutual_information(&[0, 1], &[2])?;
    Ok(MiTriple { i0, i1, isum })
}

// ============================================================================
// single-user strategy channels
// ============================================================================

/// A single-user DMC with state, `V(y | u, s)`, row-stochastic in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDmc {
    nu: usize,
    ns: usize,
    ny: usize,
    /// row-major over (u, s, y)
    v: Vec<f64>,
}

impl StateDmc {
    pub fn new(nu: usize, ns: usize, ny: usize, v: Vec<f64>) -> Result<Self> {
        if nu == 0 || ns == 0 || ny == 0 {
            return Err(Error::shape("state DMC alphabets must be nonempty"));
        }
        if v.len() != nu * ns * ny {
            return Err(Error::shape(format!(
                "state DMC table has {} entries, expected {}",
                v.len(),
                nu * ns * ny
            )));
        }
        for u in 0..nu {
            for s in 0..ns {
                let row = &v[(u * ns + s) * ny..(u * ns + s + 1) * ny];
                let mut sum = 0.0;
                for &p in row {
                    if !p.is_finite() || p < 0.0 {
                        return Err(Error::dist(format!("state DMC row (u={u}, s={s}) has entry {p}")));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > NORM_TOL {
                    return Err(Error::dist(format!("state DMC row (u={u}, s={s}) sums to {sum}")));
                }
            }
        }
        Ok(StateDmc { nu, ns, ny, v })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }
    pub fn ns(&self) -> usize {
        self.ns
    }
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn prob(&self, u: usize, s: usize, y: usize) -> f64 {
        self.v[(u * self.ns + s) * self.ny + y]
    }
}

/// The pair of strategy channels a code induces for its two decoders:
/// `V1(y1 | (u0,u1), s) = W1(y1 | xi(u0,u1,s), s)` with the pair flattened as
/// `u = u0 * nu1 + u1`, and `V2(y2 | u0, s) = W2(y2 | xi_pub(u0, s), s)`.
pub fn strategy_channels(
    xi: &StrategyMap,
    xi_pub: &PublicStrategyMap,
    w: &BroadcastChannel,
) -> Result<(StateDmc, StateDmc)> {
    if xi.ns() != w.ns() || xi.nx() != w.nx() {
        return Err(Error::shape("joint strategy and channel disagree on alphabets"));
    }
    if xi_pub.ns != w.ns() || xi_pub.nx != w.nx() {
        return Err(Error::shape("public strategy and channel disagree on alphabets"));
    }
    let (nu0, nu1, ns) = (xi.nu0(), xi.nu1(), w.ns());
    let mut v1 = Vec::with_capacity(nu0 * nu1 * ns * w.ny1());
    for u0 in 0..nu0 {
        for u1 in 0..nu1 {
            for s in 0..ns {
                let x = xi.apply(u0, u1, s);
                for y1 in 0..w.ny1() {
                    v1.push(w.prob1(x, s, y1));
                }
            }
        }
    }
    let mut v2 = Vec::with_capacity(xi_pub.nu * ns * w.ny2());
    for u in 0..xi_pub.nu {
        for s in 0..ns {
            let x = xi_pub.apply(u, s);
            for y2 in 0..w.ny2() {
                v2.push(w.prob2(x, s, y2));
            }
        }
    }
    Ok((
        StateDmc::new(nu0 * nu1, ns, w.ny1(), v1)?,
        StateDmc::new(xi_pub.nu, ns, w.ny2(), v2)?,
    ))
}

/// Strategy channels for both users under one single-auxiliary map:
/// `(W1(y1 | xi(u,s), s), W2(y2 | xi(u,s), s))`.
pub fn single_user_strategy_channels(
    xi: &PublicStrategyMap,
    w: &BroadcastChannel,
) -> Result<(StateDmc, StateDmc)> {
    if xi.ns != w.ns() || xi.nx != w.nx() {
        return Err(Error::shape("strategy and channel disagree on alphabets"));
    }
    let mut v1 = Vec::with_capacity(xi.nu * w.ns() * w.ny1());
    let mut v2 = Vec::with_capacity(xi.nu * w.ns() * w.ny2());
    for u in 0..xi.nu {
        for s in 0..w.ns() {
            let x = xi.apply(u, s);
            for y1 in 0..w.ny1() {
                v1.push(w.prob1(x, s, y1));
            }
        }
    }
    for u in 0..xi.nu {
        for s in 0..w.ns() {
            let x = xi.apply(u, s);
            for y2 in 0..w.ny2() {
                v2.push(w.prob2(x, s, y2));
            }
        }
    }
    Ok((
        StateDmc::new(xi.nu, w.ns(), w.ny1(), v1)?,
        StateDmc::new(xi.nu, w.ns(), w.ny2(), v2)?,
    ))
}

// ============================================================================
// tests
// ============================================================================
