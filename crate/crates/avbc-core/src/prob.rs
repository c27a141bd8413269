//! Probability primitives: pmfs, joint pmfs, entropy/mutual information,
//! empirical types, letter typicality, and state-type grids.
//!
//! All probabilities are linear-scale `f64`; all information quantities are
//! in bits. Distributions are validated on construction (nonnegative entries
//! summing to 1 within `NORM_TOL`) and rejected rather than renormalized.

use crate::error::{Error, Result};

/// Tolerance for pmf normalization checks.
pub const NORM_TOL: f64 = 1e-12;

/// Cells with probability below this are treated as structural zeros by the
/// typicality zero-mass rule.
pub(crate) const ZERO_MASS: f64 = 1e-15;

// ============================================================================
// scalar helpers
// ============================================================================

/// Binary entropy h(x) = -x log2 x - (1-x) log2 (1-x), in bits.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("binary_entropy argument {x} not in [0,1]")));
    }
    Ok(h2(x))
}

/// Unchecked binary entropy for internal formula code; callers validate domains.
#[inline]
pub(crate) fn h2(x: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&x));
    let mut h = 0.0;
    if x > 0.0 {
        h -= x * x.log2();
    }
    let y = 1.0 - x;
    if y > 0.0 {
        h -= y * y.log2();
    }
    h
}

/// Binary convolution a * b = a(1-b) + (1-a)b, the crossover probability of
/// two cascaded binary symmetric channels.
pub fn binary_convolve(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(Error::domain(format!("binary_convolve arguments ({a},{b}) not in [0,1]")));
    }
    Ok(conv(a, b))
}

#[inline]
pub(crate) fn conv(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + (1.0 - a) * b
}

fn check_weights(probs: &[f64], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::dist(format!("{what} is empty")));
    }
    let mut sum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::dist(format!("{what} entry {i} is {p}")));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > NORM_TOL {
        return Err(Error::dist(format!("{what} sums to {sum}, off by {:e}", (sum - 1.0).abs())));
    }
    Ok(())
}

// ============================================================================
// Pmf
// ============================================================================

/// Probability mass function on a finite alphabet {0, .., k-1}.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Pmf {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Pmf {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Pmf::new(v)
    }
}

impl From<Pmf> for Vec<f64> {
    fn from(p: Pmf) -> Vec<f64> {
        p.probs
    }
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_weights(&probs, "pmf")?;
        Ok(Pmf { probs })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::dist("uniform pmf over empty alphabet"));
        }
        Ok(Pmf { probs: vec![1.0 / k as f64; k] })
    }

    /// Point mass at letter `i`.
    pub fn degenerate(k: usize, i: usize) -> Result<Self> {
        if i >= k {
            return Err(Error::shape(format!("degenerate pmf: letter {i} outside alphabet {k}")));
        }
        let mut probs = vec![0.0; k];
        probs[i] = 1.0;
        Ok(Pmf { probs })
    }

    /// Bernoulli(p) as a pmf on {0,1} with P(1) = p.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("bernoulli parameter {p} not in [0,1]")));
        }
        Ok(Pmf { probs: vec![1.0 - p, p] })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Shannon entropy in bits, with 0 log 0 = 0.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }

    pub fn linf_distance(&self, other: &Pmf) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::shape("linf_distance between pmfs of different lengths".to_string()));
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Draw one letter by inverse CDF from a uniform variate in [0,1).
    pub(crate) fn sample_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }
}

pub(crate) fn entropy_of(probs: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

// ============================================================================
// JointPmf
// ============================================================================

/// Joint pmf over a product of finite alphabets, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    dims: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let want: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::shape(format!("joint pmf with dims {dims:?}")));
        }
        if probs.len() != want {
            return Err(Error::shape(format!(
                "joint pmf over dims {dims:?} needs {want} entries, got {}",
                probs.len()
            )));
        }
        check_weights(&probs, "joint pmf")?;
        Ok(JointPmf { dims, probs })
    }

    /// Build from a cell function; the result is validated.
    pub fn from_fn(dims: Vec<usize>, f: impl Fn(&[usize]) -> f64) -> Result<Self> {
        let total: usize = dims.iter().product();
        let mut probs = Vec::with_capacity(total);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..total {
            probs.push(f(&idx));
            // row-major increment
            for ax in (0..dims.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < dims[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        JointPmf::new(dims, probs)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut flat = 0;
        for (i, &d) in self.dims.iter().enumerate() {
            debug_assert!(idx[i] < d);
            flat = flat * d + idx[i];
        }
        flat
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.probs[self.flat_index(idx)]
    }

    /// Marginal over the given axes (strictly increasing), preserving their order.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointPmf> {
        if axes.is_empty() || axes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::shape(format!("marginal axes {axes:?} must be strictly increasing")));
        }
        if *axes.last().unwrap() >= self.dims.len() {
            return Err(Error::shape(format!(
                "marginal axis {} outside rank {}",
                axes.last().unwrap(),
                self.dims.len()
            )));
        }
        let out_dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let out_total: usize = out_dims.iter().product();
        let mut out = vec![0.0; out_total];
        let mut idx = vec![0usize; self.dims.len()];
        for &p in &self.probs {
            let mut flat = 0;
            for &a in axes {
                flat = flat * self.dims[a] + idx[a];
            }
            out[flat] += p;
            for ax in (0..self.dims.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < self.dims[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Ok(JointPmf { dims: out_dims, probs: out })
    }

    /// Joint entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_of(&self.probs)
    }

    fn marginal_entropy(&self, axes: &[usize]) -> Result<f64> {
        Ok(self.marginal(axes)?.entropy())
    }

    /// I(A;B) for disjoint axis groups, in bits.
    pub fn mutual_information(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        let ab = merge_axes(a, b)?;
        Ok(self.marginal_entropy(a)? + self.marginal_entropy(b)? - self.marginal_entropy(&ab)?)
    }

    /// I(A;B|C) for pairwise-disjoint axis groups, in bits.
    pub fn conditional_mutual_information(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        let ac = merge_axes(a, c)?;
        let bc = merge_axes(b, c)?;
        let abc = merge_axes(&ac, b)?;
        Ok(self.marginal_entropy(&ac)? + self.marginal_entropy(&bc)?
            - self.marginal_entropy(c)?
            - self.marginal_entropy(&abc)?)
    }
}

fn merge_axes(a: &[usize], b: &[usize]) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
    out.sort_unstable();
    if out.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::shape(format!("axis groups {a:?} and {b:?} overlap")));
    }
    Ok(out)
}

// ============================================================================
// empirical types and typicality
// ============================================================================

/// Empirical type of a sequence over {0, .., k-1}.
pub fn empirical_type(seq: &[usize], k: usize) -> Result<Pmf> {
    if seq.is_empty() {
        return Err(Error::shape("empirical_type of empty sequence"));
    }
    let mut counts = vec![0usize; k];
    for (i, &a) in seq.iter().enumerate() {
        if a >= k {
            return Err(Error::shape(format!("letter {a} at position {i} outside alphabet {k}")));
        }
        counts[a] += 1;
    }
    let n = seq.len() as f64;
    Pmf::new(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Letter (max-norm) joint typicality with the zero-mass rule: every joint
/// empirical frequency must lie within `delta` of the corresponding cell of
/// `joint`, and cells with zero probability must have zero empirical count.
pub fn is_jointly_typical(seqs: &[&[usize]], joint: &JointPmf, delta: f64) -> Result<bool> {
    if delta < 0.0 {
        return Err(Error::domain(format!("typicality slack {delta} is negative")));
    }
    if seqs.len() != joint.rank() {
        return Err(Error::shape(format!(
            "{} sequences against a rank-{} joint pmf",
            seqs.len(),
            joint.rank()
        )));
    }
    let n = seqs.first().map_or(0, |s| s.len());
    if n == 0 || seqs.iter().any(|s| s.len() != n) {
        return Err(Error::shape("sequences must be nonempty and of equal length"));
    }
    let mut counts = vec![0u32; joint.probs.len()];
    let mut idx = vec![0usize; seqs.len()];
    for t in 0..n {
        for (j, s) in seqs.iter().enumerate() {
            if s[t] >= joint.dims[j] {
                return Err(Error::shape(format!(
                    "letter {} at position {t} outside alphabet {}",
                    s[t], joint.dims[j]
                )));
            }
            idx[j] = s[t];
        }
        counts[joint.flat_index(&idx)] += 1;
    }
    let inv_n = 1.0 / n as f64;
    for (c, &p) in counts.iter().zip(&joint.probs) {
        let emp = *c as f64 * inv_n;
        if p < ZERO_MASS {
            if *c > 0 {
                return Ok(false);
            }
        } else if (emp - p).abs() > delta {
            return Ok(false);
        }
    }
    Ok(true)
}

// ============================================================================
// type grids
// ============================================================================

/// The set of empirical types of length-`n` state sequences retained by a
/// decoder: all n-types within `delta1` (max-norm) of a governing family of
/// state distributions.
#[derive(Debug, Clone)]
pub struct TypeGrid {
    n: usize,
    delta1: f64,
    types: Vec<Pmf>,
}

impl TypeGrid {
    /// All n-types within `delta / (2 |S|)` of some member of `q_set`.
    pub fn build(q_set: &[Pmf], delta: f64, n: usize) -> Result<TypeGrid> {
        if q_set.is_empty() {
            return Err(Error::config("type grid needs a nonempty governing family"));
        }
        let ns = q_set[0].len();
        if q_set.iter().any(|q| q.len() != ns) {
            return Err(Error::shape("governing family members have mixed alphabet sizes"));
        }
        if delta <= 0.0 {
            return Err(Error::domain(format!("type grid slack {delta} must be positive")));
        }
        let delta1 = delta / (2.0 * ns as f64);
        let mut types = Vec::new();
        enumerate_compositions(n, ns, &mut |counts| {
            let t: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
            let near = q_set.iter().any(|q| {
                t.iter()
                    .zip(q.probs())
                    .all(|(a, b)| (a - b).abs() <= delta1 + NORM_TOL)
            });
            if near {
                types.push(Pmf { probs: t });
            }
        })?;
        sort_types(&mut types);
        Ok(TypeGrid { n, delta1, types })
    }

    /// All n-types over an alphabet of size `ns` (governing family = the full simplex).
    pub fn full(n: usize, ns: usize) -> Result<TypeGrid> {
        if ns == 0 {
            return Err(Error::shape("type grid over empty state alphabet"));
        }
        let mut types = Vec::new();
        enumerate_compositions(n, ns, &mut |counts| {
            types.push(Pmf {
                probs: counts.iter().map(|&c| c as f64 / n as f64).collect(),
            });
        })?;
        sort_types(&mut types);
        Ok(TypeGrid { n, delta1: f64::INFINITY, types })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta1(&self) -> f64 {
        self.delta1
    }

    pub fn types(&self) -> &[Pmf] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

fn sort_types(types: &mut [Pmf]) {
    types.sort_by(|a, b| a.probs.partial_cmp(&b.probs).unwrap());
}

/// Calls `f` with every vector of `k` nonnegative counts summing to `n`.
pub(crate) fn enumerate_compositions(n: usize, k: usize, f: &mut impl FnMut(&[usize])) -> Result<()> {
    const CAP: usize = 2_000_000;
    let total = compositions_count(n, k);
    if total > CAP {
        return Err(Error::TooLarge(format!(
            "{total} compositions of {n} into {k} parts exceeds cap {CAP}"
        )));
    }
    let mut counts = vec![0usize; k];
    fn rec(counts: &mut Vec<usize>, pos: usize, left: usize, f: &mut impl FnMut(&[usize])) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            f(counts);
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(counts, pos + 1, left - c, f);
        }
    }
    rec(&mut counts, 0, n, f);
    Ok(())
}

fn compositions_count(n: usize, k: usize) -> usize {
    // C(n + k - 1, k - 1), saturating
    let mut out: u128 = 1;
    for i in 0..(k - 1) as u128 {
        out = out.saturating_mul(n as u128 + 1 + i) / (i + 1);
        if out > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    out as usize
}

// ============================================================================
// tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn test_binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!(close(binary_entropy(0.5).unwrap(), 1.0, 1e-15));
        // fixed reference value for h(0.1)
        assert!(close(binary_entropy(0.1).unwrap(), 0.46899559358928117, 1e-12));
        // symmetry
        assert!(close(binary_entropy(0.3).unwrap(), binary_entropy(0.7).unwrap(), 1e-15));
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn test_binary_convolve() {
        assert!(close(binary_convolve(0.1, 0.2).unwrap(), 0.26, 1e-15));
        assert_eq!(binary_convolve(0.3, 0.0).unwrap(), 0.3);
        assert!(close(binary_convolve(0.3, 0.5).unwrap(), 0.5, 1e-15));
        assert!(close(binary_convolve(0.3, 1.0).unwrap(), 0.7, 1e-15));
        assert!(binary_convolve(1.5, 0.2).is_err());
    }

    #[test]
    fn test_pmf_validation() {
        assert!(Pmf::new(vec![0.5, 0.5]).is_ok());
        assert!(Pmf::new(vec![0.5, 0.499]).is_err());
        assert!(Pmf::new(vec![-0.1, 1.1]).is_err());
        assert!(Pmf::new(vec![]).is_err());
        // off by more than the tolerance
        assert!(Pmf::new(vec![0.5, 0.5 + 1e-10]).is_err());
        // within tolerance
        assert!(Pmf::new(vec![0.5, 0.5 + 1e-13]).is_ok());
    }

    #[test]
    fn test_pmf_entropy() {
        assert!(close(Pmf::uniform(4).unwrap().entropy(), 2.0, 1e-15));
        assert_eq!(Pmf::degenerate(3, 1).unwrap().entropy(), 0.0);
        let p = Pmf::bernoulli(0.1).unwrap();
        assert!(close(p.entropy(), 0.46899559358928117, 1e-12));
    }

    #[test]
    fn test_joint_pmf_marginals_and_entropy() {
        // P(x,y) with X ~ Bern(0.5), Y = X with prob 0.8
        let j = JointPmf::new(vec![2, 2], vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let mx = j.marginal(&[0]).unwrap();
        assert!(close(mx.probs()[0], 0.5, 1e-15));
        let i = j.mutual_information(&[0], &[1]).unwrap();
        assert!(close(i, 0.2780719051126378, 1e-12));
        // independent joint has zero MI
        let ind = JointPmf::new(vec![2, 2], vec![0.25; 4]).unwrap();
        assert!(ind.mutual_information(&[0], &[1]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn test_conditional_mutual_information() {
        // X uniform, Z = X, Y independent: I(X;Y|Z) = 0, I(X;Z|Y) = 1
        let j = JointPmf::from_fn(vec![2, 2, 2], |idx| {
            let (x, y, z) = (idx[0], idx[1], idx[2]);
            if z == x {
                0.25
            } else {
                let _ = y;
                0.0
            }
        })
        .unwrap();
        assert!(j.conditional_mutual_information(&[0], &[1], &[2]).unwrap().abs() < 1e-12);
        assert!(close(
            j.conditional_mutual_information(&[0], &[2], &[1]).unwrap(),
            1.0,
            1e-12
        ));
    }

    #[test]
    fn test_joint_pmf_shape_errors() {
        assert!(JointPmf::new(vec![2, 2], vec![0.5, 0.5]).is_err());
        let j = JointPmf::new(vec![2, 2], vec![0.25; 4]).unwrap();
        assert!(j.marginal(&[1, 0]).is_err());
        assert!(j.marginal(&[2]).is_err());
        assert!(j.mutual_information(&[0], &[0]).is_err());
    }

    #[test]
    fn test_empirical_type() {
        let t = empirical_type(&[0, 1, 1, 0, 1], 2).unwrap();
        assert!(close(t.get(0), 0.4, 1e-15));
        assert!(close(t.get(1), 0.6, 1e-15));
        // trailing letters with zero count still appear
        let t = empirical_type(&[0, 0], 3).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.get(2), 0.0);
        assert!(empirical_type(&[], 2).is_err());
        assert!(empirical_type(&[5], 2).is_err());
    }

    #[test]
    fn test_is_jointly_typical() {
        // marginal typicality: six zeros and two ones against (0.75, 0.25)
        let p = JointPmf::new(vec![2], vec![0.75, 0.25]).unwrap();
        let seq = [0usize, 0, 0, 1, 0, 0, 1, 0];
        assert!(is_jointly_typical(&[&seq], &p, 0.01).unwrap());
        let seq_off = [0usize, 0, 0, 1, 1, 0, 1, 0];
        assert!(!is_jointly_typical(&[&seq_off], &p, 0.1).unwrap());
        assert!(is_jointly_typical(&[&seq_off], &p, 0.2).unwrap());
    }

    #[test]
    fn test_zero_mass_rule() {
        // joint forbids the cell (1,0); one occurrence breaks typicality at any delta
        let j = JointPmf::new(vec![2, 2], vec![0.5, 0.25, 0.0, 0.25]).unwrap();
        let a = [0usize, 0, 1, 1];
        let b = [0usize, 1, 1, 1];
        assert!(is_jointly_typical(&[&a, &b], &j, 0.5).unwrap());
        let b_bad = [0usize, 1, 0, 1];
        assert!(!is_jointly_typical(&[&a, &b_bad], &j, 0.9).unwrap());
    }

    #[test]
    fn test_type_grid_filtering() {
        // n = 10, |S| = 2, governing family {Bern(0.5)}, delta = 0.2 => delta1 = 0.05:
        // only the type (0.5, 0.5) survives
        let q = vec![Pmf::bernoulli(0.5).unwrap()];
        let g = TypeGrid::build(&q, 0.2, 10).unwrap();
        assert!(close(g.delta1(), 0.05, 1e-15));
        assert_eq!(g.len(), 1);
        assert!(close(g.types()[0].get(1), 0.5, 1e-15));
        // widening delta admits neighbors
        let g = TypeGrid::build(&q, 0.44, 10).unwrap();
        assert_eq!(g.len(), 3); // 0.4, 0.5, 0.6
    }

    #[test]
    fn test_type_grid_full() {
        let g = TypeGrid::full(4, 2).unwrap();
        assert_eq!(g.len(), 5);
        // all multiples of 1/n appear in the second component
        let mut fracs: Vec<f64> = g.types().iter().map(|t| t.get(1)).collect();
        fracs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(fracs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        // cardinality bound (n+1)^{|S|-1} style check for |S|=3
        let g3 = TypeGrid::full(6, 3).unwrap();
        assert_eq!(g3.len(), 28); // C(8,2)
        assert!(g3.len() <= 7usize.pow(2));
    }

    #[test]
    fn test_pmf_sampling_inverse_cdf() {
        let p = Pmf::new(vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(p.sample_with(0.0), 0);
        assert_eq!(p.sample_with(0.1999), 0);
        assert_eq!(p.sample_with(0.21), 1);
        assert_eq!(p.sample_with(0.69), 1);
        assert_eq!(p.sample_with(0.71), 2);
        assert_eq!(p.sample_with(0.9999999), 2);
    }
}
