//! Letter permutations, the permutation random-code ensemble, and the
//! reduction of its shared randomness to a uniform family of n^2 codes.

use crate::error::{Error, Result};
use crate::sim::rng::{derive_rng, random_permutation, TAG_ELIM};
use rand_chacha::ChaCha12Rng;

/// A bijection of letter positions. `fwd[i]` is the image of position `i`:
/// the permuted word `pi w` satisfies `(pi w)[fwd[i]] = w[i]`, and the
/// permuted encoder reads strategy letter `fwd[i]` at time `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    fwd: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Permutation {
        Permutation { fwd: (0..n as u32).collect() }
    }

    pub fn reversal(n: usize) -> Permutation {
        Permutation { fwd: (0..n as u32).rev().collect() }
    }

    pub fn random(n: usize, rng: &mut ChaCha12Rng) -> Permutation {
        Permutation { fwd: random_permutation(rng, n) }
    }

    pub fn from_images(fwd: Vec<u32>) -> Result<Permutation> {
        let n = fwd.len();
        let mut seen = vec![false; n];
        for &v in &fwd {
            if v as usize >= n || seen[v as usize] {
                return Err(Error::domain("not a bijection of letter positions"));
            }
            seen[v as usize] = true;
        }
        Ok(Permutation { fwd })
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    #[inline]
    pub(crate) fn image(&self, i: usize) -> usize {
        self.fwd[i] as usize
    }

    /// Permuted copy of a letter sequence: `out[fwd[i]] = src[i]`.
    pub fn apply<T: Copy + Default>(&self, src: &[T]) -> Vec<T> {
        debug_assert_eq!(src.len(), self.fwd.len());
        let mut out = vec![T::default(); src.len()];
        for (i, &v) in src.iter().enumerate() {
            out[self.fwd[i] as usize] = v;
        }
        out
    }
}

/// The elimination step: draw `n^2` i.i.d. codes (here: permutations) from
/// the ensemble, to be used with uniform weights.
pub fn eliminate(n: usize, seed: u64) -> ReducedFamily {
    let k = n * n;
    let perms = (0..k)
        .map(|j| {
            let mut rng = derive_rng(seed, TAG_ELIM, j as u64);
            Permutation::random(n, &mut rng)
        })
        .collect();
    ReducedFamily { perms }
}

/// A uniform family of permutation codes with `k = n^2` members.
#[derive(Debug, Clone)]
pub struct ReducedFamily {
    perms: Vec<Permutation>,
}

impl ReducedFamily {
    /// Family from an explicit list; all members must share one length.
    pub fn from_permutations(perms: Vec<Permutation>) -> Result<ReducedFamily> {
        if perms.is_empty() {
            return Err(Error::shape("permutation family must be nonempty"));
        }
        let n = perms[0].len();
        if perms.iter().any(|p| p.len() != n) {
            return Err(Error::shape("permutation family members must share one length"));
        }
        Ok(ReducedFamily { perms })
    }

    pub fn k(&self) -> usize {
        self.perms.len()
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn get(&self, gamma: usize) -> &Permutation {
        &self.perms[gamma]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::derive_rng;

    #[test]
    fn test_identity_and_reversal() {
        let id = Permutation::identity(5);
        assert_eq!(id.apply(&[1u8, 2, 3, 4, 5]), vec![1, 2, 3, 4, 5]);
        let rev = Permutation::reversal(5);
        assert_eq!(rev.apply(&[1u8, 2, 3, 4, 5]), vec![5, 4, 3, 2, 1]);
    }

    #[test]
    fn test_from_images_rejects_non_bijections() {
        assert!(Permutation::from_images(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_images(vec![0, 3, 1]).is_err());
        assert!(Permutation::from_images(vec![2, 0, 1]).is_ok());
    }

    #[test]
    fn test_apply_matches_image_convention() {
        let mut rng = derive_rng(3, 0xAB, 0);
        let pi = Permutation::random(64, &mut rng);
        let src: Vec<u32> = (0..64).collect();
        let out = pi.apply(&src);
        for i in 0..64 {
            assert_eq!(out[pi.image(i)], src[i]);
        }
    }

    #[test]
    fn test_eliminate_counts_and_determinism() {
        let fam = eliminate(20, 9);
        assert_eq!(fam.k(), 400);
        assert!(fam.perms().iter().all(|p| p.len() == 20));
        let again = eliminate(20, 9);
        assert_eq!(fam.perms()[7], again.perms()[7]);
        let other = eliminate(20, 10);
        assert!(fam.perms().iter().zip(other.perms()).any(|(a, b)| a != b));
    }
}
