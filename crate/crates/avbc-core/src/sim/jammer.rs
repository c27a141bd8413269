//! Oblivious state-sequence generators.
//!
//! A jammer may know the code construction but not the realized messages,
//! permutation, or channel noise, so every generator here depends only on its
//! own spec (and its own random stream for the i.i.d. kind).

use crate::error::{Error, Result};
use crate::prob::Pmf;
use crate::sim::rng::uniform_f64;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum JammerSpec {
    /// States i.i.d. from `q`.
    Iid { q: Vec<f64> },
    /// A fixed sequence, replayed every trial (length must equal n).
    Fixed { s: Vec<u8> },
    /// Deterministic per-letter steering of the empirical state type toward a
    /// target distribution — a documented heuristic, not a worst-case search.
    Greedy { target: Vec<f64> },
}

impl JammerSpec {
    pub fn iid(q: &Pmf) -> JammerSpec {
        JammerSpec::Iid { q: q.probs().to_vec() }
    }

    /// Emit one length-`n` state sequence over an `ns`-letter alphabet.
    pub(crate) fn sequence(&self, n: usize, ns: usize, rng: &mut ChaCha12Rng) -> Result<Vec<u8>> {
        match self {
            JammerSpec::Iid { q } => {
                let q = Pmf::new(q.clone())?;
                if q.len() != ns {
                    return Err(Error::shape(format!(
                        "jammer distribution over {} states, channel has {ns}",
                        q.len()
                    )));
                }
                Ok((0..n).map(|_| q.sample_with(uniform_f64(rng)) as u8).collect())
            }
            JammerSpec::Fixed { s } => {
                if s.len() != n {
                    return Err(Error::shape(format!(
                        "fixed jammer sequence length {} against blocklength {n}",
                        s.len()
                    )));
                }
                if let Some(&bad) = s.iter().find(|&&v| v as usize >= ns) {
                    return Err(Error::domain(format!("state {bad} outside alphabet {ns}")));
                }
                Ok(s.clone())
            }
            JammerSpec::Greedy { target } => {
                let t = Pmf::new(target.clone())?;
                if t.len() != ns {
                    return Err(Error::shape(format!(
                        "greedy jammer target over {} states, channel has {ns}",
                        t.len()
                    )));
                }
                let mut counts = vec![0u32; ns];
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    // pick the state with the largest deficit against the target
                    let s = (0..ns)
                        .max_by(|&a, &b| {
                            let da = t.get(a) * (i + 1) as f64 - counts[a] as f64;
                            let db = t.get(b) * (i + 1) as f64 - counts[b] as f64;
                            da.partial_cmp(&db).unwrap()
                        })
                        .unwrap();
                    counts[s] += 1;
                    out.push(s as u8);
                }
                Ok(out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::derive_rng;

    #[test]
    fn test_iid_type_near_q() {
        let spec = JammerSpec::Iid { q: vec![0.3, 0.7] };
        let mut rng = derive_rng(5, 0x91, 0);
        let s = spec.sequence(4000, 2, &mut rng).unwrap();
        let ones = s.iter().filter(|&&v| v == 1).count() as f64 / 4000.0;
        assert!((ones - 0.7).abs() < 0.03);
    }

    #[test]
    fn test_fixed_validates_length_and_alphabet() {
        let mut rng = derive_rng(5, 0x91, 1);
        let spec = JammerSpec::Fixed { s: vec![0, 1, 0] };
        assert!(spec.sequence(4, 2, &mut rng).is_err());
        let spec = JammerSpec::Fixed { s: vec![0, 2, 0] };
        assert!(spec.sequence(3, 2, &mut rng).is_err());
        let spec = JammerSpec::Fixed { s: vec![0, 1, 0] };
        assert_eq!(spec.sequence(3, 2, &mut rng).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn test_greedy_tracks_target_type() {
        let spec = JammerSpec::Greedy { target: vec![0.25, 0.75] };
        let mut rng = derive_rng(5, 0x91, 2);
        let s = spec.sequence(64, 2, &mut rng).unwrap();
        let ones = s.iter().filter(|&&v| v == 1).count();
        assert_eq!(ones, 48);
        // deterministic: same spec, same sequence
        let s2 = spec.sequence(64, 2, &mut rng).unwrap();
        assert_eq!(s, s2);
    }
}
