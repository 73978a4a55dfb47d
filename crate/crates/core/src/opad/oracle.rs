//! One-bit random oracle with a lazily sampled simulation mode.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::mc::SimRng;
use crate::tcf::{Image, TcfPublicKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMode {
    /// Keyed SHA-256 truncated to one bit.
    Hash,
    /// Fresh uniform bits drawn on first query and remembered.
    Lazy,
}

#[derive(Debug, Clone)]
enum Source {
    Hash([u8; 32]),
    Lazy {
        rng: Box<SimRng>,
        database: BTreeMap<u64, bool>,
    },
}

/// `H : X -> {0,1}`.
///
/// Adversary queries go through [`PhaseOracle::query`] and are logged.
/// Evaluations made by honest parties, including the coherent phase
/// application inside `qubit_enc`, use [`PhaseOracle::silent`] and leave the
/// log untouched; both paths see the same function.
#[derive(Debug, Clone)]
pub struct PhaseOracle {
    source: Source,
    log: Vec<u64>,
}

impl PhaseOracle {
    pub fn new<R: Rng + ?Sized>(mode: OracleMode, rng: &mut R) -> Self {
        let source = match mode {
            OracleMode::Hash => {
                let mut key = [0u8; 32];
                rng.fill(&mut key);
                Source::Hash(key)
            }
            OracleMode::Lazy => Source::Lazy {
                rng: Box::new(SimRng::seed_from_u64(rng.random())),
                database: BTreeMap::new(),
            },
        };
        Self {
            source,
            log: Vec::new(),
        }
    }

    pub fn mode(&self) -> OracleMode {
        match self.source {
            Source::Hash(_) => OracleMode::Hash,
            Source::Lazy { .. } => OracleMode::Lazy,
        }
    }

    /// Evaluate without recording the point.
    pub fn silent(&mut self, x: u64) -> bool {
        match &mut self.source {
            Source::Hash(key) => {
                let mut h = Sha256::new();
                h.update(*key);
                h.update(x.to_le_bytes());
                h.finalize()[0] & 1 == 1
            }
            Source::Lazy { rng, database } => *database.entry(x).or_insert_with(|| rng.random()),
        }
    }

    /// Evaluate and record the point in the query log.
    pub fn query(&mut self, x: u64) -> bool {
        self.log.push(x);
        self.silent(x)
    }

    /// Points passed to [`PhaseOracle::query`], in order, with repeats.
    pub fn log(&self) -> &[u64] {
        &self.log
    }

    /// Every point assigned a value so far in lazy mode.
    pub fn database(&self) -> Option<&BTreeMap<u64, bool>> {
        match &self.source {
            Source::Lazy { database, .. } => Some(database),
            Source::Hash(_) => None,
        }
    }
}

/// A claw `(x0, x1)` among the logged queries, if one exists. Every
/// returned pair satisfies `chk` on both branches for a common image.
pub fn extract_claw(oracle: &PhaseOracle, pk: &TcfPublicKey) -> Option<(u64, u64)> {
    let points: BTreeSet<u64> = oracle.log().iter().copied().collect();
    let mut first_branch: BTreeMap<Image, u64> = BTreeMap::new();
    for &x in &points {
        if let Ok(support) = pk.support(false, x) {
            for (y, _) in support {
                first_branch.entry(y).or_insert(x);
            }
        }
    }
    points.iter().find_map(|&x1| {
        let support = pk.support(true, x1).ok()?;
        support.into_iter().find_map(|(y, _)| {
            let &x0 = first_branch.get(&y)?;
            (pk.chk(false, x0, &y) && pk.chk(true, x1, &y)).then_some((x0, x1))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::rng_from_seed;
    use crate::tcf::{gen, TcfBackend};

    #[test]
    fn repeated_queries_agree() {
        let mut rng = rng_from_seed(1);
        for mode in [OracleMode::Hash, OracleMode::Lazy] {
            let mut h = PhaseOracle::new(mode, &mut rng);
            let first: Vec<bool> = (0..64).map(|x| h.query(x)).collect();
            let second: Vec<bool> = (0..64).map(|x| h.silent(x)).collect();
            assert_eq!(first, second);
            assert!(first.iter().any(|&b| b) && first.iter().any(|&b| !b));
        }
    }

    #[test]
    fn silent_queries_are_not_logged() {
        let mut rng = rng_from_seed(2);
        let mut h = PhaseOracle::new(OracleMode::Lazy, &mut rng);
        h.silent(3);
        h.query(5);
        assert_eq!(h.log(), &[5]);
        assert_eq!(h.database().unwrap().len(), 2);
    }

    #[test]
    fn empty_log_has_no_claw() {
        let mut rng = rng_from_seed(3);
        let kp = gen(6, None, TcfBackend::Ideal, &mut rng).unwrap();
        let h = PhaseOracle::new(OracleMode::Lazy, &mut rng);
        assert_eq!(extract_claw(&h, &kp.pk), None);
    }

    #[test]
    fn logged_claw_is_found() {
        let mut rng = rng_from_seed(4);
        let kp = gen(6, None, TcfBackend::Ideal, &mut rng).unwrap();
        let mut h = PhaseOracle::new(OracleMode::Lazy, &mut rng);
        let (y, _) = kp.pk.eval(false, 9, &mut rng).unwrap();
        let (x0, x1) = kp.sk.claw(&y).unwrap();
        h.query(x1);
        h.query(17);
        h.query(x0);
        // Either orientation of {x0, x1} is a claw for some image.
        let (a, b) = extract_claw(&h, &kp.pk).unwrap();
        let mut pair = [a, b];
        pair.sort_unstable();
        let mut planted = [x0, x1];
        planted.sort_unstable();
        assert_eq!(pair, planted);
        let (img, _) = kp.pk.eval(false, a, &mut rng).unwrap();
        assert!(kp.pk.chk(true, b, &img));
    }

    // With Q uniform queries the chance of containing a claw is at most
    // Q^2 / 2^n (each unordered pair is a claw with probability <= 2/2^n).
    #[test]
    fn random_queries_rarely_contain_claws() {
        let mut rng = rng_from_seed(5);
        let n = 10;
        let queries = 20u64;
        let trials = 2_000;
        let mut found = 0;
        for _ in 0..trials {
            let kp = gen(n, None, TcfBackend::Ideal, &mut rng).unwrap();
            let mut h = PhaseOracle::new(OracleMode::Lazy, &mut rng);
            for _ in 0..queries {
                h.query(rng.random_range(0..1u64 << n));
            }
            if extract_claw(&h, &kp.pk).is_some() {
                found += 1;
            }
        }
        let bound = 2.0 * (queries * queries) as f64 / (1u64 << n) as f64;
        assert!((found as f64 / trials as f64) <= bound, "{found}");
    }

    #[cfg(feature = "lwe")]
    #[test]
    fn lwe_claw_is_found() {
        let mut rng = rng_from_seed(6);
        let kp = gen(5, None, TcfBackend::Lwe, &mut rng).unwrap();
        let mut h = PhaseOracle::new(OracleMode::Hash, &mut rng);
        let (y, _) = kp.pk.eval(false, 3, &mut rng).unwrap();
        let (x0, x1) = kp.sk.claw(&y).unwrap();
        h.query(x0);
        h.query(x1);
        let (a, b) = extract_claw(&h, &kp.pk).unwrap();
        let shared = kp.pk.support(false, a).unwrap();
        assert!(shared.iter().any(|(img, _)| kp.pk.chk(true, b, img)));
    }
}
