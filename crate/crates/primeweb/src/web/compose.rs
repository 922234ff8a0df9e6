use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::{CountingSet, Filter};

/// Primes skipped near the origin by the standard webs.
pub const DEFAULT_SKIPPED: u64 = 11;

/// Generator of the ray whose elements mark the rotations.
pub const ROTATION_RAY: u64 = 12;

/// A ray with its elements among the first skipped primes dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedRay {
    pub generator: u64,
    /// Depth of `elements[0]` in the full ray.
    pub first_depth: usize,
    pub elements: Vec<u64>,
}

/// The ray from `generator` with its elements among the first `skipped`
/// primes dropped; `depth` elements are kept.
pub fn truncated_ray(primes: &Filter, skipped: u64, generator: u64, depth: usize) -> Result<TruncatedRay> {
    if !primes.is_generator(generator)? {
        return Err(Error::Domain(format!("{generator} is not a generator")));
    }
    let cut = if skipped == 0 { 0 } else { primes.nth(skipped)? };
    let mut elements = Vec::with_capacity(depth);
    let mut v = generator;
    let mut dropped = 0;
    while elements.len() < depth {
        v = primes.nth(v)?;
        if v > cut {
            elements.push(v);
        } else {
            dropped += 1;
        }
    }
    Ok(TruncatedRay { generator, first_depth: dropped + 1, elements })
}

/// First kept element of each ray.
pub fn truncated_rays(primes: &Filter, skipped: u64, generators: &[u64]) -> Result<Vec<(u64, u64)>> {
    generators.iter().map(|&g| Ok((g, truncated_ray(primes, skipped, g, 1)?.elements[0]))).collect()
}

/// Which ray elements a web is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Composition {
    /// Three elements of the rays up to 30, two of the rays 32 to 126.
    ThreeTurns,
    /// One more element on every ray of [`Composition::ThreeTurns`].
    FourTurns,
    /// Three elements of the rays up to 36, two of the rays 38 to 151.
    FullThirdTurn,
}

impl Composition {
    /// `(generator, elements)` for every ray of the composition.
    pub fn depths(self, primes: &Filter) -> Result<Vec<(u64, usize)>> {
        let (deep_upto, shallow_upto, shallow_from, extra) = match self {
            Self::ThreeTurns => (30, 36, 32, 0),
            Self::FourTurns => (30, 36, 32, 1),
            Self::FullThirdTurn => (36, 36, 38, 0),
        };
        let last = match self {
            Self::FullThirdTurn => 151,
            _ => 126,
        };
        let mut out = Vec::new();
        for g in 1..=last {
            if !primes.is_generator(g)? {
                continue;
            }
            let depth = if g <= deep_upto {
                3
            } else if (g >= shallow_from && g <= shallow_upto) || g >= 38 {
                2
            } else {
                continue;
            };
            out.push((g, depth + extra));
        }
        Ok(out)
    }
}

/// Rays of a composition, truncated near the origin.
pub fn composition_rays(primes: &Filter, skipped: u64, composition: Composition) -> Result<Vec<TruncatedRay>> {
    composition.depths(primes)?.into_iter().map(|(g, d)| truncated_ray(primes, skipped, g, d)).collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::PrimeIndexer;
    use crate::sequences::FilterKind;

    fn primes() -> Filter {
        Filter::new(FilterKind::Primes, Arc::new(PrimeIndexer::default()))
    }

    #[test]
    fn truncated_starts() {
        let p = primes();
        let starts = truncated_rays(&p, 11, &[1, 4, 6, 8, 9, 10, 12]).unwrap();
        assert_eq!(starts, vec![(1, 127), (4, 59), (6, 41), (8, 67), (9, 83), (10, 109), (12, 37)]);
        assert_eq!(truncated_ray(&p, 0, 1, 3).unwrap().elements, vec![2, 3, 5]);
        let r8 = truncated_ray(&p, 11, 8, 3).unwrap();
        assert_eq!((r8.first_depth, r8.elements), (2, vec![67, 331, 2221]));
        assert_eq!(truncated_ray(&p, 11, 1, 1).unwrap().first_depth, 6);
        assert!(truncated_ray(&p, 11, 7, 1).is_err());
    }

    #[test]
    fn composition_sizes() {
        let p = primes();
        let count = |c: Composition| -> (usize, usize) {
            let rays = composition_rays(&p, 11, c).unwrap();
            (rays.len(), rays.iter().map(|r| r.elements.len()).sum())
        };
        assert_eq!(count(Composition::ThreeTurns), (96, 212));
        assert_eq!(count(Composition::FourTurns), (96, 308));
        assert_eq!(count(Composition::FullThirdTurn), (115, 255));
    }
}
