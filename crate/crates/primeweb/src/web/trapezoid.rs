use serde::{Deserialize, Serialize};

use crate::engine::PrimeIndexer;
use crate::error::{Error, Result};

/// Rotation boundaries: the successive elements of one ray. A prime `x` is on
/// rotation `ν` when `starts[ν-1] <= x < starts[ν]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rotations {
    starts: Vec<u64>,
}

impl Rotations {
    /// Boundaries from the ray of `generator`, up to `count` rotations.
    pub fn from_ray(engine: &PrimeIndexer, generator: u64, count: usize) -> Result<Self> {
        let mut starts = Vec::with_capacity(count + 1);
        let mut v = generator;
        for _ in 0..=count {
            v = engine.nth_prime(v)?;
            starts.push(v);
        }
        Ok(Self { starts })
    }

    pub fn starts(&self) -> &[u64] {
        &self.starts
    }

    /// First prime of rotation `nu` (1-based).
    pub fn start(&self, nu: usize) -> Result<u64> {
        nu.checked_sub(1)
            .and_then(|i| self.starts.get(i).copied())
            .ok_or_else(|| Error::Domain(format!("rotation {nu} beyond the {} known", self.starts.len())))
    }

    pub fn rotation_of(&self, x: u64) -> Option<usize> {
        let i = self.starts.partition_point(|&s| s <= x);
        (i >= 1 && i < self.starts.len()).then_some(i)
    }
}

/// The region between two rays spanned by a run of consecutive primes and
/// its image `depth` rotations outward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Trapezoid {
    pub rotation: usize,
    /// Position of the inner left corner within its rotation, from 1.
    pub mu: u64,
    pub width: u64,
    pub depth: u32,
    /// Prime indices of the inner corners.
    pub index: (u64, u64),
    pub inner: (u64, u64),
    pub outer: (u64, u64),
}

/// One rotation band of a decomposed trapezoid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapezoidLevel {
    pub level: u32,
    /// Index interval `[lo, hi)` the band covers.
    pub span: (u64, u64),
    pub pieces: Vec<Trapezoid>,
    /// Ray starts inside the band: `p(i)` for generators `i` strictly inside
    /// the span.
    pub ray_starts: Vec<u64>,
}

impl TrapezoidLevel {
    /// Whether the pieces cover the span once each, in index order.
    pub fn exact(&self) -> bool {
        let mut at = self.span.0;
        for t in &self.pieces {
            if t.index.0 != at || t.index.1 != at + 1 {
                return false;
            }
            at += 1;
        }
        at == self.span.1
    }
}

fn iterate(engine: &PrimeIndexer, x: u64, times: u32) -> Result<u64> {
    (0..times).try_fold(x, |v, _| engine.nth_prime(v))
}

impl Trapezoid {
    /// `z(ν, μ, k, q)`: inner corners `p(j)` and `p(j+k)` with
    /// `j = π(s_ν) − 1 + μ`, outer corners `q` rotations further.
    pub fn new(engine: &PrimeIndexer, rotations: &Rotations, nu: usize, mu: u64, width: u64, depth: u32) -> Result<Self> {
        if width == 0 || depth == 0 || mu == 0 {
            return Err(Error::Degenerate(format!("z({nu}, {mu}, {width}, {depth})")));
        }
        let j = engine.prime_pi(rotations.start(nu)?)? - 1 + mu;
        Self::at_index(engine, rotations, j, width, depth)
    }

    /// The trapezoid with inner corners at prime indices `j` and `j + width`.
    pub fn at_index(engine: &PrimeIndexer, rotations: &Rotations, j: u64, width: u64, depth: u32) -> Result<Self> {
        if width == 0 || depth == 0 || j == 0 {
            return Err(Error::Degenerate(format!("trapezoid at index {j}, width {width}, depth {depth}")));
        }
        let inner = (engine.nth_prime(j)?, engine.nth_prime(j + width)?);
        let rotation = rotations
            .rotation_of(inner.0)
            .ok_or_else(|| Error::Domain(format!("{} lies outside the known rotations", inner.0)))?;
        let mu = j + 1 - engine.prime_pi(rotations.start(rotation)?)?;
        let outer = (iterate(engine, inner.0, depth)?, iterate(engine, inner.1, depth)?);
        Ok(Self { rotation, mu, width, depth, index: (j, j + width), inner, outer })
    }

    pub fn corners(&self) -> [u64; 4] {
        [self.inner.0, self.inner.1, self.outer.0, self.outer.1]
    }

    pub fn is_elementary(&self) -> bool {
        self.width == 1 && self.depth == 1
    }

    /// Splits the trapezoid rotation by rotation into elementary pieces, one
    /// per consecutive index pair of the band's inner edge.
    pub fn decompose(&self, engine: &PrimeIndexer, rotations: &Rotations) -> Result<Vec<TrapezoidLevel>> {
        let mut levels = Vec::with_capacity(self.depth as usize);
        let mut span = self.index;
        for level in 1..=self.depth {
            let pieces =
                (span.0..span.1).map(|i| Self::at_index(engine, rotations, i, 1, 1)).collect::<Result<Vec<_>>>()?;
            let mut ray_starts = Vec::new();
            for i in span.0 + 1..span.1 {
                if !engine.is_prime(i)? {
                    ray_starts.push(engine.nth_prime(i)?);
                }
            }
            levels.push(TrapezoidLevel { level, span, pieces, ray_starts });
            span = (engine.nth_prime(span.0)?, engine.nth_prime(span.1)?);
        }
        Ok(levels)
    }
}

/// `π(p_ν(m)) = p_{ν−1}(m)` for the ray of `generator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiGeometric {
    pub generator: u64,
    pub depth: u32,
    pub element: u64,
    pub previous: u64,
    pub count: u64,
}

impl PiGeometric {
    pub fn holds(&self) -> bool {
        self.count == self.previous
    }
}

pub fn pi_geometric(engine: &PrimeIndexer, generator: u64, depth: u32) -> Result<PiGeometric> {
    if depth == 0 {
        return Err(Error::Domain("depth 0".into()));
    }
    if generator != 1 && engine.is_prime(generator)? {
        return Err(Error::Domain(format!("{generator} is not a generator")));
    }
    let previous = iterate(engine, generator, depth - 1)?;
    let element = engine.nth_prime(previous)?;
    Ok(PiGeometric { generator, depth, element, previous, count: engine.prime_pi(element)? })
}
