//! Point oracles, seeded generators, and the bit representation of a point at precision `r`.

use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{DyadicRational, RationalPoint};
use crate::error::{Error, Result};
use crate::geometry::half_log_ceil;

// Stream ids keep the random and diluted generators in disjoint seed domains.
const STREAM_RANDOM: u64 = 1 << 32;
const STREAM_DILUTED: u64 = 2 << 32;

/// Recipe for a deterministic point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// A fixed dyadic point.
    Rational { q: RationalPoint },
    /// A point of `[0,1)ⁿ` whose expansion bits all come from the seeded stream.
    Random {
        seed: u64,
        #[serde(default = "one")]
        n: usize,
    },
    /// A point of `[0,1)ⁿ` with fresh bits at density `rho` and zeros elsewhere.
    Diluted {
        seed: u64,
        rho: String,
        #[serde(default = "one")]
        n: usize,
    },
    /// `(g₁, g₂)`.
    Product { first: Box<GeneratorSpec>, second: Box<GeneratorSpec> },
}

fn one() -> usize {
    1
}

impl GeneratorSpec {
    pub fn dimension(&self) -> usize {
        match self {
            GeneratorSpec::Rational { q } => q.dimension(),
            GeneratorSpec::Random { n, .. } | GeneratorSpec::Diluted { n, .. } => *n,
            GeneratorSpec::Product { first, second } => first.dimension() + second.dimension(),
        }
    }

    /// Entropy rate per precision bit of the generating process: `0` for rational points, `n`
    /// for random points, `ρn` for diluted ones.
    pub fn information_rate(&self) -> Result<f64> {
        Ok(match self {
            GeneratorSpec::Rational { .. } => 0.0,
            GeneratorSpec::Random { n, .. } => *n as f64,
            GeneratorSpec::Diluted { rho, n, .. } => {
                let (p, q) = parse_rho(rho)?;
                p as f64 / q as f64 * *n as f64
            }
            GeneratorSpec::Product { first, second } => first.information_rate()? + second.information_rate()?,
        })
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Rational { q } => write!(f, "rational{q}"),
            GeneratorSpec::Random { seed, n } => write!(f, "random(seed={seed},n={n})"),
            GeneratorSpec::Diluted { seed, rho, n } => write!(f, "diluted(seed={seed},rho={rho},n={n})"),
            GeneratorSpec::Product { first, second } => write!(f, "({first}, {second})"),
        }
    }
}

/// Something that answers precision queries for one point of `ℝⁿ`.
pub trait PointSource: Send + Sync {
    fn dimension(&self) -> usize;
    /// A rational within `2^{-r}` of the point.
    fn query(&self, r: u32) -> RationalPoint;
    /// The point itself, when it is known to be rational.
    fn exact(&self) -> Option<RationalPoint> {
        None
    }
}

/// Shared handle to a point source, with a human-readable provenance.
#[derive(Clone)]
pub struct PointOracle {
    source: Arc<dyn PointSource>,
    provenance: String,
}

impl fmt::Debug for PointOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointOracle({})", self.provenance)
    }
}

impl PointOracle {
    pub fn new(source: Arc<dyn PointSource>, provenance: impl Into<String>) -> Self {
        PointOracle { source, provenance: provenance.into() }
    }

    pub fn from_fn<F>(n: usize, provenance: impl Into<String>, f: F) -> Self
    where
        F: Fn(u32) -> RationalPoint + Send + Sync + 'static,
    {
        PointOracle::new(Arc::new(FnSource { n, f }), provenance)
    }

    pub fn rational(q: RationalPoint) -> Self {
        let name = format!("rational{q}");
        PointOracle::new(Arc::new(FixedSource(q)), name)
    }

    pub fn dimension(&self) -> usize {
        self.source.dimension()
    }

    pub fn query(&self, r: u32) -> RationalPoint {
        self.source.query(r)
    }

    pub fn exact(&self) -> Option<RationalPoint> {
        self.source.exact()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// The oracle for `(self, other)`. Each factor is queried one bit finer so the joined error
    /// stays below `2^{-r}`.
    pub fn join(&self, other: &PointOracle) -> PointOracle {
        if let (Some(p), Some(q)) = (self.exact(), other.exact()) {
            let name = format!("({}, {})", self.provenance, other.provenance);
            return PointOracle::new(Arc::new(FixedSource(p.join(&q))), name);
        }
        let (a, b) = (self.clone(), other.clone());
        PointOracle::from_fn(
            self.dimension() + other.dimension(),
            format!("({}, {})", self.provenance, other.provenance),
            move |r| a.query(r + 1).join(&b.query(r + 1)),
        )
    }
}

struct FnSource<F> {
    n: usize,
    f: F,
}

impl<F: Fn(u32) -> RationalPoint + Send + Sync> PointSource for FnSource<F> {
    fn dimension(&self) -> usize {
        self.n
    }
    fn query(&self, r: u32) -> RationalPoint {
        (self.f)(r)
    }
}

struct FixedSource(RationalPoint);

impl PointSource for FixedSource {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }
    fn query(&self, _r: u32) -> RationalPoint {
        self.0.clone()
    }
    fn exact(&self) -> Option<RationalPoint> {
        Some(self.0.clone())
    }
}

/// Lazily generated binary expansion `0.b₁b₂b₃…` of a coordinate in `[0,1)`.
struct Expansion {
    rho: Option<(u128, u128)>,
    state: Mutex<(ChaCha8Rng, Vec<bool>, u64, u32)>,
}

impl Expansion {
    fn new(seed: u64, stream: u64, rho: Option<(u128, u128)>) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Expansion { rho, state: Mutex::new((rng, Vec::new(), 0, 0)) }
    }

    fn fresh(&self, i: u128) -> bool {
        match self.rho {
            None => true,
            Some((p, q)) => (i * p) / q > ((i - 1) * p) / q,
        }
    }

    /// `⌊x·2^r⌋`.
    fn scaled(&self, r: u32) -> BigInt {
        let mut guard = self.state.lock().expect("poisoned");
        let (rng, bits, word, avail) = &mut *guard;
        while bits.len() < r as usize {
            let i = bits.len() as u128 + 1;
            let b = if self.fresh(i) {
                if *avail == 0 {
                    *word = rng.next_u64();
                    *avail = 64;
                }
                *avail -= 1;
                (*word >> *avail) & 1 == 1
            } else {
                false
            };
            bits.push(b);
        }
        bits_to_int(&bits[..r as usize])
    }
}

fn bits_to_int(bits: &[bool]) -> BigInt {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    // Big-endian with the first bit as the most significant.
    let pad = bytes.len() * 8 - bits.len();
    for (k, &b) in bits.iter().enumerate() {
        if b {
            let pos = pad + k;
            bytes[pos / 8] |= 0x80 >> (pos % 8);
        }
    }
    BigInt::from_bytes_be(Sign::Plus, &bytes)
}

struct ExpansionSource(Vec<Expansion>);

impl PointSource for ExpansionSource {
    fn dimension(&self) -> usize {
        self.0.len()
    }
    // Per-coordinate truncation at r + ⌈½ log₂ n⌉ bits keeps the Euclidean error below 2^{-r}.
    fn query(&self, r: u32) -> RationalPoint {
        let bits = r + half_log_ceil(self.0.len());
        RationalPoint::new(self.0.iter().map(|e| DyadicRational::new(e.scaled(bits), bits)).collect())
            .expect("dimension ≥ 1")
    }
}

fn parse_rho(rho: &str) -> Result<(u128, u128)> {
    let q: BigRational = match rho.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| Error::InvalidSpec(format!("bad rho {rho:?}")))?;
            let b: BigInt = b.trim().parse().map_err(|_| Error::InvalidSpec(format!("bad rho {rho:?}")))?;
            if b.is_zero() {
                return Err(Error::InvalidSpec("rho has zero denominator".into()));
            }
            BigRational::new(a, b)
        }
        None => {
            let d: DyadicRational = rho.parse().map_err(|_| Error::InvalidSpec(format!("bad rho {rho:?}")))?;
            d.to_rational()
        }
    };
    if q.is_negative() || q > BigRational::one() {
        return Err(Error::InvalidSpec(format!("rho must lie in [0,1], got {rho}")));
    }
    let p = q.numer().to_u128().filter(|&p| p < 1 << 40);
    let d = q.denom().to_u128().filter(|&d| d < 1 << 40);
    match (p, d) {
        (Some(p), Some(d)) => Ok((p, d)),
        _ => Err(Error::InvalidSpec("rho numerator and denominator must be below 2^40".into())),
    }
}

/// Build the deterministic oracle described by `spec`.
pub fn make_oracle(spec: &GeneratorSpec) -> Result<PointOracle> {
    let name = spec.to_string();
    match spec {
        GeneratorSpec::Rational { q } => Ok(PointOracle::new(Arc::new(FixedSource(q.clone())), name)),
        GeneratorSpec::Random { seed, n } | GeneratorSpec::Diluted { seed, n, .. } => {
            if *n == 0 {
                return Err(Error::InvalidSpec("dimension must be at least one".into()));
            }
            let (base, rho) = match spec {
                GeneratorSpec::Diluted { rho, .. } => (STREAM_DILUTED, Some(parse_rho(rho)?)),
                _ => (STREAM_RANDOM, None),
            };
            let coords = (0..*n as u64).map(|i| Expansion::new(*seed, base + i, rho)).collect();
            Ok(PointOracle::new(Arc::new(ExpansionSource(coords)), name))
        }
        GeneratorSpec::Product { first, second } => {
            let joined = make_oracle(first)?.join(&make_oracle(second)?);
            Ok(PointOracle { provenance: name, ..joined })
        }
    }
}

/// Integer-part width `w` such that `-2^w ≤ ⌊c⌋ < 2^w` for every coordinate.
fn integer_width(p: &RationalPoint) -> u32 {
    p.coords()
        .iter()
        .map(|c| {
            let f = c.floor();
            let mag = if f.is_negative() { -f - 1 } else { f };
            mag.bits() as u32
        })
        .max()
        .unwrap_or(0)
}

/// Bits of `p` truncated to precision `r`: Elias gamma of `w+1`, then the `(w+1+r)`-bit two's
/// complement of `⌊pᵢ·2^r⌋` for each coordinate, the coordinates interleaved bit by bit from the
/// most significant end.
pub fn representation(p: &RationalPoint, r: u32) -> Vec<bool> {
    let w = integer_width(p);
    let width = (w + 1 + r) as usize;
    let mut out = Vec::with_capacity(2 * w as usize + 2 + width * p.dimension());
    let header = (w + 1) as u64;
    let hb = 64 - header.leading_zeros() as usize;
    out.extend(std::iter::repeat_n(false, hb - 1));
    out.extend((0..hb).rev().map(|k| (header >> k) & 1 == 1));
    let columns: Vec<Vec<bool>> = p
        .coords()
        .iter()
        .map(|c| {
            let m = c.floor_scaled(r);
            let m = if m.is_negative() { (BigInt::one() << width) + m } else { m };
            let (_, raw) = m.to_bytes_be();
            let total = raw.len() * 8;
            (0..width)
                .map(|k| {
                    let pos = total as isize - width as isize + k as isize;
                    pos >= 0 && raw[pos as usize / 8] & (0x80 >> (pos as usize % 8)) != 0
                })
                .collect()
        })
        .collect();
    for k in 0..width {
        for col in &columns {
            out.push(col[k]);
        }
    }
    out
}
