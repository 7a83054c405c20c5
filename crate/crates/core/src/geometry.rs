//! Exact geometry of open balls, half-open dyadic cubes, scaled lattices and the norm-ordered
//! enumeration of `ℤⁿ`. No floating point is used here.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::bits::BitString;
use crate::codec::{DyadicRational, RationalPoint};
use crate::error::{Error, Result};
use crate::machine::Enumeration;

/// An open ball with dyadic center and positive rational radius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    center: RationalPoint,
    radius: BigRational,
}

impl Ball {
    /// `B_{2^{-r}}(center)`.
    pub fn new(center: RationalPoint, r: u32) -> Self {
        Ball { center, radius: DyadicRational::pow2_neg(r).to_rational() }
    }

    pub fn with_radius(center: RationalPoint, radius: BigRational) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::Precondition("ball radius must be positive".into()));
        }
        Ok(Ball { center, radius })
    }

    pub fn center(&self) -> &RationalPoint {
        &self.center
    }

    pub fn radius(&self) -> &BigRational {
        &self.radius
    }

    pub fn dimension(&self) -> usize {
        self.center.dimension()
    }

    /// `Some(r)` when the radius is exactly `2^{-r}` with `r ≥ 0`.
    pub fn radius_exp(&self) -> Option<u32> {
        let d = DyadicRational::from_rational(&self.radius)?;
        (d.mantissa().is_one()).then_some(d.exponent())
    }

    /// `|q − center|² < radius²`, decided exactly.
    pub fn contains(&self, q: &RationalPoint) -> bool {
        debug_assert_eq!(q.dimension(), self.dimension());
        let d2 = q.dist_sq(&self.center).to_rational();
        d2 < &self.radius * &self.radius
    }
}

/// `αB`: same center, radius multiplied by `alpha > 0`.
pub fn scale_ball(b: &Ball, alpha: &BigRational) -> Result<Ball> {
    if !alpha.is_positive() {
        return Err(Error::Precondition("scale factor must be positive".into()));
    }
    Ball::with_radius(b.center.clone(), &b.radius * alpha)
}

/// The half-open cube `Q^{(r)}_m = Π [mᵢ2^{-r}, (mᵢ+1)2^{-r})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DyadicCube {
    pub precision: u32,
    #[serde(serialize_with = "ser_ints")]
    pub index: Vec<BigInt>,
}

fn ser_ints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|m| m.to_string()))
}

impl DyadicCube {
    pub fn new(precision: u32, index: Vec<BigInt>) -> Self {
        DyadicCube { precision, index }
    }

    pub fn dimension(&self) -> usize {
        self.index.len()
    }

    pub fn contains(&self, q: &RationalPoint) -> bool {
        q.dimension() == self.dimension()
            && q.coords().iter().zip(&self.index).all(|(c, m)| {
                let lo = DyadicRational::new(m.clone(), self.precision);
                let hi = DyadicRational::new(m + 1, self.precision);
                lo <= *c && *c < hi
            })
    }

    pub fn corner(&self) -> RationalPoint {
        RationalPoint::new(
            self.index.iter().map(|m| DyadicRational::new(m.clone(), self.precision)).collect(),
        )
        .expect("cube has dimension ≥ 1")
    }

    /// Exact squared distance from `p` to the closure of the cube.
    pub fn dist_sq_to(&self, p: &RationalPoint) -> DyadicRational {
        let side = DyadicRational::pow2_neg(self.precision);
        p.coords()
            .iter()
            .zip(&self.index)
            .map(|(c, m)| {
                let lo = DyadicRational::new(m.clone(), self.precision);
                let hi = &lo + &side;
                if *c < lo {
                    &lo - c
                } else if *c > hi {
                    c - &hi
                } else {
                    DyadicRational::zero()
                }
            })
            .fold(DyadicRational::zero(), |acc, d| &acc + &(&d * &d))
    }
}

/// The unique `r`-dyadic cube containing `q`.
pub fn cube_containing(q: &RationalPoint, r: u32) -> DyadicCube {
    DyadicCube::new(r, q.coords().iter().map(|c| c.floor_scaled(r)).collect())
}

/// Offsets in `{-1, 0, 1}ⁿ` in lexicographic order.
fn neighbor_offsets(n: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                [-1i64, 0, 1].into_iter().map(move |d| {
                    let mut w = v.clone();
                    w.push(d);
                    w
                })
            })
            .collect();
    }
    out
}

/// Every `r`-dyadic cube meeting the open ball of radius `2^{-r}`.
pub fn cubes_intersecting_ball(b: &Ball) -> Result<Vec<DyadicCube>> {
    let r = b
        .radius_exp()
        .ok_or_else(|| Error::Precondition("ball radius must be 2^{-r}".into()))?;
    let home = cube_containing(&b.center, r);
    let rho2 = &b.radius * &b.radius;
    let mut out = Vec::new();
    for off in neighbor_offsets(b.dimension()) {
        let idx = home.index.iter().zip(&off).map(|(m, d)| m + d).collect();
        let cube = DyadicCube::new(r, idx);
        if cube.dist_sq_to(&b.center).to_rational() < rho2 {
            out.push(cube);
        }
    }
    Ok(out)
}

/// `l = ⌈½ log₂ n⌉`, the smallest `l` with `4^l ≥ n`.
pub fn half_log_ceil(n: usize) -> u32 {
    let mut l = 0u32;
    while (1u128 << (2 * l)) < n as u128 {
        l += 1;
    }
    l
}

/// A point of `2^{-(r+l)}ℤⁿ` strictly inside a ball of radius `2^{-r}`, `l = ⌈½ log₂ n⌉`.
///
/// Rounds the center to the lattice, then scans its `3ⁿ` lattice neighbors.
pub fn lattice_point_in_ball(b: &Ball) -> Result<RationalPoint> {
    let r = b
        .radius_exp()
        .ok_or_else(|| Error::Precondition("ball radius must be 2^{-r}".into()))?;
    let step = r + half_log_ceil(b.dimension());
    let rounded: Vec<BigInt> = b.center.coords().iter().map(|c| c.round_scaled(step)).collect();
    let mut offsets = neighbor_offsets(b.dimension());
    // Try the rounded point itself first.
    offsets.sort_by_key(|o| o.iter().map(|d| d.abs()).sum::<i64>());
    for off in offsets {
        let coords = rounded
            .iter()
            .zip(&off)
            .map(|(m, d)| DyadicRational::new(m + d, step))
            .collect();
        let q = RationalPoint::new(coords)?;
        if b.contains(&q) {
            return Ok(q);
        }
    }
    Err(Error::Internal(format!("no lattice point of 2^-{step}Z^n inside the ball around {}", b.center)))
}

/// Per-coordinate ordering key: `0, 1, −1, 2, −2, …`.
fn coord_key(v: i64) -> (u64, bool) {
    (v.unsigned_abs(), v < 0)
}

fn point_key(p: &[i64]) -> (u128, Vec<(u64, bool)>) {
    let norm2 = p.iter().map(|&v| (v as i128 * v as i128) as u128).sum();
    (norm2, p.iter().map(|&v| coord_key(v)).collect())
}

/// The enumeration `m₀, m₁, …` of `ℤⁿ` ordered by Euclidean norm, ties broken lexicographically
/// with coordinates ordered `0, 1, −1, 2, −2, …`.
#[derive(Debug)]
pub struct ZnEnumeration {
    n: usize,
    // Complete prefix: every point with |m|² ≤ radius² is present and sorted.
    points: Vec<Vec<i64>>,
    radius: i64,
}

impl ZnEnumeration {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least one");
        let mut e = ZnEnumeration { n, points: Vec::new(), radius: -1 };
        e.grow_to_radius(2);
        e
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    fn grow_to_radius(&mut self, radius: i64) {
        let n = self.n;
        let r2 = radius as i128 * radius as i128;
        let mut pts = Vec::new();
        let mut cur = vec![-radius; n];
        loop {
            let norm2: i128 = cur.iter().map(|&v| v as i128 * v as i128).sum();
            if norm2 <= r2 {
                pts.push(cur.clone());
            }
            let mut k = n;
            loop {
                if k == 0 {
                    pts.sort_by_cached_key(|p| point_key(p));
                    self.points = pts;
                    self.radius = radius;
                    return;
                }
                k -= 1;
                if cur[k] < radius {
                    cur[k] += 1;
                    for c in cur.iter_mut().skip(k + 1) {
                        *c = -radius;
                    }
                    break;
                }
            }
        }
    }

    /// `m_i`.
    pub fn point(&mut self, i: usize) -> &[i64] {
        while self.points.len() <= i {
            let next = (self.radius * 2).max(2);
            self.grow_to_radius(next);
        }
        &self.points[i]
    }

    /// Index of `m` in the enumeration.
    pub fn index_of(&mut self, m: &[i64]) -> usize {
        assert_eq!(m.len(), self.n);
        let norm2: i128 = m.iter().map(|&v| v as i128 * v as i128).sum();
        while (self.radius as i128) * (self.radius as i128) < norm2 {
            let next = (self.radius * 2).max(2);
            self.grow_to_radius(next);
        }
        let key = point_key(m);
        self.points
            .binary_search_by(|p| point_key(p).cmp(&key))
            .expect("point lies inside the complete prefix")
    }

    /// The first `count` points.
    pub fn prefix(&mut self, count: usize) -> &[Vec<i64>] {
        if count > 0 {
            self.point(count - 1);
        }
        &self.points[..count]
    }
}

fn shared_enumerations() -> &'static Mutex<BTreeMap<usize, Arc<Mutex<ZnEnumeration>>>> {
    static CELL: OnceLock<Mutex<BTreeMap<usize, Arc<Mutex<ZnEnumeration>>>>> = OnceLock::new();
    CELL.get_or_init(|| Mutex::new(BTreeMap::new()))
}

fn shared(n: usize) -> Arc<Mutex<ZnEnumeration>> {
    let mut all = shared_enumerations().lock().expect("poisoned");
    Arc::clone(all.entry(n).or_insert_with(|| Arc::new(Mutex::new(ZnEnumeration::new(n)))))
}

/// `m_i` of the norm-ordered enumeration of `ℤⁿ`.
pub fn zn_enumeration(i: usize, n: usize) -> Vec<i64> {
    shared(n).lock().expect("poisoned").point(i).to_vec()
}

/// Inverse of [`zn_enumeration`].
pub fn zn_index(m: &[i64]) -> usize {
    shared(m.len()).lock().expect("poisoned").index_of(m)
}

/// Exact test of `i < (2|m|+1)ⁿ` where `|m|` is the Euclidean norm.
///
/// Writes `(2√N + 1)ⁿ = A + B√N` with integers `A, B ≥ 0`, `N = |m|²`.
pub fn enumeration_bound_holds(i: u64, m: &[i64]) -> bool {
    let n = m.len();
    let norm2 = BigInt::from(m.iter().map(|&v| v as i128 * v as i128).sum::<i128>());
    // (2s + 1)^n with s = √N: track coefficients of 1 and s.
    let mut a = BigInt::one();
    let mut b = BigInt::zero();
    for _ in 0..n {
        // (a + b s)(1 + 2 s) = a + 2 b N + (2a + b) s
        let na = &a + BigInt::from(2) * &b * &norm2;
        let nb = BigInt::from(2) * &a + &b;
        a = na;
        b = nb;
    }
    let i = BigInt::from(i);
    if i < a {
        return true;
    }
    let gap = &i - &a;
    &b * &b * &norm2 > &gap * &gap
}

/// One block of a layered disjoint system.
#[derive(Debug, Clone, Serialize)]
pub struct LdsRecord {
    pub layer: u32,
    pub block: usize,
    pub cube: DyadicCube,
    pub members: BTreeSet<BitString>,
}

/// The dyadic-cube LDS restricted to the machine's `dim`-dimensional output points: layer `r` is
/// the partition into `r`-dyadic cubes, block `t` is the cube whose index is `m_t`.
pub fn dyadic_lds(dim: usize, r_max: u32, t_max: usize, en: &Enumeration) -> Vec<LdsRecord> {
    let points = en.points(dim);
    let mut out = Vec::new();
    for r in 0..=r_max {
        let mut blocks: BTreeMap<usize, LdsRecord> = BTreeMap::new();
        for pe in points.iter() {
            let cube = cube_containing(&pe.point, r);
            let Some(idx) = cube.index.iter().map(|m| m.to_i64()).collect::<Option<Vec<_>>>() else {
                continue;
            };
            let t = zn_index(&idx);
            if t > t_max {
                continue;
            }
            blocks
                .entry(t)
                .or_insert_with(|| LdsRecord { layer: r, block: t, cube, members: BTreeSet::new() })
                .members
                .insert(pe.encoding.clone());
        }
        out.extend(blocks.into_values());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(s: &[&str]) -> RationalPoint {
        RationalPoint::new(s.iter().map(|c| c.parse().unwrap()).collect()).unwrap()
    }

    // 0.3 and 0.7 have no finite binary expansion; the nearest 8-bit dyadics stand in for them.
    const P3: &str = "77/256";
    const P7: &str = "179/256";

    #[test]
    fn cube_examples() {
        assert_eq!(cube_containing(&pt(&[P3]), 1).index, vec![BigInt::from(0)]);
        assert_eq!(cube_containing(&pt(&["-77/256"]), 0).index, vec![BigInt::from(-1)]);
        assert_eq!(
            cube_containing(&pt(&["1/2", "1/2"]), 1).index,
            vec![BigInt::from(1), BigInt::from(1)]
        );
    }

    #[test]
    fn cover_examples() {
        let b = Ball::new(pt(&["1/2"]), 0);
        let idx: Vec<BigInt> = cubes_intersecting_ball(&b).unwrap().into_iter().map(|c| c.index[0].clone()).collect();
        assert_eq!(idx, [-1, 0, 1].map(BigInt::from));
        let b = Ball::new(pt(&["1/4"]), 2);
        let idx: Vec<BigInt> = cubes_intersecting_ball(&b).unwrap().into_iter().map(|c| c.index[0].clone()).collect();
        assert_eq!(idx, [0, 1].map(BigInt::from));
    }

    #[test]
    fn lattice_examples() {
        let q = lattice_point_in_ball(&Ball::new(pt(&[P3]), 2)).unwrap();
        assert_eq!(q, pt(&["1/4"]));
        let q = lattice_point_in_ball(&Ball::new(pt(&[P3, P7]), 0)).unwrap();
        assert_eq!(q, pt(&["1/2", "1/2"]));
    }

    #[test]
    fn lattice_exponent() {
        assert_eq!([1, 2, 3, 4, 5, 16, 17].map(half_log_ceil), [0, 1, 1, 1, 2, 2, 3]);
    }

    #[test]
    fn zn_examples() {
        assert_eq!(zn_enumeration(0, 3), vec![0, 0, 0]);
        let seq: Vec<i64> = (0..7).map(|i| zn_enumeration(i, 1)[0]).collect();
        assert_eq!(seq, [0, 1, -1, 2, -2, 3, -3]);
        let two: Vec<Vec<i64>> = (0..5).map(|i| zn_enumeration(i, 2)).collect();
        assert_eq!(two, vec![vec![0, 0], vec![0, 1], vec![0, -1], vec![1, 0], vec![-1, 0]]);
        assert_eq!(zn_index(&[-1, 0]), 4);
    }

    #[test]
    fn scale_ball_examples() {
        let b = Ball::new(pt(&["1/8", "3/8"]), 3);
        let one = BigRational::one();
        assert_eq!(scale_ball(&b, &one).unwrap(), b);
        let two = BigRational::from_integer(2.into());
        let four = BigRational::from_integer(4.into());
        let twice = scale_ball(&scale_ball(&b, &two).unwrap(), &two).unwrap();
        assert_eq!(twice, scale_ball(&b, &four).unwrap());
        assert!(scale_ball(&b, &BigRational::zero()).is_err());
    }

    #[test]
    fn expanded_ball_radius_exceeds_half_root_n() {
        for n in 1usize..=16 {
            for r in 0u32..6 {
                let l = half_log_ceil(n);
                let b = Ball::new(RationalPoint::origin(n), r);
                let alpha = BigRational::from_integer(BigInt::one() << ((r + l) as usize));
                let big = scale_ball(&b, &alpha).unwrap();
                assert_eq!(big.radius(), &BigRational::from_integer(BigInt::one() << l as usize));
                // radius² > n/4
                let lhs = big.radius() * big.radius() * BigRational::from_integer(4.into());
                assert!(lhs > BigRational::from_integer(n.into()), "n = {n}");
            }
        }
    }

    #[test]
    fn bound_test_is_exact() {
        // m = (1): (2·1 + 1)^1 = 3
        assert!(enumeration_bound_holds(2, &[1]));
        assert!(!enumeration_bound_holds(3, &[1]));
        // m = (1,1): (2√2 + 1)² = 9 + 4√2 ≈ 14.66
        assert!(enumeration_bound_holds(14, &[1, 1]));
        assert!(!enumeration_bound_holds(15, &[1, 1]));
    }

    #[test]
    fn boundary_ball_not_closed() {
        let b = Ball::new(pt(&["0"]), 1);
        assert!(!b.contains(&pt(&["1/2"])));
        assert!(b.contains(&pt(&["127/256"])));
    }
}
