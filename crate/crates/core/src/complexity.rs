//! Complexity of sets and of points at precision `r`, minimizer sets, and measured-constant checks
//! of the counting and coding bounds.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::codec::{encode_point, DyadicRational, RationalPoint};
use crate::compressor::Coder;
use crate::error::{Error, Result};
use crate::geometry::{cube_containing, cubes_intersecting_ball, Ball, DyadicCube, LdsRecord};
use crate::machine::{Enumeration, MachineConfig, PointEntry};
use crate::oracle::{representation, PointOracle};

/// Serializable description of a backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    ExactMachine { machine: MachineConfig },
    Compressor {
        #[serde(default)]
        coder: Coder,
    },
}

impl Default for BackendSpec {
    fn default() -> Self {
        BackendSpec::Compressor { coder: Coder::default() }
    }
}

/// Where `K` values come from.
#[derive(Debug, Clone)]
pub enum KBackend {
    /// Exhaustive minima over a bounded machine enumeration.
    Exact(Arc<Enumeration>),
    /// Code length of a deterministic compressor.
    Compressor(Coder),
}

impl KBackend {
    pub fn from_spec(spec: &BackendSpec) -> Result<Self> {
        match spec {
            BackendSpec::ExactMachine { machine } => Ok(KBackend::Exact(Enumeration::shared(machine)?)),
            BackendSpec::Compressor { coder } => Ok(KBackend::Compressor(*coder)),
        }
    }

    pub fn exact(cfg: &MachineConfig) -> Result<Self> {
        Ok(KBackend::Exact(Enumeration::shared(cfg)?))
    }

    pub fn compressor() -> Self {
        KBackend::Compressor(Coder::default())
    }

    pub fn enumeration(&self) -> Option<&Arc<Enumeration>> {
        match self {
            KBackend::Exact(en) => Some(en),
            KBackend::Compressor(_) => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, KBackend::Exact(_))
    }

    /// `K(s)`.
    pub fn k(&self, s: &BitString) -> Option<u64> {
        match self {
            KBackend::Exact(en) => en.k(s),
            KBackend::Compressor(c) => Some(c.code_len(s.bits())),
        }
    }

    /// `K(target | given)`; the compressor realizes it as `|code(given·target)| − |code(given)|`.
    pub fn k_given(&self, target: &BitString, given: &BitString) -> Option<i64> {
        match self {
            KBackend::Exact(en) => en.k_given(target, given).map(|k| k as i64),
            KBackend::Compressor(c) => {
                let joint = c.code_len(given.concat(target).bits()) as i64;
                Some(joint - c.code_len(given.bits()) as i64)
            }
        }
    }

    pub fn k_point(&self, q: &RationalPoint) -> Option<u64> {
        self.k(&encode_point(q))
    }
}

impl fmt::Display for KBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KBackend::Exact(en) => {
                let c = en.config();
                write!(f, "exact_machine({} max_len={} budget={})", c.version_tag, c.max_program_len, c.step_budget)
            }
            KBackend::Compressor(c) => write!(f, "compressor({})", c.name()),
        }
    }
}

/// Outcome of a single inequality check. `lhs = None` marks a vacuous check (nothing to count).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub label: String,
    pub lhs: Option<i64>,
    pub rhs: i64,
    pub measured_constant: Option<i64>,
    pub holds: bool,
}

impl BoundReport {
    fn new(label: String, lhs: Option<i64>, rhs: i64, measured_constant: Option<i64>) -> Self {
        let holds = lhs.is_none_or(|l| l <= rhs);
        BoundReport { label, lhs, rhs, measured_constant, holds }
    }
}

/// `K(S) = min{K(q) | q ∈ S}`.
pub fn k_of_set(points: &[RationalPoint], backend: &KBackend) -> Option<u64> {
    points.iter().filter_map(|q| backend.k_point(q)).min()
}

/// Membership of a rational in the open ball `B_{2^{-r}}(x)` for an oracle point `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    Undecided,
}

const REFINEMENTS: [u32; 3] = [8, 24, 64];

/// Decides `|q − x| < 2^{-r}` exactly for rational `x`; otherwise refines the oracle until the
/// answer is certain or the refinement schedule is exhausted.
pub fn ball_membership(x: &PointOracle, r: u32, q: &RationalPoint) -> Membership {
    if let Some(p) = x.exact() {
        return if Ball::new(p, r).contains(q) { Membership::Inside } else { Membership::Outside };
    }
    let rad = DyadicRational::pow2_neg(r);
    for extra in REFINEMENTS {
        let err = DyadicRational::pow2_neg(r + extra);
        let d2 = q.dist_sq(&x.query(r + extra));
        let inner = &rad - &err;
        if d2 < &inner * &inner {
            return Membership::Inside;
        }
        let outer = &rad + &err;
        if d2 >= &outer * &outer {
            return Membership::Outside;
        }
    }
    Membership::Undecided
}

/// A point that realizes `K_r(x)` on the exact backend.
#[derive(Debug, Clone, PartialEq)]
pub struct KrWitness {
    pub k: u64,
    pub point: RationalPoint,
    pub encoding: BitString,
}

/// `K_r(x)` on the exact backend with its witness; `None` when no enumerated point lies in the ball.
pub fn k_r_exact(x: &PointOracle, r: u32, en: &Enumeration) -> Option<KrWitness> {
    // Points are sorted by K, so the first one inside the ball is a minimizer.
    en.points(x.dimension())
        .iter()
        .find(|pe| ball_membership(x, r, &pe.point) == Membership::Inside)
        .map(|pe| KrWitness { k: pe.k, point: pe.point.clone(), encoding: pe.encoding.clone() })
}

/// `K_r(x) = K(B_{2^{-r}}(x))`.
pub fn k_r(x: &PointOracle, r: u32, backend: &KBackend) -> Option<u64> {
    match backend {
        KBackend::Exact(en) => k_r_exact(x, r, en).map(|w| w.k),
        KBackend::Compressor(c) => Some(c.point_code_len(&representation(&x.query(r), r), x.dimension())),
    }
}

/// A ball or a dyadic cube.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Ball(Ball),
    Cube(DyadicCube),
}

impl Region {
    pub fn contains(&self, q: &RationalPoint) -> bool {
        match self {
            Region::Ball(b) => b.dimension() == q.dimension() && b.contains(q),
            Region::Cube(c) => c.contains(q),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Region::Ball(b) => b.dimension(),
            Region::Cube(c) => c.dimension(),
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Ball(b) => write!(f, "B({}, {})", b.center(), b.radius()),
            Region::Cube(c) => {
                let idx: Vec<String> = c.index.iter().map(|m| m.to_string()).collect();
                write!(f, "Q^({})[{}]", c.precision, idx.join(","))
            }
        }
    }
}

/// The `d`-approximate K-minimizers of a region among the enumerated points.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizerSet {
    pub d: u64,
    pub k_floor: u64,
    pub members: Vec<(RationalPoint, u64)>,
}

fn points_in<'a>(region: &'a Region, en: &'a Enumeration) -> Vec<PointEntry> {
    en.points(region.dimension()).iter().filter(|pe| region.contains(&pe.point)).cloned().collect()
}

pub fn minimizers(region: &Region, d: u64, en: &Enumeration) -> Result<MinimizerSet> {
    let inside = points_in(region, en);
    let k_floor = inside
        .iter()
        .map(|pe| pe.k)
        .min()
        .ok_or_else(|| Error::NotFound(format!("no enumerated point in {region}")))?;
    let members = inside
        .into_iter()
        .filter(|pe| pe.k <= k_floor + d)
        .map(|pe| (pe.point, pe.k))
        .collect();
    Ok(MinimizerSet { d, k_floor, members })
}

/// `⌈log₂ n⌉` for `n ≥ 1`.
fn ceil_log2_count(n: usize) -> i64 {
    (usize::BITS - (n - 1).leading_zeros()) as i64
}

fn k_of_precision(r: u32, en: &Enumeration) -> Result<u64> {
    en.k_of_index(r as u64)
        .ok_or_else(|| Error::NotFound(format!("K({r}) is not reached by the enumeration")))
}

/// Number of `d`-approximate minimizers of one region (zero for a region without points).
pub fn minimizer_count(region: &Region, d: u64, en: &Enumeration) -> usize {
    minimizers(region, d, en).map(|m| m.members.len()).unwrap_or(0)
}

/// Per-region count used by the counting bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRow {
    pub region: String,
    pub k_region: u64,
    pub count: usize,
}

/// Every nonempty `r`-dyadic cube of `ℝⁿ` containing enumerated points.
pub fn occupied_cubes(r: u32, n: usize, en: &Enumeration) -> Vec<DyadicCube> {
    let mut cubes: Vec<DyadicCube> = en.points(n).iter().map(|pe| cube_containing(&pe.point, r)).collect();
    cubes.sort();
    cubes.dedup();
    cubes
}

/// Balls of radius `2^{-r}` used by the ball-count sweep: one centred on each enumerated point and
/// one at each point of `2^{-(r+1)}ℤⁿ` within `2^{-r}` of an enumerated point.
pub fn ball_family(r: u32, n: usize, en: &Enumeration) -> Vec<Ball> {
    let mut centers: Vec<RationalPoint> = Vec::new();
    let offsets: Vec<Vec<i64>> = (0..n).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|v| {
                (-2i64..=2).map(move |d| {
                    let mut w = v.clone();
                    w.push(d);
                    w
                })
            })
            .collect()
    });
    for pe in en.points(n).iter() {
        centers.push(pe.point.clone());
        let base: Vec<BigInt> = pe.point.coords().iter().map(|c| c.round_scaled(r + 1)).collect();
        for off in &offsets {
            let c = RationalPoint::new(
                base.iter().zip(off).map(|(m, d)| DyadicRational::new(m + d, r + 1)).collect(),
            )
            .expect("n ≥ 1");
            if Ball::new(pe.point.clone(), r).contains(&c) {
                centers.push(c);
            }
        }
    }
    centers.sort_by_key(encode_point);
    centers.dedup();
    centers.into_iter().map(|c| Ball::new(c, r)).collect()
}

fn count_rows(regions: impl IntoIterator<Item = Region>, d: u64, en: &Enumeration) -> Vec<CountRow> {
    regions
        .into_iter()
        .filter_map(|region| {
            let m = minimizers(&region, d, en).ok()?;
            Some(CountRow { region: region.to_string(), k_region: m.k_floor, count: m.members.len() })
        })
        .collect()
}

pub fn cube_counts(r: u32, d: u64, n: usize, en: &Enumeration) -> Vec<CountRow> {
    count_rows(occupied_cubes(r, n, en).into_iter().map(Region::Cube), d, en)
}

pub fn ball_counts(r: u32, d: u64, n: usize, en: &Enumeration) -> Vec<CountRow> {
    count_rows(ball_family(r, n, en).into_iter().map(Region::Ball), d, en)
}

fn count_report(label: String, rows: &[CountRow], offset: i64, pinned: i64) -> BoundReport {
    let lhs = rows.iter().map(|row| ceil_log2_count(row.count)).max();
    let measured = lhs.map(|l| l - offset);
    BoundReport::new(label, lhs, offset + pinned, measured)
}

/// No `r`-dyadic cube has more than `2^{d+K(r)+c}` `d`-approximate minimizers: reports the
/// smallest `c` that works for every occupied cube and whether the pinned `c*` suffices.
pub fn check_cube_count_bound(r: u32, d: u64, n: usize, en: &Enumeration, pinned: i64) -> Result<BoundReport> {
    let kr = k_of_precision(r, en)? as i64;
    let rows = cube_counts(r, d, n, en);
    Ok(count_report(format!("cube_count n={n} r={r} d={d}"), &rows, d as i64 + kr, pinned))
}

/// The ball analogue with `2K(r)` in the exponent, over [`ball_family`].
pub fn check_ball_count_bound(r: u32, d: u64, n: usize, en: &Enumeration, pinned: i64) -> Result<BoundReport> {
    let kr = k_of_precision(r, en)? as i64;
    let rows = ball_counts(r, d, n, en);
    Ok(count_report(format!("ball_count n={n} r={r} d={d}"), &rows, d as i64 + 2 * kr, pinned))
}

/// Largest `K(B) − K(Q) − K(r)` over balls of the family and the cubes they meet: the measured
/// form of the constant relating ball and cube complexities.
pub fn ball_cube_constant(r: u32, n: usize, en: &Enumeration) -> Result<Option<i64>> {
    let kr = k_of_precision(r, en)? as i64;
    let mut cube_k: BTreeMap<DyadicCube, Option<u64>> = BTreeMap::new();
    let mut best: Option<i64> = None;
    for ball in ball_family(r, n, en) {
        let Ok(kb) = minimizers(&Region::Ball(ball.clone()), 0, en).map(|m| m.k_floor) else {
            continue;
        };
        for cube in cubes_intersecting_ball(&ball)? {
            let kq = *cube_k
                .entry(cube.clone())
                .or_insert_with(|| minimizers(&Region::Cube(cube), 0, en).ok().map(|m| m.k_floor));
            if let Some(kq) = kq {
                let u = kb as i64 - kq as i64 - kr;
                best = Some(best.map_or(u, |b| b.max(u)));
            }
        }
    }
    Ok(best)
}

/// Per-block check of `K(B_{r,t}) ≤ log 1/m(B_{r,t}) + K(r) + c_B` with truncated `m`.
///
/// In integers this reads `K(B) ≤ −⌈log₂ m⌉ + K(r) + c_B`, so the measured constant is
/// `K(B) − K(r) + ⌈log₂ m⌉`. Blocks with zero truncated mass are skipped.
pub fn check_lds_coding_bound(lds: &[LdsRecord], en: &Enumeration, pinned: i64) -> Result<Vec<BoundReport>> {
    let mut out = Vec::new();
    for rec in lds {
        let mass = en.apriori_mass(rec.members.iter());
        let Some(log_m) = mass.ceil_log2() else { continue };
        let Some(kb) = rec.members.iter().filter_map(|s| en.k(s)).min() else { continue };
        let kr = k_of_precision(rec.layer, en)? as i64;
        let lhs = kb as i64;
        let label = format!("lds r={} t={}", rec.layer, rec.block);
        out.push(BoundReport::new(label, Some(lhs), -log_m + kr + pinned, Some(lhs - kr + log_m)));
    }
    Ok(out)
}

/// The singleton-block special case `K(x) ≤ log 1/m(x) + K(0) + c_B` over every enumerated output.
pub fn levin_reports(en: &Enumeration, pinned: i64) -> Result<Vec<BoundReport>> {
    let k0 = k_of_precision(0, en)? as i64;
    let mut out = Vec::new();
    for (s, prog) in en.outputs() {
        let Some(log_m) = en.mass_of(s).ceil_log2() else { continue };
        let k = prog.len() as i64;
        out.push(BoundReport::new(format!("levin {s}"), Some(k), -log_m + k0 + pinned, Some(k - k0 + log_m)));
    }
    out.sort_by(|a, b| a.label.cmp(&b.label));
    Ok(out)
}

/// The formula `a_s = K(s) + 2log(l+s+3) + n(l+3) + K(n) + 2log n`, evaluated with this
/// machine's `K` and without the unknown additive machine constant.
pub fn formula_a_s(n: usize, s: u32, en: &Enumeration) -> Result<f64> {
    let l = crate::geometry::half_log_ceil(n) as f64;
    let ks = k_of_precision(s, en)? as f64;
    let kn = k_of_precision(n as u32, en)? as f64;
    let s = s as f64;
    let n = n as f64;
    Ok(ks + 2.0 * (l + s + 3.0).log2() + n * (l + 3.0) + kn + 2.0 * n.log2())
}

/// `K_{r+s}(x) ≤ K_r(x) + ns + b_s`: reports the smallest `b` that works here, and holds relative
/// to the pinned `b*`.
pub fn check_precision_improvement(x: &PointOracle, r: u32, s: u32, en: &Enumeration, pinned: i64) -> Result<BoundReport> {
    let n = x.dimension() as i64;
    let missing = |p: u32| Error::NotFound(format!("K_{p}({}) not reached by the enumeration", x.provenance()));
    let k_lo = k_r_exact(x, r, en).ok_or_else(|| missing(r))?.k as i64;
    let k_hi = k_r_exact(x, r + s, en).ok_or_else(|| missing(r + s))?.k as i64;
    let offset = k_lo + n * s as i64;
    let label = format!("precision {} r={r} s={s}", x.provenance());
    Ok(BoundReport::new(label, Some(k_hi), offset + pinned, Some(k_hi - offset)))
}

/// Largest measured constant over a set of reports.
pub fn max_constant(reports: &[BoundReport]) -> Option<i64> {
    reports.iter().filter_map(|r| r.measured_constant).max()
}

/// Index of a small cube in the `ℤⁿ` enumeration, if its coordinates fit in `i64`.
pub fn cube_block_index(cube: &DyadicCube) -> Option<usize> {
    let idx: Option<Vec<i64>> = cube.index.iter().map(|m| m.to_i64()).collect();
    idx.map(|v| crate::geometry::zn_index(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::decode_point_exact;

    fn en() -> Arc<Enumeration> {
        Enumeration::shared(&MachineConfig::new(26, 1000)).unwrap()
    }

    fn pt(s: &str) -> RationalPoint {
        RationalPoint::new(vec![s.parse().unwrap()]).unwrap()
    }

    #[test]
    fn set_complexity_is_a_minimum() {
        let e = en();
        let backend = KBackend::Exact(Arc::clone(&e));
        let pts = e.points(1);
        let (a, b) = (&pts[0], &pts[pts.len() - 1]);
        assert!(a.k < b.k);
        assert_eq!(k_of_set(&[b.point.clone(), a.point.clone()], &backend), Some(a.k));
        assert_eq!(k_of_set(std::slice::from_ref(&a.point), &backend), e.k(&encode_point(&a.point)));
        // Superset has smaller or equal complexity.
        let small = [b.point.clone()];
        let big = [a.point.clone(), b.point.clone()];
        assert!(k_of_set(&small, &backend) >= k_of_set(&big, &backend));
    }

    #[test]
    fn exact_k_r_of_enumerated_point() {
        let e = en();
        let backend = KBackend::Exact(Arc::clone(&e));
        let cheapest = &e.points(1)[0];
        let x = PointOracle::rational(cheapest.point.clone());
        for r in 0..12 {
            assert_eq!(k_r(&x, r, &backend), Some(cheapest.k));
        }
        // Far away from every enumerated point.
        let far = PointOracle::rational(pt("1000"));
        assert_eq!(k_r(&far, 3, &backend), None);
    }

    #[test]
    fn k_r_is_nondecreasing_for_rationals() {
        let e = en();
        let backend = KBackend::Exact(Arc::clone(&e));
        for pe in e.points(1).iter() {
            let x = PointOracle::rational(pe.point.clone());
            let ks: Vec<u64> = (0..16).filter_map(|r| k_r(&x, r, &backend)).collect();
            assert!(ks.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(*ks.last().unwrap(), pe.k);
        }
    }

    #[test]
    fn oracle_membership_matches_exact() {
        let e = en();
        let q = e.points(1)[1].point.clone();
        // An oracle known only through truncations of 1/3.
        let third = PointOracle::from_fn(1, "1/3", |r| {
            let m = (BigInt::from(1) << (r as usize)) / 3;
            RationalPoint::new(vec![DyadicRational::new(m, r)]).unwrap()
        });
        for r in 0..6 {
            let exact = (q.coords()[0].to_f64() - 1.0 / 3.0).abs() < 2f64.powi(-(r as i32));
            let got = ball_membership(&third, r, &q);
            assert_eq!(got == Membership::Inside, exact, "r={r}");
        }
    }

    #[test]
    fn minimizer_sets() {
        let e = en();
        let region = Region::Ball(Ball::new(RationalPoint::origin(1), 0));
        let all = minimizers(&region, 1000, &e).unwrap();
        let inside = e.points(1).iter().filter(|pe| region.contains(&pe.point)).count();
        assert_eq!(all.members.len(), inside);
        let zero = minimizers(&region, 0, &e).unwrap();
        assert_eq!(zero.members.len(), 1);
        assert_eq!(zero.members[0].0, RationalPoint::origin(1));
        for (q, k) in &all.members {
            assert!(*k <= all.k_floor + all.d);
            assert!(region.contains(q));
        }
        let empty = Region::Cube(DyadicCube::new(0, vec![BigInt::from(500)]));
        assert!(matches!(minimizers(&empty, 3, &e), Err(Error::NotFound(_))));
        assert_eq!(minimizer_count(&empty, 3, &e), 0);
    }

    #[test]
    fn cube_constant_nonincreasing_in_d_for_fixed_count() {
        let e = en();
        let a = check_cube_count_bound(1, 0, 1, &e, 0).unwrap();
        let b = check_cube_count_bound(1, 50, 1, &e, 0).unwrap();
        // d = 50 already admits every point, so raising d further cannot raise the constant.
        let c = check_cube_count_bound(1, 60, 1, &e, 0).unwrap();
        assert!(c.measured_constant < b.measured_constant);
        assert!(a.measured_constant.is_some());
    }

    #[test]
    fn compressor_backend_is_deterministic() {
        let backend = KBackend::compressor();
        let x = PointOracle::rational(pt("3/8"));
        assert_eq!(k_r(&x, 100, &backend), k_r(&x, 100, &backend));
        let s: BitString = "0110".parse().unwrap();
        let t: BitString = "0110".parse().unwrap();
        let kc = backend.k_given(&t, &s).unwrap();
        assert_eq!(kc, backend.k(&s.concat(&t)).unwrap() as i64 - backend.k(&s).unwrap() as i64);
    }

    #[test]
    fn lds_blocks_and_levin() {
        let e = en();
        let lds = crate::geometry::dyadic_lds(1, 2, 1000, &e);
        let reports = check_lds_coding_bound(&lds, &e, 100).unwrap();
        assert_eq!(reports.len(), lds.len());
        assert!(reports.iter().all(|r| r.holds));
        let levin = levin_reports(&e, 100).unwrap();
        assert_eq!(levin.len(), e.output_count());
        // m(x) ≥ 2^{-K(x)} forces K(x) + ⌈log₂ m(x)⌉ ≥ 0.
        let k0 = e.k_of_index(0).unwrap() as i64;
        assert!(levin.iter().all(|r| r.measured_constant.unwrap() >= -k0));
        assert!(decode_point_exact(&encode_point(&pt("1/2"))).is_some());
    }
}
