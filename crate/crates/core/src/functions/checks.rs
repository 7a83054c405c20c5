use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{interleave, ComputableFunction, ModulusSpec, SSelector};
use crate::codec::{DyadicRational, RationalPoint};
use crate::error::{Error, Result};
use crate::oracle::PointOracle;

/// Where and how many sample points the falsification checks draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub count: usize,
    /// Every coordinate is drawn from `[lo, hi)`.
    pub lo: DyadicRational,
    pub hi: DyadicRational,
    /// Sample coordinates are multiples of `2^{-bits}` within the box.
    pub bits: u32,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan { seed: 0, count: 1000, lo: DyadicRational::from_int(-2), hi: DyadicRational::from_int(2), bits: 24 }
    }
}

impl SamplePlan {
    pub fn unit(seed: u64, count: usize) -> Self {
        SamplePlan { seed, count, lo: DyadicRational::zero(), hi: DyadicRational::from_int(1), ..Default::default() }
    }

    fn coord(&self, rng: &mut ChaCha8Rng) -> DyadicRational {
        let u = DyadicRational::new(BigInt::from(rng.random_range(0..1u64 << self.bits)), self.bits);
        &self.lo + &(&(&self.hi - &self.lo) * &u)
    }

    fn point(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<DyadicRational> {
        (0..n).map(|_| self.coord(rng)).collect()
    }
}

/// A pair of inputs that refutes a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub r: u32,
    pub x: RationalPoint,
    pub y: RationalPoint,
    /// `|f̂(x) − f̂(y)|` at the evaluation precision.
    pub output_distance: f64,
    /// The threshold it was compared with.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CheckOutcome {
    Pass { checked: usize },
    Counterexample(Witness),
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass { .. })
    }
}

fn pow2(e: i64) -> DyadicRational {
    DyadicRational::pow2(e)
}

/// Unit axis vectors `±e_j`, cycled with random directions of norm at most 1.
fn direction(rng: &mut ChaCha8Rng, n: usize, i: usize) -> Vec<DyadicRational> {
    let axis = i % (2 * n + 1);
    if axis < 2 * n {
        let sign = if axis.is_multiple_of(2) { 1 } else { -1 };
        return (0..n).map(|j| DyadicRational::from_int(if j == axis / 2 { sign } else { 0 })).collect();
    }
    let mut v: Vec<DyadicRational> =
        (0..n).map(|_| DyadicRational::new(BigInt::from(rng.random_range(-(1i64 << 16)..=1 << 16)), 16)).collect();
    let one = DyadicRational::from_int(1);
    while v.iter().fold(DyadicRational::zero(), |a, c| &a + &(c * c)) > one {
        v = v.iter().map(|c| c.mul_pow2(-1)).collect();
    }
    v
}

fn point(coords: Vec<DyadicRational>) -> Result<RationalPoint> {
    RationalPoint::new(coords)
}

fn shifted(x: &[DyadicRational], dir: &[DyadicRational], step: &DyadicRational) -> Vec<DyadicRational> {
    x.iter().zip(dir).map(|(a, d)| a + &(d * step)).collect()
}

/// Samples pairs at distance at most `2^{-m(r)}` and checks
/// `|f̂(x) − f̂(y)| ≤ 2^{-r} + 2·2^{-p}` at evaluation precision `p = r + 2`.
pub fn modulus_check(f: &ComputableFunction, m: &ModulusSpec, plan: &SamplePlan, r_max: u32) -> Result<CheckOutcome> {
    m.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    for i in 0..plan.count {
        let r = (i as u32) % (r_max + 1);
        let x = plan.point(&mut rng, f.n());
        let dir = direction(&mut rng, f.n(), i);
        let y = shifted(&x, &dir, &pow2(-m.at(r)?));
        let (x, y) = (point(x)?, point(y)?);
        let p = r + 2;
        let (fx, fy) = (f.eval_point(&x, p)?, f.eval_point(&y, p)?);
        let threshold = &pow2(-(r as i64)) + &pow2(1 - p as i64);
        let d2 = fx.dist_sq(&fy);
        if d2 > &threshold * &threshold {
            return Ok(CheckOutcome::Counterexample(Witness {
                r,
                x,
                y,
                output_distance: d2.to_f64().sqrt(),
                threshold: threshold.to_f64(),
            }));
        }
    }
    Ok(CheckOutcome::Pass { checked: plan.count })
}

/// Directions for the inverse check: axis vectors and sign vectors, all of norm at least 1.
fn inverse_direction(rng: &mut ChaCha8Rng, s: usize, i: usize) -> Vec<DyadicRational> {
    let axis_count = 2 * s;
    let k = i % (axis_count + 1);
    if k < axis_count {
        let sign = if k.is_multiple_of(2) { 1 } else { -1 };
        return (0..s).map(|j| DyadicRational::from_int(if j == k / 2 { sign } else { 0 })).collect();
    }
    (0..s).map(|_| DyadicRational::from_int(if rng.random_bool(0.5) { 1 } else { -1 })).collect()
}

/// Samples `(u, v, y)` with `|u − v| > 2^{-r}` and reports a counterexample when
/// `|f(u *_S y) − f(v *_S y)| ≤ 2^{-m′(r)}` is certain despite evaluation error.
pub fn inverse_modulus_check(
    f: &ComputableFunction,
    sel: &SSelector,
    m_inv: &ModulusSpec,
    plan: &SamplePlan,
    r_max: u32,
) -> Result<CheckOutcome> {
    m_inv.validate()?;
    if sel.n() != f.n() {
        return Err(Error::ArityMismatch { expected: f.n(), got: sel.n() });
    }
    if sel.size() == 0 {
        return Err(Error::InvalidSpec("inverse modulus needs a nonempty S".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let s = sel.size();
    for i in 0..plan.count {
        let r = (i as u32) % (r_max + 1);
        let u = plan.point(&mut rng, s);
        let y = plan.point(&mut rng, f.n() - s);
        let dir = inverse_direction(&mut rng, s, i);
        let step = &pow2(-(r as i64)) + &pow2(-(r as i64) - 8);
        let v = shifted(&u, &dir, &step);
        let mp = m_inv.at(r)?;
        let p = (mp + 4).max(0) as u32;
        let a = point(interleave(&u, sel, &y)?)?;
        let b = point(interleave(&v, sel, &y)?)?;
        let (fa, fb) = (f.eval_point(&a, p)?, f.eval_point(&b, p)?);
        // The true distance is within 2·2^{-p} of the measured one.
        let threshold = &pow2(-mp) - &pow2(1 - p as i64);
        let d2 = fa.dist_sq(&fb);
        if !threshold.is_negative() && d2 <= &threshold * &threshold {
            return Ok(CheckOutcome::Counterexample(Witness {
                r,
                x: a,
                y: b,
                output_distance: d2.to_f64().sqrt(),
                threshold: threshold.to_f64(),
            }));
        }
    }
    Ok(CheckOutcome::Pass { checked: plan.count })
}

/// `|M(r) − M(r′)| ≤ 2^{-r} + 2^{-r′}` for the evaluator on one input, checked exactly.
pub fn evaluator_consistency(f: &ComputableFunction, x: &PointOracle, r: u32, r2: u32) -> Result<bool> {
    let (a, b) = (f.eval(x, r)?, f.eval(x, r2)?);
    let bound = &pow2(-(r as i64)) + &pow2(-(r2 as i64));
    Ok(a.dist_sq(&b) <= &bound * &bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{affine, hilbert2d, identity, scale, sum};

    fn c(s: &str) -> DyadicRational {
        s.parse().unwrap()
    }

    fn plan() -> SamplePlan {
        SamplePlan { count: 300, ..Default::default() }
    }

    #[test]
    fn moduli_of_simple_maps() {
        let half = scale(c("1/2"), 1);
        assert!(modulus_check(&half, &ModulusSpec::linear(0), &plan(), 20).unwrap().passed());
        assert!(modulus_check(&identity(1), &ModulusSpec::linear(0), &plan(), 20).unwrap().passed());
        let double = scale(c("2"), 1);
        let out = modulus_check(&double, &ModulusSpec::linear(0), &plan(), 20).unwrap();
        let CheckOutcome::Counterexample(w) = out else { panic!("2x with m(r) = r must fail") };
        assert!(w.output_distance > w.threshold);
        assert!(modulus_check(&double, double.modulus().unwrap(), &plan(), 20).unwrap().passed());
    }

    #[test]
    fn declared_moduli_pass() {
        let a = affine(
            vec![vec![c("2"), c("1")], vec![c("1"), c("1")]],
            vec![c("1/2"), c("-1/4")],
        )
        .unwrap();
        for f in [identity(2), sum(3).unwrap(), a, scale(c("-3/4"), 2)] {
            let m = f.modulus().unwrap().clone();
            assert!(modulus_check(&f, &m, &plan(), 16).unwrap().passed(), "{}", f.name());
            for (sel, mi) in f.inverse_moduli() {
                assert!(inverse_modulus_check(&f, sel, mi, &plan(), 16).unwrap().passed(), "{} {sel:?}", f.name());
            }
        }
    }

    #[test]
    fn hilbert_moduli() {
        let h = hilbert2d();
        let p = SamplePlan::unit(1, 1000);
        assert!(modulus_check(&h, h.modulus().unwrap(), &p, 12).unwrap().passed());
        assert!(modulus_check(&h, &ModulusSpec::Linear { s: 0 }.clone(), &p, 12).map(|o| !o.passed()).unwrap());
        assert!(modulus_check(&h, &ModulusSpec::Table { values: (0..13).map(|r| 2 * r + 2).collect() }, &p, 12)
            .unwrap()
            .passed());
    }

    #[test]
    fn co_lipschitz_examples() {
        let double = scale(c("2"), 1);
        assert!(inverse_modulus_check(&double, &SSelector::all(1), &ModulusSpec::linear(0), &plan(), 20).unwrap().passed());
        let s = sum(2).unwrap();
        let one = SSelector::new(2, vec![1]).unwrap();
        assert!(inverse_modulus_check(&s, &one, &ModulusSpec::linear(1), &plan(), 20).unwrap().passed());
        let both = SSelector::all(2);
        let out = inverse_modulus_check(&s, &both, &ModulusSpec::linear(1), &plan(), 20).unwrap();
        let CheckOutcome::Counterexample(w) = out else { panic!("sum is not co-Lipschitz in both arguments") };
        assert_eq!(w.output_distance, 0.0);
    }

    #[test]
    fn consistency() {
        let x = PointOracle::from_fn(1, "third", |r| {
            RationalPoint::new(vec![DyadicRational::new((BigInt::from(1) << r as usize) / 3, r)]).unwrap()
        });
        let h = hilbert2d();
        for (r, r2) in [(0, 5), (3, 9), (7, 8), (10, 20)] {
            assert!(evaluator_consistency(&h, &x, r, r2).unwrap());
        }
    }
}
