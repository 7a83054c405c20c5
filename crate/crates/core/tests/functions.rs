use std::collections::HashSet;

use mdimlab::codec::{DyadicRational, RationalPoint};
use mdimlab::functions::{
    affine, hilbert2d, hilbert_cell, identity, inverse_modulus_check, left_inverse_synthesize, modulus_check, scale,
    sum, ModulusSpec, SSelector, SamplePlan, SearchBox,
};
use mdimlab::oracle::PointOracle;
use num_bigint::BigInt;
use num_traits::ToPrimitive;

fn d(s: &str) -> DyadicRational {
    s.parse().unwrap()
}

fn pt(v: &[&str]) -> RationalPoint {
    RationalPoint::new(v.iter().map(|s| d(s)).collect()).unwrap()
}

fn cell(i: u64, k: u32) -> (i64, i64) {
    let (x, y) = hilbert_cell(&BigInt::from(i), k);
    (x.to_i64().unwrap(), y.to_i64().unwrap())
}

#[test]
fn hilbert_cells_are_a_path_through_every_cell() {
    for k in 1..=8 {
        let side = 1i64 << k;
        let cells: Vec<(i64, i64)> = (0..(side * side) as u64).map(|i| cell(i, k)).collect();
        let distinct: HashSet<_> = cells.iter().collect();
        assert_eq!(distinct.len(), cells.len(), "level {k} repeats a cell");
        assert!(cells.iter().all(|&(x, y)| (0..side).contains(&x) && (0..side).contains(&y)));
        for w in cells.windows(2) {
            let step = (w[0].0 - w[1].0).abs() + (w[0].1 - w[1].1).abs();
            assert_eq!(step, 1, "level {k}: {:?} -> {:?}", w[0], w[1]);
        }
        assert_eq!(cells[0], (0, 0));
        assert_eq!(cells.last().unwrap(), &(side - 1, 0));
    }
}

#[test]
fn hilbert_levels_nest() {
    // Four consecutive level-(k+1) cells make up one level-k cell.
    for k in 1..=6u32 {
        for i in 0..(1u64 << (2 * k)) {
            let (x, y) = cell(i, k);
            for j in 0..4 {
                let (cx, cy) = cell(4 * i + j, k + 1);
                assert_eq!((cx >> 1, cy >> 1), (x, y));
            }
        }
    }
}

#[test]
fn hilbert_values_within_precision() {
    let h = hilbert2d();
    let t = PointOracle::rational(pt(&["5/2^4"]));
    for r in 0..12 {
        let a = h.eval(&t, r).unwrap();
        let b = h.eval(&t, r + 6).unwrap();
        let dist = a.dist_sq(&b).to_f64().sqrt();
        assert!(dist <= 2f64.powi(-(r as i32)) + 2f64.powi(-(r as i32 + 6)), "r={r} dist={dist}");
    }
}

#[test]
fn library_moduli_survive_sampling() {
    let plan = SamplePlan { count: 300, ..SamplePlan::default() };
    let funcs = [
        identity(2),
        scale(d("3/2^2"), 1),
        scale(d("-5"), 2),
        sum(3).unwrap(),
        affine(vec![vec![d("2"), d("1")], vec![d("1"), d("1")]], vec![d("1/2"), d("-1/2^2")]).unwrap(),
        hilbert2d(),
    ];
    for f in &funcs {
        let m = f.modulus().unwrap().clone();
        let out = modulus_check(f, &m, &plan, 10).unwrap();
        assert!(out.passed(), "{}: {out:?}", f.name());
    }
}

#[test]
fn too_small_modulus_is_refuted() {
    let plan = SamplePlan { count: 300, ..SamplePlan::default() };
    let f = scale(d("8"), 1);
    let out = modulus_check(&f, &ModulusSpec::linear(0), &plan, 8).unwrap();
    assert!(!out.passed());
}

#[test]
fn inverse_moduli_survive_sampling() {
    let plan = SamplePlan { count: 300, ..SamplePlan::default() };
    let f = sum(2).unwrap();
    let sel = SSelector::new(2, vec![1]).unwrap();
    let m = f.inverse_modulus_for(&sel).unwrap().clone();
    assert!(inverse_modulus_check(&f, &sel, &m, &plan, 10).unwrap().passed());
    let g = scale(d("1/2^3"), 1);
    let all = SSelector::all(1);
    let m = g.inverse_modulus_for(&all).unwrap().clone();
    assert!(inverse_modulus_check(&g, &all, &m, &plan, 10).unwrap().passed());
    // Shrinking by 8 cannot be inverted without losing three bits.
    assert!(!inverse_modulus_check(&g, &all, &ModulusSpec::linear(0), &plan, 10).unwrap().passed());
}

#[test]
fn synthesized_inverse_of_sum_recovers_the_argument() {
    let f = sum(2).unwrap();
    let sel = SSelector::new(2, vec![1]).unwrap();
    let m_inv = f.inverse_modulus_for(&sel).unwrap().clone();
    let g = left_inverse_synthesize(&f, &sel, &m_inv, SearchBox::default()).unwrap();
    let (x, y) = (d("13/2^5"), d("-7/2^3"));
    let z = pt(&[&(&x + &y).to_string(), &y.to_string()]);
    for r in 0..=16 {
        let got = g.eval_point(&z, r).unwrap();
        let err = (&got.coords()[0] - &x).abs().to_f64();
        assert!(err <= 2f64.powi(-(r as i32)), "r={r} err={err}");
    }
}
