//! The machine, kraft and geometry suites.

use num_bigint::BigInt;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::{Constants, ExperimentConfig, Row, SuiteOutput};
use crate::bits::BitString;
use crate::codec::{DyadicRational, RationalPoint};
use crate::error::Result;
use crate::geometry::{
    cube_containing, cubes_intersecting_ball, enumeration_bound_holds, half_log_ceil, lattice_point_in_ball,
    zn_index, Ball, DyadicCube, ZnEnumeration,
};
use crate::machine::{enumerate_halting, symmetry_of_information, Enumeration, HaltingEntry, MachineConfig};
use crate::pinned;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MachineParams {
    /// Budget of the smaller run in the monotonicity check; half the main budget by default.
    lower_budget: Option<u64>,
    /// Number of outputs (shortest first) fed to the symmetry-of-information report.
    symmetry_strings: usize,
    symmetry_alarm: i64,
    /// Outputs whose `K(s | s)` is compared with the echo cost.
    echo_strings: usize,
}

impl Default for MachineParams {
    fn default() -> Self {
        MachineParams { lower_budget: None, symmetry_strings: 24, symmetry_alarm: 16, echo_strings: 16 }
    }
}

/// Adjacent pairs in lexicographic order expose every prefix relation in a sorted set.
pub(crate) fn prefix_violations(programs: &[&BitString]) -> Vec<(BitString, BitString)> {
    let mut sorted: Vec<&BitString> = programs.to_vec();
    sorted.sort_by(|a, b| a.bits().cmp(b.bits()));
    sorted
        .windows(2)
        .filter(|w| w[0].is_proper_prefix_of(w[1]) || w[0] == w[1])
        .map(|w| (w[0].clone(), w[1].clone()))
        .collect()
}

fn kraft_sum(halting: &[HaltingEntry]) -> DyadicRational {
    halting
        .iter()
        .fold(DyadicRational::zero(), |acc, e| &acc + &DyadicRational::pow2_neg(e.program.len() as u32))
}

fn shortest_outputs(en: &Enumeration, count: usize) -> Vec<BitString> {
    let mut outs: Vec<BitString> = en.outputs().map(|(s, _)| s.clone()).collect();
    outs.sort();
    outs.truncate(count);
    outs
}

pub(super) fn machine(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let p: MachineParams = cfg.params()?;
    let mc = cfg.machine.clone().unwrap_or_else(MachineConfig::v0_small);
    let en = Enumeration::shared(&mc)?;
    let subject = format!("max_len={} budget={}", mc.max_program_len, mc.step_budget);
    let mut rows = Vec::new();
    let mut c = Constants::new();

    let programs: Vec<&BitString> = en.halting().iter().map(|e| e.program.bits()).collect();
    let violations = prefix_violations(&programs);
    let mut row = Row::at_most("prefix_violations", &subject, violations.len() as f64, 0.0);
    if let Some((a, b)) = violations.first() {
        row = row.detail(format!("{a} is a prefix of {b}"));
    }
    rows.push(row);

    let mass = en.kraft_mass();
    let one = DyadicRational::from_int(1);
    rows.push(Row { pass: Some(mass <= one), ..Row::at_most("kraft_mass", &subject, mass.to_f64(), 1.0) }
        .detail(mass.to_string()));
    rows.push(Row::check("kraft_recount", &subject, kraft_sum(en.halting()) == mass));

    let lower = p.lower_budget.unwrap_or(mc.step_budget / 2).max(1);
    let small = MachineConfig { step_budget: lower, ..mc.clone() };
    let fewer = enumerate_halting(&small, &BitString::new())?;
    let lost = fewer
        .iter()
        .filter(|e| {
            en.halting()
                .binary_search_by(|f| f.program.cmp(&e.program))
                .map_or(true, |i| en.halting()[i].output != e.output)
        })
        .count();
    rows.push(
        Row::at_most("budget_monotone", &subject, lost as f64, 0.0)
            .detail(format!("budget {lower}: {} halting", fewer.len())),
    );

    let echo = shortest_outputs(&en, p.echo_strings);
    let echo_max = echo.iter().filter_map(|s| en.k_given(s, s)).max();
    if let Some(m) = echo_max {
        rows.push(Row::at_most("echo_cost", &subject, m as f64, pinned::ECHO_COST as f64));
        c.insert("echo_k_max".into(), m as f64);
    }

    let sym = symmetry_of_information(&en, &shortest_outputs(&en, p.symmetry_strings), p.symmetry_alarm);
    rows.push(Row::info(
        "symmetry_of_information",
        &subject,
        format!(
            "pairs={} skipped={} max_defect={} alarm={}",
            sym.pairs_checked, sym.pairs_skipped, sym.max_defect, sym.alarm
        ),
    ));
    c.insert("symmetry_max_defect".into(), sym.max_defect as f64);
    c.insert("halting_programs".into(), en.halting().len() as f64);
    c.insert("distinct_outputs".into(), en.output_count() as f64);
    c.insert("kraft_mass".into(), mass.to_f64());
    Ok((rows, c))
}

pub(super) fn kraft(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mc = cfg.machine.clone().unwrap_or_else(MachineConfig::v0_small);
    let en = Enumeration::shared(&mc)?;
    let subject = format!("max_len={} budget={}", mc.max_program_len, mc.step_budget);
    let mass = en.kraft_mass();
    let mut rows = vec![Row {
        pass: Some(mass <= DyadicRational::from_int(1)),
        ..Row::at_most("kraft_mass", &subject, mass.to_f64(), 1.0)
    }
    .detail(mass.to_string())];
    if mc == MachineConfig::v0_small() {
        rows.push(Row::within("kraft_regression", &subject, mass.to_f64(), pinned::KRAFT_MASS_V0, 0.0));
    }
    let mut c = Constants::new();
    c.insert("kraft_mass".into(), mass.to_f64());
    c.insert("halting_programs".into(), en.halting().len() as f64);
    Ok((rows, c))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GeometryParams {
    balls: usize,
    /// Balls per dimension that also get the brute-force cover check over `{-2..2}ⁿ`.
    exhaustive_balls: usize,
    points: usize,
    r_max: u32,
    dims: Vec<usize>,
    /// Coordinates are drawn from `2^{-coord_bits}ℤ ∩ [-4, 4)`.
    coord_bits: u32,
    enumeration_count: usize,
    enumeration_dims: Vec<usize>,
}

impl Default for GeometryParams {
    fn default() -> Self {
        GeometryParams {
            balls: 10_000,
            exhaustive_balls: 1_000,
            points: 10_000,
            r_max: 12,
            dims: vec![1, 2, 3, 4],
            coord_bits: 20,
            enumeration_count: 100_000,
            enumeration_dims: vec![1, 2, 3],
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, bits: u32) -> RationalPoint {
    let span = 4i64 << bits;
    let coords = (0..n).map(|_| DyadicRational::new(rng.random_range(-span..span), bits)).collect();
    RationalPoint::new(coords).expect("n ≥ 1")
}

fn offsets(n: usize, reach: i64) -> Vec<Vec<i64>> {
    (0..n).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|v| {
                (-reach..=reach).map(move |d| {
                    let mut w = v.clone();
                    w.push(d);
                    w
                })
            })
            .collect()
    })
}

fn shifted(cube: &DyadicCube, off: &[i64]) -> DyadicCube {
    DyadicCube::new(cube.precision, cube.index.iter().zip(off).map(|(m, d)| m + *d).collect())
}

/// `|q − c|² < 2^{-2r}`, computed without the library's ball type.
fn strictly_inside(q: &RationalPoint, c: &RationalPoint, r: u32) -> bool {
    q.dist_sq(c) < DyadicRational::pow2_neg(2 * r)
}

fn on_grid(q: &RationalPoint, step: u32) -> bool {
    q.coords().iter().all(|c| DyadicRational::new(c.floor_scaled(step), step) == *c)
}

/// Cubes met by a ball of radius `2^{-r}` centred in the middle of a cube: offsets in
/// `{-1,0,1}ⁿ` with fewer than four nonzero entries.
fn centred_cover_count(n: usize) -> usize {
    let binom = |n: usize, k: usize| (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
    (0..4.min(n + 1)).map(|k| binom(n, k) << k).sum()
}

pub(super) fn geometry(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let p: GeometryParams = cfg.params()?;
    let mut rows = Vec::new();
    let mut c = Constants::new();
    for &n in &p.dims {
        let subject = format!("n={n}");
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (n as u64) << 40);
        let (mut lattice_fail, mut cover_fail, mut brute_fail, mut max_cover) = (0usize, 0usize, 0usize, 0usize);
        let l = half_log_ceil(n);
        for i in 0..p.balls {
            let center = random_point(&mut rng, n, p.coord_bits);
            let r = rng.random_range(0..=p.r_max);
            let ball = Ball::new(center.clone(), r);
            match lattice_point_in_ball(&ball) {
                Ok(q) if strictly_inside(&q, &center, r) && on_grid(&q, r + l) => {}
                _ => lattice_fail += 1,
            }
            let cubes = cubes_intersecting_ball(&ball)?;
            max_cover = max_cover.max(cubes.len());
            let meets = |cube: &DyadicCube| cube.dist_sq_to(&center) < DyadicRational::pow2_neg(2 * r);
            if cubes.len() > 3usize.pow(n as u32) || !cubes.iter().all(meets) || !cubes.iter().any(|q| q.contains(&center)) {
                cover_fail += 1;
            }
            if i < p.exhaustive_balls {
                let home = cube_containing(&center, r);
                let expected: Vec<DyadicCube> =
                    offsets(n, 2).iter().map(|o| shifted(&home, o)).filter(meets).collect();
                let mut got = cubes.clone();
                got.sort();
                let mut want = expected;
                want.sort();
                if got != want {
                    brute_fail += 1;
                }
            }
        }
        rows.push(Row::at_most("lattice_point_in_ball", &subject, lattice_fail as f64, 0.0)
            .detail(format!("{} balls", p.balls)));
        rows.push(Row::at_most("cover_sound", &subject, cover_fail as f64, 0.0));
        rows.push(Row::at_most("cover_complete", &subject, brute_fail as f64, 0.0)
            .detail(format!("{} balls against {{-2..2}}^n", p.balls.min(p.exhaustive_balls))));
        rows.push(Row::at_most("cover_count", &subject, max_cover as f64, 3f64.powi(n as i32)));
        c.insert(format!("max_cover_n{n}"), max_cover as f64);

        // Tightness: the ball of radius 1 centred at (1/2, …, 1/2).
        let mid = RationalPoint::new(vec![DyadicRational::new(1, 1); n])?;
        let got = cubes_intersecting_ball(&Ball::new(mid, 0))?.len();
        let want = centred_cover_count(n);
        rows.push(Row::within("cover_tightness", &subject, got as f64, want as f64, 0.0)
            .detail(format!("3^n = {}", 3usize.pow(n as u32))));

        let mut part_fail = 0usize;
        for _ in 0..p.points {
            let q = random_point(&mut rng, n, p.coord_bits);
            let r = rng.random_range(0..=p.r_max);
            let home = cube_containing(&q, r);
            let unique = offsets(n, 1).iter().filter(|o| shifted(&home, o).contains(&q)).count() == 1;
            let parent = cube_containing(&q, r + 1);
            let two = BigInt::from(2);
            let nested = parent.index.iter().zip(&home.index).all(|(a, b)| a.div_floor(&two) == *b);
            let corner_in = home.contains(&home.corner());
            if !(unique && nested && corner_in) {
                part_fail += 1;
            }
        }
        rows.push(Row::at_most("partition", &subject, part_fail as f64, 0.0)
            .detail(format!("{} points, r <= {}", p.points, p.r_max)));
    }
    for &n in &p.enumeration_dims {
        let mut zn = ZnEnumeration::new(n);
        let pts = zn.prefix(p.enumeration_count + 1).to_vec();
        let bound_fail = pts.iter().enumerate().filter(|(i, m)| !enumeration_bound_holds(*i as u64, m)).count();
        let index_fail = pts.iter().enumerate().filter(|(i, m)| zn_index(m) != *i).count();
        let subject = format!("n={n}");
        rows.push(Row::at_most("enumeration_bound", &subject, bound_fail as f64, 0.0)
            .detail(format!("i <= {}", p.enumeration_count)));
        rows.push(Row::at_most("enumeration_bijective", &subject, index_fail as f64, 0.0));
    }
    Ok((rows, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_detection() {
        let s: Vec<BitString> = ["0", "10", "11", "100"].iter().map(|t| t.parse().unwrap()).collect();
        let refs: Vec<&BitString> = s.iter().collect();
        let v = prefix_violations(&refs);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].0.to_string(), "10");
        let ok: Vec<&BitString> = s[..3].iter().collect();
        assert!(prefix_violations(&ok).is_empty());
    }

    #[test]
    fn centred_counts() {
        assert_eq!([1, 2, 3, 4, 5].map(centred_cover_count), [3, 9, 27, 65, 131]);
    }

    #[test]
    fn small_geometry_run() {
        let cfg = ExperimentConfig {
            suite: "geometry".into(),
            params: serde_json::json!({"balls": 200, "exhaustive_balls": 50, "points": 200, "enumeration_count": 2000}),
            ..Default::default()
        };
        let (rows, _) = geometry(&cfg).unwrap();
        let failed: Vec<&Row> = rows.iter().filter(|r| r.failed()).collect();
        assert!(failed.is_empty(), "{failed:?}");
    }
}
