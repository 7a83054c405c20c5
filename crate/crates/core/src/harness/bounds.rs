//! The coding-bounds suite: counting bounds, the LDS coding bound and its singleton form, and
//! precision improvement, all on the exact backend.

use serde::Deserialize;

use super::{Constants, ExperimentConfig, Row, SuiteOutput};
use crate::complexity::{
    ball_cube_constant, check_ball_count_bound, check_cube_count_bound, check_lds_coding_bound,
    check_precision_improvement, formula_a_s, levin_reports, max_constant, BoundReport,
};
use crate::error::Result;
use crate::geometry::dyadic_lds;
use crate::machine::{Enumeration, MachineConfig};
use crate::oracle::PointOracle;
use crate::pinned;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CodingParams {
    r_max: u32,
    d_max: u64,
    dims: Vec<usize>,
    lds_r_max: u32,
    lds_t_max: usize,
    lds_dims: Vec<usize>,
    /// The first this many one-dimensional points of the enumeration feed the precision sweep.
    precision_points: usize,
    precision_r_max: u32,
    precision_s_max: u32,
    a_s_dims: Vec<usize>,
    a_s_max: u32,
}

impl Default for CodingParams {
    fn default() -> Self {
        CodingParams {
            r_max: 4,
            d_max: 4,
            dims: vec![1, 2, 3, 4],
            lds_r_max: 3,
            lds_t_max: 1000,
            lds_dims: vec![1, 2, 3],
            precision_points: 8,
            precision_r_max: 2,
            precision_s_max: 3,
            a_s_dims: vec![1, 2, 3],
            a_s_max: 4,
        }
    }
}

fn bound_row(name: &str, b: &BoundReport) -> Row {
    let row = Row::check(name, &b.label, b.holds);
    match b.lhs {
        Some(l) => Row { lhs: Some(l as f64), rhs: Some(b.rhs as f64), ..row },
        None => Row { rhs: Some(b.rhs as f64), ..row }.detail("vacuous: no points"),
    }
}

fn update_max(slot: &mut Option<i64>, v: Option<i64>) {
    if let Some(v) = v {
        *slot = Some(slot.map_or(v, |s| s.max(v)));
    }
}

pub(super) fn coding_bounds(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let p: CodingParams = cfg.params()?;
    let mc = cfg.machine.clone().unwrap_or_else(MachineConfig::v0_geometry);
    let en = Enumeration::shared(&mc)?;
    let pinned_sweep = mc == MachineConfig::v0_geometry() && p == CodingParams::default();
    let mut rows = Vec::new();
    let mut c = Constants::new();

    let (mut cube_c, mut ball_c, mut bc_c) = (None, None, None);
    for &n in &p.dims {
        for r in 0..=p.r_max {
            for d in 0..=p.d_max {
                let cube = check_cube_count_bound(r, d, n, &en, pinned::CUBE_COUNT_C)?;
                let ball = check_ball_count_bound(r, d, n, &en, pinned::BALL_COUNT_C)?;
                update_max(&mut cube_c, cube.measured_constant);
                update_max(&mut ball_c, ball.measured_constant);
                rows.push(bound_row("cube_count", &cube));
                rows.push(bound_row("ball_count", &ball));
            }
            let u = ball_cube_constant(r, n, &en)?;
            rows.push(Row::data("ball_cube_constant", format!("n={n}"), Some(r), u.map(|u| u as f64)));
            update_max(&mut bc_c, u);
        }
    }

    let mut lds_c = None;
    for &n in &p.lds_dims {
        let lds = dyadic_lds(n, p.lds_r_max, p.lds_t_max, &en);
        let reports = check_lds_coding_bound(&lds, &en, pinned::CODING_C)?;
        update_max(&mut lds_c, max_constant(&reports));
        for b in &reports {
            rows.push(bound_row("lds_coding", &BoundReport { label: format!("n={n} {}", b.label), ..b.clone() }));
        }
    }

    let levin = levin_reports(&en, pinned::CODING_C)?;
    let levin_c = max_constant(&levin);
    let levin_fail = levin.iter().filter(|b| !b.holds).count();
    let mut row = Row::at_most("levin", "all outputs", levin_fail as f64, 0.0)
        .detail(format!("{} outputs, c_B = {}", levin.len(), pinned::CODING_C));
    if let Some(b) = levin.iter().find(|b| !b.holds) {
        row = row.detail(format!("first failure: {}", b.label));
    }
    rows.push(row);

    let mut prec_b = None;
    for pe in en.points(1).iter().take(p.precision_points) {
        let x = PointOracle::rational(pe.point.clone());
        for r in 0..=p.precision_r_max {
            for s in 0..=p.precision_s_max {
                match check_precision_improvement(&x, r, s, &en, pinned::PRECISION_B) {
                    Ok(b) => {
                        update_max(&mut prec_b, b.measured_constant);
                        rows.push(bound_row("precision_improvement", &b));
                    }
                    Err(e) => rows.push(Row::info("precision_improvement", x.provenance(), e.to_string()).at_r(r)),
                }
            }
        }
    }

    for &n in &p.a_s_dims {
        for s in 0..=p.a_s_max {
            let a = formula_a_s(n, s, &en).ok();
            rows.push(Row::data("a_s", format!("n={n}"), Some(s), a));
        }
    }

    let measured = [
        ("cube_count_c", cube_c, pinned::CUBE_COUNT_C),
        ("ball_count_c", ball_c, pinned::BALL_COUNT_C),
        ("ball_cube_c", bc_c, pinned::BALL_CUBE_C),
        ("lds_coding_c", lds_c, pinned::LDS_CODING_C_MEASURED),
        ("precision_b", prec_b, pinned::PRECISION_B),
    ];
    for (name, v, pin) in measured {
        if let Some(v) = v {
            c.insert(name.into(), v as f64);
            if pinned_sweep {
                rows.push(Row::within(format!("{name}_regression"), "v0", v as f64, pin as f64, 0.0));
            }
        }
    }
    if let Some(v) = levin_c {
        c.insert("levin_c".into(), v as f64);
        rows.push(Row::at_most("levin_c_within_family", "v0", v as f64, pinned::CODING_C as f64));
    }
    c.insert("coding_c".into(), pinned::CODING_C as f64);
    Ok((rows, c))
}
