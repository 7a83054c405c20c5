//! Estimator suites: calibration, mutual dimension, the data processing inequalities, the
//! conservation families, and the Hilbert counterexample.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Constants, ExperimentConfig, PreparedFunction, Row, SuiteOutput, SLACK, TWO_SIDED_SLACK};
use crate::codec::{DyadicRational, RationalPoint};
use crate::complexity::KBackend;
use crate::error::{Error, Result};
use crate::functions::{
    hilbert2d, interleave, inverse_modulus_check, left_inverse_synthesize, modulus_check, CheckOutcome,
    ComputableFunction, ModulusSpec, SSelector, SamplePlan, SearchBox,
};
use crate::mutual_info::{dim_estimate, i_r, DimensionEstimate, MutualProfile, Window};
use crate::oracle::{make_oracle, GeneratorSpec, PointOracle};
use crate::pinned;

/// Upper bound on `dim` of a rational point.
pub const RATIONAL_TOL: f64 = 0.05;

struct Ctx {
    backend: KBackend,
    window: Window,
    profiles: HashMap<(String, String), Arc<MutualProfile>>,
}

impl Ctx {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let backend = KBackend::from_spec(&cfg.backend)?;
        let window = cfg.window.clone().unwrap_or_else(|| Window::default_for(&backend));
        Ok(Ctx { backend, window, profiles: HashMap::new() })
    }

    fn dim(&self, x: &PointOracle) -> Result<DimensionEstimate> {
        dim_estimate(x, &self.window, &self.backend)
    }

    fn mdim(&mut self, x: &PointOracle, y: &PointOracle) -> Result<Arc<MutualProfile>> {
        let key = (x.provenance().to_string(), y.provenance().to_string());
        if let Some(p) = self.profiles.get(&key) {
            return Ok(Arc::clone(p));
        }
        let p = Arc::new(crate::mutual_info::mdim_estimate(x, y, &self.window, &self.backend)?);
        self.profiles.insert(key, Arc::clone(&p));
        Ok(p)
    }

    fn i_at(&self, x: &PointOracle, y: &PointOracle, r: u32) -> Option<i64> {
        i_r(x, y, r, &self.backend)
    }

    fn window_hi(&self) -> Result<u32> {
        Ok(*self.window.grid()?.last().expect("nonempty window"))
    }
}

fn oracles(cfg: &ExperimentConfig) -> Result<Vec<(GeneratorSpec, PointOracle)>> {
    cfg.generators.iter().map(|g| Ok((g.clone(), make_oracle(g)?))).collect()
}

fn k_rows(name: &str, subject: &str, d: &DimensionEstimate) -> Vec<Row> {
    d.profile.iter().map(|&(r, k)| Row::data(name, subject, Some(r), k.map(|k| k as f64))).collect()
}

fn i_rows(subject: &str, p: &MutualProfile) -> Vec<Row> {
    p.rows.iter().map(|row| Row::data("i_r", subject, Some(row.r), row.i_r.map(|v| v as f64))).collect()
}

fn alpha_of(m: &ModulusSpec) -> Result<f64> {
    m.alpha()?.to_f64().ok_or_else(|| Error::Internal("alpha not representable".into()))
}

pub(super) fn kprofile(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let ctx = Ctx::new(cfg)?;
    let mut rows = Vec::new();
    let mut c = Constants::new();
    for (spec, x) in oracles(cfg)? {
        let rate = spec.information_rate()?;
        let subject = spec.to_string();
        let d = ctx.dim(&x)?;
        rows.extend(k_rows("k_r", &subject, &d));
        if rate == 0.0 {
            rows.push(Row::at_most("dim_hi", &subject, d.hi, RATIONAL_TOL));
        } else {
            rows.push(Row::within("dim_lo", &subject, d.lo, rate, SLACK));
            rows.push(Row::within("dim_hi", &subject, d.hi, rate, SLACK));
        }
        c.insert(format!("dim_lo/{subject}"), d.lo);
        c.insert(format!("dim_hi/{subject}"), d.hi);
    }
    c.insert("slack".into(), SLACK);
    c.insert("rational_tol".into(), RATIONAL_TOL);
    Ok((rows, c))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairEntry {
    x: GeneratorSpec,
    y: GeneratorSpec,
    #[serde(default)]
    independent: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MdimParams {
    pairs: Vec<PairEntry>,
    /// Largest allowed `|I_r(x:y) − I_r(y:x)|` in bits; the pinned value by default.
    symmetry_tolerance: i64,
}

impl Default for MdimParams {
    fn default() -> Self {
        MdimParams { pairs: Vec::new(), symmetry_tolerance: pinned::MDIM_SYMMETRY_TOL }
    }
}

/// `0 ≤ slopes ≤ min{n, t} + slack` and the symmetry defect of one pair.
fn pair_checks(
    ctx: &mut Ctx,
    x: &PointOracle,
    y: &PointOracle,
    subject: &str,
    tol: i64,
    rows: &mut Vec<Row>,
) -> Result<(Arc<MutualProfile>, i64)> {
    let xy = ctx.mdim(x, y)?;
    let yx = ctx.mdim(y, x)?;
    let cap = x.dimension().min(y.dimension()) as f64;
    rows.push(Row::at_least("range_lo", subject, xy.slope_lo, pinned::MDIM_RANGE_FLOOR));
    rows.push(Row::at_most("range_hi", subject, xy.slope_hi, cap + SLACK));
    let defect = xy
        .rows
        .iter()
        .zip(&yx.rows)
        .filter_map(|(a, b)| Some((a.i_r? - b.i_r?).abs()))
        .max()
        .unwrap_or(0);
    rows.push(Row::at_most("symmetry", subject, defect as f64, tol as f64));
    rows.extend(i_rows(subject, &xy));
    Ok((xy, defect))
}

pub(super) fn mdim(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let p: MdimParams = cfg.params()?;
    let mut ctx = Ctx::new(cfg)?;
    let mut rows = Vec::new();
    let mut c = Constants::new();
    let mut worst_defect = 0i64;
    for (spec, x) in oracles(cfg)? {
        let subject = format!("x=y={spec}");
        let d = ctx.dim(&x)?;
        let (xx, defect) = pair_checks(&mut ctx, &x, &x, &subject, p.symmetry_tolerance, &mut rows)?;
        worst_defect = worst_defect.max(defect);
        rows.push(Row::within("self_lo", &subject, xx.slope_lo, d.lo, SLACK));
        rows.push(Row::within("self_hi", &subject, xx.slope_hi, d.hi, SLACK));
        c.insert(format!("mdim_hi/{subject}"), xx.slope_hi);
    }
    for pair in &p.pairs {
        let (x, y) = (make_oracle(&pair.x)?, make_oracle(&pair.y)?);
        let subject = format!("x={} y={}", pair.x, pair.y);
        let (xy, defect) = pair_checks(&mut ctx, &x, &y, &subject, p.symmetry_tolerance, &mut rows)?;
        worst_defect = worst_defect.max(defect);
        if pair.independent {
            rows.push(Row::at_most("independent", &subject, xy.slope_hi, SLACK));
        }
        c.insert(format!("mdim_hi/{subject}"), xy.slope_hi);
    }
    c.insert("symmetry_defect_max".into(), worst_defect as f64);
    c.insert("symmetry_tolerance".into(), p.symmetry_tolerance as f64);
    c.insert("slack".into(), SLACK);
    Ok((rows, c))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DpiParams {
    /// Extra `y` generators paired with every `x`; `y = x` is always included.
    ys: Vec<GeneratorSpec>,
    modulus_samples: usize,
    modulus_r_max: u32,
    /// Check the finite-scale inequality at every window precision with `m(r+1)` in the window.
    finite_scale: bool,
}

impl Default for DpiParams {
    fn default() -> Self {
        DpiParams { ys: Vec::new(), modulus_samples: 1000, modulus_r_max: 16, finite_scale: true }
    }
}

fn outcome_row(name: &str, subject: &str, out: &CheckOutcome) -> Row {
    match out {
        CheckOutcome::Pass { checked } => Row::check(name, subject, true).detail(format!("{checked} samples")),
        CheckOutcome::Counterexample(w) => Row::check(name, subject, false).at_r(w.r).detail(format!(
            "x={} y={} distance={} threshold={}",
            w.x, w.y, w.output_distance, w.threshold
        )),
    }
}

pub(super) fn dpi_verify(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let p: DpiParams = cfg.params()?;
    let mut ctx = Ctx::new(cfg)?;
    let gens = oracles(cfg)?;
    let ys: Vec<(GeneratorSpec, PointOracle)> =
        p.ys.iter().map(|g| Ok((g.clone(), make_oracle(g)?))).collect::<Result<_>>()?;
    let hi = ctx.window_hi()?;
    let mut rows = Vec::new();
    let mut c = Constants::new();
    for pf in cfg.prepared_functions()? {
        let f = &pf.f;
        let m = pf
            .modulus
            .clone()
            .ok_or_else(|| Error::InvalidConfig(format!("{} needs a modulus for the dpi suite", f.name())))?;
        let plan = SamplePlan { seed: cfg.seed, count: p.modulus_samples, ..Default::default() };
        rows.push(outcome_row("modulus", &format!("{} m={m}", f.name()), &modulus_check(f, &m, &plan, p.modulus_r_max)?));
        let factor = 1.0 / alpha_of(&m)?;
        for (xs, x) in gens.iter().filter(|(g, _)| g.dimension() == f.n()) {
            let fx = f.apply(x)?;
            let pairs = std::iter::once((xs.clone(), x.clone())).chain(ys.iter().cloned());
            for (ys_spec, y) in pairs {
                let subject = format!("f={} x={xs} y={ys_spec}", f.name());
                let base = ctx.mdim(x, &y)?;
                let image = ctx.mdim(&fx, &y)?;
                let name = if factor == 1.0 { "dpi" } else { "dpi_holder" };
                rows.push(
                    Row::at_most(name, &subject, image.slope_hi, factor * base.slope_hi + SLACK)
                        .detail(format!("factor={factor}")),
                );
                rows.extend(i_rows(&format!("f(x) vs y: {subject}"), &image));
                c.insert(format!("slope_hi(f(x):y)/{subject}"), image.slope_hi);
                c.insert(format!("slope_hi(x:y)/{subject}"), base.slope_hi);
                if p.finite_scale {
                    let worst = finite_scale_rows(&ctx, &m, x, &y, &image, hi, &subject, &mut rows)?;
                    if let Some(w) = worst {
                        c.insert(format!("finite_scale_slack/{subject}"), w);
                    }
                }
            }
        }
    }
    c.insert("slack".into(), SLACK);
    Ok((rows, c))
}

/// `I_r(f(x):y) ≤ I_{m(r+1)}(x:y) + slack·r` at every precision of the image profile with
/// `m(r+1)` inside the window. Returns the largest measured `(lhs − rhs)/r`.
#[allow(clippy::too_many_arguments)]
fn finite_scale_rows(
    ctx: &Ctx,
    m: &ModulusSpec,
    x: &PointOracle,
    y: &PointOracle,
    image: &MutualProfile,
    hi: u32,
    subject: &str,
    rows: &mut Vec<Row>,
) -> Result<Option<f64>> {
    let targets: Vec<(u32, i64, u32)> = image
        .rows
        .iter()
        .filter_map(|row| {
            let mr = m.at(row.r + 1).ok()?;
            (row.r > 0 && mr >= 0 && mr as u32 <= hi).then_some((row.r, row.i_r?, mr as u32))
        })
        .collect();
    let measured: Vec<Option<i64>> = targets.par_iter().map(|&(_, _, mr)| ctx.i_at(x, y, mr)).collect();
    let mut worst: Option<f64> = None;
    for (&(r, lhs, mr), rhs) in targets.iter().zip(measured) {
        let Some(rhs) = rhs else { continue };
        let slack = (lhs - rhs) as f64 / r as f64;
        worst = Some(worst.map_or(slack, |w: f64| w.max(slack)));
        rows.push(
            Row::at_most("finite_scale", subject, lhs as f64, rhs as f64 + SLACK * r as f64)
                .at_r(r)
                .detail(format!("m(r+1)={mr}")),
        );
    }
    Ok(worst)
}

/// The oracle of `x *_S z`. Each factor is queried one bit finer so the result stays within
/// `2^{-r}`.
fn interleaved(x: &PointOracle, sel: &SSelector, z: Option<&PointOracle>) -> Result<PointOracle> {
    let rest = sel.n() - sel.size();
    if x.dimension() != sel.size() {
        return Err(Error::ArityMismatch { expected: sel.size(), got: x.dimension() });
    }
    let z = match (rest, z) {
        (0, _) => None,
        (_, Some(z)) if z.dimension() == rest => Some(z.clone()),
        (_, Some(z)) => return Err(Error::ArityMismatch { expected: rest, got: z.dimension() }),
        (_, None) => return Err(Error::InvalidConfig(format!("S = {:?} needs a z generator", sel.members()))),
    };
    let Some(z) = z else { return Ok(x.clone()) };
    let (x, sel2) = (x.clone(), sel.clone());
    let name = format!("{} *_S{:?} {}", x.provenance(), sel.members(), z.provenance());
    Ok(PointOracle::from_fn(sel.n(), name, move |r| {
        let (a, b) = (x.query(r + 1), z.query(r + 1));
        RationalPoint::new(interleave(a.coords(), &sel2, b.coords()).expect("arity checked")).expect("n ≥ 1")
    }))
}

/// `(f(x *_S z), z)`, or `f(x)` when `S` is every argument.
fn reverse_image(pf: &PreparedFunction, sel: &SSelector, x: &PointOracle) -> Result<PointOracle> {
    let z = pf.z.as_ref().map(make_oracle).transpose()?;
    let fx = pf.f.apply(&interleaved(x, sel, z.as_ref())?)?;
    Ok(match z {
        Some(z) if sel.size() < sel.n() => fx.join(&z),
        _ => fx,
    })
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ReverseParams {
    ys: Vec<GeneratorSpec>,
    inverse_samples: usize,
    inverse_r_max: u32,
    synthesis: SynthesisParams,
}

impl Default for ReverseParams {
    fn default() -> Self {
        ReverseParams { ys: Vec::new(), inverse_samples: 1000, inverse_r_max: 16, synthesis: SynthesisParams::default() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SynthesisParams {
    enabled: bool,
    inputs: usize,
    r_max: u32,
    /// Inputs are drawn from `2^{-coord_bits}ℤ ∩ [-1, 1)`.
    coord_bits: u32,
    search: SearchBox,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        SynthesisParams { enabled: true, inputs: 100, r_max: 20, coord_bits: 24, search: SearchBox::default() }
    }
}

fn unit_point(rng: &mut ChaCha8Rng, n: usize, bits: u32) -> Vec<DyadicRational> {
    (0..n).map(|_| DyadicRational::new(rng.random_range(-(1i64 << bits)..1i64 << bits), bits)).collect()
}

/// Runs the synthesized left inverse on seeded inputs and counts precisions where it misses the
/// true `x` by more than `2^{-r}`.
fn synthesis_failures(
    f: &ComputableFunction,
    sel: &SSelector,
    m_inv: &ModulusSpec,
    p: &SynthesisParams,
    seed: u64,
) -> Result<(usize, usize)> {
    let g = left_inverse_synthesize(f, sel, m_inv, p.search)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<(Vec<DyadicRational>, Vec<DyadicRational>)> = (0..p.inputs)
        .map(|_| (unit_point(&mut rng, sel.size(), p.coord_bits), unit_point(&mut rng, sel.n() - sel.size(), p.coord_bits)))
        .collect();
    let fails: Vec<usize> = inputs
        .par_iter()
        .map(|(x, y)| {
            let xy = RationalPoint::new(interleave(x, sel, y).expect("arity")).expect("n ≥ 1");
            let x = RationalPoint::new(x.clone()).expect("|S| ≥ 1");
            let y = y.clone();
            let z = |t: u32| {
                let fx = f.eval_point(&xy, t + 1).expect("library functions are total");
                let mut c = fx.into_coords();
                c.extend(y.iter().cloned());
                RationalPoint::new(c).expect("k ≥ 1")
            };
            (0..=p.r_max)
                .filter(|&r| match g.eval_with(&z, r) {
                    Ok(q) => {
                        let b = DyadicRational::pow2_neg(r);
                        q.dist_sq(&x) > &b * &b
                    }
                    Err(_) => true,
                })
                .count()
        })
        .collect();
    Ok((fails.iter().sum(), p.inputs * (p.r_max as usize + 1)))
}

pub(super) fn reverse_dpi_verify(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let p: ReverseParams = cfg.params()?;
    let mut ctx = Ctx::new(cfg)?;
    let gens = oracles(cfg)?;
    let ys: Vec<(GeneratorSpec, PointOracle)> =
        p.ys.iter().map(|g| Ok((g.clone(), make_oracle(g)?))).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut c = Constants::new();
    for pf in cfg.prepared_functions()? {
        let f = &pf.f;
        let sel = pf.select.clone().unwrap_or_else(|| SSelector::all(f.n()));
        let m_inv = pf.inverse_modulus.clone().or_else(|| f.inverse_modulus_for(&sel).cloned()).ok_or_else(|| {
            Error::InvalidConfig(format!("{} has no inverse modulus for S = {:?}", f.name(), sel.members()))
        })?;
        let fsub = format!("{} S={:?} m'={m_inv}", f.name(), sel.members());
        let plan = SamplePlan { seed: cfg.seed, count: p.inverse_samples, ..Default::default() };
        rows.push(outcome_row("inverse_modulus", &fsub, &inverse_modulus_check(f, &sel, &m_inv, &plan, p.inverse_r_max)?));
        if p.synthesis.enabled {
            let (fails, total) = synthesis_failures(f, &sel, &m_inv, &p.synthesis, cfg.seed)?;
            rows.push(Row::at_most("synthesis", &fsub, fails as f64, 0.0).detail(format!(
                "{} inputs x r <= {}: {total} evaluations",
                p.synthesis.inputs, p.synthesis.r_max
            )));
        }
        let factor = 1.0 / alpha_of(&m_inv)?;
        for (xs, x) in gens.iter().filter(|(g, _)| g.dimension() == sel.size()) {
            let joint = reverse_image(&pf, &sel, x)?;
            let pairs = std::iter::once((xs.clone(), x.clone())).chain(ys.iter().cloned());
            for (ys_spec, y) in pairs {
                let subject = format!("f={} S={:?} x={xs} y={ys_spec}", f.name(), sel.members());
                let base = ctx.mdim(x, &y)?;
                let image = ctx.mdim(&joint, &y)?;
                let name = if factor == 1.0 { "reverse_dpi" } else { "reverse_dpi_holder" };
                rows.push(
                    Row::at_most(name, &subject, base.slope_hi, factor * image.slope_hi + SLACK)
                        .detail(format!("factor={factor}")),
                );
                rows.extend(i_rows(&format!("image vs y: {subject}"), &image));
                c.insert(format!("slope_hi(x:y)/{subject}"), base.slope_hi);
                c.insert(format!("slope_hi(image:y)/{subject}"), image.slope_hi);
            }
        }
    }
    c.insert("slack".into(), SLACK);
    Ok((rows, c))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConservationCase {
    /// Indices into `functions` and `generators`.
    f: usize,
    g: usize,
    x: usize,
    y: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConservationParams {
    cases: Vec<ConservationCase>,
}

fn bi_lipschitz(pf: &PreparedFunction) -> bool {
    let linear = |m: Option<&ModulusSpec>| matches!(m, Some(ModulusSpec::Linear { .. }));
    linear(pf.modulus.as_ref()) && linear(pf.f.inverse_modulus_for(&SSelector::all(pf.f.n())))
}

pub(super) fn conservation_verify(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let p: ConservationParams = cfg.params()?;
    let mut ctx = Ctx::new(cfg)?;
    let gens = oracles(cfg)?;
    let fns = cfg.prepared_functions()?;
    let mut rows = Vec::new();
    let mut c = Constants::new();
    let pick = |v: usize, len: usize, what: &str| {
        (v < len).then_some(v).ok_or_else(|| Error::InvalidConfig(format!("{what} index {v} out of range")))
    };
    for case in &p.cases {
        let (pf, pg) = (&fns[pick(case.f, fns.len(), "function")?], &fns[pick(case.g, fns.len(), "function")?]);
        let (xs, x) = &gens[pick(case.x, gens.len(), "generator")?];
        let (ys, y) = &gens[pick(case.y, gens.len(), "generator")?];
        let subject = format!("f={} g={} x={xs} y={ys}", pf.f.name(), pg.f.name());
        let base = ctx.mdim(x, y)?;
        c.insert(format!("slope_hi(x:y)/{subject}"), base.slope_hi);
        if let (Some(sf), Some(sg)) = (&pf.select, &pg.select) {
            let need = |pf: &PreparedFunction| {
                pf.inverse_modulus
                    .clone()
                    .ok_or_else(|| Error::InvalidConfig(format!("{} has no inverse modulus", pf.f.name())))
            };
            let factor = 1.0 / (alpha_of(&need(pf)?)? * alpha_of(&need(pg)?)?);
            let fx = reverse_image(pf, sf, x)?;
            let gy = reverse_image(pg, sg, y)?;
            let image = ctx.mdim(&fx, &gy)?;
            rows.push(
                Row::at_most("reverse_conservation", &subject, base.slope_hi, factor * image.slope_hi + SLACK)
                    .detail(format!("factor={factor} S_f={:?} S_g={:?}", sf.members(), sg.members())),
            );
            rows.extend(i_rows(&format!("images: {subject}"), &image));
            c.insert(format!("slope_hi(images)/{subject}"), image.slope_hi);
            continue;
        }
        let modulus = |pf: &PreparedFunction| {
            pf.modulus.clone().ok_or_else(|| Error::InvalidConfig(format!("{} has no modulus", pf.f.name())))
        };
        let factor = 1.0 / (alpha_of(&modulus(pf)?)? * alpha_of(&modulus(pg)?)?);
        let fx = pf.f.apply(x)?;
        let gy = pg.f.apply(y)?;
        let image = ctx.mdim(&fx, &gy)?;
        let name = if factor == 1.0 { "conservation" } else { "conservation_holder" };
        rows.push(
            Row::at_most(name, &subject, image.slope_hi, factor * base.slope_hi + SLACK)
                .detail(format!("factor={factor}")),
        );
        if bi_lipschitz(pf) && bi_lipschitz(pg) {
            rows.push(Row::within("preservation_lo", &subject, image.slope_lo, base.slope_lo, TWO_SIDED_SLACK));
            rows.push(Row::within("preservation_hi", &subject, image.slope_hi, base.slope_hi, TWO_SIDED_SLACK));
        }
        rows.extend(i_rows(&format!("images: {subject}"), &image));
        c.insert(format!("slope_hi(images)/{subject}"), image.slope_hi);
    }
    c.insert("slack".into(), SLACK);
    c.insert("two_sided_slack".into(), TWO_SIDED_SLACK);
    Ok((rows, c))
}

/// Lower bound on `dim(f(x))` and upper bound on `slope_hi(x:f(x))` for a witness.
pub const COUNTEREXAMPLE_DIM: f64 = 1.8;
pub const COUNTEREXAMPLE_MDIM: f64 = 1.1;

pub(super) fn counterexample_demo(cfg: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut ctx = Ctx::new(cfg)?;
    let h = hilbert2d();
    let mut rows = Vec::new();
    let mut c = Constants::new();
    for (spec, x) in oracles(cfg)?.into_iter().filter(|(g, _)| g.dimension() == 1) {
        let subject = format!("x={spec}");
        let fx = h.apply(&x)?;
        let dx = ctx.dim(&x)?;
        let dfx = ctx.dim(&fx)?;
        let prof = ctx.mdim(&x, &fx)?;
        rows.extend(k_rows("k_r(f(x))", &subject, &dfx));
        rows.extend(i_rows(&subject, &prof));
        c.insert(format!("dim_hi(f(x))/{subject}"), dfx.hi);
        c.insert(format!("dim_hi(x)/{subject}"), dx.hi);
        c.insert(format!("slope_hi(x:f(x))/{subject}"), prof.slope_hi);
        let ordering = format!(
            "mdim(f(x):y) = dim(f(x)) ~ {:.3} > 1 >= Dim(x) ~ {:.3} >= Mdim(x:y) ~ {:.3}",
            dfx.hi, dx.hi, prof.slope_hi
        );
        if spec.information_rate()? < 1.0 {
            rows.push(Row::info("witness", &subject, format!("not a counterexample witness: {ordering}")));
            continue;
        }
        rows.push(Row::at_least("dim_f_x", &subject, dfx.hi, COUNTEREXAMPLE_DIM));
        rows.push(Row::at_most("mdim_x_f_x", &subject, prof.slope_hi, COUNTEREXAMPLE_MDIM));
        rows.push(Row::info("ordering", &subject, ordering));
    }
    Ok((rows, c))
}
