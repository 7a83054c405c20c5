use serde::{Deserialize, Serialize};

use super::{interleave, ComputableFunction, ModulusSpec, SSelector};
use crate::codec::{DyadicRational, RationalPoint};
use crate::error::{Error, Result};
use crate::geometry::half_log_ceil;

/// Search region `[−2^e, 2^e)^{|S|}` and a cap on visited nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBox {
    pub half_width_exp: u32,
    pub node_budget: u64,
}

impl Default for SearchBox {
    fn default() -> Self {
        SearchBox { half_width_exp: 10, node_budget: 5_000_000 }
    }
}

struct Node {
    corner: Vec<DyadicRational>,
    /// The box side is `2^{-level}`.
    level: i64,
}

/// Builds an evaluator for the S-left inverse `g` with `g(f(x *_S y), y) = x`.
///
/// Input to `g` is `z = (f(x *_S y), y) ∈ ℝ^{k + n − |S|}`. At precision `r`, with `m′ = m′(r)` and
/// working precision `P = m′ + 3`, the candidate grid has pitch `2^{-m(m′+2)}` (refined by
/// `⌈½ log₂|S|⌉ − 1` bits when `|S| > 4` so every point has a grid neighbour within `2^{-m(m′+2)}`).
/// A grid point `q` is accepted when `|M_f(q *_S y)(P) − z_f(P)| ≤ 2^{-(m′+1)}`, where the `y`
/// part of the query comes from `z` at the same precision. Any accepted `q` is within `2^{-r}`
/// of `x`, and the grid point nearest `x` is always accepted.
///
/// The grid is walked depth first over dyadic sub-boxes in Morton order. A box is dropped when
/// the modulus of `f` shows that no point in it can pass the test.
pub fn left_inverse_synthesize(
    f: &ComputableFunction,
    sel: &SSelector,
    m_inv: &ModulusSpec,
    search: SearchBox,
) -> Result<ComputableFunction> {
    if sel.n() != f.n() {
        return Err(Error::ArityMismatch { expected: f.n(), got: sel.n() });
    }
    if sel.size() == 0 {
        return Err(Error::InvalidSpec("left inverse needs a nonempty S".into()));
    }
    let m = f
        .modulus()
        .cloned()
        .ok_or_else(|| Error::Precondition(format!("{} has no declared modulus", f.name())))?;
    m_inv.validate()?;
    let (k, s, rest) = (f.k(), sel.size(), f.n() - sel.size());
    let name = format!("left_inverse({}, S={:?})", f.name(), sel.members());
    let (f, sel, m_inv2) = (f.clone(), sel.clone(), m_inv.clone());
    let g = ComputableFunction::new(name, k + rest, s, move |z, r| search_at(&f, &sel, &m, &m_inv2, search, z, r));
    Ok(g.with_modulus(m_inv.clone()))
}

fn search_at(
    f: &ComputableFunction,
    sel: &SSelector,
    m: &ModulusSpec,
    m_inv: &ModulusSpec,
    search: SearchBox,
    z: &dyn Fn(u32) -> RationalPoint,
    r: u32,
) -> Result<RationalPoint> {
    let k = f.k();
    let s = sel.size();
    let mp = m_inv.at(r)?;
    let p = (mp + 3).max(0) as u32;
    let zp = z(p);
    let target = RationalPoint::new(zp.coords()[..k].to_vec())?;
    let leaf_level = m.at((mp + 2).max(0) as u32)? + half_log_ceil(s).saturating_sub(1) as i64;
    let root_level = -(search.half_width_exp as i64) - 1;
    if leaf_level < root_level {
        return Err(Error::Precondition("grid pitch exceeds the search box".into()));
    }
    let accept = DyadicRational::pow2(-(mp + 1));
    let eval_slack = DyadicRational::pow2(1 - p as i64);
    // Distance from a box centre to any point of the box, as a power of two.
    let spread = half_log_ceil(s) as i64 - 1;

    let value_at = |q: &[DyadicRational]| -> Result<RationalPoint> {
        let qy = |t: u32| {
            let y = z(t).coords()[k..].to_vec();
            RationalPoint::new(interleave(q, sel, &y).expect("arity fixed by construction")).expect("n ≥ 1")
        };
        f.eval_with(&qy, p)
    };

    let start = DyadicRational::pow2(search.half_width_exp as i64);
    let mut stack = vec![Node { corner: vec![-&start; s], level: root_level }];
    let mut visited = 0u64;
    while let Some(node) = stack.pop() {
        visited += 1;
        if visited > search.node_budget {
            return Err(Error::ResourceExceeded(format!("left-inverse search exceeded {} nodes", search.node_budget)));
        }
        if node.level == leaf_level {
            let d2 = value_at(&node.corner)?.dist_sq(&target);
            if d2 <= &accept * &accept {
                return RationalPoint::new(node.corner);
            }
            continue;
        }
        let half = DyadicRational::pow2(-(node.level + 1));
        let centre: Vec<DyadicRational> = node.corner.iter().map(|c| c + &half).collect();
        let d2 = value_at(&centre)?.dist_sq(&target);
        let variation = DyadicRational::pow2(m.variation_exp(node.level - spread)?);
        let reach = &(&accept + &variation) + &eval_slack;
        if d2 > &reach * &reach {
            continue;
        }
        // Children in reverse Morton order so the lowest index is popped first.
        for child in (0..1usize << s).rev() {
            let corner = node
                .corner
                .iter()
                .enumerate()
                .map(|(i, c)| if child >> i & 1 == 1 { c + &half } else { c.clone() })
                .collect();
            stack.push(Node { corner, level: node.level + 1 });
        }
    }
    Err(Error::SearchExhausted(format!("no candidate at r = {r} inside [-2^{0}, 2^{0})", search.half_width_exp)))
}
