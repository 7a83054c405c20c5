//! Mutual information of strings and of points at precision `r`, and finite-scale estimators of
//! dimension and mutual dimension.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::complexity::{ball_membership, k_r, KBackend, Membership};
use crate::error::{Error, Result};
use crate::machine::{Enumeration, PointEntry};
use crate::oracle::PointOracle;

/// `I(p:q) = K(q) − K(q|p)`, reported raw (it may be negative on the compressor backend).
pub fn mutual_info(p: &BitString, q: &BitString, backend: &KBackend) -> Option<i64> {
    let kq = backend.k(q)? as i64;
    Some(kq - backend.k_given(q, p)?)
}

fn candidates(x: &PointOracle, r: u32, en: &Enumeration) -> Vec<PointEntry> {
    en.points(x.dimension())
        .iter()
        .filter(|pe| ball_membership(x, r, &pe.point) == Membership::Inside)
        .cloned()
        .collect()
}

/// `I_r(x:y)`. The exact backend minimizes over all enumerated point pairs in the two balls; the
/// compressor backend uses `K_r(x) + K_r(y) − K_r(x,y)` on the truncated representatives.
pub fn i_r(x: &PointOracle, y: &PointOracle, r: u32, backend: &KBackend) -> Option<i64> {
    match backend {
        KBackend::Exact(en) => {
            let xs = candidates(x, r, en);
            let ys = candidates(y, r, en);
            xs.iter()
                .flat_map(|a| ys.iter().map(move |b| (a, b)))
                .filter_map(|(a, b)| mutual_info(&a.encoding, &b.encoding, backend))
                .min()
        }
        KBackend::Compressor(_) => identity_i_r(x, y, r, backend),
    }
}

/// `K_r(x) + K_r(y) − K_r(x,y)` on any backend.
pub fn identity_i_r(x: &PointOracle, y: &PointOracle, r: u32, backend: &KBackend) -> Option<i64> {
    let kx = k_r(x, r, backend)? as i64;
    let ky = k_r(y, r, backend)? as i64;
    let kxy = k_r(&x.join(y), r, backend)? as i64;
    Some(kx + ky - kxy)
}

/// `J_r(x:y)`: the minimum of `I(p_x:p_y)` over K-minimizer pairs of the two balls.
pub fn j_r(x: &PointOracle, y: &PointOracle, r: u32, backend: &KBackend) -> Result<Option<i64>> {
    let en = backend
        .enumeration()
        .ok_or_else(|| Error::Precondition("j_r needs the exact backend".into()))?;
    let minimal = |mut v: Vec<PointEntry>| {
        let k = v.iter().map(|pe| pe.k).min();
        v.retain(|pe| Some(pe.k) == k);
        v
    };
    let xs = minimal(candidates(x, r, en));
    let ys = minimal(candidates(y, r, en));
    Ok(xs
        .iter()
        .flat_map(|a| ys.iter().map(move |b| (a, b)))
        .filter_map(|(a, b)| mutual_info(&a.encoding, &b.encoding, backend))
        .min())
}

/// Precision grid over which liminf and limsup are approximated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    /// `points` precisions spaced geometrically from `lo` to `hi`.
    Geometric { lo: u32, hi: u32, points: usize },
    /// Every precision in `lo..=hi`.
    Range { lo: u32, hi: u32 },
}

impl Window {
    pub fn compressor_default() -> Self {
        Window::Geometric { lo: 1 << 10, hi: 1 << 16, points: 25 }
    }

    pub fn exact_default() -> Self {
        Window::Range { lo: 2, hi: 8 }
    }

    pub fn default_for(backend: &KBackend) -> Self {
        if backend.is_exact() {
            Self::exact_default()
        } else {
            Self::compressor_default()
        }
    }

    pub fn grid(&self) -> Result<Vec<u32>> {
        let rs: Vec<u32> = match *self {
            Window::Geometric { lo, hi, points } => {
                if lo == 0 || hi < lo || points < 2 {
                    return Err(Error::InvalidConfig(format!("bad geometric window {self:?}")));
                }
                let ratio = hi as f64 / lo as f64;
                let mut v: Vec<u32> = (0..points)
                    .map(|k| (lo as f64 * ratio.powf(k as f64 / (points - 1) as f64)).round() as u32)
                    .collect();
                v.dedup();
                v
            }
            Window::Range { lo, hi } => {
                if hi <= lo {
                    return Err(Error::InvalidConfig(format!("bad range window {self:?}")));
                }
                (lo..=hi).collect()
            }
        };
        Ok(rs)
    }
}

/// Least-squares slope over one sub-window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalSlope {
    pub r_start: u32,
    pub r_end: u32,
    pub slope: f64,
}

fn least_squares(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slopes over every half-decade sub-window `[r_i, √10·r_i]` that fits in the data. When the whole
/// window spans less than a half decade it is used as a single sub-window.
pub fn local_slopes(profile: &[(u32, Option<i64>)]) -> Vec<LocalSlope> {
    let pts: Vec<(u32, i64)> = profile.iter().filter_map(|&(r, v)| v.map(|v| (r, v))).collect();
    let Some(&(last, _)) = pts.last() else { return Vec::new() };
    let span = 10f64.sqrt();
    let mut out = Vec::new();
    for (i, &(r0, _)) in pts.iter().enumerate() {
        let end = r0 as f64 * span;
        if (last as f64) < end * (1.0 - 1e-9) {
            break;
        }
        let sub: Vec<(f64, f64)> = pts[i..]
            .iter()
            .take_while(|&&(r, _)| (r as f64) <= end * (1.0 + 1e-9))
            .map(|&(r, v)| (r as f64, v as f64))
            .collect();
        if let Some(slope) = least_squares(&sub) {
            out.push(LocalSlope { r_start: r0, r_end: sub.last().unwrap().0 as u32, slope });
        }
    }
    if out.is_empty() {
        let all: Vec<(f64, f64)> = pts.iter().map(|&(r, v)| (r as f64, v as f64)).collect();
        if let Some(slope) = least_squares(&all) {
            out.push(LocalSlope { r_start: pts[0].0, r_end: last, slope });
        }
    }
    out
}

fn summarize(local: &[LocalSlope]) -> (f64, f64, f64) {
    if local.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let lo = local.iter().map(|s| s.slope).fold(f64::INFINITY, f64::min);
    let hi = local.iter().map(|s| s.slope).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi, local.last().unwrap().slope)
}

/// Estimates of `dim(x)` (lo) and `Dim(x)` (hi) from local slopes of `K_r(x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub lo: f64,
    pub hi: f64,
    pub tail: f64,
    pub local: Vec<LocalSlope>,
    pub profile: Vec<(u32, Option<i64>)>,
}

fn profile_of<F>(grid: &[u32], f: F) -> Vec<(u32, Option<i64>)>
where
    F: Fn(u32) -> Option<i64> + Sync,
{
    // Collecting an indexed parallel iterator keeps the grid order.
    grid.par_iter().map(|&r| (r, f(r))).collect()
}

pub fn dim_estimate(x: &PointOracle, window: &Window, backend: &KBackend) -> Result<DimensionEstimate> {
    let grid = window.grid()?;
    let profile = profile_of(&grid, |r| k_r(x, r, backend).map(|k| k as i64));
    let local = local_slopes(&profile);
    let (lo, hi, tail) = summarize(&local);
    Ok(DimensionEstimate { lo, hi, tail, local, profile })
}

/// One row of a mutual-information profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub r: u32,
    pub i_r: Option<i64>,
    pub k_r_x: Option<i64>,
    pub k_r_y: Option<i64>,
    pub k_r_xy: Option<i64>,
}

/// `I_r(x:y)` over a window with slope estimates of `mdim(x:y)` (lo) and `Mdim(x:y)` (hi).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MutualProfile {
    pub rows: Vec<ProfileRow>,
    pub slope_lo: f64,
    pub slope_hi: f64,
    pub tail: f64,
    pub local: Vec<LocalSlope>,
}

impl MutualProfile {
    pub fn r_grid(&self) -> Vec<u32> {
        self.rows.iter().map(|row| row.r).collect()
    }

    pub fn i_values(&self) -> Vec<Option<i64>> {
        self.rows.iter().map(|row| row.i_r).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["r", "i_r", "k_r_x", "k_r_y", "k_r_xy"]).map_err(csv_err)?;
        let cell = |v: Option<i64>| v.map(|v| v.to_string()).unwrap_or_default();
        for row in &self.rows {
            w.write_record([row.r.to_string(), cell(row.i_r), cell(row.k_r_x), cell(row.k_r_y), cell(row.k_r_xy)])
                .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Internal(e.to_string())
}

pub fn mdim_estimate(x: &PointOracle, y: &PointOracle, window: &Window, backend: &KBackend) -> Result<MutualProfile> {
    let grid = window.grid()?;
    let xy = x.join(y);
    let rows: Vec<ProfileRow> = grid
        .par_iter()
        .map(|&r| {
            let k = |p: &PointOracle| k_r(p, r, backend).map(|k| k as i64);
            let (k_r_x, k_r_y, k_r_xy) = (k(x), k(y), k(&xy));
            let i_r = match backend {
                KBackend::Exact(_) => i_r(x, y, r, backend),
                KBackend::Compressor(_) => k_r_x.zip(k_r_y).zip(k_r_xy).map(|((a, b), c)| a + b - c),
            };
            ProfileRow { r, i_r, k_r_x, k_r_y, k_r_xy }
        })
        .collect();
    let local = local_slopes(&rows.iter().map(|row| (row.r, row.i_r)).collect::<Vec<_>>());
    let (slope_lo, slope_hi, tail) = summarize(&local);
    Ok(MutualProfile { rows, slope_lo, slope_hi, tail, local })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::RationalPoint;
    use crate::machine::MachineConfig;
    use crate::oracle::{make_oracle, GeneratorSpec};
    use crate::pinned::ECHO_COST;

    fn exact() -> KBackend {
        KBackend::exact(&MachineConfig::new(26, 1000)).unwrap()
    }

    #[test]
    fn self_information_loses_the_echo_cost() {
        let backend = exact();
        let en = backend.enumeration().unwrap().clone();
        let mut checked = 0;
        for (s, prog) in en.outputs().take(60) {
            let k = prog.len() as i64;
            let expected = k - k.min(ECHO_COST as i64);
            assert_eq!(mutual_info(s, s, &backend), Some(expected), "{s}");
            checked += 1;
        }
        assert_eq!(checked, 60);
    }

    #[test]
    fn empty_condition_gives_no_information() {
        let backend = exact();
        let en = backend.enumeration().unwrap().clone();
        for (s, _) in en.outputs().take(60) {
            assert_eq!(mutual_info(&BitString::new(), s, &backend), Some(0));
        }
    }

    #[test]
    fn exact_i_r_single_pair() {
        let backend = exact();
        let en = backend.enumeration().unwrap().clone();
        let q = en.points(1)[0].clone();
        let x = PointOracle::rational(q.point.clone());
        // At r = 0 the unit ball around the cheapest point can hold several points; a large r
        // isolates it.
        let r = 20;
        assert_eq!(i_r(&x, &x, r, &backend), mutual_info(&q.encoding, &q.encoding, &backend));
        assert_eq!(j_r(&x, &x, r, &backend).unwrap(), i_r(&x, &x, r, &backend));
        for r in 0..6 {
            let (i, j) = (i_r(&x, &x, r, &backend), j_r(&x, &x, r, &backend).unwrap());
            assert!(i <= j, "r={r}");
        }
    }

    #[test]
    fn j_r_needs_exact_backend() {
        let x = PointOracle::rational(RationalPoint::origin(1));
        assert!(j_r(&x, &x, 1, &KBackend::compressor()).is_err());
    }

    #[test]
    fn windows() {
        let g = Window::compressor_default().grid().unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!((g[0], g[24]), (1024, 65536));
        assert_eq!(Window::exact_default().grid().unwrap(), (2..=8).collect::<Vec<_>>());
        assert!(Window::Range { lo: 3, hi: 3 }.grid().is_err());
    }

    #[test]
    fn slopes_of_lines() {
        let profile: Vec<(u32, Option<i64>)> = (1..=40).map(|r| (r, Some(3 * r as i64 + 7))).collect();
        let s = local_slopes(&profile);
        assert!(!s.is_empty());
        assert!(s.iter().all(|l| (l.slope - 3.0).abs() < 1e-9));
        // Narrow window: one fit over everything.
        let narrow: Vec<(u32, Option<i64>)> = (10..=20).map(|r| (r, Some(r as i64))).collect();
        let s = local_slopes(&narrow);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].r_start, s[0].r_end), (10, 20));
    }

    #[test]
    fn compressor_profile_small_window() {
        let backend = KBackend::compressor();
        let w = Window::Geometric { lo: 256, hi: 4096, points: 9 };
        let x = make_oracle(&GeneratorSpec::Random { seed: 3, n: 1 }).unwrap();
        let d = dim_estimate(&x, &w, &backend).unwrap();
        assert!(d.hi > 0.8 && d.lo <= d.hi, "{d:?}");
        let p = mdim_estimate(&x, &x, &w, &backend).unwrap();
        assert_eq!(p.rows.len(), 9);
        assert!(p.slope_lo <= p.slope_hi);
        let csv = p.to_csv().unwrap();
        assert!(csv.starts_with("r,i_r,k_r_x,k_r_y,k_r_xy\n256,"));
        // Rebuilding gives bit-identical values.
        assert_eq!(p, mdim_estimate(&x, &x, &w, &backend).unwrap());
    }
}
