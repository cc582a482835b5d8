//! The diagonal flow on unimodular planar lattices: successive minima with
//! respect to an `L_p` ball, detection of the times where the first two
//! minima collide, tail estimates of the resulting Dirichlet-type constant,
//! and a numeric distance to the catalog of extremal lattices.
//!
//! A number `alpha` and a time `t >= 1` determine the lattice spanned by
//! `(1/t, -t*alpha)` and `(0, t)`: the integer vector `(q, p)` lands on
//! `(q/t, t*(p - q*alpha))`. Working vectors are carried as integer pairs
//! and their coordinates are recomputed on every evaluation from an exact
//! rational stand-in for `alpha`, so the catastrophic cancellation in
//! `p - q*alpha` is resolved in integer arithmetic and no floating-point
//! error accumulates along the flow.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::cf::{rat_to_f64, ContinuedFraction};
use crate::error::{Error, Result};
use crate::geometry;

const SQRT2: f64 = std::f64::consts::SQRT_2;
/// Step of the geometric scanning grid.
const GRID_RATIO: f64 = 1.02;
/// Relative width to which a champion change is narrowed by bisection.
const BISECT_REL: f64 = 1e-10;
/// A first minimum below this value is treated as the rational collapse.
const DEGENERATE_LAMBDA: f64 = 1e-6;
/// Hard ceiling on enumerated candidates in one successive-minima call.
const ENUM_BUDGET: usize = 2_000_000;
/// Predicted enumeration size beyond which the basis is skew enough that
/// the reduced vectors themselves are reported (pre-collapse regime; the
/// first minimum is then exact and the second is only needed as a scale).
const SKEW_SHORTCUT: f64 = 400_000.0;

/// An exact rational stand-in for a possibly irrational number, deep enough
/// that every decision made at times up to the requested horizon is the
/// same as for the number itself.
#[derive(Clone, Debug)]
pub struct ResolvedAlpha {
    value: BigRational,
    rational: bool,
}

impl ResolvedAlpha {
    pub fn value(&self) -> &BigRational {
        &self.value
    }

    /// Whether the input was exactly rational (as opposed to pinned).
    pub fn is_rational(&self) -> bool {
        self.rational
    }

    pub fn as_f64(&self) -> f64 {
        rat_to_f64(&self.value)
    }
}

/// Pin an expansion to an exact rational usable for all times `t <= t_max`.
///
/// Rational inputs are taken verbatim. Otherwise convergents are extended
/// until the denominator passes `4 * t_max`, and then a further factor of
/// `2^30`, so that the surrogate differs from the number by far less than
/// any coordinate decided while scanning.
pub fn resolve_alpha(alpha: &ContinuedFraction, t_max: f64) -> Result<ResolvedAlpha> {
    if !t_max.is_finite() || t_max < 1.0 {
        return Err(Error::domain("the time horizon must be a finite value at least 1"));
    }
    if let Some(value) = alpha.value_rational() {
        return Ok(ResolvedAlpha { value, rational: true });
    }
    let threshold = BigInt::from_f64((4.0 * t_max).ceil())
        .ok_or_else(|| Error::internal("time horizon does not convert to an integer"))?;
    let mut max_index = 32usize;
    loop {
        let convs = alpha.convergents(max_index);
        if let Some(d0) = convs.iter().position(|c| c.q > threshold) {
            let target = &convs[d0].q << 30;
            if let Some(c) = convs[d0..].iter().find(|c| c.q >= target) {
                return Ok(ResolvedAlpha {
                    value: BigRational::new(c.p.clone(), c.q.clone()),
                    rational: false,
                });
            }
        }
        max_index *= 2;
        if max_index > (1 << 20) {
            return Err(Error::resource(
                "pinning the number to a rational needed too many convergents",
            ));
        }
    }
}

#[derive(Clone, Debug)]
struct ExactFrame {
    alpha: BigRational,
    t: f64,
}

/// A planar lattice basis. Columns are kept as floating vectors for
/// inspection; bases generated along the flow additionally carry the exact
/// frame, and all internal arithmetic then runs on integer pairs.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    cols: [[f64; 2]; 2],
    exact: Option<ExactFrame>,
}

impl LatticeBasis {
    /// A basis from two column vectors `[x, y]`. No unimodularity is
    /// required, only nondegeneracy; minima of rescaled reference lattices
    /// are computed through this entry point.
    pub fn from_columns(cols: [[f64; 2]; 2]) -> Result<Self> {
        if cols.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("basis entries must be finite"));
        }
        let b = LatticeBasis { cols, exact: None };
        if b.det().abs() < 1e-12 {
            return Err(Error::domain("basis columns are linearly dependent"));
        }
        Ok(b)
    }

    pub fn columns(&self) -> [[f64; 2]; 2] {
        self.cols
    }

    pub fn det(&self) -> f64 {
        self.cols[0][0] * self.cols[1][1] - self.cols[0][1] * self.cols[1][0]
    }

    /// Generation time, when the basis came from the flow.
    pub fn time(&self) -> Option<f64> {
        self.exact.as_ref().map(|f| f.t)
    }

    /// Generating number (as a double), when the basis came from the flow.
    pub fn alpha_value(&self) -> Option<f64> {
        self.exact.as_ref().map(|f| rat_to_f64(&f.alpha))
    }

    /// Coordinates of the integer combination `a * col0 + b * col1`.
    fn coords(&self, a: i128, b: i128) -> [f64; 2] {
        match &self.exact {
            Some(frame) => {
                let x = a as f64 / frame.t;
                let num = BigInt::from(b) * frame.alpha.denom() - BigInt::from(a) * frame.alpha.numer();
                let y = frame.t * rat_to_f64(&BigRational::new_raw(num, frame.alpha.denom().clone()));
                [x, y]
            }
            None => [
                a as f64 * self.cols[0][0] + b as f64 * self.cols[1][0],
                a as f64 * self.cols[0][1] + b as f64 * self.cols[1][1],
            ],
        }
    }
}

/// The lattice of the flow at time `t`, with columns `(1/t, -t*alpha)` and
/// `(0, t)`.
pub fn lattice_at(alpha: &ContinuedFraction, t: f64) -> Result<LatticeBasis> {
    let ra = resolve_alpha(alpha, t.max(1.0))?;
    basis_at(&ra, t)
}

pub(crate) fn basis_at(ra: &ResolvedAlpha, t: f64) -> Result<LatticeBasis> {
    if !t.is_finite() || t < 1.0 {
        return Err(Error::domain("time must be a finite value at least 1"));
    }
    let mut basis = LatticeBasis {
        cols: [[0.0; 2]; 2],
        exact: Some(ExactFrame { alpha: ra.value.clone(), t }),
    };
    basis.cols = [basis.coords(1, 0), basis.coords(0, 1)];
    Ok(basis)
}

/// First and second successive minima at one time, with the achieving
/// integer vectors in the `(q, p - q*alpha)` frame.
#[derive(Clone, Debug, Serialize)]
pub struct MinimaSample {
    pub t: Option<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub v1: (i64, i64),
    pub v2: (i64, i64),
}

fn e2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn canonical(a: i128, b: i128) -> (i128, i128) {
    if a < 0 || (a == 0 && b < 0) {
        (-a, -b)
    } else {
        (a, b)
    }
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    f: f64,
    a: i128,
    b: i128,
}

impl Candidate {
    fn key(&self) -> (f64, i128, i128, i128, i128) {
        (self.f, self.a.abs(), self.b.abs(), self.a, self.b)
    }
}

fn cand_better(x: &Candidate, y: &Candidate) -> bool {
    let (xf, xa, xb, xc, xd) = x.key();
    let (yf, ya, yb, yc, yd) = y.key();
    (xf, xa, xb, xc, xd) < (yf, ya, yb, yc, yd)
}

fn pair_mul(k: i128, v: (i128, i128)) -> Result<(i128, i128)> {
    let a = k.checked_mul(v.0);
    let b = k.checked_mul(v.1);
    match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::resource("integer coordinates overflowed during reduction")),
    }
}

fn pair_sub(u: (i128, i128), v: (i128, i128)) -> Result<(i128, i128)> {
    let a = u.0.checked_sub(v.0);
    let b = u.1.checked_sub(v.1);
    match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::resource("integer coordinates overflowed during reduction")),
    }
}

/// Lagrange–Gauss reduction in the Euclidean metric with exact integer
/// bookkeeping: the working pairs are updated in integers and their
/// coordinates recomputed from the basis each round.
fn gauss_reduce(basis: &LatticeBasis, u: &mut [(i128, i128); 2]) -> Result<()> {
    for _ in 0..200 {
        let c0 = basis.coords(u[0].0, u[0].1);
        let c1 = basis.coords(u[1].0, u[1].1);
        let n0 = c0[0] * c0[0] + c0[1] * c0[1];
        let n1 = c1[0] * c1[0] + c1[1] * c1[1];
        if n1 < n0 {
            u.swap(0, 1);
            continue;
        }
        if n0 == 0.0 {
            return Err(Error::internal("degenerate basis in reduction"));
        }
        let mu = (c0[0] * c1[0] + c0[1] * c1[1]) / n0;
        let k = mu.round();
        if k == 0.0 {
            return Ok(());
        }
        if !k.is_finite() || k.abs() >= 9e17 {
            return Err(Error::resource("reduction coefficient exceeds the integer range"));
        }
        u[1] = pair_sub(u[1], pair_mul(k as i128, u[0])?)?;
    }
    Err(Error::resource("basis reduction did not stabilize within 200 rounds"))
}

/// Successive minima of the lattice with respect to the `L_p` unit ball.
///
/// The basis is Gauss-reduced in the Euclidean metric, all integer
/// combinations inside the Euclidean ball of radius `sqrt(2)` times the
/// reduced upper bound for the second minimum are enumerated (one vector
/// per `±` pair), and the exact argmins are reported with a deterministic
/// tie-break.
pub fn successive_minima(p: f64, basis: &LatticeBasis) -> Result<MinimaSample> {
    geometry::norm_eval(p, [0.0, 0.0])?;
    successive_minima_inner(p, basis)
}

fn successive_minima_inner(p: f64, basis: &LatticeBasis) -> Result<MinimaSample> {
    let det = basis.det().abs();
    if det < 1e-12 {
        return Err(Error::domain("basis columns are linearly dependent"));
    }
    let mut u = [(1i128, 0i128), (0i128, 1i128)];
    gauss_reduce(basis, &mut u)?;
    let c0 = basis.coords(u[0].0, u[0].1);
    let c1 = basis.coords(u[1].0, u[1].1);
    let f0 = geometry::norm_unchecked(p, c0[0], c0[1]);
    let f1 = geometry::norm_unchecked(p, c1[0], c1[1]);

    let cap = f0.max(f1);
    let radius = SQRT2 * cap;
    let n0 = e2(c0);
    let j_bound = (radius * n0 / det).floor() + 1.0;
    let half_width = radius / n0 + 1.0;
    if j_bound * (2.0 * half_width + 1.0) > SKEW_SHORTCUT {
        // Extremely skew basis: the short reduced vector is the exact first
        // minimum by a wide margin and the long one serves as the scale of
        // the second; full enumeration would be pointless here.
        let (lo, hi) = if f0 <= f1 { (0, 1) } else { (1, 0) };
        return finish_sample(
            basis,
            Candidate { f: [f0, f1][lo], a: u[lo].0, b: u[lo].1 },
            Candidate { f: [f0, f1][hi], a: u[hi].0, b: u[hi].1 },
        );
    }

    let mu = (c0[0] * c1[0] + c0[1] * c1[1]) / (n0 * n0);
    let mut cands: Vec<Candidate> = Vec::with_capacity(64);
    let j_max = j_bound as i64;
    for j in 0..=j_max {
        let center = -(j as f64) * mu;
        let i_lo = (center - half_width).floor() as i64;
        let i_hi = (center + half_width).ceil() as i64;
        for i in i_lo..=i_hi {
            if j == 0 && i <= 0 {
                continue;
            }
            let a = i as i128 * u[0].0 + j as i128 * u[1].0;
            let b = i as i128 * u[0].1 + j as i128 * u[1].1;
            let c = basis.coords(a, b);
            if e2(c) > radius + 1e-9 {
                continue;
            }
            let f = geometry::norm_unchecked(p, c[0], c[1]);
            let (a, b) = canonical(a, b);
            cands.push(Candidate { f, a, b });
            if cands.len() > ENUM_BUDGET {
                return Err(Error::resource(format!(
                    "minima enumeration exceeded {ENUM_BUDGET} candidates (rows {j_max}, width {half_width:.1})"
                )));
            }
        }
    }

    let best = cands
        .iter()
        .copied()
        .reduce(|x, y| if cand_better(&y, &x) { y } else { x })
        .ok_or_else(|| Error::internal("empty minima enumeration"))?;
    let second = cands
        .iter()
        .copied()
        .filter(|c| c.a * best.b != c.b * best.a)
        .reduce(|x, y| if cand_better(&y, &x) { y } else { x })
        .ok_or_else(|| Error::internal("no independent vector inside the enumeration ball"))?;
    finish_sample(basis, best, second)
}

fn finish_sample(basis: &LatticeBasis, best: Candidate, second: Candidate) -> Result<MinimaSample> {
    let to64 = |v: i128| -> Result<i64> {
        i64::try_from(v).map_err(|_| Error::resource("achieving vector exceeds the reportable range"))
    };
    let (a1, b1) = canonical(best.a, best.b);
    let (a2, b2) = canonical(second.a, second.b);
    Ok(MinimaSample {
        t: basis.time(),
        lambda1: best.f,
        lambda2: second.f,
        v1: (to64(a1)?, to64(b1)?),
        v2: (to64(a2)?, to64(b2)?),
    })
}

/// One collision of the first two minima.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalTime {
    pub t: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Scan summary: the collision times, the first minimum at each, and the
/// tail statistics. `d_estimate` is the maximum of `lambda1` over the last
/// half of the collisions (a finite-horizon stand-in for the limsup),
/// reported alongside the maximum over all of them; `delta_estimate`
/// rescales its square by the critical determinant.
#[derive(Clone, Debug, Serialize)]
pub struct FlowEstimate {
    pub critical_times: Vec<f64>,
    pub values: Vec<f64>,
    pub crossings: usize,
    pub d_estimate: f64,
    pub d_estimate_global: f64,
    pub delta_estimate: f64,
    pub dirichlet_bound: f64,
    pub t_max: f64,
    pub rational_degenerate: bool,
}

/// One row of the scan trace.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub is_crossing: bool,
    pub locus_distance: Option<f64>,
}

/// Scan `[1, t_max]` and return the collision summary.
pub fn critical_times(alpha: &ContinuedFraction, p: f64, t_max: f64) -> Result<FlowEstimate> {
    run_flow(alpha, p, t_max, 1, false).map(|(est, _)| est)
}

/// As [`critical_times`], splitting the grid across worker threads. The
/// result is identical for every worker count.
pub fn critical_times_parallel(
    alpha: &ContinuedFraction,
    p: f64,
    t_max: f64,
    workers: usize,
) -> Result<FlowEstimate> {
    run_flow(alpha, p, t_max, workers, false).map(|(est, _)| est)
}

/// Scan and also return the full trace (grid samples and refined
/// collisions, ordered by time, with the catalog distance per row for
/// finite `p`).
pub fn flow_trace(
    alpha: &ContinuedFraction,
    p: f64,
    t_max: f64,
    workers: usize,
) -> Result<(FlowEstimate, Vec<TraceRow>)> {
    run_flow(alpha, p, t_max, workers, true)
}

struct ChunkOut {
    samples: Vec<(usize, MinimaSample)>,
    crossings: Vec<CriticalTime>,
    collapse_at: Option<usize>,
}

fn champion_at(ra: &ResolvedAlpha, p: f64, t: f64) -> Result<(i128, i128)> {
    let m = successive_minima_inner(p, &basis_at(ra, t)?)?;
    Ok((m.v1.0 as i128, m.v1.1 as i128))
}

fn bisect_crossing(
    ra: &ResolvedAlpha,
    p: f64,
    t_lo: f64,
    t_hi: f64,
    champ_lo: (i128, i128),
) -> Result<CriticalTime> {
    let (mut lo, mut hi) = (t_lo, t_hi);
    while hi - lo > BISECT_REL * lo {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if champion_at(ra, p, mid)? == champ_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = (lo * hi).sqrt();
    let m = successive_minima_inner(p, &basis_at(ra, t)?)?;
    Ok(CriticalTime { t, lambda1: m.lambda1, lambda2: m.lambda2 })
}

fn run_flow(
    alpha: &ContinuedFraction,
    p: f64,
    t_max: f64,
    workers: usize,
    want_trace: bool,
) -> Result<(FlowEstimate, Vec<TraceRow>)> {
    geometry::norm_eval(p, [0.0, 0.0])?;
    if !t_max.is_finite() || t_max < 4.0 {
        return Err(Error::domain("the scan horizon t_max must be a finite value at least 4"));
    }
    let ra = resolve_alpha(alpha, t_max)?;
    let delta = geometry::critical_determinant(p)?;
    let bound = 1.0 / delta.sqrt();
    let refs = if want_trace && p.is_finite() {
        Some(locus_references(p)?)
    } else {
        None
    };

    let k_max = (t_max.ln() / GRID_RATIO.ln()).ceil() as usize;
    let grid_t = |k: usize| -> f64 {
        if k >= k_max {
            t_max
        } else {
            GRID_RATIO.powi(k as i32)
        }
    };

    // Rational inputs collapse; scan them on one worker so the stop point
    // is found in order.
    let workers = if ra.rational { 1 } else { workers.max(1).min(64).min(k_max + 1) };
    let mut starts: Vec<usize> = (0..workers).map(|w| w * k_max / workers).collect();
    starts.push(k_max);

    let scan_chunk = |s: usize, e: usize, last: bool| -> Result<ChunkOut> {
        let mut out = ChunkOut { samples: Vec::new(), crossings: Vec::new(), collapse_at: None };
        let mut prev: Option<(usize, (i128, i128))> = None;
        for k in s..=e {
            let t = grid_t(k);
            let m = successive_minima_inner(p, &basis_at(&ra, t)?)?;
            let champ = (m.v1.0 as i128, m.v1.1 as i128);
            if let Some((pk, pc)) = prev {
                if pc != champ {
                    out.crossings.push(bisect_crossing(&ra, p, grid_t(pk), t, pc)?);
                }
            }
            let owner = k < e || last;
            let collapsed = ra.rational && m.lambda1 < DEGENERATE_LAMBDA;
            if owner {
                out.samples.push((k, m));
            }
            if collapsed {
                out.collapse_at = Some(k);
                break;
            }
            prev = Some((k, champ));
        }
        Ok(out)
    };

    let chunk_results: Vec<Result<ChunkOut>> = if workers == 1 {
        vec![scan_chunk(0, k_max, true)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let (s, e) = (starts[w], starts[w + 1]);
                    let scan = &scan_chunk;
                    let last = w == workers - 1;
                    scope.spawn(move || scan(s, e.min(k_max), last))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("scan worker panicked")).collect()
        })
    };

    let mut samples: Vec<(usize, MinimaSample)> = Vec::new();
    let mut crossings: Vec<CriticalTime> = Vec::new();
    let mut collapse_at: Option<usize> = None;
    for r in chunk_results {
        let c = r?;
        samples.extend(c.samples);
        crossings.extend(c.crossings);
        if let Some(k) = c.collapse_at {
            collapse_at = Some(collapse_at.map_or(k, |old: usize| old.min(k)));
        }
    }
    samples.sort_by(|a, b| a.0.cmp(&b.0));
    crossings.sort_by(|a, b| a.t.partial_cmp(&b.t).expect("finite times"));
    if let Some(k) = collapse_at {
        let t_stop = grid_t(k);
        samples.retain(|(kk, _)| *kk <= k);
        crossings.retain(|c| c.t <= t_stop);
    }

    let (d_estimate, d_global) = if ra.rational {
        (0.0, 0.0)
    } else {
        if crossings.len() < 4 {
            return Err(Error::horizon(format!(
                "only {} collisions of the first two minima were found up to {t_max}; at least 4 are needed",
                crossings.len()
            )));
        }
        let tail = &crossings[crossings.len() / 2..];
        let max_of = |cs: &[CriticalTime]| cs.iter().map(|c| c.lambda1).fold(f64::NEG_INFINITY, f64::max);
        (max_of(tail), max_of(&crossings))
    };

    let trace = if want_trace {
        let mut rows: Vec<TraceRow> = Vec::with_capacity(samples.len() + crossings.len());
        let locus_of = |t: f64| -> Result<Option<f64>> {
            match &refs {
                Some(r) => {
                    let basis = basis_at(&ra, t)?;
                    Ok(Some(locus_distance_to(&basis, r)))
                }
                None => Ok(None),
            }
        };
        for (_, m) in &samples {
            let t = m.t.expect("flow samples carry their time");
            rows.push(TraceRow {
                t,
                lambda1: m.lambda1,
                lambda2: m.lambda2,
                is_crossing: false,
                locus_distance: locus_of(t)?,
            });
        }
        for c in &crossings {
            rows.push(TraceRow {
                t: c.t,
                lambda1: c.lambda1,
                lambda2: c.lambda2,
                is_crossing: true,
                locus_distance: locus_of(c.t)?,
            });
        }
        rows.sort_by(|a, b| a.t.partial_cmp(&b.t).expect("finite times"));
        rows
    } else {
        Vec::new()
    };

    let estimate = FlowEstimate {
        critical_times: crossings.iter().map(|c| c.t).collect(),
        values: crossings.iter().map(|c| c.lambda1).collect(),
        crossings: crossings.len(),
        d_estimate,
        d_estimate_global: d_global,
        delta_estimate: delta * d_estimate * d_estimate,
        dirichlet_bound: bound,
        t_max,
        rational_degenerate: ra.rational,
    };
    Ok((estimate, trace))
}

/// The lattice point of one convergent: `(q_nu, p_nu - q_nu * alpha)`.
#[derive(Clone, Debug)]
pub struct BestApproxPoint {
    pub nu: usize,
    pub q: BigInt,
    pub p: BigInt,
    /// Signed second coordinate.
    pub second: f64,
}

impl Serialize for BestApproxPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("BestApproxPoint", 4)?;
        s.serialize_field("nu", &self.nu)?;
        s.serialize_field("q", &self.q.to_string())?;
        s.serialize_field("p", &self.p.to_string())?;
        s.serialize_field("second", &self.second)?;
        s.end()
    }
}

/// The convergent points `z_1 .. z_n` in the time-1 frame.
pub fn best_approx_points(alpha: &ContinuedFraction, n: usize) -> Result<Vec<BestApproxPoint>> {
    if n < 1 {
        return Err(Error::domain("at least one point must be requested"));
    }
    let convs = alpha.convergents(n);
    if convs.len() < n + 1 {
        return Err(Error::horizon(format!(
            "the expansion ends after {} convergents; {} were requested",
            convs.len().saturating_sub(1),
            n
        )));
    }
    let q_top = rat_to_f64(&BigRational::from_integer(convs[n].q.clone()));
    let ra = resolve_alpha(alpha, q_top.max(1.0))?;
    let mut out = Vec::with_capacity(n);
    for c in convs.iter().skip(1) {
        let second = rat_to_f64(
            &(BigRational::from_integer(c.p.clone()) - BigRational::from_integer(c.q.clone()) * &ra.value),
        );
        out.push(BestApproxPoint { nu: c.index, q: c.q.clone(), p: c.p.clone(), second });
    }
    Ok(out)
}

/// Whether the closed rectangle `[0, x''] x [-|y'|, |y'|]` holds no lattice
/// point of the time-1 lattice besides the origin and the two given points.
///
/// Points are named by their integer pairs `(q, p)`. The rectangle is
/// closed: a foreign point exactly on the boundary counts as a violation;
/// the mirror images `-z'`, `-z''` are outside the half-strip `x >= 0` and
/// are not consulted.
pub fn rectangle_empty_check(
    alpha: &ContinuedFraction,
    z1: (i64, i64),
    z2: (i64, i64),
) -> Result<bool> {
    let (q1, p1) = z1;
    let (q2, p2) = z2;
    if !(0 < q1 && q1 < q2) {
        return Err(Error::domain("the x-coordinates must satisfy 0 < x' < x''"));
    }
    if q2 > 10_000_000 {
        return Err(Error::resource("rectangle scan is limited to x'' at most 10^7"));
    }
    let ra = resolve_alpha(alpha, q2 as f64)?;
    let a = &ra.value;
    let y_of = |q: i64, p: i64| BigRational::from_integer(BigInt::from(p)) - a * BigRational::from_integer(BigInt::from(q));
    let y1 = y_of(q1, p1).abs();
    let y2 = y_of(q2, p2).abs();
    if y2 >= y1 {
        return Err(Error::domain("the taller point must come first: |y''| < |y'| is required"));
    }
    let z1 = (BigInt::from(q1), BigInt::from(p1));
    let z2 = (BigInt::from(q2), BigInt::from(p2));
    let mut budget = 10_000_000i64;
    for q in 0..=q2 {
        let q_big = BigInt::from(q);
        let center = a * BigRational::from_integer(q_big.clone());
        let lo = (&center - &y1).ceil().to_integer();
        let hi = (&center + &y1).floor().to_integer();
        let mut p = lo;
        while p <= hi {
            budget -= 1;
            if budget <= 0 {
                return Err(Error::resource("rectangle scan exceeded its point budget"));
            }
            let is_named = (q == 0 && p.is_zero())
                || (q_big == z1.0 && p == z1.1)
                || (q_big == z2.0 && p == z2.1);
            if !is_named {
                return Ok(false);
            }
            p += 1;
        }
    }
    Ok(true)
}

type Mat = [[f64; 2]; 2];

fn vdot(u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

fn reduce_cols(m: Mat) -> Mat {
    let (mut a, mut b) = (m[0], m[1]);
    for _ in 0..64 {
        if e2(b) < e2(a) {
            std::mem::swap(&mut a, &mut b);
        }
        let k = (vdot(a, b) / vdot(a, a)).round();
        if k == 0.0 || !k.is_finite() {
            break;
        }
        b = [b[0] - k * a[0], b[1] - k * a[1]];
    }
    [a, b]
}

fn canon_vec(v: [f64; 2]) -> [f64; 2] {
    if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
        [-v[0], -v[1]]
    } else {
        v
    }
}

/// Representative matrices of the lattice spanned by `m`: the reduced
/// columns together with their difference and sum, sign-normalized, in
/// both column orders, filtered back to bases of the same lattice. Ties in
/// the reduced basis (several shortest vectors) are covered this way.
fn rep_mats(m: Mat) -> Vec<Mat> {
    let r = reduce_cols(m);
    let det = (r[0][0] * r[1][1] - r[0][1] * r[1][0]).abs();
    let len_cap = e2(r[0]).max(e2(r[1])) + 1e-9;
    let vs = [
        canon_vec(r[0]),
        canon_vec(r[1]),
        canon_vec([r[0][0] - r[1][0], r[0][1] - r[1][1]]),
        canon_vec([r[0][0] + r[1][0], r[0][1] + r[1][1]]),
    ];
    let mut out = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let (u, v) = (vs[i], vs[j]);
            if e2(u) > len_cap || e2(v) > len_cap {
                continue;
            }
            let d = (u[0] * v[1] - u[1] * v[0]).abs();
            if (d - det).abs() > 1e-6 * det.max(1.0) {
                continue;
            }
            out.push([u, v]);
        }
    }
    out
}

/// Reference matrices of the catalog at `p`, rescaled to determinant one.
pub(crate) fn locus_references(p: f64) -> Result<Vec<Mat>> {
    let delta = geometry::critical_determinant(p)?;
    let scale = 1.0 / delta.sqrt();
    let mut out = Vec::new();
    for entry in geometry::catalog(p)? {
        for lat in entry.sample(100) {
            let m: Mat = [
                [lat.omega[0][0] * scale, lat.omega[1][0] * scale],
                [lat.omega[0][1] * scale, lat.omega[1][1] * scale],
            ];
            out.extend(rep_mats(m));
        }
    }
    Ok(out)
}

fn locus_distance_to(basis: &LatticeBasis, refs: &[Mat]) -> f64 {
    let mine = rep_mats(basis.columns());
    let mut best = f64::INFINITY;
    for a in &mine {
        for b in refs {
            let mut d = 0.0f64;
            for (ca, cb) in a.iter().zip(b.iter()) {
                d = d.max((ca[0] - cb[0]).abs()).max((ca[1] - cb[1]).abs());
            }
            best = best.min(d);
        }
    }
    best
}

/// Entrywise distance from the (reduced, symmetry-normalized) basis to the
/// nearest member of the determinant-one catalog at `p`. Zero, up to the
/// searched symmetries and the parameter grids, exactly on the catalog.
pub fn locus_distance(basis: &LatticeBasis, p: f64) -> Result<f64> {
    let refs = locus_references(p)?;
    Ok(locus_distance_to(basis, &refs))
}
