//! Digit-pattern classification of Dirichlet improvability.
//!
//! Each norm parameter `p` selects a family of critical digit patterns; a
//! number fails to improve the Dirichlet bound at `p` exactly when its
//! expansion realizes those patterns "in the limit" (growing flanks, growing
//! palindromic extents, or window products converging to 3, depending on the
//! regime). For quadratic irrationals and for Euler's number the question is
//! decidable; for a raw digit prefix the scanner reports evidence.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::cf::ContinuedFraction;
use crate::error::{Error, Result};
use crate::geometry::{self, SigmaDigits};
use crate::real::Real;

/// Snap tolerance when placing `p` against the regime boundaries 1, 2, p0.
const SNAP: f64 = 1e-9;

/// A record chain counts as growth evidence only once its last value reaches
/// this threshold.
pub const R_MIN: u64 = 5;

/// Window products within this distance of 3 count towards the central
/// product route at `p = 2`.
pub const CP_RESIDUAL_TOL: f64 = 0.05;

/// Minimum number of tail digits a window side must consume before its
/// product is trusted.
const CP_MIN_DEPTH: usize = 8;

/// Backward-evaluation depth cap for window tails; beyond ~44 digits the
/// value is stable to f64 precision anyway.
const CP_MAX_DEPTH: usize = 44;

/// Default scan horizon used by [`classify_e`].
pub const DEFAULT_HORIZON: usize = 200;

/// Where `p` falls relative to the structural boundaries 1, 2, p0, infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RegimeTag {
    #[serde(rename = "P_EQ_1")]
    PEq1,
    #[serde(rename = "OPEN_1_2")]
    Open12,
    #[serde(rename = "P_EQ_2")]
    PEq2,
    #[serde(rename = "OPEN_2_P0")]
    Open2P0,
    #[serde(rename = "P_EQ_P0")]
    PEqP0,
    #[serde(rename = "ABOVE_P0")]
    AboveP0,
    #[serde(rename = "P_EQ_INF")]
    PEqInf,
}

/// A norm regime: the boundary tag plus, where the critical patterns depend
/// on it, the digit expansion of the slope constant `sigma_p`.
#[derive(Clone, Debug, Serialize)]
pub struct Regime {
    pub tag: RegimeTag,
    /// Present when the pattern grammar reads digits of `sigma_p`
    /// (`OPEN_1_2`, `ABOVE_P0`, and the boundary `P_EQ_P0`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaDigits>,
}

/// A critical digit pattern the scanner can look for.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum PatternSpec {
    /// A fixed core word that must recur with both flanking digits growing.
    #[serde(rename = "FLANKED_FIXED")]
    FlankedFixed { core: Vec<u64> },
    /// Palindromes `s_nu .. s_1, 1, s_1 .. s_nu` around a central 1, read
    /// against the digits of `sigma_p`, with growing extent `nu`.
    #[serde(rename = "PALINDROMIC_GROWING")]
    PalindromicGrowing {
        sigma_digits: Vec<u64>,
        /// Extents beyond this many digits of `sigma_p` are not trusted.
        reliable_len: usize,
    },
    /// Windows around a central 1 whose left/right tail values multiply to 3.
    #[serde(rename = "CENTRAL_PRODUCT")]
    CentralProduct { tolerance: f64 },
    /// Blocks `b_nu .. b_1, 1, 1, b_1' .. b_nu'` that agree except for a
    /// mandatory `+1` on exactly one innermost flank.
    #[serde(rename = "ALMOST_SYMMETRIC")]
    AlmostSymmetric,
    /// Digit values themselves growing without bound.
    #[serde(rename = "UNBOUNDED_DIGITS")]
    UnboundedDigits,
}

impl PatternSpec {
    pub fn label(&self) -> &'static str {
        match self {
            PatternSpec::FlankedFixed { .. } => "FLANKED_FIXED",
            PatternSpec::PalindromicGrowing { .. } => "PALINDROMIC_GROWING",
            PatternSpec::CentralProduct { .. } => "CENTRAL_PRODUCT",
            PatternSpec::AlmostSymmetric => "ALMOST_SYMMETRIC",
            PatternSpec::UnboundedDigits => "UNBOUNDED_DIGITS",
        }
    }
}

/// One window around a central digit 1, for the product-of-tails route.
#[derive(Clone, Debug, Serialize)]
pub struct CentralWindow {
    /// 1-indexed position of the central 1.
    pub position: usize,
    /// Tail digits consumed on the shorter side.
    pub depth: usize,
    /// Value of the right tail, shifted down by one.
    pub beta: f64,
    /// Value of the left tail (read backwards), shifted down by one.
    pub beta_star: f64,
    /// `|beta * beta_star - 3|`.
    pub residual: f64,
}

/// Scan statistics for a single pattern over a digit prefix.
#[derive(Clone, Debug)]
pub struct PatternReport {
    pub pattern: PatternSpec,
    /// 1-indexed positions of every occurrence.
    pub positions: Vec<usize>,
    /// Successive record values `(position, value)`; what "value" measures
    /// depends on the pattern (flank minimum, palindromic extent, digit).
    pub records: Vec<(usize, u64)>,
    /// Largest palindromic or almost-symmetric extent seen, when applicable.
    pub max_extent: Option<usize>,
    /// Extent cap imposed by the reliable digits of `sigma_p`.
    pub extent_cap: Option<usize>,
    /// Product windows, for the central-product pattern.
    pub windows: Vec<CentralWindow>,
}

impl PatternReport {
    fn empty(pattern: PatternSpec) -> Self {
        PatternReport {
            pattern,
            positions: Vec::new(),
            records: Vec::new(),
            max_extent: None,
            extent_cap: None,
            windows: Vec::new(),
        }
    }
}

/// The result of scanning a digit prefix for a set of patterns.
#[derive(Clone, Debug)]
pub struct ScanReport {
    pub horizon: usize,
    pub reports: Vec<PatternReport>,
}

/// Classification outcome. `Decided*` statuses are backed by exact
/// structure (rationality, periodicity, or the explicit expansion of Euler's
/// number); `Evidence*` statuses summarize a finite scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "DECIDED_IMPROVABLE")]
    DecidedImprovable,
    #[serde(rename = "DECIDED_NON_IMPROVABLE")]
    DecidedNonImprovable,
    #[serde(rename = "EVIDENCE_IMPROVABLE")]
    EvidenceImprovable,
    #[serde(rename = "EVIDENCE_NON_IMPROVABLE")]
    EvidenceNonImprovable,
}

impl Status {
    /// Whether the status points at improvability (decided or evidenced).
    pub fn improvable(&self) -> bool {
        matches!(self, Status::DecidedImprovable | Status::EvidenceImprovable)
    }

    /// Whether the status is exact rather than scan evidence.
    pub fn decided(&self) -> bool {
        matches!(
            self,
            Status::DecidedImprovable | Status::DecidedNonImprovable
        )
    }
}

/// A classification verdict: status, a one-line reason, the regime, and the
/// scan report that informed (or illustrates) the answer.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub status: Status,
    pub justification: String,
    pub regime: Regime,
    pub report: ScanReport,
}

struct ReportView<'a> {
    rep: &'a PatternReport,
}

impl Serialize for ReportView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let r = self.rep;
        let mut st = s.serialize_struct("record", 6)?;
        st.serialize_field("pattern", r.pattern.label())?;
        st.serialize_field("positions", &r.positions)?;
        st.serialize_field("records", &r.records)?;
        if let Some(m) = r.max_extent {
            st.serialize_field("max_extent", &m)?;
        } else {
            st.skip_field("max_extent")?;
        }
        if let Some(c) = r.extent_cap {
            st.serialize_field("extent_cap", &c)?;
        } else {
            st.skip_field("extent_cap")?;
        }
        if r.windows.is_empty() {
            st.skip_field("windows")?;
        } else {
            st.serialize_field("windows", &r.windows)?;
        }
        st.end()
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Verdict", 6)?;
        st.serialize_field("status", &self.status)?;
        st.serialize_field("justification", &self.justification)?;
        st.serialize_field("regime", &self.regime)?;
        let patterns: Vec<&PatternSpec> = self.report.reports.iter().map(|r| &r.pattern).collect();
        st.serialize_field("patterns", &patterns)?;
        let records: Vec<ReportView<'_>> =
            self.report.reports.iter().map(|rep| ReportView { rep }).collect();
        st.serialize_field("records", &records)?;
        st.serialize_field("horizon", &self.report.horizon)?;
        st.end()
    }
}

/// Place `p` in its regime, attaching the expansion of `sigma_p` where the
/// pattern grammar needs it. Values within 1e-9 of a boundary snap onto it.
pub fn regime_of(p: f64) -> Result<Regime> {
    if p.is_nan() || p < 1.0 - SNAP {
        return Err(Error::domain(format!(
            "norm parameter must satisfy p >= 1, got {p}"
        )));
    }
    if p.is_infinite() {
        return Ok(Regime {
            tag: RegimeTag::PEqInf,
            sigma: None,
        });
    }
    let p0 = geometry::p_zero(1e-12)?;
    let tag = if (p - 1.0).abs() <= SNAP {
        RegimeTag::PEq1
    } else if (p - 2.0).abs() <= SNAP {
        RegimeTag::PEq2
    } else if (p - p0).abs() <= SNAP {
        RegimeTag::PEqP0
    } else if p < 2.0 {
        RegimeTag::Open12
    } else if p < p0 {
        RegimeTag::Open2P0
    } else {
        RegimeTag::AboveP0
    };
    let sigma = match tag {
        RegimeTag::Open12 | RegimeTag::AboveP0 | RegimeTag::PEqP0 => {
            Some(geometry::sigma_digits(p, 48)?)
        }
        _ => None,
    };
    Ok(Regime { tag, sigma })
}

/// Rewrite a terminating expansion word into its canonical form with last
/// digit at least 2 (`..., a, 1` and `..., a+1` denote the same number).
fn canonical_word(word: &[u64]) -> Vec<u64> {
    let mut w = word.to_vec();
    if w.len() >= 2 && *w.last().unwrap() == 1 {
        w.pop();
        *w.last_mut().unwrap() += 1;
    }
    w
}

/// The four fixed cores generated by a terminating `sigma_p` word: the word
/// run backwards, a central 1, then the word forwards, with each end
/// optionally rewritten through the two-representation identity.
fn terminating_sigma_cores(word: &[u64]) -> Vec<PatternSpec> {
    let s = canonical_word(word);
    let k = s.len();
    if k == 0 {
        return Vec::new();
    }
    let rev: Vec<u64> = s.iter().rev().copied().collect();
    let sk = s[k - 1];
    let mut cores: Vec<Vec<u64>> = Vec::new();
    let plain = |head: &[u64], tail: &[u64]| {
        let mut c = head.to_vec();
        c.push(1);
        c.extend_from_slice(tail);
        c
    };
    cores.push(plain(&rev, &s));
    if sk >= 2 {
        let mut head_alt = vec![1, sk - 1];
        head_alt.extend_from_slice(&rev[1..]);
        let mut tail_alt = s[..k - 1].to_vec();
        tail_alt.extend_from_slice(&[sk - 1, 1]);
        cores.push(plain(&head_alt, &s));
        cores.push(plain(&rev, &tail_alt));
        cores.push(plain(&head_alt, &tail_alt));
    }
    cores
        .into_iter()
        .map(|core| PatternSpec::FlankedFixed { core })
        .collect()
}

fn sigma_pattern_set(sigma: &SigmaDigits) -> Vec<PatternSpec> {
    if let Some(r) = &sigma.rational {
        let num = r.numer().clone();
        let den = r.denom().clone();
        if let Ok(cf) = ContinuedFraction::from_rational(&num, &den) {
            let depth = cf.depth().unwrap_or(0);
            let word = cf.digits_clamped(depth);
            return terminating_sigma_cores(&word);
        }
    }
    vec![PatternSpec::PalindromicGrowing {
        sigma_digits: sigma.digits.clone(),
        reliable_len: sigma.reliable_len.min(sigma.digits.len()),
    }]
}

/// The critical pattern set of a regime.
pub fn patterns_for(regime: &Regime) -> Vec<PatternSpec> {
    let ff = |core: &[u64]| PatternSpec::FlankedFixed {
        core: core.to_vec(),
    };
    match regime.tag {
        RegimeTag::PEq1 => vec![ff(&[1, 1]), ff(&[2]), PatternSpec::AlmostSymmetric],
        RegimeTag::Open12 | RegimeTag::AboveP0 => match &regime.sigma {
            Some(s) => sigma_pattern_set(s),
            None => Vec::new(),
        },
        RegimeTag::PEq2 => vec![
            ff(&[1, 1]),
            ff(&[2]),
            PatternSpec::CentralProduct {
                tolerance: CP_RESIDUAL_TOL,
            },
        ],
        RegimeTag::Open2P0 => vec![ff(&[1, 1]), ff(&[2])],
        RegimeTag::PEqP0 => {
            // On the boundary both grammars apply: the growing-flank pair
            // from just below and the sigma-driven set from just above.
            let mut v = vec![ff(&[1, 1]), ff(&[2])];
            if let Some(s) = &regime.sigma {
                v.extend(sigma_pattern_set(s));
            }
            v
        }
        RegimeTag::PEqInf => vec![PatternSpec::UnboundedDigits],
    }
}

fn push_record(records: &mut Vec<(usize, u64)>, pos: usize, val: u64) {
    if records.last().map_or(true, |&(_, v)| val > v) {
        records.push((pos, val));
    }
}

fn scan_flanked(d: &[u64], core: &[u64], spec: PatternSpec) -> PatternReport {
    let mut rep = PatternReport::empty(spec);
    let n = d.len();
    let m = core.len();
    if m == 0 || n < m + 2 {
        return rep;
    }
    // Core occupies positions j .. j+m-1 (1-indexed); both flanks must exist.
    for j in 2..=(n - m) {
        if &d[j - 1..j - 1 + m] == core {
            let x = d[j - 2];
            let y = d[j - 1 + m];
            rep.positions.push(j);
            push_record(&mut rep.records, j, x.min(y));
        }
    }
    rep
}

fn scan_palindromic(d: &[u64], s: &[u64], cap: usize, spec: PatternSpec) -> PatternReport {
    let mut rep = PatternReport::empty(spec);
    rep.extent_cap = Some(cap);
    let n = d.len();
    let mut max_extent = 0usize;
    for m in 2..n {
        if d[m - 1] != 1 {
            continue;
        }
        let mut nu = 0usize;
        while nu < cap {
            let j = nu + 1;
            if j >= m || m + j > n || j > s.len() {
                break;
            }
            if d[m - j - 1] != s[j - 1] || d[m + j - 1] != s[j - 1] {
                break;
            }
            nu = j;
        }
        if nu >= 1 {
            rep.positions.push(m);
            push_record(&mut rep.records, m, nu as u64);
            max_extent = max_extent.max(nu);
        }
    }
    if max_extent > 0 {
        rep.max_extent = Some(max_extent);
    }
    rep
}

/// Backward evaluation of `[d0 - 1; d1, d2, ...]` truncated at `CP_MAX_DEPTH`
/// tail digits. Returns the value and how many tail digits were consumed.
fn tail_value(first: u64, rest: &mut dyn Iterator<Item = u64>) -> (f64, usize) {
    let digits: Vec<u64> = rest.take(CP_MAX_DEPTH).collect();
    let mut v = f64::INFINITY;
    for &a in digits.iter().rev() {
        v = a as f64 + 1.0 / v;
    }
    let head = first as f64 - 1.0;
    (head + 1.0 / v, digits.len())
}

fn scan_central_product(d: &[u64], spec: PatternSpec) -> PatternReport {
    let mut rep = PatternReport::empty(spec);
    let n = d.len();
    for m in 2..n {
        if d[m - 1] != 1 {
            continue;
        }
        let (beta, depth_r) = tail_value(d[m], &mut d[m + 1..].iter().copied());
        let (beta_star, depth_l) = tail_value(d[m - 2], &mut d[..m - 2].iter().rev().copied());
        if !beta.is_finite() || !beta_star.is_finite() || beta <= 0.0 || beta_star <= 0.0 {
            continue;
        }
        let residual = (beta * beta_star - 3.0).abs();
        let depth = depth_r.min(depth_l);
        rep.positions.push(m);
        rep.windows.push(CentralWindow {
            position: m,
            depth,
            beta,
            beta_star,
            residual,
        });
    }
    rep
}

fn scan_almost_symmetric(d: &[u64], spec: PatternSpec) -> PatternReport {
    let mut rep = PatternReport::empty(spec);
    let n = d.len();
    let mut max_extent = 0usize;
    // Record chains are grouped by (variant, matched block): the growth that
    // matters is of the flanks around one recurring block.
    let mut groups: BTreeMap<(u8, Vec<u64>), Vec<(usize, u64)>> = BTreeMap::new();
    for m in 2..n.saturating_sub(1) {
        // Central pair at (m, m+1), innermost flanks at m-1 and m+2.
        if d[m - 1] != 1 || d[m] != 1 {
            continue;
        }
        let l1 = d[m - 2];
        let r1 = d[m + 1];
        let variant = if r1 == l1 + 1 {
            1u8
        } else if l1 == r1 + 1 {
            2u8
        } else {
            continue;
        };
        let mut core = vec![l1.min(r1)];
        let mut nu = 1usize;
        loop {
            let j = nu + 1;
            if j >= m || m + 1 + j > n {
                break;
            }
            if d[m - j - 1] != d[m + j] {
                break;
            }
            core.push(d[m - j - 1]);
            nu = j;
        }
        rep.positions.push(m);
        max_extent = max_extent.max(nu);
        if nu + 1 < m && m + 2 + nu <= n {
            let flank = d[m - nu - 2].min(d[m + 1 + nu]);
            push_record(groups.entry((variant, core)).or_default(), m, flank);
        }
    }
    if max_extent > 0 {
        rep.max_extent = Some(max_extent);
    }
    // Report the dominant family: the longest record chain, ties broken by
    // the larger final value.
    rep.records = groups
        .into_values()
        .max_by_key(|chain| (chain.len(), chain.last().map(|&(_, v)| v)))
        .unwrap_or_default();
    rep
}

fn scan_unbounded(d: &[u64], spec: PatternSpec) -> PatternReport {
    let mut rep = PatternReport::empty(spec);
    for (i, &a) in d.iter().enumerate() {
        if rep.records.last().map_or(true, |&(_, v)| a > v) {
            rep.records.push((i + 1, a));
            rep.positions.push(i + 1);
        }
    }
    rep
}

pub(crate) fn scan_digits(
    digits: &[u64],
    specs: &[PatternSpec],
    horizon: usize,
) -> Result<ScanReport> {
    if horizon < 10 {
        return Err(Error::domain(format!(
            "scan horizon must be at least 10 digits, got {horizon}"
        )));
    }
    if digits.len() < horizon {
        return Err(Error::horizon(format!(
            "only {} digits available for a scan horizon of {horizon}",
            digits.len()
        )));
    }
    let d = &digits[..horizon];
    let reports = specs
        .iter()
        .map(|spec| match spec {
            PatternSpec::FlankedFixed { core } => scan_flanked(d, core, spec.clone()),
            PatternSpec::PalindromicGrowing {
                sigma_digits,
                reliable_len,
            } => scan_palindromic(d, sigma_digits, *reliable_len, spec.clone()),
            PatternSpec::CentralProduct { .. } => scan_central_product(d, spec.clone()),
            PatternSpec::AlmostSymmetric => scan_almost_symmetric(d, spec.clone()),
            PatternSpec::UnboundedDigits => scan_unbounded(d, spec.clone()),
        })
        .collect();
    Ok(ScanReport { horizon, reports })
}

/// Scan the first `horizon` digits of an expansion for the given patterns.
///
/// Errors if the horizon is under 10 or the expansion terminates before it.
pub fn scan(x: &ContinuedFraction, specs: &[PatternSpec], horizon: usize) -> Result<ScanReport> {
    let digits = x
        .digits_prefix(horizon)
        .map_err(|_| Error::horizon(format!("the expansion has fewer than {horizon} digits")))?;
    scan_digits(&digits, specs, horizon)
}

/// Whether a single pattern report carries non-improvability evidence: at
/// least three successive records, the last one substantial and still fresh
/// near the end of the horizon (for window products: at least three deep
/// windows within tolerance, the last in the second half).
fn report_fires(rep: &PatternReport, horizon: usize) -> bool {
    match &rep.pattern {
        PatternSpec::CentralProduct { tolerance } => {
            let good: Vec<&CentralWindow> = rep
                .windows
                .iter()
                .filter(|w| w.depth >= CP_MIN_DEPTH && w.residual <= *tolerance)
                .collect();
            good.len() >= 3 && good.last().map_or(false, |w| w.position * 2 >= horizon)
        }
        _ => {
            // Doubling-gap recurrences put their latest firing near half the
            // horizon, so "recent" means the second half, not the last quarter.
            rep.records.len() >= 3
                && rep.records.last().map_or(false, |&(pos, val)| {
                    val >= R_MIN && pos * 2 >= horizon
                })
        }
    }
}

fn fired_labels(report: &ScanReport) -> Vec<&'static str> {
    report
        .reports
        .iter()
        .filter(|r| report_fires(r, report.horizon))
        .map(|r| r.pattern.label())
        .collect()
}

/// Classify a raw digit prefix at norm parameter `p`. The verdict is always
/// an `Evidence*` status: a finite prefix cannot decide a limit property.
pub fn classify_digits(digits: &[u64], p: f64, horizon: usize) -> Result<Verdict> {
    let regime = regime_of(p)?;
    let specs = patterns_for(&regime);
    let report = scan_digits(digits, &specs, horizon)?;
    let fired = fired_labels(&report);
    let (status, justification) = if fired.is_empty() {
        (
            Status::EvidenceImprovable,
            "no critical pattern shows sustained growth over the horizon".to_string(),
        )
    } else {
        (
            Status::EvidenceNonImprovable,
            format!("sustained growth in: {}", fired.join(", ")),
        )
    };
    Ok(Verdict {
        status,
        justification,
        regime,
        report,
    })
}

/// 2x2 integer matrix product of `[[a_i, 1], [1, 0]]` over a digit word.
fn word_matrix(word: &[u64]) -> [BigInt; 4] {
    let mut m = [
        BigInt::from(1),
        BigInt::from(0),
        BigInt::from(0),
        BigInt::from(1),
    ];
    for &a in word {
        let a = BigInt::from(a);
        let (m0, m1, m2, m3) = (m[0].clone(), m[1].clone(), m[2].clone(), m[3].clone());
        m = [&m0 * &a + &m1, m0, &m2 * &a + &m3, m2];
    }
    m
}

/// Integer polynomial `c2 x^2 + c1 x + c0` (as `[c2, c1, c0]`) satisfied by
/// `T - 1`, where `T` is the purely periodic value with the given period.
fn shifted_period_poly(word: &[u64]) -> [BigInt; 3] {
    let [a, b, c, d] = word_matrix(word);
    // T = (aT + b)/(cT + d)  =>  c T^2 + (d - a) T - b = 0; substitute T = x+1.
    let c1 = &c + &c + &d - &a;
    let c0 = &c + &d - &a - &b;
    [c, c1, c0]
}

fn primitive_poly(mut poly: [BigInt; 3]) -> [BigInt; 3] {
    let mut g = BigInt::zero();
    for c in &poly {
        g = g.gcd(c);
    }
    if !g.is_zero() {
        for c in &mut poly {
            *c = &*c / &g;
        }
    }
    let lead = poly.iter().find(|c| !c.is_zero());
    if lead.map_or(false, |c| c.is_negative()) {
        for c in &mut poly {
            *c = -&*c;
        }
    }
    poly
}

/// Exact check, over one period, for a central 1 whose two infinite tails
/// multiply to 3. Both tails are purely periodic quadratics, so the product
/// condition reduces to comparing primitive integer polynomials.
fn periodic_product_hit(w: &[u64]) -> Option<usize> {
    let pp = w.len();
    for r in 0..pp {
        if w[r] != 1 {
            continue;
        }
        let right: Vec<u64> = (1..=pp).map(|j| w[(r + j) % pp]).collect();
        let left: Vec<u64> = (1..=pp).map(|j| w[(r + pp - j) % pp]).collect();
        let pb = shifted_period_poly(&right);
        let ps = shifted_period_poly(&left);
        // beta* = 3/beta  <=>  the polynomial of 3/beta matches beta*'s:
        // substitute x -> 3/x into [c2, c1, c0] and clear: [c0, 3 c1, 9 c2].
        let transformed = primitive_poly([
            pb[2].clone(),
            BigInt::from(3) * &pb[1],
            BigInt::from(9) * &pb[0],
        ]);
        if transformed == primitive_poly(ps) {
            return Some(r + 1);
        }
    }
    None
}

/// Positive value of the purely periodic expansion `[0; (word)]` to `bits`.
fn purely_periodic_reciprocal(word: &[u64], bits: usize) -> Real {
    let [a, b, c, d] = word_matrix(word);
    // x = 1/T with c T^2 + (d-a) T - b = 0 gives b x^2 - (d-a) x - c = 0.
    let disc = (&d - &a) * (&d - &a) + BigInt::from(4) * &b * &c;
    let sq = Real::from_bigint(&disc, bits).sqrt();
    let num = Real::from_bigint(&(&d - &a), bits).add(&sq);
    num.div(&Real::from_bigint(&(&b + &b), bits))
}

/// Numeric slope of `p -> sigma_p`, used to turn one f64 ulp of the caller's
/// `p` into a tolerance on `sigma_p`.
fn sigma_slope(p: f64) -> Result<f64> {
    let h = 1e-6;
    let lo = (p - h).max(1.0);
    let hi = p + h;
    Ok((geometry::sigma(hi)? - geometry::sigma(lo)?) / (hi - lo))
}

/// Whether the purely periodic value `[0; (word)]` equals `sigma_p`, judged
/// at the granularity the caller's f64 `p` can express: the comparison
/// accepts exactly when `sigma_p` ranges over the word's value somewhere
/// within one rounding step of `p`.
fn word_matches_sigma(word: &[u64], p: f64) -> Result<bool> {
    let bits = 192;
    let sigma_hat = purely_periodic_reciprocal(word, bits);
    let sigma_p = geometry::sigma_real(p, bits)?;
    let diff = sigma_hat.sub(&sigma_p).abs().to_f64();
    let slope = sigma_slope(p)?;
    let tol = (4.0 * slope.abs() * p.abs() * 2f64.powi(-52)).max(2f64.powi(-48));
    Ok(diff <= tol)
}

/// Exact decision for a periodic expansion in the regimes whose patterns are
/// palindromes of `sigma_p` digits: the periodic word must contain a central
/// 1 around which it is fully palindromic, with symmetric tail reproducing
/// `sigma_p` itself.
fn periodic_sigma_decision(w: &[u64], p: f64, sigma: &SigmaDigits) -> Result<(Status, String)> {
    if sigma.rational.is_some() {
        return Ok((
            Status::DecidedImprovable,
            "the slope constant terminates, so its critical cores need growing flanks, \
             and periodic digits are bounded"
                .to_string(),
        ));
    }
    let pp = w.len();
    for r in 0..pp {
        if w[r] != 1 {
            continue;
        }
        let palindromic = (1..=pp).all(|j| w[(r + j) % pp] == w[(r + pp - j) % pp]);
        if !palindromic {
            continue;
        }
        let tail: Vec<u64> = (1..=pp).map(|j| w[(r + j) % pp]).collect();
        if word_matches_sigma(&tail, p)? {
            return Ok((
                Status::DecidedNonImprovable,
                format!(
                    "the period is palindromic around position {} and the symmetric tail \
                     reproduces the slope constant exactly",
                    r + 1
                ),
            ));
        }
    }
    Ok((
        Status::DecidedImprovable,
        "no palindromic center of the period reproduces the slope constant".to_string(),
    ))
}

fn periodic_decision(w: &[u64], regime: &Regime, p: f64) -> Result<(Status, String)> {
    match regime.tag {
        RegimeTag::Open2P0 => Ok((
            Status::DecidedImprovable,
            "periodic digits are bounded, so neither flanked core can grow".to_string(),
        )),
        RegimeTag::PEqInf => Ok((
            Status::DecidedImprovable,
            "periodic digits are bounded, hence badly approximable".to_string(),
        )),
        RegimeTag::PEq1 => Ok((
            Status::DecidedImprovable,
            "periodic digits are bounded, and the off-by-one block pattern cannot close \
             up over a full period"
                .to_string(),
        )),
        RegimeTag::PEq2 => match periodic_product_hit(w) {
            Some(r) => Ok((
                Status::DecidedNonImprovable,
                format!(
                    "the two tails around the central 1 at period position {r} multiply \
                     to exactly 3 (verified on integer polynomials)"
                ),
            )),
            None => Ok((
                Status::DecidedImprovable,
                "no central 1 of the period has tail values multiplying to 3, and \
                 bounded digits rule out the growing-flank routes"
                    .to_string(),
            )),
        },
        RegimeTag::Open12 | RegimeTag::AboveP0 | RegimeTag::PEqP0 => match &regime.sigma {
            Some(s) => periodic_sigma_decision(w, p, s),
            None => Ok((
                Status::DecidedImprovable,
                "periodic digits are bounded".to_string(),
            )),
        },
    }
}

fn e_decision(p: f64, p0: f64) -> (Status, String) {
    if p.is_infinite() {
        return (
            Status::DecidedNonImprovable,
            "the digits of Euler's number are unbounded, so it is not badly approximable"
                .to_string(),
        );
    }
    let on_boundary =
        (p - 1.0).abs() <= SNAP || (p - 2.0).abs() <= SNAP || (p - p0).abs() <= SNAP;
    let interior_non = p > 2.0 + SNAP && p < p0 - SNAP;
    if on_boundary || interior_non {
        (
            Status::DecidedNonImprovable,
            "the pairs 1,1 recur forever with both flanking digits growing without bound"
                .to_string(),
        )
    } else {
        (
            Status::DecidedImprovable,
            "the large digits of Euler's number strictly increase, so no symmetric or \
             almost-symmetric core can recur"
                .to_string(),
        )
    }
}

/// Classify an exactly known expansion at norm parameter `p`.
///
/// Rationals improve everywhere; periodic expansions are decided by exact
/// quadratic arithmetic; Euler's number is decided by the shape of its
/// digits. The attached scan report (over `horizon` digits, where that many
/// exist) illustrates the decision.
pub fn classify(x: &ContinuedFraction, p: f64, horizon: usize) -> Result<Verdict> {
    if horizon < 10 {
        return Err(Error::domain(format!(
            "classification horizon must be at least 10, got {horizon}"
        )));
    }
    let regime = regime_of(p)?;
    let specs = patterns_for(&regime);
    let digits = x.digits_clamped(horizon);
    let report = if digits.len() >= 10 {
        scan_digits(&digits, &specs, digits.len())?
    } else {
        ScanReport {
            horizon: digits.len(),
            reports: specs.iter().cloned().map(PatternReport::empty).collect(),
        }
    };
    let (status, justification) = match x {
        ContinuedFraction::Finite { .. } => (
            Status::DecidedImprovable,
            "a rational number improves the bound at every norm parameter".to_string(),
        ),
        ContinuedFraction::Periodic { period, .. } => periodic_decision(period, &regime, p)?,
        ContinuedFraction::E => {
            let p0 = geometry::p_zero(1e-12)?;
            e_decision(p, p0)
        }
    };
    Ok(Verdict {
        status,
        justification,
        regime,
        report,
    })
}

/// Classify Euler's number at `p` over the default horizon.
pub fn classify_e(p: f64) -> Result<Verdict> {
    classify(&ContinuedFraction::E, p, DEFAULT_HORIZON)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn phi() -> ContinuedFraction {
        ContinuedFraction::periodic(1, vec![], vec![1]).unwrap()
    }

    fn ff(core: &[u64]) -> PatternSpec {
        PatternSpec::FlankedFixed {
            core: core.to_vec(),
        }
    }

    #[test]
    fn regimes_snap_onto_their_boundaries() {
        let p0 = geometry::p_zero(1e-12).unwrap();
        assert_eq!(regime_of(1.0 + 1e-10).unwrap().tag, RegimeTag::PEq1);
        assert_eq!(regime_of(2.0).unwrap().tag, RegimeTag::PEq2);
        assert_eq!(regime_of(p0 - 1e-10).unwrap().tag, RegimeTag::PEqP0);
        assert_eq!(regime_of(1.5).unwrap().tag, RegimeTag::Open12);
        assert_eq!(regime_of(2.3).unwrap().tag, RegimeTag::Open2P0);
        assert_eq!(regime_of(3.7).unwrap().tag, RegimeTag::AboveP0);
        assert_eq!(regime_of(f64::INFINITY).unwrap().tag, RegimeTag::PEqInf);
        assert!(regime_of(0.9).is_err());

        let r = regime_of(1.5).unwrap();
        let s = r.sigma.expect("sigma digits attached between 1 and 2");
        assert!(s.rational.is_none());
        assert!(regime_of(2.3).unwrap().sigma.is_none());
    }

    #[test]
    fn a_terminating_slope_constant_generates_four_cores() {
        // Find the parameter whose slope constant is exactly 2/5 = [0; 2, 2].
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if geometry::sigma(mid).unwrap() > 0.4 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = 0.5 * (lo + hi);
        let regime = regime_of(p).unwrap();
        assert_eq!(regime.tag, RegimeTag::Open12);
        let sig = regime.sigma.as_ref().unwrap();
        assert!(sig.rational.is_some(), "2/5 should be detected as exact");

        let specs = patterns_for(&regime);
        let expected = vec![
            ff(&[2, 2, 1, 2, 2]),
            ff(&[1, 1, 2, 1, 2, 2]),
            ff(&[2, 2, 1, 2, 1, 1]),
            ff(&[1, 1, 2, 1, 2, 1, 1]),
        ];
        assert_eq!(specs, expected);
    }

    #[test]
    fn pattern_sets_are_constant_strictly_between_two_and_the_threshold() {
        let inner = patterns_for(&regime_of(2.1).unwrap());
        assert_eq!(inner, patterns_for(&regime_of(2.5).unwrap()));
        assert_eq!(inner, vec![ff(&[1, 1]), ff(&[2])]);
        // The boundary at 2 adds the window-product route.
        let at_two = patterns_for(&regime_of(2.0).unwrap());
        assert_eq!(at_two.len(), 3);
        assert!(matches!(
            at_two[2],
            PatternSpec::CentralProduct { tolerance } if tolerance == CP_RESIDUAL_TOL
        ));
        // The threshold itself carries both grammars.
        let p0 = geometry::p_zero(1e-12).unwrap();
        let at_p0 = patterns_for(&regime_of(p0).unwrap());
        assert!(at_p0.len() > inner.len());
        assert_eq!(&at_p0[..2], &inner[..]);
    }

    #[test]
    fn euler_number_is_decided_across_the_whole_parameter_line() {
        let p0 = geometry::p_zero(1e-12).unwrap();
        for p in [1.2, 1.5, 1.9, 2.7, 3.0, 10.0] {
            let v = classify_e(p).unwrap();
            assert_eq!(v.status, Status::DecidedImprovable, "p = {p}");
        }
        for p in [1.0, 2.0, 2.3, p0, f64::INFINITY] {
            let v = classify_e(p).unwrap();
            assert_eq!(v.status, Status::DecidedNonImprovable, "p = {p}");
        }
    }

    #[test]
    fn flank_records_of_euler_grow_two_four_six() {
        let report = scan(&ContinuedFraction::E, &[ff(&[1, 1])], 200).unwrap();
        let recs = &report.reports[0].records;
        let values: Vec<u64> = recs.iter().map(|&(_, v)| v).collect();
        assert!(values.len() > 10);
        assert_eq!(&values[..4], &[2, 4, 6, 8]);
        assert!(values.windows(2).all(|w| w[0] < w[1]));
        // Growth is still fresh near the end of the horizon.
        assert!(recs.last().unwrap().0 * 4 >= 3 * 200);
    }

    #[test]
    fn the_golden_ratio_never_shows_a_two() {
        let report = scan(&phi(), &[ff(&[2])], 100).unwrap();
        assert!(report.reports[0].positions.is_empty());
        assert!(report.reports[0].records.is_empty());
    }

    #[test]
    fn palindromic_extents_grow_on_a_built_stream() {
        let regime = regime_of(1.5).unwrap();
        let s = regime.sigma.as_ref().unwrap().digits.clone();
        let mut d: Vec<u64> = vec![9, 9];
        for nu in 1..=5usize {
            for j in (1..=nu).rev() {
                d.push(s[j - 1]);
            }
            d.push(1);
            for j in 1..=nu {
                d.push(s[j - 1]);
            }
            d.push(9);
        }
        let v = classify_digits(&d, 1.5, d.len()).unwrap();
        assert_eq!(v.status, Status::EvidenceNonImprovable);
        let rep = &v.report.reports[0];
        assert!(matches!(rep.pattern, PatternSpec::PalindromicGrowing { .. }));
        assert_eq!(rep.max_extent, Some(5));
        let values: Vec<u64> = rep.records.iter().map(|&(_, v)| v).collect();
        assert!(values.len() >= 3);
        assert!(values.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*values.last().unwrap(), 5);
    }

    /// Blocks `n, 1, 1, 1, 2, n+1` in an all-ones stream: the off-by-one
    /// block route fires at p = 1 while nothing fires at p = 2.
    #[test]
    fn off_by_one_blocks_fire_at_one_but_not_at_two() {
        let mut d: Vec<u64> = Vec::new();
        let block = |d: &mut Vec<u64>, ones: usize, n: u64| {
            d.extend(std::iter::repeat(1).take(ones));
            d.extend_from_slice(&[n, 1, 1, 1, 2, n + 1]);
        };
        block(&mut d, 10, 8);
        block(&mut d, 20, 16);
        block(&mut d, 30, 32);
        block(&mut d, 40, 64);
        d.extend(std::iter::repeat(1).take(5));

        let at_one = classify_digits(&d, 1.0, d.len()).unwrap();
        assert_eq!(at_one.status, Status::EvidenceNonImprovable);
        let asym = at_one
            .report
            .reports
            .iter()
            .find(|r| r.pattern == PatternSpec::AlmostSymmetric)
            .unwrap();
        let values: Vec<u64> = asym.records.iter().map(|&(_, v)| v).collect();
        assert_eq!(values, vec![8, 16, 32, 64]);

        let at_two = classify_digits(&d, 2.0, d.len()).unwrap();
        assert_eq!(at_two.status, Status::EvidenceImprovable);
    }

    /// Blocks `n, 3, 2, 1, 3, 4, n+1`: the two tails around the central 1
    /// approach 4/3 and 9/4, whose product is 3 — evidence at p = 2 only.
    #[test]
    fn window_products_converge_on_the_tailored_blocks() {
        let mut d: Vec<u64> = Vec::new();
        for (ones, n) in [(12usize, 8u64), (20, 16), (30, 32), (40, 64)] {
            d.extend(std::iter::repeat(1).take(ones));
            d.extend_from_slice(&[n, 3, 2, 1, 3, 4, n + 1]);
        }
        d.extend(std::iter::repeat(1).take(12));

        let at_two = classify_digits(&d, 2.0, d.len()).unwrap();
        assert_eq!(at_two.status, Status::EvidenceNonImprovable);
        let cp = at_two
            .report
            .reports
            .iter()
            .find(|r| matches!(r.pattern, PatternSpec::CentralProduct { .. }))
            .unwrap();
        let good: Vec<&CentralWindow> = cp
            .windows
            .iter()
            .filter(|w| w.depth >= 8 && w.residual <= CP_RESIDUAL_TOL)
            .collect();
        assert!(good.len() >= 3);
        let last = good.last().unwrap();
        assert!((last.beta - 2.25).abs() < 0.02, "beta = {}", last.beta);
        assert!(
            (last.beta_star - 4.0 / 3.0).abs() < 0.02,
            "beta* = {}",
            last.beta_star
        );

        let at_one = classify_digits(&d, 1.0, d.len()).unwrap();
        assert_eq!(at_one.status, Status::EvidenceImprovable);
    }

    #[test]
    fn quadratics_at_two_are_decided_by_exact_tail_products() {
        // [0; (2, 1)] is the slope constant at p = 2: its tails multiply to 3.
        let hit = ContinuedFraction::periodic(0, vec![], vec![2, 1]).unwrap();
        let v = classify(&hit, 2.0, 64).unwrap();
        assert_eq!(v.status, Status::DecidedNonImprovable);

        let miss = classify(&phi(), 2.0, 64).unwrap();
        assert_eq!(miss.status, Status::DecidedImprovable);
        let also_miss = ContinuedFraction::periodic(0, vec![], vec![4, 1]).unwrap();
        assert_eq!(
            classify(&also_miss, 2.0, 64).unwrap().status,
            Status::DecidedImprovable
        );
    }

    /// A periodic palindrome that *is* its own symmetric tail matches the
    /// slope constant exactly at one parameter and at no nearby one.
    #[test]
    fn a_palindromic_quadratic_matches_its_own_slope_parameter() {
        // [0; (4, 1)] = (sqrt(2) - 1) / 2; solve sigma_p = that value.
        let target = (2f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (3.0f64, 5.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if geometry::sigma(mid).unwrap() > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p_star = 0.5 * (lo + hi);
        let x = ContinuedFraction::periodic(0, vec![], vec![4, 1]).unwrap();
        let at_star = classify(&x, p_star, 64).unwrap();
        assert_eq!(at_star.regime.tag, RegimeTag::AboveP0);
        assert_eq!(at_star.status, Status::DecidedNonImprovable);

        let nearby = classify(&x, p_star + 1e-6, 64).unwrap();
        assert_eq!(nearby.status, Status::DecidedImprovable);

        // The golden ratio's tail (all ones) matches no slope constant there.
        assert_eq!(
            classify(&phi(), 1.5, 64).unwrap().status,
            Status::DecidedImprovable
        );
    }

    #[test]
    fn rationals_improve_at_every_parameter() {
        let p0 = geometry::p_zero(1e-12).unwrap();
        let x = ContinuedFraction::from_rational(&BigInt::from(22), &BigInt::from(7)).unwrap();
        for p in [1.0, 1.5, 2.0, 2.3, p0, 3.7, f64::INFINITY] {
            let v = classify(&x, p, 64).unwrap();
            assert_eq!(v.status, Status::DecidedImprovable, "p = {p}");
        }
    }

    #[test]
    fn bounded_periodic_digits_improve_away_from_their_matches() {
        let p0 = geometry::p_zero(1e-12).unwrap();
        for p in [1.0, 2.3, p0, f64::INFINITY] {
            let v = classify(&phi(), p, 64).unwrap();
            assert_eq!(v.status, Status::DecidedImprovable, "p = {p}");
        }
    }

    #[test]
    fn presence_without_growth_is_not_evidence() {
        let ones = vec![1u64; 200];
        let v = classify_digits(&ones, 1.0, 200).unwrap();
        assert_eq!(v.status, Status::EvidenceImprovable);
    }

    #[test]
    fn scan_rejects_tiny_horizons_and_exhausted_expansions() {
        let specs = [ff(&[1, 1])];
        let e = scan(&ContinuedFraction::E, &specs, 9);
        assert!(e.is_err());
        let x = ContinuedFraction::from_rational(&BigInt::from(22), &BigInt::from(7)).unwrap();
        assert!(scan(&x, &specs, 10).is_err());
        assert!(classify_digits(&[1; 50], 2.0, 60).is_err());
    }

    #[test]
    fn verdict_json_exposes_the_contract_keys() {
        let v = classify_e(2.3).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        for key in ["status", "justification", "regime", "patterns", "records", "horizon"] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(json["status"], "DECIDED_NON_IMPROVABLE");
        assert_eq!(json["regime"]["tag"], "OPEN_2_P0");
        assert_eq!(json["horizon"], 200);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Enlarging the horizon never deletes occurrences, and for the
        /// fixed-core and digit-growth patterns the record chain only
        /// extends.
        #[test]
        fn larger_horizons_only_extend_the_scan(
            seed in any::<u64>(),
            len in 60usize..140,
            split in 10usize..50,
        ) {
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                state >> 33
            };
            let digits: Vec<u64> = (0..len)
                .map(|_| {
                    let r = next() % 100;
                    if r < 85 { 1 + next() % 6 } else { 7 + next() % 24 }
                })
                .collect();
            let h1 = split.min(len);
            let h2 = len;
            let specs = vec![
                ff(&[1, 1]),
                ff(&[2]),
                PatternSpec::AlmostSymmetric,
                PatternSpec::UnboundedDigits,
            ];
            let small = scan_digits(&digits, &specs, h1).unwrap();
            let big = scan_digits(&digits, &specs, h2).unwrap();
            for (rs, rb) in small.reports.iter().zip(big.reports.iter()) {
                for pos in &rs.positions {
                    prop_assert!(rb.positions.contains(pos));
                }
                let fixed_core = matches!(
                    rs.pattern,
                    PatternSpec::FlankedFixed { .. } | PatternSpec::UnboundedDigits
                );
                if fixed_core {
                    prop_assert!(rb.records.starts_with(&rs.records));
                }
            }
        }
    }
}
