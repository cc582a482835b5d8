//! Geometry of the L_p plane: norms, the critical determinant with its
//! transition exponent, and the catalog of extreme lattices.
//!
//! The catalog covers five regimes of the exponent: two rigid lattices for
//! `2 < p < p0`, two for `p in (1,2) or p > p0`, their union at `p = p0`,
//! and one-parameter families at `p = 1` and `p = 2`. Every catalog entry
//! keeps its two defining points on the unit sphere of the norm and realizes
//! the critical determinant.

use std::cmp::Ordering;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::cf;
use crate::error::{Error, Result};
use crate::real::Real;

/// Largest finite exponent the inverse solver searches.
pub const P_MAX: f64 = 1024.0;

/// Snapping width for regime boundaries (p = 1, 2, p0).
pub const P_TOL: f64 = 1e-9;

fn validate_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain(format!("exponent must be in [1, inf], got {p}")));
    }
    Ok(())
}

/// The norm value `(|x|^p + |y|^p)^(1/p)` (max-norm for infinite p).
pub fn norm_eval(p: f64, point: [f64; 2]) -> Result<f64> {
    validate_p(p)?;
    Ok(norm_unchecked(p, point[0], point[1]))
}

pub(crate) fn norm_unchecked(p: f64, x: f64, y: f64) -> f64 {
    let ax = x.abs();
    let ay = y.abs();
    if p.is_infinite() {
        return ax.max(ay);
    }
    let m = ax.max(ay);
    if m == 0.0 {
        return 0.0;
    }
    // Factor out the larger coordinate so intermediate powers stay bounded.
    let r = ax.min(ay) / m;
    m * (1.0 + r.powf(p)).powf(1.0 / p)
}

fn g_f64(s: f64, p: f64) -> f64 {
    s.powf(p) + (1.0 + s).powf(p) - 2.0
}

/// Root in (0,1) of `s^p + (1+s)^p = 2`.
pub fn sigma(p: f64) -> Result<f64> {
    validate_p(p)?;
    if p.is_infinite() {
        return Err(Error::domain("sigma is defined for finite exponents"));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g_f64(mid, p) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn g_real(s: &Real, p: &Real) -> Real {
    let one = Real::one(s.prec());
    let two = Real::two(s.prec());
    s.pow(p).add(&one.add(s).pow(p)).sub(&two)
}

fn g_real_at(s: &BigRational, p: f64, bits: usize) -> Real {
    let sr = Real::from_rational(s, bits);
    let pr = Real::from_f64(p, bits);
    g_real(&sr, &pr)
}

/// Sign of `g` at an exact rational argument, or `None` when the value is
/// too close to zero to resolve at this precision.
fn g_sign_at(s: &BigRational, p: f64, bits: usize) -> Option<Ordering> {
    let v = g_real_at(s, p, bits);
    let guard = Real::pow2(-(bits as i64) + 32, bits);
    if v.abs().lt(&guard) {
        return None;
    }
    Some(if v.is_negative() {
        Ordering::Less
    } else {
        Ordering::Greater
    })
}

/// Sign of `g` with precision escalation; `None` means the value is zero as
/// far as quadrupled precision can tell.
fn g_sign_escalating(s: &BigRational, p: f64, bits: usize) -> Option<Ordering> {
    for mult in [1, 2, 4] {
        if let Some(o) = g_sign_at(s, p, bits * mult) {
            return Some(o);
        }
    }
    None
}

/// Enclosure of `sigma(p)` from bisection in exact dyadic arithmetic.
fn sigma_interval(p: f64, steps: usize, bits: usize) -> (BigRational, BigRational) {
    let mut lo = BigRational::zero();
    let mut hi = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    for _ in 0..steps {
        let mid = (&lo + &hi) / &two;
        match g_sign_escalating(&mid, p, bits) {
            Some(Ordering::Less) => lo = mid,
            Some(_) => hi = mid,
            // Exactly on the root as far as we can tell: collapse.
            None => return (mid.clone(), mid),
        }
    }
    (lo, hi)
}

/// High-precision value of `sigma(p)` (enclosure midpoint).
pub fn sigma_real(p: f64, bits: usize) -> Result<Real> {
    validate_p(p)?;
    if p.is_infinite() {
        return Err(Error::domain("sigma is defined for finite exponents"));
    }
    let (lo, hi) = sigma_interval(p, bits + 16, bits + 64);
    let two = BigRational::from_integer(BigInt::from(2));
    Ok(Real::from_rational(&((lo + hi) / two), bits))
}

/// Proven partial quotients of `sigma(p)`, with detection hints for exact
/// rational values and periodic digit tails.
#[derive(Clone, Debug, Serialize)]
pub struct SigmaDigits {
    /// Partial quotients certified by interval arithmetic: every number in
    /// the final bisection interval shares this digit prefix.
    pub digits: Vec<u64>,
    /// Exact rational value, when the root is indistinguishable (at the
    /// resolution a double-precision exponent deserves) from the simplest
    /// rational in the bisection interval.
    #[serde(serialize_with = "serialize_rational")]
    pub rational: Option<BigRational>,
    /// Primitive period candidate when the proven digits end in at least two
    /// full repetitions. A hint, not a certificate.
    pub periodic_hint: Option<Vec<u64>>,
    /// Number of leading digits that are certified (always `digits.len()`).
    pub reliable_len: usize,
}

fn serialize_rational<S: serde::Serializer>(
    r: &Option<BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

/// Interval version of the continued-fraction digit map. Digits are emitted
/// only while the floor of the reciprocal agrees across the whole interval;
/// on disagreement the simplest rational inside the interval is returned as
/// a candidate.
fn interval_digits(
    mut lo: BigRational,
    mut hi: BigRational,
    max: usize,
) -> (Vec<u64>, Option<Vec<u64>>) {
    let mut digits: Vec<u64> = Vec::new();
    fn with_tail(digits: &[u64], c: &BigInt) -> Option<Vec<u64>> {
        let c = u64::try_from(c).ok()?;
        let mut cd = digits.to_vec();
        cd.push(c);
        Some(cd)
    }
    for _ in 0..max {
        // Invariant: 0 <= lo < hi <= 1 and the root is strictly interior.
        let inv_lo = hi.recip();
        let f_lo = inv_lo.floor().to_integer();
        let c = &f_lo + 1;
        if lo.is_zero() {
            // Unbounded reciprocal range: no digit, only a candidate.
            return (digits.clone(), with_tail(&digits, &c));
        }
        let inv_hi = lo.recip();
        let f_hi = inv_hi.floor().to_integer();
        if f_lo != f_hi {
            // The smallest integer strictly inside the reciprocal range
            // marks the simplest rational inside the interval.
            let cand = if BigRational::from_integer(c.clone()) < inv_hi {
                with_tail(&digits, &c)
            } else {
                None
            };
            return (digits, cand);
        }
        match u64::try_from(&f_lo) {
            Ok(d) if d >= 1 => digits.push(d),
            _ => return (digits, None),
        }
        let f = BigRational::from_integer(f_lo);
        lo = inv_lo - &f;
        hi = inv_hi - &f;
    }
    (digits, None)
}

/// Width below which rational candidates are taken seriously.
fn candidate_gate() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << 50)
}

/// Largest denominator accepted for an exact-rational verdict. The simplest
/// rational inside a generic interval at the candidate gate has a much
/// larger denominator, so this bound screens out frontier noise.
const RATIONAL_DENOM_BITS: u64 = 20;

/// A candidate rational value of sigma is accepted when `g` vanishes at it
/// to within what a double-precision exponent can resolve.
fn rational_confirmed(cand: &BigRational, p: f64) -> bool {
    if cand.denom().bits() > RATIONAL_DENOM_BITS {
        return false;
    }
    let c = match cand.to_f64() {
        Some(c) if c > 0.0 && c < 1.0 => c,
        _ => return false,
    };
    let dg_dp = (c.powf(p) * c.ln() + (1.0 + c).powf(p) * (1.0 + c).ln()).abs();
    let slack = (4.0 * dg_dp * p * 2f64.powi(-52)).max(2f64.powi(-48));
    g_real_at(cand, p, 384).abs().to_f64() < slack
}

/// Compute at least `count` proven partial quotients of `sigma(p)` (fewer
/// only when the expansion terminates or a digit is too large to certify
/// within the step budget).
pub fn sigma_digits(p: f64, count: usize) -> Result<SigmaDigits> {
    validate_p(p)?;
    if p.is_infinite() {
        return Err(Error::domain("sigma digits are defined for finite exponents"));
    }
    if count > 4096 {
        return Err(Error::resource("digit request beyond supported range"));
    }
    let mut lo = BigRational::zero();
    let mut hi = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let gate = candidate_gate();
    let mut bits = 192usize;
    let mut steps = 0usize;
    let max_steps = 256 + 48 * count;
    let mut tried: Vec<BigRational> = Vec::new();
    loop {
        // Keep the working precision comfortably ahead of the interval width
        // so dyadic midpoints stay exactly representable.
        if steps + 96 > bits {
            bits *= 2;
        }
        let mid = (&lo + &hi) / &two;
        match g_sign_escalating(&mid, p, bits) {
            Some(Ordering::Less) => lo = mid,
            Some(_) => hi = mid,
            None => {
                // The midpoint is a root as far as quadrupled precision can
                // tell: an exact dyadic hit.
                let cf = digits_of_rational(&mid);
                return Ok(SigmaDigits {
                    reliable_len: cf.len(),
                    periodic_hint: None,
                    digits: cf,
                    rational: Some(mid),
                });
            }
        }
        steps += 1;
        let (digits, cand) = interval_digits(lo.clone(), hi.clone(), count + 2);
        if let Some(cd) = cand {
            if &hi - &lo < gate {
                let value = value_of_digits(&cd);
                if !tried.contains(&value) {
                    tried.push(value.clone());
                    if rational_confirmed(&value, p) {
                        return Ok(SigmaDigits {
                            reliable_len: cd.len(),
                            periodic_hint: None,
                            digits: cd,
                            rational: Some(value),
                        });
                    }
                }
            }
        }
        if digits.len() >= count || steps >= max_steps {
            let hint = periodic_hint(&digits);
            return Ok(SigmaDigits {
                reliable_len: digits.len(),
                periodic_hint: hint,
                digits,
                rational: None,
            });
        }
    }
}

fn digits_of_rational(x: &BigRational) -> Vec<u64> {
    match cf::ContinuedFraction::from_rational(x.numer(), x.denom()) {
        Ok(cf::ContinuedFraction::Finite { digits, .. }) => digits,
        _ => vec![],
    }
}

fn value_of_digits(digits: &[u64]) -> BigRational {
    if digits.is_empty() {
        return BigRational::zero();
    }
    let mut v = BigRational::from_integer(BigInt::from(digits[digits.len() - 1]));
    for &d in digits[..digits.len() - 1].iter().rev() {
        v = BigRational::from_integer(BigInt::from(d)) + v.recip();
    }
    v.recip()
}

fn periodic_hint(digits: &[u64]) -> Option<Vec<u64>> {
    (1..=digits.len() / 2)
        .find(|&per| {
            digits.len() >= 2 * per
                && digits
                    .iter()
                    .skip(per)
                    .zip(digits.iter())
                    .all(|(a, b)| a == b)
        })
        .map(|per| digits[..per].to_vec())
}

/// Inverse of the sigma map: the exponent p with `sigma(p) = s`, polished
/// past double-precision evaluation noise.
pub fn h_inverse(s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 0.5) {
        return Err(Error::domain(format!(
            "sigma value must lie in (0, 0.5], got {s}"
        )));
    }
    if g_f64(s, P_MAX) < 0.0 {
        return Err(Error::domain(format!(
            "sigma value {s} below the attainable range for exponents up to {P_MAX}"
        )));
    }
    // g(s, p) is increasing in p near its root; bracket [1, P_MAX].
    let (mut lo, mut hi) = (1.0f64, P_MAX);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if g_f64(s, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let coarse = 0.5 * (lo + hi);
    let s_exact = match BigRational::from_float(s) {
        Some(r) => r,
        None => return Ok(coarse),
    };
    let sign_at = |p: f64| -> Option<Ordering> {
        let sr = Real::from_rational(&s_exact, 256);
        let pr = Real::from_f64(p, 256);
        let v = g_real(&sr, &pr);
        if v.is_zero() {
            return None;
        }
        Some(if v.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        })
    };
    let (mut plo, mut phi) = (coarse - 1e-12, coarse + 1e-12);
    if sign_at(plo) != Some(Ordering::Less) || sign_at(phi) != Some(Ordering::Greater) {
        return Ok(coarse);
    }
    for _ in 0..50 {
        let mid = 0.5 * (plo + phi);
        match sign_at(mid) {
            Some(Ordering::Less) => plo = mid,
            Some(_) => phi = mid,
            None => return Ok(mid),
        }
    }
    Ok(0.5 * (plo + phi))
}

fn x0_f64(p: f64) -> f64 {
    (1.0 - 2f64.powf(-p)).powf(1.0 / p)
}

fn det_gap_f64(p: f64) -> f64 {
    x0_f64(p) - (1.0 + 2.0 * sigma(p).unwrap()) * 2f64.powf(-2.0 / p)
}

/// Transition exponent: the root of `det(rigid family) = det(sheared
/// family)` inside (2.5, 2.7).
pub fn p_zero(tolerance: f64) -> Result<f64> {
    if !(tolerance >= 1e-12) {
        return Err(Error::domain("tolerance must be at least 1e-12"));
    }
    static ROOT: OnceLock<Result<f64>> = OnceLock::new();
    ROOT.get_or_init(|| {
        let (mut lo, mut hi) = (2.5f64, 2.7f64);
        if !(det_gap_f64(lo) < 0.0 && det_gap_f64(hi) > 0.0) {
            return Err(Error::internal("determinant gap does not bracket a root"));
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if det_gap_f64(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    })
    .clone()
}

/// High-precision recomputation of the transition exponent; the bisection
/// stops once the bracket is narrower than `tol`.
pub fn p_zero_refined(bits: usize, tol: f64) -> Result<Real> {
    let one = Real::one(bits);
    let two = Real::two(bits);
    let gap = |p: &Real| -> Real {
        let inv_p = p.recip();
        let x0 = one.sub(&two.pow(&p.neg())).pow(&inv_p);
        let (slo, shi) = sigma_interval(p.to_f64(), 80, bits.max(192));
        let sigma_mid = Real::from_rational(&(slo + shi), bits).div(&two);
        let sheared = one
            .add(&sigma_mid.mul(&two))
            .mul(&two.pow(&two.mul(&inv_p).neg()));
        x0.sub(&sheared)
    };
    let mut lo = Real::from_f64(2.5, bits);
    let mut hi = Real::from_f64(2.7, bits);
    if !gap(&lo).is_negative() || gap(&hi).is_negative() {
        return Err(Error::internal("determinant gap does not bracket a root"));
    }
    let tol_r = Real::from_f64(tol, bits);
    while hi.sub(&lo).gt(&tol_r) {
        let mid = lo.mid(&hi);
        if gap(&mid).is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo.mid(&hi))
}

/// Critical determinant of the unit ball of the exponent-p norm.
pub fn critical_determinant(p: f64) -> Result<f64> {
    validate_p(p)?;
    if p.is_infinite() {
        return Ok(1.0);
    }
    if (p - 2.0).abs() <= P_TOL {
        return Ok(3f64.sqrt() / 2.0);
    }
    let p0 = p_zero(1e-12)?;
    if p > 2.0 && p < p0 + P_TOL {
        return Ok(x0_f64(p));
    }
    Ok((1.0 + 2.0 * sigma(p)?) * 2f64.powf(-2.0 / p))
}

/// `1/sqrt(delta_p)`: the sharp threshold for the flow's first minimum.
pub fn dirichlet_bound(p: f64) -> Result<f64> {
    Ok(1.0 / critical_determinant(p)?.sqrt())
}

/// The named constants of a given exponent, exportable as JSON.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalConstants {
    pub p: f64,
    pub sigma: Option<f64>,
    pub delta: f64,
    pub p0: f64,
    pub dirichlet_bound: f64,
}

pub fn constants(p: f64) -> Result<CriticalConstants> {
    validate_p(p)?;
    let delta = critical_determinant(p)?;
    Ok(CriticalConstants {
        p,
        sigma: if p.is_infinite() { None } else { Some(sigma(p)?) },
        delta,
        p0: p_zero(1e-12)?,
        dirichlet_bound: 1.0 / delta.sqrt(),
    })
}

/// Families of critical lattices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeFamily {
    L1,
    L1Prime,
    L2Plus,
    L2Minus,
    L3Plus,
    L3Minus,
    L4Plus,
    L4Minus,
}

/// A critical lattice: two marked boundary points as the columns of a 2x2
/// matrix, together with the exponent and (for the one-parameter families)
/// the parameter value.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalLattice {
    pub family: LatticeFamily,
    pub p: f64,
    pub param: Option<f64>,
    /// Row-major matrix whose columns are the marked points.
    pub omega: [[f64; 2]; 2],
}

impl CriticalLattice {
    pub fn z_prime(&self) -> [f64; 2] {
        [self.omega[0][0], self.omega[1][0]]
    }

    pub fn z_second(&self) -> [f64; 2] {
        [self.omega[0][1], self.omega[1][1]]
    }

    pub fn det(&self) -> f64 {
        self.omega[0][0] * self.omega[1][1] - self.omega[0][1] * self.omega[1][0]
    }

    pub fn alpha(&self) -> f64 {
        alpha_of(&self.omega)
    }

    pub fn alpha_star(&self) -> f64 {
        alpha_star_of(&self.omega)
    }

    /// All documented boundary points: the marked columns, their negatives,
    /// and the family's extra sphere points.
    pub fn boundary_points(&self) -> Vec<[f64; 2]> {
        let zp = self.z_prime();
        let zs = self.z_second();
        let extra = match self.family {
            LatticeFamily::L1 => [zs[0] - zp[0], zs[1] - zp[1]],
            _ => [zs[0] + zp[0], zs[1] + zp[1]],
        };
        let mut pts = vec![
            zp,
            zs,
            [-zp[0], -zp[1]],
            [-zs[0], -zs[1]],
            extra,
            [-extra[0], -extra[1]],
        ];
        if matches!(self.family, LatticeFamily::L3Plus | LatticeFamily::L3Minus)
            && self.param == Some(0.0)
        {
            let e2 = [zp[0] + 2.0 * zs[0], zp[1] + 2.0 * zs[1]];
            pts.push(e2);
            pts.push([-e2[0], -e2[1]]);
        }
        pts
    }
}

/// First column ratio `-b/d` of the matrix (columns are the marked points);
/// a zero denominator maps to positive infinity.
pub fn alpha_of(omega: &[[f64; 2]; 2]) -> f64 {
    let b = omega[1][0];
    let d = omega[1][1];
    if d == 0.0 {
        f64::INFINITY
    } else {
        -b / d
    }
}

/// Ratio `a/c` of the matrix top row; a zero denominator maps to positive
/// infinity.
pub fn alpha_star_of(omega: &[[f64; 2]; 2]) -> f64 {
    let a = omega[0][0];
    let c = omega[0][1];
    if c == 0.0 {
        f64::INFINITY
    } else {
        a / c
    }
}

fn build_lattice(family: LatticeFamily, p: f64, param: Option<f64>) -> Result<CriticalLattice> {
    let omega = match family {
        LatticeFamily::L1 => {
            let x0 = x0_f64(p);
            [[x0, x0], [-0.5, 0.5]]
        }
        LatticeFamily::L1Prime => {
            let x0 = x0_f64(p);
            [[0.5, 0.5], [-x0, x0]]
        }
        LatticeFamily::L2Plus | LatticeFamily::L2Minus => {
            let s = sigma(p)?;
            let c = 2f64.powf(-1.0 / p);
            let sgn = if family == LatticeFamily::L2Plus { 1.0 } else { -1.0 };
            [[s * c, c], [-sgn * (1.0 + s) * c, sgn * c]]
        }
        LatticeFamily::L3Plus | LatticeFamily::L3Minus => {
            let a = param.ok_or_else(|| Error::domain("family requires a parameter"))?;
            if !(0.0..0.5).contains(&a) {
                return Err(Error::domain(format!(
                    "parameter must lie in [0, 0.5), got {a}"
                )));
            }
            let sgn = if family == LatticeFamily::L3Plus { 1.0 } else { -1.0 };
            [[a, 0.5], [sgn * (a - 1.0), sgn * 0.5]]
        }
        LatticeFamily::L4Plus | LatticeFamily::L4Minus => {
            let phi = param.ok_or_else(|| Error::domain("family requires a parameter"))?;
            let hi = std::f64::consts::FRAC_PI_6;
            if !(-1e-12..=hi + 1e-12).contains(&phi) {
                return Err(Error::domain(format!(
                    "parameter must lie in [0, pi/6], got {phi}"
                )));
            }
            let sgn = if family == LatticeFamily::L4Plus { 1.0 } else { -1.0 };
            [
                [phi.sin(), (hi + phi).cos()],
                [sgn * phi.cos(), -sgn * (hi + phi).sin()],
            ]
        }
    };
    Ok(CriticalLattice {
        family,
        p,
        param,
        omega,
    })
}

/// One catalog row: either a rigid lattice or a one-parameter family with a
/// sampling accessor.
#[derive(Clone, Debug)]
pub enum CatalogEntry {
    Fixed(CriticalLattice),
    OneParameter {
        family: LatticeFamily,
        p: f64,
        lo: f64,
        hi: f64,
        closed_right: bool,
    },
}

impl CatalogEntry {
    pub fn family(&self) -> LatticeFamily {
        match self {
            CatalogEntry::Fixed(l) => l.family,
            CatalogEntry::OneParameter { family, .. } => *family,
        }
    }

    /// The lattice at a given parameter (ignored by rigid entries).
    pub fn at(&self, param: f64) -> Result<CriticalLattice> {
        match self {
            CatalogEntry::Fixed(l) => Ok(l.clone()),
            CatalogEntry::OneParameter { family, p, .. } => build_lattice(*family, *p, Some(param)),
        }
    }

    /// Evenly spaced representatives (a single one for rigid entries).
    pub fn sample(&self, n: usize) -> Vec<CriticalLattice> {
        match self {
            CatalogEntry::Fixed(l) => vec![l.clone()],
            CatalogEntry::OneParameter {
                family,
                p,
                lo,
                hi,
                closed_right,
            } => {
                let n = n.max(1);
                let denom = if *closed_right { (n - 1).max(1) } else { n };
                (0..n)
                    .map(|k| lo + (hi - lo) * k as f64 / denom as f64)
                    .map(|param| build_lattice(*family, *p, Some(param)).expect("param in range"))
                    .collect()
            }
        }
    }
}

/// The critical lattices of a finite exponent.
pub fn catalog(p: f64) -> Result<Vec<CatalogEntry>> {
    validate_p(p)?;
    if p.is_infinite() {
        return Err(Error::domain("the catalog covers finite exponents only"));
    }
    let p0 = p_zero(1e-12)?;
    if (p - 1.0).abs() <= P_TOL {
        return Ok(vec![
            CatalogEntry::OneParameter {
                family: LatticeFamily::L3Plus,
                p: 1.0,
                lo: 0.0,
                hi: 0.5,
                closed_right: false,
            },
            CatalogEntry::OneParameter {
                family: LatticeFamily::L3Minus,
                p: 1.0,
                lo: 0.0,
                hi: 0.5,
                closed_right: false,
            },
        ]);
    }
    if (p - 2.0).abs() <= P_TOL {
        return Ok(vec![
            CatalogEntry::OneParameter {
                family: LatticeFamily::L4Plus,
                p: 2.0,
                lo: 0.0,
                hi: std::f64::consts::FRAC_PI_6,
                closed_right: true,
            },
            CatalogEntry::OneParameter {
                family: LatticeFamily::L4Minus,
                p: 2.0,
                lo: 0.0,
                hi: std::f64::consts::FRAC_PI_6,
                closed_right: true,
            },
        ]);
    }
    if (p - p0).abs() <= P_TOL {
        return Ok(vec![
            CatalogEntry::Fixed(build_lattice(LatticeFamily::L1, p, None)?),
            CatalogEntry::Fixed(build_lattice(LatticeFamily::L1Prime, p, None)?),
            CatalogEntry::Fixed(build_lattice(LatticeFamily::L2Plus, p, None)?),
            CatalogEntry::Fixed(build_lattice(LatticeFamily::L2Minus, p, None)?),
        ]);
    }
    if p > 2.0 && p < p0 {
        return Ok(vec![
            CatalogEntry::Fixed(build_lattice(LatticeFamily::L1, p, None)?),
            CatalogEntry::Fixed(build_lattice(LatticeFamily::L1Prime, p, None)?),
        ]);
    }
    Ok(vec![
        CatalogEntry::Fixed(build_lattice(LatticeFamily::L2Plus, p, None)?),
        CatalogEntry::Fixed(build_lattice(LatticeFamily::L2Minus, p, None)?),
    ])
}
