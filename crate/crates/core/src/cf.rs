//! Continued fractions with exact big-rational arithmetic.
//!
//! A [`ContinuedFraction`] is either finite (a rational number), eventually
//! periodic (a quadratic irrational), or the analytically known expansion of
//! Euler's number. On top of the digit stream this module provides
//! convergents, continuants, cylinder intervals, the best-approximation step
//! function [`psi`], and estimators for its limit statistics
//! ([`dirichlet_estimate`], [`lagrange_estimate`]).
//!
//! Digit indexing is 1-based: `digit(1)` is the first partial quotient after
//! the integer part. Convergent indexing starts at 0 with `p0/q0 = a0/1`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Euclid, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real number given by its continued-fraction expansion.
///
/// Invariants (enforced by the constructors and by deserialization): all
/// partial quotients are at least 1, a finite expansion does not end in a
/// lone digit 1 (merged into the previous digit), a period is nonempty,
/// primitive, and not absorbable into the preperiod.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CfRepr", into = "CfRepr")]
pub enum ContinuedFraction {
    Finite {
        a0: i64,
        digits: Vec<u64>,
    },
    Periodic {
        a0: i64,
        preperiod: Vec<u64>,
        period: Vec<u64>,
    },
    /// Euler's number: digits 1, 2, 1, 1, 4, 1, 1, 6, ... (`a_i = 2(i+1)/3`
    /// when `i = 2 mod 3`, else 1), integer part 2.
    E,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum CfRepr {
    Finite {
        #[serde(default)]
        a0: i64,
        #[serde(default)]
        digits: Vec<u64>,
    },
    Periodic {
        #[serde(default)]
        a0: i64,
        #[serde(default)]
        preperiod: Vec<u64>,
        period: Vec<u64>,
    },
    E,
}

impl TryFrom<CfRepr> for ContinuedFraction {
    type Error = Error;
    fn try_from(r: CfRepr) -> Result<Self> {
        match r {
            CfRepr::Finite { a0, digits } => ContinuedFraction::finite(a0, digits),
            CfRepr::Periodic {
                a0,
                preperiod,
                period,
            } => ContinuedFraction::periodic(a0, preperiod, period),
            CfRepr::E => Ok(ContinuedFraction::E),
        }
    }
}

impl From<ContinuedFraction> for CfRepr {
    fn from(cf: ContinuedFraction) -> CfRepr {
        match cf {
            ContinuedFraction::Finite { a0, digits } => CfRepr::Finite { a0, digits },
            ContinuedFraction::Periodic {
                a0,
                preperiod,
                period,
            } => CfRepr::Periodic {
                a0,
                preperiod,
                period,
            },
            ContinuedFraction::E => CfRepr::E,
        }
    }
}

fn check_digits(digits: &[u64]) -> Result<()> {
    if digits.iter().any(|&d| d == 0) {
        return Err(Error::domain("partial quotients must be at least 1"));
    }
    Ok(())
}

impl ContinuedFraction {
    pub fn finite(a0: i64, mut digits: Vec<u64>) -> Result<Self> {
        check_digits(&digits)?;
        if digits.last() == Some(&1) {
            if digits.len() == 1 {
                let a0 = a0
                    .checked_add(1)
                    .ok_or_else(|| Error::domain("integer part out of range"))?;
                return Ok(ContinuedFraction::Finite { a0, digits: vec![] });
            }
            digits.pop();
            *digits.last_mut().unwrap() += 1;
        }
        Ok(ContinuedFraction::Finite { a0, digits })
    }

    pub fn periodic(a0: i64, mut preperiod: Vec<u64>, mut period: Vec<u64>) -> Result<Self> {
        check_digits(&preperiod)?;
        check_digits(&period)?;
        if period.is_empty() {
            return Err(Error::domain("period must be nonempty"));
        }
        // Reduce to the primitive period.
        for d in 1..=period.len() / 2 {
            if period.len() % d == 0 && period.chunks(d).all(|c| c == &period[..d]) {
                period.truncate(d);
                break;
            }
        }
        // Absorb preperiod digits that merely shift the cycle.
        while preperiod.last() == period.last() {
            preperiod.pop();
            period.rotate_right(1);
        }
        Ok(ContinuedFraction::Periodic {
            a0,
            preperiod,
            period,
        })
    }

    /// Expansion of `num/den` by the Euclidean algorithm.
    pub fn from_rational(num: &BigInt, den: &BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::domain("denominator must be nonzero"));
        }
        let (mut n, mut d) = if den.is_negative() {
            (-num.clone(), -den.clone())
        } else {
            (num.clone(), den.clone())
        };
        let a0_big = n.div_euclid(&d);
        let a0 = a0_big
            .to_i64()
            .ok_or_else(|| Error::domain("integer part out of range"))?;
        n -= &a0_big * &d;
        let mut digits = Vec::new();
        while !n.is_zero() {
            std::mem::swap(&mut n, &mut d);
            let q = n.div_euclid(&d);
            n -= &q * &d;
            digits.push(
                q.to_u64()
                    .ok_or_else(|| Error::domain("partial quotient out of range"))?,
            );
        }
        ContinuedFraction::finite(a0, digits)
    }

    pub fn a0(&self) -> i64 {
        match self {
            ContinuedFraction::Finite { a0, .. } | ContinuedFraction::Periodic { a0, .. } => *a0,
            ContinuedFraction::E => 2,
        }
    }

    /// Partial quotient `a_i` (1-indexed); `None` past the end of a finite
    /// expansion.
    pub fn digit(&self, i: usize) -> Option<u64> {
        debug_assert!(i >= 1);
        match self {
            ContinuedFraction::Finite { digits, .. } => digits.get(i - 1).copied(),
            ContinuedFraction::Periodic {
                preperiod, period, ..
            } => {
                if i <= preperiod.len() {
                    Some(preperiod[i - 1])
                } else {
                    Some(period[(i - preperiod.len() - 1) % period.len()])
                }
            }
            ContinuedFraction::E => {
                if i % 3 == 2 {
                    Some(2 * (i as u64 + 1) / 3)
                } else {
                    Some(1)
                }
            }
        }
    }

    /// First `n` partial quotients; fails when a finite expansion is shorter.
    pub fn digits_prefix(&self, n: usize) -> Result<Vec<u64>> {
        let out = self.digits_clamped(n);
        if out.len() < n {
            return Err(Error::horizon(format!(
                "expansion has only {} digits, {} requested",
                out.len(),
                n
            )));
        }
        Ok(out)
    }

    /// First `min(n, available)` partial quotients.
    pub fn digits_clamped(&self, n: usize) -> Vec<u64> {
        (1..=n).map_while(|i| self.digit(i)).collect()
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, ContinuedFraction::Finite { .. })
    }

    /// Whether the partial quotients are bounded.
    pub fn is_bounded(&self) -> bool {
        !matches!(self, ContinuedFraction::E)
    }

    /// Largest partial quotient, when bounded.
    pub fn digit_bound(&self) -> Option<u64> {
        match self {
            ContinuedFraction::Finite { digits, .. } => {
                Some(digits.iter().copied().max().unwrap_or(0))
            }
            ContinuedFraction::Periodic {
                preperiod, period, ..
            } => preperiod.iter().chain(period).copied().max(),
            ContinuedFraction::E => None,
        }
    }

    /// Number of partial quotients of a finite expansion.
    pub fn depth(&self) -> Option<usize> {
        match self {
            ContinuedFraction::Finite { digits, .. } => Some(digits.len()),
            _ => None,
        }
    }

    pub fn value_rational(&self) -> Option<BigRational> {
        match self {
            ContinuedFraction::Finite { .. } => {
                let c = self.convergents(self.depth().unwrap());
                let last = c.last().unwrap();
                Some(BigRational::new(last.p.clone(), last.q.clone()))
            }
            _ => None,
        }
    }

    /// Convergents `p_nu/q_nu` for `nu = 0..=max_index` (clamped to the depth
    /// of a finite expansion).
    pub fn convergents(&self, max_index: usize) -> Vec<Convergent> {
        let mut out = Vec::with_capacity(max_index + 1);
        let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
        let (mut p, mut q) = (BigInt::from(self.a0()), BigInt::one());
        out.push(Convergent {
            index: 0,
            p: p.clone(),
            q: q.clone(),
        });
        for nu in 1..=max_index {
            let Some(a) = self.digit(nu) else { break };
            let a = BigInt::from(a);
            let p_next = &a * &p + &p_prev;
            let q_next = &a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            out.push(Convergent {
                index: nu,
                p: p.clone(),
                q: q.clone(),
            });
        }
        out
    }

    pub fn convergent(&self, nu: usize) -> Option<Convergent> {
        let c = self.convergents(nu);
        if c.len() == nu + 1 {
            c.into_iter().next_back()
        } else {
            None
        }
    }

    /// Enclosure `[lo, hi]` of the value, of width below `2^-bits`
    /// (exact for finite expansions).
    pub fn value_interval(&self, bits: usize) -> (BigRational, BigRational) {
        if let Some(v) = self.value_rational() {
            return (v.clone(), v);
        }
        let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
        let (mut p, mut q) = (BigInt::from(self.a0()), BigInt::one());
        let mut nu = 0usize;
        loop {
            nu += 1;
            let a = BigInt::from(self.digit(nu).expect("infinite expansion"));
            let p_next = &a * &p + &p_prev;
            let q_next = &a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            // Interval width is 1/(q_prev * q) < 2^-bits once the product
            // has more than `bits + 1` bits.
            if nu >= 2 && q_prev.bits() + q.bits() >= bits as u64 + 2 {
                let lo = BigRational::new(p_prev.clone(), q_prev.clone());
                let hi = BigRational::new(p.clone(), q.clone());
                return if lo <= hi { (lo, hi) } else { (hi, lo) };
            }
        }
    }

    /// Enclosure of the tail value `[a_start; a_{start+1}, ...]`
    /// (1-indexed start, exact for finite expansions).
    pub fn tail_interval(&self, start: usize, bits: usize) -> Result<(BigRational, BigRational)> {
        debug_assert!(start >= 1);
        if let Some(len) = self.depth() {
            if start > len {
                return Err(Error::domain("tail index past the last digit"));
            }
            let digits: Vec<u64> = (start..=len).map(|i| self.digit(i).unwrap()).collect();
            let v = eval_finite_word(&digits);
            return Ok((v.clone(), v));
        }
        let count = bits + 4;
        let (mut h_prev, mut k_prev) = (BigInt::one(), BigInt::zero());
        let mut h = BigInt::from(self.digit(start).expect("infinite expansion"));
        let mut k = BigInt::one();
        for j in 1..count {
            let a = BigInt::from(self.digit(start + j).expect("infinite expansion"));
            let h_next = &a * &h + &h_prev;
            let k_next = &a * &k + &k_prev;
            h_prev = std::mem::replace(&mut h, h_next);
            k_prev = std::mem::replace(&mut k, k_next);
        }
        let lo = BigRational::new(h_prev, k_prev);
        let hi = BigRational::new(h, k);
        Ok(if lo <= hi { (lo, hi) } else { (hi, lo) })
    }
}

/// Value of the finite word `[d_0; d_1, ..]` read as `d_0 + 1/(d_1 + ...)`.
fn eval_finite_word(digits: &[u64]) -> BigRational {
    let mut v = BigRational::from_integer(BigInt::from(
        *digits.last().expect("nonempty word"),
    ));
    for &d in digits[..digits.len() - 1].iter().rev() {
        v = BigRational::from_integer(BigInt::from(d)) + v.recip();
    }
    v
}

impl fmt::Display for ContinuedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(v: &[u64]) -> String {
            v.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        }
        match self {
            ContinuedFraction::Finite { a0, digits } => {
                if digits.is_empty() {
                    write!(f, "[{a0}]")
                } else {
                    write!(f, "[{a0}; {}]", join(digits))
                }
            }
            ContinuedFraction::Periodic {
                a0,
                preperiod,
                period,
            } => {
                if preperiod.is_empty() {
                    write!(f, "[{a0}; ({})]", join(period))
                } else {
                    write!(f, "[{a0}; {}, ({})]", join(preperiod), join(period))
                }
            }
            ContinuedFraction::E => write!(f, "e"),
        }
    }
}

/// One convergent `p/q` of an expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergent {
    pub index: usize,
    pub p: BigInt,
    pub q: BigInt,
}

impl Convergent {
    pub fn value(&self) -> BigRational {
        BigRational::new(self.p.clone(), self.q.clone())
    }
}

/// Continuant of a word of partial quotients (empty word gives 1).
pub fn continuant(word: &[u64]) -> BigUint {
    continuant_pair(word).0
}

/// `(K(word), K(word without its last digit))`; the empty word gives (1, 0).
pub fn continuant_pair(word: &[u64]) -> (BigUint, BigUint) {
    let mut k = BigUint::one();
    let mut k_prev = BigUint::zero();
    for &a in word {
        let next = BigUint::from(a) * &k + &k_prev;
        k_prev = std::mem::replace(&mut k, next);
    }
    (k, k_prev)
}

/// Continuant in machine arithmetic; `None` on overflow.
pub fn continuant_u64(word: &[u64]) -> Option<u64> {
    let mut k = 1u64;
    let mut k_prev = 0u64;
    for &a in word {
        let next = a.checked_mul(k)?.checked_add(k_prev)?;
        k_prev = std::mem::replace(&mut k, next);
    }
    Some(k)
}

/// The interval of numbers in `[0, 1)` whose expansion starts with a given
/// word. Orientation alternates with the word length: even length means
/// closed on the left, odd length closed on the right.
#[derive(Clone, Debug)]
pub struct Cylinder {
    pub word: Vec<u64>,
    pub lower: BigRational,
    pub upper: BigRational,
    pub closed_left: bool,
    pub closed_right: bool,
}

pub fn cylinder(word: &[u64]) -> Result<Cylinder> {
    check_digits(word)?;
    if word.is_empty() {
        return Ok(Cylinder {
            word: vec![],
            lower: BigRational::zero(),
            upper: BigRational::one(),
            closed_left: true,
            closed_right: false,
        });
    }
    let (q, q_prev) = continuant_pair(word);
    let (p, p_prev) = continuant_pair(&word[1..]);
    let endpoint = BigRational::new(BigInt::from(p.clone()), BigInt::from(q.clone()));
    let mediant = BigRational::new(BigInt::from(&p + &p_prev), BigInt::from(&q + &q_prev));
    let even = word.len() % 2 == 0;
    let (lower, upper) = if even {
        (endpoint, mediant)
    } else {
        (mediant, endpoint)
    };
    Ok(Cylinder {
        word: word.to_vec(),
        lower,
        upper,
        closed_left: even,
        closed_right: !even,
    })
}

impl Cylinder {
    pub fn length(&self) -> BigRational {
        &self.upper - &self.lower
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        let left = if self.closed_left {
            x >= &self.lower
        } else {
            x > &self.lower
        };
        let right = if self.closed_right {
            x <= &self.upper
        } else {
            x < &self.upper
        };
        left && right
    }
}

/// Best-approximation error at time `t`: the distance from the nearest
/// integer of `q_nu * alpha`, where `q_nu` is the largest convergent
/// denominator not exceeding `t`.
#[derive(Clone, Debug)]
pub struct PsiPoint {
    /// Index of the governing convergent.
    pub nu: usize,
    pub lower: BigRational,
    pub upper: BigRational,
}

impl PsiPoint {
    pub fn value(&self) -> f64 {
        rat_to_f64(&((&self.lower + &self.upper) / BigRational::from_integer(BigInt::from(2))))
    }
}

/// Evaluate the best-approximation step function at `t >= 1` with an
/// enclosure of width about `2^-bits`.
pub fn psi(cf: &ContinuedFraction, t: f64, bits: usize) -> Result<PsiPoint> {
    if !t.is_finite() || t < 1.0 {
        return Err(Error::domain("time must be a finite value at least 1"));
    }
    let t_rat = BigRational::from_float(t).unwrap();

    // Largest nu with q_nu <= t (ties resolved to the larger index).
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    let (mut p, mut q) = (BigInt::from(cf.a0()), BigInt::one());
    let mut nu = 0usize;
    loop {
        let Some(a) = cf.digit(nu + 1) else {
            // Rational input, all denominators at most t: exact zero.
            return Ok(PsiPoint {
                nu,
                lower: BigRational::zero(),
                upper: BigRational::zero(),
            });
        };
        let a = BigInt::from(a);
        let p_next = &a * &p + &p_prev;
        let q_next = &a * &q + &q_prev;
        if BigRational::from_integer(q_next.clone()) > t_rat {
            break;
        }
        p_prev = std::mem::replace(&mut p, p_next);
        q_prev = std::mem::replace(&mut q, q_next);
        nu += 1;
    }

    if let Some(alpha) = cf.value_rational() {
        let err = (BigRational::from_integer(q) * alpha
            - BigRational::from_integer(p))
        .abs();
        return Ok(PsiPoint {
            nu,
            lower: err.clone(),
            upper: err,
        });
    }

    // xi_nu = 1 / (q_nu * (alpha_{nu+1} + q_{nu-1}/q_nu))
    let s = BigRational::new(q_prev.clone(), q.clone());
    let tail_bits = bits + q.bits() as usize + 8;
    let (t_lo, t_hi) = cf.tail_interval(nu + 1, tail_bits)?;
    let q_rat = BigRational::from_integer(q);
    let lower = (&q_rat * (t_hi + &s)).recip();
    let upper = (&q_rat * (t_lo + &s)).recip();
    Ok(PsiPoint { nu, lower, upper })
}

/// Sup statistics of `t * psi(t)` over windows of constancy.
#[derive(Clone, Debug, Serialize)]
pub struct DirichletEstimate {
    pub horizon: usize,
    /// Largest window supremum seen over the whole horizon.
    pub running_sup: f64,
    /// Largest window supremum over the second half of the horizon; this is
    /// the limit-superior estimate.
    pub tail_sup: f64,
    pub argmax: usize,
}

/// Inf statistics of `t * psi(t)` over windows of constancy.
#[derive(Clone, Debug, Serialize)]
pub struct LagrangeEstimate {
    pub horizon: usize,
    pub running_inf: f64,
    /// Smallest window infimum over the second half of the horizon; this is
    /// the limit-inferior estimate.
    pub tail_inf: f64,
    pub argmin: usize,
}

fn window_quantities(
    cf: &ContinuedFraction,
    horizon: usize,
    bits: usize,
) -> Result<Vec<(usize, f64, f64)>> {
    if cf.is_rational() {
        return Err(Error::horizon(
            "limit statistics of a rational are degenerate; extend the expansion or use the flow",
        ));
    }
    if horizon < 2 {
        return Err(Error::domain("horizon must be at least 2"));
    }
    let convs = cf.convergents(horizon + 1);
    let mut out = Vec::with_capacity(horizon);
    for nu in 0..=horizon {
        let q = &convs[nu].q;
        let q_next = &convs[nu + 1].q;
        if q_next == q {
            // Empty window (only nu = 0 with a leading digit 1).
            continue;
        }
        let q_prev = if nu == 0 {
            BigInt::zero()
        } else {
            convs[nu - 1].q.clone()
        };
        let s = BigRational::new(q_prev, q.clone());
        let tail_bits = bits + q.bits() as usize + 8;
        let (t_lo, t_hi) = cf.tail_interval(nu + 1, tail_bits)?;
        let q_rat = BigRational::from_integer(q.clone());
        let xi_lo = (&q_rat * (t_hi + &s)).recip();
        let xi_hi = (&q_rat * (t_lo + &s)).recip();
        let xi_mid = (xi_lo + xi_hi) / BigRational::from_integer(BigInt::from(2));
        let sup = rat_to_f64(&(BigRational::from_integer(q_next.clone()) * &xi_mid));
        let inf = rat_to_f64(&(q_rat * xi_mid));
        out.push((nu, sup, inf));
    }
    Ok(out)
}

pub fn dirichlet_estimate(
    cf: &ContinuedFraction,
    horizon: usize,
    bits: usize,
) -> Result<DirichletEstimate> {
    let w = window_quantities(cf, horizon, bits)?;
    let (mut running_sup, mut argmax) = (f64::NEG_INFINITY, 0);
    let mut tail_sup = f64::NEG_INFINITY;
    for &(nu, sup, _) in &w {
        if sup > running_sup {
            running_sup = sup;
            argmax = nu;
        }
        if nu >= horizon / 2 {
            tail_sup = tail_sup.max(sup);
        }
    }
    Ok(DirichletEstimate {
        horizon,
        running_sup,
        tail_sup,
        argmax,
    })
}

pub fn lagrange_estimate(
    cf: &ContinuedFraction,
    horizon: usize,
    bits: usize,
) -> Result<LagrangeEstimate> {
    let w = window_quantities(cf, horizon, bits)?;
    let (mut running_inf, mut argmin) = (f64::INFINITY, 0);
    let mut tail_inf = f64::INFINITY;
    for &(nu, _, inf) in &w {
        if inf < running_inf {
            running_inf = inf;
            argmin = nu;
        }
        if nu >= horizon / 2 {
            tail_inf = tail_inf.min(inf);
        }
    }
    Ok(LagrangeEstimate {
        horizon,
        running_inf,
        tail_inf,
        argmin,
    })
}

/// Rational to double, robust for components far beyond the double range.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    if r.numer().is_zero() {
        return 0.0;
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let sn = (nb - 900).max(0) as usize;
    let sd = (db - 900).max(0) as usize;
    let n = (r.numer() >> sn).to_f64().unwrap();
    let d = (r.denom() >> sd).to_f64().unwrap();
    let shift = sn as i64 - sd as i64;
    (n / d) * 2f64.powi(shift.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
}
