//! Thin wrapper around an arbitrary-precision binary float.
//!
//! Every [`Real`] carries its working precision in bits; arithmetic rounds to
//! that precision. Callers that need a reliability guarantee recompute at
//! doubled precision and compare (see `geometry::sigma_digits`).

use std::cell::RefCell;
use std::cmp::Ordering;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(
        Consts::new().expect("constants cache allocation"),
    );
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Arbitrary-precision real number with an attached working precision.
#[derive(Clone, Debug)]
pub struct Real {
    v: BigFloat,
    prec: usize,
}

impl Real {
    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn from_f64(x: f64, prec: usize) -> Real {
        Real {
            v: BigFloat::from_f64(x, prec),
            prec,
        }
    }

    pub fn from_u64(x: u64, prec: usize) -> Real {
        Real {
            v: BigFloat::from_u64(x, prec),
            prec,
        }
    }

    pub fn from_i64(x: i64, prec: usize) -> Real {
        Real {
            v: BigFloat::from_i64(x, prec),
            prec,
        }
    }

    pub fn zero(prec: usize) -> Real {
        Real::from_u64(0, prec)
    }

    pub fn one(prec: usize) -> Real {
        Real::from_u64(1, prec)
    }

    pub fn two(prec: usize) -> Real {
        Real::from_u64(2, prec)
    }

    /// Exact conversion from a big integer (the float mantissa grows as needed).
    pub fn from_bigint(x: &BigInt, prec: usize) -> Real {
        let mag = x.magnitude();
        if mag.is_zero() {
            return Real::zero(prec);
        }
        let words: Vec<u64> = mag.iter_u64_digits().collect();
        let bits = 64i64 * words.len() as i64;
        let sign = if x.is_negative() { Sign::Neg } else { Sign::Pos };
        let v = BigFloat::from_words(&words, sign, bits as astro_float::Exponent);
        Real { v, prec }
    }

    /// Conversion from an exact rational, rounded to `prec` bits.
    pub fn from_rational(x: &BigRational, prec: usize) -> Real {
        let n = Real::from_bigint(x.numer(), prec + 64);
        let d = Real::from_bigint(x.denom(), prec + 64);
        Real {
            v: n.v.div(&d.v, prec, RM),
            prec,
        }
    }

    /// The exact rational value of this float (its mantissa times a power of
    /// two). `None` for infinities and NaN.
    pub fn to_rational(&self) -> Option<BigRational> {
        let (words, _, sign, e, _) = self.v.as_raw_parts()?;
        let mut mag = BigUint::zero();
        for &w in words.iter().rev() {
            mag = (mag << 64u32) | BigUint::from(w);
        }
        if mag.is_zero() {
            return Some(BigRational::zero());
        }
        let mut num = BigInt::from(mag);
        if sign == Sign::Neg {
            num = -num;
        }
        // value = mantissa / 2^(64 * word_count) * 2^e
        let shift = 64i64 * words.len() as i64 - e as i64;
        Some(if shift >= 0 {
            BigRational::new(num, BigInt::from(1u8) << shift as usize)
        } else {
            BigRational::from_integer(num << (-shift) as usize)
        })
    }

    pub fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.v.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, e, _)) = self.v.as_raw_parts() else {
            return f64::NAN;
        };
        if words.iter().all(|&w| w == 0) {
            return 0.0;
        }
        let k = words.len();
        let top = words[k - 1] as f64;
        let next = if k >= 2 { words[k - 2] as f64 } else { 0.0 };
        let frac = top * 2f64.powi(-64) + next * 2f64.powi(-128);
        let v = frac * 2f64.powi(e);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    pub fn add(&self, o: &Real) -> Real {
        Real {
            v: self.v.add(&o.v, self.prec, RM),
            prec: self.prec,
        }
    }

    pub fn sub(&self, o: &Real) -> Real {
        Real {
            v: self.v.sub(&o.v, self.prec, RM),
            prec: self.prec,
        }
    }

    pub fn mul(&self, o: &Real) -> Real {
        Real {
            v: self.v.mul(&o.v, self.prec, RM),
            prec: self.prec,
        }
    }

    pub fn div(&self, o: &Real) -> Real {
        Real {
            v: self.v.div(&o.v, self.prec, RM),
            prec: self.prec,
        }
    }

    pub fn neg(&self) -> Real {
        Real {
            v: self.v.neg(),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Real {
        Real {
            v: self.v.abs(),
            prec: self.prec,
        }
    }

    pub fn recip(&self) -> Real {
        Real {
            v: self.v.reciprocal(self.prec, RM),
            prec: self.prec,
        }
    }

    pub fn sqrt(&self) -> Real {
        Real {
            v: self.v.sqrt(self.prec, RM),
            prec: self.prec,
        }
    }

    pub fn ln(&self) -> Real {
        Real {
            v: with_consts(|cc| self.v.ln(self.prec, RM, cc)),
            prec: self.prec,
        }
    }

    pub fn exp(&self) -> Real {
        Real {
            v: with_consts(|cc| self.v.exp(self.prec, RM, cc)),
            prec: self.prec,
        }
    }

    /// `self^e` for positive base.
    ///
    /// Integer exponents take a square-and-multiply path: the general
    /// routine insists on correct rounding, which cannot terminate when the
    /// result is exactly representable (e.g. a dyadic base raised to an
    /// integer power).
    pub fn pow(&self, e: &Real) -> Real {
        if let Some(r) = e.to_rational() {
            if r.is_integer() {
                if let Ok(n) = i64::try_from(r.to_integer()) {
                    if n.unsigned_abs() <= 1 << 20 {
                        return self.powi(n);
                    }
                }
            }
        }
        Real {
            v: with_consts(|cc| self.v.pow(&e.v, self.prec, RM, cc)),
            prec: self.prec,
        }
    }

    /// `self^n` by binary exponentiation.
    pub fn powi(&self, n: i64) -> Real {
        if n == 0 {
            return Real::one(self.prec);
        }
        let mut result = Real::one(self.prec);
        let mut base = self.clone();
        let mut m = n.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                result = result.mul(&base);
            }
            m >>= 1;
            if m > 0 {
                base = base.mul(&base);
            }
        }
        if n < 0 {
            result.recip()
        } else {
            result
        }
    }

    /// The exact power of two `2^k`.
    pub fn pow2(k: i64, prec: usize) -> Real {
        let e = i32::try_from(k + 1).expect("exponent within range");
        Real {
            v: BigFloat::from_words(&[1 << 63], Sign::Pos, e),
            prec,
        }
    }

    pub fn floor(&self) -> Real {
        Real {
            v: self.v.floor(),
            prec: self.prec,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative() && !self.v.is_zero()
    }

    pub fn cmp(&self, o: &Real) -> Result<Ordering> {
        match self.v.cmp(&o.v) {
            Some(c) => Ok(c.cmp(&0)),
            None => Err(Error::internal("comparison with NaN in high-precision path")),
        }
    }

    pub fn lt(&self, o: &Real) -> bool {
        matches!(self.v.cmp(&o.v), Some(c) if c < 0)
    }

    pub fn gt(&self, o: &Real) -> bool {
        matches!(self.v.cmp(&o.v), Some(c) if c > 0)
    }

    /// Midpoint of two values (used by bisection loops).
    pub fn mid(&self, o: &Real) -> Real {
        self.add(o).div(&Real::two(self.prec))
    }
}
