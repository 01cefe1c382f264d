//! Sign + log-magnitude numbers for long products of theta factors.

use std::fmt;
use std::iter::Product;
use std::ops::{Div, DivAssign, Mul, MulAssign};

use serde::{Deserialize, Serialize};

/// A real number stored as `sign * exp(logmag)`.
///
/// `sign` is one of -1, 0, +1; `logmag` is meaningless when `sign == 0`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LogSigned {
    pub sign: i8,
    pub logmag: f64,
}

impl LogSigned {
    pub const ONE: LogSigned = LogSigned { sign: 1, logmag: 0.0 };
    pub const ZERO: LogSigned = LogSigned { sign: 0, logmag: 0.0 };

    pub fn new(sign: i8, logmag: f64) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            LogSigned { sign: sign.signum(), logmag }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogSigned {
                sign: if x > 0.0 { 1 } else { -1 },
                logmag: x.abs().ln(),
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.logmag.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(self) -> bool {
        self.sign > 0
    }

    /// Multiplicative inverse. Inverting zero yields a non-finite log magnitude.
    pub fn recip(self) -> Self {
        if self.sign == 0 {
            LogSigned { sign: 0, logmag: f64::INFINITY }
        } else {
            LogSigned { sign: self.sign, logmag: -self.logmag }
        }
    }

    pub fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::ONE,
            _ if self.sign == 0 => Self::ZERO,
            _ => LogSigned {
                sign: if k % 2 == 0 { 1 } else { self.sign },
                logmag: self.logmag * f64::from(k),
            },
        }
    }

    /// Square root of a nonnegative value; `None` for negative input.
    pub fn sqrt(self) -> Option<Self> {
        match self.sign {
            0 => Some(Self::ZERO),
            1 => Some(LogSigned { sign: 1, logmag: 0.5 * self.logmag }),
            _ => None,
        }
    }

    /// Relative closeness test, `|a - b| <= tol * max(|a|, |b|)`, done in log space.
    pub fn approx_eq(self, other: Self, tol: f64) -> bool {
        if self.sign != other.sign {
            return false;
        }
        if self.sign == 0 {
            return true;
        }
        // |exp(d) - 1| <= tol for the smaller magnitude relative to the larger
        let d = (self.logmag - other.logmag).abs();
        -(-d).exp_m1() <= tol
    }
}

impl Default for LogSigned {
    fn default() -> Self {
        Self::ONE
    }
}

impl PartialEq for LogSigned {
    fn eq(&self, other: &Self) -> bool {
        self.sign == other.sign && (self.sign == 0 || self.logmag == other.logmag)
    }
}

impl From<f64> for LogSigned {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl Mul for LogSigned {
    type Output = LogSigned;
    fn mul(self, rhs: LogSigned) -> LogSigned {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        LogSigned { sign: self.sign * rhs.sign, logmag: self.logmag + rhs.logmag }
    }
}

impl Div for LogSigned {
    type Output = LogSigned;
    fn div(self, rhs: LogSigned) -> LogSigned {
        self * rhs.recip()
    }
}

impl MulAssign for LogSigned {
    fn mul_assign(&mut self, rhs: LogSigned) {
        *self = *self * rhs;
    }
}

impl DivAssign for LogSigned {
    fn div_assign(&mut self, rhs: LogSigned) {
        *self = *self / rhs;
    }
}

impl Mul<f64> for LogSigned {
    type Output = LogSigned;
    fn mul(self, rhs: f64) -> LogSigned {
        self * LogSigned::from_f64(rhs)
    }
}

impl Div<f64> for LogSigned {
    type Output = LogSigned;
    fn div(self, rhs: f64) -> LogSigned {
        self / LogSigned::from_f64(rhs)
    }
}

impl Product for LogSigned {
    fn product<I: Iterator<Item = LogSigned>>(iter: I) -> LogSigned {
        iter.fold(LogSigned::ONE, |acc, x| acc * x)
    }
}

impl fmt::Display for LogSigned {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "+exp({})", self.logmag),
            _ => write!(f, "-exp({})", self.logmag),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_absorbs() {
        let z = LogSigned::from_f64(0.0);
        assert!(z.is_zero());
        assert!((z * LogSigned::from_f64(3.0)).is_zero());
        assert_eq!(z.to_f64(), 0.0);
    }

    #[test]
    fn no_overflow_in_long_products() {
        let big: LogSigned = (0..1000).map(|_| LogSigned::from_f64(1e300)).product();
        let back: LogSigned = (0..1000).map(|_| LogSigned::from_f64(1e-300)).product();
        let one = big * back;
        assert!(one.approx_eq(LogSigned::ONE, 1e-10));
    }

    #[test]
    fn powi_sign() {
        let x = LogSigned::from_f64(-2.0);
        assert_eq!(x.powi(2).to_f64(), 4.0);
        assert!((x.powi(3).to_f64() + 8.0).abs() < 1e-12);
        assert!(x.sqrt().is_none());
    }

    proptest! {
        #[test]
        fn roundtrip(x in -1e100f64..1e100) {
            let y = LogSigned::from_f64(x).to_f64();
            prop_assert!((y - x).abs() <= 1e-13 * x.abs());
        }

        #[test]
        fn mul_matches_f64(a in -1e3f64..1e3, b in -1e3f64..1e3) {
            let prod = (LogSigned::from_f64(a) * LogSigned::from_f64(b)).to_f64();
            prop_assert!((prod - a * b).abs() <= 1e-13 * (a * b).abs().max(1e-300));
        }

        #[test]
        fn commutative_associative(a in -50f64..50.0, b in -50f64..50.0, c in -50f64..50.0) {
            let (a, b, c) = (LogSigned::from_f64(a), LogSigned::from_f64(b), LogSigned::from_f64(c));
            prop_assert!((a * b).approx_eq(b * a, 1e-15));
            prop_assert!(((a * b) * c).approx_eq(a * (b * c), 1e-14));
        }
    }
}
