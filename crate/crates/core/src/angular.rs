//! Wigner 3-j symbols and the polarization-channel coupling ratio q.
//!
//! The six-level linkage needs only four 3-j values, but the symbol is
//! implemented in full generality (half-integer arguments, exact rational
//! arithmetic) so that it can be cross-checked against angular-momentum
//! identities up to j = 10 at 1e-12.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arguments of a 3-j symbol, stored as doubled integers so half-integer
/// momenta are exact.
///
/// Construction validates that every j is a non-negative half-integer, every
/// m a half-integer with |m| <= j, and that each (j, m) pair has consistent
/// parity (m runs over -j..j in integer steps). Triangle-rule violations and
/// a nonzero projection sum are *not* errors: they are valid inputs on which
/// the symbol vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreeJArgs {
    tj1: i64,
    tj2: i64,
    tj3: i64,
    tm1: i64,
    tm2: i64,
    tm3: i64,
}

impl ThreeJArgs {
    pub fn new(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> Result<Self> {
        let tj1 = twice(j1, "j1")?;
        let tj2 = twice(j2, "j2")?;
        let tj3 = twice(j3, "j3")?;
        let tm1 = twice(m1, "m1")?;
        let tm2 = twice(m2, "m2")?;
        let tm3 = twice(m3, "m3")?;
        for (tj, name) in [(tj1, "j1"), (tj2, "j2"), (tj3, "j3")] {
            if tj < 0 {
                return Err(Error::InvalidInput(format!("{name} must be non-negative")));
            }
        }
        for ((tj, tm), name) in [(tj1, tm1), (tj2, tm2), (tj3, tm3)]
            .into_iter()
            .zip(["1", "2", "3"])
        {
            if tm.abs() > tj {
                return Err(Error::InvalidInput(format!("|m{name}| exceeds j{name}")));
            }
            if (tj - tm) % 2 != 0 {
                return Err(Error::InvalidInput(format!(
                    "m{name} is not of the form -j{name}..j{name} in integer steps"
                )));
            }
        }
        Ok(Self {
            tj1,
            tj2,
            tj3,
            tm1,
            tm2,
            tm3,
        })
    }
}

fn twice(v: f64, name: &str) -> Result<i64> {
    let t = 2.0 * v;
    if !t.is_finite() || t != t.round() || t.abs() > 1e9 {
        return Err(Error::InvalidInput(format!(
            "{name} = {v} is not a half-integer"
        )));
    }
    Ok(t.round() as i64)
}

fn factorial(n: i64) -> BigInt {
    debug_assert!(n >= 0);
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// Exact Wigner 3-j symbol via the Racah single-sum closed form, evaluated in
/// arbitrary-precision rational arithmetic with one final square root in f64.
///
/// Returns 0 when m1 + m2 + m3 != 0, when the triangle rule fails, or when
/// j1 + j2 + j3 is not an integer.
pub fn wigner3j(args: &ThreeJArgs) -> f64 {
    let ThreeJArgs {
        tj1,
        tj2,
        tj3,
        tm1,
        tm2,
        tm3,
    } = *args;

    if tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    if (tj1 + tj2 + tj3) % 2 != 0 {
        return 0.0;
    }
    if tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() {
        return 0.0;
    }

    // All of these are integers (in units of 1, not 1/2) once the checks
    // above pass.
    let a1 = (tj1 + tj2 - tj3) / 2;
    let a2 = (tj1 - tj2 + tj3) / 2;
    let a3 = (-tj1 + tj2 + tj3) / 2;
    let jsum1 = (tj1 + tj2 + tj3) / 2 + 1;

    let triangle = BigRational::new(
        factorial(a1) * factorial(a2) * factorial(a3),
        factorial(jsum1),
    );

    let mut msq = triangle;
    for (tj, tm) in [(tj1, tm1), (tj2, tm2), (tj3, tm3)] {
        msq *= BigRational::from(factorial((tj + tm) / 2) * factorial((tj - tm) / 2));
    }

    // series sum_k (-1)^k / [k! (j1+j2-j3-k)! (j1-m1-k)! (j2+m2-k)!
    //                        (j3-j2+m1+k)! (j3-j1-m2+k)!]
    let b1 = a1; // j1+j2-j3
    let b2 = (tj1 - tm1) / 2;
    let b3 = (tj2 + tm2) / 2;
    let c1 = (tj3 - tj2 + tm1) / 2;
    let c2 = (tj3 - tj1 - tm2) / 2;
    let kmin = 0.max(-c1).max(-c2);
    let kmax = b1.min(b2).min(b3);
    if kmin > kmax {
        return 0.0;
    }
    let mut series = BigRational::zero();
    for k in kmin..=kmax {
        let den = factorial(k)
            * factorial(b1 - k)
            * factorial(b2 - k)
            * factorial(b3 - k)
            * factorial(c1 + k)
            * factorial(c2 + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            series += term;
        } else {
            series -= term;
        }
    }
    if series.is_zero() {
        return 0.0;
    }

    // value = sign * sqrt(msq) * series, with sign = (-1)^(j1-j2-m3)
    let exact_sq = msq * &series * &series;
    let magnitude = exact_sq
        .to_f64()
        .expect("3-j magnitude representable in f64")
        .sqrt();
    let mut sign = if series.is_negative() { -1.0 } else { 1.0 };
    if ((tj1 - tj2 - tm3) / 2).rem_euclid(2) == 1 {
        sign = -sign;
    }
    sign * magnitude
}

/// Ratio q = |3j(1,1,2; 1,1,-2)| / |3j(1,1,2; -1,1,0)| of the two Stokes
/// coupling strengths within one circular polarization channel.
///
/// Computed from the 3-j symbols, never hard-coded; equals sqrt(6) for this
/// linkage.
pub fn coupling_ratio_q() -> f64 {
    let strong = ThreeJArgs::new(1.0, 1.0, 2.0, 1.0, 1.0, -2.0).expect("valid args");
    let weak = ThreeJArgs::new(1.0, 1.0, 2.0, -1.0, 1.0, 0.0).expect("valid args");
    wigner3j(&strong).abs() / wigner3j(&weak).abs()
}

/// Cached q for hot paths.
pub fn q() -> f64 {
    static Q: OnceLock<f64> = OnceLock::new();
    *Q.get_or_init(coupling_ratio_q)
}
