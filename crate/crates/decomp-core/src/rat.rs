//! Exact rational arithmetic for densities, thresholds and budgets.
//!
//! Certificates never compare floats. Fractional-power thresholds like
//! ε^{1/12} are replaced by the smallest multiple of 1/10^6 that is an upper
//! bound for the true root, which only ever relaxes a check.

use alloc::string::String;
use alloc::string::ToString;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = num_rational::BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(x: i64) -> Rat {
    Rat::from_integer(BigInt::from(x))
}

pub fn rat_usize(x: usize) -> Rat {
    Rat::from_integer(BigInt::from(x))
}

pub fn ratio_of(num: usize, den: usize) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

const ROOT_SCALE: u32 = 6; // roots are rounded up to a multiple of 10^-6

/// Smallest multiple of 10^-6 that is >= x^(1/n), for x in [0, 1].
pub fn nth_root_upper(x: &Rat, n: u32) -> Rat {
    assert!(n >= 1);
    assert!(!x.is_negative());
    if x.is_zero() {
        return Rat::zero();
    }
    let scale = BigInt::from(10u32).pow(ROOT_SCALE);
    // smallest t with (t/scale)^n >= x, i.e. t^n * x.den >= x.num * scale^n
    let target_num = x.numer() * scale.pow(n);
    let target_den = x.denom().clone();
    let mut t = (&target_num / &target_den).nth_root(n);
    while t.pow(n) * &target_den < target_num {
        t += 1;
    }
    Rat::new(t, scale)
}

pub fn sqrt_upper(x: &Rat) -> Rat {
    nth_root_upper(x, 2)
}

/// x^k for small non-negative k.
pub fn pow(x: &Rat, k: u32) -> Rat {
    let mut out = Rat::one();
    for _ in 0..k {
        out *= x;
    }
    out
}

pub fn min(a: Rat, b: Rat) -> Rat {
    if a <= b {
        a
    } else {
        b
    }
}

pub fn max(a: Rat, b: Rat) -> Rat {
    if a >= b {
        a
    } else {
        b
    }
}

/// Exact comparison of a rational against num/den without constructing a Rat.
pub fn rat_ge_ratio(x: &Rat, num: usize, den: usize) -> bool {
    x >= &ratio_of(num, den)
}

/// Canonical "p/q" rendering used by reports; integers render without "/1".
pub fn display(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        let mut s = x.numer().to_string();
        s.push('/');
        s.push_str(&x.denom().to_string());
        s
    }
}

pub fn approx_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_upper_bounds_are_tight_upper_bounds() {
        let x = rat(1, 2);
        let r = nth_root_upper(&x, 12);
        // r^12 >= 1/2 but (r - 10^-6)^12 < 1/2
        assert!(pow(&r, 12) >= x);
        let step = rat(1, 1_000_000);
        assert!(pow(&(&r - &step), 12) < x);
    }

    #[test]
    fn exact_roots_stay_exact() {
        assert_eq!(nth_root_upper(&rat(1, 4), 2), rat(1, 2));
        assert_eq!(nth_root_upper(&rat_int(1), 5), rat_int(1));
        assert_eq!(nth_root_upper(&Rat::zero(), 3), Rat::zero());
    }

    #[test]
    fn display_forms() {
        assert_eq!(display(&rat(2, 4)), "1/2");
        assert_eq!(display(&rat_int(3)), "3");
    }
}
