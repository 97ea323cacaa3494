//! Exact rationals and the elementary number-theoretic functions used by the
//! series and classifier modules.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator, so equality is structural.
pub type Rat = num_rational::BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Renders a rational as `p/q`, or just `p` when the denominator is 1.
pub fn rat_to_string(r: &Rat) -> String {
    use alloc::format;
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q`. The result is normalized by the `Rat` constructor.
pub fn rat_from_str(s: &str) -> Result<Rat, NumthError> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt, NumthError> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| NumthError::BadRational)
    };
    match s.split_once('/') {
        None => Ok(Rat::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(NumthError::BadRational);
            }
            Ok(Rat::new(parse_int(p)?, den))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumthError {
    /// Input string is not of the form `p` or `p/q` with q != 0.
    BadRational,
    /// `kronecker_symbol` requires a prime second argument.
    NotPrime(u64),
}

impl fmt::Display for NumthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumthError::BadRational => write!(f, "malformed rational literal"),
            NumthError::NotPrime(p) => write!(f, "{p} is not prime"),
        }
    }
}

/// Sum of k-th powers of the divisors of n.
pub fn divisor_sigma(k: u32, n: u64) -> u128 {
    assert!(n >= 1, "divisor_sigma needs n >= 1");
    let mut total: u128 = 0;
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            total += (d as u128).pow(k);
            let e = n / d;
            if e != d {
                total += (e as u128).pow(k);
            }
        }
        d += 1;
    }
    total
}

/// Euler totient by trial-division factorization.
pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1, "euler_phi needs n >= 1");
    let mut phi = n;
    for (p, _) in factorize(n) {
        phi = phi / p * (p - 1);
    }
    phi
}

/// Trial-division factorization; returns (prime, exponent) pairs in
/// increasing order. Inputs in this crate stay small.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

/// Legendre symbol for odd primes; at p = 2 the Kronecker extension
/// ((a/2) = 0 for even a, 1 for a = ±1 mod 8, -1 for a = ±3 mod 8).
pub fn kronecker_symbol(a: i64, p: u64) -> Result<i8, NumthError> {
    if !is_prime(p) {
        return Err(NumthError::NotPrime(p));
    }
    if p == 2 {
        return Ok(match a.rem_euclid(8) {
            0 | 2 | 4 | 6 => 0,
            1 | 7 => 1,
            _ => -1,
        });
    }
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return Ok(0);
    }
    // Euler criterion: a^{(p-1)/2} mod p.
    let e = pow_mod(r, (p - 1) / 2, p);
    Ok(if e == 1 { 1 } else { -1 })
}

pub(crate) fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut bb = (b % m) as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * bb % m as u128;
        }
        bb = bb * bb % m as u128;
        e >>= 1;
    }
    acc as u64
}

/// Reduces a rational mod p; fails when p divides the denominator.
pub fn rat_mod_p(r: &Rat, p: u64) -> Option<u64> {
    let pm = BigInt::from(p);
    let den = r.denom() % &pm;
    if den.is_zero() {
        return None;
    }
    let num = ((r.numer() % &pm) + &pm) % &pm;
    let num = big_to_u64(&num);
    let den = big_to_u64(&(((den) + &pm) % &pm));
    Some((num as u128 * pow_mod(den, p - 2, p) as u128 % p as u128) as u64)
}

fn big_to_u64(b: &BigInt) -> u64 {
    debug_assert!(!b.is_negative());
    let (sign, digits) = b.to_u64_digits();
    match sign {
        Sign::NoSign => 0,
        _ => digits[0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigma_values() {
        assert_eq!(divisor_sigma(1, 6), 12);
        assert_eq!(divisor_sigma(1, 1), 1);
        assert_eq!(divisor_sigma(3, 2), 9);
    }

    #[test]
    fn sigma_multiplicative() {
        for n in 1..=1000u64 {
            for m in 1..=1000 / n {
                if num_integer::gcd(n, m) == 1 {
                    assert_eq!(
                        divisor_sigma(1, n) * divisor_sigma(1, m),
                        divisor_sigma(1, n * m)
                    );
                }
            }
        }
    }

    #[test]
    fn phi_values() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(12), 4);
        assert_eq!(euler_phi(11), 10);
    }

    #[test]
    fn kronecker_values() {
        // (-1/2) = 1 is what makes nu2(X0(2)) = 1 come out right.
        assert_eq!(kronecker_symbol(-1, 2).unwrap(), 1);
        // Euler criterion: (-3)^5 = -243 = -1 mod 11.
        assert_eq!(kronecker_symbol(-3, 11).unwrap(), -1);
        assert_eq!(kronecker_symbol(-3, 3).unwrap(), 0);
        assert!(kronecker_symbol(5, 12).is_err());
    }

    #[test]
    fn kronecker_multiplicative_odd_p() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
            for a in -20i64..20 {
                for b in -20i64..20 {
                    let lhs = kronecker_symbol(a, p).unwrap() as i64
                        * kronecker_symbol(b, p).unwrap() as i64;
                    let rhs = kronecker_symbol(a * b, p).unwrap() as i64;
                    assert_eq!(lhs, rhs, "a={a} b={b} p={p}");
                }
            }
        }
    }

    #[test]
    fn rational_round_trip() {
        let r = rat_frac(-22, 5);
        assert_eq!(rat_to_string(&r), "-22/5");
        assert_eq!(rat_from_str("-22/5").unwrap(), r);
        assert_eq!(rat_from_str("7").unwrap(), rat(7));
        assert_eq!(rat_from_str("6/4").unwrap(), rat_frac(3, 2));
        assert!(rat_from_str("1/0").is_err());
    }

    proptest! {
        #[test]
        fn rat_arithmetic_exact(a in -1000i64..1000, b in 1i64..1000,
                                c in -1000i64..1000, d in 1i64..1000) {
            let x = rat_frac(a, b);
            let y = rat_frac(c, d);
            prop_assert_eq!((x.clone() + y.clone()) - y, x);
        }
    }
}
