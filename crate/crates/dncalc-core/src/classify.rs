//! Invariants of the modular curves X0(N) — genus, elliptic-point and cusp
//! counts — and the necessary-condition filters that cut the `(N, d)`
//! candidate list down to seventeen pairs.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Signed};

use crate::numth::{euler_phi, factorize, kronecker_symbol, rat, rat_frac, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModularInvariants {
    pub genus: u64,
    pub nu2: u64,
    pub nu3: u64,
    pub nu_inf: u64,
}

/// Genus, elliptic-point counts and cusp count of X0(N). `N = 1` returns
/// the conventional `(0, 1, 1, 1)`; the filters never consult it.
pub fn invariants(n: u64) -> ModularInvariants {
    if n == 1 {
        return ModularInvariants {
            genus: 0,
            nu2: 1,
            nu3: 1,
            nu_inf: 1,
        };
    }
    let primes: Vec<u64> = factorize(n).into_iter().map(|(p, _)| p).collect();

    let nu2: u64 = if n % 4 == 0 {
        0
    } else {
        let prod: i64 = primes
            .iter()
            .map(|&p| 1 + kronecker_symbol(-1, p).unwrap() as i64)
            .product();
        let prod = if n % 4 == 2 { prod / 2 } else { prod };
        prod as u64
    };

    let nu3: u64 = if n % 9 == 0 {
        0
    } else {
        primes
            .iter()
            .map(|&p| (1 + kronecker_symbol(-3, p).unwrap() as i64) as u64)
            .product()
    };

    let nu_inf: u64 = divisors(n)
        .into_iter()
        .map(|d| euler_phi(num_integer::gcd(d, n / d)))
        .sum();

    // g = 1 + (N/12) prod (1 + 1/p) - nu2/4 - nu3/3 - nu_inf/2
    let mut idx = rat(n as i64);
    for &p in &primes {
        idx *= Rat::one() + rat_frac(1, p as i64);
    }
    let g = Rat::one() + idx / rat(12)
        - rat(nu2 as i64) / rat(4)
        - rat(nu3 as i64) / rat(3)
        - rat(nu_inf as i64) / rat(2);
    assert!(g.is_integer() && !g.is_negative(), "genus formula broke at N={n}: {g}");
    let genus: u64 = g.to_integer().try_into().unwrap();

    ModularInvariants {
        genus,
        nu2,
        nu3,
        nu_inf,
    }
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            out.push(i);
            if i != n / i {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out
}

fn ceil_half(x: u64) -> u64 {
    x.div_ceil(2)
}

/// Necessary conditions for an `(N, d)` pair, by case on `d`. `Err`
/// carries the first failing condition as a reason code.
pub fn pass_filter(n: u64, d: u64) -> Result<(), String> {
    let inv = invariants(n);
    let ModularInvariants {
        genus: g,
        nu2,
        nu3,
        nu_inf,
    } = inv;
    match d {
        1 => {
            if g >= 2 {
                return Err(format!("genus={g}>1"));
            }
            if g == 1 {
                return if nu2 == 0 && nu3 == 0 && nu_inf == 2 {
                    Ok(())
                } else {
                    Err(format!(
                        "genus=1 with (nu2,nu3,nu_inf)=({nu2},{nu3},{nu_inf})!=(0,0,2)"
                    ))
                };
            }
            // genus 0: at most one non-simple singularity fits the degree
            let budget = (ceil_half(nu_inf) - 1) + ceil_half(nu2) + ceil_half(nu3);
            if budget > 1 {
                Err(format!("budget B1={budget}>1"))
            } else {
                Ok(())
            }
        }
        2 => {
            if g != 0 {
                Err(format!("genus={g}>0"))
            } else if nu_inf > 3 {
                Err(format!("nu_inf={nu_inf}>3"))
            } else if nu3 > 1 {
                Err(format!("nu3={nu3}>1"))
            } else if nu2 > 7 {
                Err(format!("nu2={nu2}>7"))
            } else if n >= 48 {
                Err(format!("N={n}>=48"))
            } else {
                Ok(())
            }
        }
        3 => {
            if g == 0 && nu_inf == 2 && nu3 == 1 && nu2 == 0 {
                Ok(())
            } else {
                Err(format!(
                    "(g,nu2,nu3,nu_inf)=({g},{nu2},{nu3},{nu_inf})!=(0,0,1,2)"
                ))
            }
        }
        4 => {
            if g == 0 && nu_inf == 2 && nu2 == 1 && nu3 == 0 {
                Ok(())
            } else {
                Err(format!(
                    "(g,nu2,nu3,nu_inf)=({g},{nu2},{nu3},{nu_inf})!=(0,1,0,2)"
                ))
            }
        }
        _ => Err(String::from("d>=5")),
    }
}

/// All pairs passing the filters in the given range, plus the two `N = 1`
/// pairs that are members by construction rather than by filter.
pub fn necessary_pairs(n_max: u64, d_max: u64) -> Vec<(u64, u64)> {
    let mut out = alloc::vec![(1, 1), (1, 2)];
    for n in 2..=n_max {
        for d in 1..=d_max {
            if pass_filter(n, d).is_ok() {
                out.push((n, d));
            }
        }
    }
    out.sort_unstable_by_key(|&(n, d)| (d, n));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariant_examples() {
        assert_eq!(
            invariants(2),
            ModularInvariants { genus: 0, nu2: 1, nu3: 0, nu_inf: 2 }
        );
        assert_eq!(
            invariants(11),
            ModularInvariants { genus: 1, nu2: 0, nu3: 0, nu_inf: 2 }
        );
        let i10 = invariants(10);
        assert_eq!((i10.nu2, i10.nu_inf), (2, 4));
        let i12 = invariants(12);
        assert_eq!(i12.nu_inf, 6);
        assert_eq!(invariants(1), ModularInvariants { genus: 0, nu2: 1, nu3: 1, nu_inf: 1 });
    }

    #[test]
    fn genus_is_integer_up_to_1000() {
        // the assert inside invariants() is the actual check
        for n in 1..=1000 {
            let _ = invariants(n);
        }
    }

    #[test]
    fn documented_exclusions() {
        assert_eq!(pass_filter(10, 1).unwrap_err(), "budget B1=2>1");
        assert_eq!(pass_filter(13, 2).unwrap_err(), "nu3=2>1");
        assert_eq!(pass_filter(6, 2).unwrap_err(), "nu_inf=4>3");
        assert_eq!(pass_filter(7, 5).unwrap_err(), "d>=5");
    }

    #[test]
    fn slices_by_d() {
        let all = necessary_pairs(200, 6);
        let slice = |dd: u64| -> Vec<u64> {
            all.iter().filter(|&&(_, d)| d == dd).map(|&(n, _)| n).collect()
        };
        assert_eq!(slice(1), [1, 2, 3, 4, 5, 6, 7, 8, 9, 11]);
        assert_eq!(slice(2), [1, 2, 3, 4, 5]);
        assert_eq!(slice(3), [3]);
        assert_eq!(slice(4), [2]);
        assert_eq!(all.len(), 17);
    }

    #[test]
    fn stable_under_larger_scan() {
        assert_eq!(necessary_pairs(1000, 8), necessary_pairs(200, 6));
    }
}
