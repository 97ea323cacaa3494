//! q-expansions for the modular side: eta products, Eisenstein series,
//! level-`N` uniformizers built from eta quotients, and the change of
//! variable that re-expands the weight-one forms in the uniformizer.
//!
//! All series are exact over the rationals. Fractional exponents (eta
//! prefactors `q^{j/24}`) ride on [`FracSeries`] offsets.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::numth::{divisor_sigma, rat, rat_frac, Rat};
use crate::series::{Coeff, FracSeries, RatSeries, Series, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModularError {
    UnsupportedLevel(u32),
    UnsupportedPair(u32, u32),
    Series(SeriesError),
}

impl fmt::Display for ModularError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModularError::UnsupportedLevel(n) => write!(f, "UnsupportedLevel({n})"),
            ModularError::UnsupportedPair(n, d) => write!(f, "UnsupportedPair({n},{d})"),
            ModularError::Series(e) => write!(f, "Series({e})"),
        }
    }
}

impl From<SeriesError> for ModularError {
    fn from(e: SeriesError) -> Self {
        ModularError::Series(e)
    }
}

/// Levels with a genus-zero uniformizer built in.
pub const LEVELS: [u32; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 11];

/// The `(N, d)` pairs carried through the whole pipeline.
pub const PAIRS: [(u32, u32); 17] = [
    (1, 1),
    (2, 1),
    (3, 1),
    (4, 1),
    (5, 1),
    (6, 1),
    (7, 1),
    (8, 1),
    (9, 1),
    (11, 1),
    (1, 2),
    (2, 2),
    (3, 2),
    (4, 2),
    (5, 2),
    (3, 3),
    (2, 4),
];

/// `prod_{n>=1} (1 - q^{jn})`, the eta product without its `q^{j/24}` head.
pub fn eta_body(j: u32, prec: usize) -> RatSeries {
    let j = j as usize;
    let mut out = vec![Rat::zero(); prec];
    out[0] = Rat::one();
    let mut n = 1;
    while j * n < prec {
        // multiply by (1 - q^{jn}) in place
        for i in (j * n..prec).rev() {
            let low = out[i - j * n].clone();
            out[i] -= low;
        }
        n += 1;
    }
    RatSeries::new(out)
}

/// `q^{j/24} prod (1 - q^{jn})`.
pub fn eta_h(j: u32, prec: usize) -> FracSeries {
    FracSeries::new(rat_frac(j as i64, 24), eta_body(j, prec))
}

/// The weight-two form `-(j/24) (1 - 24 sum sigma(n) q^{jn})`.
pub fn eisenstein_e2(j: u32, prec: usize) -> RatSeries {
    let j = j as usize;
    let mut out = vec![Rat::zero(); prec];
    out[0] = rat_frac(-(j as i64), 24);
    let mut n = 1usize;
    while j * n < prec {
        out[j * n] = rat(j as i64) * big(divisor_sigma(1, n as u64));
        n += 1;
    }
    RatSeries::new(out)
}

/// `E_4 = 1 + 240 sum sigma_3(n) q^n`.
pub fn e4(prec: usize) -> RatSeries {
    let mut out = vec![Rat::zero(); prec];
    out[0] = Rat::one();
    for n in 1..prec {
        out[n] = rat(240) * big(divisor_sigma(3, n as u64));
    }
    RatSeries::new(out)
}

fn big(v: u128) -> Rat {
    Rat::from_integer(v.into())
}

/// Weight-one combination defining the holomorphic solution at `d = 1`:
/// coefficients `e_j` of the `E_{2,j}` making up `Phi_{N,1}`. Level 1 uses
/// `sqrt(E_4)` instead and has no combination.
pub fn phi_combo(n: u32) -> Result<Vec<(u32, Rat)>, ModularError> {
    let combo: &[(u32, i64)] = match n {
        2 => &[(1, 24), (2, -24)],
        3 => &[(1, 12), (3, -12)],
        4 => &[(1, 8), (4, -8)],
        5 => &[(1, 6), (5, -6)],
        6 => &[(1, 5), (2, -1), (3, 1), (6, -5)],
        7 => &[(1, 4), (7, -4)],
        8 => &[(1, 4), (2, -2), (4, 2), (8, -4)],
        9 => &[(1, 3), (9, -3)],
        11 => {
            return Ok(vec![
                (1, rat_frac(12, 5)),
                (11, rat_frac(-12, 5)),
            ])
        }
        _ => return Err(ModularError::UnsupportedLevel(n)),
    };
    Ok(combo.iter().map(|&(j, e)| (j, rat(e))).collect())
}

/// `Phi_{N,d}(q) = Phi_{N,1}(q^d)` as a q-series, constant term 1.
pub fn phi_q(n: u32, d: u32, prec: usize) -> Result<RatSeries, ModularError> {
    let base = if n == 1 {
        e4(prec).nth_root(2)?
    } else {
        let mut acc = RatSeries::zero(prec);
        for (j, e) in phi_combo(n)? {
            acc = acc.add(&eisenstein_e2(j, prec).scale(&e));
        }
        acc
    };
    debug_assert!(base.coeff(0).is_one());
    Ok(base.spread(d as usize).truncate(prec))
}

/// The `q^0` coefficient the uniformizer is normalized to at each level.
pub fn c0_for_level(n: u32) -> Result<Rat, ModularError> {
    Ok(match n {
        1 => rat(744),
        2 => rat(104),
        3 => rat(42),
        4 => rat(24),
        5 => rat(16),
        6 => rat(12),
        7 => rat(9),
        8 => rat(8),
        9 => rat(6),
        11 => rat_frac(22, 5),
        _ => return Err(ModularError::UnsupportedLevel(n)),
    })
}

/// Eta-quotient recipes summing to `T^{-1}` up to the constant term:
/// `(scale, [(j, exponent)...])` meaning `scale * prod eta(q^j)^{e}`.
fn recipes(n: u32) -> Result<&'static [(i64, &'static [(u32, i32)])], ModularError> {
    Ok(match n {
        2 => &[(1, &[(1, 24), (2, -24)]), (4096, &[(2, 24), (1, -24)])],
        3 => &[(1, &[(1, 12), (3, -12)]), (729, &[(3, 12), (1, -12)])],
        4 => &[(1, &[(1, 8), (4, -8)]), (256, &[(4, 8), (1, -8)])],
        5 => &[(1, &[(1, 6), (5, -6)]), (125, &[(5, 6), (1, -6)])],
        6 => &[
            (1, &[(1, 5), (3, 1), (2, -1), (6, -5)]),
            (72, &[(2, 1), (6, 5), (1, -5), (3, -1)]),
        ],
        7 => &[(1, &[(1, 4), (7, -4)]), (49, &[(7, 4), (1, -4)])],
        8 => &[
            (1, &[(1, 4), (4, 2), (2, -2), (8, -4)]),
            (32, &[(2, 2), (8, 4), (1, -4), (4, -2)]),
        ],
        9 => &[(1, &[(1, 3), (9, -3)]), (27, &[(9, 3), (1, -3)])],
        11 => &[
            (1, &[(1, 2), (11, 2), (2, -2), (22, -2)]),
            (16, &[(2, 2), (22, 2), (1, -2), (11, -2)]),
            (16, &[(2, 4), (22, 4), (1, -4), (11, -4)]),
        ],
        _ => return Err(ModularError::UnsupportedLevel(n)),
    })
}

fn eta_quotient(parts: &[(u32, i32)], prec: usize) -> Result<FracSeries, ModularError> {
    let mut acc = FracSeries::from_series(RatSeries::one(prec));
    for &(j, e) in parts {
        acc = acc.frac_mul(&eta_h(j, prec).frac_pow(&rat(e as i64))?);
    }
    Ok(acc)
}

/// `T^{-1}` as a Laurent series `q^{-1} + c0 + ...`; the constant term is
/// set to `c0` here, absorbing whatever the recipe's intrinsic constant is.
pub fn t_inv_series(n: u32, c0: &Rat, prec: usize) -> Result<FracSeries, ModularError> {
    // accumulate exponents -1 .. prec-2
    let mut out = vec![Rat::zero(); prec];
    if n == 1 {
        let num = e4(prec).pow(3);
        let den = eta_body(1, prec).pow(24);
        let body = num.div(&den)?;
        for i in 0..prec {
            out[i] = body.coeff(i).clone();
        }
    } else {
        for &(scale, parts) in recipes(n)? {
            let piece = eta_quotient(parts, prec)?;
            let off = piece.offset().clone();
            assert!(off.is_integer(), "recipe offset must be integral");
            let off: i64 = off.to_integer().try_into().unwrap();
            assert!(off >= -1);
            for i in 0..piece.body().prec() {
                let e = off + i as i64;
                if e >= -1 && ((e + 1) as usize) < prec {
                    out[(e + 1) as usize] += rat(scale) * piece.body().coeff(i);
                }
            }
        }
    }
    assert!(out[0].is_one(), "uniformizer must start at q^{{-1}}");
    out[1] = c0.clone();
    Ok(FracSeries::new(rat(-1), RatSeries::new(out)))
}

/// `B(q) = q T^{-1} = 1 + c0 q + ...`.
pub fn b_series(n: u32, c0: &Rat, prec: usize) -> Result<RatSeries, ModularError> {
    let tinv = t_inv_series(n, c0, prec)?;
    debug_assert_eq!(tinv.offset(), &rat(-1));
    Ok(tinv.body().clone())
}

/// The uniformizer `T(q) = q / B(q)`, a q-series of valuation 1.
pub fn t_series(n: u32, c0: &Rat, prec: usize) -> Result<RatSeries, ModularError> {
    let b = b_series(n, c0, prec)?;
    Ok(b.invert()?.shift_up(1).truncate(prec))
}

/// Change of variable shared with the symbolic-constant search: given
/// `B = 1 + c0 q + ...` and the form in `q`, reverts `T = q/B` and returns
/// `phi(q(T))` spread by `d` (so the result lives in the `(N,d)` variable).
pub fn solution_from_b<C: Coeff>(
    phi: &Series<C>,
    b: &Series<C>,
    d: u32,
) -> Result<Series<C>, SeriesError> {
    let prec = b.prec().min(phi.prec());
    let t = b.invert()?.shift_up(1).truncate(prec);
    let q_of_t = t.reversion()?;
    let in_t = phi.compose(&q_of_t)?;
    Ok(in_t.spread(d as usize).truncate(prec))
}

/// The holomorphic solution `phi` of the `(N, d)` operator, expanded in the
/// uniformizer: `Phi_{N,1}(q(T))` with coefficients spread by `d`.
pub fn holomorphic_solution(
    n: u32,
    d: u32,
    c0: &Rat,
    prec: usize,
) -> Result<RatSeries, ModularError> {
    let phi = phi_q(n, 1, prec)?;
    let b = b_series(n, c0, prec)?;
    Ok(solution_from_b(&phi, &b, d)?)
}

/// The I-function of the pair as a q-series: with `T(q) = q u(q)` and
/// `t(Q) = Q u(Q^d)^{1/d}`, this is `phi(t(Q)) t(Q)^{d(N+1)/12}`.
pub fn i_function(n: u32, d: u32, c0: &Rat, prec: usize) -> Result<FracSeries, ModularError> {
    let b = b_series(n, c0, prec)?;
    let u = b.invert()?; // T = q u(q)
    let v = u.nth_root(d as u64)?.spread(d as usize).truncate(prec); // u(Q^d)^{1/d}
    let t_of_big_q = v.shift_up(1).truncate(prec); // t(Q) = Q v(Q)

    let phi = holomorphic_solution(n, d, c0, prec)?;
    let body = phi.compose(&t_of_big_q)?;
    let e = rat_frac((d * (n + 1)) as i64, 12);
    let t_pow = FracSeries::new(e.clone(), v.rat_pow(&e)?);
    Ok(FracSeries::from_series(body).frac_mul(&t_pow))
}

/// Checks the eta-product identity for the pair: the I-function equals
/// `H_d(Q)^2 H_{Nd}(Q)^2` coefficient by coefficient.
pub fn eta_product_check(n: u32, d: u32, prec: usize) -> Result<bool, ModularError> {
    let c0 = c0_for_level(n)?;
    let lhs = i_function(n, d, &c0, prec)?;
    let rhs = eta_h(d, prec)
        .frac_pow(&rat(2))?
        .frac_mul(&eta_h(n * d, prec).frac_pow(&rat(2))?);

    let p = lhs.body().prec().min(rhs.body().prec());
    Ok(lhs.offset() == rhs.offset()
        && lhs.body().truncate(p) == rhs.body().truncate(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rats(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn eta_pentagonal() {
        let e = eta_body(1, 13);
        assert_eq!(
            e.coeffs(),
            &rats(&[1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1])[..]
        );
        let e2 = eta_body(2, 8);
        assert_eq!(e2.coeffs(), &rats(&[1, 0, -1, 0, -1, 0, 0, 0])[..]);
    }

    #[test]
    fn eisenstein_values() {
        let e = eisenstein_e2(1, 6);
        assert_eq!(e.coeff(0), &rat_frac(-1, 24));
        assert_eq!(&e.coeffs()[1..], &rats(&[1, 3, 4, 7, 6])[..]);
        let e2 = eisenstein_e2(2, 6);
        assert_eq!(e2.coeff(0), &rat_frac(-1, 12));
        assert_eq!(&e2.coeffs()[1..], &rats(&[0, 2, 0, 6, 0])[..]);
        assert_eq!(
            e4(5).coeffs(),
            &rats(&[1, 240, 2160, 6720, 17520])[..]
        );
    }

    #[test]
    fn phi_level_two() {
        // 24 E_{2,1} - 24 E_{2,2} = 1 + 24q + 24q^2 + 96q^3 + 24q^4 + ...
        let p = phi_q(2, 1, 6).unwrap();
        assert_eq!(p.coeffs(), &rats(&[1, 24, 24, 96, 24, 144])[..]);
        // spread by 2
        let p2 = phi_q(2, 2, 6).unwrap();
        assert_eq!(p2.coeffs(), &rats(&[1, 0, 24, 0, 24, 0])[..]);
    }

    #[test]
    fn phi_level_one_is_sqrt_e4() {
        let p = phi_q(1, 1, 4).unwrap();
        assert_eq!(p.coeff(1), &rat(120));
        assert_eq!(p.coeff(2), &rat(-6120));
        let sq = p.mul(&p);
        assert_eq!(sq, e4(4));
    }

    #[test]
    fn eta_quotient_oracle() {
        // (H_1/H_2)^24 = q^{-1} - 24 + 276 q - 2048 q^2 + ...
        let piece = eta_quotient(&[(1, 24), (2, -24)], 8).unwrap();
        assert_eq!(piece.offset(), &rat(-1));
        assert_eq!(
            &piece.body().coeffs()[..4],
            &rats(&[1, -24, 276, -2048])[..]
        );
    }

    #[test]
    fn uniformizer_level_two() {
        let tinv = t_inv_series(2, &rat(104), 8).unwrap();
        assert_eq!(tinv.offset(), &rat(-1));
        assert_eq!(
            &tinv.body().coeffs()[..5],
            &rats(&[1, 104, 4372, 96256, 1240002])[..]
        );
    }

    #[test]
    fn uniformizer_level_one_is_j() {
        let tinv = t_inv_series(1, &rat(744), 6).unwrap();
        assert_eq!(
            &tinv.body().coeffs()[..4],
            &rats(&[1, 744, 196884, 21493760])[..]
        );
    }

    #[test]
    fn solution_level_two() {
        let phi = holomorphic_solution(2, 1, &rat(104), 8).unwrap();
        assert_eq!(
            &phi.coeffs()[..6],
            &rats(&[1, 24, 2520, 369600, 63063000, 11732745024])[..]
        );
    }

    #[test]
    fn uniformizer_reverts() {
        let c0 = rat(42);
        let t = t_series(3, &c0, 16).unwrap();
        let q = t.reversion().unwrap();
        assert_eq!(t.compose(&q).unwrap(), RatSeries::x(16));
    }

    #[test]
    fn eta_identity_low_levels() {
        for (n, d) in [(1, 1), (2, 1), (3, 1), (5, 1), (2, 2)] {
            assert!(
                eta_product_check(n, d, 24).unwrap(),
                "eta product identity failed for ({n},{d})"
            );
        }
    }

    #[test]
    fn unsupported_level_rejected() {
        assert!(matches!(
            phi_combo(10),
            Err(ModularError::UnsupportedLevel(10))
        ));
        assert!(matches!(
            c0_for_level(12),
            Err(ModularError::UnsupportedLevel(12))
        ));
    }
}
