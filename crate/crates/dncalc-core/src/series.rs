//! Truncated formal power series with exact coefficients, plus series with a
//! single fractional leading exponent.
//!
//! A [`Series`] of precision `p` is known modulo `x^p`; arithmetic carries
//! the minimum of the operand precisions, adjusted for valuation shifts in
//! division and composition so a coefficient is never reported beyond what
//! the inputs justify.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::numth::Rat;

/// Exact coefficient ring. `try_invert` returns the multiplicative inverse
/// of a unit, `None` otherwise (e.g. nonconstant polynomials).
pub trait Coeff:
    Clone
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    fn try_invert(&self) -> Option<Self>;

    fn from_u64(n: u64) -> Self {
        let mut acc = Self::zero();
        let mut bit = Self::one();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc + bit.clone();
            }
            bit = bit.clone() + bit;
            n >>= 1;
        }
        acc
    }
}

impl Coeff for Rat {
    fn try_invert(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self::one() / self.clone())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesError {
    DivisionByHigherValuation,
    CompositionNeedsPositiveValuation,
    NotReversible,
    RootNeedsUnitConstantTerm,
    /// Leading coefficient is not a unit in the coefficient ring.
    NonInvertibleCoefficient,
}

impl fmt::Display for SeriesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            SeriesError::DivisionByHigherValuation => "DivisionByHigherValuation",
            SeriesError::CompositionNeedsPositiveValuation => {
                "CompositionNeedsPositiveValuation"
            }
            SeriesError::NotReversible => "NotReversible",
            SeriesError::RootNeedsUnitConstantTerm => "RootNeedsUnitConstantTerm",
            SeriesError::NonInvertibleCoefficient => "NonInvertibleCoefficient",
        };
        write!(f, "{msg}")
    }
}

/// Truncated power series: coefficients of `x^0 .. x^{prec-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series<C: Coeff> {
    coeffs: Vec<C>,
}

/// Series over exact rationals, the workhorse of the modular pipeline.
pub type RatSeries = Series<Rat>;

impl<C: Coeff> Series<C> {
    pub fn new(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "series needs precision >= 1");
        Series { coeffs }
    }

    /// The zero series known modulo `x^prec`.
    pub fn zero(prec: usize) -> Self {
        Series::new(vec![C::zero(); prec])
    }

    pub fn one(prec: usize) -> Self {
        Series::constant(C::one(), prec)
    }

    pub fn constant(c: C, prec: usize) -> Self {
        let mut v = vec![C::zero(); prec];
        v[0] = c;
        Series::new(v)
    }

    /// The identity series `x`.
    pub fn x(prec: usize) -> Self {
        assert!(prec >= 2);
        let mut v = vec![C::zero(); prec];
        v[1] = C::one();
        Series::new(v)
    }

    /// Builds a series from the low-order coefficients, zero-padded to prec.
    pub fn from_prefix(prefix: &[C], prec: usize) -> Self {
        assert!(prefix.len() <= prec);
        let mut v = prefix.to_vec();
        v.resize(prec, C::zero());
        Series::new(v)
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: usize) -> &C {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, i: usize, c: C) {
        self.coeffs[i] = c;
    }

    pub fn truncate(&self, prec: usize) -> Self {
        assert!(prec >= 1 && prec <= self.prec());
        Series::new(self.coeffs[..prec].to_vec())
    }

    pub fn is_zero_series(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Index of the first nonzero coefficient, if any survives truncation.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.prec().min(other.prec());
        Series::new(
            (0..p)
                .map(|i| self.coeffs[i].clone() + other.coeffs[i].clone())
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.prec().min(other.prec());
        Series::new(
            (0..p)
                .map(|i| self.coeffs[i].clone() - other.coeffs[i].clone())
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Series::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn scale(&self, c: &C) -> Self {
        Series::new(self.coeffs.iter().map(|x| x.clone() * c.clone()).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = self.prec().min(other.prec());
        let mut out = vec![C::zero(); p];
        for (i, a) in self.coeffs.iter().take(p).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(p - i).enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Series::new(out)
    }

    /// Multiplies by `x^k`; the result is known to `prec + k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut v = vec![C::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        Series::new(v)
    }

    /// Substitutes `x -> x^d`; the result is known to `prec * d`.
    pub fn spread(&self, d: usize) -> Self {
        assert!(d >= 1);
        let mut v = vec![C::zero(); self.prec() * d];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[i * d] = c.clone();
        }
        Series::new(v)
    }

    pub fn derivative(&self) -> Self {
        if self.prec() == 1 {
            return Series::zero(1);
        }
        Series::new(
            (1..self.prec())
                .map(|i| self.coeffs[i].clone() * C::from_u64(i as u64))
                .collect(),
        )
    }

    /// Inverse of a series with unit constant term.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let c0 = self.coeffs[0]
            .try_invert()
            .ok_or(SeriesError::NonInvertibleCoefficient)?;
        let p = self.prec();
        let mut out = vec![C::zero(); p];
        out[0] = c0.clone();
        for n in 1..p {
            let mut s = C::zero();
            for k in 1..=n {
                if !self.coeffs[k].is_zero() {
                    s = s + self.coeffs[k].clone() * out[n - k].clone();
                }
            }
            out[n] = -(s * c0.clone());
        }
        Ok(Series::new(out))
    }

    /// Exact division; requires `valuation(b) <= valuation(a)` and that the
    /// leading coefficient of `b` is a unit.
    pub fn div(&self, other: &Self) -> Result<Self, SeriesError> {
        let vb = other
            .valuation()
            .ok_or(SeriesError::DivisionByHigherValuation)?;
        let va = self.valuation().unwrap_or(self.prec());
        if va < vb {
            return Err(SeriesError::DivisionByHigherValuation);
        }
        let p = self.prec().min(other.prec()) - vb;
        let a = Series::new(self.coeffs[vb..vb + p].to_vec());
        let b = Series::new(other.coeffs[vb..vb + p].to_vec());
        Ok(a.mul(&b.invert()?))
    }

    /// `f(g)` by baby-step/giant-step (about `2 sqrt(n)` series products
    /// instead of Horner's `n`); `g` must have zero constant term.
    pub fn compose(&self, g: &Self) -> Result<Self, SeriesError> {
        if !g.coeffs[0].is_zero() {
            return Err(SeriesError::CompositionNeedsPositiveValuation);
        }
        let v = g.valuation().unwrap_or(g.prec()).max(1);
        let p = g.prec().min(self.prec().saturating_mul(v));
        let g = g.truncate(p.min(g.prec()));
        let n = self.prec();
        let s = (1..).find(|&s| s * s >= n).unwrap();
        let mut baby = Vec::with_capacity(s);
        baby.push(Series::one(p));
        for i in 1..s {
            let prev: &Series<C> = &baby[i - 1];
            baby.push(prev.mul(&g));
        }
        let giant = baby[s - 1].mul(&g);
        let mut out = Series::zero(p);
        for b in (0..n.div_ceil(s)).rev() {
            out = out.mul(&giant);
            for j in (0..s).rev() {
                let idx = b * s + j;
                if idx < n && !self.coeffs[idx].is_zero() {
                    out = out.add(&baby[j].scale(&self.coeffs[idx]));
                }
            }
        }
        Ok(out)
    }

    /// Compositional inverse of `f = c1 x + O(x^2)`, `c1` a unit, by Newton
    /// iteration. The fixed point satisfies `f(g(x)) = x = g(f(x))`.
    pub fn reversion(&self) -> Result<Self, SeriesError> {
        if self.prec() < 2 || !self.coeffs[0].is_zero() || self.coeffs[1].is_zero() {
            return Err(SeriesError::NotReversible);
        }
        let c1_inv = self.coeffs[1]
            .try_invert()
            .ok_or(SeriesError::NonInvertibleCoefficient)?;
        let p = self.prec();
        // The derivative is one term short; pad it — the final exact check
        // `f(g) = x` at full precision certifies the result regardless.
        let fp = Series::from_prefix(self.derivative().coeffs(), p);
        // Newton with doubling working precision: a step at precision k
        // only needs f mod x^k, and the cost is dominated by the last level.
        let mut k = 2usize.min(p);
        let mut g = Series::x(k).scale(&c1_inv);
        let mut steps = 0usize;
        loop {
            let err = self.truncate(k).compose(&g)?.sub(&Series::x(k));
            if err.is_zero_series() {
                if k == p {
                    return Ok(g);
                }
                k = (2 * k).min(p);
                g = Series::from_prefix(g.coeffs(), k);
                continue;
            }
            let slope = fp.truncate(k).compose(&g)?;
            g = g.sub(&err.div(&slope)?);
            steps += 1;
            if steps > p {
                return Err(SeriesError::NotReversible);
            }
        }
    }

    /// `g` with `g^n = f`, `g(0) = 1`; requires `f(0) = 1`. Uses the
    /// first-order recurrence `n f g' = f' g`.
    pub fn nth_root(&self, n: u64) -> Result<Self, SeriesError> {
        assert!(n >= 1);
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::RootNeedsUnitConstantTerm);
        }
        let p = self.prec();
        let mut g = vec![C::zero(); p];
        g[0] = C::one();
        for m in 0..p - 1 {
            // (m+1) n g_{m+1} = sum_{k<=m} (k+1) f_{k+1} g_{m-k}
            //                   - n sum_{k<m} (k+1) g_{k+1} f_{m-k}
            let mut rhs = C::zero();
            for k in 0..=m {
                if !self.coeffs[k + 1].is_zero() {
                    rhs = rhs
                        + C::from_u64((k + 1) as u64) * self.coeffs[k + 1].clone()
                            * g[m - k].clone();
                }
            }
            let nn = C::from_u64(n);
            for k in 0..m {
                if !g[k + 1].is_zero() && !self.coeffs[m - k].is_zero() {
                    rhs = rhs
                        - nn.clone() * C::from_u64((k + 1) as u64) * g[k + 1].clone()
                            * self.coeffs[m - k].clone();
                }
            }
            let denom = C::from_u64((m + 1) as u64 * n)
                .try_invert()
                .ok_or(SeriesError::NonInvertibleCoefficient)?;
            g[m + 1] = rhs * denom;
        }
        Ok(Series::new(g))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = Series::one(self.prec());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }
}

impl RatSeries {
    /// Raises a series with constant term 1 to a rational power.
    pub fn rat_pow(&self, e: &Rat) -> Result<Self, SeriesError> {
        use num_traits::Signed;
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::RootNeedsUnitConstantTerm);
        }
        let den: u64 = e.denom().try_into().expect("exponent denominator fits u64");
        let root = self.nth_root(den)?;
        let num = e.numer();
        let pow: u64 = num.abs().try_into().expect("exponent numerator fits u64");
        let powed = root.pow(pow);
        if num.is_negative() {
            powed.invert()
        } else {
            Ok(powed)
        }
    }
}

/// `x^offset · body(x)` with a rational leading exponent. The body carries a
/// nonzero constant term unless the whole series is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FracSeries {
    offset: Rat,
    body: RatSeries,
}

impl FracSeries {
    /// Normalizes so the body has nonzero constant term (absorbing any
    /// integer valuation into the offset); an all-zero body keeps offset 0.
    pub fn new(offset: Rat, body: RatSeries) -> Self {
        match body.valuation() {
            None => FracSeries {
                offset: Rat::zero(),
                body,
            },
            Some(0) => FracSeries { offset, body },
            Some(v) => {
                let p = body.prec() - v;
                let shifted = RatSeries::new(body.coeffs()[v..].to_vec());
                debug_assert_eq!(shifted.prec(), p);
                FracSeries {
                    offset: offset + Rat::from_integer(v.into()),
                    body: shifted,
                }
            }
        }
    }

    pub fn from_series(body: RatSeries) -> Self {
        FracSeries::new(Rat::zero(), body)
    }

    pub fn offset(&self) -> &Rat {
        &self.offset
    }

    pub fn body(&self) -> &RatSeries {
        &self.body
    }

    pub fn is_zero_series(&self) -> bool {
        self.body.is_zero_series()
    }

    pub fn frac_mul(&self, other: &FracSeries) -> FracSeries {
        FracSeries::new(
            self.offset.clone() + other.offset.clone(),
            self.body.mul(&other.body),
        )
    }

    /// Raises to a rational power; the body must have constant term 1.
    pub fn frac_pow(&self, e: &Rat) -> Result<FracSeries, SeriesError> {
        Ok(FracSeries::new(
            self.offset.clone() * e.clone(),
            self.body.rat_pow(e)?,
        ))
    }
}
