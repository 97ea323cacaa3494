//! p-curvature of a differential operator reduced modulo a prime, and the
//! nilpotence screen over a window of primes.
//!
//! The operator is rewritten as a first-order system `dξ/dt = ξ M` over
//! `F_p(t)` (row-vector convention); iterating `A <- A M + A'` a total of
//! `p - 1` times starting from `A = M` yields the matrix `C_p` with
//! `∂^p ξ = C_p ξ`. The operator passes the screen at `p` when `C_p^n = 0`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::numth::{pow_mod, rat_mod_p, Rat};
use crate::weyl::{WeylError, WeylOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurvatureError {
    /// The reduction mod p degenerates; carries the offending detail.
    BadPrime(u64, String),
    Weyl(WeylError),
}

impl fmt::Display for CurvatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvatureError::BadPrime(p, why) => write!(f, "BadPrime({p}: {why})"),
            CurvatureError::Weyl(e) => write!(f, "Weyl({e})"),
        }
    }
}

impl From<WeylError> for CurvatureError {
    fn from(e: WeylError) -> Self {
        CurvatureError::Weyl(e)
    }
}

/// Dense polynomial over F_p; trailing zeros stripped.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FpPoly {
    c: Vec<u64>,
}

fn mul_p(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn inv_p(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

impl FpPoly {
    pub fn new(mut c: Vec<u64>, p: u64) -> Self {
        for x in &mut c {
            *x %= p;
        }
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { c }
    }

    pub fn constant(x: u64, p: u64) -> Self {
        FpPoly::new(vec![x], p)
    }

    pub fn one() -> Self {
        FpPoly { c: vec![1] }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    fn add(&self, o: &Self, p: u64) -> Self {
        let n = self.c.len().max(o.c.len());
        FpPoly::new(
            (0..n)
                .map(|i| {
                    self.c.get(i).copied().unwrap_or(0) + o.c.get(i).copied().unwrap_or(0)
                })
                .collect(),
            p,
        )
    }

    fn neg(&self, p: u64) -> Self {
        FpPoly {
            c: self.c.iter().map(|&x| (p - x) % p).collect(),
        }
    }

    fn sub(&self, o: &Self, p: u64) -> Self {
        self.add(&o.neg(p), p)
    }

    fn mul(&self, o: &Self, p: u64) -> Self {
        if self.is_zero() || o.is_zero() {
            return FpPoly::default();
        }
        let mut out = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_p(a, b, p)) % p;
            }
        }
        FpPoly::new(out, p)
    }

    fn scale(&self, k: u64, p: u64) -> Self {
        FpPoly::new(self.c.iter().map(|&x| mul_p(x, k, p)).collect(), p)
    }

    fn derivative(&self, p: u64) -> Self {
        if self.c.len() <= 1 {
            return FpPoly::default();
        }
        FpPoly::new(
            (1..self.c.len())
                .map(|i| mul_p(self.c[i], i as u64 % p, p))
                .collect(),
            p,
        )
    }

    fn div_rem(&self, d: &Self, p: u64) -> (Self, Self) {
        let dd = d.degree().expect("division by zero polynomial");
        if self.c.len() <= dd {
            return (FpPoly::default(), self.clone());
        }
        let lead_inv = inv_p(d.c[dd], p);
        let mut rem = self.c.clone();
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let q = mul_p(rem[i], lead_inv, p);
            if q == 0 {
                continue;
            }
            quot[i - dd] = q;
            for j in 0..=dd {
                let s = mul_p(q, d.c[j], p);
                rem[i - dd + j] = (rem[i - dd + j] + p - s) % p;
            }
        }
        (FpPoly::new(quot, p), FpPoly::new(rem, p))
    }

    fn gcd(&self, o: &Self, p: u64) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b, p);
            a = b;
            b = r;
        }
        if let Some(d) = a.degree() {
            let inv = inv_p(a.c[d], p);
            a = a.scale(inv, p);
        }
        a
    }
}

/// Reduced fraction of polynomials over F_p; denominator monic and nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpRatFun {
    num: FpPoly,
    den: FpPoly,
}

impl FpRatFun {
    pub fn zero() -> Self {
        FpRatFun {
            num: FpPoly::default(),
            den: FpPoly::one(),
        }
    }

    pub fn from_poly(num: FpPoly) -> Self {
        FpRatFun {
            num,
            den: FpPoly::one(),
        }
    }

    pub fn new(num: FpPoly, den: FpPoly, p: u64) -> Self {
        assert!(!den.is_zero());
        let mut f = FpRatFun { num, den };
        f.reduce(p);
        f
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn num(&self) -> &FpPoly {
        &self.num
    }

    pub fn den(&self) -> &FpPoly {
        &self.den
    }

    fn reduce(&mut self, p: u64) {
        if self.num.is_zero() {
            self.den = FpPoly::one();
            return;
        }
        let g = self.num.gcd(&self.den, p);
        if g.degree() > Some(0) {
            self.num = self.num.div_rem(&g, p).0;
            self.den = self.den.div_rem(&g, p).0;
        }
        // scaling numerator and denominator by the same unit keeps the
        // fraction; it just makes the denominator monic
        let d = self.den.degree().unwrap();
        let inv = inv_p(self.den.c[d], p);
        self.den = self.den.scale(inv, p);
        self.num = self.num.scale(inv, p);
    }

    fn add(&self, o: &Self, p: u64) -> Self {
        FpRatFun::new(
            self.num.mul(&o.den, p).add(&o.num.mul(&self.den, p), p),
            self.den.mul(&o.den, p),
            p,
        )
    }

    fn mul(&self, o: &Self, p: u64) -> Self {
        FpRatFun::new(self.num.mul(&o.num, p), self.den.mul(&o.den, p), p)
    }

    fn derivative(&self, p: u64) -> Self {
        // (n/d)' = (n'd - nd')/d^2
        let n1 = self.num.derivative(p).mul(&self.den, p);
        let n2 = self.num.mul(&self.den.derivative(p), p);
        FpRatFun::new(n1.sub(&n2, p), self.den.mul(&self.den, p), p)
    }
}

/// Square matrix over F_p(t).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    n: usize,
    e: Vec<FpRatFun>,
}

impl FpMatrix {
    pub fn zero(n: usize) -> Self {
        FpMatrix {
            n,
            e: vec![FpRatFun::zero(); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> &FpRatFun {
        &self.e[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FpRatFun) {
        self.e[i * self.n + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|x| x.is_zero())
    }

    fn mul(&self, o: &Self, p: u64) -> Self {
        assert_eq!(self.n, o.n);
        let mut out = FpMatrix::zero(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let mut acc = FpRatFun::zero();
                for k in 0..self.n {
                    let term = self.at(i, k).mul(o.at(k, j), p);
                    if !term.is_zero() {
                        acc = acc.add(&term, p);
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    fn add(&self, o: &Self, p: u64) -> Self {
        assert_eq!(self.n, o.n);
        let mut out = FpMatrix::zero(self.n);
        for i in 0..self.n * self.n {
            out.e[i] = self.e[i].add(&o.e[i], p);
        }
        out
    }

    fn derivative(&self, p: u64) -> Self {
        let mut out = FpMatrix::zero(self.n);
        for i in 0..self.n * self.n {
            out.e[i] = self.e[i].derivative(p);
        }
        out
    }

    /// `C^n = 0` with `n` the dimension — the standard nilpotence criterion.
    pub fn is_nilpotent(&self, p: u64) -> bool {
        let mut acc = self.clone();
        for _ in 1..self.n {
            if acc.is_zero() {
                return true;
            }
            acc = acc.mul(self, p);
        }
        acc.is_zero()
    }
}

/// Reduces the operator's `c_j(t) (d/dt)^j` coefficients mod `p`.
fn coefficients_mod_p(l: &WeylOp, p: u64) -> Result<Vec<(u32, FpPoly, usize)>, CurvatureError> {
    let a1 = l.to_a1()?;
    let mut out = Vec::new();
    for (b, poly) in a1.by_derivative_order() {
        let deg_q = poly
            .iter()
            .rposition(|c: &Rat| !c.is_zero())
            .expect("stored polynomials are nonzero");
        let mut red = Vec::with_capacity(poly.len());
        for c in &poly {
            match rat_mod_p(c, p) {
                Some(v) => red.push(v),
                None => {
                    return Err(CurvatureError::BadPrime(
                        p,
                        format!("denominator of a coefficient of c_{b} vanishes"),
                    ))
                }
            }
        }
        out.push((b, FpPoly::new(red, p), deg_q));
    }
    Ok(out)
}

/// Companion matrix of the order-`n` system `dξ/dt = ξ M` over `F_p(t)`.
pub fn companion_matrix(l: &WeylOp, p: u64) -> Result<FpMatrix, CurvatureError> {
    let coeffs = coefficients_mod_p(l, p)?;
    let n = coeffs.iter().map(|&(b, _, _)| b).max().unwrap_or(0) as usize;
    if n == 0 {
        return Err(CurvatureError::BadPrime(p, String::from("order zero")));
    }
    let (_, cn, deg_q) = coeffs
        .iter()
        .find(|&&(b, _, _)| b as usize == n)
        .expect("leading coefficient present");
    if cn.is_zero() {
        return Err(CurvatureError::BadPrime(
            p,
            format!("leading coefficient c_{n} vanishes mod {p}"),
        ));
    }
    if cn.degree() != Some(*deg_q) {
        return Err(CurvatureError::BadPrime(
            p,
            format!("symbol polynomial drops degree mod {p}"),
        ));
    }
    let mut m = FpMatrix::zero(n);
    for k in 0..n - 1 {
        m.set(k + 1, k, FpRatFun::from_poly(FpPoly::one()));
    }
    for (b, cj, _) in &coeffs {
        let j = *b as usize;
        if j == n {
            continue;
        }
        m.set(j, n - 1, FpRatFun::new(cj.neg(p), cn.clone(), p));
    }
    Ok(m)
}

/// Iterates `A <- M A + A'` a total of `p - 1` times from `A = M`:
/// with `dξ/dt = ξ M` and `(d/dt)^k ξ = ξ A_k`, differentiating gives
/// `A_{k+1} = M A_k + A_k'`.
pub fn p_curvature(m: &FpMatrix, p: u64) -> FpMatrix {
    let mut a = m.clone();
    for _ in 1..p {
        a = m.mul(&a, p).add(&a.derivative(p), p);
    }
    a
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimeStatus {
    Bad(String),
    Nilpotent,
    NotNilpotent,
}

impl fmt::Display for PrimeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeStatus::Bad(why) => write!(f, "bad ({why})"),
            PrimeStatus::Nilpotent => write!(f, "nilpotent"),
            PrimeStatus::NotNilpotent => write!(f, "not-nilpotent"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilpotenceReport {
    pub per_prime: Vec<(u64, PrimeStatus)>,
}

impl NilpotenceReport {
    /// No good prime contradicts nilpotence.
    pub fn consistent(&self) -> bool {
        self.per_prime
            .iter()
            .all(|(_, s)| !matches!(s, PrimeStatus::NotNilpotent))
    }
}

/// Default window: the primes from 5 through 43.
pub const DEFAULT_PRIMES: [u64; 12] = [5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43];

/// Screens the operator over the given primes.
pub fn nilpotence_report(l: &WeylOp, primes: &[u64]) -> NilpotenceReport {
    let per_prime = primes
        .iter()
        .map(|&p| {
            let status = match companion_matrix(l, p) {
                Err(CurvatureError::BadPrime(_, why)) => PrimeStatus::Bad(why),
                Err(CurvatureError::Weyl(e)) => PrimeStatus::Bad(format!("{e}")),
                Ok(m) => {
                    if p_curvature(&m, p).is_nilpotent(p) {
                        PrimeStatus::Nilpotent
                    } else {
                        PrimeStatus::NotNilpotent
                    }
                }
            };
            (p, status)
        })
        .collect();
    NilpotenceReport { per_prime }
}

/// Odd primes in `[lo, hi]`.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| crate::numth::is_prime(n)).collect()
}
