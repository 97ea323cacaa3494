//! Recovery of the order-3 operator annihilating a series, and the staged
//! extraction of the symmetric matrix behind it.
//!
//! The fit solves an exact linear system for the coefficients of
//! `D^3 + sum_{k=1..K} t^k p_k(D)` by fraction-free elimination, searching
//! the minimal `t`-degree `K` first (an operator of lower degree would
//! otherwise be matched, non-uniquely, by its own `t`-multiples). The
//! matrix entries are then read off stage by stage; every surplus slot is a
//! residual that must vanish exactly.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::modular::{self, ModularError};
use crate::numth::{rat, Rat};
use crate::series::{Coeff, RatSeries, Series};
use crate::weyl::{dn_build, DNMatrix, DPoly, WeylOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PfitError {
    NoD3Annihilator,
    UnderdeterminedFit,
    /// Carries the first nonvanishing residual polynomial for diagnosis.
    NotD3Shaped(DPoly),
    Modular(ModularError),
    UnsupportedPair(u32, u32),
}

impl fmt::Display for PfitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PfitError::NoD3Annihilator => write!(f, "NoD3Annihilator"),
            PfitError::UnderdeterminedFit => write!(f, "UnderdeterminedFit"),
            PfitError::NotD3Shaped(_) => write!(f, "NotD3Shaped"),
            PfitError::Modular(e) => write!(f, "Modular({e})"),
            PfitError::UnsupportedPair(n, d) => write!(f, "UnsupportedPair({n},{d})"),
        }
    }
}

impl From<ModularError> for PfitError {
    fn from(e: ModularError) -> Self {
        PfitError::Modular(e)
    }
}

/// Exact quotient in an integral domain; `None` if the division is inexact.
pub trait ExactDiv: Sized {
    fn exact_div(&self, d: &Self) -> Option<Self>;
}

impl ExactDiv for Rat {
    fn exact_div(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            None
        } else {
            Some(self / d)
        }
    }
}

/// Fraction-free (Bareiss) forward elimination of an augmented system.
/// Returns the echelon form and the pivot column of each reduced row;
/// rows past the pivot list have an all-zero coefficient part, so their
/// last entry is a consistency residual.
fn bareiss_echelon<C: Coeff + ExactDiv>(
    mut aug: Vec<Vec<C>>,
    ncols: usize,
) -> (Vec<Vec<C>>, Vec<usize>) {
    let nrows = aug.len();
    let width = ncols + 1;
    let mut pivots = Vec::new();
    let mut prev = C::one();
    let mut r = 0;
    for col in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(pr) = (r..nrows).find(|&i| !aug[i][col].is_zero()) else {
            continue;
        };
        aug.swap(r, pr);
        let pivot = aug[r][col].clone();
        for i in r + 1..nrows {
            let factor = aug[i][col].clone();
            for j in col..width {
                let num = pivot.clone() * aug[i][j].clone()
                    - factor.clone() * aug[r][j].clone();
                aug[i][j] = num
                    .exact_div(&prev)
                    .expect("Bareiss division is exact in an integral domain");
            }
        }
        prev = pivot;
        pivots.push(col);
        r += 1;
    }
    (aug, pivots)
}

/// Solves the augmented system exactly over the rationals. Returns
/// `Ok(None)` when inconsistent, `Err(())` when rank-deficient.
#[allow(clippy::result_unit_err)]
fn solve_rat(aug: Vec<Vec<Rat>>, ncols: usize) -> Result<Option<Vec<Rat>>, ()> {
    let (ech, pivots) = bareiss_echelon(aug, ncols);
    for row in ech.iter().skip(pivots.len()) {
        if !row[ncols].is_zero() {
            return Ok(None);
        }
    }
    if pivots.len() < ncols {
        return Err(());
    }
    let mut x = vec![Rat::zero(); ncols];
    for (r, &col) in pivots.iter().enumerate().rev() {
        let mut acc = ech[r][ncols].clone();
        for j in col + 1..ncols {
            acc -= ech[r][j].clone() * x[j].clone();
        }
        x[col] = acc / ech[r][col].clone();
    }
    Ok(Some(x))
}

/// Builds the coefficient equations for `D^3 + sum_{k<=kmax} t^k p_k(D)`
/// applied to `phi`: one augmented row per series index `n >= 1`.
fn fit_rows<C: Coeff>(phi: &Series<C>, kmax: usize) -> Vec<Vec<C>> {
    let ncols = 4 * kmax;
    let mut rows = Vec::with_capacity(phi.prec() - 1);
    for n in 1..phi.prec() {
        let mut row = vec![C::zero(); ncols + 1];
        for k in 1..=kmax {
            if n < k {
                continue;
            }
            let src = phi.coeff(n - k);
            if src.is_zero() {
                continue;
            }
            let arg = C::from_u64((n - k) as u64);
            let mut pw = C::one();
            for m in 0..4 {
                row[(k - 1) * 4 + m] = src.clone() * pw.clone();
                pw = pw * arg.clone();
            }
        }
        // n^3 phi_n + sum p_k(n-k) phi_{n-k} = 0
        let n3 = C::from_u64((n * n * n) as u64);
        row[ncols] = -(n3 * phi.coeff(n).clone());
        rows.push(row);
    }
    rows
}

fn drop_zero_columns<C: Coeff>(rows: &[Vec<C>], ncols: usize) -> (Vec<Vec<C>>, Vec<usize>) {
    let live: Vec<usize> = (0..ncols)
        .filter(|&j| rows.iter().any(|r| !r[j].is_zero()))
        .collect();
    let reduced = rows
        .iter()
        .map(|r| {
            let mut nr: Vec<C> = live.iter().map(|&j| r[j].clone()).collect();
            nr.push(r[ncols].clone());
            nr
        })
        .collect();
    (reduced, live)
}

fn op_from_solution(x: &[Rat], live: &[usize], kmax: usize) -> WeylOp {
    let mut full = vec![Rat::zero(); 4 * kmax];
    for (i, &j) in live.iter().enumerate() {
        full[j] = x[i].clone();
    }
    let mut terms = vec![(0i64, DPoly::new(vec![rat(0), rat(0), rat(0), rat(1)]))];
    for k in 1..=kmax {
        terms.push((k as i64, DPoly::new(full[(k - 1) * 4..k * 4].to_vec())));
    }
    WeylOp::from_terms(terms)
}

/// The unique operator `D^3 + sum_{k=1..K} t^k p_k(D)`, `deg p_k <= 3`,
/// `K <= 4` minimal, annihilating `phi` through its full precision.
pub fn fit_d3(phi: &RatSeries) -> Result<WeylOp, PfitError> {
    if phi.prec() < 24 {
        return Err(PfitError::UnderdeterminedFit);
    }
    assert!(phi.coeff(0).is_one(), "fit target must have constant term 1");
    let mut saw_rank_deficiency = false;
    for kmax in 1..=4usize {
        let rows = fit_rows(phi, kmax);
        let (reduced, live) = drop_zero_columns(&rows, 4 * kmax);
        match solve_rat(reduced, live.len()) {
            Ok(Some(x)) => {
                let l = op_from_solution(&x, &live, kmax);
                debug_assert!(l.apply(phi).is_zero_series());
                return Ok(l);
            }
            Ok(None) => continue, // inconsistent: t-degree too small
            Err(()) => saw_rank_deficiency = true,
        }
    }
    if saw_rank_deficiency {
        Err(PfitError::UnderdeterminedFit)
    } else {
        Err(PfitError::NoD3Annihilator)
    }
}

fn d3_coeff_slots(l: &WeylOp, k: i64) -> [Rat; 4] {
    let p = l.poly_at(k);
    [p.coeff(0), p.coeff(1), p.coeff(2), p.coeff(3)]
}

/// Inverts the closed-form order-3 expansion stage by stage, reading the
/// six independent matrix entries off the coefficient polynomials. Every
/// slot not used to define an entry is a residual that must vanish; a
/// nonzero residual means the operator is not of the determinantal shape.
pub fn extract_matrix(l: &WeylOp) -> Result<DNMatrix, PfitError> {
    let shape_err = |p: DPoly| PfitError::NotD3Shaped(p);
    if l.min_tdeg().map_or(false, |k| k < 0)
        || l.max_tdeg().map_or(false, |k| k > 4)
        || l.poly_at(0) != DPoly::new(vec![rat(0), rat(0), rat(0), rat(1)])
        || l.order() > Some(3)
    {
        return Err(shape_err(l.poly_at(0)));
    }

    let p1 = d3_coeff_slots(l, 1);
    let a00 = -p1[0].clone();
    let s = -p1[3].clone() / rat(2);
    let a11 = s.clone() - a00.clone();
    let r1 = DPoly::new(vec![
        Rat::zero(),
        p1[1].clone() + (s.clone() + rat(2) * a00.clone()),
        p1[2].clone() + rat(3) * s.clone(),
        Rat::zero(),
    ]);
    if !r1.is_zero() {
        return Err(shape_err(r1));
    }

    let p2 = d3_coeff_slots(l, 2);
    let gamma = p2[0].clone();
    let alpha = p2[3].clone();
    let a01 = (rat(6) * a11.clone() * a00.clone() + a00.clone() * a00.clone()
        - gamma.clone())
        / rat(4);
    let a12 = a11.clone() * a11.clone()
        + a00.clone() * a00.clone()
        + rat(4) * a11.clone() * a00.clone()
        - rat(2) * a01.clone()
        - alpha.clone();
    let beta = rat(8) * a11.clone() * a00.clone() - rat(2) * a12.clone()
        + rat(2) * a00.clone() * a00.clone()
        - rat(4) * a01.clone()
        + rat(2) * a11.clone() * a11.clone();
    let r2 = DPoly::new(vec![
        Rat::zero(),
        p2[1].clone() - (beta.clone() + gamma),
        p2[2].clone() - (alpha + beta),
        Rat::zero(),
    ]);
    if !r2.is_zero() {
        return Err(shape_err(r2));
    }

    // p3 must be proportional to -(2D+3)(D+2)(D+1) = -[6,13,9,2]
    let p3 = l.poly_at(3);
    let c3 = -p3.coeff(0) / rat(6);
    let want3 = DPoly::new(vec![rat(6), rat(13), rat(9), rat(2)]).scale(&-c3.clone());
    if p3 != want3 {
        return Err(shape_err(p3.sub(&want3)));
    }
    let a02 = c3
        - a00.clone() * a00.clone() * a11.clone()
        - a11.clone() * a11.clone() * a00.clone()
        + a12.clone() * a00.clone()
        + a11.clone() * a01.clone()
        + a01.clone() * a00.clone();

    // p4 must be proportional to (D+3)(D+2)(D+1) = [6,11,6,1]
    let p4 = l.poly_at(4);
    let c4 = p4.coeff(0) / rat(6);
    let want4 = DPoly::new(vec![rat(6), rat(11), rat(6), rat(1)]).scale(&c4);
    if p4 != want4 {
        return Err(shape_err(p4.sub(&want4)));
    }
    let a03 = -c4 - a00.clone() * a00.clone() * a12.clone()
        + rat(2) * a02.clone() * a00.clone()
        + a00.clone() * a00.clone() * a11.clone() * a11.clone()
        + a01.clone() * a01.clone()
        - rat(2) * a01.clone() * a11.clone() * a00.clone();

    Ok(DNMatrix::d3(a00, a11, a01, a12, a02, a03))
}

/// Shifts the diagonal so the corner entry vanishes; the class
/// representative of the matrix.
pub fn normalize_class(m: &DNMatrix) -> DNMatrix {
    let n = m.n();
    let a00 = m.entry(0, 0);
    DNMatrix::new(
        n,
        (0..=n).flat_map(|k| {
            let m = &m;
            let a00 = a00.clone();
            (k..=n).map(move |l| {
                let v = if k == l {
                    m.entry(k, l) - a00.clone()
                } else {
                    m.entry(k, l)
                };
                ((k, l), v)
            })
        }),
    )
}

/// Expands the holomorphic solution of the pair, fits its annihilator, and
/// reads off the matrix. The operator is returned alongside; building the
/// determinant of the matrix reproduces it exactly.
pub fn recover(
    n: u32,
    d: u32,
    c0: &Rat,
    prec: usize,
) -> Result<(DNMatrix, WeylOp), PfitError> {
    if !modular::PAIRS.contains(&(n, d)) {
        return Err(PfitError::UnsupportedPair(n, d));
    }
    let phi = modular::holomorphic_solution(n, d, c0, prec)?;
    let l = fit_d3(&phi)?;
    let m = extract_matrix(&l)?;
    debug_assert_eq!(dn_build(&m).unwrap(), l);
    Ok((m, l))
}

/// Dense polynomial in the symbolic constant term, over the rationals.
/// Coefficient ring for the symbolic-constant fit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CPoly {
    c: Vec<Rat>,
}

impl CPoly {
    pub fn new(mut c: Vec<Rat>) -> Self {
        while c.last().map_or(false, |x| x.is_zero()) {
            c.pop();
        }
        CPoly { c }
    }

    pub fn constant(r: Rat) -> Self {
        CPoly::new(vec![r])
    }

    /// The symbol itself.
    pub fn sym() -> Self {
        CPoly::new(vec![Rat::zero(), Rat::one()])
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.c
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.c.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    fn monic(&self) -> CPoly {
        match self.c.last() {
            None => CPoly::default(),
            Some(lead) => CPoly::new(self.c.iter().map(|x| x / lead).collect()),
        }
    }

    /// Long division; returns (quotient, remainder).
    fn div_rem(&self, d: &CPoly) -> (CPoly, CPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.c[dd].clone();
        let mut rem = self.c.clone();
        if rem.len() <= dd {
            return (CPoly::default(), self.clone());
        }
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let q = rem[i].clone() / lead.clone();
            if q.is_zero() {
                continue;
            }
            quot[i - dd] = q.clone();
            for j in 0..=dd {
                let sub = q.clone() * d.c[j].clone();
                rem[i - dd + j] -= sub;
            }
        }
        (CPoly::new(quot), CPoly::new(rem))
    }

    fn gcd(&self, other: &CPoly) -> CPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// All rational roots. Degree <= 2 is solved directly; higher degrees
    /// are searched through the linear factors found by repeated division.
    pub fn rational_roots(&self) -> Vec<Rat> {
        let mut out = Vec::new();
        let mut p = self.monic();
        // strip roots at zero
        while p.degree().map_or(false, |d| d >= 1) && p.c[0].is_zero() {
            if !out.contains(&Rat::zero()) {
                out.push(Rat::zero());
            }
            p = CPoly::new(p.c[1..].to_vec());
        }
        loop {
            match p.degree() {
                None | Some(0) => break,
                Some(1) => {
                    out.push(-p.c[0].clone());
                    break;
                }
                Some(2) => {
                    // monic: x^2 + bx + c
                    let b = p.c[1].clone();
                    let c = p.c[0].clone();
                    let disc = b.clone() * b.clone() - rat(4) * c;
                    if let Some(sq) = rat_sqrt(&disc) {
                        out.push((-b.clone() + sq.clone()) / rat(2));
                        out.push((-b - sq) / rat(2));
                    }
                    break;
                }
                Some(_) => {
                    // peel one rational root via the derivative-free scan of
                    // candidate linear factors x - r with r a root of the
                    // gcd with a shifted copy; fall back to giving up.
                    match find_linear_factor(&p) {
                        Some(r) => {
                            out.push(r.clone());
                            let (q, rem) = p.div_rem(&CPoly::new(vec![-r, Rat::one()]));
                            debug_assert!(rem.is_zero());
                            p = q;
                        }
                        None => break,
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
}

/// Exact rational square root, if one exists.
fn rat_sqrt(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let cand = Rat::new(x.numer().sqrt(), x.denom().sqrt());
    (&(cand.clone() * cand.clone()) == x).then_some(cand)
}

/// Rational-root search for monic integer-cleared polynomials of degree at
/// least 3; bounded divisor enumeration, `None` if the constant term is too
/// large to factor cheaply.
fn find_linear_factor(p: &CPoly) -> Option<Rat> {
    // clear denominators to an integer polynomial
    let mut den = num_bigint::BigInt::one();
    for c in p.coeffs() {
        den = num_integer::lcm(den, c.denom().clone());
    }
    let ints: Vec<num_bigint::BigInt> = p
        .coeffs()
        .iter()
        .map(|c| (c * Rat::from_integer(den.clone())).to_integer())
        .collect();
    let a0 = ints.first()?.clone();
    let an = ints.last()?.clone();
    if a0.is_zero() {
        return Some(Rat::zero());
    }
    let a0u: u64 = a0.magnitude().try_into().ok()?;
    let anu: u64 = an.magnitude().try_into().ok()?;
    for pd in small_divisors(a0u) {
        for qd in small_divisors(anu) {
            for sign in [1i64, -1] {
                let cand = Rat::new((sign * pd as i64).into(), (qd as i64).into());
                if p.eval(&cand).is_zero() {
                    return Some(cand);
                }
            }
        }
    }
    None
}

fn small_divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1;
    while i * i <= n {
        if n % i == 0 {
            out.push(i);
            out.push(n / i);
        }
        i += 1;
    }
    out.sort_unstable();
    out.dedup();
    out
}

impl core::ops::Add for CPoly {
    type Output = CPoly;
    fn add(self, rhs: CPoly) -> CPoly {
        let n = self.c.len().max(rhs.c.len());
        CPoly::new(
            (0..n)
                .map(|i| {
                    self.c.get(i).cloned().unwrap_or_else(Rat::zero)
                        + rhs.c.get(i).cloned().unwrap_or_else(Rat::zero)
                })
                .collect(),
        )
    }
}

impl core::ops::Sub for CPoly {
    type Output = CPoly;
    fn sub(self, rhs: CPoly) -> CPoly {
        self + (-rhs)
    }
}

impl core::ops::Neg for CPoly {
    type Output = CPoly;
    fn neg(self) -> CPoly {
        CPoly {
            c: self.c.into_iter().map(|x| -x).collect(),
        }
    }
}

impl core::ops::Mul for CPoly {
    type Output = CPoly;
    fn mul(self, rhs: CPoly) -> CPoly {
        if self.c.is_empty() || rhs.c.is_empty() {
            return CPoly::default();
        }
        let mut out = vec![Rat::zero(); self.c.len() + rhs.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CPoly::new(out)
    }
}

impl Zero for CPoly {
    fn zero() -> Self {
        CPoly::default()
    }
    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }
}

impl One for CPoly {
    fn one() -> Self {
        CPoly::constant(Rat::one())
    }
    fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].is_one()
    }
}

impl Coeff for CPoly {
    fn try_invert(&self) -> Option<Self> {
        if self.c.len() == 1 {
            Some(CPoly::constant(Rat::one() / self.c[0].clone()))
        } else {
            None
        }
    }
}

impl ExactDiv for CPoly {
    fn exact_div(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }
}

/// Treats the uniformizer's constant term as a symbol: the whole change of
/// variable and the fit run over polynomials in it, and the fit's surplus
/// equations become polynomial conditions. Their common rational roots,
/// certified by a plain recovery, are the candidate constants.
pub fn auto_c0(n: u32, d: u32, prec: usize) -> Result<Vec<Rat>, PfitError> {
    if !modular::PAIRS.contains(&(n, d)) {
        return Err(PfitError::UnsupportedPair(n, d));
    }
    // B with the constant slot symbolic
    let b_num = modular::b_series(n, &Rat::zero(), prec)?;
    let mut b = Series::<CPoly>::new(
        b_num.coeffs().iter().cloned().map(CPoly::constant).collect(),
    );
    b.set_coeff(1, CPoly::sym());
    let phi_num = modular::phi_q(n, 1, prec)?;
    let phi = Series::<CPoly>::new(
        phi_num
            .coeffs()
            .iter()
            .cloned()
            .map(CPoly::constant)
            .collect(),
    );
    let sol = modular::solution_from_b(&phi, &b, d).map_err(ModularError::from)?;

    let mut candidates: Vec<Rat> = Vec::new();
    for kmax in 1..=4usize {
        let rows = fit_rows(&sol, kmax);
        let (reduced, live) = drop_zero_columns(&rows, 4 * kmax);
        let ncols = live.len();
        let (ech, pivots) = bareiss_echelon(reduced, ncols);
        let mut residual_gcd = CPoly::default();
        for row in ech.iter().skip(pivots.len()) {
            if !row[ncols].is_zero() {
                residual_gcd = residual_gcd.gcd(&row[ncols]);
            }
        }
        if residual_gcd.is_zero() {
            continue; // identically consistent; nothing to pin down here
        }
        for root in residual_gcd.rational_roots() {
            if !candidates.contains(&root) {
                candidates.push(root);
            }
        }
    }
    // certify: the plain pipeline at this constant must recover a matrix
    let mut out: Vec<Rat> = candidates
        .into_iter()
        .filter(|c0| recover(n, d, c0, prec).is_ok())
        .collect();
    out.sort();
    Ok(out)
}
