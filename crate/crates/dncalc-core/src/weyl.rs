//! Noncommutative operator algebra in `t` and `D = t d/dt`, with the
//! determinantal construction of order-`N` operators from symmetric
//! coefficient matrices.
//!
//! Operators are kept in torus normal form `sum_k t^k p_k(D)` with integer
//! (possibly negative) `t`-degrees and polynomial `p_k`. The commutation
//! rule is `p(D) t^k = t^k p(D + k)`. A second normal form over the
//! polynomial variable `t` with `d/dt` (here `A1Op`) supports the Fourier
//! transform and the conversion to companion matrices.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::numth::{rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeylError {
    NotLeftDivisibleByD,
    NotLeftDivisibleByT,
    /// Conversion to the `(t, d/dt)` form needs nonnegative `t`-degrees.
    NegativeTDegree,
}

impl fmt::Display for WeylError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            WeylError::NotLeftDivisibleByD => "NotLeftDivisibleByD",
            WeylError::NotLeftDivisibleByT => "NotLeftDivisibleByT",
            WeylError::NegativeTDegree => "NegativeTDegree",
        };
        write!(f, "{msg}")
    }
}

/// Polynomial in `D` with rational coefficients; trailing zeros stripped.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DPoly {
    coeffs: Vec<Rat>,
}

impl DPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        DPoly { coeffs }
    }

    pub fn zero() -> Self {
        DPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        DPoly::new(vec![c])
    }

    pub fn one() -> Self {
        DPoly::constant(Rat::one())
    }

    /// The variable `D`.
    pub fn var() -> Self {
        DPoly::new(vec![Rat::zero(), Rat::one()])
    }

    /// `D + c`.
    pub fn linear(c: Rat) -> Self {
        DPoly::new(vec![c, Rat::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        DPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        DPoly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        DPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return DPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        DPoly::new(out)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    /// `p(D + a)`, by Horner over the shifted variable.
    pub fn shift(&self, a: &Rat) -> Self {
        let mut acc = DPoly::zero();
        let lin = DPoly::linear(a.clone());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin).add(&DPoly::constant(c.clone()));
        }
        acc
    }

    /// Exact quotient by `D + c`, if `-c` is a root.
    pub fn div_linear(&self, c: &Rat) -> Option<Self> {
        if self.is_zero() {
            return Some(DPoly::zero());
        }
        let root = -c.clone();
        let mut quot = vec![Rat::zero(); self.coeffs.len() - 1];
        let mut carry = Rat::zero();
        for i in (0..self.coeffs.len()).rev() {
            let v = self.coeffs[i].clone() + carry.clone() * root.clone();
            if i == 0 {
                if !v.is_zero() {
                    return None;
                }
            } else {
                quot[i - 1] = v.clone();
                carry = v;
            }
        }
        Some(DPoly::new(quot))
    }

    /// Product `(D + a_1)(D + a_2)...` over the given constants.
    pub fn from_roots(shifts: &[Rat]) -> Self {
        let mut acc = DPoly::one();
        for s in shifts {
            acc = acc.mul(&DPoly::linear(s.clone()));
        }
        acc
    }
}

/// Operator `sum_k t^k p_k(D)` in torus normal form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeylOp {
    terms: BTreeMap<i64, DPoly>,
}

impl WeylOp {
    pub fn zero() -> Self {
        WeylOp::default()
    }

    pub fn one() -> Self {
        WeylOp::term(0, DPoly::one())
    }

    pub fn d() -> Self {
        WeylOp::term(0, DPoly::var())
    }

    pub fn t() -> Self {
        WeylOp::term(1, DPoly::one())
    }

    pub fn term(tdeg: i64, p: DPoly) -> Self {
        let mut terms = BTreeMap::new();
        if !p.is_zero() {
            terms.insert(tdeg, p);
        }
        WeylOp { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (i64, DPoly)>) -> Self {
        let mut op = WeylOp::zero();
        for (k, p) in it {
            op.add_term(k, p);
        }
        op
    }

    fn add_term(&mut self, tdeg: i64, p: DPoly) {
        if p.is_zero() {
            return;
        }
        let entry = self.terms.entry(tdeg).or_insert_with(DPoly::zero);
        *entry = entry.add(&p);
        if entry.is_zero() {
            self.terms.remove(&tdeg);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &DPoly)> {
        self.terms.iter().map(|(k, p)| (*k, p))
    }

    pub fn poly_at(&self, tdeg: i64) -> DPoly {
        self.terms.get(&tdeg).cloned().unwrap_or_else(DPoly::zero)
    }

    pub fn min_tdeg(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_tdeg(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Maximum degree in `D` across all terms.
    pub fn order(&self) -> Option<usize> {
        self.terms.values().filter_map(|p| p.degree()).max()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, p) in &other.terms {
            out.add_term(*k, p.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        WeylOp {
            terms: self.terms.iter().map(|(k, p)| (*k, p.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return WeylOp::zero();
        }
        WeylOp {
            terms: self.terms.iter().map(|(k, p)| (*k, p.scale(c))).collect(),
        }
    }

    /// `(t^j p(D)) (t^k q(D)) = t^{j+k} p(D+k) q(D)`.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = WeylOp::zero();
        for (j, p) in &self.terms {
            for (k, q) in &other.terms {
                out.add_term(j + k, p.shift(&rat(*k)).mul(q));
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = WeylOp::one();
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

    /// Formal adjoint: `t^k p(D) -> t^k p(-D-k)`. An involution; the
    /// order-3 operators built here satisfy `L* = -L`.
    pub fn adjoint(&self) -> Self {
        WeylOp {
            terms: self
                .terms
                .iter()
                .map(|(k, p)| {
                    // substitute D -> -D-k
                    let subst = DPoly::new(vec![rat(-*k), rat(-1)]);
                    let mut acc = DPoly::zero();
                    for c in p.coeffs().iter().rev() {
                        acc = acc.mul(&subst).add(&DPoly::constant(c.clone()));
                    }
                    (*k, acc)
                })
                .collect(),
        }
    }

    /// The indicial polynomial at `t = 0`, i.e. `p_0(D)`.
    pub fn indicial_at_zero(&self) -> DPoly {
        self.poly_at(0)
    }

    /// Factors out one left `D`: `D t^k p(D) = t^k (D+k) p(D)`.
    pub fn strip_left_d(&self) -> Result<Self, WeylError> {
        let mut out = WeylOp::zero();
        for (k, q) in &self.terms {
            let p = q
                .div_linear(&rat(*k))
                .ok_or(WeylError::NotLeftDivisibleByD)?;
            out.add_term(*k, p);
        }
        Ok(out)
    }

    /// Left-multiplies by `t^s` (any sign): shifts all `t`-degrees.
    pub fn tshift(&self, s: i64) -> Self {
        WeylOp {
            terms: self.terms.iter().map(|(k, p)| (k + s, p.clone())).collect(),
        }
    }

    /// Right-multiplies by `t`: `t^k p(D) t = t^{k+1} p(D+1)`.
    pub fn mul_right_t(&self) -> Self {
        WeylOp {
            terms: self
                .terms
                .iter()
                .map(|(k, p)| (k + 1, p.shift(&Rat::one())))
                .collect(),
        }
    }

    /// Substitutes `t -> -t` (equivalently `t -> -t, d/dt -> -d/dt`,
    /// fixing `D`): `t^k p(D) -> (-1)^k t^k p(D)`.
    pub fn negate_t(&self) -> Self {
        WeylOp {
            terms: self
                .terms
                .iter()
                .map(|(k, p)| (*k, if k.rem_euclid(2) == 1 { p.neg() } else { p.clone() }))
                .collect(),
        }
    }

    /// The involution `t^k p(D) -> t^{-k} p(-D)`.
    pub fn invert_t(&self) -> Self {
        WeylOp {
            terms: self
                .terms
                .iter()
                .map(|(k, p)| {
                    let flipped = DPoly::new(
                        p.coeffs()
                            .iter()
                            .enumerate()
                            .map(|(i, c)| if i % 2 == 1 { -c.clone() } else { c.clone() })
                            .collect(),
                    );
                    (-k, flipped)
                })
                .collect(),
        }
    }

    /// Applies the operator to `x^offset * body(x)`; `D x^e = e x^e`.
    pub fn apply_frac(&self, f: &crate::series::FracSeries) -> crate::series::FracSeries {
        use crate::series::{FracSeries, RatSeries};
        let prec = f.body().prec();
        let mut out = vec![Rat::zero(); prec];
        for (k, p) in &self.terms {
            assert!(*k >= 0, "apply_frac needs nonnegative t-degrees");
            let k = *k as usize;
            for m in k..prec {
                let src = f.body().coeff(m - k);
                if src.is_zero() {
                    continue;
                }
                let expo = f.offset().clone() + rat((m - k) as i64);
                out[m] += p.eval(&expo) * src;
            }
        }
        FracSeries::new(f.offset().clone(), RatSeries::new(out))
    }

    pub fn apply(&self, f: &crate::series::RatSeries) -> crate::series::RatSeries {
        use crate::series::FracSeries;
        let wrapped = self.apply_frac(&FracSeries::new(Rat::zero(), f.clone()));
        // re-expand the normalized fractional form back to a plain series
        let off = wrapped.offset().clone();
        assert!(off.is_integer());
        let off: i64 = off.to_integer().try_into().unwrap();
        let mut out = vec![Rat::zero(); f.prec()];
        for i in 0..wrapped.body().prec() {
            let e = off + i as i64;
            if (0..f.prec() as i64).contains(&e) {
                out[e as usize] = wrapped.body().coeff(i).clone();
            }
        }
        crate::series::RatSeries::new(out)
    }

    /// Conversion to the `(t, d/dt)` normal form via
    /// `D^m = sum_j S(m,j) t^j (d/dt)^j` (Stirling numbers of the second kind).
    pub fn to_a1(&self) -> Result<A1Op, WeylError> {
        let mut out = A1Op::zero();
        for (k, p) in &self.terms {
            if *k < 0 {
                return Err(WeylError::NegativeTDegree);
            }
            let k = *k as u32;
            for (m, c) in p.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if m == 0 {
                    out.add_term(k, 0, c.clone());
                    continue;
                }
                for j in 1..=m {
                    out.add_term(k + j as u32, j as u32, c * stirling2(m, j));
                }
            }
        }
        Ok(out)
    }
}

/// `S(m, j)`, Stirling numbers of the second kind, as a rational.
fn stirling2(m: usize, j: usize) -> Rat {
    let mut row: Vec<u128> = vec![0; m + 1];
    row[0] = 1;
    for _ in 0..m {
        for i in (1..=m).rev() {
            row[i] = row[i - 1] + (i as u128) * row[i];
        }
        row[0] = 0;
    }
    Rat::from_integer(row[j].into())
}

fn binom(n: u32, k: u32) -> Rat {
    let mut acc = Rat::one();
    for i in 0..k {
        acc = acc * rat((n - i) as i64) / rat((i + 1) as i64);
    }
    acc
}

fn falling(n: u32, k: u32) -> Rat {
    let mut acc = Rat::one();
    for i in 0..k {
        if n < i {
            return Rat::zero();
        }
        acc = acc * rat(n as i64 - i as i64);
    }
    acc
}

/// Operator `sum t^a (d/dt)^b` in normal form over nonnegative powers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct A1Op {
    terms: BTreeMap<(u32, u32), Rat>,
}

impl A1Op {
    pub fn zero() -> Self {
        A1Op::default()
    }

    pub fn add_term(&mut self, a: u32, b: u32, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((a, b)).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &Rat)> {
        self.terms.iter().map(|(&(a, b), c)| (a, b, c))
    }

    /// Coefficient polynomials in `t`, indexed by the `d/dt` power.
    pub fn by_derivative_order(&self) -> BTreeMap<u32, Vec<Rat>> {
        let mut out: BTreeMap<u32, Vec<Rat>> = BTreeMap::new();
        for (&(a, b), c) in &self.terms {
            let poly = out.entry(b).or_default();
            if poly.len() <= a as usize {
                poly.resize(a as usize + 1, Rat::zero());
            }
            poly[a as usize] += c.clone();
        }
        out
    }

    /// Factors out one left `t`; every monomial must have `t`-degree >= 1.
    pub fn strip_left_t(&self) -> Result<Self, WeylError> {
        let mut out = A1Op::zero();
        for (&(a, b), c) in &self.terms {
            if a == 0 {
                return Err(WeylError::NotLeftDivisibleByT);
            }
            out.add_term(a - 1, b, c.clone());
        }
        Ok(out)
    }

    /// Fourier transform `t -> d/dt, d/dt -> -t`, renormalized:
    /// `t^a (d/dt)^b -> (-1)^b sum_j C(a,j) (b)_j t^{b-j} (d/dt)^{a-j}`.
    pub fn fourier(&self) -> Self {
        let mut out = A1Op::zero();
        for (&(a, b), c) in &self.terms {
            let sign = if b % 2 == 1 { -c.clone() } else { c.clone() };
            for j in 0..=a.min(b) {
                out.add_term(b - j, a - j, sign.clone() * binom(a, j) * falling(b, j));
            }
        }
        out
    }

    /// Back to torus form: `t^a (d/dt)^b = t^{a-b} D(D-1)...(D-b+1)`.
    pub fn to_weyl(&self) -> WeylOp {
        let mut out = WeylOp::zero();
        for (&(a, b), c) in &self.terms {
            let fall: Vec<Rat> = (0..b).map(|i| rat(-(i as i64))).collect();
            let p = DPoly::from_roots(&fall).scale(c);
            out = out.add(&WeylOp::term(a as i64 - b as i64, p));
        }
        out
    }
}

/// Symmetric coefficient matrix: entries `a_{kl}` for `0 <= k <= l <= n`
/// with the anti-transpose symmetry `a_{kl} = a_{n-l, n-k}` enforced at
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DNMatrix {
    n: usize,
    a: BTreeMap<(usize, usize), Rat>,
}

impl DNMatrix {
    /// Builds from any set of upper-triangle entries; the anti-transpose
    /// image of every entry is filled in, and conflicting assignments panic.
    pub fn new(n: usize, entries: impl IntoIterator<Item = ((usize, usize), Rat)>) -> Self {
        let mut a = BTreeMap::new();
        for ((k, l), v) in entries {
            assert!(k <= l && l <= n, "entry ({k},{l}) out of range");
            let mirror = (n - l, n - k);
            for key in [(k, l), mirror] {
                match a.get(&key) {
                    None => {
                        a.insert(key, v.clone());
                    }
                    Some(old) => assert_eq!(old, &v, "symmetry conflict at {key:?}"),
                }
            }
        }
        // canonical form: zero entries are absent
        a.retain(|_, v| !v.is_zero());
        DNMatrix { n, a }
    }

    /// Order-3 case from the six independent entries.
    pub fn d3(a00: Rat, a11: Rat, a01: Rat, a12: Rat, a02: Rat, a03: Rat) -> Self {
        DNMatrix::new(
            3,
            [
                ((0, 0), a00),
                ((1, 1), a11),
                ((0, 1), a01),
                ((1, 2), a12),
                ((0, 2), a02),
                ((0, 3), a03),
            ],
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, k: usize, l: usize) -> Rat {
        assert!(k <= l && l <= self.n);
        self.a.get(&(k, l)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &Rat)> {
        self.a.iter().map(|(&k, v)| (k, v))
    }
}

/// Determinant with right-to-left multiplication order: expansion along the
/// rightmost column, each element multiplying its complement from the left.
pub fn right_det(mat: &[Vec<WeylOp>]) -> WeylOp {
    let n = mat.len();
    if n == 0 {
        return WeylOp::one();
    }
    if n == 1 {
        return mat[0][0].clone();
    }
    let mut det = WeylOp::zero();
    for i in 0..n {
        let elem = &mat[i][n - 1];
        if elem.is_zero() {
            continue;
        }
        let minor: Vec<Vec<WeylOp>> = mat
            .iter()
            .enumerate()
            .filter(|(r, _)| *r != i)
            .map(|(_, row)| row[..n - 1].to_vec())
            .collect();
        let comp = right_det(&minor);
        let term = elem.mul(&comp);
        if (i + n - 1) % 2 == 1 {
            det = det.sub(&term);
        } else {
            det = det.add(&term);
        }
    }
    det
}

/// `(Dt)^m = t^m (D+m)(D+m-1)...(D+1)`.
fn dt_power(m: usize) -> WeylOp {
    let shifts: Vec<Rat> = (1..=m as i64).map(rat).collect();
    WeylOp::term(m as i64, DPoly::from_roots(&shifts))
}

/// The determinantal operator of order `n` attached to the matrix:
/// take `M_{kl} = a_{kl} (Dt)^{l-k+1}` on and above the diagonal, `1` on the
/// first subdiagonal, form the right determinant of `D - M`, and factor out
/// the single left `D`.
pub fn dn_build(m: &DNMatrix) -> Result<WeylOp, WeylError> {
    let n = m.n() + 1;
    let mut mat = vec![vec![WeylOp::zero(); n]; n];
    for (r, row) in mat.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let mut v = if r == c {
                WeylOp::d()
            } else {
                WeylOp::zero()
            };
            if r <= c {
                let a = m.entry(r, c);
                if !a.is_zero() {
                    v = v.sub(&dt_power(c - r + 1).scale(&a));
                }
            } else if r == c + 1 {
                v = v.sub(&WeylOp::one());
            }
            *cell = v;
        }
    }
    right_det(&mat).strip_left_d()
}

/// Closed-form expansion of the order-3 determinant in terms of the six
/// independent matrix entries. Agrees with [`dn_build`] identically; kept
/// as an independent check and as the template for coefficient extraction.
pub fn d3_expand(m: &DNMatrix) -> WeylOp {
    assert_eq!(m.n(), 3);
    let (a00, a11) = (m.entry(0, 0), m.entry(1, 1));
    let (a01, a12) = (m.entry(0, 1), m.entry(1, 2));
    let (a02, a03) = (m.entry(0, 2), m.entry(0, 3));
    let s = a00.clone() + a11.clone();

    let p1 = DPoly::new(vec![
        -a00.clone(),
        -(s.clone() + rat(2) * a00.clone()),
        rat(-3) * s.clone(),
        rat(-2) * s.clone(),
    ]);

    let alpha = a11.clone() * a11.clone()
        + a00.clone() * a00.clone()
        + rat(4) * a11.clone() * a00.clone()
        - rat(2) * a01.clone()
        - a12.clone();
    let gamma = rat(6) * a11.clone() * a00.clone() + a00.clone() * a00.clone()
        - rat(4) * a01.clone();
    let beta = rat(8) * a11.clone() * a00.clone() - rat(2) * a12.clone()
        + rat(2) * a00.clone() * a00.clone()
        - rat(4) * a01.clone()
        + rat(2) * a11.clone() * a11.clone();
    let p2 = DPoly::new(vec![
        gamma.clone(),
        beta.clone() + gamma,
        alpha.clone() + beta,
        alpha,
    ]);

    let c3 = a00.clone() * a00.clone() * a11.clone()
        + a11.clone() * a11.clone() * a00.clone()
        - a12.clone() * a00.clone()
        - a11.clone() * a01.clone()
        - a01.clone() * a00.clone()
        + a02.clone();
    // -(2D+3)(D+2)(D+1) scaled by c3
    let p3 = DPoly::new(vec![rat(6), rat(13), rat(9), rat(2)]).scale(&-c3);

    let c4 = -a03
        - a00.clone() * a00.clone() * a12
        + rat(2) * a02 * a00.clone()
        + a00.clone() * a00.clone() * a11.clone() * a11.clone()
        + a01.clone() * a01.clone()
        - rat(2) * a01 * a11 * a00;
    let p4 = DPoly::new(vec![rat(6), rat(11), rat(6), rat(1)]).scale(&c4);

    WeylOp::from_terms([
        (0, DPoly::new(vec![rat(0), rat(0), rat(0), rat(1)])),
        (1, p1),
        (2, p2),
        (3, p3),
        (4, p4),
    ])
}

/// The regularization route to the same operator: build the simpler matrix
/// with entries `a_{kl} t^{l-k+1}`, take the right determinant of `D - M`,
/// strip one left `t`, apply the Fourier transform, pull back through
/// `t -> 1/t` and `t -> -t`, right-multiply by `t`, and shift the minimum
/// `t`-degree to zero. Agrees with [`dn_build`] exactly.
pub fn regularized_build(m: &DNMatrix) -> Result<WeylOp, WeylError> {
    let n = m.n() + 1;
    let mut mat = vec![vec![WeylOp::zero(); n]; n];
    for (r, row) in mat.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let mut v = if r == c { WeylOp::d() } else { WeylOp::zero() };
            if r <= c {
                let a = m.entry(r, c);
                if !a.is_zero() {
                    v = v.sub(&WeylOp::term((c - r + 1) as i64, DPoly::constant(a)));
                }
            } else if r == c + 1 {
                v = v.sub(&WeylOp::one());
            }
            *cell = v;
        }
    }
    let det = right_det(&mat);
    let a1 = det.to_a1()?;
    let stripped = a1.strip_left_t()?;
    let transformed = stripped.fourier().to_weyl();
    let pulled = transformed.invert_t().negate_t().mul_right_t();
    let shift = pulled.min_tdeg().unwrap_or(0);
    Ok(pulled.tshift(-shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numth::rat_frac;
    use proptest::prelude::*;

    fn d3_int(a00: i64, a11: i64, a01: i64, a12: i64, a02: i64, a03: i64) -> DNMatrix {
        DNMatrix::d3(rat(a00), rat(a11), rat(a01), rat(a12), rat(a02), rat(a03))
    }

    /// `D^3 + sum_k t^k p_k` from coefficient rows (constant term first).
    fn d3_op(rows: &[&[i64]]) -> WeylOp {
        let mut terms = vec![(0i64, DPoly::new(vec![rat(0), rat(0), rat(0), rat(1)]))];
        for (i, row) in rows.iter().enumerate() {
            terms.push((
                i as i64 + 1,
                DPoly::new(row.iter().map(|&c| rat(c)).collect()),
            ));
        }
        WeylOp::from_terms(terms)
    }

    #[test]
    fn commutation_rule() {
        // D t = t (D + 1)
        let dt = WeylOp::d().mul(&WeylOp::t());
        assert_eq!(dt, WeylOp::term(1, DPoly::linear(rat(1))));
        // t D != D t
        assert_ne!(WeylOp::t().mul(&WeylOp::d()), dt);
    }

    #[test]
    fn zero_matrix_gives_pure_d() {
        let m = DNMatrix::new(3, []);
        assert_eq!(
            dn_build(&m).unwrap(),
            WeylOp::term(0, DPoly::new(vec![rat(0), rat(0), rat(0), rat(1)]))
        );
    }

    #[test]
    fn level_two_operator() {
        // D^3 - 8 t (2D+1)(4D+3)(4D+1) = D^3 - t(256 D^3 + 384 D^2 + 176 D + 24)
        let m = d3_int(24, 104, 3888, 13600, 504576, 18323712);
        let want = d3_op(&[
            &[-24, -176, -384, -256],
        ]);
        assert_eq!(dn_build(&m).unwrap(), want);
        assert_eq!(d3_expand(&m), want);
    }

    #[test]
    fn level_five_operator() {
        // D^3 - 2t(2D+1)(11D^2+11D+3) - 4t^2 (D+1)(2D+3)(2D+1)
        let m = d3_int(6, 16, 156, 380, 3600, 33120);
        let want = d3_op(&[
            &[-6, -34, -66, -44],
            &[-12, -44, -48, -16],
        ]);
        assert_eq!(dn_build(&m).unwrap(), want);
        assert_eq!(d3_expand(&m), want);
    }

    #[test]
    fn level_eleven_operator() {
        // fractional entries, t-degree 4
        let m = DNMatrix::d3(
            rat_frac(12, 5),
            rat_frac(22, 5),
            rat(24),
            rat(44),
            rat(198),
            rat(880),
        );
        let l = dn_build(&m).unwrap();
        // -(2/5) t (2D+1)(17D^2+17D+6)
        assert_eq!(
            l.poly_at(1),
            DPoly::new(vec![
                rat_frac(-12, 5),
                rat_frac(-58, 5),
                rat_frac(-102, 5),
                rat_frac(-68, 5)
            ])
        );
        // -(1504/625)(D+3)(D+2)(D+1)
        assert_eq!(
            l.poly_at(4),
            DPoly::new(vec![rat(6), rat(11), rat(6), rat(1)]).scale(&rat_frac(-1504, 625))
        );
        assert_eq!(d3_expand(&m), l);
    }

    #[test]
    fn antidiagonal_cases() {
        // single entry a02: D^3 - 54 t^3 (2D+3)(D+2)(D+1)
        let m = d3_int(0, 0, 0, 0, 54, 0);
        let want = d3_op(&[&[], &[], &[-324, -702, -486, -108]]);
        assert_eq!(dn_build(&m).unwrap(), want);
        // single entry a03: D^3 - 256 t^4 (D+3)(D+2)(D+1)
        let m = d3_int(0, 0, 0, 0, 0, 256);
        let want = d3_op(&[&[], &[], &[], &[-1536, -2816, -1536, -256]]);
        assert_eq!(dn_build(&m).unwrap(), want);
    }

    #[test]
    fn adjoint_is_minus_l() {
        for m in [
            d3_int(24, 104, 3888, 13600, 504576, 18323712),
            d3_int(6, 16, 156, 380, 3600, 33120),
            d3_int(0, 0, 24, 60, 0, 576),
        ] {
            let l = dn_build(&m).unwrap();
            assert_eq!(l.adjoint(), l.neg());
            assert_eq!(l.adjoint().adjoint(), l);
        }
    }

    #[test]
    fn a1_round_trip() {
        // D^2 = t d/dt + t^2 (d/dt)^2
        let d2 = WeylOp::term(0, DPoly::new(vec![rat(0), rat(0), rat(1)]));
        let a1 = d2.to_a1().unwrap();
        let terms: Vec<_> = a1.terms().map(|(a, b, c)| (a, b, c.clone())).collect();
        assert_eq!(terms, vec![(1, 1, rat(1)), (2, 2, rat(1))]);
        assert_eq!(a1.to_weyl(), d2);
    }

    #[test]
    fn fourier_involution_sign() {
        // FT^2 = (t -> -t, d/dt -> -d/dt) on monomials
        let mut op = A1Op::zero();
        op.add_term(2, 3, rat(5));
        op.add_term(1, 0, rat(-2));
        let twice = op.fourier().fourier();
        let mut want = A1Op::zero();
        want.add_term(2, 3, rat(-5)); // (-1)^{2+3}
        want.add_term(1, 0, rat(2));
        assert_eq!(twice, want);
    }

    #[test]
    fn apply_annihilates() {
        // L = D - 2t annihilates exp(2t) up to truncation
        let l = WeylOp::from_terms([
            (0, DPoly::var()),
            (1, DPoly::constant(rat(-2))),
        ]);
        let mut coeffs = vec![Rat::one()];
        for i in 1..12 {
            let prev = coeffs[i - 1].clone();
            coeffs.push(prev * rat(2) / rat(i as i64));
        }
        let f = crate::series::RatSeries::new(coeffs);
        let out = l.apply(&f);
        // only the top coefficient (fed by the truncated tail) may survive
        assert!(out.coeffs()[..11].iter().all(|c| c.is_zero()));
    }

    #[test]
    fn apply_frac_indicial() {
        use crate::series::{FracSeries, RatSeries};
        // D applied to t^{1/2} gives (1/2) t^{1/2}
        let f = FracSeries::new(rat_frac(1, 2), RatSeries::one(4));
        let out = WeylOp::d().apply_frac(&f);
        assert_eq!(out.offset(), &rat_frac(1, 2));
        assert_eq!(out.body().coeff(0), &rat_frac(1, 2));
    }

    #[test]
    fn regularized_matches_determinant() {
        for m in [
            d3_int(120, 744, 137520, 650016, 119681280, 21690374400),
            d3_int(6, 16, 156, 380, 3600, 33120),
            d3_int(0, 0, 24, 60, 0, 576),
            d3_int(0, 0, 0, 0, 54, 0),
        ] {
            assert_eq!(regularized_build(&m).unwrap(), dn_build(&m).unwrap());
        }
    }

    #[test]
    fn symmetry_enforced() {
        let m = DNMatrix::new(3, [((0, 1), rat(7))]);
        assert_eq!(m.entry(2, 3), rat(7));
        assert_eq!(m.entry(0, 2), rat(0));
    }

    fn arb_matrix() -> impl Strategy<Value = DNMatrix> {
        proptest::collection::vec((-40i64..40, 1i64..5), 6).prop_map(|v| {
            let e: Vec<Rat> = v.into_iter().map(|(n, d)| rat_frac(n, d)).collect();
            DNMatrix::d3(
                e[0].clone(),
                e[1].clone(),
                e[2].clone(),
                e[3].clone(),
                e[4].clone(),
                e[5].clone(),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]

        #[test]
        fn determinant_matches_expansion(m in arb_matrix()) {
            prop_assert_eq!(dn_build(&m).unwrap(), d3_expand(&m));
        }

        #[test]
        fn pipeline_matches_determinant(m in arb_matrix()) {
            prop_assert_eq!(regularized_build(&m).unwrap(), dn_build(&m).unwrap());
        }

        #[test]
        fn adjoint_involution(m in arb_matrix()) {
            let l = dn_build(&m).unwrap();
            prop_assert_eq!(l.adjoint().adjoint(), l);
        }
    }
}
