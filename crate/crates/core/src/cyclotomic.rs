//! Exact arithmetic in Q and in cyclotomic fields Q(zeta_n).
//!
//! Every series coefficient in the crate lives here. A [`CycNum`] is stored
//! densely on the power basis `1, zeta, ..., zeta^{phi(n)-1}` reduced modulo
//! the n-th cyclotomic polynomial, so equality is coefficient-wise — the
//! certifier compares coefficients millions of times and must not need
//! normalization on the fly.
//!
//! Rational constants are carried at order 1 and lift canonically into any
//! Q(zeta_n); arithmetic between two distinct orders > 1 is an error, the
//! caller embeds into a common order explicitly with [`CycNum::embed`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::Error;
use crate::Result;

/// Exact rational scalar. Always reduced, denominator positive, zero is 0/1
/// (the `num_rational` representation maintains exactly these invariants).
pub type Rational = num_rational::BigRational;

/// Shorthand for an integer rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`.
pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Floor of a rational as a `BigInt`.
pub fn rat_floor(x: &Rational) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// Fractional part `{x} = x - floor(x)`, in `[0, 1)`.
pub fn rat_fract(x: &Rational) -> Rational {
    x - Rational::from_integer(rat_floor(x))
}

// ---------------------------------------------------------------------------
// Cyclotomic polynomial tables
// ---------------------------------------------------------------------------

/// Per-order data: phi(n) and the reduction rows expressing `zeta^j` on the
/// power basis for j = 0..max(n, 2*phi(n) - 1).
struct CycTable {
    phi: usize,
    /// rows[j] = coordinates of x^j mod Phi_n, length phi.
    rows: Vec<Vec<Rational>>,
}

fn divisors(n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    for d in 1..=n {
        if n % d == 0 {
            out.push(d);
        }
    }
    out
}

/// Euler's totient.
pub fn euler_phi(n: u32) -> u32 {
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

/// Coefficients of the n-th cyclotomic polynomial, low degree first, monic.
fn cyclotomic_poly(n: u32) -> Vec<BigInt> {
    // x^n - 1 divided by Phi_d for every proper divisor d of n.
    let mut poly = vec![BigInt::zero(); (n + 1) as usize];
    poly[0] = -BigInt::one();
    poly[n as usize] = BigInt::one();
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let phi_d = cyclotomic_poly(d);
        poly = poly_div_exact(&poly, &phi_d);
    }
    poly
}

/// Exact division of integer polynomials (low degree first), panics on
/// nonzero remainder — cyclotomic factorizations are always exact.
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    assert!(den[dd].is_one(), "divisor must be monic");
    let mut rem = num.to_vec();
    let mut quot = vec![BigInt::zero(); dn - dd + 1];
    for i in (0..=dn - dd).rev() {
        let c = rem[i + dd].clone();
        quot[i] = c.clone();
        if c.is_zero() {
            continue;
        }
        for j in 0..=dd {
            rem[i + j] -= &c * &den[j];
        }
    }
    assert!(rem.iter().all(|c| c.is_zero()), "non-exact polynomial division");
    quot
}

fn table(n: u32) -> Arc<CycTable> {
    static TABLES: OnceLock<Mutex<HashMap<u32, Arc<CycTable>>>> = OnceLock::new();
    let map = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = map.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let phi = euler_phi(n) as usize;
            let cp = cyclotomic_poly(n);
            debug_assert_eq!(cp.len(), phi + 1);
            // zeta^phi = -(cp[0] + cp[1] x + ... + cp[phi-1] x^{phi-1})
            let top: Vec<Rational> = cp[..phi]
                .iter()
                .map(|c| -Rational::from_integer(c.clone()))
                .collect();
            let max_pow = (n as usize).max(2 * phi).max(1);
            let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(max_pow);
            for j in 0..max_pow {
                if j < phi {
                    let mut row = vec![Rational::zero(); phi];
                    row[j] = Rational::one();
                    rows.push(row);
                } else {
                    // x^j = x * x^{j-1}: shift previous row and fold the
                    // overflowing top coefficient through the zeta^phi row.
                    let prev = rows[j - 1].clone();
                    let mut row = vec![Rational::zero(); phi];
                    for i in 0..phi - 1 {
                        row[i + 1] = prev[i].clone();
                    }
                    let carry = prev[phi - 1].clone();
                    if !carry.is_zero() {
                        for i in 0..phi {
                            row[i] += &carry * &top[i];
                        }
                    }
                    rows.push(row);
                }
            }
            Arc::new(CycTable { phi, rows })
        })
        .clone()
}

// ---------------------------------------------------------------------------
// CycNum
// ---------------------------------------------------------------------------

/// An element of Q(zeta_n), reduced on the power basis modulo Phi_n.
#[derive(Clone)]
pub struct CycNum {
    order: u32,
    coeffs: Vec<Rational>,
}

impl PartialEq for CycNum {
    /// Mathematical equality: same-order elements compare coefficient-wise
    /// (the reduced representation is unique); across orders the comparison
    /// goes through the canonical embedding when one order divides the
    /// other, and through Q when both values are rational.
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coeffs == other.coeffs;
        }
        match (self.as_rational(), other.as_rational()) {
            (Some(a), Some(b)) => return a == b,
            (None, None) => {}
            _ => return false,
        }
        if self.order % other.order == 0 {
            other.embed(self.order).map(|o| o.coeffs == self.coeffs).unwrap_or(false)
        } else if other.order % self.order == 0 {
            self.embed(other.order).map(|s| s.coeffs == other.coeffs).unwrap_or(false)
        } else {
            false
        }
    }
}

impl Eq for CycNum {}

impl CycNum {
    /// The zero of Q (order 1); lifts into any Q(zeta_n) on demand.
    pub fn zero() -> Self {
        CycNum { order: 1, coeffs: vec![Rational::zero()] }
    }

    pub fn one() -> Self {
        CycNum { order: 1, coeffs: vec![Rational::one()] }
    }

    pub fn from_rational(x: Rational) -> Self {
        CycNum { order: 1, coeffs: vec![x] }
    }

    pub fn from_int(x: i64) -> Self {
        Self::from_rational(rat(x))
    }

    /// `zeta_n^e`, with `e` arbitrary (reduced mod n).
    pub fn zeta_pow(n: u32, e: i64) -> Self {
        assert!(n >= 1);
        let t = table(n);
        let e = e.rem_euclid(n as i64) as usize;
        CycNum { order: n, coeffs: t.rows[e].clone() }
    }

    /// `i = zeta_4`, raised to the power `e`.
    pub fn i_pow(e: i64) -> Self {
        Self::zeta_pow(4, e)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Basis coordinates (length phi(order)).
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Returns the rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn zero_of_order(n: u32) -> Self {
        CycNum { order: n, coeffs: vec![Rational::zero(); euler_phi(n) as usize] }
    }

    /// Canonical lift of an order-1 (rational) element; other mismatches
    /// are errors.
    fn unify(a: &CycNum, b: &CycNum) -> Result<(CycNum, CycNum)> {
        if a.order == b.order {
            Ok((a.clone(), b.clone()))
        } else if a.order == 1 {
            Ok((a.embed(b.order)?, b.clone()))
        } else if b.order == 1 {
            Ok((a.clone(), b.embed(a.order)?))
        } else {
            Err(Error::OrderMismatch { left: a.order, right: b.order })
        }
    }

    pub fn add(&self, other: &CycNum) -> Result<CycNum> {
        let (mut a, b) = Self::unify(self, other)?;
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        Ok(a)
    }

    pub fn sub(&self, other: &CycNum) -> Result<CycNum> {
        let (mut a, b) = Self::unify(self, other)?;
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x -= y;
        }
        Ok(a)
    }

    pub fn neg(&self) -> CycNum {
        CycNum { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, other: &CycNum) -> Result<CycNum> {
        let (a, b) = Self::unify(self, other)?;
        let n = a.order;
        if n == 1 {
            return Ok(CycNum { order: 1, coeffs: vec![&a.coeffs[0] * &b.coeffs[0]] });
        }
        let t = table(n);
        let phi = t.phi;
        // polynomial product, degree <= 2 phi - 2
        let mut prod = vec![Rational::zero(); 2 * phi - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                prod[i + j] += x * y;
            }
        }
        let mut out = vec![Rational::zero(); phi];
        for (j, c) in prod.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if j < phi {
                out[j] += c;
            } else {
                for (i, r) in t.rows[j].iter().enumerate() {
                    if !r.is_zero() {
                        out[i] += &c * r;
                    }
                }
            }
        }
        Ok(CycNum { order: n, coeffs: out })
    }

    pub fn scale(&self, s: &Rational) -> CycNum {
        CycNum { order: self.order, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Image under `zeta_n -> zeta_m^{m/n}` for `n | m`.
    pub fn embed(&self, new_order: u32) -> Result<CycNum> {
        let n = self.order;
        if n == new_order {
            return Ok(self.clone());
        }
        if new_order % n != 0 {
            return Err(Error::NonDivisibleOrder { from: n, to: new_order });
        }
        let step = (new_order / n) as i64;
        let mut out = Self::zero_of_order(new_order);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let img = Self::zeta_pow(new_order, j as i64 * step).scale(c);
            out = out.add(&img)?;
        }
        Ok(out)
    }

    /// Complex conjugation `zeta -> zeta^{-1}`.
    pub fn conj(&self) -> CycNum {
        self.galois(-1)
    }

    /// Galois action `zeta -> zeta^t` (t must be coprime to the order for a
    /// field automorphism; arbitrary t gives the evident substitution).
    pub fn galois(&self, t: i64) -> CycNum {
        let n = self.order;
        if n == 1 {
            return self.clone();
        }
        let mut out = Self::zero_of_order(n);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let img = Self::zeta_pow(n, j as i64 * t).scale(c);
            out = out.add(&img).expect("same order");
        }
        out
    }

    /// Multiplicative inverse via the extended Euclidean algorithm on
    /// polynomials against Phi_n.
    pub fn inverse(&self) -> Result<CycNum> {
        if self.is_zero() {
            return Err(Error::NotInvertible("zero cyclotomic element".into()));
        }
        let n = self.order;
        if n == 1 {
            return Ok(CycNum { order: 1, coeffs: vec![self.coeffs[0].recip()] });
        }
        let phi = euler_phi(n) as usize;
        let modulus: Vec<Rational> = cyclotomic_poly(n)
            .into_iter()
            .map(Rational::from_integer)
            .collect();
        // extended gcd of self (as a polynomial) and Phi_n
        let (g, u, _) = poly_ext_gcd(&self.coeffs, &modulus);
        // Phi_n is irreducible over Q, so gcd is a nonzero constant.
        let c = g[0].clone();
        assert!(g[1..].iter().all(|x| x.is_zero()), "gcd with Phi_n must be constant");
        let inv_c = c.recip();
        let mut coeffs = vec![Rational::zero(); phi];
        for (j, x) in u.iter().enumerate() {
            if j < phi {
                coeffs[j] = x * &inv_c;
            } else {
                assert!(x.is_zero());
            }
        }
        Ok(CycNum { order: n, coeffs })
    }

    /// Is the element fixed by conjugation?
    pub fn is_symmetric(&self) -> bool {
        *self == self.conj()
    }

    /// Numeric value as a complex double, `zeta_n = exp(2 pi i / n)`.
    pub fn to_complex(&self) -> num_complex::Complex64 {
        use std::f64::consts::PI;
        let mut z = num_complex::Complex64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let angle = 2.0 * PI * (j as f64) / (self.order as f64);
            z += rational_to_f64(c) * num_complex::Complex64::new(angle.cos(), angle.sin());
        }
        z
    }
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    // good enough for the numeric spot-check path (values there are tiny)
    let n = x.numer();
    let d = x.denom();
    bigint_to_f64(n) / bigint_to_f64(d)
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    x.to_string().parse::<f64>().unwrap_or(f64::NAN)
}

fn poly_trim(p: &mut Vec<Rational>) {
    while p.len() > 1 && p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

/// Extended gcd over Q[x]: returns (g, u, v) with u*a + v*b = g.
fn poly_ext_gcd(
    a: &[Rational],
    b: &[Rational],
) -> (Vec<Rational>, Vec<Rational>, Vec<Rational>) {
    let mut r0 = a.to_vec();
    let mut r1 = b.to_vec();
    poly_trim(&mut r0);
    poly_trim(&mut r1);
    let mut s0 = vec![Rational::one()];
    let mut s1 = vec![Rational::zero()];
    let mut t0 = vec![Rational::zero()];
    let mut t1 = vec![Rational::one()];
    while !(r1.len() == 1 && r1[0].is_zero()) {
        let (q, r) = poly_div_rem(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        let t = poly_sub(&t0, &poly_mul(&q, &t1));
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
        t0 = t1;
        t1 = t;
    }
    (r0, s0, t0)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    poly_trim(&mut out);
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    poly_trim(&mut out);
    out
}

fn poly_div_rem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut rem = a.to_vec();
    poly_trim(&mut rem);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if rem.len() <= db && !(rem.len() == 1 && db == 0) {
        return (vec![Rational::zero()], rem);
    }
    let dq = rem.len().saturating_sub(1).saturating_sub(db);
    let mut quot = vec![Rational::zero(); dq + 1];
    for i in (0..=dq).rev() {
        if rem.len() <= i + db {
            continue;
        }
        let c = &rem[i + db] / &lead;
        if c.is_zero() {
            continue;
        }
        quot[i] = c.clone();
        for j in 0..=db {
            let sub = &c * &b[j];
            rem[i + j] -= sub;
        }
    }
    poly_trim(&mut rem);
    poly_trim(&mut quot);
    (quot, rem)
}

// ---------------------------------------------------------------------------
// Spec-facing operations
// ---------------------------------------------------------------------------

/// Arithmetic with the strict same-order contract (no rational lifting).
pub fn cyc_arith(x: &CycNum, y: &CycNum, op: ArithOp) -> Result<CycNum> {
    if x.order != y.order {
        return Err(Error::OrderMismatch { left: x.order, right: y.order });
    }
    match op {
        ArithOp::Add => x.add(y),
        ArithOp::Sub => x.sub(y),
        ArithOp::Mul => x.mul(y),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// `A(m,n,r) = m z + n z^2 + r z^3 + r z^4 + n z^5 + m z^6` with `z = zeta_7`,
/// the coefficient carrier of the mod-7 dissection identity.
pub fn a_of(m: i64, n: i64, r: i64) -> CycNum {
    let mut acc = CycNum::zero_of_order(7);
    for (e, c) in [(1, m), (2, n), (3, r), (4, r), (5, n), (6, m)] {
        if c != 0 {
            acc = acc
                .add(&CycNum::zeta_pow(7, e).scale(&rat(c)))
                .expect("same order");
        }
    }
    acc
}

/// Extract the coefficient of `zeta_7^r + zeta_7^{7-r}` (r = 1, 2, 3) in the
/// unique expansion of a conjugation-symmetric element of Q(zeta_7) over the
/// basis `{zeta + zeta^6, zeta^2 + zeta^5, zeta^3 + zeta^4}` (the constant 1
/// is eliminated through `1 + zeta + ... + zeta^6 = 0`).  For `A(m,n,r)` the
/// three components are exactly m, n, r.
pub fn cyc_project_rank_component(x: &CycNum, r: u32) -> Result<Rational> {
    assert!((1..=3).contains(&r), "component index must be 1, 2, or 3");
    if x.order == 1 {
        // rational constants lift canonically
        return cyc_project_rank_component(&x.embed(7)?, r);
    }
    if x.order != 7 {
        return Err(Error::OrderMismatch { left: x.order, right: 7 });
    }
    if !x.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    // On the reduced basis a symmetric element reads
    //   [-m, 0, n-m, r-m, r-m, n-m]
    let c = &x.coeffs;
    Ok(match r {
        1 => -c[0].clone(),
        2 => &c[2] - &c[0],
        _ => &c[3] - &c[0],
    })
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

impl fmt::Display for CycNum {
    /// `[c0, c1, ..., c_{phi(n)-1}] @ zeta_n`, bit-exact and re-parseable.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "] @ zeta_{}", self.order)
    }
}

impl fmt::Debug for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for CycNum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (list, tail) = s
            .split_once("] @ zeta_")
            .ok_or_else(|| Error::Parse(format!("bad CycNum: {s:?}")))?;
        let list = list
            .strip_prefix('[')
            .ok_or_else(|| Error::Parse(format!("bad CycNum: {s:?}")))?;
        let order: u32 = tail
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad CycNum order: {tail:?}")))?;
        let coeffs: Vec<Rational> = list
            .split(',')
            .map(|t| {
                Rational::from_str(t.trim())
                    .map_err(|e| Error::Parse(format!("bad rational {t:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        if coeffs.len() != euler_phi(order) as usize {
            return Err(Error::Parse(format!(
                "expected {} coefficients for zeta_{order}, got {}",
                euler_phi(order),
                coeffs.len()
            )));
        }
        Ok(CycNum { order, coeffs })
    }
}
