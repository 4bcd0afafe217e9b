//! Exact lower bounds (and exact values, where available) for invariant
//! orders at cusps, composed over the factor structure of identity
//! summands.
//!
//! Orders are stored width-free; the valence accounting multiplies by the
//! cusp width downstream.  Infinity is uniformly the cusp `(1, 0)`, so the
//! `gcd(., 0) = modulus` convention makes every formula apply without
//! special-casing.
//!
//! The `nu_tilde` kernel bounds the lowest q-power of the holomorphic part
//! of `q^alpha mu~(u1 tau + u2, w1 tau + w2; tau)` by `alpha + nu_tilde(u1, w1)`.
//! Its `k(u, w)` piece accounts for the holomorphic leakage of the
//! completion term: for `d = {u} - {w}` the leakage exponent is
//! `-1/8 + |d|/2`, which starts competing at `|d| = 1/2` (the displayed
//! `min(1/8, nu)` boundary case) and takes over on `|d| > 1/2`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::cyclotomic::{rat, rat_floor, rat_fract, rat_frac, Rational};
use crate::error::Error;
use crate::modgroup::Cusp;
use crate::qseries::Frac;
use crate::Result;

/// An invariant order at a cusp: exact for eta-type products, a lower
/// bound for the completed rank/Lambert functions.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderBound {
    pub value: Rational,
    pub exact: bool,
}

impl OrderBound {
    pub fn exact(value: Rational) -> Self {
        OrderBound { value, exact: true }
    }

    pub fn lower(value: Rational) -> Self {
        OrderBound { value, exact: false }
    }

    /// Order of a product: the sum, exact only if both factors are.
    pub fn add(&self, other: &OrderBound) -> OrderBound {
        OrderBound { value: &self.value + &other.value, exact: self.exact && other.exact }
    }

    /// Order bound of a sum of terms: the minimum, never marked exact
    /// (cancellation can only raise the true order).
    pub fn min(self, other: OrderBound) -> OrderBound {
        let value = if self.value <= other.value { self.value } else { other.value };
        OrderBound { value, exact: false }
    }
}

fn half() -> Rational {
    rat_frac(1, 2)
}

fn eighth() -> Rational {
    rat_frac(1, 8)
}

/// The order kernel for `mu~` specializations:
///
/// ```text
/// nu_tilde(u, w) = (1/2)(floor(u)-floor(w))^2 + (floor(u)-floor(w))({u}-{w}) + k(u, w)
/// nu(u, w)       = (u+w)/2 - 1/8            if u + w <= 1
///                  7/8 - (u+w)/2            if u + w > 1
/// k(u, w)        = nu({u},{w})                          if |{u}-{w}| < 1/2
///                  min(1/8, nu({u},{w}))                if |{u}-{w}| = 1/2
///                  min(-1/8 + |{u}-{w}|/2, nu({u},{w})) if |{u}-{w}| > 1/2
/// ```
pub fn nu_tilde(u: &Rational, w: &Rational) -> Rational {
    let fu = rat_floor(u);
    let fw = rat_floor(w);
    let ru = rat_fract(u);
    let rw = rat_fract(w);
    let d: BigInt = fu - fw;
    let df = Rational::from_integer(d.clone());
    let frac_diff = &ru - &rw;

    let nu = {
        let s = &ru + &rw;
        if s <= Rational::one() {
            &s * half() - eighth()
        } else {
            rat_frac(7, 8) - &s * half()
        }
    };
    let abs_diff = frac_diff.abs();
    let k = if abs_diff < half() {
        nu
    } else {
        let leak = abs_diff * half() - eighth();
        if leak < nu {
            leak
        } else {
            nu
        }
    };
    &df * &df * half() + df * frac_diff + k
}

fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    num_integer::Integer::gcd(a, b)
}

/// Invariant-order lower bound for the completed rank function
/// `R2~(a, c; tau)` at a cusp `alpha/gamma`:
///
/// ```text
/// (g^2/4)(-m^2/32 - 2 a^2 r^2/c^2
///         + min(-amr/(2c) + nu~(2ar/c, -m/4), amr/(2c) + nu~(2ar/c, m/4)))
/// ```
/// with `g = gcd(4, gamma)`, `m = 4 alpha / g`, `r = gamma / g`.
pub fn ord_bound_r2tilde(a: i64, c: u32, cusp: &Cusp) -> Result<OrderBound> {
    if (2 * a).rem_euclid(c as i64) == 0 {
        return Err(Error::Domain(format!("R2~ needs c = {c} not dividing 2a = {}", 2 * a)));
    }
    let alpha = BigInt::from(cusp.num());
    let gamma = BigInt::from(cusp.den());
    let g = gcd_big(&BigInt::from(4), &gamma);
    let m = Rational::from_integer(BigInt::from(4) * &alpha / &g);
    let r = Rational::from_integer(&gamma / &g);
    let gf = Rational::from_integer(g);
    let af = rat(a);
    let cf = rat(c as i64);

    let two_ar_over_c = rat(2) * &af * &r / &cf;
    let m_over_4 = &m / rat(4);
    let amr_over_2c = &af * &m * &r / (rat(2) * &cf);
    let branch_minus = -&amr_over_2c + nu_tilde(&two_ar_over_c, &(-&m_over_4));
    let branch_plus = &amr_over_2c + nu_tilde(&two_ar_over_c, &m_over_4);
    let inner_min = if branch_minus <= branch_plus { branch_minus } else { branch_plus };

    let value = (&gf * &gf / rat(4))
        * (-&m * &m / rat(32) - rat(2) * &af * &af * &r * &r / (&cf * &cf) + inner_min);
    Ok(OrderBound::lower(value))
}

/// Invariant-order lower bound for the completed Lambert function
/// `S~(k, c; tau)` at a cusp `alpha/gamma`:
///
/// ```text
/// (g^2/(4c^2))(-m^2 t^2/(32 c^2) + m r t (c-1)/(8c) - r^2 (c-1)^2/8
///              + nu~((1+4k-c)m/(4c), m/4 + (c-1)r/2))
/// ```
/// with `t = 1+4k-2c`, `g = gcd(4c^2, gamma)`, `m = 4c^2 alpha/g`, `r = gamma/g`.
pub fn ord_bound_stilde(k: i64, c: u32, cusp: &Cusp) -> Result<OrderBound> {
    let ci = c as i64;
    if !(0..ci).contains(&k) {
        return Err(Error::Domain(format!("S~(k,c) needs 0 <= k < c, got k = {k}")));
    }
    if (1 + 4 * k - ci).rem_euclid(4 * ci) == 0 {
        return Err(Error::LambertPole { k, c });
    }
    let alpha = BigInt::from(cusp.num());
    let gamma = BigInt::from(cusp.den());
    let four_c2 = BigInt::from(4 * ci * ci);
    let g = gcd_big(&four_c2, &gamma);
    let m = Rational::from_integer(&four_c2 * &alpha / &g);
    let r = Rational::from_integer(&gamma / &g);
    let gf = Rational::from_integer(g);
    let cf = rat(ci);
    let t = rat(1 + 4 * k - 2 * ci);
    let u = rat(1 + 4 * k - ci) * &m / (rat(4) * &cf);
    let w = &m / rat(4) + (&cf - rat(1)) * &r * half();

    let inner = -&m * &m * &t * &t / (rat(32) * &cf * &cf)
        + &m * &r * &t * (&cf - rat(1)) / (rat(8) * &cf)
        - &r * &r * (&cf - rat(1)) * (&cf - rat(1)) / rat(8)
        + nu_tilde(&u, &w);
    let value = &gf * &gf / (rat(4) * &cf * &cf) * inner;
    Ok(OrderBound::lower(value))
}

/// Exact invariant order of the generalized eta `f_{N,rho}` at a cusp:
/// `(gcd(N,gamma)^2 / 2N) ({alpha rho / gcd(N,gamma)} - 1/2)^2`.
pub fn ord_geta(n: u32, rho: i64, cusp: &Cusp) -> Result<OrderBound> {
    if rho.rem_euclid(n as i64) == 0 {
        return Err(Error::ZeroProduct(format!("f_{{{n},rho}} needs rho not = 0 mod {n}")));
    }
    let e = gcd_big(&BigInt::from(n), &BigInt::from(cusp.den()));
    let ef = Rational::from_integer(e.clone());
    let inner = rat_fract(&(rat(cusp.num()) * rat(rho) / &ef)) - half();
    let value = &ef * &ef / (rat(2) * rat(n as i64)) * &inner * &inner;
    Ok(OrderBound::exact(value))
}

/// Exact invariant order of `eta(d tau)` at a cusp: `gcd(d, gamma)^2 / (24 d)`.
pub fn ord_eta(d: u32, cusp: &Cusp) -> OrderBound {
    let e = gcd_big(&BigInt::from(d), &BigInt::from(cusp.den()));
    let ef = Rational::from_integer(e);
    OrderBound::exact(&ef * &ef / (rat(24) * rat(d as i64)))
}

/// One multiplicative factor of a certificate summand.
#[derive(Clone, Debug)]
pub enum SummandFactor {
    /// `eta(d tau)^power`
    Eta { d: u32, power: i32 },
    /// `f_{N,rho}^power`
    GEta { n: u32, rho: i64, power: i32 },
    /// a plain `q^e`: order 0 at finite cusps, `e` at infinity
    QPower(Frac),
    /// holomorphic part of `R2~(a, c)`
    RankGen { a: i64, c: u32 },
    /// holomorphic part of `S~(k, c)`
    Lambert { k: i64, c: u32 },
}

/// Order bound of a single factor at a cusp.
pub fn ord_bound_factor(f: &SummandFactor, cusp: &Cusp) -> Result<OrderBound> {
    Ok(match f {
        SummandFactor::Eta { d, power } => {
            let b = ord_eta(*d, cusp);
            OrderBound::exact(b.value * rat(*power as i64))
        }
        SummandFactor::GEta { n, rho, power } => {
            let b = ord_geta(*n, *rho, cusp)?;
            OrderBound::exact(b.value * rat(*power as i64))
        }
        SummandFactor::QPower(e) => {
            if cusp.is_infinity() {
                OrderBound::exact(rat_frac(*e.numer(), *e.denom()))
            } else {
                OrderBound::exact(Rational::zero())
            }
        }
        SummandFactor::RankGen { a, c } => ord_bound_r2tilde(*a, *c, cusp)?,
        SummandFactor::Lambert { k, c } => ord_bound_stilde(*k, *c, cusp)?,
    })
}

/// Order bound of a product of factors: the sum of the factor bounds.
pub fn ord_bound_term(factors: &[SummandFactor], cusp: &Cusp) -> Result<OrderBound> {
    let mut acc = OrderBound::exact(Rational::zero());
    for f in factors {
        acc = acc.add(&ord_bound_factor(f, cusp)?);
    }
    Ok(acc)
}
