//! Truncated Laurent-Puiseux series in q with exact coefficients.
//!
//! Exponents live on a lattice `(1/D) Z`: every exponent is an integer
//! number of `1/D` steps, and arithmetic between two series first unifies
//! the lattices through an lcm rescale.  Precision is a hard contract:
//! a series knows its coefficients for exponents in `[min_exp, prec)` and
//! refuses to answer beyond that — the certifier's soundness depends on
//! knowing how far vanishing was actually checked, so an unknown
//! coefficient is an error, never a silent zero.
//!
//! The constructors at the bottom build the standard objects everything
//! else is made of: infinite Pochhammer products, Dedekind eta, the
//! generalized eta `f_{N,rho}`, and the Jacobi theta `theta_4`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Zero;

use crate::cyclotomic::{rat, rational_to_f64, CycNum, Rational};
use crate::error::Error;
use crate::Result;

/// Small exact rational used for exponents, shifts, and substitution
/// ratios.  Series coefficients use the arbitrary-precision [`Rational`].
pub type Frac = num_rational::Rational64;

pub fn frac(n: i64, d: i64) -> Frac {
    Frac::new(n, d)
}

/// Parse "p/q" or "p".
pub fn frac_from_str(s: &str) -> Result<Frac> {
    Frac::from_str(s.trim()).map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
}

// ---------------------------------------------------------------------------
// Coefficient trait
// ---------------------------------------------------------------------------

/// Coefficient ring of a series: exact, with explicit zero/one and a
/// rendering that round-trips.  Implemented by [`Rational`] and [`CycNum`].
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add_assign_ref(&mut self, other: &Self);
    fn sub_assign_ref(&mut self, other: &Self);
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_inplace(&mut self);
    fn inv(&self) -> Result<Self>;
    fn from_rational(x: Rational) -> Self;
    fn render(&self) -> String;
    fn parse(s: &str) -> Result<Self>;
    fn to_complex(&self) -> Complex64;
}

impl Coeff for Rational {
    fn zero() -> Self {
        <Rational as Zero>::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign_ref(&mut self, other: &Self) {
        *self -= other;
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_inplace(&mut self) {
        *self = -std::mem::replace(self, <Rational as Zero>::zero());
    }
    fn inv(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            return Err(Error::NotInvertible("zero rational".into()));
        }
        Ok(self.recip())
    }
    fn from_rational(x: Rational) -> Self {
        x
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn parse(s: &str) -> Result<Self> {
        Rational::from_str(s.trim()).map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(self), 0.0)
    }
}

impl Coeff for CycNum {
    fn zero() -> Self {
        CycNum::zero()
    }
    fn one() -> Self {
        CycNum::one()
    }
    fn is_zero(&self) -> bool {
        CycNum::is_zero(self)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.add(other).expect("series coefficients share a ring");
    }
    fn sub_assign_ref(&mut self, other: &Self) {
        *self = self.sub(other).expect("series coefficients share a ring");
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other).expect("series coefficients share a ring")
    }
    fn neg_inplace(&mut self) {
        *self = self.neg();
    }
    fn inv(&self) -> Result<Self> {
        self.inverse()
    }
    fn from_rational(x: Rational) -> Self {
        CycNum::from_rational(x)
    }
    fn render(&self) -> String {
        self.to_string()
    }
    fn parse(s: &str) -> Result<Self> {
        s.parse()
    }
    fn to_complex(&self) -> Complex64 {
        CycNum::to_complex(self)
    }
}

// ---------------------------------------------------------------------------
// QSeries
// ---------------------------------------------------------------------------

/// Truncated Laurent-Puiseux series: coefficients for exponents
/// `min_exp/D, (min_exp+1)/D, ..., (prec-1)/D`, stored densely.
#[derive(Clone, PartialEq)]
pub struct QSeries<C: Coeff> {
    denom: u32,
    min_exp: i64,
    prec: i64,
    coeffs: Vec<C>,
}

impl<C: Coeff> QSeries<C> {
    /// Explicit zeros on `[min_exp, prec)` of the `1/denom` lattice.
    pub fn zero_on(denom: u32, min_exp: i64, prec: i64) -> Self {
        assert!(denom >= 1);
        let len = (prec - min_exp).max(0) as usize;
        QSeries { denom, min_exp: min_exp.min(prec), prec, coeffs: vec![C::zero(); len] }
    }

    /// The constant 1 known through integer precision `prec`.
    pub fn one(prec: i64) -> Self {
        let mut s = Self::zero_on(1, 0, prec);
        if prec > 0 {
            s.coeffs[0] = C::one();
        }
        s
    }

    /// `c * q^exp`, known through `prec`.
    pub fn monomial(c: C, exp: Frac, prec: Frac) -> Self {
        let d = exp.denom().lcm(prec.denom());
        let e = exp.numer() * d / exp.denom();
        let p = prec.numer() * d / prec.denom();
        let mut s = Self::zero_on(d as u32, e, p);
        if e < p {
            s.coeffs[0] = c;
        }
        s
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    /// Lowest stored exponent, as an exact rational.
    pub fn min_exp(&self) -> Frac {
        frac(self.min_exp, self.denom as i64)
    }

    /// Exclusive precision bound, as an exact rational.
    pub fn prec(&self) -> Frac {
        frac(self.prec, self.denom as i64)
    }

    /// Exponent of the first nonzero coefficient, with the coefficient.
    pub fn leading(&self) -> Option<(Frac, &C)> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| (frac(self.min_exp + i as i64, self.denom as i64), &self.coeffs[i]))
    }

    pub fn is_zero_to_prec(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Exact coefficient at exponent `e`.  Off-lattice exponents below the
    /// precision bound are exactly zero; at or beyond the bound the
    /// coefficient is unknown and reading it is an error.
    pub fn coeff_at(&self, e: Frac) -> Result<C> {
        if e >= self.prec() {
            return Err(Error::PrecisionExceeded {
                requested: e.to_string(),
                prec: self.prec().to_string(),
            });
        }
        let d = self.denom as i64;
        if (e * d).denom() != &1 {
            return Ok(C::zero());
        }
        let idx = (e * d).to_integer();
        if idx < self.min_exp {
            return Ok(C::zero());
        }
        Ok(self.coeffs[(idx - self.min_exp) as usize].clone())
    }

    /// Convenience: coefficient at an integer exponent.
    pub fn coeff_int(&self, e: i64) -> Result<C> {
        self.coeff_at(frac(e, 1))
    }

    /// Rescale to a finer lattice (`new_d` a multiple of the current one).
    fn rescale(&self, new_d: u32) -> Self {
        if new_d == self.denom {
            return self.clone();
        }
        assert!(new_d % self.denom == 0, "rescale target must be a lattice refinement");
        let f = (new_d / self.denom) as i64;
        let mut out = Self::zero_on(new_d, self.min_exp * f, self.prec * f);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.coeffs[i * f as usize] = c.clone();
            }
        }
        out
    }

    /// Drop lattice refinement that no nonzero coefficient uses.
    fn reduce_lattice(&mut self) {
        if self.denom == 1 {
            return;
        }
        let mut g = self.denom as i64;
        g = g.gcd(&self.min_exp).gcd(&self.prec);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                g = g.gcd(&(self.min_exp + i as i64));
            }
            if g == 1 {
                return;
            }
        }
        if g <= 1 {
            return;
        }
        let new_d = (self.denom as i64 / g) as u32;
        let new_min = self.min_exp / g;
        let new_prec = self.prec / g;
        let mut coeffs = vec![C::zero(); (new_prec - new_min).max(0) as usize];
        for (i, c) in std::mem::take(&mut self.coeffs).into_iter().enumerate() {
            if !c.is_zero() {
                coeffs[((self.min_exp + i as i64) / g - new_min) as usize] = c;
            }
        }
        self.denom = new_d;
        self.min_exp = new_min;
        self.prec = new_prec;
        self.coeffs = coeffs;
    }

    fn unify(x: &Self, y: &Self) -> (Self, Self) {
        let d = (x.denom as i64).lcm(&(y.denom as i64)) as u32;
        (x.rescale(d), y.rescale(d))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, None)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut o = other.clone();
        for c in &mut o.coeffs {
            c.neg_inplace();
        }
        self.add_scaled(&o, None)
    }

    /// `self + scale * other` (scale = None means 1); the workhorse of
    /// identity assembly.
    pub fn add_scaled(&self, other: &Self, scale: Option<&C>) -> Self {
        let (a, b) = Self::unify(self, other);
        let min = a.min_exp.min(b.min_exp);
        let prec = a.prec.min(b.prec);
        let mut out = Self::zero_on(a.denom, min, prec);
        for (i, c) in a.coeffs.iter().enumerate() {
            let e = a.min_exp + i as i64;
            if e >= prec {
                break;
            }
            out.coeffs[(e - min) as usize] = c.clone();
        }
        for (i, c) in b.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = b.min_exp + i as i64;
            if e >= prec {
                break;
            }
            match scale {
                None => out.coeffs[(e - min) as usize].add_assign_ref(c),
                Some(s) => out.coeffs[(e - min) as usize].add_assign_ref(&s.mul_ref(c)),
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            c.neg_inplace();
        }
        out
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            if !c.is_zero() {
                *c = c.mul_ref(s);
            }
        }
        out
    }

    /// Schoolbook product.  The result is known for exponents `e` with
    /// `e < min(prec_x + min_y, prec_y + min_x)`: a contribution from an
    /// unknown coefficient of either factor first lands there.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = Self::unify(self, other);
        let min = a.min_exp + b.min_exp;
        let prec = (a.prec + b.min_exp).min(b.prec + a.min_exp);
        let mut out = Self::zero_on(a.denom, min, prec);
        if prec <= min {
            return out;
        }
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let ea = a.min_exp + i as i64;
            for (j, y) in b.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let e = ea + b.min_exp + j as i64;
                if e >= prec {
                    break;
                }
                out.coeffs[(e - min) as usize].add_assign_ref(&x.mul_ref(y));
            }
        }
        out
    }

    /// Multiplicative inverse.  The first nonzero coefficient must be a
    /// unit; for a series of valuation `v` known below `prec`, the inverse
    /// is known below `prec - 2v`.
    pub fn inv(&self) -> Result<Self> {
        let (vfrac, lead) = self
            .leading()
            .ok_or_else(|| Error::NotInvertible("series is zero to its precision".into()))?;
        let lead_inv = lead.inv()?;
        let d = self.denom;
        let v = (vfrac * d as i64).to_integer();
        // u = q^{-v} * self has unit constant term on [0, prec - v)
        let n = (self.prec - v) as usize;
        let u0 = (v - self.min_exp) as usize;
        let mut inv = vec![C::zero(); n];
        if n > 0 {
            inv[0] = lead_inv.clone();
        }
        for k in 1..n {
            // inv[k] = -lead_inv * sum_{j=1..=k} u[j] * inv[k-j]
            let mut acc = C::zero();
            for j in 1..=k {
                let uj = &self.coeffs[u0 + j];
                if uj.is_zero() || inv[k - j].is_zero() {
                    continue;
                }
                acc.add_assign_ref(&uj.mul_ref(&inv[k - j]));
            }
            if !acc.is_zero() {
                acc.neg_inplace();
                inv[k] = acc.mul_ref(&lead_inv);
            }
        }
        Ok(QSeries { denom: d, min_exp: -v, prec: self.prec - 2 * v, coeffs: truncate_vec(inv, (self.prec - 2 * v + v).max(0) as usize) })
    }

    /// `self / other` via inversion.
    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// Multiply by `q^e`.
    pub fn shift(&self, e: Frac) -> Self {
        let d = (self.denom as i64).lcm(e.denom());
        let mut s = self.rescale(d as u32);
        let step = e.numer() * (d / e.denom());
        s.min_exp += step;
        s.prec += step;
        s.reduce_lattice();
        s
    }

    /// Substitute `q -> q^s` for `s > 0`: every exponent is scaled by `s`,
    /// including the precision bound.
    pub fn substitute(&self, s: Frac) -> Self {
        assert!(s > Frac::zero(), "substitution ratio must be positive");
        let (p, q) = (*s.numer(), *s.denom());
        let new_d = self.denom as i64 * q;
        let mut out = QSeries {
            denom: new_d as u32,
            min_exp: self.min_exp * p,
            prec: self.prec * p,
            coeffs: vec![C::zero(); 0],
        };
        out.coeffs = vec![C::zero(); (out.prec - out.min_exp).max(0) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let e = (self.min_exp + i as i64) * p;
                out.coeffs[(e - out.min_exp) as usize] = c.clone();
            }
        }
        out.reduce_lattice();
        out
    }

    /// Restrict the precision bound (new bound must not exceed the old).
    pub fn truncate(&self, new_prec: Frac) -> Self {
        let d = (self.denom as i64).lcm(new_prec.denom());
        let mut s = self.rescale(d as u32);
        let p = new_prec.numer() * (d / new_prec.denom());
        assert!(p <= s.prec, "cannot extend precision by truncation");
        s.coeffs.truncate((p - s.min_exp).max(0) as usize);
        if p < s.min_exp {
            s.min_exp = p;
        }
        s.prec = p;
        s
    }

    /// Sub-series of the terms with integer exponent congruent to `r`
    /// modulo `c`, exponents kept intact.
    pub fn dissect(&self, c: u32, r: u32) -> Result<Self> {
        assert!(c >= 1);
        let d = self.denom as i64;
        let mut out = self.clone();
        for (i, coef) in out.coeffs.iter_mut().enumerate() {
            if coef.is_zero() {
                continue;
            }
            let idx = self.min_exp + i as i64;
            if idx.rem_euclid(d) != 0 {
                return Err(Error::LatticeMismatch(format!(
                    "nonzero coefficient at non-integer exponent {}/{}",
                    idx, d
                )));
            }
            let e = idx / d;
            if e.rem_euclid(c as i64) != r as i64 % c as i64 {
                *coef = C::zero();
            }
        }
        Ok(out)
    }

    /// Floating-point evaluation at a point of the upper half-plane; the
    /// single inexact operation in the crate, used only for numeric
    /// spot-checks of transformation laws.
    pub fn eval_at(&self, tau: Complex64) -> Result<Complex64> {
        if tau.im <= 0.0 {
            return Err(Error::NotInUpperHalfPlane);
        }
        let two_pi_i_tau = Complex64::new(0.0, 2.0 * std::f64::consts::PI) * tau;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (self.min_exp + i as i64) as f64 / self.denom as f64;
            acc += c.to_complex() * (two_pi_i_tau * e).exp();
        }
        Ok(acc)
    }

    /// In-place multiply by `(1 - coef * q^{e})` with `e > 0` given in
    /// current lattice units.  Exact (the factor is a unit polynomial), so
    /// min and prec are unchanged.
    pub(crate) fn mul_one_minus(&mut self, e: i64, coef: &C) {
        assert!(e > 0);
        let n = self.coeffs.len() as i64;
        if coef.is_zero() {
            return;
        }
        let mut i = n - 1;
        while i >= e {
            let lower = self.coeffs[(i - e) as usize].clone();
            if !lower.is_zero() {
                self.coeffs[i as usize].sub_assign_ref(&coef.mul_ref(&lower));
            }
            i -= 1;
        }
    }

    /// Multiply by `(1 - coef * q^e)` with the exponent given as an exact
    /// rational; rescales the lattice when the exponent needs refinement.
    pub fn mul_one_minus_frac(&mut self, e: Frac, coef: &C) {
        let d = (self.denom as i64).lcm(e.denom());
        if d != self.denom as i64 {
            *self = self.rescale(d as u32);
        }
        let units = e.numer() * (d / e.denom());
        self.mul_one_minus(units, coef);
    }

    /// In-place multiply by `1/(1 - coef * q^{e})` with `e > 0` in current
    /// lattice units (geometric expansion as a running prefix sum).
    pub(crate) fn div_one_minus(&mut self, e: i64, coef: &C) {
        assert!(e > 0);
        if coef.is_zero() {
            return;
        }
        for i in e as usize..self.coeffs.len() {
            let lower = self.coeffs[i - e as usize].clone();
            if !lower.is_zero() {
                self.coeffs[i].add_assign_ref(&coef.mul_ref(&lower));
            }
        }
    }

    /// Map coefficients into a larger ring.
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> QSeries<D> {
        QSeries {
            denom: self.denom,
            min_exp: self.min_exp,
            prec: self.prec,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Do two series agree coefficient-wise on every exponent below both
    /// precision bounds (and below `upto` if given)?
    pub fn agrees_with(&self, other: &Self, upto: Option<Frac>) -> bool {
        let (a, b) = Self::unify(self, other);
        let mut hi = a.prec.min(b.prec);
        if let Some(u) = upto {
            let ui = (u * a.denom as i64).floor().to_integer();
            hi = hi.min(ui);
        }
        let lo = a.min_exp.min(b.min_exp);
        for e in lo..hi {
            let x = if e < a.min_exp || e >= a.prec {
                C::zero()
            } else {
                a.coeffs[(e - a.min_exp) as usize].clone()
            };
            let y = if e < b.min_exp || e >= b.prec {
                C::zero()
            } else {
                b.coeffs[(e - b.min_exp) as usize].clone()
            };
            if x != y {
                return false;
            }
        }
        true
    }

    /// First exponent (below both precision bounds) where the series
    /// differ, with the two coefficients.
    pub fn first_difference(&self, other: &Self) -> Option<(Frac, C, C)> {
        let (a, b) = Self::unify(self, other);
        let hi = a.prec.min(b.prec);
        let lo = a.min_exp.min(b.min_exp);
        for e in lo..hi {
            let x = if e < a.min_exp || e >= a.prec {
                C::zero()
            } else {
                a.coeffs[(e - a.min_exp) as usize].clone()
            };
            let y = if e < b.min_exp || e >= b.prec {
                C::zero()
            } else {
                b.coeffs[(e - b.min_exp) as usize].clone()
            };
            if x != y {
                return Some((frac(e, a.denom as i64), x, y));
            }
        }
        None
    }

    // -- serialization ------------------------------------------------------

    /// Line format: `D=<d> min=<m> prec=<p>` then `exponent_numerator: coefficient`
    /// for each nonzero coefficient; bit-exact round trip.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "D={} min={} prec={}", self.denom, self.min_exp, self.prec);
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                let _ = writeln!(out, "{}: {}", self.min_exp + i as i64, c.render());
            }
        }
        out
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty series text".into()))?;
        let mut d = None;
        let mut min = None;
        let mut prec = None;
        for part in header.split_whitespace() {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field {part:?}")))?;
            let v: i64 =
                v.parse().map_err(|_| Error::Parse(format!("bad header value {part:?}")))?;
            match k {
                "D" => d = Some(v),
                "min" => min = Some(v),
                "prec" => prec = Some(v),
                _ => return Err(Error::Parse(format!("unknown header field {k:?}"))),
            }
        }
        let (d, min, prec) = match (d, min, prec) {
            (Some(d), Some(m), Some(p)) if d >= 1 => (d as u32, m, p),
            _ => return Err(Error::Parse("series header must set D, min, prec".into())),
        };
        let mut out = Self::zero_on(d, min, prec);
        for line in lines {
            let (e, c) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("bad series line {line:?}")))?;
            let e: i64 =
                e.trim().parse().map_err(|_| Error::Parse(format!("bad exponent {e:?}")))?;
            if e < min || e >= prec {
                return Err(Error::Parse(format!("exponent {e} outside [{min}, {prec})")));
            }
            out.coeffs[(e - min) as usize] = C::parse(c)?;
        }
        Ok(out)
    }
}

fn truncate_vec<C>(mut v: Vec<C>, len: usize) -> Vec<C> {
    v.truncate(len);
    v
}

impl QSeries<Rational> {
    /// Lift rational coefficients into Q(zeta_order).
    pub fn to_cyc(&self, order: u32) -> QSeries<CycNum> {
        self.map_coeffs(|c| {
            CycNum::from_rational(c.clone()).embed(order).expect("order 1 embeds anywhere")
        })
    }
}

impl<C: Coeff> fmt::Debug for QSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "QSeries(D={}, [{}, {}), {} nonzero)",
            self.denom,
            self.min_exp,
            self.prec,
            self.coeffs.iter().filter(|c| !c.is_zero()).count()
        )
    }
}

// ---------------------------------------------------------------------------
// Standard constructors
// ---------------------------------------------------------------------------

/// `(sign * q^a; q^m)_inf` truncated below `prec`; only the finitely many
/// factors with exponent below `prec` contribute.
///
/// `a = 0` with positive sign is the identically zero product `(1;q^m)` and
/// is rejected.
pub fn pochhammer_inf(a: Frac, m: Frac, sign: i32, prec: Frac) -> Result<QSeries<Rational>> {
    assert!(sign == 1 || sign == -1);
    assert!(m > Frac::zero(), "modulus must be positive");
    assert!(a >= Frac::zero(), "base exponent must be nonnegative");
    if a == Frac::zero() && sign == 1 {
        return Err(Error::ZeroProduct(format!("(q^0; q^{m}) contains the factor 1-1")));
    }
    let d = a.denom().lcm(m.denom()).lcm(prec.denom());
    let au = a.numer() * d / a.denom();
    let mu = m.numer() * d / m.denom();
    let pu = prec.numer() * d / prec.denom();
    let mut s = QSeries::<Rational>::zero_on(d as u32, 0, pu);
    if pu > 0 {
        s.coeffs[0] = Rational::one();
    }
    let coef = rat(sign as i64);
    let mut e = au;
    if e == 0 {
        // (1 - sign) = 2 for sign = -1
        s = s.scale(&rat(2));
        e += mu;
    }
    while e < pu {
        s.mul_one_minus(e, &coef);
        e += mu;
    }
    Ok(s)
}

/// `(omega * q^a; q^m)_inf` with a cyclotomic prefactor, for theta-product
/// specializations.
pub fn pochhammer_inf_cyc(omega: &CycNum, a: Frac, m: Frac, prec: Frac) -> QSeries<CycNum> {
    assert!(m > Frac::zero());
    assert!(a >= Frac::zero());
    let d = a.denom().lcm(m.denom()).lcm(prec.denom());
    let au = a.numer() * d / a.denom();
    let mu = m.numer() * d / m.denom();
    let pu = prec.numer() * d / prec.denom();
    let mut s = QSeries::<CycNum>::zero_on(d as u32, 0, pu);
    if pu > 0 {
        s.coeffs[0] = CycNum::one();
    }
    let mut e = au;
    if e == 0 {
        let factor = CycNum::one().sub(omega).expect("rational lift");
        s = s.scale(&factor);
        e += mu;
    }
    while e < pu {
        s.mul_one_minus(e, omega);
        e += mu;
    }
    s
}

/// Dedekind eta of `d*tau` as a q-series: `q^{d/24} (q^d; q^d)_inf`.
pub fn eta_series(d: Frac, prec: Frac) -> QSeries<Rational> {
    let poch = pochhammer_inf(d, d, 1, prec - d / 24).expect("d > 0");
    poch.shift(d / 24)
}

/// Generalized eta `f_{N,rho} = q^{(N-2rho)^2 / 8N} (q^rho, q^{N-rho}, q^N; q^N)_inf`.
///
/// `rho` is normalized modulo `N` first, which realizes the symmetries
/// `f_{N,rho} = f_{N,-rho} = f_{N,rho+N}`; `rho = 0 (mod N)` is rejected.
pub fn geta_f(n: u32, rho: i64, prec: Frac) -> Result<QSeries<Rational>> {
    let r = rho.rem_euclid(n as i64);
    if r == 0 {
        return Err(Error::ZeroProduct(format!("f_{{{n},rho}} needs rho not = 0 mod {n}")));
    }
    let nf = frac(n as i64, 1);
    let rf = frac(r, 1);
    let lead = (nf - frac(2, 1) * rf) * (nf - frac(2, 1) * rf) / (frac(8, 1) * nf);
    let p = prec - lead;
    let mut s = pochhammer_inf(rf, nf, 1, p)?;
    s = s.mul(&pochhammer_inf(nf - rf, nf, 1, p)?);
    s = s.mul(&pochhammer_inf(nf, nf, 1, p)?);
    Ok(s.shift(lead))
}

/// Jacobi theta `theta_4(0,q) = sum (-1)^n q^{n^2}`, cross-checked against
/// the triple-product form `(q^2;q^2)(q;q^2)^2` before returning.
pub fn theta4(prec: i64) -> QSeries<Rational> {
    let mut s = QSeries::<Rational>::zero_on(1, 0, prec);
    let mut n: i64 = 0;
    loop {
        let e = n * n;
        if e >= prec {
            break;
        }
        let v = if n % 2 == 0 { rat(1) } else { rat(-1) };
        let w = if n == 0 { v.clone() } else { &v + &v };
        s.coeffs[e as usize] += w;
        n += 1;
    }
    let product = pochhammer_inf(frac(2, 1), frac(2, 1), 1, frac(prec, 1))
        .unwrap()
        .mul(&pochhammer_inf(frac(1, 1), frac(2, 1), 1, frac(prec, 1)).unwrap())
        .mul(&pochhammer_inf(frac(1, 1), frac(2, 1), 1, frac(prec, 1)).unwrap());
    assert!(
        s.agrees_with(&product, None),
        "theta_4 sum and triple-product forms disagree"
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::rat_frac;

    fn poly(pairs: &[(i64, i64)], prec: i64) -> QSeries<Rational> {
        let mut s = QSeries::<Rational>::zero_on(1, pairs.iter().map(|p| p.0).min().unwrap_or(0).min(0), prec);
        for &(e, c) in pairs {
            let idx = (e - s.min_exp) as usize;
            s.coeffs[idx] = rat(c);
        }
        s
    }

    #[test]
    fn mul_basic() {
        let a = poly(&[(0, 1), (1, 1)], 10);
        let b = poly(&[(0, 1), (1, -1)], 10);
        let p = a.mul(&b);
        assert_eq!(p.coeff_int(0).unwrap(), rat(1));
        assert_eq!(p.coeff_int(1).unwrap(), rat(0));
        assert_eq!(p.coeff_int(2).unwrap(), rat(-1));
        assert_eq!(p.prec(), frac(10, 1));
    }

    #[test]
    fn add_zero_identity() {
        let a = poly(&[(0, 3), (4, -2)], 12);
        let z = QSeries::<Rational>::zero_on(1, 0, 12);
        assert!(a.add(&z).agrees_with(&a, None));
    }

    #[test]
    fn lattice_unification() {
        let a = QSeries::<Rational>::monomial(rat(1), frac(1, 2), frac(4, 1));
        let b = QSeries::<Rational>::monomial(rat(1), frac(1, 3), frac(4, 1));
        let p = a.mul(&b);
        assert_eq!(p.denom(), 6);
        assert_eq!(p.coeff_at(frac(5, 6)).unwrap(), rat(1));
    }

    #[test]
    fn inv_geometric() {
        let a = poly(&[(0, 1), (1, -1)], 12);
        let inv = a.inv().unwrap();
        for e in 0..12 {
            assert_eq!(inv.coeff_int(e).unwrap(), rat(1));
        }
        assert!(a.mul(&inv).agrees_with(&QSeries::one(12), None));
    }

    #[test]
    fn inv_euler_counts_partitions() {
        // 1/(q;q)_inf generates p(n); p(4) = 5 by exhaustive enumeration
        let euler = pochhammer_inf(frac(1, 1), frac(1, 1), 1, frac(10, 1)).unwrap();
        let pgen = euler.inv().unwrap();
        assert_eq!(pgen.coeff_int(4).unwrap(), rat(5));
        // and the pentagonal-number pattern of (q;q)_inf itself
        let expect = [1, -1, -1, 0, 0, 1, 0, 1, 0, 0];
        for (e, v) in expect.iter().enumerate() {
            assert_eq!(euler.coeff_int(e as i64).unwrap(), rat(*v));
        }
    }

    #[test]
    fn inv_laurent_shift() {
        // inv(q^2 * u) = q^{-2} inv(u)
        let u = poly(&[(0, 1), (1, 5)], 9);
        let shifted = u.shift(frac(2, 1));
        let inv = shifted.inv().unwrap();
        assert_eq!(inv.min_exp(), frac(-2, 1));
        assert!(inv.mul(&shifted).agrees_with(&QSeries::one(5), None));
    }

    #[test]
    fn inv_rejects_zero() {
        let z = QSeries::<Rational>::zero_on(1, 0, 5);
        assert!(z.inv().is_err());
    }

    #[test]
    fn substitute_examples() {
        let a = poly(&[(0, 1), (28, 1)], 29);
        let s = a.substitute(frac(1, 7));
        assert_eq!(s.coeff_int(4).unwrap(), rat(1));
        assert_eq!(s.coeff_int(0).unwrap(), rat(1));
        assert_eq!(s.prec(), frac(29, 7));
        // round trip
        let rt = a.substitute(frac(1, 7)).substitute(frac(7, 1));
        assert_eq!(rt, a);
    }

    #[test]
    fn shift_prefactor() {
        let one = QSeries::<Rational>::one(5);
        let s = one.shift(frac(-1, 8));
        assert_eq!(s.min_exp(), frac(-1, 8));
        assert_eq!(s.coeff_at(frac(-1, 8)).unwrap(), rat(1));
    }

    #[test]
    fn distinct_odd_parts_counts() {
        // (-q;q^2)_inf / (q^2;q^2)_inf: partitions with distinct odd parts
        let num = pochhammer_inf(frac(1, 1), frac(2, 1), -1, frac(12, 1)).unwrap();
        let den = pochhammer_inf(frac(2, 1), frac(2, 1), 1, frac(12, 1)).unwrap();
        let gen = num.mul(&den.inv().unwrap());
        assert_eq!(gen.coeff_int(4).unwrap(), rat(3)); // 4, 2+2, 3+1
        let expect = [1, 1, 1, 2, 3, 4, 5, 7, 10, 13];
        for (e, v) in expect.iter().enumerate() {
            assert_eq!(gen.coeff_int(e as i64).unwrap(), rat(*v));
        }
    }

    #[test]
    fn high_base_product_constant_term() {
        let p = pochhammer_inf(frac(49, 1), frac(196, 1), 1, frac(30, 1)).unwrap();
        assert_eq!(p.coeff_int(0).unwrap(), rat(1));
        assert!(p.sub(&QSeries::one(30)).is_zero_to_prec());
    }

    #[test]
    fn pochhammer_rejects_unit_base() {
        assert!(pochhammer_inf(frac(0, 1), frac(1, 1), 1, frac(5, 1)).is_err());
    }

    #[test]
    fn eta_leading_term() {
        let e = eta_series(frac(1, 1), frac(2, 1));
        assert_eq!(e.leading().unwrap().0, frac(1, 24));
    }

    #[test]
    fn eta_quotient_is_distinct_odd_generator() {
        // eta(2 tau) / (eta(tau) eta(4 tau)) = q^{-1/8} sum p_o(n) q^n
        let prec = frac(12, 1);
        let e2 = eta_series(frac(2, 1), prec);
        let e1 = eta_series(frac(1, 1), prec);
        let e4 = eta_series(frac(4, 1), prec);
        let quot = e2.mul(&e1.mul(&e4).inv().unwrap());
        let shifted = quot.shift(frac(1, 8));
        for (e, v) in [1i64, 1, 1, 2, 3, 4, 5, 7, 10].iter().enumerate() {
            assert_eq!(shifted.coeff_int(e as i64).unwrap(), rat(*v));
        }
        // and the inverse quotient multiplies back to 1
        let inv_quot = e1.mul(&e4).mul(&e2.inv().unwrap());
        assert!(quot.mul(&inv_quot).agrees_with(&QSeries::one(8), None));
    }

    #[test]
    fn geta_examples() {
        assert_eq!(geta_f(4, 1, frac(3, 1)).unwrap().leading().unwrap().0, frac(1, 8));
        assert_eq!(
            geta_f(196, 7, frac(25, 1)).unwrap().leading().unwrap().0,
            frac(169, 8)
        );
        let half = geta_f(28, 14, frac(20, 1)).unwrap();
        assert_eq!(half.leading().unwrap().0, frac(0, 1));
    }

    #[test]
    fn geta_symmetries() {
        let prec = frac(40, 1);
        let a = geta_f(28, 5, prec).unwrap();
        assert!(a.agrees_with(&geta_f(28, -5, prec).unwrap(), None));
        assert!(a.agrees_with(&geta_f(28, 33, prec).unwrap(), None));
        assert!(geta_f(28, 0, prec).is_err());
        assert!(geta_f(28, 56, prec).is_err());
    }

    #[test]
    fn theta4_coefficients() {
        let t = theta4(10);
        assert_eq!(t.coeff_int(0).unwrap(), rat(1));
        assert_eq!(t.coeff_int(1).unwrap(), rat(-2));
        assert_eq!(t.coeff_int(3).unwrap(), rat(0));
        assert_eq!(t.coeff_int(4).unwrap(), rat(2));
    }

    #[test]
    fn dissect_examples() {
        let x = poly(&[(0, 1), (1, 1), (2, 3), (3, 1)], 4);
        let d0 = x.dissect(2, 0).unwrap();
        assert_eq!(d0.coeff_int(0).unwrap(), rat(1));
        assert_eq!(d0.coeff_int(1).unwrap(), rat(0));
        assert_eq!(d0.coeff_int(2).unwrap(), rat(3));
        // completeness
        let sum = x.dissect(3, 0).unwrap().add(&x.dissect(3, 1).unwrap()).add(&x.dissect(3, 2).unwrap());
        assert!(sum.agrees_with(&x, None));
        // negative exponents use euclidean residues
        let y = poly(&[(-1, 1), (6, 1)], 8);
        let d6 = y.dissect(7, 6).unwrap();
        assert!(d6.agrees_with(&y, None));
    }

    #[test]
    fn dissect_rejects_fractional_support() {
        let x = QSeries::<Rational>::monomial(rat(1), frac(1, 2), frac(3, 1));
        assert!(x.dissect(2, 0).is_err());
    }

    #[test]
    fn coeff_at_contract() {
        let x = poly(&[(0, 1), (1, 2)], 3);
        assert_eq!(x.coeff_int(1).unwrap(), rat(2));
        assert_eq!(x.coeff_at(frac(1, 3)).unwrap(), rat(0));
        assert!(matches!(x.coeff_int(3), Err(Error::PrecisionExceeded { .. })));
        assert!(x.coeff_int(-5).unwrap() == rat(0));
    }

    #[test]
    fn eval_eta_at_i() {
        // eta(i) = Gamma(1/4) / (2 pi^{3/4})
        let e = eta_series(frac(1, 1), frac(30, 1));
        let v = e.eval_at(Complex64::new(0.0, 1.0)).unwrap();
        assert!((v.re - 0.768_225_422_326_056_7).abs() < 1e-10, "{v}");
        assert!(v.im.abs() < 1e-12);
        assert!(e.eval_at(Complex64::new(0.5, 0.0)).is_err());
        let one = QSeries::<Rational>::one(4);
        let w = one.eval_at(Complex64::new(0.3, 2.0)).unwrap();
        assert!((w.re - 1.0).abs() < 1e-15 && w.im.abs() < 1e-15);
    }

    #[test]
    fn euler_identity() {
        // (-q;q)_inf (q;q^2)_inf = 1
        let prec = frac(60, 1);
        let a = pochhammer_inf(frac(1, 1), frac(1, 1), -1, prec).unwrap();
        let b = pochhammer_inf(frac(1, 1), frac(2, 1), 1, prec).unwrap();
        assert!(a.mul(&b).agrees_with(&QSeries::one(60), None));
    }

    #[test]
    fn serialization_round_trip() {
        let x = poly(&[(-2, 7), (0, 1), (5, -3)], 9).shift(frac(1, 2));
        let text = x.to_text();
        let y = QSeries::<Rational>::from_text(&text).unwrap();
        assert_eq!(x, y);
        let c = x.to_cyc(7);
        let y2 = QSeries::<CycNum>::from_text(&c.to_text()).unwrap();
        assert_eq!(c, y2);
    }

    #[test]
    fn mixed_fraction_scale() {
        let x = QSeries::<Rational>::monomial(rat_frac(3, 2), frac(-1, 8), frac(2, 1));
        assert_eq!(x.coeff_at(frac(-1, 8)).unwrap(), rat_frac(3, 2));
        let y = x.substitute(frac(2, 1));
        assert_eq!(y.coeff_at(frac(-1, 4)).unwrap(), rat_frac(3, 2));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_series() -> impl Strategy<Value = QSeries<Rational>> {
            (
                proptest::collection::vec(-6i64..6, 1..8),
                -3i64..3,
                1u32..4,
            )
                .prop_map(|(cs, min, d)| {
                    let prec = min + cs.len() as i64;
                    let mut s = QSeries::<Rational>::zero_on(d, min, prec);
                    for (i, c) in cs.into_iter().enumerate() {
                        s.coeffs[i] = rat(c);
                    }
                    s
                })
        }

        proptest! {
            #[test]
            fn mul_commutes(a in arb_series(), b in arb_series()) {
                prop_assert!(a.mul(&b).agrees_with(&b.mul(&a), None));
            }

            #[test]
            fn mul_distributes(a in arb_series(), b in arb_series(), c in arb_series()) {
                let lhs = a.mul(&b.add(&c));
                let rhs = a.mul(&b).add(&a.mul(&c));
                prop_assert!(lhs.agrees_with(&rhs, None));
            }

            #[test]
            fn mul_associates(a in arb_series(), b in arb_series(), c in arb_series()) {
                let lhs = a.mul(&b).mul(&c);
                let rhs = a.mul(&b.mul(&c));
                prop_assert!(lhs.agrees_with(&rhs, None));
            }

            #[test]
            fn inv_round_trip(a in arb_series()) {
                if let Ok(inv) = a.inv() {
                    if let Ok(back) = inv.inv() {
                        prop_assert!(back.agrees_with(&a, None));
                    }
                }
            }

            #[test]
            fn dissect_completeness(a in arb_series(), c in 1u32..5) {
                let a = a.substitute(frac(a.denom() as i64, 1)); // integer lattice
                let mut sum = QSeries::<Rational>::zero_on(a.denom(), 0, 0);
                for r in 0..c {
                    sum = sum.add(&a.dissect(c, r).unwrap());
                }
                prop_assert!(sum.agrees_with(&a, None));
            }
        }
    }
}
