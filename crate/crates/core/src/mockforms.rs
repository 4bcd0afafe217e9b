//! The special functions of the M2-rank theory as exact q-series.
//!
//! The rank generating function comes in three computable forms that must
//! agree — an Eulerian q-hypergeometric sum, a symmetrized Lambert series,
//! and a level-2 Appell specialization — plus the generalized Lambert
//! series `S(k,c)` whose completed versions carry the mock part of the
//! dissection.  `S(k,c)` itself has a second, independent route through
//! the mu-function and the theta triple product, used as a two-route
//! consistency check.
//!
//! The second half of the module is the data model for dissection
//! identities: `(a, c)` plus, for every residue class `d`, a list of terms
//! that are either `A(m,n,r) q^e S(k,c, tau/c)` or an `A(m,n,r) q^e`
//! multiple of a quotient of the level-`4c` theta blocks
//! `J_a = (q^a, q^{4c-a}; q^{4c})_inf`, `J_0 = (q^{4c}; q^{4c})_inf`.
//! Identity files are checked-in data; the q^450-deep oracle tests catch
//! any transcription slip mechanically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cyclotomic::{a_of, rat, CycNum, Rational};
use crate::error::Error;
use crate::qseries::{frac, pochhammer_inf_cyc, Frac, QSeries};
use crate::Result;

// ---------------------------------------------------------------------------
// R2 in its three forms
// ---------------------------------------------------------------------------

/// Eulerian form of the rank generating function at `zeta = zeta_c^a`:
///
/// ```text
/// R2(zeta; q) = sum_{n >= 0} q^{n^2} (-q; q^2)_n / ((zeta q^2, zeta^{-1} q^2; q^2)_n)
/// ```
pub fn r2_eulerian(a: i64, c: u32, prec: i64) -> QSeries<CycNum> {
    let zeta = CycNum::zeta_pow(c, a);
    let zeta_inv = CycNum::zeta_pow(c, -a);
    let minus_one = CycNum::from_int(-1);
    let mut factor = QSeries::<CycNum>::one(prec);
    let mut acc = QSeries::<CycNum>::one(prec);
    let mut n: i64 = 1;
    while n * n < prec {
        factor.mul_one_minus(2 * n - 1, &minus_one); // (1 + q^{2n-1})
        factor.div_one_minus(2 * n, &zeta); // 1/(1 - zeta q^{2n})
        factor.div_one_minus(2 * n, &zeta_inv);
        acc = acc.add(&factor.shift(frac(n * n, 1)));
        n += 1;
    }
    acc
}

/// Symmetrized Lambert form:
///
/// ```text
/// (-q;q^2)_inf / (q^2;q^2)_inf *
///   (1 + sum_{n>=1} (1-zeta)(1-zeta^{-1}) (-1)^n q^{2n^2+n} (1+q^{2n})
///                   / ((1-zeta q^{2n})(1-zeta^{-1} q^{2n})))
/// ```
///
/// Requires `c` not dividing `2a` (the form the identity machinery uses).
pub fn r2_lambert(a: i64, c: u32, prec: i64) -> Result<QSeries<CycNum>> {
    if a.rem_euclid(c as i64) == 0 {
        return Err(Error::Domain(format!(
            "r2_lambert degenerates at zeta = 1 (a = {a}, c = {c})"
        )));
    }
    let zeta = CycNum::zeta_pow(c, a);
    let zeta_inv = CycNum::zeta_pow(c, -a);
    let minus_one = CycNum::from_int(-1);
    let sym = CycNum::one()
        .sub(&zeta)?
        .mul(&CycNum::one().sub(&zeta_inv)?)?;
    let mut inner = QSeries::<CycNum>::one(prec);
    let mut n: i64 = 1;
    while 2 * n * n + n < prec {
        let sign = if n % 2 == 0 { CycNum::one() } else { minus_one.clone() };
        let mut term = QSeries::monomial(sym.mul(&sign)?, frac(2 * n * n + n, 1), frac(prec, 1));
        term.mul_one_minus(2 * n, &minus_one); // (1 + q^{2n})
        term.div_one_minus(2 * n, &zeta);
        term.div_one_minus(2 * n, &zeta_inv);
        inner = inner.add(&term);
        n += 1;
    }
    let pref = distinct_odd_prefactor(prec).to_cyc(c);
    Ok(pref.mul(&inner))
}

/// `(-q; q^2)_inf / (q^2; q^2)_inf`, the generating function of partitions
/// without repeated odd parts.
pub fn distinct_odd_prefactor(prec: i64) -> QSeries<Rational> {
    let mut s = QSeries::<Rational>::one(prec);
    let minus_one = rat(-1);
    let one = rat(1);
    let mut e = 1;
    while e < prec {
        s.mul_one_minus(e, &minus_one); // (1 + q^e), odd e
        e += 2;
    }
    let mut e = 2;
    while e < prec {
        s.div_one_minus(e, &one); // 1/(1 - q^e), even e
        e += 2;
    }
    s
}

/// The level-2 Appell specialization `A_2(a/c, -tau - 1/2; 2 tau)` as the
/// bilateral sum `zeta * sum_n (-1)^n q^{2n^2+n} / (1 - zeta q^{2n})`.
///
/// Satisfies `R2(zeta; q) = (zeta^{-1} - 1) * (-q;q^2)_inf/(q^2;q^2)_inf * A_2(...)`.
pub fn appell_a2_special(a: i64, c: u32, prec: i64) -> Result<QSeries<CycNum>> {
    let zeta = CycNum::zeta_pow(c, a);
    if zeta == CycNum::one() {
        return Err(Error::Domain(format!(
            "A_2 specialization needs zeta != 1, got a = {a}, c = {c}"
        )));
    }
    let zeta_inv = CycNum::zeta_pow(c, -a);
    let mut acc = QSeries::<CycNum>::zero_on(1, 0, prec);
    // n = 0: the scalar 1/(1 - zeta)
    let n0 = CycNum::one().sub(&zeta)?.inverse()?;
    acc = acc.add(&QSeries::monomial(n0, frac(0, 1), frac(prec, 1)));
    // n > 0: exponent 2n^2 + n grows past prec quickly
    let mut n: i64 = 1;
    while 2 * n * n + n < prec {
        let sign = CycNum::from_int(if n % 2 == 0 { 1 } else { -1 });
        let mut term = QSeries::monomial(sign, frac(2 * n * n + n, 1), frac(prec, 1));
        term.div_one_minus(2 * n, &zeta);
        acc = acc.add(&term);
        n += 1;
    }
    // n < 0: normalize 1/(1 - zeta q^{-E}) = -zeta^{-1} q^E / (1 - zeta^{-1} q^E),
    // so the term exponent is 2n^2 + n + |2n| = 2n^2 - n
    let mut n: i64 = -1;
    while 2 * n * n - n < prec {
        let sign = CycNum::from_int(if n % 2 == 0 { 1 } else { -1 });
        let coef = sign.mul(&zeta_inv.neg())?;
        let mut term = QSeries::monomial(coef, frac(2 * n * n - n, 1), frac(prec, 1));
        term.div_one_minus(-2 * n, &zeta_inv);
        acc = acc.add(&term);
        n -= 1;
    }
    Ok(acc.scale(&zeta))
}

// ---------------------------------------------------------------------------
// The generalized Lambert series S(k, c)
// ---------------------------------------------------------------------------

fn lambert_pole_check(k: i64, c: u32) -> Result<()> {
    let ci = c as i64;
    if (1 + 4 * k - ci).rem_euclid(4 * ci) == 0 {
        return Err(Error::LambertPole { k, c });
    }
    Ok(())
}

/// `S(k, c; tau_scale * tau)`:
///
/// ```text
/// S(k,c;tau) = q^{-c^2+4kc-2k^2+c-k}
///              / ((-1)^{c-1} q^{c^2}, (-1)^{c-1} q^{3c^2}, q^{4c^2}; q^{4c^2})_inf
///              * sum_n (-1)^{nc} q^{2c^2 n^2 + 3c^2 n} / (1 - q^{4c^2 n + (1+4k-c)c})
/// ```
///
/// `prec` is the precision bound of the returned (scaled) series.
/// Denominator factors with negative exponent are rewritten as
/// `1/(1-q^{-E}) = -q^E/(1-q^E)` before geometric expansion; the bilateral
/// sum is cut once the minimal exponent `2c^2 n^2 + 3c^2 n` (plus `E` on
/// the negative side) clears the precision bound, which happens for all
/// but finitely many `n` because the quadratic term dominates.
pub fn s_series(k: i64, c: u32, prec: Frac, tau_scale: Frac) -> Result<QSeries<Rational>> {
    if !(0..c as i64).contains(&k) {
        return Err(Error::Domain(format!("S(k,c) needs 0 <= k < c, got k = {k}, c = {c}")));
    }
    lambert_pole_check(k, c)?;
    assert!(tau_scale > frac(0, 1), "tau_scale must be positive");
    let ci = c as i64;
    let c2 = ci * ci;
    let pref = -c2 + 4 * k * ci - 2 * k * k + ci - k;
    // integer-level precision needed before scaling and the prefactor shift
    let needed = prec / tau_scale - frac(pref, 1);
    let w: i64 = needed.ceil().to_integer().max(0);

    let mut sum = QSeries::<Rational>::zero_on(1, 0, w);
    let push = |n: i64, sum: &mut QSeries<Rational>| -> bool {
        let big_e = 2 * c2 * n * n + 3 * c2 * n;
        let e = 4 * c2 * n + (1 + 4 * k - ci) * ci;
        debug_assert!(e != 0, "pole excluded by precondition");
        let sign = if (n * ci) % 2 == 0 { 1 } else { -1 };
        let (base, geom_e, coef) = if e > 0 {
            (big_e, e, rat(sign))
        } else {
            (big_e - e, -e, rat(-sign))
        };
        if base >= w {
            return false;
        }
        let mut term = QSeries::monomial(coef, frac(base, 1), frac(w, 1));
        term.div_one_minus(geom_e, &rat(1));
        *sum = sum.add(&term);
        true
    };
    // n >= 0 and n < 0 directions; the minimal exponent is eventually
    // increasing in |n|, so stop after the first out-of-window index past
    // the sign change of the denominator exponents (n >= 1 has e > 0,
    // n <= -1 has e < 0, so min exponents are 2c^2n^2+3c^2n and
    // 2c^2n^2-c^2n-(1+4k-c)c, both monotone for |n| >= 1).
    let mut n = 0;
    loop {
        if !push(n, &mut sum) && n > 0 {
            break;
        }
        n += 1;
    }
    let mut n = -1;
    loop {
        if !push(n, &mut sum) {
            break;
        }
        n -= 1;
    }

    // divide by the Pochhammer block; for odd c the signs are all +1, for
    // even c the first two factor families are (1 + q^e)
    let unit = rat(1);
    let neg = rat(-1);
    let fam_sign = if c % 2 == 1 { &unit } else { &neg };
    for (start, step) in [(c2, 4 * c2), (3 * c2, 4 * c2), (4 * c2, 4 * c2)] {
        let coef = if start == 4 * c2 { &unit } else { fam_sign };
        let mut e = start;
        while e < w {
            sum.div_one_minus(e, coef);
            e += step;
        }
    }

    Ok(sum.shift(frac(pref, 1)).substitute(tau_scale).truncate(prec))
}

/// `S(k,c;tau)` computed through the mu-function route:
/// `S = i^{-c} q^{1/8} * q^{-(1+4k-2c)^2/8} mu((1+4k-c)c tau, c^2 tau + (c-1)/2; 4c^2 tau)`,
/// with `mu(u,v;tau') = e^{pi i u}/theta(v;tau') * sum_n (-1)^n e^{pi i n(n+1) tau'} e^{2 pi i n v} / (1 - e^{2 pi i n tau'} e^{2 pi i u})`
/// and the theta denominator expanded by its triple-product form.
///
/// A genuinely distinct evaluation path from [`s_series`]: the i-powers,
/// eighth-power shifts, and theta constants must all conspire to land on
/// the same rational series.
pub fn mu_special_s(k: i64, c: u32, prec: i64) -> Result<QSeries<Rational>> {
    if !(0..c as i64).contains(&k) {
        return Err(Error::Domain(format!("S(k,c) needs 0 <= k < c, got k = {k}, c = {c}")));
    }
    lambert_pole_check(k, c)?;
    let ci = c as i64;
    let c2 = ci * ci;
    // final exponent shift: 1/8 - (1+4k-2c)^2/8 from the normalizations
    // plus (1+4k-c)c/2 from e^{pi i u}; an integer in total.
    let t = 1 + 4 * k - 2 * ci;
    let shift_total = frac(1 - t * t, 8) + frac((1 + 4 * k - ci) * ci, 2);
    assert_eq!(*shift_total.denom(), 1, "mu-route q-powers must combine to integers");
    let w = (frac(prec, 1) - shift_total).ceil().to_integer();
    if w <= 0 {
        // the whole series sits at exponents >= shift_total >= prec
        return Ok(QSeries::zero_on(1, 0, prec));
    }
    let wf = frac(w, 1);

    // bilateral mu sum: (-1)^n q^{2c^2 n(n+1)} * (e^{2 pi i v})^n / (1 - q^{4c^2 n} e^{2 pi i u})
    // with e^{2 pi i v} = (-1)^{c-1} q^{c^2} and e^{2 pi i u} = q^{(1+4k-c)c}
    let mut sum = QSeries::<CycNum>::zero_on(1, 0, w);
    let push = |n: i64, sum: &mut QSeries<CycNum>| -> bool {
        let big_e = 2 * c2 * n * (n + 1) + c2 * n;
        let e = 4 * c2 * n + (1 + 4 * k - ci) * ci;
        debug_assert!(e != 0);
        // (-1)^n * (-1)^{(c-1)n}, as a power of i for the record
        let sign = CycNum::i_pow(2 * n + 2 * (ci - 1) * n);
        let (base, geom_e, coef) = if e > 0 {
            (big_e, e, sign)
        } else {
            (big_e - e, -e, sign.neg())
        };
        if base >= w {
            return false;
        }
        let mut term = QSeries::monomial(coef, frac(base, 1), wf);
        term.div_one_minus(geom_e, &CycNum::one());
        *sum = sum.add(&term);
        true
    };
    let mut n = 0;
    loop {
        if !push(n, &mut sum) && n > 0 {
            break;
        }
        n += 1;
    }
    let mut n = -1;
    loop {
        if !push(n, &mut sum) {
            break;
        }
        n -= 1;
    }

    // theta(v; tau') by the product form
    //   -i q'^{1/8} e^{-pi i v} (e^{2 pi i v}, e^{-2 pi i v} q', q'; q')_inf
    // with q' = q^{4c^2}; the constant in front collects into
    // -i * i^{1-c}, and q'^{1/8} e^{-pi i v} = q^{c^2/2} q^{-c^2/2} = 1.
    let omega = CycNum::i_pow(2 * (ci - 1)); // e^{2 pi i (c-1)/2}
    // constant block: -i from the product formula times i^{1-c} from
    // e^{-pi i (c-1)/2}
    let theta_const = CycNum::i_pow(1).mul(&CycNum::i_pow(1 - ci))?.neg();
    let f4 = frac(4 * c2, 1);
    let mut theta = pochhammer_inf_cyc(&omega, frac(c2, 1), f4, wf);
    theta = theta.mul(&pochhammer_inf_cyc(&omega.conj(), frac(3 * c2, 1), f4, wf));
    theta = theta.mul(&pochhammer_inf_cyc(&CycNum::one(), f4, f4, wf));
    let theta = theta.scale(&theta_const);

    let mu_over_epiu = sum.mul(&theta.inv()?);
    let s = mu_over_epiu.scale(&CycNum::i_pow(-ci)).shift(shift_total);

    // the i-powers cancel; a residual imaginary part means a bug upstream
    let out = s.map_coeffs(|z| {
        z.as_rational()
            .expect("mu-route coefficients must be rational")
    });
    Ok(out.truncate(frac(prec, 1)))
}

/// The holomorphic combination from which the mock parts cancel:
///
/// ```text
/// R2~(a,c;tau) - i^{-c} (1-zeta_c^a) zeta_c^{-a}
///     sum_{k=0}^{c-1} (-1)^k (zeta_c^{-2ak} - zeta_c^{2ak+a}) S~(k,c;tau)
/// ```
///
/// computed on the holomorphic q-series representatives
/// (`R2~ -> q^{-1/8} R2`, `S~ -> i^c q^{-1/8} S`), over Q(zeta_{lcm(4,c)}).
/// Summands whose parameters hit the `S` pole are skipped after asserting
/// that their root-of-unity coefficient vanishes identically.
pub fn r2_minus_s_combination(a: i64, c: u32, prec: Frac) -> Result<QSeries<CycNum>> {
    if (2 * a).rem_euclid(c as i64) == 0 {
        return Err(Error::Domain(format!("combination needs c = {c} not dividing 2a = {}", 2 * a)));
    }
    let order = num_integer::lcm(4, c);
    let ci = c as i64;
    let int_prec = (prec + frac(1, 8)).ceil().to_integer();
    let r2 = r2_eulerian(a, c, int_prec)
        .map_coeffs(|z| z.embed(order).expect("c divides the working order"))
        .shift(frac(-1, 8));
    let zc = |e: i64| CycNum::zeta_pow(c, e).embed(order).expect("divides");
    let outer = CycNum::i_pow(-ci)
        .embed(order)?
        .mul(&CycNum::one().sub(&zc(a))?)?
        .mul(&zc(-a))?;
    let mut acc = r2;
    for k in 0..ci {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let coef = zc(-2 * a * k).sub(&zc(2 * a * k + a))?.scale(&rat(sign));
        if (1 + 4 * k - ci).rem_euclid(4 * ci) == 0 {
            // the paper-level cancellation that justifies skipping
            assert!(coef.is_zero(), "pole summand must carry a vanishing coefficient");
            continue;
        }
        if coef.is_zero() {
            continue;
        }
        let s = s_series(k, c, prec + frac(1, 8), frac(1, 1))?
            .to_cyc(order)
            .scale(&CycNum::i_pow(ci).embed(order)?)
            .shift(frac(-1, 8));
        let total = outer.mul(&coef)?.neg();
        acc = acc.add_scaled(&s, Some(&total));
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Mock theta functions (sanity instances)
// ---------------------------------------------------------------------------

/// Third-order mock theta `f(q) = sum q^{n^2} / (-q; q)_n^2`.
pub fn mock_theta_f(prec: i64) -> QSeries<Rational> {
    let minus_one = rat(-1);
    let mut factor = QSeries::<Rational>::one(prec);
    let mut acc = QSeries::<Rational>::one(prec);
    let mut n = 1;
    while n * n < prec {
        factor.div_one_minus(n, &minus_one);
        factor.div_one_minus(n, &minus_one);
        acc = acc.add(&factor.shift(frac(n * n, 1)));
        n += 1;
    }
    acc
}

/// `phi(-q)` for the tenth-order-style companion
/// `phi(q) = sum q^{n^2} / (-q^2; q^2)_n`, expanded directly with the
/// alternating sign `(-1)^{n^2} = (-1)^n`.
pub fn mock_theta_phi_neg(prec: i64) -> QSeries<Rational> {
    let minus_one = rat(-1);
    let mut factor = QSeries::<Rational>::one(prec);
    let mut acc = QSeries::<Rational>::one(prec);
    let mut n = 1;
    while n * n < prec {
        factor.div_one_minus(2 * n, &minus_one);
        let sign = if n % 2 == 0 { rat(1) } else { rat(-1) };
        acc = acc.add(&factor.shift(frac(n * n, 1)).scale(&sign));
        n += 1;
    }
    acc
}

// ---------------------------------------------------------------------------
// Dissection identities
// ---------------------------------------------------------------------------

mod frac_str {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Frac, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Frac, D::Error> {
        let text = String::deserialize(d)?;
        crate::qseries::frac_from_str(&text).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// A term `A(m,n,r) q^{qpow} S(k, c; tau_scale * tau)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambertSpec {
    #[serde(rename = "A")]
    pub coeff: [i64; 3],
    pub k: u32,
    #[serde(with = "frac_str")]
    pub tau_scale: Frac,
    #[serde(with = "frac_str")]
    pub qpow: Frac,
}

/// A term `A(m,n,r) q^{qpow} prod J_a^{e} / prod J_a^{e}` with
/// `J_a = (q^a, q^{4c-a}; q^{4c})_inf` for `a >= 1` and `J_0 = (q^{4c}; q^{4c})_inf`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GEtaTermSpec {
    #[serde(rename = "A")]
    pub coeff: [i64; 3],
    #[serde(with = "frac_str")]
    pub qpow: Frac,
    pub num: Vec<(u32, u32)>,
    pub den: Vec<(u32, u32)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum IdentityTerm {
    S(LambertSpec),
    J(GEtaTermSpec),
}

impl IdentityTerm {
    pub fn coeff(&self) -> [i64; 3] {
        match self {
            IdentityTerm::S(t) => t.coeff,
            IdentityTerm::J(t) => t.coeff,
        }
    }

    pub fn qpow(&self) -> Frac {
        match self {
            IdentityTerm::S(t) => t.qpow,
            IdentityTerm::J(t) => t.qpow,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidueTerms {
    pub d: u32,
    pub terms: Vec<IdentityTerm>,
}

/// A machine-readable dissection identity
/// `R2(zeta_c^a; q) = sum_d q^d R2_d(q^c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Identity {
    pub a: i64,
    pub c: u32,
    pub residues: Vec<ResidueTerms>,
}

impl Identity {
    /// Structural validation: every residue class present exactly once,
    /// all J-indices within `[0, 2c]`, positive exponents, Lambert terms
    /// pole-free with positive tau scale.
    pub fn validate(&self) -> Result<()> {
        let c = self.c;
        if c == 0 || (2 * self.a).rem_euclid(c as i64) == 0 {
            return Err(Error::Parse(format!(
                "identity needs c > 0 and c not dividing 2a (a = {}, c = {c})",
                self.a
            )));
        }
        let mut seen = vec![false; c as usize];
        for res in &self.residues {
            if res.d >= c || seen[res.d as usize] {
                return Err(Error::Parse(format!("residue d = {} out of range or repeated", res.d)));
            }
            seen[res.d as usize] = true;
            for term in &res.terms {
                match term {
                    IdentityTerm::S(t) => {
                        if t.k >= c {
                            return Err(Error::Parse(format!("Lambert term k = {} >= c", t.k)));
                        }
                        lambert_pole_check(t.k as i64, c)
                            .map_err(|_| Error::Parse(format!("Lambert term k = {} hits the pole", t.k)))?;
                        if t.tau_scale <= frac(0, 1) {
                            return Err(Error::Parse("tau_scale must be positive".into()));
                        }
                    }
                    IdentityTerm::J(t) => {
                        for (a, e) in t.num.iter().chain(&t.den) {
                            if *a > 2 * c {
                                return Err(Error::Parse(format!("J index {a} > 2c = {}", 2 * c)));
                            }
                            if *e == 0 {
                                return Err(Error::Parse("J exponents must be positive".into()));
                            }
                        }
                    }
                }
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Parse("identity must list every residue class".into()));
        }
        Ok(())
    }

    pub fn residue(&self, d: u32) -> Result<&ResidueTerms> {
        self.residues
            .iter()
            .find(|r| r.d == d)
            .ok_or_else(|| Error::Parse(format!("identity has no residue d = {d}")))
    }

    /// Total number of terms across all residues.
    pub fn term_count(&self) -> usize {
        self.residues.iter().map(|r| r.terms.len()).sum()
    }
}

/// Load and validate an identity file (JSON).
pub fn load_identity(path: impl AsRef<Path>) -> Result<Identity> {
    let text = std::fs::read_to_string(path.as_ref())?;
    parse_identity(&text)
}

pub fn parse_identity(text: &str) -> Result<Identity> {
    let id: Identity = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("identity file, line {}: {}", e.line(), e)))?;
    id.validate()?;
    Ok(id)
}

/// The series of one term at the `R2_d(q)` level, without its `A`
/// coefficient: `q^{qpow} S(k, c; tau_scale tau)` or the `J`-quotient.
pub fn assemble_term_rational(term: &IdentityTerm, c: u32, prec: Frac) -> Result<QSeries<Rational>> {
    match term {
        IdentityTerm::S(t) => {
            Ok(s_series(t.k as i64, c, prec - t.qpow, t.tau_scale)?.shift(t.qpow))
        }
        IdentityTerm::J(t) => {
            let base = 4 * c as i64;
            let w: i64 = (prec - t.qpow).ceil().to_integer().max(0);
            let mut s = QSeries::<Rational>::one(w);
            let one = rat(1);
            let apply = |a: u32, reps: u32, invert: bool, s: &mut QSeries<Rational>| {
                let starts: &[i64] =
                    if a == 0 { &[base] } else { &[a as i64, base - a as i64] };
                for &st in starts {
                    for _ in 0..reps {
                        let mut e = st;
                        while e < w {
                            if invert {
                                s.div_one_minus(e, &one);
                            } else {
                                s.mul_one_minus(e, &one);
                            }
                            e += base;
                        }
                    }
                }
            };
            for &(a, e) in &t.num {
                apply(a, e, false, &mut s);
            }
            for &(a, e) in &t.den {
                apply(a, e, true, &mut s);
            }
            Ok(s.shift(t.qpow))
        }
    }
}

/// One term with its cyclotomic `A(m,n,r)` coefficient materialized
/// (the `A` carrier is specific to `c = 7`).
pub fn assemble_term(term: &IdentityTerm, c: u32, prec: Frac) -> Result<QSeries<CycNum>> {
    if c != 7 {
        return Err(Error::Domain(
            "A(m,n,r) coefficients are the c = 7 carrier; no identity data ships for other c"
                .into(),
        ));
    }
    let [m, n, r] = term.coeff();
    let a = a_of(m, n, r);
    Ok(assemble_term_rational(term, c, prec)?.to_cyc(7).scale(&a))
}

/// `R2_d(q)` as a series: the sum of the residue's terms.
pub fn assemble_residue(identity: &Identity, d: u32, prec: Frac) -> Result<QSeries<CycNum>> {
    let res = identity.residue(d)?;
    let mut acc: Option<QSeries<CycNum>> = None;
    for term in &res.terms {
        let t = assemble_term(term, identity.c, prec)?;
        acc = Some(match acc {
            None => t,
            Some(s) => s.add(&t),
        });
    }
    acc.ok_or_else(|| Error::Parse(format!("residue {d} has no terms")))
}

/// The full right side `sum_d q^d R2_d(q^c)`, on the integer lattice.
pub fn assemble_full(identity: &Identity, prec: i64) -> Result<QSeries<CycNum>> {
    let c = identity.c;
    let mut acc: Option<QSeries<CycNum>> = None;
    for d in 0..c {
        let res_prec = frac(prec - d as i64, c as i64);
        let r = assemble_residue(identity, d, res_prec)?;
        let lifted = r.substitute(frac(c as i64, 1)).shift(frac(d as i64, 1));
        acc = Some(match acc {
            None => lifted,
            Some(s) => s.add(&lifted),
        });
    }
    Ok(acc.expect("c >= 1"))
}

/// Rank-difference series `R2_{r,0,c}(d; q)` read off the identity by
/// projecting every `A(m,n,r)` onto its components — integer coefficients,
/// the form the oracle checks run against.
pub fn rank_diff_from_identity(
    identity: &Identity,
    r: u32,
    d: u32,
    prec: Frac,
) -> Result<QSeries<Rational>> {
    if identity.c != 7 {
        return Err(Error::Domain("rank projection is defined for the prime case c = 7".into()));
    }
    assert!((1..=3).contains(&r), "component index must be 1, 2, or 3");
    let res = identity.residue(d)?;
    let mut acc: Option<QSeries<Rational>> = None;
    for term in &res.terms {
        let comp = term.coeff()[(r - 1) as usize];
        if comp == 0 {
            continue;
        }
        let t = assemble_term_rational(term, identity.c, prec)?.scale(&rat(comp));
        acc = Some(match acc {
            None => t,
            Some(s) => s.add(&t),
        });
    }
    acc.ok_or_else(|| Error::Parse(format!("residue {d} has no terms")))
}
