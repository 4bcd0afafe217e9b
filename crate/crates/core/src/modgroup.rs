//! Congruence-subgroup machinery for `Gamma_0(N) ∩ Gamma_1(M)`: membership,
//! cusp equivalence and complete cusp systems with widths, the group index,
//! and the eta multiplier.
//!
//! Cusp classification works through the finite quotient: with
//! `L = lcm(N, M)`, cusps of `Gamma(L)` are the classes `±(alpha, gamma)
//! mod L` of reduced pairs, and the group's cusps are the orbits of the
//! image of the group in `SL_2(Z/L)` acting on those classes.  The image
//! is enumerated by filtering the congruence conditions, which is exactly
//! the image because `SL_2(Z) -> SL_2(Z/L)` is surjective and all defining
//! conditions are congruences modulo divisors of `L`.

use std::collections::HashMap;

use num_integer::Integer;

use crate::cyclotomic::CycNum;
use crate::error::Error;
use crate::Result;

/// `Gamma_0(gamma0) ∩ Gamma_1(gamma1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    pub gamma0: u32,
    pub gamma1: u32,
}

impl GroupSpec {
    pub fn new(gamma0: u32, gamma1: u32) -> Self {
        assert!(gamma0 >= 1 && gamma1 >= 1);
        GroupSpec { gamma0, gamma1 }
    }

    /// `lcm(N, M)`, the level all congruence conditions divide.
    pub fn level(&self) -> u32 {
        num_integer::lcm(self.gamma0, self.gamma1)
    }

    /// `-I` lies in the group iff `-1 = 1 (mod gamma1)`.
    pub fn contains_minus_identity(&self) -> bool {
        self.gamma1 <= 2
    }
}

/// An element of `SL_2(Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniMatrix {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
    pub delta: i64,
}

impl UniMatrix {
    pub fn new(alpha: i64, beta: i64, gamma: i64, delta: i64) -> Result<Self> {
        let m = UniMatrix { alpha, beta, gamma, delta };
        if m.det() != 1 {
            return Err(Error::Domain(format!("matrix {m:?} has determinant {}", m.det())));
        }
        Ok(m)
    }

    pub fn det(&self) -> i64 {
        self.alpha * self.delta - self.beta * self.gamma
    }

    pub fn identity() -> Self {
        UniMatrix { alpha: 1, beta: 0, gamma: 0, delta: 1 }
    }
}

/// A cusp `num/den` in lowest terms with `den >= 0`; `1/0` is infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cusp {
    num: i64,
    den: i64,
}

impl Cusp {
    pub fn new(num: i64, den: i64) -> Self {
        if den == 0 {
            return Cusp { num: 1, den: 0 };
        }
        let (mut a, mut c) = (num, den);
        if c < 0 {
            a = -a;
            c = -c;
        }
        let g = a.abs().gcd(&c);
        Cusp { num: a / g, den: c / g }
    }

    pub fn infinity() -> Self {
        Cusp { num: 1, den: 0 }
    }

    pub fn is_infinity(&self) -> bool {
        self.den == 0
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" || s == "oo" || s == "infinity" {
            return Ok(Self::infinity());
        }
        match s.split_once('/') {
            Some((a, c)) => {
                let a: i64 = a.trim().parse().map_err(|_| Error::Parse(format!("bad cusp {s:?}")))?;
                let c: i64 = c.trim().parse().map_err(|_| Error::Parse(format!("bad cusp {s:?}")))?;
                Ok(Cusp::new(a, c))
            }
            None => {
                let a: i64 = s.parse().map_err(|_| Error::Parse(format!("bad cusp {s:?}")))?;
                Ok(Cusp::new(a, 1))
            }
        }
    }
}

impl std::fmt::Display for Cusp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_infinity() {
            write!(f, "inf")
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Membership test: `gamma = 0 (mod lcm(N,M))`, `alpha = delta = 1 (mod M)`.
pub fn member(b: &UniMatrix, g: &GroupSpec) -> bool {
    debug_assert_eq!(b.det(), 1);
    let l = g.level() as i64;
    let m = g.gamma1 as i64;
    b.gamma.rem_euclid(l) == 0
        && b.alpha.rem_euclid(m) == 1 % m
        && b.delta.rem_euclid(m) == 1 % m
}

/// Complete a reduced cusp `(alpha, gamma)` to a matrix in `SL_2(Z)` whose
/// first column is the cusp, via the extended Euclidean algorithm.
pub fn matrix_to_cusp(c: &Cusp) -> UniMatrix {
    let e = i64::extended_gcd(&c.num, &c.den);
    debug_assert_eq!(e.gcd, 1, "cusp must be reduced");
    // alpha*x + gamma*y = 1  ->  delta = x, beta = -y
    UniMatrix { alpha: c.num, beta: -e.y, gamma: c.den, delta: e.x }
}

/// The width of a cusp: least `w >= 1` with `B T^w B^{-1}` in the group.
/// From `B T^w B^{-1} = [[1 - a g w, a^2 w], [-g^2 w, 1 + a g w]]` the
/// conditions are `g^2 w = 0 (mod lcm(N,M))` and `a g w = 0 (mod M)`.
pub fn width(c: &Cusp, g: &GroupSpec) -> u64 {
    let l = g.level() as i64;
    let m = g.gamma1 as i64;
    let gm = c.den.rem_euclid(l);
    let am = (c.num.rem_euclid(m) * c.den.rem_euclid(m)).rem_euclid(m);
    let w1 = l / (gm * gm % l).gcd(&l);
    let w2 = m / am.gcd(&m);
    num_integer::lcm(w1, w2) as u64
}

/// Practical cap on the level for the finite-quotient enumeration.
pub const LEVEL_BOUND: u32 = 600;

/// The cusp classification of a group: a complete system of inequivalent
/// cusp representatives with widths, plus a classifier for arbitrary cusps.
pub struct CuspClasses {
    level: u32,
    reps: Vec<(Cusp, u64)>,
    /// canonical `±(a, c) mod L` pair -> class index
    class_of: HashMap<(u32, u32), usize>,
    image_size: u64,
}

fn canon_pair(a: u32, c: u32, l: u32) -> (u32, u32) {
    let neg = ((l - a % l) % l, (l - c % l) % l);
    (a % l, c % l).min(neg)
}

impl CuspClasses {
    pub fn for_group(g: &GroupSpec) -> Result<Self> {
        let l = g.level();
        if l > LEVEL_BOUND {
            return Err(Error::LevelBound { level: l as u64, bound: LEVEL_BOUND as u64 });
        }
        if l == 1 {
            // the full modular group: one cusp, width 1
            let mut class_of = HashMap::new();
            class_of.insert((0, 0), 0);
            return Ok(CuspClasses {
                level: 1,
                reps: vec![(Cusp::infinity(), 1)],
                class_of,
                image_size: 1,
            });
        }
        let image = group_image_mod_level(g)?;
        let li = l as u64;

        // all Gamma(L) cusp classes: pairs (a, c) mod L with gcd(a, c, L) = 1,
        // identified under negation
        let mut ids: HashMap<(u32, u32), usize> = HashMap::new();
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for a in 0..l {
            for c in 0..l {
                if gcd3(a, c, l) != 1 {
                    continue;
                }
                let key = canon_pair(a, c, l);
                if key == (a, c) {
                    ids.insert(key, pairs.len());
                    pairs.push(key);
                }
            }
        }

        // orbit partition under the image action
        let budget = (pairs.len() as u64) * (image.len() as u64);
        if budget > 400_000_000 {
            return Err(Error::LevelBound { level: li, bound: LEVEL_BOUND as u64 });
        }
        let mut orbit = vec![usize::MAX; pairs.len()];
        let mut orbits: Vec<Vec<(u32, u32)>> = Vec::new();
        for start in 0..pairs.len() {
            if orbit[start] != usize::MAX {
                continue;
            }
            let oid = orbits.len();
            let mut members = Vec::new();
            let mut stack = vec![start];
            orbit[start] = oid;
            while let Some(i) = stack.pop() {
                let (a, c) = pairs[i];
                members.push((a, c));
                for m in &image {
                    let na = (m[0] as u64 * a as u64 + m[1] as u64 * c as u64) % li;
                    let nc = (m[2] as u64 * a as u64 + m[3] as u64 * c as u64) % li;
                    let key = canon_pair(na as u32, nc as u32, l);
                    let j = ids[&key];
                    if orbit[j] == usize::MAX {
                        orbit[j] = oid;
                        stack.push(j);
                    }
                }
            }
            orbits.push(members);
        }

        // choose a representative cusp per orbit: the lift minimizing
        // (denominator, numerator); infinity (1/0) sorts first
        let mut reps = Vec::with_capacity(orbits.len());
        for members in &orbits {
            let mut best: Option<Cusp> = None;
            for &(a, c) in members {
                let cand = lift_pair(a, c, l);
                best = Some(match best {
                    None => cand,
                    Some(b) => {
                        if (cand.den, cand.num) < (b.den, b.num) {
                            cand
                        } else {
                            b
                        }
                    }
                });
            }
            let rep = best.expect("orbit nonempty");
            reps.push((rep, width(&rep, g)));
        }

        // stable order: by representative (denominator, numerator)
        let mut order: Vec<usize> = (0..reps.len()).collect();
        order.sort_by_key(|&i| (reps[i].0.den, reps[i].0.num));
        let rank_of: HashMap<usize, usize> =
            order.iter().enumerate().map(|(rank, &i)| (i, rank)).collect();
        let reps: Vec<(Cusp, u64)> = order.iter().map(|&i| reps[i]).collect();
        let mut class_of = HashMap::new();
        for (i, &(a, c)) in pairs.iter().enumerate() {
            class_of.insert((a, c), rank_of[&orbit[i]]);
        }

        Ok(CuspClasses { level: l, reps, class_of, image_size: image.len() as u64 })
    }

    /// Complete system of inequivalent cusps with widths.
    pub fn reps(&self) -> &[(Cusp, u64)] {
        &self.reps
    }

    /// Index of the class a cusp belongs to.
    pub fn classify(&self, c: &Cusp) -> usize {
        if self.level == 1 {
            return 0;
        }
        let l = self.level as i64;
        let a = c.num.rem_euclid(l) as u32;
        let g = c.den.rem_euclid(l) as u32;
        self.class_of[&canon_pair(a, g, self.level)]
    }

    pub fn image_size(&self) -> u64 {
        self.image_size
    }
}

fn gcd3(a: u32, b: u32, c: u32) -> u32 {
    a.gcd(&b).gcd(&c)
}

/// Lift a class pair `(a, c) mod L` to a reduced cusp.
fn lift_pair(a: u32, c: u32, l: u32) -> Cusp {
    let li = l as i64;
    if c == 0 && (a == 1 || a == l - 1) {
        return Cusp::infinity();
    }
    assert!(!(c == 0 && a == 0), "class (0,0) only exists at level 1");
    let den = if c == 0 { li } else { c as i64 };
    let mut num = a as i64;
    loop {
        if num.gcd(&den) == 1 {
            return Cusp::new(num, den);
        }
        num += li;
    }
}

/// The image of the group in `SL_2(Z/L)`, as explicit matrices.
fn group_image_mod_level(g: &GroupSpec) -> Result<Vec<[u32; 4]>> {
    let l = g.level() as u64;
    let n = g.gamma0 as u64;
    let m = g.gamma1 as u64;
    let iterations = (l / m) * (l / n) * l * (l / m);
    if iterations > 50_000_000 {
        return Err(Error::LevelBound { level: l, bound: LEVEL_BOUND as u64 });
    }
    let mut out = Vec::new();
    let mut a = 1 % m;
    while a < l {
        let mut c = 0;
        while c < l {
            let mut d = 1 % m;
            while d < l {
                // b solves a d - b c = 1 (mod L); collect all solutions
                let lhs = (a * d) % l;
                let mut b = 0;
                while b < l {
                    if (lhs + l - (b * c) % l) % l == 1 % l {
                        out.push([a as u32, b as u32, c as u32, d as u32]);
                    }
                    b += 1;
                }
                d += m;
            }
            c += n;
        }
        a += m;
    }
    Ok(out)
}

/// Complete set of inequivalent cusps with widths.
pub fn cusp_set(g: &GroupSpec) -> Result<Vec<(Cusp, u64)>> {
    Ok(CuspClasses::for_group(g)?.reps().to_vec())
}

/// Are two cusps equivalent under the group?
pub fn cusp_equiv(c1: &Cusp, c2: &Cusp, g: &GroupSpec) -> Result<bool> {
    let classes = CuspClasses::for_group(g)?;
    Ok(classes.classify(c1) == classes.classify(c2))
}

/// `[SL_2(Z) : G]` through the finite quotient: `|SL_2(Z/L)| / |image|`.
pub fn group_index(g: &GroupSpec) -> Result<u64> {
    let l = g.level() as u64;
    if l == 1 {
        return Ok(1);
    }
    let classes = CuspClasses::for_group(g)?;
    Ok(sl2_order(l) / classes.image_size())
}

/// `|SL_2(Z/L)| = L^3 prod_{p | L} (1 - 1/p^2)`.
fn sl2_order(l: u64) -> u64 {
    let mut order = l * l * l;
    let mut rem = l;
    let mut p = 2;
    while p * p <= rem {
        if rem % p == 0 {
            while rem % p == 0 {
                rem /= p;
            }
            order = order / (p * p) * (p * p - 1);
        }
        p += 1;
    }
    if rem > 1 {
        order = order / (rem * rem) * (rem * rem - 1);
    }
    order
}

// ---------------------------------------------------------------------------
// Eta multiplier
// ---------------------------------------------------------------------------

/// Jacobi symbol `(m | n)` for odd positive `n`.
fn jacobi_odd(m: i64, n: i64) -> i64 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut m = m.rem_euclid(n);
    let mut n = n;
    let mut t = 1i64;
    while m != 0 {
        while m % 2 == 0 {
            m /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut m, &mut n);
        if m % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        m = m.rem_euclid(n);
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Jacobi symbol extended to all odd `n`: `(0 | ±1) = 1`, and for negative
/// `n` the sign flips exactly when `m < 0` as well.
pub fn jacobi_extended(m: i64, n: i64) -> i64 {
    debug_assert!(n % 2 != 0);
    let base = jacobi_odd(m, n.abs());
    if m < 0 && n < 0 {
        -base
    } else {
        base
    }
}

/// The eta multiplier `nu(B)` with
/// `eta(B tau) = nu(B) sqrt(gamma tau + delta) eta(tau)`, as an exact 24th
/// root of unity:
///
/// ```text
/// gamma odd:  (delta | |gamma|)   e^{(pi i/12)((a+d)g - b d (g^2-1) - 3g)}
/// delta odd:  (gamma | delta)_ext e^{(pi i/12)((a+d)g - b d (g^2-1) + 3d - 3 - 3gd)}
/// ```
pub fn eta_multiplier(b: &UniMatrix) -> CycNum {
    assert_eq!(b.det(), 1, "eta multiplier needs det 1");
    let (al, be, ga, de) = (b.alpha, b.beta, b.gamma, b.delta);
    let (sign, exponent) = if ga % 2 != 0 {
        (
            jacobi_extended(de, ga.abs()),
            (al + de) * ga - be * de * (ga * ga - 1) - 3 * ga,
        )
    } else {
        (
            jacobi_extended(ga, de),
            (al + de) * ga - be * de * (ga * ga - 1) + 3 * de - 3 - 3 * ga * de,
        )
    };
    // sign * zeta_24^exponent; a negative sign is zeta_24^12
    let e = exponent.rem_euclid(24) + if sign < 0 { 12 } else { 0 };
    CycNum::zeta_pow(24, e)
}
