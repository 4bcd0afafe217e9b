//! Brute-force combinatorial oracle: partitions without repeated odd parts,
//! their M2-ranks, and rank-count tables built by exhaustive enumeration.
//!
//! Nothing in this module knows a generating function.  It exists so that
//! every analytic form downstream can be pinned against a computation that
//! only counts objects.  Enumeration is feasible to `n` around 80; beyond
//! the cap callers are directed to the Eulerian series in `mockforms`.

use crate::cyclotomic::{rat, CycNum};
use crate::error::Error;
use crate::qseries::{frac, QSeries};
use crate::Result;

/// Default enumeration cap; complete enumeration of all partitions without
/// repeated odd parts is cheap up to here and infeasible far beyond.
pub const ENUM_CAP: u64 = 80;

/// A partition with weakly decreasing parts in which every odd value
/// appears at most once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    pub fn new(parts: Vec<u64>) -> Result<Self> {
        let p = Partition { parts };
        if !p.is_valid() {
            return Err(Error::Parse(format!("invalid partition {:?}", p.parts)));
        }
        Ok(p)
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    fn is_valid(&self) -> bool {
        for w in self.parts.windows(2) {
            if w[0] < w[1] {
                return false;
            }
            if w[0] == w[1] && w[0] % 2 == 1 {
                return false;
            }
        }
        self.parts.iter().all(|&p| p > 0)
    }
}

/// M2-rank: ceiling of the largest part divided by 2, minus the number of
/// parts.  The empty partition has rank 0.
pub fn m2_rank(p: &Partition) -> i64 {
    match p.parts.first() {
        None => 0,
        Some(&largest) => (largest as i64 + 1) / 2 - p.parts.len() as i64,
    }
}

/// Walk every partition of `n` without repeated odd parts, in canonical
/// order (largest part first, parts weakly decreasing).  The callback gets
/// the largest part and the number of parts — all any rank statistic needs.
fn walk(n: u64, cap: u64, f: &mut impl FnMut(u64, u64)) -> Result<()> {
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    if n == 0 {
        f(0, 0);
        return Ok(());
    }
    fn rec(remaining: u64, max_part: u64, largest: u64, nparts: u64, f: &mut impl FnMut(u64, u64)) {
        if remaining == 0 {
            f(largest, nparts);
            return;
        }
        let mut p = remaining.min(max_part);
        while p >= 1 {
            // an odd part may not repeat, so the next part is capped at p-1
            let next_cap = if p % 2 == 1 { p - 1 } else { p };
            rec(remaining - p, next_cap, largest, nparts + 1, f);
            p -= 1;
        }
    }
    for first in (1..=n).rev() {
        let next_cap = if first % 2 == 1 { first - 1 } else { first };
        rec(n - first, next_cap, first, 1, f);
    }
    Ok(())
}

/// Complete, duplicate-free enumeration of the partitions of `n` without
/// repeated odd parts, in canonical order.
pub fn enum_podp(n: u64) -> Result<Vec<Partition>> {
    enum_podp_capped(n, ENUM_CAP)
}

pub fn enum_podp_capped(n: u64, cap: u64) -> Result<Vec<Partition>> {
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Partition { parts: vec![] });
        return Ok(out);
    }
    fn rec(remaining: u64, max_part: u64, stack: &mut Vec<u64>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { parts: stack.clone() });
            return;
        }
        let mut p = remaining.min(max_part);
        while p >= 1 {
            let next_cap = if p % 2 == 1 { p - 1 } else { p };
            stack.push(p);
            rec(remaining - p, next_cap, stack, out);
            stack.pop();
            p -= 1;
        }
    }
    let mut stack = Vec::new();
    rec(n, n, &mut stack, &mut out);
    Ok(out)
}

/// `N_2(m, n)`: partitions of `n` without repeated odd parts and M2-rank
/// exactly `m`.
pub fn n2_count(m: i64, n: u64) -> Result<u64> {
    let mut count = 0;
    walk(n, ENUM_CAP, &mut |largest, nparts| {
        let rank = if nparts == 0 { 0 } else { (largest as i64 + 1) / 2 - nparts as i64 };
        if rank == m {
            count += 1;
        }
    })?;
    Ok(count)
}

/// `N_2(k, c, n)`: M2-rank congruent to `k` modulo `c`.
pub fn n2_mod(k: i64, c: u32, n: u64) -> Result<u64> {
    Ok(n2_mod_row(c, n)?[k.rem_euclid(c as i64) as usize])
}

/// All residue counts `N_2(0..c, c, n)` in one enumeration pass.
pub fn n2_mod_row(c: u32, n: u64) -> Result<Vec<u64>> {
    n2_mod_row_capped(c, n, ENUM_CAP)
}

pub fn n2_mod_row_capped(c: u32, n: u64, cap: u64) -> Result<Vec<u64>> {
    let mut row = vec![0u64; c as usize];
    walk(n, cap, &mut |largest, nparts| {
        let rank = if nparts == 0 { 0 } else { (largest as i64 + 1) / 2 - nparts as i64 };
        row[rank.rem_euclid(c as i64) as usize] += 1;
    })?;
    Ok(row)
}

/// Rank-count table for all `n <= nmax`: `table[n][k] = N_2(k, c, n)`.
pub fn n2_mod_table(c: u32, nmax: u64, cap: u64) -> Result<Vec<Vec<u64>>> {
    (0..=nmax).map(|n| n2_mod_row_capped(c, n, cap)).collect()
}

/// The generating function `R2(zeta_c^a; q) = sum N_2(m,n) zeta_c^{am} q^n`
/// assembled purely from enumeration, as a series over Q(zeta_c).
pub fn r2_series_bruteforce(a: i64, c: u32, prec: u64) -> Result<QSeries<CycNum>> {
    if prec > ENUM_CAP + 1 {
        return Err(Error::EnumerationCap { n: prec, cap: ENUM_CAP + 1 });
    }
    let mut s = QSeries::<CycNum>::zero_on(1, 0, prec as i64);
    for n in 0..prec {
        let row = n2_mod_row(c, n)?;
        let mut coef = CycNum::zero().embed(c)?;
        for (k, &count) in row.iter().enumerate() {
            if count > 0 {
                let z = CycNum::zeta_pow(c, a * k as i64).scale(&rat(count as i64));
                coef = coef.add(&z)?;
            }
        }
        s = s.add(&QSeries::monomial(coef, frac(n as i64, 1), frac(prec as i64, 1)));
    }
    Ok(s)
}
