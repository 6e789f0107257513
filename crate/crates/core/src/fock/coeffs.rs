use num_traits::{One, Zero};
use serde::Serialize;

use super::FockError;
use crate::scalar::{factorial, format_rational, int, Rational};

/// `e_j` of the given values: `Σ_{i_1<…<i_j} Π x_{i_r}`.
fn elementary(values: &[Rational], j: usize) -> Rational {
    let mut e = vec![Rational::zero(); j + 1];
    e[0] = Rational::one();
    for x in values {
        for k in (1..=j).rev() {
            let add = e[k - 1].clone() * x;
            e[k] += add;
        }
    }
    e[j].clone()
}

fn reciprocals(b: &Rational, ls: impl Iterator<Item = i64>) -> Result<Vec<Rational>, FockError> {
    ls.map(|l| {
        let x = b.clone() + int(l);
        if x.is_zero() {
            Err(FockError::PoleError { l })
        } else {
            Ok(x.recip())
        }
    })
    .collect()
}

/// `C^{(j)}(m, n) = Π_{l=m}^{m+n}(b+l) / Π_{k=1}^{n}(m+k) · Σ_{m≤l_1<…<l_j≤m+n} Π 1/(b+l_r)`.
/// `j < 0` gives 0 (used by the recursions), as does `j > n + 1`.
pub fn coeff_c(j: i64, m: i64, n: i64, b: &Rational) -> Result<Rational, FockError> {
    if n < 1 {
        return Err(FockError::InvalidRange(format!("coeff_C needs n >= 1, got {n}")));
    }
    if j < 0 || j > n + 1 {
        return Ok(Rational::zero());
    }
    let mut den = Rational::one();
    for k in 1..=n {
        if m + k == 0 {
            return Err(FockError::InvalidRange(format!("coeff_C denominator m + k vanishes at m = {m}, k = {k}")));
        }
        den *= int(m + k);
    }
    let pre: Rational = (m..=m + n).map(|l| b.clone() + int(l)).product();
    let sum = if j == 0 { Rational::one() } else { elementary(&reciprocals(b, m..=m + n)?, j as usize) };
    Ok(pre / den * sum)
}

/// `D^{(j)}(m, n) = [b^α(b^α+1)…(b^α+m) · b_α(b_α+1)…(b_α+n−m−1)] / (m!(n−m−1)!)
/// · Σ_{−m≤l_1<…<l_j≤n−m−1} Π 1/(b_α+l_r)`, with `bHigh = b^α`, `bLow = b_α`.
/// At `m = n` the `b_α` product is empty and `(−1)!` is read as 1.
pub fn coeff_d(j: i64, m: i64, n: i64, b_low: &Rational, b_high: &Rational) -> Result<Rational, FockError> {
    if m < 0 || m > n {
        return Err(FockError::InvalidRange(format!("coeff_D needs 0 <= m <= n, got m = {m}, n = {n}")));
    }
    if j < 0 {
        return Ok(Rational::zero());
    }
    let window = n; // l ∈ [−m, n−m−1]
    if j > window {
        return Ok(Rational::zero());
    }
    let high: Rational = (0..=m).map(|l| b_high.clone() + int(l)).product();
    let low: Rational = (0..n - m).map(|l| b_low.clone() + int(l)).product();
    let den = Rational::from(factorial(m as u32) * factorial((n - m - 1).max(0) as u32));
    let sum = if j == 0 { Rational::one() } else { elementary(&reciprocals(b_low, -m..n - m)?, j as usize) };
    Ok(high * low / den * sum)
}

/// How the class index after one or more `𝒞` steps shifts `b`: `Same` keeps `b`,
/// `Graded` uses `b + k` after `𝒞^k` (𝒞 raises cohomological degree by one).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassShift {
    Same,
    Graded,
}

#[derive(Debug, Clone)]
pub struct CdSampleGrid {
    pub j: Vec<i64>,
    pub m: Vec<i64>,
    pub n: Vec<i64>,
    pub n1: Vec<i64>,
    /// `(bLow, bHigh)` pairs.
    pub b: Vec<(Rational, Rational)>,
    pub shift: ClassShift,
}

impl Default for CdSampleGrid {
    /// `j ∈ 0..3`, `m ∈ 0..4`, `n ∈ 1..=4`, `n₁ ∈ 1..=3`, `b ∈ {1/2, 3/7, 5}` with `bHigh = bLow`.
    fn default() -> Self {
        let b = [(1, 2), (3, 7), (5, 1)].iter().map(|&(p, q)| (Rational::new(p.into(), q.into()), Rational::new(p.into(), q.into()))).collect();
        Self { j: (0..3).collect(), m: (0..4).collect(), n: (1..=4).collect(), n1: (1..=3).collect(), b, shift: ClassShift::Same }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CdRow {
    pub identity: u8,
    pub j: i64,
    pub m: i64,
    pub n: i64,
    pub n1: i64,
    pub b_low: String,
    pub b_high: String,
    pub lhs: String,
    /// Right-hand side for each free `j₁ ∈ 0..=j`.
    pub rhs: Vec<String>,
    pub pass: bool,
    /// `lhs − rhs(j₁)` for each `j₁`, present on failure.
    pub discrepancy: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CdIdentityReport {
    pub shift: ClassShift,
    pub rows: Vec<CdRow>,
    /// Tuples dropped by the precondition filter, with the reason.
    pub excluded: Vec<String>,
}

impl CdIdentityReport {
    pub fn passed(&self, identity: u8) -> usize {
        self.rows.iter().filter(|r| r.identity == identity && r.pass).count()
    }

    pub fn total(&self, identity: u8) -> usize {
        self.rows.iter().filter(|r| r.identity == identity).count()
    }
}

fn shifted(b: &Rational, k: i64, shift: ClassShift) -> Rational {
    match shift {
        ClassShift::Same => b.clone(),
        ClassShift::Graded => b.clone() + int(k),
    }
}

/// First identity: `Σ_{j₁} C^{(j−j₁)}_{α₁}(m₁, n₁) C^{(j₁)}_{β₁}(m₁+n₁−j₁, n)` against
/// `(b+m₁+n₁) C^{(j)}(m₁, n₁+n) + (m₁+n+n₁−j−j₁+1) C^{(j−1)}(m₁, n₁+n)`.
fn identity_one(j: i64, m1: i64, n: i64, n1: i64, b: &Rational, shift: ClassShift) -> Result<(Rational, Vec<Rational>), FockError> {
    let mut lhs = Rational::zero();
    for j1 in 0..=j {
        lhs += coeff_c(j - j1, m1, n1, b)? * coeff_c(j1, m1 + n1 - j1, n, &shifted(b, j - j1, shift))?;
    }
    let a = coeff_c(j, m1, n1 + n, b)?;
    let c = coeff_c(j - 1, m1, n1 + n, b)?;
    let rhs = (0..=j).map(|j1| (b.clone() + int(m1 + n1)) * a.clone() + int(m1 + n + n1 - j - j1 + 1) * c.clone()).collect();
    Ok((lhs, rhs))
}

/// Second identity: `Σ_{j₁} D^{(j−j₁)}_α(m, n) C^{(j₁)}_{α₁}(n−m−j+j₁, n₁)` against
/// `(b_α+n−m−1) D^{(j)}(m, n+n₁) + (n+n₁−m−j) D^{(j−1)}(m, n+n₁)`; the printed `D(k, ·)` is read as `D(m, ·)`.
fn identity_two(
    j: i64,
    m: i64,
    n: i64,
    n1: i64,
    b_low: &Rational,
    b_high: &Rational,
    shift: ClassShift,
) -> Result<(Rational, Vec<Rational>), FockError> {
    let mut lhs = Rational::zero();
    for j1 in 0..=j {
        lhs += coeff_d(j - j1, m, n, b_low, b_high)? * coeff_c(j1, n - m - j + j1, n1, &shifted(b_low, j - j1, shift))?;
    }
    let a = coeff_d(j, m, n + n1, b_low, b_high)?;
    let c = coeff_d(j - 1, m, n + n1, b_low, b_high)?;
    let value = (b_low.clone() + int(n - m - 1)) * a + int(n + n1 - m - j) * c;
    Ok((lhs, vec![value; (j + 1) as usize]))
}

/// Evaluates both identities exactly on every grid tuple. Tuples hitting a pole or an
/// out-of-range index are excluded and logged. The report is the result; nothing is asserted.
pub fn cd_identity_check(grid: &CdSampleGrid) -> CdIdentityReport {
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (bl, bh) in &grid.b {
        for &j in &grid.j {
            for &m in &grid.m {
                for &n in &grid.n {
                    for &n1 in &grid.n1 {
                        let evals = [
                            (1u8, identity_one(j, m, n, n1, bl, grid.shift)),
                            (2u8, identity_two(j, m, n, n1, bl, bh, grid.shift)),
                        ];
                        for (id, res) in evals {
                            let tag = format!(
                                "identity {id} at (j, m, n, n1) = ({j}, {m}, {n}, {n1}), b = ({}, {})",
                                format_rational(bl),
                                format_rational(bh)
                            );
                            match res {
                                Err(e) => excluded.push(format!("{tag}: {e}")),
                                Ok((lhs, rhs)) => {
                                    let diffs: Vec<Rational> = rhs.iter().map(|r| lhs.clone() - r).collect();
                                    let pass = diffs.iter().all(|d| d.is_zero());
                                    rows.push(CdRow {
                                        identity: id,
                                        j,
                                        m,
                                        n,
                                        n1,
                                        b_low: format_rational(bl),
                                        b_high: format_rational(bh),
                                        lhs: format_rational(&lhs),
                                        rhs: rhs.iter().map(format_rational).collect(),
                                        pass,
                                        discrepancy: if pass { vec![] } else { diffs.iter().map(format_rational).collect() },
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    CdIdentityReport { shift: grid.shift, rows, excluded }
}
