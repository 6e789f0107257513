//! Schur polynomials in the power-sum times `x_1, x_2, ..` and the KP hierarchy.

use std::sync::Arc;

use thiserror::Error;

use crate::scalar::{binomial, rat, Coefficient, Rational};
use crate::series::{Monomial, SeriesLayout, TruncatedSeries, UNBOUNDED};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum KpError {
    #[error("invalid partition {0:?}: parts must be positive and weakly decreasing")]
    InvalidPartition(Vec<u32>),
    #[error("tau vanishes identically on the chosen slice")]
    DegenerateSlice,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self, KpError> {
        if parts.iter().any(|&p| p == 0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(KpError::InvalidPartition(parts));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn size(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Every partition of `n`, parts in non-increasing order, listed reverse-lexicographically.
    pub fn all_of(n: u32) -> Vec<Partition> {
        fn rec(left: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if left == 0 {
                out.push(Partition { parts: cur.clone() });
                return;
            }
            for p in (1..=left.min(max)).rev() {
                cur.push(p);
                rec(left - p, p, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, n, &mut Vec::new(), &mut out);
        out
    }

    pub fn conjugate(&self) -> Partition {
        let max = self.parts.first().copied().unwrap_or(0);
        Partition { parts: (1..=max).map(|k| self.parts.iter().filter(|&&p| p >= k).count() as u32).collect() }
    }
}

impl std::str::FromStr for Partition {
    type Err = KpError;
    fn from_str(s: &str) -> Result<Self, KpError> {
        let parts: Result<Vec<u32>, _> = s.split(',').filter(|t| !t.trim().is_empty()).map(|t| t.trim().parse()).collect();
        Partition::new(parts.map_err(|_| KpError::InvalidPartition(Vec::new()))?)
    }
}

/// Polynomial layout `x_1..x_K` with `weight(x_j) = j` and no truncation.
pub fn poly_layout(k: usize) -> Arc<SeriesLayout> {
    Arc::new(SeriesLayout::fock(k, UNBOUNDED))
}

/// `S_k` from `Σ S_k z^k = exp(Σ x_j z^j)`, via `k·S_k = Σ_j j·x_j·S_{k−j}`.
pub fn elementary_schur<C: Coefficient>(k: i64, layout: &Arc<SeriesLayout>) -> TruncatedSeries<C> {
    elementary_schur_table(k.max(0) as usize, layout).pop().filter(|_| k >= 0).unwrap_or_else(|| TruncatedSeries::zero(layout))
}

/// `[S_0, S_1, .., S_k]`.
pub fn elementary_schur_table<C: Coefficient>(k: usize, layout: &Arc<SeriesLayout>) -> Vec<TruncatedSeries<C>> {
    let mut s = vec![TruncatedSeries::one(layout)];
    for m in 1..=k {
        let mut acc = TruncatedSeries::zero(layout);
        for j in 1..=m.min(layout.len()) {
            let xj = TruncatedSeries::variable(layout, j - 1).scale(&C::from_i64(j as i64));
            acc = &acc + &(&xj * &s[m - j]);
        }
        s.push(acc.scale(&(C::one() / C::from_i64(m as i64))));
    }
    s
}

/// Jacobi–Trudi determinant `det(S_{p_i − i + j})`.
pub fn schur_lambda<C: Coefficient>(p: &Partition, layout: &Arc<SeriesLayout>) -> TruncatedSeries<C> {
    let l = p.len();
    if l == 0 {
        return TruncatedSeries::one(layout);
    }
    let top = p.parts[0] as usize + l;
    let table = elementary_schur_table::<C>(top, layout);
    let entry = |i: usize, j: usize| -> Option<&TruncatedSeries<C>> {
        let idx = p.parts[i] as i64 - i as i64 + j as i64;
        (idx >= 0).then(|| &table[idx as usize])
    };
    polynomial_det(l, &entry, layout)
}

/// Cofactor expansion along the first row; sizes here stay tiny.
fn polynomial_det<'a, C: Coefficient>(
    n: usize,
    entry: &dyn Fn(usize, usize) -> Option<&'a TruncatedSeries<C>>,
    layout: &Arc<SeriesLayout>,
) -> TruncatedSeries<C> {
    fn rec<'a, C: Coefficient>(
        row: usize,
        cols: &mut Vec<usize>,
        entry: &dyn Fn(usize, usize) -> Option<&'a TruncatedSeries<C>>,
        layout: &Arc<SeriesLayout>,
    ) -> TruncatedSeries<C> {
        if cols.is_empty() {
            return TruncatedSeries::one(layout);
        }
        let mut acc = TruncatedSeries::zero(layout);
        for k in 0..cols.len() {
            let c = cols[k];
            let Some(e) = entry(row, c) else { continue };
            if e.is_zero() {
                continue;
            }
            cols.remove(k);
            let minor = rec(row + 1, cols, entry, layout);
            cols.insert(k, c);
            let term = e * &minor;
            acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }
    rec(0, &mut (0..n).collect(), entry, layout)
}

/// Multi-exponent `a = (a_1, a_2, ..)` of `D_1^{a_1} D_2^{a_2} ⋯`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HirotaOperator {
    pub exponents: Vec<u32>,
}

impl HirotaOperator {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self { exponents }
    }

    pub fn order(&self) -> u32 {
        self.exponents.iter().sum()
    }
}

fn mixed_derivative<C: Coefficient>(f: &TruncatedSeries<C>, b: &[u32]) -> TruncatedSeries<C> {
    let mut out = f.clone();
    for (i, &k) in b.iter().enumerate() {
        if k > 0 {
            if i >= out.layout().len() {
                return TruncatedSeries::zero(f.layout());
            }
            out = out.derivative(i, k).expect("variable exists");
        }
    }
    out
}

/// `D^a f·g = Σ_{b ≤ a} Π_i C(a_i, b_i)(−1)^{a_i − b_i} ∂^b f · ∂^{a−b} g`.
pub fn hirota_apply<C: Coefficient>(a: &HirotaOperator, f: &TruncatedSeries<C>, g: &TruncatedSeries<C>) -> TruncatedSeries<C> {
    let mut splits: Vec<Vec<u32>> = vec![Vec::new()];
    for &ai in &a.exponents {
        splits = splits
            .into_iter()
            .flat_map(|p| {
                (0..=ai).map(move |bi| {
                    let mut q = p.clone();
                    q.push(bi);
                    q
                })
            })
            .collect();
    }
    let mut acc = TruncatedSeries::zero(f.layout());
    for b in splits {
        let rest: Monomial = a.exponents.iter().zip(&b).map(|(x, y)| x - y).collect();
        let mut coeff = C::one();
        let mut negative = false;
        for (&ai, &bi) in a.exponents.iter().zip(&b) {
            coeff = coeff * C::from_rational(&Rational::from_integer(binomial(ai, bi)));
            negative ^= (ai - bi) % 2 == 1;
        }
        if negative {
            coeff = -coeff;
        }
        let term = &mixed_derivative(f, &b) * &mixed_derivative(g, &rest);
        acc = &acc + &term.scale(&coeff);
    }
    acc
}

/// `(D_1⁴ + 3D_2² − 4D_1D_3) τ·τ`.
pub fn kp_hirota_residual<C: Coefficient>(tau: &TruncatedSeries<C>) -> TruncatedSeries<C> {
    let d14 = hirota_apply(&HirotaOperator::new(vec![4]), tau, tau);
    let d22 = hirota_apply(&HirotaOperator::new(vec![0, 2]), tau, tau);
    let d13 = hirota_apply(&HirotaOperator::new(vec![1, 0, 1]), tau, tau);
    &(&d14 + &d22.scale(&C::from_i64(3))) - &d13.scale(&C::from_i64(4))
}

/// `num / τ^pow`.
#[derive(Debug, Clone)]
struct TauFraction<'t, C: Coefficient> {
    num: TruncatedSeries<C>,
    pow: u32,
    tau: &'t TruncatedSeries<C>,
}

impl<'t, C: Coefficient> TauFraction<'t, C> {
    fn d(&self, var: usize) -> Self {
        let nv = self.num.derivative(var, 1).expect("variable exists");
        let tv = self.tau.derivative(var, 1).expect("variable exists");
        let num = &(&nv * self.tau) - &(&self.num * &tv).scale(&C::from_i64(self.pow as i64));
        Self { num, pow: self.pow + 1, tau: self.tau }
    }

    fn raised(&self, pow: u32) -> TruncatedSeries<C> {
        let mut n = self.num.clone();
        for _ in self.pow..pow {
            n = &n * self.tau;
        }
        n
    }

    fn add(&self, other: &Self) -> Self {
        let pow = self.pow.max(other.pow);
        Self { num: &self.raised(pow) + &other.raised(pow), pow, tau: self.tau }
    }

    fn mul(&self, other: &Self) -> Self {
        Self { num: &self.num * &other.num, pow: self.pow + other.pow, tau: self.tau }
    }

    fn scale(&self, c: &C) -> Self {
        Self { num: self.num.scale(c), pow: self.pow, tau: self.tau }
    }
}

#[derive(Debug, Clone)]
pub struct KpPdeResult<C: Coefficient> {
    /// Numerator `N` of the residual `N / τ^denominator_power` on the `(x, y, t)` slice.
    pub numerator: TruncatedSeries<C>,
    pub denominator_power: u32,
}

impl<C: Coefficient> KpPdeResult<C> {
    pub fn vanishes(&self) -> bool {
        self.numerator.is_zero()
    }
}

/// Restricts a polynomial in `x_1..x_K` to `(x, y, t) = (x_1, x_2, x_3)` by substituting
/// `eval[j]` for `x_{4+j}` (zero beyond the given values).
pub fn restrict_to_slice<C: Coefficient>(p: &TruncatedSeries<C>, eval: &[C]) -> TruncatedSeries<C> {
    let slice = poly_layout(3);
    let mut out = TruncatedSeries::zero(&slice);
    for (e, c) in p.terms() {
        let mut v = c.clone();
        for (j, &k) in e.iter().enumerate().skip(3) {
            if k == 0 {
                continue;
            }
            let x = eval.get(j - 3).cloned().unwrap_or_else(C::zero);
            for _ in 0..k {
                v = v * x.clone();
            }
        }
        let mut head: Monomial = e.iter().take(3).copied().collect();
        head.resize(3, 0);
        out.add_term(head, v);
    }
    out
}

/// With `u = 2∂_x² log τ`, the numerator of `(3/4)u_yy − ∂_x(u_t − (3/2)u·u_x − (1/4)u_xxx)`.
pub fn kp_pde_residual<C: Coefficient>(tau: &TruncatedSeries<C>, eval: &[C]) -> Result<KpPdeResult<C>, KpError> {
    let t = restrict_to_slice(tau, eval);
    if t.is_zero() {
        return Err(KpError::DegenerateSlice);
    }
    let (x, y, tt) = (0, 1, 2);
    let tau_x = t.derivative(x, 1).unwrap();
    let tau_xx = t.derivative(x, 2).unwrap();
    let u = TauFraction {
        num: (&(&t * &tau_xx) - &(&tau_x * &tau_x)).scale(&C::from_i64(2)),
        pow: 2,
        tau: &t,
    };
    let u_x = u.d(x);
    let u_yy = u.d(y).d(y);
    let u_t = u.d(tt);
    let u_xxx = u_x.d(x).d(x);
    let c = |q: Rational| C::from_rational(&q);
    let inner = u_t.add(&u.mul(&u_x).scale(&c(rat(-3, 2)))).add(&u_xxx.scale(&c(rat(-1, 4))));
    let res = u_yy.scale(&c(rat(3, 4))).add(&inner.d(x).scale(&-C::one()));
    Ok(KpPdeResult { numerator: res.num, denominator_power: res.pow })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    type P = TruncatedSeries<Rational>;

    #[test]
    fn partitions() {
        assert_eq!(Partition::all_of(4).len(), 5);
        assert_eq!(Partition::all_of(5).len(), 7);
        assert!(Partition::new(vec![1, 2]).is_err());
        assert_eq!("2,1".parse::<Partition>().unwrap().parts(), &[2, 1]);
        assert_eq!(Partition::new(vec![3, 1]).unwrap().conjugate().parts(), &[2, 1, 1]);
    }

    #[test]
    fn small_schur() {
        let l = poly_layout(4);
        let x = |i| P::variable(&l, i);
        assert_eq!(elementary_schur::<Rational>(0, &l), P::one(&l));
        assert_eq!(elementary_schur::<Rational>(1, &l), x(0));
        assert!(elementary_schur::<Rational>(-1, &l).is_zero());
        let s11 = schur_lambda::<Rational>(&Partition::new(vec![1, 1]).unwrap(), &l);
        assert_eq!(s11, &(&x(0) * &x(0)).scale(&rat(1, 2)) - &x(1));
    }

    #[test]
    fn hirota_small_cases() {
        let l = poly_layout(3);
        let x1 = P::variable(&l, 0);
        assert!(hirota_apply(&HirotaOperator::new(vec![1]), &x1, &x1).is_zero());
        // (x+u)(x−u) = x² − u², so two u-derivatives give −2
        assert_eq!(hirota_apply(&HirotaOperator::new(vec![2]), &x1, &x1), P::constant(&l, int(-2)));
        assert!(kp_hirota_residual(&P::one(&l)).is_zero());
    }

    #[test]
    fn kp_pde_hand_cases() {
        let l = poly_layout(3);
        let x1 = P::variable(&l, 0);
        assert!(kp_pde_residual(&x1, &[]).unwrap().vanishes());
        assert!(kp_pde_residual(&P::one(&l), &[]).unwrap().vanishes());
        assert!(!kp_pde_residual(&(&x1 * &x1), &[]).unwrap().vanishes());
        assert!(matches!(kp_pde_residual(&P::zero(&l), &[]), Err(KpError::DegenerateSlice)));
    }
}
