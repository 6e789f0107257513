//! Free energy from an intersection table, and the KdV and string residuals.
//!
//! `F = Σ_g Σ ⟨τ_0^{k_0} τ_1^{k_1} ⋯⟩_g Π t_i^{k_i}/k_i!`. A monomial with
//! `n = Σ k_i` insertions and ψ-degree `D = Σ i·k_i` can only receive genus
//! `g = (D − n + 3)/3`; when that is not a stable non-negative integer the
//! coefficient is structurally zero and counts as known.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::ribbon::IntersectionTable;
use crate::scalar::{factorial, format_gaussian, rat, Coefficient, GaussianRational, Rational};
use crate::series::{monomials_up_to, Monomial, SeriesLayout};
use crate::Series;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageGap {
    pub genus: u32,
    pub n: u32,
    pub tuple: Vec<u32>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum KdvError {
    #[error("table does not cover {} correlators needed within the cap", .0.len())]
    CoverageGap(Vec<CoverageGap>),
}

/// Where the coefficient of a monomial of `F` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    /// No stable genus fits the degree count.
    StructuralZero,
    /// Determined by a complete table fragment of this genus.
    Covered(u32),
    /// The genus is excluded from the assembled range.
    GenusExcluded(u32),
    /// The fragment `(g, n)` is missing from the table.
    Missing(u32, u32),
    /// Above the truncation cap: not stored at all.
    BeyondCap,
}

impl Coverage {
    pub fn is_known(self) -> bool {
        matches!(self, Coverage::StructuralZero | Coverage::Covered(_))
    }
}

/// The genus a monomial can receive, if any.
pub fn monomial_genus(exps: &[u32]) -> Option<u32> {
    let n: i64 = exps.iter().map(|&k| k as i64).sum();
    let d: i64 = exps.iter().enumerate().map(|(i, &k)| i as i64 * k as i64).sum();
    let num = d - n + 3;
    if num < 0 || num % 3 != 0 {
        return None;
    }
    let g = num / 3;
    (2 * g - 2 + n > 0).then_some(g as u32)
}

/// The exponent tuple `(d_1, .., d_n)` of the correlator behind a monomial.
pub fn monomial_tuple(exps: &[u32]) -> Vec<u32> {
    let mut t: Vec<u32> = exps
        .iter()
        .enumerate()
        .flat_map(|(i, &k)| std::iter::repeat_n(i as u32, k as usize))
        .collect();
    t.sort_unstable_by(|a, b| b.cmp(a));
    t
}

#[derive(Debug, Clone)]
pub struct FreeEnergy {
    pub series: Series,
    pub genus_range: Vec<u32>,
    /// Table fragments `(g, n)` that fed the series.
    pub provenance: BTreeSet<(u32, u32)>,
    /// Source correlator of every nonzero coefficient.
    pub routing: BTreeMap<Monomial, (u32, Vec<u32>)>,
    pub gaps: Vec<CoverageGap>,
}

impl FreeEnergy {
    pub fn layout(&self) -> &Arc<SeriesLayout> {
        self.series.layout()
    }

    pub fn coverage(&self, exps: &[u32]) -> Coverage {
        if self.layout().degree(exps) > self.layout().cap() as u64 {
            return Coverage::BeyondCap;
        }
        let Some(g) = monomial_genus(exps) else {
            return Coverage::StructuralZero;
        };
        let n: u32 = exps.iter().sum();
        if !self.genus_range.contains(&g) {
            Coverage::GenusExcluded(g)
        } else if self.provenance.contains(&(g, n)) {
            Coverage::Covered(g)
        } else {
            Coverage::Missing(g, n)
        }
    }

    /// An exact copy of the zero free energy over the same layout with full coverage.
    pub fn zero(layout: &Arc<SeriesLayout>) -> Self {
        Self {
            series: Series::zero(layout),
            genus_range: Vec::new(),
            provenance: BTreeSet::new(),
            routing: BTreeMap::new(),
            gaps: Vec::new(),
        }
    }
}

/// Assembles `F` over `t_0..t_{times-1}` truncated at total degree `cap`. Missing
/// fragments are reported in `gaps` rather than raised.
pub fn assemble_free_energy(table: &IntersectionTable, max_genus: u32, times: usize, cap: u32) -> FreeEnergy {
    let layout = Arc::new(SeriesLayout::kdv_times(times, cap));
    let mut series = Series::zero(&layout);
    let mut provenance = BTreeSet::new();
    let mut routing = BTreeMap::new();
    let mut gaps = Vec::new();
    for exps in monomials_up_to(&layout, cap as u64) {
        let Some(g) = monomial_genus(&exps) else { continue };
        if g > max_genus {
            continue;
        }
        let n: u32 = exps.iter().sum();
        let tuple = monomial_tuple(&exps);
        if !table.has_fragment(g, n) {
            gaps.push(CoverageGap { genus: g, n, tuple });
            continue;
        }
        provenance.insert((g, n));
        let value = table.value(g, &tuple).expect("fragment is complete");
        if value.is_zero() {
            continue;
        }
        let denom = exps.iter().fold(num_bigint::BigInt::from(1), |acc, &k| acc * factorial(k));
        let c = value / Rational::from_integer(denom);
        series.add_term(exps.clone(), GaussianRational::from_rational(&c));
        routing.insert(exps, (g, tuple));
    }
    FreeEnergy { series, genus_range: (0..=max_genus).collect(), provenance, routing, gaps }
}

/// As [`assemble_free_energy`], failing on any coverage gap.
pub fn assemble_free_energy_strict(
    table: &IntersectionTable,
    max_genus: u32,
    times: usize,
    cap: u32,
) -> Result<FreeEnergy, KdvError> {
    let f = assemble_free_energy(table, max_genus, times, cap);
    if f.gaps.is_empty() {
        Ok(f)
    } else {
        Err(KdvError::CoverageGap(f.gaps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientStatus {
    VerifiedZero,
    Uncovered,
    Nonzero,
}

#[derive(Debug, Clone)]
pub struct ResidualEntry {
    pub monomial: Monomial,
    pub status: CoefficientStatus,
    pub value: GaussianRational,
    /// Monomials of `F` whose coefficients enter this coefficient.
    pub contributors: Vec<Monomial>,
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub kind: &'static str,
    pub series: Series,
    /// Every monomial up to the reliable degree, in lexicographic order.
    pub entries: Vec<ResidualEntry>,
}

impl ResidualReport {
    pub fn count(&self, status: CoefficientStatus) -> usize {
        self.entries.iter().filter(|e| e.status == status).count()
    }

    /// No covered coefficient is nonzero.
    pub fn passes(&self) -> bool {
        self.count(CoefficientStatus::Nonzero) == 0
    }

    pub fn entry(&self, exps: &[u32]) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.monomial == exps)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|e| {
                serde_json::json!({
                    "monomial": e.monomial,
                    "status": e.status,
                    "value": format_gaussian(&e.value),
                })
            })
            .collect();
        serde_json::json!({
            "residual": self.kind,
            "verified_zero": self.count(CoefficientStatus::VerifiedZero),
            "uncovered": self.count(CoefficientStatus::Uncovered),
            "nonzero": self.count(CoefficientStatus::Nonzero),
            "entries": entries,
        })
    }
}

fn with_delta(m: &[u32], delta: &[(usize, i64)]) -> Option<Monomial> {
    let mut out = m.to_vec();
    for &(i, d) in delta {
        let v = out[i] as i64 + d;
        if v < 0 {
            return None;
        }
        out[i] = v as u32;
    }
    Some(out)
}

fn classify(f: &FreeEnergy, kind: &'static str, series: Series, reliable: i64, contributors: impl Fn(&[u32]) -> Vec<Monomial>) -> ResidualReport {
    let layout = f.layout().clone();
    let mut entries = Vec::new();
    if reliable >= 0 {
        for m in monomials_up_to(&layout, reliable as u64) {
            let contributors = contributors(&m);
            let known = contributors.iter().all(|c| f.coverage(c).is_known());
            let value = series.coeff(&m);
            let status = if !known {
                CoefficientStatus::Uncovered
            } else if value.is_zero() {
                CoefficientStatus::VerifiedZero
            } else {
                CoefficientStatus::Nonzero
            };
            entries.push(ResidualEntry { monomial: m, status, value, contributors });
        }
    }
    ResidualReport { kind, series, entries }
}

/// `R = U_{t_1} − U·U_{t_0} − (1/12)·U_{t_0 t_0 t_0}` with `U = F_{t_0 t_0}`.
/// Coefficients are reliable up to degree `cap − 5`.
pub fn kdv_residual(f: &FreeEnergy) -> ResidualReport {
    let s = &f.series;
    let times = f.layout().len();
    let cap = f.layout().cap() as i64;
    assert!(times >= 2, "the KdV residual needs t_0 and t_1");
    let u = s.derivative(0, 2).expect("t_0 exists");
    let u1 = u.derivative(1, 1).expect("t_1 exists");
    let u0 = u.derivative(0, 1).expect("t_0 exists");
    let u000 = u.derivative(0, 3).expect("t_0 exists");
    let twelfth = GaussianRational::from_rational(&rat(1, 12));
    let r = &(&u1 - &(&u * &u0)) - &u000.scale(&twelfth);
    let r = r.truncate((cap - 5).max(0) as u32);
    classify(f, "kdv", r, cap - 5, |m| {
        let mut out = Vec::new();
        out.extend(with_delta(m, &[(0, 2), (1, 1)]));
        out.extend(with_delta(m, &[(0, 5)]));
        // U·U_{t_0}: split m = m1·m2, factors m1·t_0² and m2·t_0³
        for m1 in sub_monomials(m) {
            let m2: Monomial = m.iter().zip(&m1).map(|(a, b)| a - b).collect();
            out.extend(with_delta(&m1, &[(0, 2)]));
            out.extend(with_delta(&m2, &[(0, 3)]));
        }
        out.sort();
        out.dedup();
        out
    })
}

fn sub_monomials(m: &[u32]) -> Vec<Monomial> {
    let mut out = vec![Vec::new()];
    for &k in m {
        out = out
            .into_iter()
            .flat_map(|prefix: Monomial| {
                (0..=k).map(move |j| {
                    let mut p = prefix.clone();
                    p.push(j);
                    p
                })
            })
            .collect();
    }
    out
}

/// `S = F_{t_0} − t_0²/2 − Σ_i t_{i+1}·F_{t_i}`. Coefficients are reliable up to degree `cap − 1`.
pub fn string_residual(f: &FreeEnergy) -> ResidualReport {
    let s = &f.series;
    let layout = f.layout().clone();
    let times = layout.len();
    let cap = layout.cap() as i64;
    let mut r = s.derivative(0, 1).expect("t_0 exists");
    let mut t0sq = vec![0; times];
    t0sq[0] = 2;
    r = &r - &Series::monomial(&layout, t0sq, GaussianRational::from_rational(&rat(1, 2)));
    for i in 0..times.saturating_sub(1) {
        let fi = s.derivative(i, 1).expect("variable exists");
        r = &r - &(&Series::variable(&layout, i + 1) * &fi);
    }
    let r = r.truncate((cap - 1).max(0) as u32);
    classify(f, "string", r, cap - 1, |m| {
        let mut out = Vec::new();
        out.extend(with_delta(m, &[(0, 1)]));
        for i in 0..times.saturating_sub(1) {
            out.extend(with_delta(m, &[(i + 1, -1), (i, 1)]));
        }
        out.sort();
        out.dedup();
        out
    })
}

/// Checks that every in-range table entry feeds exactly one monomial of `F`.
pub fn provenance_audit(f: &FreeEnergy, table: &IntersectionTable) -> Result<(), String> {
    let times = f.layout().len();
    let cap = f.layout().cap() as u64;
    for ((g, tuple), v) in table.entries() {
        if !f.genus_range.contains(g) || v.is_zero() {
            continue;
        }
        if tuple.iter().any(|&d| d as usize >= times) {
            continue;
        }
        let mut exps = vec![0u32; times];
        for &d in tuple {
            exps[d as usize] += 1;
        }
        if f.layout().degree(&exps) > cap {
            continue;
        }
        let routes = f.routing.iter().filter(|(_, src)| src.0 == *g && src.1 == *tuple).count();
        if routes != 1 {
            return Err(format!("entry ({g}, {tuple:?}) routed to {routes} monomials"));
        }
        if f.routing.get(&exps).map(|s| &s.1) != Some(tuple) {
            return Err(format!("entry ({g}, {tuple:?}) routed to the wrong monomial"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ribbon::IntersectionTable;
    use crate::scalar::int;

    #[test]
    fn genus_of_monomials() {
        assert_eq!(monomial_genus(&[3, 0]), Some(0));
        assert_eq!(monomial_genus(&[0, 1]), Some(1));
        assert_eq!(monomial_genus(&[2, 0]), None);
        assert_eq!(monomial_genus(&[1, 0, 1]), Some(1));
        assert_eq!(monomial_genus(&[0, 0]), None);
        assert_eq!(monomial_tuple(&[1, 0, 1]), vec![2, 0]);
    }

    #[test]
    fn zero_free_energy_residuals() {
        let layout = Arc::new(SeriesLayout::kdv_times(3, 6));
        let f = FreeEnergy::zero(&layout);
        assert!(kdv_residual(&f).series.is_zero());
        let s = string_residual(&f).series;
        assert_eq!(s.len(), 1);
        assert_eq!(s.coeff(&[2, 0, 0]), GaussianRational::from_rational(&rat(-1, 2)));
    }

    #[test]
    fn empty_table_reports_every_gap() {
        let f = assemble_free_energy(&IntersectionTable::new(), 1, 3, 4);
        assert!(f.series.is_zero());
        assert!(f.gaps.iter().any(|g| g.genus == 0 && g.n == 3));
        assert!(f.gaps.iter().any(|g| g.genus == 1 && g.n == 1));
        assert!(matches!(
            assemble_free_energy_strict(&IntersectionTable::new(), 1, 3, 4),
            Err(KdvError::CoverageGap(_))
        ));
    }

    #[test]
    fn assembled_coefficients() {
        let mut t = IntersectionTable::new();
        t.insert(0, &[0, 0, 0], int(1));
        t.mark_fragment(0, 3);
        t.insert(1, &[1], rat(1, 24));
        t.mark_fragment(1, 1);
        let f = assemble_free_energy(&t, 1, 2, 3);
        let g = |q: Rational| GaussianRational::from_rational(&q);
        assert_eq!(f.series.coeff(&[3, 0]), g(rat(1, 6)));
        assert_eq!(f.series.coeff(&[0, 1]), g(rat(1, 24)));
        provenance_audit(&f, &t).unwrap();
    }
}
