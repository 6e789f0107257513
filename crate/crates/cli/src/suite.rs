//! The acceptance criteria as one runnable suite. Reports contain no timings, so
//! identical configurations produce byte-identical output.

use std::collections::BTreeMap;

use clap::ValueEnum;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use tauwork::fock::{
    cd_identity_check, coeff_c, coeff_d, oscillator_commutator_check, target_commutator_report, CdSampleGrid,
    CohomologyData, OscillatorParams,
};
use tauwork::kdv::{assemble_free_energy, kdv_residual, string_residual, CoefficientStatus};
use tauwork::kp::{kp_hirota_residual, kp_pde_residual, poly_layout, schur_lambda, Partition};
use tauwork::matrix_models::{
    gaussian_normalization_check, genus_expansion, hciz_check, kontsevich_match, wick_moment, GaussianSpec, Moment,
    TraceWord,
};
use tauwork::ribbon::{extract_intersection_numbers, ExtractOptions, IntersectionTable};
use tauwork::scalar::{format_rational, int, rat};
use tauwork::series::TruncatedSeries;
use tauwork::torsion::{
    random_direct_sum_ses, random_integer_complex, torsion, torsion_order_check, BasedChainComplex,
};
use tauwork::{ExactMatrix, Rational};

use crate::{kp_slice_values, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub level: Level,
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn failed(&self) -> Vec<u32> {
        self.criteria.iter().filter(|c| !c.pass).map(|c| c.id).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "level": self.level,
            "seed": self.seed,
            "criteria": self.criteria,
            "passed": self.criteria.len() - self.failed().len(),
            "failed": self.failed(),
        })
    }
}

pub const CRITERIA: [(u32, &str); 13] = [
    (1, "intersection base cases"),
    (2, "twelve-dart extraction"),
    (3, "kdv residual and mutation"),
    (4, "string residual"),
    (5, "schur functions solve kp"),
    (6, "oscillator virasoro closure"),
    (7, "coefficient machinery"),
    (8, "matrix moments"),
    (9, "kontsevich match"),
    (10, "gaussian normalization"),
    (11, "rank-two unitary integral"),
    (12, "torsion"),
    (13, "determinism"),
];

/// Shared state: extracted fragments are reused across criteria.
pub struct Workbench {
    pub level: Level,
    pub cfg: RunConfig,
    fragments: BTreeMap<(u32, u32), Result<(IntersectionTable, bool, Option<Rational>), String>>,
}

impl Workbench {
    pub fn new(level: Level, cfg: &RunConfig) -> Self {
        Self { level, cfg: cfg.clone(), fragments: BTreeMap::new() }
    }

    /// Table, zero-residual flag and normalization ratio of one extracted fragment.
    fn fragment(&mut self, g: u32, n: u32) -> Result<(IntersectionTable, bool, Option<Rational>), String> {
        let opts = ExtractOptions { max_darts: self.cfg.max_darts, ..ExtractOptions::default() };
        let perturbation = self.cfg.perturbation.clone();
        self.fragments
            .entry((g, n))
            .or_insert_with(|| {
                let r = extract_intersection_numbers(g, n, &opts).map_err(|e| e.to_string())?;
                let mut t = r.table;
                if let Some(p) = perturbation.filter(|p| p.genus == g && p.tuple.len() == n as usize) {
                    p.apply(&mut t);
                }
                Ok((t, r.residual_zero, r.normalization_ratio))
            })
            .clone()
    }

    fn table(&mut self, fragments: &[(u32, u32)]) -> Result<IntersectionTable, String> {
        let mut t = IntersectionTable::new();
        for &(g, n) in fragments {
            t.merge(&self.fragment(g, n)?.0);
        }
        Ok(t)
    }

    pub fn run(&mut self, id: u32) -> CriterionResult {
        let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).expect("criterion id in 1..=13");
        let outcome = match id {
            1 => self.base_cases(),
            2 => self.twelve_darts(),
            3 => self.kdv(),
            4 => self.string(),
            5 => schur_kp(),
            6 => self.oscillator(),
            7 => coefficients(),
            8 => moments(),
            9 => self.kontsevich(),
            10 => normalization(),
            11 => self.hciz(),
            12 => self.torsion(),
            13 => self.determinism(),
            _ => unreachable!(),
        };
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, json!({ "error": e })));
        CriterionResult { id, name, pass, detail }
    }

    fn base_cases(&mut self) -> Result<(bool, Value), String> {
        let (t0, r0, n0) = self.fragment(0, 3)?;
        let (t1, r1, n1) = self.fragment(1, 1)?;
        let a = t0.value(0, &[0, 0, 0]).unwrap_or_default();
        let b = t1.value(1, &[1]).unwrap_or_default();
        let pass = a == int(1) && b == rat(1, 24) && r0 && r1 && n0 == Some(int(1)) && n1 == Some(int(1));
        Ok((
            pass,
            json!({
                "tau0_cubed": format_rational(&a),
                "tau1_genus1": format_rational(&b),
                "normalization_ratios": [n0.map(|q| format_rational(&q)), n1.map(|q| format_rational(&q))],
            }),
        ))
    }

    fn twelve_darts(&mut self) -> Result<(bool, Value), String> {
        let (_, r04, _) = self.fragment(0, 4)?;
        let (_, r12, _) = self.fragment(1, 2)?;
        let t = self.table(&[(0, 3), (0, 4), (1, 1), (1, 2)])?;
        let v = |g: u32, d: &[u32]| t.value(g, d).unwrap_or_default();
        let string_g0 = v(0, &[1, 0, 0, 0]) == v(0, &[0, 0, 0]);
        let string_g1 = v(1, &[2, 0]) == v(1, &[1]);
        let f = assemble_free_energy(&t, 1, 3, self.cfg.kdv_cap);
        let s = string_residual(&f);
        // t_0^2 t_1 carries ⟨τ_0³τ_1⟩ − ⟨τ_0³⟩, t_2 carries ⟨τ_0τ_2⟩_1 − ⟨τ_1⟩_1
        let covered = |m: &[u32]| s.entry(m).map(|e| e.status);
        let c0 = covered(&[2, 1, 0]);
        let c1 = covered(&[0, 0, 1]);
        let pass = r04
            && r12
            && string_g0
            && string_g1
            && c0 == Some(CoefficientStatus::VerifiedZero)
            && c1 == Some(CoefficientStatus::VerifiedZero);
        Ok((
            pass,
            json!({
                "residual_zero": { "(0,4)": r04, "(1,2)": r12 },
                "tau1_tau0_cubed": format_rational(&v(0, &[1, 0, 0, 0])),
                "tau0_tau2_genus1": format_rational(&v(1, &[2, 0])),
                "string_t0sq_t1": c0,
                "string_t2": c1,
            }),
        ))
    }

    fn kdv(&mut self) -> Result<(bool, Value), String> {
        let t = self.table(&[(0, 3), (0, 4), (1, 1), (1, 2)])?;
        let cap = self.cfg.kdv_cap;
        let r = kdv_residual(&assemble_free_energy(&t, 1, 3, cap));
        let mut undetected = Vec::new();
        let mut detected = Vec::new();
        for ((g, d), v) in t.entries() {
            let mut p = t.clone();
            p.insert(*g, d, v.clone() + int(1));
            let moved = !kdv_residual(&assemble_free_energy(&p, 1, 3, cap)).passes();
            let key = format!("{g}:{}", IntersectionTable::format_key(d));
            if moved {
                detected.push(key);
            } else {
                undetected.push(key);
            }
        }
        let pass = r.passes() && undetected.is_empty();
        Ok((
            pass,
            json!({
                "residual_zero": r.passes(),
                "verified_zero": r.count(CoefficientStatus::VerifiedZero),
                "uncovered": r.count(CoefficientStatus::Uncovered),
                "mutations_detected": detected,
                "mutations_undetected": undetected,
            }),
        ))
    }

    fn string(&mut self) -> Result<(bool, Value), String> {
        let t = self.table(&[(0, 3), (0, 4), (1, 1), (1, 2)])?;
        let r = string_residual(&assemble_free_energy(&t, 1, 3, self.cfg.kdv_cap));
        let verified = r.count(CoefficientStatus::VerifiedZero);
        Ok((
            r.passes() && verified > 0,
            json!({
                "verified_zero": verified,
                "uncovered": r.count(CoefficientStatus::Uncovered),
                "nonzero": r.count(CoefficientStatus::Nonzero),
            }),
        ))
    }

    fn oscillator(&self) -> Result<(bool, Value), String> {
        let mut lambdas = vec![int(0), int(1), rat(2, 3)];
        if self.level == Level::Full {
            lambdas.push(rat(-3, 2));
        }
        let cap = self.cfg.fock_cap;
        let mut pass = true;
        let mut per = Vec::new();
        for l in lambdas {
            let params = OscillatorParams::new(Rational::zero(), l.clone());
            let expected = int(1) + int(12) * l.clone() * l.clone();
            let mut failing = Vec::new();
            let mut checked = 0usize;
            for m in -3i64..=3 {
                for n in -3i64..=3 {
                    let r = oscillator_commutator_check(m, n, &params, cap).map_err(|e| e.to_string())?;
                    checked += r.monomials_checked;
                    if !r.passes() {
                        failing.push(format!("({m},{n})"));
                    }
                }
            }
            let charge_ok = params.central_charge() == expected;
            pass &= failing.is_empty() && charge_ok;
            per.push(json!({
                "lambda": format_rational(&l),
                "central_charge": format_rational(&params.central_charge()),
                "monomials_checked": checked,
                "failing_pairs": failing,
            }));
        }
        Ok((pass, json!({ "cap": cap, "lambdas": per })))
    }

    fn kontsevich(&self) -> Result<(bool, Value), String> {
        let cases = [vec![int(2), int(3)], vec![int(2), rat(7, 2), int(5)]];
        let mut pass = true;
        let mut out = Vec::new();
        for l in cases {
            let r = kontsevich_match(&l, 2).map_err(|e| e.to_string())?;
            let w = r.wick.get(&2).cloned();
            let g = r.graph.get(&2).cloned();
            let ok = r.equal && w.is_some() && w == g && w == r.free_energy_v2;
            pass &= ok;
            out.push(json!({ "n": r.n, "lambda": r.lambda, "wick": w, "graph": g, "free_energy": r.free_energy_v2, "pass": ok }));
        }
        if self.level == Level::Full {
            let r = kontsevich_match(&[int(2), int(3)], 4).map_err(|e| e.to_string())?;
            pass &= r.equal;
            out.push(json!({ "n": r.n, "order": 4, "pass": r.equal }));
        }
        Ok((pass, json!(out)))
    }

    fn hciz_configs(&self) -> (u64, Vec<([f64; 2], [f64; 2])>) {
        let samples = if self.level == Level::Full { 1_000_000 } else { 200_000 };
        // the last configuration is the coincident-eigenvalue limit x₁ = x₂
        (samples, vec![([1.0, -1.0], [1.0, -1.0]), ([0.4, -0.9], [1.1, 0.2]), ([0.7, 0.7], [1.5, -0.5])])
    }

    fn hciz(&self) -> Result<(bool, Value), String> {
        let (samples, configs) = self.hciz_configs();
        let mut pass = true;
        let mut out = Vec::new();
        for (x, y) in configs {
            let a = hciz_check(x, y, samples, self.cfg.seed);
            let b = hciz_check(x, y, samples, self.cfg.seed);
            let deterministic = a.estimate.to_bits() == b.estimate.to_bits() && a.stderr.to_bits() == b.stderr.to_bits();
            // criterion bound is 5·stderr; the report's own floor only matters for zero variance
            let within = (a.estimate - a.closed_form).abs() <= 5.0 * a.stderr;
            pass &= within && deterministic;
            let mut v = a.to_json();
            v["within_five_stderr"] = json!(within);
            v["deterministic"] = json!(deterministic);
            out.push(v);
        }
        Ok((pass, json!(out)))
    }

    fn torsion_detail(&self) -> Result<(bool, Value), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let (complexes, sequences) = if self.level == Level::Full { (200, 100) } else { (20, 10) };
        let five = BasedChainComplex::new(vec![1, 1], vec![ExactMatrix::from_rows(vec![vec![int(5)]])])
            .map_err(|e| e.to_string())?;
        let t5 = torsion(&five).map_err(|e| e.to_string())?;
        let five_ok = tauwork::scalar::rational_abs(&t5) == rat(1, 5);
        let instances: Vec<_> = (0..complexes)
            .map(|_| {
                let len = rng.random_range(1..=3);
                random_integer_complex(&mut rng, len, 5)
            })
            .collect();
        let orders: Vec<(bool, Value)> = instances
            .par_iter()
            .map(|(c, ord, tau)| match torsion_order_check(c) {
                Ok(r) => {
                    let known = r.orders == ord.iter().map(|o| o.to_string()).collect::<Vec<_>>() && r.product == format_rational(tau);
                    let v = json!({ "ranks": c.ranks(), "orders": r.orders, "tau": r.tau, "pass": r.pass && known });
                    (r.pass && known, v)
                }
                Err(e) => (false, json!({ "ranks": c.ranks(), "error": e.to_string() })),
            })
            .collect();
        let ses: Vec<_> = (0..sequences).map(|_| random_direct_sum_ses(&mut rng, 3, 3)).collect();
        let ses: Vec<(bool, Value)> = ses
            .par_iter()
            .map(|s| match s.check() {
                Ok(r) => (r.holds_as_printed, serde_json::to_value(&r).expect("report serializes")),
                Err(e) => (false, json!({ "error": e.to_string() })),
            })
            .collect();
        let orders_ok = orders.iter().all(|o| o.0);
        let ses_ok = ses.iter().all(|s| s.0);
        Ok((
            five_ok && orders_ok && ses_ok,
            json!({
                "boundary_five": format_rational(&t5),
                "order_checks": orders.into_iter().map(|o| o.1).collect::<Vec<_>>(),
                "order_checks_pass": orders_ok,
                "ses_checks": ses.into_iter().map(|s| s.1).collect::<Vec<_>>(),
                "ses_checks_pass": ses_ok,
            }),
        ))
    }

    fn torsion(&self) -> Result<(bool, Value), String> {
        self.torsion_detail()
    }

    /// Re-runs the randomized criteria and compares serialized output.
    fn determinism(&self) -> Result<(bool, Value), String> {
        let a = serde_json::to_string(&(self.hciz()?, self.torsion_detail()?)).expect("json");
        let b = serde_json::to_string(&(self.hciz()?, self.torsion_detail()?)).expect("json");
        Ok((a == b, json!({ "randomized_criteria_identical": a == b, "bytes": a.len() })))
    }
}

fn schur_kp() -> Result<(bool, Value), String> {
    let layout = poly_layout(6);
    let eval = kp_slice_values();
    let mut failing = Vec::new();
    let mut checked = 0;
    for size in 0..=4 {
        for p in Partition::all_of(size) {
            let tau = schur_lambda::<Rational>(&p, &layout);
            let h = kp_hirota_residual(&tau).is_zero();
            let k = kp_pde_residual(&tau, &eval).map_err(|e| e.to_string())?.vanishes();
            checked += 1;
            if !(h && k) {
                failing.push(p.parts().to_vec());
            }
        }
    }
    let l3 = poly_layout(3);
    let x1 = TruncatedSeries::<Rational>::variable(&l3, 0);
    let sq = &x1 * &x1;
    let h = !kp_hirota_residual(&sq).is_zero();
    let k = !kp_pde_residual(&sq, &[]).map_err(|e| e.to_string())?.vanishes();
    Ok((
        failing.is_empty() && h && k,
        json!({
            "partitions_checked": checked,
            "failing": failing,
            "x1_squared_hirota_nonzero": h,
            "x1_squared_pde_nonzero": k,
        }),
    ))
}

/// `Σ` over `j`-subsets of `{b + l : lo ≤ l ≤ hi}` of the product of reciprocals, by enumeration.
fn subset_reciprocals(b: &Rational, lo: i64, hi: i64, j: usize) -> Rational {
    let ls: Vec<i64> = (lo..=hi).collect();
    (0u32..1 << ls.len())
        .filter(|mask| mask.count_ones() as usize == j)
        .map(|mask| {
            ls.iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .fold(Rational::one(), |acc, (_, &l)| acc / (b.clone() + int(l)))
        })
        .sum()
}

fn fact(k: i64) -> Rational {
    (1..=k).map(int).product()
}

fn coefficients() -> Result<(bool, Value), String> {
    // direct evaluation on j ∈ 0..3, m ∈ 0..4, n ∈ 1..=4, b ∈ {1/2, 3/7, 5}
    let bs = [rat(1, 2), rat(3, 7), int(5)];
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for j in 0i64..3 {
        for m in 0i64..4 {
            for n in 1i64..=4 {
                for b in &bs {
                    let pre: Rational = (m..=m + n).map(|l| b.clone() + int(l)).product::<Rational>()
                        / (1..=n).map(|k| int(m + k)).product::<Rational>();
                    let c_oracle = pre * subset_reciprocals(b, m, m + n, j as usize);
                    let c = coeff_c(j, m, n, b).map_err(|e| e.to_string())?;
                    checked += 1;
                    if c != c_oracle {
                        mismatches.push(format!("C({j},{m},{n},{})", format_rational(b)));
                    }
                    if m <= n {
                        let bh = b.clone() + int(1);
                        let high: Rational = (0..=m).map(|l| bh.clone() + int(l)).product();
                        let low: Rational = (0..n - m).map(|l| b.clone() + int(l)).product();
                        let d_oracle = high * low / (fact(m) * fact((n - m - 1).max(0)))
                            * subset_reciprocals(b, -m, n - m - 1, j as usize);
                        match coeff_d(j, m, n, b, &bh) {
                            Ok(d) => {
                                checked += 1;
                                if d != d_oracle {
                                    mismatches.push(format!("D({j},{m},{n},{})", format_rational(b)));
                                }
                            }
                            // a pole of the reciprocal sum is only legitimate when the oracle also divides by zero
                            Err(_) if (-m..n - m).any(|l| (b.clone() + int(l)).is_zero()) => {}
                            Err(e) => return Err(e.to_string()),
                        }
                    }
                }
            }
        }
    }
    let grid = CdSampleGrid::default();
    let cd = cd_identity_check(&grid);
    let expected_tuples = 2 * grid.j.len() * grid.m.len() * grid.n.len() * grid.n1.len() * grid.b.len();
    let cd_complete = cd.total(1) + cd.total(2) + cd.excluded.len() == expected_tuples
        && cd.rows.iter().all(|r| r.pass == r.discrepancy.is_empty());
    let cd_json = serde_json::to_value(&cd).map_err(|e| e.to_string())?;
    let mut target = Vec::new();
    let mut target_complete = true;
    for (name, data) in [("point", CohomologyData::point()), ("two-class", CohomologyData::two_class_sample())] {
        for (n1, n) in [(-1, 0), (-1, 1), (0, 1)] {
            let r = target_commutator_report(n1, n, &data, 3, 2).map_err(|e| e.to_string())?;
            let v = serde_json::to_value(&r).map_err(|e| e.to_string())?;
            target_complete &= !r.entries.is_empty() && v["entries"].as_array().map(Vec::len) == Some(r.entries.len());
            target.push(json!({
                "data": name,
                "n1": n1,
                "n": n,
                "monomials": r.entries.len(),
                "printed_holds": r.printed_holds(),
                "standard_holds": r.standard_holds(),
            }));
        }
    }
    Ok((
        mismatches.is_empty() && cd_complete && target_complete,
        json!({
            "coefficients_checked": checked,
            "mismatches": mismatches,
            "cd_identity": {
                "rows": cd_json["rows"].as_array().map_or(0, Vec::len),
                "excluded": cd.excluded.len(),
                "identity1_passed": cd.passed(1),
                "identity1_total": cd.total(1),
                "identity2_passed": cd.passed(2),
                "identity2_total": cd.total(2),
            },
            "target_commutator": target,
        }),
    ))
}

fn moments() -> Result<(bool, Value), String> {
    let tr4: TraceWord = "tr4".parse().map_err(|e: tauwork::matrix_models::MatrixError| e.to_string())?;
    let tr6: TraceWord = "tr6".parse().map_err(|e: tauwork::matrix_models::MatrixError| e.to_string())?;
    let m = wick_moment(&GaussianSpec::Scalar, &tr4).map_err(|e| e.to_string())?;
    let expected: BTreeMap<i64, Rational> = [(1, int(2)), (-1, int(1))].into_iter().collect();
    let moment_ok = m == Moment::Laurent(expected);
    let g4 = genus_expansion(&tr4).map_err(|e| e.to_string())?;
    let split_ok = g4 == [(0, int(2)), (1, int(1))].into_iter().collect();
    let g6 = genus_expansion(&tr6).map_err(|e| e.to_string())?;
    // Catalan C_3 = 5, computed by the recurrence C_{k+1} = Σ C_i C_{k−i}
    let mut catalan = vec![Rational::one()];
    for k in 0..3 {
        let next: Rational = (0..=k).map(|i| catalan[i].clone() * catalan[k - i].clone()).sum();
        catalan.push(next);
    }
    let planar = g6.get(&0).cloned().unwrap_or_default();
    let catalan_ok = planar == catalan[3];
    let m6 = wick_moment(&GaussianSpec::Scalar, &tr6).map_err(|e| e.to_string())?;
    // ⟨(1/N) tr M⁶⟩ at N^0 is the N^1 coefficient of ⟨tr M⁶⟩
    let normalized_ok = matches!(&m6, Moment::Laurent(l) if l.get(&1) == Some(&catalan[3]));
    let split = |g: &BTreeMap<u32, Rational>| -> BTreeMap<String, String> {
        g.iter().map(|(k, v)| (format!("g{k}"), format_rational(v))).collect()
    };
    Ok((
        moment_ok && split_ok && catalan_ok && normalized_ok,
        json!({
            "tr4": m.to_json(),
            "tr4_genus": split(&g4),
            "tr6": m6.to_json(),
            "tr6_genus": split(&g6),
            "catalan_3": format_rational(&catalan[3]),
        }),
    ))
}

fn normalization() -> Result<(bool, Value), String> {
    let one = gaussian_normalization_check(&[rat(3, 2)], 1e-10).map_err(|e| e.to_string())?;
    let two = gaussian_normalization_check(&[int(1), int(2)], 1e-6).map_err(|e| e.to_string())?;
    Ok((
        one.pass && two.pass,
        json!([serde_json::to_value(&one).expect("json"), serde_json::to_value(&two).expect("json")]),
    ))
}

/// Every criterion in order, single-threaded assembly.
pub fn run_suite(level: Level, cfg: &RunConfig) -> SuiteReport {
    let mut wb = Workbench::new(level, cfg);
    let criteria = CRITERIA.iter().map(|(id, _)| wb.run(*id)).collect();
    SuiteReport { level, seed: cfg.seed, criteria }
}
