use std::sync::Arc;

use num_traits::{One, Zero};
use proptest::prelude::*;
use tauwork::fock::*;
use tauwork::kp::elementary_schur;
use tauwork::scalar::{gauss, int, rat, Coefficient, GaussianRational, Rational};
use tauwork::series::{monomials_up_to, series_exp, SeriesLayout};
use tauwork::Series;

fn g(q: Rational) -> GaussianRational {
    GaussianRational::from_rational(&q)
}

fn params(lambda: Rational) -> OscillatorParams {
    OscillatorParams::new(rat(1, 3), lambda)
}

#[test]
fn heisenberg_examples_and_relations() {
    let l = fock_layout(8);
    let p = params(rat(2, 3));
    let x1 = Series::variable(&l, 0);
    assert_eq!(heisenberg_apply(1, &x1, &p).unwrap(), Series::one(&l));
    assert_eq!(heisenberg_apply(-1, &Series::one(&l), &p).unwrap(), x1);
    for m in -4i64..=4 {
        for n in -4i64..=4 {
            let window = 8 - m.abs() - n.abs();
            for e in monomials_up_to(&l, window as u64) {
                let q = Series::monomial(&l, e, GaussianRational::one());
                let mn = heisenberg_apply(m, &heisenberg_apply(n, &q, &p).unwrap(), &p).unwrap();
                let nm = heisenberg_apply(n, &heisenberg_apply(m, &q, &p).unwrap(), &p).unwrap();
                let expected = if m == -n { q.scale(&g(int(m))) } else { Series::zero(&l) };
                assert_eq!(&mn - &nm, expected, "[a_{m}, a_{n}]");
            }
        }
    }
}

#[test]
fn creation_past_the_cap_is_a_truncation_error() {
    let l = fock_layout(3);
    let x2 = Series::variable(&l, 1);
    assert!(matches!(
        heisenberg_apply(-2, &x2, &OscillatorParams::default()),
        Err(FockError::TruncationError { weight: 4, cap: 3 })
    ));
}

/// `L_k` for `k ≠ 0` written out as a differential operator from the Sugawara form.
fn sugawara_oracle(k: i64, q: &Series, p: &OscillatorParams) -> Series {
    let l = q.layout().clone();
    let kk = l.len() as i64;
    let d = |j: i64, s: &Series| if j < 1 || j > kk { Series::zero(&l) } else { s.derivative(j as usize - 1, 1).unwrap().relayout(&l) };
    let x = |j: i64| if j < 1 || j > kk { Series::zero(&l) } else { Series::variable(&l, j as usize - 1) };
    let mu = g(p.mu.clone());
    let lam = p.lambda.clone();
    let mut acc = Series::zero(&l);
    if k > 0 {
        for j in 1..=kk {
            acc = &acc + &(&x(j) * &d(j + k, q)).scale(&g(int(j)));
        }
        for a in 1..k {
            acc = &acc + &d(a, &d(k - a, q)).scale(&g(rat(1, 2)));
        }
        acc = &acc + &d(k, q).scale(&(mu + gauss(int(0), lam * int(k))));
    } else {
        let h = -k;
        for j in 1..=kk {
            acc = &acc + &(&x(j + h) * &d(j, q)).scale(&g(int(j + h)));
        }
        for a in 1..h {
            acc = &acc + &(&(&x(a) * &x(h - a)) * q).scale(&g(rat(a * (h - a), 2)));
        }
        acc = &acc + &(&x(h) * q).scale(&(mu * g(int(h)) - gauss(int(0), lam * int(h * h))));
    }
    acc
}

#[test]
fn oscillator_examples() {
    let p = params(rat(2, 3));
    let l = fock_layout(6);
    let one = Series::one(&l);
    let x1 = Series::variable(&l, 0);
    let half_sum = (p.mu.clone() * p.mu.clone() + p.lambda.clone() * p.lambda.clone()) / int(2);
    assert_eq!(oscillator_virasoro_apply(0, &one, &p).unwrap(), one.scale(&g(half_sum)));
    let mu_il = gauss(p.mu.clone(), p.lambda.clone());
    assert_eq!(oscillator_virasoro_apply(1, &x1, &p).unwrap(), one.scale(&mu_il));
    let mu_mil = gauss(p.mu.clone(), -p.lambda.clone());
    assert_eq!(oscillator_virasoro_apply(-1, &one, &p).unwrap(), x1.scale(&mu_mil));
}

#[test]
fn oscillator_matches_the_sugawara_oracle() {
    let p = params(rat(2, 3));
    let l = fock_layout(9);
    for k in [-3i64, -2, -1, 1, 2, 3] {
        for e in monomials_up_to(&l, 5) {
            let q = Series::monomial(&l, e.clone(), GaussianRational::one());
            assert_eq!(oscillator_virasoro_apply(k, &q, &p).unwrap(), sugawara_oracle(k, &q, &p), "k = {k}, {e:?}");
        }
    }
}

#[test]
fn oscillator_closes_with_central_charge_one_plus_twelve_lambda_squared() {
    for lambda in [rat(0, 1), rat(1, 1), rat(2, 3)] {
        let p = params(lambda.clone());
        assert_eq!(p.central_charge(), int(1) + int(12) * lambda.clone() * lambda.clone());
        for m in -3i64..=3 {
            for n in -3i64..=3 {
                let r = oscillator_commutator_check(m, n, &p, 10).unwrap();
                assert!(r.passes(), "λ = {lambda}, (m, n) = ({m}, {n}): {:?}", r.failures);
            }
        }
    }
}

#[test]
fn central_term_on_the_vacuum() {
    // [L_2, L_{-2}] 1 = 4 L_0 1 + c/2
    let p = params(rat(2, 3));
    let l = fock_layout(6);
    let one = Series::one(&l);
    let lhs = &oscillator_virasoro_apply(2, &oscillator_virasoro_apply(-2, &one, &p).unwrap(), &p).unwrap()
        - &oscillator_virasoro_apply(-2, &oscillator_virasoro_apply(2, &one, &p).unwrap(), &p).unwrap();
    let l0 = (p.mu.clone() * p.mu.clone() + p.lambda.clone() * p.lambda.clone()) / int(2);
    assert_eq!(lhs, one.scale(&g(int(4) * l0 + p.central_charge() / int(2))));
}

#[test]
fn empty_guard_window_is_insufficient_cap() {
    assert!(matches!(oscillator_commutator_check(3, 3, &params(rat(1, 1)), 8), Err(FockError::InsufficientCap(_))));
}

#[test]
fn printed_display_agrees_only_at_level_zero() {
    let report = printed_display_report(&[-2, -1, 0, 1, 2], 3, &params(rat(2, 3))).unwrap();
    assert!(report.iter().filter(|d| d.k == 0).all(|d| d.agree));
    for k in [-2i64, -1, 1, 2] {
        assert!(report.iter().any(|d| d.k == k && !d.agree), "k = {k}");
    }
}

/// `exp(Σ_j (u^j − v^j) x_j)` expanded with the generic series exponential over `(x, u, v)`.
fn exp_oracle(cap: u32, ua: i64, vb: i64) -> Series {
    let k = cap as usize;
    let mut weights: Vec<u32> = (1..=cap).collect();
    weights.extend([1, 1]);
    let big = Arc::new(SeriesLayout::new("x", 1, weights, cap + (ua + vb) as u32));
    let (u, v) = (Series::variable(&big, k), Series::variable(&big, k + 1));
    let mut arg = Series::zero(&big);
    for j in 1..=k {
        let xj = Series::variable(&big, j - 1);
        arg = &arg + &(&(&u.pow(j as u32) - &v.pow(j as u32)) * &xj);
    }
    let e = series_exp(&arg).unwrap();
    let fock = fock_layout(cap);
    let mut out = Series::zero(&fock);
    for (exps, c) in e.terms() {
        if exps[k] as i64 == ua && exps[k + 1] as i64 == vb {
            out.add_term(exps[..k].to_vec(), c.clone());
        }
    }
    out
}

#[test]
fn vertex_operator_on_the_vacuum_is_the_exponential() {
    let l = fock_layout(6);
    let ex = vertex_operator_apply(&Series::one(&l), 3, 3).unwrap();
    for a in 0..=3 {
        for b in 0..=3 {
            let sb: Series = elementary_schur(b, &l);
            let neg = Series::from_terms(&l, sb.terms().iter().map(|(e, c)| {
                let odd = e.iter().sum::<u32>() % 2 == 1;
                (e.clone(), if odd { -c.clone() } else { c.clone() })
            }).collect::<Vec<_>>());
            let schur = &elementary_schur::<GaussianRational>(a, &l) * &neg;
            assert_eq!(ex.coeff(a, b).unwrap(), schur);
            assert_eq!(ex.coeff(a, b).unwrap(), exp_oracle(6, a, b), "(a, b) = ({a}, {b})");
        }
    }
    assert!(ex.coeffs.keys().all(|&(a, b)| a >= 0 && b >= 0));
}

#[test]
fn vertex_operator_diagonal_and_commutation() {
    let l = fock_layout(10);
    let x = |j: usize| Series::variable(&l, j - 1);
    let samples = [Series::one(&l), x(1), &x(1) * &x(2), &x(3).scale(&g(rat(2, 5))) + &(&x(1) * &x(1)), &x(1) * &x(3)];
    for p in &samples {
        let d = vertex_diagonal_check(p, 3).unwrap();
        assert!(d.passes(), "{:?}", d.failures);
        for j in 1..=3 {
            let c = vertex_commutation_check(p, j, 2, 2).unwrap();
            assert!(c.passes(), "j = {j}: {:?}", c.failures);
        }
    }
    assert!(matches!(vertex_operator_apply(&(&x(1) * &x(3)), 5, 2), Err(FockError::TruncationError { .. })));
}

#[test]
fn coefficient_examples() {
    assert_eq!(coeff_c(0, 0, 1, &rat(1, 2)).unwrap(), rat(3, 4));
    assert_eq!(coeff_c(1, 0, 1, &rat(1, 2)).unwrap(), rat(2, 1));
    assert!(matches!(coeff_c(1, 0, 1, &rat(0, 1)), Err(FockError::PoleError { l: 0 })));
    assert_eq!(coeff_c(3, 0, 1, &rat(1, 2)).unwrap(), rat(0, 1));
    assert_eq!(coeff_d(0, 0, 1, &rat(1, 2), &rat(1, 2)).unwrap(), rat(1, 4));
    assert_eq!(coeff_d(1, 0, 1, &rat(1, 2), &rat(3, 2)).unwrap(), rat(3, 2));
    assert_eq!(coeff_d(0, 1, 1, &rat(1, 1), &rat(1, 1)).unwrap(), rat(2, 1));
    assert!(matches!(coeff_d(1, 1, 1, &rat(1, 1), &rat(1, 1)), Err(FockError::PoleError { l: -1 })));
}

/// Brute force over all `j`-subsets of the index window.
fn subset_sum(b: &Rational, lo: i64, hi: i64, j: usize) -> Rational {
    let ls: Vec<i64> = (lo..=hi).collect();
    let mut total = Rational::zero();
    for mask in 0u32..(1 << ls.len()) {
        if mask.count_ones() as usize != j {
            continue;
        }
        let mut term = Rational::one();
        for (i, &l) in ls.iter().enumerate() {
            if mask >> i & 1 == 1 {
                term /= b.clone() + int(l);
            }
        }
        total += term;
    }
    total
}

fn sample_b() -> impl Strategy<Value = Rational> {
    (1i64..40, 1i64..9).prop_map(|(p, q)| rat(p, q) + rat(1, 17))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coeff_c_matches_subset_enumeration(j in 0i64..4, m in 0i64..4, n in 1i64..5, b in sample_b()) {
        let pre: Rational = (m..=m + n).map(|l| b.clone() + int(l)).product::<Rational>()
            / (1..=n).map(|k| int(m + k)).product::<Rational>();
        let expected = if j > n + 1 { Rational::zero() } else { pre * subset_sum(&b, m, m + n, j as usize) };
        prop_assert_eq!(coeff_c(j, m, n, &b).unwrap(), expected);
    }

    #[test]
    fn coeff_d_matches_subset_enumeration(j in 0i64..4, n in 1i64..5, mm in 0i64..5, bl in sample_b(), bh in sample_b()) {
        let m = mm % (n + 1);
        let high: Rational = (0..=m).map(|l| bh.clone() + int(l)).product();
        let low: Rational = (0..n - m).map(|l| bl.clone() + int(l)).product();
        let fact = |k: i64| (1..=k).map(int).product::<Rational>();
        let pre = high * low / (fact(m) * fact((n - m - 1).max(0)));
        let expected = if j > n { Rational::zero() } else { pre * subset_sum(&bl, -m, n - m - 1, j as usize) };
        prop_assert_eq!(coeff_d(j, m, n, &bl, &bh).unwrap(), expected);
    }

    #[test]
    fn cleared_coeff_c_is_a_polynomial_of_degree_n_plus_one_minus_j(j in 0i64..4, m in 0i64..3, n in 1i64..4) {
        prop_assume!(j <= n + 1);
        let deg = (n + 1 - j) as usize;
        let den: Rational = (1..=n).map(|k| int(m + k)).product();
        let vals: Vec<Rational> = (0..deg + 2)
            .map(|k| coeff_c(j, m, n, &(rat(1, 3) + int(k as i64))).unwrap() * den.clone())
            .collect();
        let mut diffs = vals;
        for _ in 0..deg {
            diffs = diffs.windows(2).map(|w| w[1].clone() - w[0].clone()).collect();
        }
        // leading coefficient of e_{n+1−j}(b+m, .., b+m+n) is C(n+1, deg)
        let lead = tauwork::scalar::binomial((n + 1) as u32, deg as u32) * tauwork::scalar::factorial(deg as u32);
        prop_assert_eq!(diffs[0].clone(), Rational::from(lead));
        prop_assert_eq!(diffs[1].clone() - diffs[0].clone(), Rational::zero());
    }

    #[test]
    fn weight_bookkeeping(k in -3i64..=3, idx in 0usize..30) {
        let l = fock_layout(10);
        let basis = monomials_up_to(&l, 5);
        let e = basis[idx % basis.len()].clone();
        let w = l.degree(&e) as i64;
        let q = Series::monomial(&l, e, GaussianRational::one());
        let out = oscillator_virasoro_apply(k, &q, &params(rat(2, 3))).unwrap();
        for (exp, _) in out.terms() {
            prop_assert_eq!(l.degree(exp) as i64, w - k);
        }
    }

    #[test]
    fn operator_composition_is_associative_and_acts_as_composition(
        seeds in proptest::collection::vec((0usize..3, 0usize..3, 0usize..3, -3i64..4), 9)
    ) {
        let vars = 3;
        let make = |chunk: &[(usize, usize, usize, i64)]| {
            let mut op = OperatorExpr::<Rational>::zero(vars);
            for &(a, b, c, w) in chunk {
                op.add_product(&[a], &[b, c], int(w));
                op.add_product(&[], &[a], int(1));
            }
            op
        };
        let (a, b, c) = (make(&seeds[0..3]), make(&seeds[3..6]), make(&seeds[6..9]));
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        let layout = Arc::new(SeriesLayout::uniform("y", 0, vars, tauwork::series::UNBOUNDED));
        let y = |i: usize| tauwork::RationalSeries::variable(&layout, i);
        let p = &(&(&y(0) * &y(1)) * &y(2)) + &(&(&y(0) * &y(0)) * &y(0));
        let p = &p * &y(1);
        prop_assert_eq!(a.compose(&b).apply(&p), a.apply(&b.apply(&p)));
    }
}

#[test]
fn weyl_relation() {
    let x = OperatorExpr::<Rational>::x(2, 0);
    let d = OperatorExpr::<Rational>::d(2, 0);
    assert_eq!(d.commutator(&x), OperatorExpr::identity(2));
    assert!(OperatorExpr::<Rational>::d(2, 1).commutator(&x).is_zero());
}

#[test]
fn cd_identity_report() {
    let report = cd_identity_check(&CdSampleGrid::default());
    let rows = |id: u8, j: i64| report.rows.iter().filter(move |r| r.identity == id && r.j == j);
    // the first identity telescopes at j = 0
    assert!(rows(1, 0).count() > 0 && rows(1, 0).all(|r| r.pass));
    // failures carry their exact discrepancy
    assert!(report.rows.iter().all(|r| r.pass == r.discrepancy.is_empty()));
    assert!(report.rows.iter().filter(|r| !r.pass).all(|r| r.discrepancy.iter().any(|d| d != "0")));
    assert!(report.total(1) + report.total(2) + report.excluded.len() == 2 * 3 * 3 * 4 * 4 * 3);
    let json = serde_json::to_value(&report).unwrap();
    assert!(json["rows"].as_array().unwrap().len() == report.rows.len());
}

#[test]
fn cd_second_identity_at_j_zero_against_an_independent_product() {
    // Σ reduces to D^{(0)}(m, n) C^{(0)}(n−m, n₁), a pure product; compare with the direct product.
    let b = rat(3, 7);
    for n in 1i64..=4 {
        for m in 0..n {
            for n1 in 1i64..=3 {
                let d0 = coeff_d(0, m, n, &b, &b).unwrap();
                let c0 = coeff_c(0, n - m, n1, &b).unwrap();
                let full = coeff_d(0, m, n + n1, &b, &b).unwrap();
                // D^{(0)}(m,n) C^{(0)}(n−m,n₁) = D^{(0)}(m,n+n₁)·(b+n+n₁−m)(n−m)/(n+n₁−m)
                let product = full * (b.clone() + int(n + n1 - m)) * int(n - m) / int(n + n1 - m);
                assert_eq!(d0 * c0, product);
            }
        }
    }
}

#[test]
fn cd_pole_samples_are_excluded() {
    let grid = CdSampleGrid { b: vec![(rat(-1, 1), rat(-1, 1))], ..Default::default() };
    let report = cd_identity_check(&grid);
    assert!(report.excluded.iter().any(|e| e.contains("pole")));
}

#[test]
fn target_self_commutator_vanishes() {
    for data in [CohomologyData::point(), CohomologyData::two_class_sample()] {
        for n in -1..=2 {
            let r = target_commutator_report(n, n, &data, 2, 2).unwrap();
            assert!(r.printed_holds() && r.standard_holds(), "n = {n}");
        }
    }
}

#[test]
fn point_target_lowering_operator_is_the_printed_one() {
    let levels = 5;
    let built = target_virasoro_build(&CohomologyData::point(), -1, levels).unwrap();
    let mut expected = OperatorExpr::<GaussianRational>::zero(levels);
    for m in 1..levels {
        expected.add_product(&[m], &[m - 1], g(int(m as i64)));
    }
    expected.add_product(&[0, 0], &[], g(rat(1, 2)));
    assert_eq!(built, expected);
}

#[test]
fn point_target_operators_close_under_the_standard_bracket() {
    // the point case is the Witt algebra of string and dilaton type
    let data = CohomologyData::point();
    for (n1, n) in [(-1, 0), (-1, 1), (0, 1), (-1, 2), (0, 2), (1, 2)] {
        let r = target_commutator_report(n1, n, &data, 3, 2).unwrap();
        assert!(r.standard_holds(), "({n1}, {n})");
        assert!(!r.printed_holds(), "({n1}, {n})");
    }
}

#[test]
fn two_class_report_is_emitted() {
    let data = CohomologyData::two_class_sample();
    for (n1, n) in [(-1, 0), (-1, 1), (0, 1)] {
        let r = target_commutator_report(n1, n, &data, 3, 2).unwrap();
        assert!(!r.entries.is_empty());
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["entries"].as_array().unwrap().len(), r.entries.len());
    }
    assert!(matches!(target_commutator_report(0, 1, &data, 0, 2), Err(FockError::InsufficientCap(_))));
}

#[test]
fn cohomology_json_round_trip_and_validation() {
    let data = CohomologyData::two_class_sample();
    let text = data.to_json().to_string();
    assert_eq!(CohomologyData::from_json(&text).unwrap(), data);
    let mut bad = data.clone();
    bad.cmat = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
    assert!(matches!(CohomologyData::from_json(&bad.to_json().to_string()), Err(FockError::InvalidData(_))));
    let mut asym = data;
    asym.eta[0][1] = int(2);
    assert!(asym.validate().is_err());
}
