use std::sync::Arc;

use proptest::prelude::*;
use tauwork::kp::*;
use tauwork::scalar::{int, rat, Rational};
use tauwork::series::{SeriesLayout, TruncatedSeries, UNBOUNDED};

type P = TruncatedSeries<Rational>;

fn x(l: &Arc<SeriesLayout>, j: usize) -> P {
    P::variable(l, j - 1)
}

/// `[z^k] exp(Σ_{j≤K} x_j z^j)` computed with `z` as an extra variable.
fn generating_oracle(k: usize, kk: usize) -> P {
    let big = Arc::new(SeriesLayout::uniform("v", 0, kk + 1, 2 * k as u32));
    let z = P::variable(&big, kk);
    let mut arg = P::zero(&big);
    for j in 1..=kk {
        arg = &arg + &(&P::variable(&big, j - 1) * &z.pow(j as u32));
    }
    let e = arg.exp().unwrap();
    let l = poly_layout(kk);
    P::from_terms(
        &l,
        e.terms().iter().filter(|(m, _)| m[kk] == k as u32).map(|(m, c)| (m[..kk].to_vec(), c.clone())),
    )
}

#[test]
fn s3_matches_generating_function() {
    let l = poly_layout(3);
    let expected = &(&x(&l, 1).pow(3).scale(&rat(1, 6)) + &(&x(&l, 1) * &x(&l, 2))) + &x(&l, 3);
    assert_eq!(elementary_schur::<Rational>(3, &l), expected);
    assert_eq!(generating_oracle(3, 3), expected);
}

#[test]
fn generating_function_consistency() {
    let l = poly_layout(5);
    let table = elementary_schur_table::<Rational>(5, &l);
    for k in 0..=5 {
        assert_eq!(table[k], generating_oracle(k, 5), "S_{k}");
    }
}

#[test]
fn jacobi_trudi_small() {
    let l = poly_layout(4);
    let half = |p: P| p.scale(&rat(1, 2));
    assert_eq!(schur_lambda::<Rational>(&Partition::new(vec![1]).unwrap(), &l), x(&l, 1));
    assert_eq!(schur_lambda::<Rational>(&Partition::new(vec![2]).unwrap(), &l), &half(x(&l, 1).pow(2)) + &x(&l, 2));
    assert_eq!(schur_lambda::<Rational>(&Partition::new(vec![1, 1]).unwrap(), &l), &half(x(&l, 1).pow(2)) - &x(&l, 2));
}

/// Leibniz expansion of `det(S_{p_i − i + j})`.
fn leibniz_schur(p: &[u32], l: &Arc<SeriesLayout>) -> P {
    let n = p.len();
    let s = elementary_schur_table::<Rational>(p[0] as usize + n, l);
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for k in 0..n {
        perms = perms
            .into_iter()
            .flat_map(|q| (0..=k).map(move |pos| {
                let mut r = q.clone();
                r.insert(pos, k);
                r
            }))
            .collect();
    }
    let mut acc = P::zero(l);
    for q in perms {
        let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| q[i] > q[j]).count();
        let mut term = P::one(l);
        for i in 0..n {
            let idx = p[i] as i64 - i as i64 + q[i] as i64;
            term = if idx < 0 { P::zero(l) } else { &term * &s[idx as usize] };
        }
        acc = if inversions % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

#[test]
fn column_schur_is_the_sign_twisted_row_schur() {
    let l = poly_layout(4);
    for k in 1..=4u32 {
        let col = vec![1; k as usize];
        let det = leibniz_schur(&col, &l);
        assert_eq!(det, schur_lambda::<Rational>(&Partition::new(col).unwrap(), &l));
        let sk = elementary_schur::<Rational>(k as i64, &l);
        let twisted = P::from_terms(
            &l,
            sk.terms().iter().map(|(m, c)| {
                let odd: u32 = m.iter().enumerate().filter(|(j, _)| j % 2 == 1).map(|(_, &e)| e).sum();
                (m.clone(), if odd % 2 == 1 { -c.clone() } else { c.clone() })
            }),
        );
        assert_eq!(det, twisted, "k = {k}");
    }
}

#[test]
fn hirota_examples() {
    let l = poly_layout(3);
    let x1 = x(&l, 1);
    assert!(hirota_apply(&HirotaOperator::new(vec![1]), &x1, &x1).is_zero());
    assert_eq!(hirota_apply(&HirotaOperator::new(vec![2]), &x1, &x1), P::constant(&l, int(-2)));
    let one = P::one(&l);
    assert!(kp_hirota_residual(&one).is_zero());
    let s21 = schur_lambda::<Rational>(&Partition::new(vec![2, 1]).unwrap(), &l);
    assert!(kp_hirota_residual(&s21).is_zero());
}

/// `∂_u^a [f(x+u) g(x−u)]` at `u = 0`, with `u` as explicit extra variables.
fn hirota_oracle(a: &[u32], f: &P, g: &P, k: usize) -> P {
    let big = Arc::new(SeriesLayout::uniform("v", 0, 2 * k, UNBOUNDED));
    let shift = |p: &P, sign: i64| {
        let mut acc = P::zero(&big);
        for (m, c) in p.terms() {
            let mut term = P::constant(&big, c.clone());
            for (j, &e) in m.iter().enumerate() {
                let base = &P::variable(&big, j) + &P::variable(&big, k + j).scale(&int(sign));
                term = &term * &base.pow(e);
            }
            acc = &acc + &term;
        }
        acc
    };
    let mut prod = &shift(f, 1) * &shift(g, -1);
    for (j, &e) in a.iter().enumerate() {
        prod = prod.derivative(k + j, e).unwrap();
    }
    let l = f.layout().clone();
    P::from_terms(&l, prod.terms().iter().filter(|(m, _)| m[k..].iter().all(|&e| e == 0)).map(|(m, c)| (m[..k].to_vec(), c.clone())))
}

fn small_poly(l: &Arc<SeriesLayout>, coeffs: &[(i64, [u32; 3])]) -> P {
    P::from_terms(l, coeffs.iter().map(|(c, m)| (m.to_vec(), int(*c))))
}

fn poly_strategy() -> impl Strategy<Value = Vec<(i64, [u32; 3])>> {
    proptest::collection::vec((-4i64..5, [0u32..3, 0u32..2, 0u32..2]), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hirota_matches_shift_oracle(f in poly_strategy(), g in poly_strategy(), a in [0u32..3, 0u32..2, 0u32..2]) {
        let l = poly_layout(3);
        let (f, g) = (small_poly(&l, &f), small_poly(&l, &g));
        prop_assert_eq!(hirota_apply(&HirotaOperator::new(a.to_vec()), &f, &g), hirota_oracle(&a, &f, &g, 3));
    }

    #[test]
    fn odd_hirota_vanishes_on_the_diagonal(f in poly_strategy(), a in [0u32..4, 0u32..3, 0u32..3]) {
        prop_assume!(a.iter().sum::<u32>() % 2 == 1);
        let l = poly_layout(3);
        let f = small_poly(&l, &f);
        prop_assert!(hirota_apply(&HirotaOperator::new(a.to_vec()), &f, &f).is_zero());
    }
}

#[test]
fn schur_functions_solve_kp() {
    for size in 0..=4 {
        for p in Partition::all_of(size) {
            let l = poly_layout(6);
            let tau = schur_lambda::<Rational>(&p, &l);
            assert!(kp_hirota_residual(&tau).is_zero(), "{p:?}");
            assert!(kp_pde_residual(&tau, &[int(1), rat(-2, 3), int(3)]).unwrap().vanishes(), "{p:?}");
        }
    }
}

#[test]
fn non_solution_detected_by_both() {
    let l = poly_layout(3);
    let tau = x(&l, 1).pow(2);
    assert!(!kp_hirota_residual(&tau).is_zero());
    assert!(!kp_pde_residual(&tau, &[]).unwrap().vanishes());
}

#[test]
fn s22_on_a_slice() {
    let l = poly_layout(5);
    let tau = schur_lambda::<Rational>(&Partition::new(vec![2, 2]).unwrap(), &l);
    assert!(kp_pde_residual(&tau, &[int(1)]).unwrap().vanishes());
}

#[test]
fn hirota_and_pde_agree_up_to_size_five() {
    let l = poly_layout(7);
    let mut cases: Vec<P> = Partition::all_of(5).iter().map(|p| schur_lambda::<Rational>(p, &l)).collect();
    cases.push(x(&l, 1).pow(2));
    cases.push(&x(&l, 1).pow(3) + &x(&l, 2));
    for tau in cases {
        let h = kp_hirota_residual(&tau).is_zero();
        let p = kp_pde_residual(&tau, &[int(1), int(2), rat(1, 2), int(-1)]).unwrap().vanishes();
        assert_eq!(h, p, "{}", tau.render());
    }
}

#[test]
fn float_scalar_path() {
    let l = poly_layout(3);
    let s = schur_lambda::<f64>(&Partition::new(vec![2, 1]).unwrap(), &l);
    let r = kp_hirota_residual(&s);
    assert!(r.terms().values().all(|c| c.abs() < 1e-12));
}
