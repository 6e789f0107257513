use std::sync::Arc;

use num_traits::Zero;
use tauwork::kdv::*;
use tauwork::ribbon::{build_table, stable_range, ExtractOptions, IntersectionTable};
use tauwork::scalar::{int, rat, Coefficient, GaussianRational, Rational};
use tauwork::series::SeriesLayout;
use tauwork::Series;

const TIMES: usize = 3;
const CAP: u32 = 7;

fn base_table() -> IntersectionTable {
    build_table(&stable_range(2), &ExtractOptions::default()).unwrap()
}

fn augmented_table() -> IntersectionTable {
    let mut t = base_table();
    t.merge(&build_table(&[(1, 3)], &ExtractOptions::default()).unwrap());
    t
}

fn perturbed(t: &IntersectionTable, g: u32, d: &[u32]) -> IntersectionTable {
    let mut p = t.clone();
    let v = p.get(g, d).cloned().unwrap_or_else(Rational::zero);
    p.insert(g, d, v + int(1));
    p
}

#[test]
fn range_is_the_four_small_fragments() {
    assert_eq!(stable_range(2), vec![(0, 3), (0, 4), (1, 1), (1, 2)]);
}

#[test]
fn pipeline_table_satisfies_kdv_and_string() {
    let t = base_table();
    let f = assemble_free_energy(&t, 1, TIMES, CAP);
    provenance_audit(&f, &t).unwrap();
    let k = kdv_residual(&f);
    assert!(k.passes(), "{:?}", k.to_json());
    assert!(k.count(CoefficientStatus::VerifiedZero) > 0);
    let s = string_residual(&f);
    assert!(s.passes(), "{:?}", s.to_json());
    assert!(s.count(CoefficientStatus::VerifiedZero) > 0);
}

#[test]
fn string_coefficient_identities() {
    let t = base_table();
    assert_eq!(t.get(0, &[1, 0, 0, 0]), t.get(0, &[0, 0, 0]));
    assert_eq!(t.get(1, &[2, 0]), t.get(1, &[1]));
    let f = assemble_free_energy(&t, 1, TIMES, CAP);
    let s = string_residual(&f);
    // coefficient of t_0^2 t_1 carries <τ_0^3 τ_1> − <τ_0^3>
    let e = s.entry(&[2, 1, 0]).unwrap();
    assert_eq!(e.status, CoefficientStatus::VerifiedZero);
    // coefficient of t_2 carries <τ_0 τ_2>_1 − <τ_1>_1
    let e = s.entry(&[0, 0, 1]).unwrap();
    assert_eq!(e.status, CoefficientStatus::VerifiedZero);
}

#[test]
fn tau0_cubed_mutation_moves_the_t0_coefficient() {
    // the constant term pairs <τ_0^3> only with the structurally zero t_0^2 coefficient
    let t = base_table();
    let mut p = t.clone();
    p.insert(0, &[0, 0, 0], int(2));
    let k = kdv_residual(&assemble_free_energy(&p, 1, TIMES, CAP));
    let c = k.entry(&[0, 0, 0]).unwrap();
    assert_eq!(c.status, CoefficientStatus::VerifiedZero);
    let e = k.entry(&[1, 0, 0]).unwrap();
    assert_eq!(e.status, CoefficientStatus::Nonzero);
    // <τ_0^3 τ_1> − <τ_0^3>^2 = 1 − 4
    assert_eq!(e.value, GaussianRational::from_rational(&int(-3)));
}

fn flips(t: &IntersectionTable, times: usize, cap: u32) -> (bool, bool) {
    let f = assemble_free_energy(t, 1, times, cap);
    (!kdv_residual(&f).passes(), !string_residual(&f).passes())
}

#[test]
fn every_entry_is_mutation_sensitive_in_some_residual() {
    let t = augmented_table();
    for (g, n) in stable_range(2) {
        for ((eg, d), _) in t.entries().iter().filter(|((eg, d), _)| *eg == g && d.len() == n as usize) {
            let (k, s) = flips(&perturbed(&t, *eg, d), TIMES, CAP);
            assert!(k || s, "perturbing ({eg}, {d:?}) went unnoticed");
        }
    }
}

#[test]
fn kdv_alone_sees_only_genus_zero_entries_of_the_small_range() {
    // U = F_{t0 t0} annihilates t_1, t_0 t_2 and t_1^2, so those genus-one entries
    // cannot move any KdV coefficient when the table stops at n + 2g − 2 = 2
    let t = base_table();
    let mut detected = Vec::new();
    for ((g, d), _) in t.entries() {
        if flips(&perturbed(&t, *g, d), TIMES, CAP).0 {
            detected.push((*g, d.clone()));
        }
    }
    assert_eq!(detected, vec![(0, vec![0, 0, 0]), (0, vec![1, 0, 0, 0])]);
}

#[test]
fn contributor_lists_cover_true_dependencies() {
    // perturbing one coefficient of F must only move residual coefficients that list it
    let t = base_table();
    let f = assemble_free_energy(&t, 1, TIMES, CAP);
    let layout = f.layout().clone();
    let base_k = kdv_residual(&f);
    let base_s = string_residual(&f);
    for m in tauwork::series::monomials_up_to(&layout, CAP as u64) {
        let mut g = f.clone();
        g.series.add_term(m.clone(), GaussianRational::from_rational(&rat(3, 7)));
        for (base, new) in [(&base_k, kdv_residual(&g)), (&base_s, string_residual(&g))] {
            for (a, b) in base.entries.iter().zip(&new.entries) {
                if a.value != b.value {
                    assert!(a.contributors.contains(&m), "{} coefficient {:?} depends on {m:?}", base.kind, a.monomial);
                }
            }
        }
    }
}

#[test]
fn verified_zero_only_with_known_contributors() {
    let t = base_table();
    let f = assemble_free_energy(&t, 1, TIMES, CAP);
    for r in [kdv_residual(&f), string_residual(&f)] {
        for e in &r.entries {
            if e.status == CoefficientStatus::VerifiedZero {
                assert!(e.contributors.iter().all(|c| f.coverage(c).is_known()));
            }
        }
    }
}

#[test]
fn genus_one_kdv_relation_with_larger_table() {
    // with (1,3) and (0,5) present, the genus-one part of KdV becomes covered
    let mut t = augmented_table();
    t.merge(&build_table(&[(0, 5)], &ExtractOptions::default()).unwrap());
    let f = assemble_free_energy(&t, 1, TIMES, CAP);
    let k = kdv_residual(&f);
    assert!(k.passes());
    let s = string_residual(&f);
    assert!(s.passes());
    assert!(k.count(CoefficientStatus::VerifiedZero) > kdv_residual(&assemble_free_energy(&base_table(), 1, TIMES, CAP)).count(CoefficientStatus::VerifiedZero));
}

#[test]
fn series_json_of_free_energy() {
    let f = assemble_free_energy(&base_table(), 1, TIMES, CAP);
    let layout = Arc::new(SeriesLayout::kdv_times(TIMES, CAP));
    let back = Series::from_json_terms(&layout, &f.series.to_json_terms()).unwrap();
    assert_eq!(back, f.series);
}
