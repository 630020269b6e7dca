mod common;

use padic_lab::hensel::{
    jacobian_rank_mod_p, lift_count, lift_points, solutions_mod_p, solve_linear_mod_p, solve_system,
    solve_system_exhaustive, PolySystem, Polynomial,
};
use padic_lab::ring::vector::all_vectors;
use padic_lab::{DiagonalForm, Modulus};
use proptest::prelude::*;

fn small_form() -> impl Strategy<Value = (DiagonalForm, u64, i64)> {
    (
        prop::sample::select(vec![3u64, 5, 7]),
        prop::collection::vec((1i64..6, 2u32..=3), 1..=3),
        0i64..20,
    )
        .prop_filter_map("form is valid", |(p, terms, j)| {
            let (c, e): (Vec<i64>, Vec<u32>) = terms.into_iter().unzip();
            DiagonalForm::new(c, e).ok().map(|f| (f, p, j))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lift_counts_match_brute_force((form, p, j) in small_form(), k in 1u32..=2) {
        let sys = PolySystem::from_form(&form, j);
        let n = form.arity();
        prop_assume!((p as u128).pow((k + 1) * n as u32) <= 1 << 16);
        for y in solutions_mod_p(&sys, p).unwrap() {
            let count = lift_count(&sys, p, &y, 1, k).unwrap();
            let listed = lift_points(&sys, p, &y, 1, k).unwrap();
            let jm = j.rem_euclid((p as i64).pow(k + 1)) as u64;
            prop_assert_eq!(count, common::lifts(&form, p, jm, &y, 1, k));
            prop_assert_eq!(listed.len() as u128, count);
            let rank = jacobian_rank_mod_p(&sys, &y, p).unwrap();
            if rank == sys.len() {
                prop_assert_eq!(count, (p as u128).pow(k * (n - rank) as u32));
            }
        }
    }

    #[test]
    fn lifted_solutions_equal_exhaustive_search((form, p, j) in small_form(), r in 1u32..=3) {
        let m = Modulus::new(p, r).unwrap();
        prop_assume!(m.ambient_size(form.arity()) <= 3u128.pow(6).max(7u128.pow(3)));
        let sys = PolySystem::from_form(&form, j);
        prop_assert_eq!(solve_system(&sys, &m).unwrap(), solve_system_exhaustive(&sys, &m).unwrap());
    }
}

#[test]
fn two_equation_system() {
    // x^2 + y^2 + z^2 = 1, x + 2y = 3
    let sphere = Polynomial::new(3, [(1, vec![2, 0, 0]), (1, vec![0, 2, 0]), (1, vec![0, 0, 2]), (-1, vec![0, 0, 0])]).unwrap();
    let plane = Polynomial::new(3, [(1, vec![1, 0, 0]), (2, vec![0, 1, 0]), (-3, vec![0, 0, 0])]).unwrap();
    let sys = PolySystem::new(vec![sphere, plane]).unwrap();
    for r in 1..=3 {
        let m = Modulus::new(5, r).unwrap();
        let fast = solve_system(&sys, &m).unwrap();
        assert_eq!(fast, solve_system_exhaustive(&sys, &m).unwrap());
        for x in fast.points() {
            assert!(sys.vanishes(&m, &x));
        }
    }
}

#[test]
fn linear_solver_enumerates_affine_space() {
    let p = 5;
    let a = vec![vec![1, 2, 3], vec![2, 4, 2]];
    let b = vec![4, 3];
    let sols = solve_linear_mod_p(&a, &b, p).unwrap();
    let mut brute: Vec<Vec<u64>> = all_vectors(p, 3)
        .filter(|x| a.iter().zip(&b).all(|(row, &bi)| row.iter().zip(x).map(|(c, v)| c * v).sum::<u64>() % p == bi))
        .collect();
    let mut listed = sols.enumerate(p);
    listed.sort();
    brute.sort();
    assert_eq!(listed, brute);
    assert_eq!(sols.size(p), brute.len() as u128);
    assert!(solve_linear_mod_p(&[vec![1, 1], vec![2, 2]], &[1, 3], p).is_none());
}

#[test]
fn derivative_of_monomials() {
    let f = Polynomial::new(2, [(3, vec![2, 1]), (5, vec![0, 4])]).unwrap();
    let m = Modulus::new(7, 2).unwrap();
    let dx = f.derivative(0);
    let dy = f.derivative(1);
    assert_eq!(dx.eval(&m, &[2, 3]), m.reduce_i64(6 * 2 * 3));
    assert_eq!(dy.eval(&m, &[2, 3]), m.reduce_i64(3 * 4 + 20 * 27));
}
