mod common;

use asymptotics_core::funclasses::{ladder_eval, MapEntry};
use asymptotics_core::linalg::{ComplexVec, C64};
use asymptotics_core::realify::check_conjugation_symmetry;
use asymptotics_core::{ExpPolySum, ExponentVector, LogPowerSum, LogPowerTerm, MultiLinearMap};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_bilinear(rng: &mut ChaCha8Rng, n: usize) -> MultiLinearMap {
    let entries = (0..2 * n)
        .map(|_| MapEntry {
            output: rng.random_range(0..n),
            inputs: vec![rng.random_range(0..n), rng.random_range(0..n)],
            value: rand_c(rng, 1.0),
        })
        .collect();
    MultiLinearMap::new(2, n, entries).unwrap()
}

#[test]
fn products_evaluate_pointwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let n = rng.random_range(1..=3);
        let g = rand_bilinear(&mut rng, n);
        let a = rand_exp_poly(&mut rng, n, -0.5);
        let b = rand_exp_poly(&mut rng, n, -1.0);
        let ab = ExpPolySum::mul_apply(&g, &[&a, &b]).unwrap();
        let p = symmetric_log_power(&mut rng, n, 1, 0.5);
        let q = symmetric_log_power(&mut rng, n, 2, 1.0);
        let pq = LogPowerSum::mul_apply(&g, &[&p, &q]).unwrap();
        for t in geometric(20.0, 2e3, 20) {
            let direct = g.apply(&[&a.eval(t), &b.eval(t)]).unwrap();
            assert!((ab.eval(t) - &direct).norm() <= 1e-11 * direct.norm().max(1e-300));
            let direct = g
                .apply(&[&p.eval(t).unwrap(), &q.eval(t).unwrap()])
                .unwrap();
            assert!((pq.eval(t).unwrap() - &direct).norm() <= 1e-11 * direct.norm().max(1e-300));
        }
    }
}

#[test]
fn real_data_keeps_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..20 {
        let n = rng.random_range(1..=3);
        let a = rand_real_stable(&mut rng, n, 1.5);
        let depth = rng.random_range(0..=2);
        let p = symmetric_log_power(&mut rng, n, depth, 0.5);
        assert!(check_conjugation_symmetry(&p));
        let z = p.op_za(&a).unwrap();
        assert!(check_conjugation_symmetry(&z));
        assert!(check_conjugation_symmetry(&p.op_r().unwrap()));
        assert!(check_conjugation_symmetry(&p.time_derivative().unwrap()));
        assert!(z.conj().approx_eq(&p.conj().op_za(&a).unwrap(), 1e-13));
        let t = 50.0;
        let im = z
            .eval(t)
            .unwrap()
            .iter()
            .map(|v| v.im.abs())
            .fold(0.0, f64::max);
        assert!(im < 1e-13, "{im}");
    }
}

#[test]
fn ladder_powers_shift_exponents() {
    let p = LogPowerSum::scalar_monomial(&[0.0, -1.0, 0.5], C64::new(3.0, 0.0));
    let q = p.mul_ladder_power(1, C64::new(-0.5, 0.0)).unwrap();
    let point = ladder_eval(1, 100.0).unwrap();
    let expected = p.eval_at(&point)[0] / point.value(1).sqrt();
    assert!((q.eval_at(&point)[0] - expected).norm() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_matches_difference_quotient(
        exps in prop::collection::vec((-2.0f64..2.0, -1.0f64..1.0), 3),
        omega in -1.0f64..1.0,
        t in 30.0f64..300.0,
    ) {
        let mut e: Vec<C64> = vec![C64::new(0.0, omega)];
        e.extend(exps.iter().map(|&(re, im)| C64::new(re, im)));
        let p = LogPowerSum::monomial(
            ExponentVector::new(e),
            ComplexVec::from_element(1, C64::new(1.0, 0.5)),
        );
        let h = 1e-3;
        let fd = (p.eval(t + h).unwrap() - p.eval(t - h).unwrap()) / C64::from(2.0 * h);
        let d = p.time_derivative().unwrap().eval(t).unwrap();
        prop_assert!((&d - &fd).norm() <= 1e-6 * d.norm().max(1e-12));
    }

    #[test]
    fn zero_shift_inverts_shifted_operator(re in 0.5f64..3.0, w in -3.0f64..3.0, xi in -2.0f64..2.0) {
        let a = asymptotics_core::linalg::rmat(&[&[re, 0.5], &[-0.5, re]]);
        let p = LogPowerSum::canonicalize(
            2,
            0,
            [LogPowerTerm::new(
                ExponentVector::new(vec![C64::new(0.0, w), C64::new(-1.0, 0.0)]),
                ComplexVec::from_vec(vec![C64::new(xi, 0.0), C64::new(1.0, -xi)]),
            )],
        )
        .unwrap();
        let back = p.op_za(&a).unwrap().apply_shifted(&a);
        prop_assert!(back.approx_eq(&p, 1e-13));
    }
}
