mod common;

use asymptotics_core::engine::{expand, symbolic_defect, LadderConfig};
use asymptotics_core::funclasses::{ladder_eval, MapEntry};
use asymptotics_core::linalg::{rmat, C64};
use asymptotics_core::realify::{
    check_conjugation_symmetry, from_real_logpower, from_real_spoly, to_real_logpower,
    to_real_spoly,
};
use asymptotics_core::serial::{from_json, to_json, SumRecord};
use asymptotics_core::{ExpPolySum, Mode, MultiLinearMap, ProblemSpec, TermValue};
use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quadratic(n: usize, rng: &mut ChaCha8Rng) -> MultiLinearMap {
    let entries = (0..n)
        .map(|i| MapEntry {
            output: i,
            inputs: vec![rng.random_range(0..n), rng.random_range(0..n)],
            value: C64::new(rng.random_range(-1.0..1.0), 0.0),
        })
        .collect();
    MultiLinearMap::new(2, n, entries).unwrap()
}

#[test]
fn exponential_orders_solve_their_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..10 {
        let n = rng.random_range(1..=3);
        let a = rand_real_stable(&mut rng, n, 1.0);
        let f = rand_exp_poly(&mut rng, n, -0.7);
        let spec = ProblemSpec::builder(a, Mode::Exponential)
            .nonlinearity(quadratic(n, &mut rng))
            .forcing_exp(0.7, f)
            .order(5)
            .build()
            .unwrap();
        let exp = expand(&spec).unwrap();
        for k in 1..=exp.order() {
            let term = exp.term(k).unwrap();
            let d = symbolic_defect(&spec, &exp, k).unwrap();
            assert!(d.max_coeff_norm() <= 1e-11 * term.value.max_coeff_norm().max(1.0));
            assert!(term.value.as_exp().unwrap().in_class(-term.mu));
        }
    }
}

#[test]
fn log_orders_stay_real_and_in_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..6 {
        let n = rng.random_range(1..=2);
        let a = rand_real_stable(&mut rng, n, 1.5);
        let f = symmetric_log_power(&mut rng, n, 2, 0.5);
        let spec = ProblemSpec::builder(a, Mode::Log { m_star: 1 })
            .nonlinearity(quadratic(n, &mut rng))
            .forcing_log_power(0.5, f)
            .order(3)
            .build()
            .unwrap();
        let exp = expand(&spec).unwrap();
        for k in 1..=3 {
            let term = exp.term(k).unwrap();
            let q = term.value.as_log_power().unwrap();
            assert!(check_conjugation_symmetry(q), "order {k}");
            assert!(q.in_class(1, -term.mu));
            let d = symbolic_defect(&spec, &exp, k).unwrap();
            assert!(d.max_coeff_norm() <= 1e-11 * q.max_coeff_norm().max(1.0));
            let scaled = q.mul_ladder_power(1, C64::new(term.mu, 0.0)).unwrap();
            let real = to_real_logpower(&scaled).unwrap();
            assert!(real.in_class(1));
            let back = from_real_logpower(&real).unwrap();
            let depth = back.depth().max(scaled.depth());
            assert!(back
                .embed_depth(depth)
                .unwrap()
                .approx_eq(&scaled.embed_depth(depth).unwrap(), 1e-12));
        }
    }
}

#[test]
fn forcing_shift_moves_every_rate() {
    // Multiplying the forcing by e^{iωt} keeps every rate; the terms only
    // pick up frequencies in ωℤ.
    let a = rmat(&[&[2.0]]);
    let g = MultiLinearMap::scalar_power(2);
    let f = ExpPolySum::scalar(C64::new(-1.0, 0.0), &[C64::new(1.0, 0.0)]);
    let base = ProblemSpec::builder(a.clone(), Mode::Exponential)
        .nonlinearity(g.clone())
        .forcing_exp(1.0, f.clone())
        .order(4)
        .build()
        .unwrap();
    let w = 0.75;
    let shifted = ProblemSpec::builder(a, Mode::Exponential)
        .nonlinearity(g)
        .forcing_exp(1.0, f.shift(C64::new(0.0, w)))
        .order(4)
        .build()
        .unwrap();
    let (e1, e2) = (expand(&base).unwrap(), expand(&shifted).unwrap());
    for k in 1..=4 {
        assert_eq!(e1.term(k).unwrap().mu, e2.term(k).unwrap().mu);
        let y = e2.term(k).unwrap().value.as_exp().unwrap();
        for t in y.terms() {
            let m = (t.exponent.im / w).round();
            assert!((t.exponent.im - m * w).abs() < 1e-12);
        }
    }
}

#[test]
fn ladder_override_is_respected() {
    let spec = ProblemSpec::builder(rmat(&[&[1.0]]), Mode::Power)
        .nonlinearity(MultiLinearMap::scalar_power(2))
        .forcing(
            1.0,
            TermValue::LogPower(asymptotics_core::LogPowerSum::scalar_monomial(
                &[0.0, -1.0],
                C64::new(1.0, 0.0),
            )),
        )
        .ladder(LadderConfig {
            base: Some(vec![0.5]),
            ..LadderConfig::default()
        })
        .order(4)
        .build()
        .unwrap();
    let exp = expand(&spec).unwrap();
    let rates: Vec<f64> = exp.terms().iter().map(|t| t.mu).collect();
    assert_eq!(rates, [0.5, 1.0, 1.5, 2.0]);
    assert!(exp.term(1).unwrap().value.is_zero());
    let q = exp.term(2).unwrap().value.as_log_power().unwrap();
    assert!((q.eval(10.0).unwrap()[0].re - 0.1).abs() < 1e-15);
}

#[test]
fn log_power_decays_faster_than_its_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let p = symmetric_log_power(&mut rng, 2, 2, 0.5);
    for delta in [0.5, 1.0] {
        let ratios: Vec<f64> = geometric(1e3, 1e300, 60)
            .into_iter()
            .map(|t| {
                let point = ladder_eval(2, t).unwrap();
                p.eval_at(&point).norm() / point.value(1).powf(0.5 + delta)
            })
            .collect();
        let tail = &ratios[ratios.len() - 10..];
        let peak = tail.iter().copied().fold(0.0, f64::max);
        assert!(
            tail.last().unwrap() < &(0.5 * peak.max(ratios[0])),
            "{tail:?}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sums_survive_json(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let re = -rng.random_range(0.0..3.0);
        let s = rand_exp_poly(&mut rng, 2, re);
        let record = SumRecord::from(&s);
        let back: SumRecord = from_json(&to_json(&record)).unwrap();
        prop_assert_eq!(&back, &record);
        let value = back.to_term_value().unwrap();
        prop_assert_eq!(value.as_exp().unwrap(), &s);

        let p = symmetric_log_power(&mut rng, 2, 1, 0.5);
        let back: SumRecord = from_json(&to_json(&SumRecord::from(&p))).unwrap();
        let value = back.to_term_value().unwrap();
        prop_assert_eq!(value.as_log_power().unwrap(), &p);
    }

    #[test]
    fn real_spoly_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = rand_exp_poly(&mut rng, 2, 0.0);
        let sym = &s + &s.conj();
        let real = to_real_spoly(&sym).unwrap();
        prop_assert!(from_real_spoly(&real).approx_eq(&sym, 1e-13));
        for t in [0.0, 0.7, 3.1] {
            let z = sym.eval(t);
            let x = real.eval(t);
            for (a, b) in z.iter().zip(x.iter()) {
                prop_assert!((a.re - b).abs() < 1e-12 * (1.0 + a.norm()));
                prop_assert!(a.im.abs() < 1e-12 * (1.0 + a.norm()));
            }
        }
    }
}
