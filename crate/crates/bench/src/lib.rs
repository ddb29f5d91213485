//! Problems shared by the benchmarks.

use asymptotics_core::funclasses::MapEntry;
use asymptotics_core::linalg::{rmat, rvec, C64};
use asymptotics_core::realify::complexify_map;
use asymptotics_core::{
    ExpPolySum, ExponentVector, LogPowerSum, Mode, MultiLinearMap, ProblemSpec,
};

/// `y' = -y + y² + 1/t`.
pub fn riccati(order: usize) -> ProblemSpec {
    ProblemSpec::builder(rmat(&[&[1.0]]), Mode::Power)
        .nonlinearity(MultiLinearMap::scalar_power(2))
        .nonlinearity(MultiLinearMap::scalar_power(3))
        .forcing_log_power(
            1.0,
            LogPowerSum::scalar_monomial(&[0.0, -1.0], C64::new(1.0, 0.0)),
        )
        .order(order)
        .build()
        .expect("valid problem")
}

/// `y' = -2y + y² + e^{-t}`, resonant at rate 2.
pub fn resonant(order: usize) -> ProblemSpec {
    ProblemSpec::builder(rmat(&[&[2.0]]), Mode::Exponential)
        .nonlinearity(MultiLinearMap::scalar_power(2))
        .forcing_exp(
            1.0,
            ExpPolySum::scalar(C64::new(-1.0, 0.0), &[C64::new(1.0, 0.0)]),
        )
        .order(order)
        .build()
        .expect("valid problem")
}

/// Damped rotation forced by an oscillating log-power term, `m* = 1`.
pub fn oscillating_log(order: usize) -> ProblemSpec {
    let g = complexify_map(
        &MultiLinearMap::new(
            2,
            2,
            vec![
                MapEntry {
                    output: 0,
                    inputs: vec![0, 1],
                    value: C64::new(1.0, 0.0),
                },
                MapEntry {
                    output: 1,
                    inputs: vec![0, 0],
                    value: C64::new(1.0, 0.0),
                },
            ],
        )
        .expect("valid map"),
    )
    .expect("real map");
    let f = &LogPowerSum::monomial(
        ExponentVector::new(vec![
            C64::new(0.0, 2.0),
            C64::new(0.0, 0.0),
            C64::new(-0.5, 3.0),
        ]),
        rvec(&[0.5, 0.0]),
    ) + &LogPowerSum::monomial(
        ExponentVector::new(vec![
            C64::new(0.0, -2.0),
            C64::new(0.0, 0.0),
            C64::new(-0.5, -3.0),
        ]),
        rvec(&[0.5, 0.0]),
    );
    ProblemSpec::builder(rmat(&[&[2.0, 1.0], &[-1.0, 2.0]]), Mode::Log { m_star: 1 })
        .nonlinearity(g)
        .forcing_log_power(0.5, f)
        .order(order)
        .build()
        .expect("valid problem")
}
