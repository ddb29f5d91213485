//! The iterated-logarithm ladder `(L_{-1}, L_0, …, L_k) = (e^t, t, ln t, …)`.

use super::ClassError;

/// `E_k(0)`: `E_{-1}(0) = -∞`, `E_0(0) = 0`, `E_{k+1}(0) = exp(E_k(0))`.
///
/// `L_k` is positive exactly on `(E_k(0), ∞)`.
pub fn iterated_exp_zero(k: i32) -> f64 {
    if k < 0 {
        return f64::NEG_INFINITY;
    }
    (0..k).fold(0.0, |acc, _| f64::exp(acc))
}

/// Ladder values at one time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderPoint {
    pub t: f64,
    depth: i32,
    /// `values[j + 1] = L_j(t)` for `-1 ≤ j ≤ depth`. `values[0] = e^t` may
    /// overflow to infinity; evaluation never reads it.
    values: Vec<f64>,
    /// `logs[j + 1] = ln L_j(t) = L_{j+1}(t)`.
    logs: Vec<f64>,
}

impl LadderPoint {
    pub fn depth(&self) -> i32 {
        self.depth
    }

    /// `L_j(t)` for `-1 ≤ j ≤ depth`.
    pub fn value(&self, j: i32) -> f64 {
        self.values[(j + 1) as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `ln L_j(t)`, computed without forming `e^t`.
    pub fn log_value(&self, j: i32) -> f64 {
        self.logs[(j + 1) as usize]
    }
}

/// Evaluate `(L_{-1}(t), …, L_k(t))`. Requires `t > E_k(0)` so that every
/// component is strictly positive.
pub fn ladder_eval(depth: i32, t: f64) -> Result<LadderPoint, ClassError> {
    assert!(depth >= -1, "ladder depth must be >= -1");
    let bound = iterated_exp_zero(depth);
    if !(t > bound) || !t.is_finite() {
        return Err(ClassError::Domain { depth, t, bound });
    }
    let mut values = Vec::with_capacity(depth as usize + 2);
    values.push(t.exp());
    let mut current = t;
    for _ in 0..=depth {
        values.push(current);
        current = current.ln();
    }
    // `current` now holds L_{depth+1}(t) = ln L_depth(t).
    let mut logs: Vec<f64> = values[1..].to_vec();
    logs.push(current);
    Ok(LadderPoint {
        t,
        depth,
        values,
        logs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn iterated_exponentials() {
        assert_eq!(iterated_exp_zero(0), 0.0);
        assert_eq!(iterated_exp_zero(1), 1.0);
        assert_eq!(iterated_exp_zero(2), E);
        assert!((iterated_exp_zero(3) - E.powf(E)).abs() < 1e-12);
    }

    #[test]
    fn ladder_examples() {
        let p = ladder_eval(1, E).unwrap();
        assert!((p.value(-1) - E.powf(E)).abs() < 1e-12);
        assert_eq!(p.value(0), E);
        assert!((p.value(1) - 1.0).abs() < 1e-15);

        assert!(matches!(ladder_eval(2, E), Err(ClassError::Domain { .. })));

        let p = ladder_eval(0, 3.0).unwrap();
        assert!((p.value(-1) - 3f64.exp()).abs() < 1e-12);
        assert_eq!(p.value(0), 3.0);
        assert_eq!(p.log_value(-1), 3.0);
        assert!((p.log_value(0) - 3f64.ln()).abs() < 1e-16);
    }

    #[test]
    fn components_increase_in_t() {
        let mut prev = ladder_eval(3, 4e6).unwrap();
        for i in 1..50 {
            let t = 4e6 * 1.3f64.powi(i);
            let cur = ladder_eval(3, t).unwrap();
            for j in 0..=3 {
                assert!(cur.value(j) > prev.value(j));
            }
            prev = cur;
        }
    }
}
