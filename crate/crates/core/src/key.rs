//! Hashable keys for complex exponents, snapped to a fixed grid.

use crate::linalg::C64;

/// Grid spacing used to identify exponents that differ only by rounding.
pub(crate) const KEY_GRID: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct ExponentKey {
    re: i64,
    im: i64,
}

impl ExponentKey {
    pub(crate) fn of(z: C64) -> Self {
        ExponentKey {
            re: snap(z.re),
            im: snap(z.im),
        }
    }

    pub(crate) fn conj(self) -> Self {
        ExponentKey {
            re: self.re,
            im: -self.im,
        }
    }

    pub(crate) fn is_real(self) -> bool {
        self.im == 0
    }

    pub(crate) fn im_sign(self) -> i64 {
        self.im.signum()
    }
}

fn snap(x: f64) -> i64 {
    (x / KEY_GRID).round() as i64
}

/// Key for a real quantity (frequencies, real exponents).
pub(crate) fn real_key(x: f64) -> i64 {
    snap(x)
}
