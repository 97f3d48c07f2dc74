//! Principal branch of the Lambert W function on `x ≥ 0`.

use crate::scalar::Real;

const MAX_ITER: usize = 64;

/// `W(x)` with `W(x)·e^{W(x)} = x`, by Halley iteration.
///
/// Panics on negative or non-finite input.
pub fn lambert_w<T: Real>(x: T) -> T {
    assert!(
        x >= T::zero() && x.is_finite(),
        "lambert_w needs a finite x >= 0, got {x}"
    );
    if x == T::zero() {
        return T::zero();
    }
    let one = T::one();
    let two = T::of(2.0);
    // ln(1+x) is within a factor of two of W on [0, ∞).
    let mut w = if x > T::E() {
        let l = x.ln();
        l - l.ln()
    } else {
        x.ln_1p() * T::of(0.6)
    };
    let tol = T::epsilon() * T::of(4.0);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + one;
        let step = f / (ew * wp1 - (w + two) * f / (two * wp1));
        w -= step;
        if step.abs() <= tol * (one + w.abs()) {
            break;
        }
    }
    w
}
