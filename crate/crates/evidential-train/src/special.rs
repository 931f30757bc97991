//! Scalar special functions backing the evidential losses.
//!
//! `digamma` and `lgamma` use a recurrence shift up to `x >= 6` followed by
//! the asymptotic (Bernoulli) series, which keeps relative error near 1e-13
//! over `[1e-3, 1e14]` without external dependencies. Arguments `x <= 0`
//! (including NaN) are outside the domain and return NaN.

use sl_core::Real;

/// Evidence activations saturate at this value.
pub const EVIDENCE_CAP: f64 = 1e13;

/// Below this the argument is shifted up by the recurrence before the
/// asymptotic series is applied.
const SHIFT_THRESHOLD: f64 = 6.0;

/// Digamma ψ(x) for x > 0; NaN otherwise.
pub fn digamma<T: Real>(x: T) -> T {
    if x.is_nan() || x <= T::zero() {
        return T::nan();
    }
    let threshold = T::num(SHIFT_THRESHOLD);
    let mut shift = T::zero();
    let mut y = x;
    while y < threshold {
        // ψ(y) = ψ(y + 1) − 1/y
        shift += y.recip();
        y += T::one();
    }
    let w = (y * y).recip();
    let series = w * (T::num(1.0 / 12.0)
        - w * (T::num(1.0 / 120.0)
            - w * (T::num(1.0 / 252.0)
                - w * (T::num(1.0 / 240.0)
                    - w * (T::num(1.0 / 132.0)
                        - w * (T::num(691.0 / 32760.0) - w * T::num(1.0 / 12.0)))))));
    y.ln() - (y + y).recip() - series - shift
}

/// Log-gamma ln Γ(x) for x > 0; NaN otherwise.
pub fn lgamma<T: Real>(x: T) -> T {
    if x.is_nan() || x <= T::zero() {
        return T::nan();
    }
    let threshold = T::num(SHIFT_THRESHOLD);
    let mut product = T::one();
    let mut y = x;
    while y < threshold {
        // ln Γ(y) = ln Γ(y + 1) − ln y; the shifted factors never overflow
        // because at most six of them are below the threshold.
        product *= y;
        y += T::one();
    }
    let w = (y * y).recip();
    let series = y.recip()
        * (T::num(1.0 / 12.0)
            - w * (T::num(1.0 / 360.0)
                - w * (T::num(1.0 / 1260.0)
                    - w * (T::num(1.0 / 1680.0)
                        - w * (T::num(1.0 / 1188.0)
                            - w * (T::num(691.0 / 360360.0) - w * T::num(1.0 / 156.0)))))));
    let half_ln_two_pi = T::num(0.918_938_533_204_672_7);
    (y - T::num(0.5)) * y.ln() - y + half_ln_two_pi + series - product.ln()
}

/// Trigamma ψ'(x) for x > 0; NaN otherwise. Used as the backward rule for
/// digamma nodes on the tape.
pub fn trigamma<T: Real>(x: T) -> T {
    if x.is_nan() || x <= T::zero() {
        return T::nan();
    }
    let threshold = T::num(SHIFT_THRESHOLD);
    let mut shift = T::zero();
    let mut y = x;
    while y < threshold {
        shift += (y * y).recip();
        y += T::one();
    }
    let w = (y * y).recip();
    let series = w / y
        * (T::num(1.0 / 6.0)
            - w * (T::num(1.0 / 30.0)
                - w * (T::num(1.0 / 42.0)
                    - w * (T::num(1.0 / 30.0)
                        - w * (T::num(5.0 / 66.0)
                            - w * (T::num(691.0 / 2730.0) - w * T::num(7.0 / 6.0)))))));
    y.recip() + w * T::num(0.5) + series + shift
}

/// Capped exponential activation f(x) = cap / (1 + cap·e^(−x)).
///
/// Equals cap·σ(x − ln cap), evaluated through a branch-stable sigmoid so it
/// never overflows: approximately e^x well below the cap, saturating at the
/// cap for large x. Output is always in (0, cap).
pub fn capped_exp<T: Real>(x: T) -> T {
    let cap = T::num(EVIDENCE_CAP);
    cap * sigmoid(x - cap.ln())
}

/// Derivative of [`capped_exp`]: f'(x) = f(x)·(1 − f(x)/cap).
pub fn capped_exp_derivative<T: Real>(x: T) -> T {
    let f = capped_exp(x);
    f * (T::one() - f / T::num(EVIDENCE_CAP))
}

fn sigmoid<T: Real>(t: T) -> T {
    if t >= T::zero() {
        ((-t).exp() + T::one()).recip()
    } else {
        let e = t.exp();
        e / (e + T::one())
    }
}
