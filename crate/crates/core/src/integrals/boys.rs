//! The Boys function F_m(T) = ∫₀¹ t^{2m} exp(−T t²) dt.

use std::f64::consts::PI;

/// Above this argument the asymptotic form is used; erfc(√35) ≈ 1e−17 so the
/// neglected tail is below double precision.
const ASYMPTOTIC_SWITCH: f64 = 35.0;

/// Fills `out[m]` with F_m(t) for m = 0..out.len().
pub fn boys_array(t: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    let m_max = n - 1;
    if t < 1e-14 {
        for (m, v) in out.iter_mut().enumerate() {
            *v = 1.0 / (2 * m + 1) as f64 - t / (2 * m + 3) as f64;
        }
        return;
    }
    let et = (-t).exp();
    if t > ASYMPTOTIC_SWITCH {
        out[0] = 0.5 * (PI / t).sqrt();
        for m in 0..m_max {
            out[m + 1] = ((2 * m + 1) as f64 * out[m] - et) / (2.0 * t);
        }
        return;
    }
    // Series for the highest order, then stable downward recursion.
    let mut term = 1.0 / (2 * m_max + 1) as f64;
    let mut sum = term;
    let mut k = 1;
    loop {
        term *= 2.0 * t / (2 * m_max + 2 * k + 1) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
        k += 1;
    }
    out[m_max] = et * sum;
    for m in (0..m_max).rev() {
        out[m] = (2.0 * t * out[m + 1] + et) / (2 * m + 1) as f64;
    }
}

pub fn boys(m: usize, t: f64) -> f64 {
    let mut buf = vec![0.0; m + 1];
    boys_array(t, &mut buf);
    buf[m]
}
