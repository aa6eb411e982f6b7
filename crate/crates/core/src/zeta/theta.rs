//! The Riemann–Siegel theta function.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Coefficients of t^{-(2k-1)}, k = 1..5, in the asymptotic expansion of
/// theta: (1 - 2^{1-2k}) |B_2k| / (4k (2k-1)).
const STIRLING_THETA: [f64; 5] = [
    1.0 / 48.0,
    7.0 / 5760.0,
    31.0 / 80640.0,
    127.0 / 430080.0,
    511.0 / 1216512.0,
];

/// B_2k / (2k (2k-1)), k = 1..8, for the complex Stirling series of ln Γ.
const STIRLING_LNGAMMA: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

/// |w| beyond which the Stirling series for ln Γ(w) is used directly.
const LNGAMMA_SHIFT_RADIUS: f64 = 15.0;

/// Asymptotic expansion
/// (t/2) ln(t/2π) − t/2 − π/8 + 1/(48t) + 7/(5760t³) + … through t⁻⁹.
pub(crate) fn theta_asymptotic(t: f64) -> f64 {
    let inv = 1.0 / t;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in STIRLING_THETA.iter().rev() {
        series = series * inv2 + c;
    }
    0.5 * t * (t / (2.0 * PI)).ln() - 0.5 * t - PI / 8.0 + series * inv
}

/// Principal-branch continuous ln Γ(z) for Re z > 0.
///
/// The argument is shifted up by the recurrence ln Γ(z) = ln Γ(z+m) − Σ ln(z+k)
/// until |z+m| ≥ 15, where the Stirling series is accurate to ~1e-17.
pub(crate) fn ln_gamma(z: Complex64) -> Complex64 {
    debug_assert!(z.re > 0.0);
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.norm() < LNGAMMA_SHIFT_RADIUS {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for c in STIRLING_LNGAMMA.iter().rev() {
        series = series * inv2 + c;
    }
    let stirling = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series * inv;
    stirling - shift
}

/// Definition: −(t/2) ln π + Im ln Γ(1/4 + it/2).
pub(crate) fn theta_lngamma(t: f64) -> f64 {
    let lg = ln_gamma(Complex64::new(0.25, 0.5 * t));
    -0.5 * t * PI.ln() + lg.im
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_real_axis() {
        // ln Γ(1/2) = ln √π, ln Γ(5) = ln 24
        let v = ln_gamma(Complex64::new(0.5, 0.0));
        assert!((v.re - 0.5 * PI.ln()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-15);
        let v = ln_gamma(Complex64::new(5.0, 0.0));
        assert!((v.re - 24f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn ln_gamma_reflection_on_imaginary_direction() {
        // |Γ(1/2 + iy)|² = π / cosh(πy)
        for &y in &[0.3, 2.0, 7.5, 19.0] {
            let v = ln_gamma(Complex64::new(0.5, y));
            let expect = 0.5 * (PI / (PI * y).cosh()).ln();
            assert!((v.re - expect).abs() < 1e-12, "y = {y}");
        }
    }

    #[test]
    fn both_theta_routes_agree() {
        for &t in &[10.0, 12.5, 20.0, 30.0, 55.0, 400.0] {
            let a = theta_asymptotic(t);
            let b = theta_lngamma(t);
            assert!((a - b).abs() < 1e-11, "t = {t}: {a} vs {b}");
        }
    }
}
