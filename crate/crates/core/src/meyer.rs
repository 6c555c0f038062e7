//! Meyer-type generator functions in the frequency domain.
//!
//! All functions are total and pure. At a branch boundary the branch listed
//! first in the piecewise definition is taken; the functions are continuous
//! so the choice only matters for determinism.

use crate::Real;

/// Smooth ramp `v`: 0 below 0, `35x^4 - 84x^5 + 70x^6 - 20x^7` on `[0, 1]`, 1 above 1.
///
/// Satisfies `v(x) + v(1 - x) = 1`.
#[inline]
pub fn v<T: Real>(x: T) -> T {
    if x < T::zero() {
        T::zero()
    } else if x <= T::one() {
        let x2 = x * x;
        let inner = T::lit(35.0) + x * (T::lit(-84.0) + x * (T::lit(70.0) - T::lit(20.0) * x));
        x2 * x2 * inner
    } else {
        T::one()
    }
}

/// Meyer bump `b`, supported on `1 <= |x| <= 4`.
#[inline]
pub fn b<T: Real>(x: T) -> T {
    let ax = x.abs();
    let half_pi = T::FRAC_PI_2();
    if ax >= T::one() && ax <= T::lit(2.0) {
        (half_pi * v(ax - T::one())).sin()
    } else if ax > T::lit(2.0) && ax <= T::lit(4.0) {
        (half_pi * v(T::lit(0.5) * ax - T::one())).cos()
    } else {
        T::zero()
    }
}

/// Radial wavelet `sqrt(b(2w)^2 + b(w)^2)`, supported on `1/2 <= |w| <= 4`.
#[inline]
pub fn psi1_hat<T: Real>(w: T) -> T {
    let b2 = b(T::lit(2.0) * w);
    let b1 = b(w);
    (b2 * b2 + b1 * b1).sqrt()
}

/// [`psi1_hat`] with the outer taper removed: identical on `|w| <= 2`, 1 beyond.
///
/// Used for the finest scale so that the scale ladder covers the whole
/// frequency grid (the sum of squares stays 1 out to the Nyquist frequency).
#[inline]
pub fn psi1_hat_open<T: Real>(w: T) -> T {
    if w.abs() <= T::lit(2.0) {
        psi1_hat(w)
    } else {
        T::one()
    }
}

/// Angular bump, supported on `[-1, 1]`, even, with `psi2_hat(0) = 1`.
#[inline]
pub fn psi2_hat<T: Real>(w: T) -> T {
    if w <= T::zero() {
        v(T::one() + w).sqrt()
    } else {
        v(T::one() - w).sqrt()
    }
}

/// One-dimensional low-pass profile: 1 on `[-1/2, 1/2]`, 0 outside `(-1, 1)`.
#[inline]
pub fn varphi<T: Real>(w: T) -> T {
    let aw = w.abs();
    if aw <= T::lit(0.5) {
        T::one()
    } else if aw < T::one() {
        (T::FRAC_PI_2() * v(T::lit(2.0) * aw - T::one())).cos()
    } else {
        T::zero()
    }
}

/// Two-dimensional scaling spectrum: `varphi` of the larger-magnitude coordinate.
///
/// On the diagonal `|w1| = |w2|` the first coordinate is used.
#[inline]
pub fn phi_hat_2d<T: Real>(w1: T, w2: T) -> T {
    let (a1, a2) = (w1.abs(), w2.abs());
    if a1 < T::one() && a2 <= a1 {
        varphi(w1)
    } else if a2 < T::one() && a1 < a2 {
        varphi(w2)
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < TOL
    }

    #[test]
    fn ramp_values() {
        assert_eq!(v(-0.5f64), 0.0);
        assert_eq!(v(2.0f64), 1.0);
        // 0.5^4 (35 - 42 + 17.5 - 2.5) = 8/16
        assert!(close(v(0.5f64), 0.5));
        assert!(close(v(1.0f64), 1.0));
        assert_eq!(v(0.0f64), 0.0);
    }

    #[test]
    fn ramp_symmetry() {
        for i in 0..=10_000 {
            let x = i as f64 / 10_000.0;
            assert!(close(v(x) + v(1.0 - x), 1.0), "x = {x}");
        }
    }

    #[test]
    fn ramp_monotone_in_unit_range() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let y = v(i as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&y));
            assert!(y >= prev);
            prev = y;
        }
    }

    #[test]
    fn bump_values() {
        assert_eq!(b(0.5f64), 0.0);
        assert!(close(b(1.0f64), 0.0));
        assert!(close(b(2.0f64), 1.0));
        assert!(close(b(4.0f64), 0.0));
        assert!(close(b(-2.0f64), 1.0));
        assert_eq!(b(4.5f64), 0.0);
    }

    #[test]
    fn radial_and_angular_values() {
        assert_eq!(psi1_hat(0.0f64), 0.0);
        assert!(close(psi1_hat(2.0f64), 1.0));
        assert_eq!(psi1_hat(5.0f64), 0.0);
        assert_eq!(psi1_hat(0.25f64), 0.0);
        assert!(close(psi2_hat(0.0f64), 1.0));
        assert!(close(psi2_hat(1.0f64), 0.0));
        assert_eq!(psi2_hat(-2.0f64), 0.0);
        assert_eq!(psi2_hat(2.0f64), 0.0);
    }

    #[test]
    fn open_radial_matches_inside_and_saturates() {
        for i in 0..=400 {
            let w = i as f64 / 100.0;
            if w <= 2.0 {
                assert_eq!(psi1_hat_open(w), psi1_hat(w));
            } else {
                assert_eq!(psi1_hat_open(w), 1.0);
            }
        }
        assert_eq!(psi1_hat_open(1e6f64), 1.0);
    }

    #[test]
    fn angular_even() {
        for i in 0..=2000 {
            let w = i as f64 / 1000.0 - 1.0;
            assert!(close(psi2_hat(w), psi2_hat(-w)));
        }
    }

    #[test]
    fn lowpass_values() {
        assert_eq!(varphi(0.25f64), 1.0);
        assert_eq!(varphi(1.0f64), 0.0);
        assert_eq!(varphi(-0.5f64), 1.0);
        let (p, s) = (varphi(0.75f64), psi1_hat(0.75f64));
        assert!(close(p * p + s * s, 1.0));
        assert_eq!(phi_hat_2d(0.0f64, 0.0), 1.0);
        assert_eq!(phi_hat_2d(0.3f64, 0.8), varphi(0.8));
        assert_eq!(phi_hat_2d(2.0f64, 0.0), 0.0);
        assert_eq!(phi_hat_2d(0.7f64, -0.7), varphi(0.7));
    }

    #[test]
    fn continuity_at_switch_points() {
        let eps = 1e-13;
        for &x in &[0.0f64, 1.0] {
            assert!((v(x - eps) - v(x + eps)).abs() < 1e-12);
        }
        for &x in &[1.0f64, 2.0, 4.0, -1.0, -2.0, -4.0] {
            assert!((b(x - eps) - b(x + eps)).abs() < 1e-12, "b at {x}");
        }
        for &x in &[0.5f64, 1.0, -0.5, -1.0] {
            assert!((varphi(x - eps) - varphi(x + eps)).abs() < 1e-12, "varphi at {x}");
        }
        for &x in &[0.5f64, 1.0, 2.0, 4.0, -0.5, -4.0] {
            assert!((psi1_hat(x - eps) - psi1_hat(x + eps)).abs() < 1e-6, "psi1 at {x}");
        }
        assert!((psi2_hat(-eps) - psi2_hat(eps)).abs() < 1e-12);
    }

    #[test]
    fn overlap_with_lowpass() {
        for i in 0..=10_000 {
            let w = 0.5 + 0.5 * i as f64 / 10_000.0;
            let (p, s) = (varphi(w), psi1_hat(w));
            assert!(close(p * p + s * s, 1.0), "w = {w}");
        }
    }

    #[test]
    fn single_precision_agrees() {
        for i in 0..100 {
            let w = -4.5 + 9.0 * i as f64 / 99.0;
            assert!((psi1_hat(w as f32) as f64 - psi1_hat(w)).abs() < 1e-5);
            assert!((psi2_hat(w as f32) as f64 - psi2_hat(w)).abs() < 1e-3);
        }
    }
}
