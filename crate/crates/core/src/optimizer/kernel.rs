use serde::{Deserialize, Serialize};

/// Smoothness of the Matérn kernel; fixed.
pub const NU: f64 = 2.5;

const SQRT5: f64 = 2.236_067_977_499_79;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub length_scale: f64,
    pub signal_variance: f64,
    /// Diagonal noise added to the Gram matrix, on the standardized target scale.
    pub noise: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            length_scale: 1.0,
            signal_variance: 1.0,
            noise: 1e-3,
        }
    }
}

impl KernelParams {
    pub fn is_valid(&self) -> bool {
        [self.length_scale, self.signal_variance, self.noise]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite())
    }
}

/// Unit-variance Matérn 5/2 correlation at distance `r`.
#[inline]
pub fn matern52_correlation(r: f64, length_scale: f64) -> f64 {
    let a = SQRT5 * r / length_scale;
    (1.0 + a + a * a / 3.0) * libm::exp(-a)
}

/// Derivative of the correlation with respect to `log ℓ`.
#[inline]
pub fn matern52_dlog_length(r: f64, length_scale: f64) -> f64 {
    let a = SQRT5 * r / length_scale;
    a * a * (1.0 + a) / 3.0 * libm::exp(-a)
}

/// `σ_f² (1 + √5 r/ℓ + 5r²/(3ℓ²)) exp(−√5 r/ℓ)` with `r = ‖x − x′‖₂`.
pub fn matern52(x: &[f64], y: &[f64], params: &KernelParams) -> f64 {
    assert_eq!(x.len(), y.len(), "kernel inputs differ in dimension");
    params.signal_variance * matern52_correlation(crate::linalg::distance(x, y), params.length_scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(l: f64, s: f64) -> KernelParams {
        KernelParams {
            length_scale: l,
            signal_variance: s,
            noise: 1e-3,
        }
    }

    #[test]
    fn zero_distance_gives_signal_variance() {
        assert_eq!(matern52(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &p(0.7, 1.0)), 1.0);
        assert_eq!(matern52(&[0.0; 3], &[0.0; 3], &p(0.7, 2.5)), 2.5);
    }

    #[test]
    fn decays_monotonically() {
        let mut last = f64::INFINITY;
        for i in 0..200 {
            let r = i as f64 * 0.25;
            let v = matern52(&[0.0, 0.0, 0.0], &[r, 0.0, 0.0], &p(1.3, 1.0));
            assert!(v < last || (v == 0.0 && last == 0.0));
            last = v;
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn closed_form_matches_independent_expression() {
        // Expanded form: σ² (1 + √5 r/ℓ + 5 r²/(3 ℓ²)) e^{−√5 r/ℓ}, written from scratch.
        let independent = |r: f64, l: f64, s: f64| {
            let q = (5.0_f64).sqrt() * r / l;
            s * (1.0 + q + 5.0 * r * r / (3.0 * l * l)) * (-q).exp()
        };
        for &(r, l, s) in &[(1.0, 1.0, 1.0), (0.3, 2.0, 0.5), (4.0, 0.7, 3.0), (0.0, 1.0, 1.0)] {
            let got = matern52(&[0.0, 0.0, 0.0], &[r, 0.0, 0.0], &p(l, s));
            assert!((got - independent(r, l, s)).abs() < 1e-12, "r={r} l={l}");
        }
    }

    #[test]
    fn log_length_derivative_matches_finite_difference() {
        for &(r, l) in &[(0.5, 1.0), (2.0, 0.8), (1.0, 3.0)] {
            let h: f64 = 1e-6;
            let up = matern52_correlation(r, l * h.exp());
            let dn = matern52_correlation(r, l * (-h).exp());
            let fd = (up - dn) / (2.0 * h);
            assert!((fd - matern52_dlog_length(r, l)).abs() < 1e-8);
        }
    }
}
