//! Exact expected energies `E_n = E[θ_n² + φ_n²]` on the planar problem with
//! Gaussian noise of variance `σ²` on the first coordinate.

use crate::error::{Error, Result};

fn check_inputs(sigma_sq: f64, e1: f64) -> Result<()> {
    if !(sigma_sq >= 0.0 && e1 >= 0.0) {
        return Err(Error::Config(format!(
            "energy recursion needs σ² ≥ 0 and E₁ ≥ 0, got {sigma_sq} and {e1}"
        )));
    }
    Ok(())
}

/// `E_{n+1} = (1 − γ_n² + γ_n⁴) E_n + (1 + γ_n²) γ_n² σ²`.
///
/// Returns `[E₁, …, E_N]`.
pub fn energy_recursion_eg(gamma: impl Fn(u64) -> f64, sigma_sq: f64, e1: f64, n_max: u64) -> Result<Vec<f64>> {
    energy_recursion_dseg(&gamma, &gamma, sigma_sq, e1, n_max)
}

/// `E_{n+1} = ((1 − γ_nη_n)² + η_n²) E_n + (η_n² + γ_n²η_n²) σ²`.
///
/// Returns `[E₁, …, E_N]`.
pub fn energy_recursion_dseg(
    gamma: impl Fn(u64) -> f64,
    eta: impl Fn(u64) -> f64,
    sigma_sq: f64,
    e1: f64,
    n_max: u64,
) -> Result<Vec<f64>> {
    check_inputs(sigma_sq, e1)?;
    let mut out = Vec::with_capacity(n_max as usize);
    if n_max == 0 {
        return Ok(out);
    }
    let mut e = e1;
    out.push(e);
    for n in 1..n_max {
        let (g, h) = (gamma(n), eta(n));
        let gh = g * h;
        e = ((1.0 - gh) * (1.0 - gh) + h * h) * e + (h * h + gh * gh) * sigma_sq;
        out.push(e);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn noiseless_factor() {
        let e = energy_recursion_eg(|_| 0.3, 0.0, 2.0, 5).unwrap();
        let f = 1.0 - 0.09 + 0.0081;
        for w in e.windows(2) {
            assert_abs_diff_eq!(w[1] / w[0], f, epsilon = 1e-14);
        }
        let e = energy_recursion_dseg(|_| 0.5, |_| 0.1, 0.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(e[1], 0.9125, epsilon = 1e-15);
    }

    #[test]
    fn eg_second_energy() {
        let e = energy_recursion_eg(|_| 0.5, 0.25, 1.0, 2).unwrap();
        assert_abs_diff_eq!(e[1], 0.890625, epsilon = 1e-15);
    }

    #[test]
    fn eg_second_energy_by_monte_carlo() {
        // Simulate one noisy EG step from (1, 0) with γ = 0.5.
        let (g, sigma) = (0.5, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..samples {
            let (t, p) = (1.0f64, 0.0f64);
            let u1: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
            let th = t - g * (p + u1);
            let ph = p + g * t;
            let u2: f64 = sigma * rng.sample::<f64, _>(StandardNormal);
            let t2 = t - g * (ph + u2);
            let p2 = p + g * th;
            acc += t2 * t2 + p2 * p2;
        }
        let mean = acc / samples as f64;
        assert!((mean / 0.890625 - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn dseg_with_equal_steps_is_eg() {
        let gamma = |n: u64| 0.8 / (n as f64).powf(0.3);
        let a = energy_recursion_eg(gamma, 0.25, 1.0, 500).unwrap();
        let b = energy_recursion_dseg(gamma, gamma, 0.25, 1.0, 500).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-13);
        }
    }

    #[test]
    fn dseg_schedule_drives_energy_down() {
        let e = energy_recursion_dseg(
            |n| 1.0 / (n as f64).powf(0.1),
            |n| 1.0 / (n as f64).powf(0.9),
            0.25,
            1.0,
            100_000,
        )
        .unwrap();
        assert_eq!(e.len(), 100_000);
        assert!(*e.last().unwrap() < 1e-2);
    }

    #[test]
    fn rejects_negative_inputs() {
        assert!(energy_recursion_eg(|_| 0.1, -1.0, 1.0, 3).is_err());
        assert!(energy_recursion_eg(|_| 0.1, 1.0, -1.0, 3).is_err());
        assert!(energy_recursion_eg(|_| 0.1, 1.0, 1.0, 0).unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn eg_energy_never_drops_below_min_of_start_and_noise(
            e1 in 0.0f64..5.0,
            sigma_sq in 0.0f64..2.0,
            scale in 0.01f64..1.2,
            exponent in 0.0f64..1.0,
        ) {
            let e = energy_recursion_eg(|n| scale / (n as f64).powf(exponent), sigma_sq, e1, 2000).unwrap();
            let floor = e1.min(sigma_sq);
            for v in e {
                prop_assert!(v >= floor * (1.0 - 1e-12));
            }
        }
    }
}
