/// Integrated autocorrelation time `tau = 1 + 2 sum_{t=1}^{M} rho(t)` of a
/// series, in samples, with the self-consistent window `M >= 5 tau`.
/// `N / tau` is the effective number of independent samples. Returns `None`
/// for series shorter than two points or with zero variance.
pub fn integrated_autocorrelation_time(x: &[f64]) -> Option<f64> {
    const WINDOW_FACTOR: f64 = 5.0;
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let var = centered.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if !(var > 0.0) {
        return None;
    }
    let mut tau = 1.0;
    for lag in 1..n {
        let c: f64 = centered[..n - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64;
        tau += 2.0 * c / var;
        if lag as f64 >= WINDOW_FACTOR * tau {
            break;
        }
    }
    Some(tau.max(1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn white_noise_has_unit_time() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let tau = integrated_autocorrelation_time(&x).unwrap();
        assert!((tau - 1.0).abs() < 0.05, "{tau}");
    }

    #[test]
    fn ar1_matches_closed_form() {
        // AR(1) with coefficient phi has tau = (1 + phi) / (1 - phi).
        let phi: f64 = 0.9;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let mut x = vec![0.0; 400_000];
        for i in 1..x.len() {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[i] = phi * x[i - 1] + e;
        }
        let tau = integrated_autocorrelation_time(&x).unwrap();
        let expected = (1.0 + phi) / (1.0 - phi);
        assert!((tau / expected - 1.0).abs() < 0.1, "{tau} vs {expected}");
    }

    #[test]
    fn degenerate_series() {
        assert_eq!(integrated_autocorrelation_time(&[1.0]), None);
        assert_eq!(integrated_autocorrelation_time(&[2.0; 10]), None);
    }
}
