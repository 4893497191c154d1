//! The Laplace mechanism.

use rand::Rng;

use crate::error::{Error, Result};

/// Draws `Lap(scale)` by inverse CDF on a single 64-bit uniform; no
/// rejection loops, so the output distribution is exact and every call
/// consumes exactly one draw.
pub fn laplace_noise<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    if scale == 0.0 {
        return 0.0;
    }
    let u: f64 = rng.random::<f64>() - 0.5;
    // |u| < 0.5, so the argument of ln stays in (0, 1].
    let mag = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
    -scale * u.signum() * mag.ln()
}

/// Releases `value + Lap(sensitivity/eps)`.
///
/// Tail: `Pr[|noise| ≥ t · sensitivity/eps] = e^{−t}`. `eps = ∞` is the
/// noiseless mode used by tests.
pub fn laplace_mechanism<R: Rng + ?Sized>(
    value: f64,
    sensitivity: f64,
    eps: f64,
    rng: &mut R,
) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::invalid(format!("value must be finite, got {value}")));
    }
    if !(sensitivity > 0.0) || !sensitivity.is_finite() {
        return Err(Error::invalid(format!("sensitivity must be positive, got {sensitivity}")));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let scale = if eps.is_infinite() { 0.0 } else { sensitivity / eps };
    Ok(value + laplace_noise(scale, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;

    #[test]
    fn huge_eps_is_nearly_noiseless() {
        let mut rng = RngSeed::new(1).rng();
        for _ in 0..100 {
            let out = laplace_mechanism(2.5, 1.0, 1e9, &mut rng).unwrap();
            assert!((out - 2.5).abs() < 1e-6);
        }
        let out = laplace_mechanism(2.5, 1.0, f64::INFINITY, &mut rng).unwrap();
        assert_eq!(out, 2.5);
    }

    #[test]
    fn tail_matches_exponential_law() {
        // Pr[|noise| >= 3 * scale] = e^{-3}, checked within 3σ of the
        // binomial deviation at 1e5 draws.
        let trials = 100_000;
        let mut rng = RngSeed::new(2).rng();
        let mut hits = 0usize;
        for _ in 0..trials {
            let out = laplace_mechanism(0.0, 1.0, 1.0, &mut rng).unwrap();
            if out.abs() >= 3.0 {
                hits += 1;
            }
        }
        let p = (-3.0_f64).exp();
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let observed = hits as f64 / trials as f64;
        assert!(
            (observed - p).abs() <= 3.0 * sigma,
            "observed {observed}, expected {p} ± {}",
            3.0 * sigma
        );
    }

    #[test]
    fn seeded_runs_replay() {
        let a = laplace_mechanism(1.0, 2.0, 0.5, &mut RngSeed::new(9).rng()).unwrap();
        let b = laplace_mechanism(1.0, 2.0, 0.5, &mut RngSeed::new(9).rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = RngSeed::new(0).rng();
        assert!(laplace_mechanism(0.0, 0.0, 1.0, &mut rng).is_err());
        assert!(laplace_mechanism(0.0, 1.0, 0.0, &mut rng).is_err());
        assert!(laplace_mechanism(f64::NAN, 1.0, 1.0, &mut rng).is_err());
    }
}
