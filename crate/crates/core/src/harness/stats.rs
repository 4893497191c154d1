//! Small statistical helpers for the verification suites.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Survival function of the χ² distribution with `dof` degrees of freedom.
pub fn chi_square_sf(stat: f64, dof: f64) -> f64 {
    let dist = ChiSquared::new(dof).expect("dof > 0");
    1.0 - dist.cdf(stat)
}

/// Pearson χ² p-value of observed counts against expected probabilities.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(counts.len(), probs.len());
    let total: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = total as f64 * p;
            if e > 0.0 {
                (c as f64 - e).powi(2) / e
            } else {
                0.0
            }
        })
        .sum();
    chi_square_sf(stat, (counts.len() - 1) as f64)
}

/// One-sample Kolmogorov–Smirnov test against a CDF; returns `(D, p)`
/// using the asymptotic Kolmogorov distribution.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> (f64, f64) {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((f - lo).abs()).max((hi - f).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for j in 1..=100 {
        let term = 2.0 * (-1.0_f64).powi(j - 1) * (-2.0 * (j as f64 * lambda).powi(2)).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    (d, p.clamp(0.0, 1.0))
}

/// Total-variation distance between two empirical distributions over a
/// shared index set.
pub fn tv_distance(a: &[u64], b: &[u64]) -> f64 {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    0.5 * a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
        .sum::<f64>()
}
