//! Brute-force oracles and the empirical privacy audit.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mech::ConvexBody;
use crate::sdp::BucketMeans;

/// Exhaustive direction search for `d ≤ 2`: the best integral count
/// `|{i : ⟨Z_i − μ̃, v⟩ ≥ r}|` over a grid of unit directions. Lower
/// bounds the relaxation value.
pub fn brute_force_quad(
    mu_tilde: &[f64],
    r: f64,
    z: &BucketMeans,
    grid_res: f64,
) -> Result<usize> {
    if z.d() > 2 {
        return Err(Error::invalid(format!("brute force supports d <= 2, got {}", z.d())));
    }
    if !(grid_res > 0.0 && grid_res <= 0.01) {
        return Err(Error::invalid(format!("grid_res must lie in (0, 0.01], got {grid_res}")));
    }
    let count_along = |v: &[f64]| {
        (0..z.k())
            .filter(|&i| {
                let dot: f64 =
                    z.row(i).iter().zip(mu_tilde).zip(v).map(|((zi, m), vi)| (zi - m) * vi).sum();
                dot >= r
            })
            .count()
    };
    let mut best = 0;
    if z.d() == 1 {
        best = best.max(count_along(&[1.0])).max(count_along(&[-1.0]));
    } else {
        let steps = (2.0 * std::f64::consts::PI / grid_res).ceil() as usize;
        for t in 0..steps {
            let th = t as f64 * grid_res;
            best = best.max(count_along(&[th.cos(), th.sin()]));
        }
    }
    Ok(best)
}

/// Exact categorical sampler over grid cells of a low-dimensional body,
/// with weight `exp((eps/2)·score(center))`. Oracle for the walk-based
/// sampler; rejects grids beyond 10⁷ cells.
pub fn grid_exponential_sampler<R, F>(
    mut score: F,
    body: &ConvexBody,
    eps: f64,
    grid_res: f64,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> Result<f64>,
{
    let d = body.dim();
    if d > 2 {
        return Err(Error::invalid(format!("grid sampler supports d <= 2, got {d}")));
    }
    if !(grid_res > 0.0) || !(eps > 0.0) || eps.is_infinite() {
        return Err(Error::invalid("need grid_res > 0 and finite eps > 0".into()));
    }
    let (center, radius) = match body {
        ConvexBody::Ball { center, radius } => (center.clone(), *radius),
    };
    let half = (radius / grid_res).ceil() as i64;
    let cells_per_axis = 2 * half + 1;
    let total = (cells_per_axis as i128).pow(d as u32);
    if total > 10_000_000 {
        return Err(Error::invalid(format!("grid of {total} cells exceeds the 1e7 limit")));
    }

    let mut centers = Vec::new();
    let mut logw = Vec::new();
    let mut max_lw = f64::NEG_INFINITY;
    let mut idx = vec![-half; d];
    loop {
        let point: Vec<f64> =
            idx.iter().zip(&center).map(|(&q, c)| c + q as f64 * grid_res).collect();
        if body.contains(&point) {
            let s = score(&point)?;
            if !s.is_finite() {
                return Err(Error::NonFiniteScore { context: format!("grid oracle at {point:?}") });
            }
            let lw = eps / 2.0 * s;
            max_lw = max_lw.max(lw);
            centers.push(point);
            logw.push(lw);
        }
        // Odometer increment over the d-dimensional index box.
        let mut axis = 0;
        loop {
            if axis == d {
                break;
            }
            idx[axis] += 1;
            if idx[axis] <= half {
                break;
            }
            idx[axis] = -half;
            axis += 1;
        }
        if axis == d {
            break;
        }
    }
    if centers.is_empty() {
        return Err(Error::invalid("no grid cell falls inside the body".into()));
    }
    let weights: Vec<f64> = logw.iter().map(|&lw| (lw - max_lw).exp()).collect();
    let total_w: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total_w;
    for (c, w) in centers.iter().zip(&weights) {
        u -= w;
        if u <= 0.0 {
            return Ok(c.clone());
        }
    }
    Ok(centers.last().unwrap().clone())
}

/// Result of an empirical pure-DP audit over discretized outputs.
#[derive(Debug, Clone)]
pub struct DpAudit {
    /// `max_bins |log(p̂/p̂′)|` with add-one smoothing.
    pub max_abs_log_ratio: f64,
    /// Statistical slack at the attained counts (3σ of the log-ratio).
    pub slack: f64,
}

impl DpAudit {
    /// Advisory flag: the measured ratio exceeds `eps` beyond the slack.
    pub fn violates(&self, eps: f64) -> bool {
        self.max_abs_log_ratio > eps + self.slack
    }
}

/// Runs `mechanism` `trials` times on each of two neighboring inputs and
/// compares the histograms over `bins` outputs. Statistical, advisory:
/// never a substitute for a sensitivity proof.
pub fn empirical_dp_check<R, F>(
    mut mechanism: F,
    trials: usize,
    bins: usize,
    rng_a: &mut R,
    rng_b: &mut R,
) -> Result<DpAudit>
where
    R: Rng + ?Sized,
    F: FnMut(bool, &mut R) -> Result<usize>,
{
    if trials == 0 {
        return Err(Error::invalid("need at least one trial".into()));
    }
    if bins == 0 {
        return Err(Error::invalid("need at least one bin".into()));
    }
    let mut count_a = vec![0u64; bins];
    let mut count_b = vec![0u64; bins];
    for _ in 0..trials {
        let a = mechanism(false, rng_a)?;
        let b = mechanism(true, rng_b)?;
        if a >= bins || b >= bins {
            return Err(Error::invalid(format!("mechanism output outside [0, {bins})")));
        }
        count_a[a] += 1;
        count_b[b] += 1;
    }
    let n = trials as f64 + bins as f64;
    let mut max_ratio = 0.0_f64;
    let mut slack_at_max = 0.0_f64;
    for b in 0..bins {
        let (ca, cb) = (count_a[b] as f64 + 1.0, count_b[b] as f64 + 1.0);
        let ratio = ((ca / n) / (cb / n)).ln().abs();
        let slack = 3.0 * (1.0 / ca + 1.0 / cb).sqrt();
        if ratio > max_ratio {
            max_ratio = ratio;
            slack_at_max = slack;
        }
    }
    Ok(DpAudit { max_abs_log_ratio: max_ratio, slack: slack_at_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mech::{exponential_mechanism_finite, laplace_mechanism};
    use crate::rng::RngSeed;
    use ndarray::array;

    #[test]
    fn brute_force_counts_clusters() {
        let z = BucketMeans::new(array![[1.0, 0.0], [1.1, 0.1], [0.9, -0.1]]).unwrap();
        let c = brute_force_quad(&[0.0, 0.0], 0.5, &z, 0.01).unwrap();
        assert_eq!(c, 3);
        let none = brute_force_quad(&[0.0, 0.0], 10.0, &z, 0.01).unwrap();
        assert_eq!(none, 0);
    }

    #[test]
    fn brute_force_rejects_high_dimension() {
        let z = BucketMeans::new(array![[0.0, 0.0, 0.0]]).unwrap();
        assert!(brute_force_quad(&[0.0, 0.0, 0.0], 1.0, &z, 0.01).is_err());
    }

    #[test]
    fn grid_sampler_uniform_on_constant_score() {
        let body = ConvexBody::ball(vec![0.0], 1.0).unwrap();
        let mut rng = RngSeed::new(31).rng();
        let mut left = 0usize;
        let trials = 20_000;
        for _ in 0..trials {
            let p = grid_exponential_sampler(|_| Ok(0.0), &body, 1.0, 0.05, &mut rng).unwrap();
            if p[0] < 0.0 {
                left += 1;
            }
        }
        let frac = left as f64 / trials as f64;
        assert!((frac - 0.5).abs() < 0.03, "frac {frac}");
    }

    #[test]
    fn identical_inputs_audit_near_zero() {
        let mut ra = RngSeed::new(32).rng();
        let mut rb = RngSeed::new(33).rng();
        let audit = empirical_dp_check(
            |_, rng| Ok(exponential_mechanism_finite(&[1.0, 0.5, 0.0], 1.0, 1.0, rng)?),
            50_000,
            3,
            &mut ra,
            &mut rb,
        )
        .unwrap();
        assert!(audit.max_abs_log_ratio <= audit.slack, "ratio {audit:?}");
    }

    #[test]
    fn laplace_audit_within_budget() {
        let eps = 0.5;
        let mut ra = RngSeed::new(34).rng();
        let mut rb = RngSeed::new(35).rng();
        let audit = empirical_dp_check(
            |neighbor, rng| {
                let value = if neighbor { 1.0 } else { 0.0 };
                let out = laplace_mechanism(value, 1.0, eps, rng)?;
                // Discretize into unit bins over [-8, 9).
                Ok(((out + 8.0).floor().clamp(0.0, 16.0)) as usize)
            },
            100_000,
            17,
            &mut ra,
            &mut rb,
        )
        .unwrap();
        assert!(!audit.violates(eps), "audit {audit:?}");
    }
}
