//! Private sampling from `exp((ε_target/2)·score)` over a convex body.
//!
//! The walk is a lattice-restricted Metropolis ball walk: positions live
//! on a grid of spacing `h = δ/refine` anchored at the body's center,
//! proposals jump by a uniformly drawn vector of length up to the
//! proposal radius `δ = min(1/(4L), diam/(8√d))`, and the accepted chain
//! has the exponential-mechanism density restricted to the grid as its
//! stationary law. The returned point is dithered uniformly inside its
//! grid cell (then projected into the body), so the output density is the
//! piecewise-constant extension of the grid law; for an `L`-Lipschitz
//! score this is within a multiplicative `exp((ε_target/2)·L·h·√d)` of
//! the continuum target.
//!
//! The step count is a deterministic function of `(d, L·diam,
//! eps_sampler)`:
//!
//! ```text
//!   N = ⌈ max(64·d·(L·diam + d)², 16·d·(diam/δ)²) · max(1, ln(1/slack)) ⌉
//! ```
//!
//! with `slack = clamp(eps_sampler, 1e-6, 1/2)`; the second operand keeps
//! the walk long enough to traverse the grid when the score is flat. The
//! schedule is a conservative stand-in for the mixing bound of the
//! underlying sampler; callers may cap it (`max_steps`), and the run
//! report carries both the nominal and the executed counts so the
//! realized deviation allowance is visible downstream.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};

/// A convex candidate body with membership and projection oracles.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum ConvexBody {
    Ball { center: Vec<f64>, radius: f64 },
}

impl ConvexBody {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("ball center must be finite".into()));
        }
        Ok(ConvexBody::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { center, .. } => center.len(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ConvexBody::Ball { radius, .. } => 2.0 * radius,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ConvexBody::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 <= radius * radius * (1.0 + 1e-12)
            }
        }
    }

    /// Idempotent Euclidean projection into the body.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ConvexBody::Ball { center, radius } => {
                let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm <= *radius {
                    x.to_vec()
                } else {
                    let s = radius / norm;
                    center.iter().zip(&diff).map(|(c, d)| c + s * d).collect()
                }
            }
        }
    }
}

/// Budget split and schedule knobs for one sampler call.
#[derive(Debug, Clone, Copy)]
pub struct SamplerParams {
    /// Exponent budget: the target density is `exp((eps_target/2)·score)`.
    pub eps_target: f64,
    /// Deviation allowance absorbed by finite mixing.
    pub eps_sampler: f64,
    /// Optional hard cap on walk steps (desk-scale escape hatch).
    pub max_steps: Option<u64>,
    /// Grid refinement below the proposal radius; 8 unless testing.
    pub grid_refine: u32,
}

impl SamplerParams {
    /// Splits a single exponential-mechanism budget `eps` evenly between
    /// the target exponent and the sampler deviation.
    pub fn split_evenly(eps: f64) -> Self {
        SamplerParams { eps_target: eps / 2.0, eps_sampler: eps / 2.0, max_steps: None, grid_refine: 8 }
    }

    pub fn with_max_steps(mut self, cap: Option<u64>) -> Self {
        self.max_steps = cap;
        self
    }
}

/// Diagnostics from one sampler run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SamplerRun {
    pub point: Vec<f64>,
    pub nominal_steps: u64,
    pub steps_taken: u64,
    pub accepted: u64,
    pub distinct_scored: u64,
    pub proposal_radius: f64,
    pub grid_step: f64,
}

/// Proposal radius from the Lipschitz bound and the body geometry.
pub fn proposal_radius(lipschitz: f64, diameter: f64, dim: usize) -> f64 {
    let geom = diameter / (8.0 * (dim as f64).sqrt());
    if lipschitz > 0.0 {
        geom.min(1.0 / (4.0 * lipschitz))
    } else {
        geom
    }
}

/// Nominal walk length; deterministic in `(d, L·diam, eps_sampler)`.
pub fn nominal_steps(lipschitz: f64, diameter: f64, dim: usize, eps_sampler: f64) -> u64 {
    let d = dim as f64;
    let delta = proposal_radius(lipschitz, diameter, dim);
    let mixing = 64.0 * d * (lipschitz * diameter + d).powi(2);
    let traversal = 16.0 * d * (diameter / delta).powi(2);
    let slack = eps_sampler.clamp(1e-6, 0.5);
    let boost = (1.0 / slack).ln().max(1.0);
    (mixing.max(traversal) * boost).ceil() as u64
}

/// Draws one point with density within `e^{±eps_sampler}` of
/// `exp((eps_target/2)·score)` restricted to `body`, given a concave,
/// `lipschitz`-Lipschitz score (guaranteed by the caller).
///
/// A non-finite score evaluation aborts the walk with a diagnostic; the
/// walk never silently resamples.
pub fn sample_logconcave<R, F>(
    mut score: F,
    lipschitz: f64,
    body: &ConvexBody,
    params: &SamplerParams,
    rng: &mut R,
) -> Result<SamplerRun>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> Result<f64>,
{
    let dim = body.dim();
    if dim == 0 {
        return Err(Error::invalid("sampler needs dimension >= 1".into()));
    }
    if !(params.eps_target > 0.0) || !params.eps_target.is_finite() {
        return Err(Error::invalid(format!(
            "eps_target must be finite and positive, got {}",
            params.eps_target
        )));
    }
    if !(params.eps_sampler > 0.0) {
        return Err(Error::invalid("eps_sampler must be positive".into()));
    }
    if !(lipschitz >= 0.0) || !lipschitz.is_finite() {
        return Err(Error::invalid(format!("lipschitz must be finite and >= 0, got {lipschitz}")));
    }
    if params.grid_refine == 0 {
        return Err(Error::invalid("grid_refine must be >= 1".into()));
    }

    let diam = body.diameter();
    let delta = proposal_radius(lipschitz, diam, dim);
    let h = delta / params.grid_refine as f64;
    let nominal = nominal_steps(lipschitz, diam, dim, params.eps_sampler);
    let steps = params.max_steps.map_or(nominal, |cap| nominal.min(cap));
    let half_exponent = params.eps_target / 2.0;

    let center = match body {
        ConvexBody::Ball { center, .. } => center.clone(),
    };
    let lattice_point = |q: &[i64]| -> Vec<f64> {
        q.iter().zip(&center).map(|(&qi, c)| c + h * qi as f64).collect()
    };

    let mut cache: HashMap<Vec<i64>, f64> = HashMap::new();
    let mut distinct = 0u64;
    let mut eval = |q: &Vec<i64>, cache: &mut HashMap<Vec<i64>, f64>| -> Result<f64> {
        if let Some(&s) = cache.get(q) {
            return Ok(s);
        }
        let x = lattice_point(q);
        let s = score(&x)?;
        if !s.is_finite() {
            return Err(Error::NonFiniteScore { context: format!("sampler at {x:?}") });
        }
        cache.insert(q.clone(), s);
        distinct += 1;
        Ok(s)
    };

    let mut q = vec![0i64; dim];
    let mut current = eval(&q, &mut cache)?;
    let mut accepted = 0u64;

    for _ in 0..steps {
        // Uniform direction in the δ-ball, snapped to the grid.
        let mut step = vec![0i64; dim];
        let mut norm2 = 0.0;
        let mut gauss = Vec::with_capacity(dim);
        for _ in 0..dim {
            // Box-Muller on demand keeps the dependency surface small.
            let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            let u2: f64 = rng.random();
            let g = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            norm2 += g * g;
            gauss.push(g);
        }
        let norm = norm2.sqrt().max(f64::MIN_POSITIVE);
        let radial = rng.random::<f64>().powf(1.0 / dim as f64) * delta;
        let mut nonzero = false;
        for (c, g) in step.iter_mut().zip(&gauss) {
            *c = (radial * g / norm / h).round() as i64;
            nonzero |= *c != 0;
        }
        if !nonzero {
            continue;
        }
        let proposal: Vec<i64> = q.iter().zip(&step).map(|(a, b)| a + b).collect();
        if !body.contains(&lattice_point(&proposal)) {
            continue;
        }
        let s_new = eval(&proposal, &mut cache)?;
        let log_ratio = half_exponent * (s_new - current);
        if log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp() {
            q = proposal;
            current = s_new;
            accepted += 1;
        }
    }

    // Dither within the cell, then project back into the body.
    let mut out = lattice_point(&q);
    for v in out.iter_mut() {
        *v += h * (rng.random::<f64>() - 0.5);
    }
    let out = body.project(&out);

    Ok(SamplerRun {
        point: out,
        nominal_steps: nominal,
        steps_taken: steps,
        accepted,
        distinct_scored: distinct,
        proposal_radius: delta,
        grid_step: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;

    #[test]
    fn projection_is_idempotent_and_interior() {
        let body = ConvexBody::ball(vec![1.0, -1.0], 2.0).unwrap();
        let p = body.project(&[10.0, 10.0]);
        assert!(body.contains(&p));
        let p2 = body.project(&p);
        for (a, b) in p.iter().zip(&p2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn walk_length_is_deterministic_in_its_inputs() {
        let a = nominal_steps(3.0, 2.0, 4, 0.25);
        let b = nominal_steps(3.0, 2.0, 4, 0.25);
        assert_eq!(a, b);
        assert_ne!(a, nominal_steps(3.0, 2.0, 4, 0.1));
        assert_ne!(a, nominal_steps(6.0, 2.0, 4, 0.25));
    }

    #[test]
    fn constant_score_stays_in_body() {
        let body = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        let mut rng = RngSeed::new(3).rng();
        let run = sample_logconcave(
            |_| Ok(0.0),
            0.0,
            &body,
            &SamplerParams::split_evenly(1.0),
            &mut rng,
        )
        .unwrap();
        assert!(body.contains(&run.point));
        assert!(run.steps_taken > 0);
    }

    #[test]
    fn aborts_on_non_finite_score() {
        let body = ConvexBody::ball(vec![0.0], 1.0).unwrap();
        let mut rng = RngSeed::new(4).rng();
        let err = sample_logconcave(
            |_| Ok(f64::NAN),
            1.0,
            &body,
            &SamplerParams::split_evenly(1.0),
            &mut rng,
        );
        assert!(matches!(err, Err(Error::NonFiniteScore { .. })));
    }

    #[test]
    fn cap_limits_steps() {
        let body = ConvexBody::ball(vec![0.0, 0.0], 1.0).unwrap();
        let mut rng = RngSeed::new(5).rng();
        let params = SamplerParams::split_evenly(1.0).with_max_steps(Some(10));
        let run = sample_logconcave(|_| Ok(0.0), 0.0, &body, &params, &mut rng).unwrap();
        assert_eq!(run.steps_taken, 10);
        assert!(run.nominal_steps > 10);
    }
}
