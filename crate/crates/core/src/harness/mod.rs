//! Data generation, corruption adversaries, brute-force oracles,
//! empirical privacy auditing, and the experiment runner.

pub mod experiment;
pub mod oracles;
pub mod stats;

pub use experiment::{run_experiment, AlgorithmConfig, ExperimentConfig, PhaseFlags};
pub use oracles::{brute_force_quad, empirical_dp_check, grid_exponential_sampler, DpAudit};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Synthetic-data specifications. `cov_scale ∈ (0, 1]` keeps the
/// covariance spectral norm at most 1, the regime the estimator assumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Gaussian { mu: Vec<f64>, cov_scale: f64 },
    PointMass { c: Vec<f64> },
    /// Two-point distribution: mass `1 − 25α^{k/(k−1)}` at the origin and
    /// mass `25α^{k/(k−1)}` at `(1/6)·α^{−1/(k−1)}·v`; its k-th directional
    /// moments are at most 1 and its mean is `(25/6)·α·v`. The hardest
    /// instance for heavy-tailed estimation at accuracy α.
    PackingHard { alpha: f64, kmoment: f64, direction: Vec<f64> },
    Mixture { mu_a: Vec<f64>, mu_b: Vec<f64>, weight_a: f64, cov_scale: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::invalid("need n >= 1 and d >= 1".into()));
        }
        let dim_of = |v: &Vec<f64>| v.len();
        match &self.kind {
            GeneratorKind::Gaussian { mu, cov_scale } => {
                if dim_of(mu) != self.d {
                    return Err(Error::dim("gaussian mu dimension".into()));
                }
                if !(*cov_scale > 0.0 && *cov_scale <= 1.0) {
                    return Err(Error::invalid(format!(
                        "cov_scale must lie in (0, 1], got {cov_scale}"
                    )));
                }
            }
            GeneratorKind::PointMass { c } => {
                if dim_of(c) != self.d {
                    return Err(Error::dim("point mass dimension".into()));
                }
            }
            GeneratorKind::PackingHard { alpha, kmoment, direction } => {
                if dim_of(direction) != self.d {
                    return Err(Error::dim("packing direction dimension".into()));
                }
                if !(*alpha > 0.0 && *alpha < 1.0) || !(*kmoment >= 2.0) {
                    return Err(Error::invalid("need 0 < alpha < 1 and kmoment >= 2".into()));
                }
                let norm: f64 = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid("packing direction must be a unit vector".into()));
                }
                // k-th moment bound of the two-point law, checked
                // analytically for every generated spec.
                let (p, atom) = packing_parameters(*alpha, *kmoment);
                let moment = (1.0 - p) * ((25.0 / 6.0) * alpha).powf(*kmoment)
                    + p * (atom - (25.0 / 6.0) * alpha).powf(*kmoment);
                if moment > 1.0 + 1e-9 {
                    return Err(Error::invalid(format!(
                        "packing spec violates the moment bound: {moment} > 1"
                    )));
                }
            }
            GeneratorKind::Mixture { mu_a, mu_b, weight_a, cov_scale } => {
                if dim_of(mu_a) != self.d || dim_of(mu_b) != self.d {
                    return Err(Error::dim("mixture component dimension".into()));
                }
                if !(*weight_a >= 0.0 && *weight_a <= 1.0) {
                    return Err(Error::invalid("mixture weight must lie in [0, 1]".into()));
                }
                if !(*cov_scale > 0.0 && *cov_scale <= 1.0) {
                    return Err(Error::invalid("cov_scale must lie in (0, 1]".into()));
                }
            }
        }
        Ok(())
    }

    /// The population mean of the specified distribution.
    pub fn true_mean(&self) -> Vec<f64> {
        match &self.kind {
            GeneratorKind::Gaussian { mu, .. } => mu.clone(),
            GeneratorKind::PointMass { c } => c.clone(),
            GeneratorKind::PackingHard { alpha, direction, .. } => {
                direction.iter().map(|v| 25.0 / 6.0 * alpha * v).collect()
            }
            GeneratorKind::Mixture { mu_a, mu_b, weight_a, .. } => mu_a
                .iter()
                .zip(mu_b)
                .map(|(a, b)| weight_a * a + (1.0 - weight_a) * b)
                .collect(),
        }
    }
}

/// Atom location and mass of the packing-hard two-point law:
/// `(mass p, atom magnitude)`.
pub fn packing_parameters(alpha: f64, kmoment: f64) -> (f64, f64) {
    let p = 25.0 * alpha.powf(kmoment / (kmoment - 1.0));
    let atom = alpha.powf(-1.0 / (kmoment - 1.0)) / 6.0;
    (p, atom)
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Draws `n` i.i.d. samples per the spec.
pub fn gen_dataset(spec: &GeneratorSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = RngSeed::new(spec.seed).rng();
    let mut data = Array2::zeros((spec.n, spec.d));
    match &spec.kind {
        GeneratorKind::Gaussian { mu, cov_scale } => {
            let s = cov_scale.sqrt();
            for i in 0..spec.n {
                for j in 0..spec.d {
                    data[[i, j]] = mu[j] + s * standard_normal(&mut rng);
                }
            }
        }
        GeneratorKind::PointMass { c } => {
            for i in 0..spec.n {
                for j in 0..spec.d {
                    data[[i, j]] = c[j];
                }
            }
        }
        GeneratorKind::PackingHard { alpha, kmoment, direction } => {
            let (p, atom) = packing_parameters(*alpha, *kmoment);
            for i in 0..spec.n {
                let heavy = rng.random::<f64>() < p;
                for j in 0..spec.d {
                    data[[i, j]] = if heavy { atom * direction[j] } else { 0.0 };
                }
            }
        }
        GeneratorKind::Mixture { mu_a, mu_b, weight_a, cov_scale } => {
            let s = cov_scale.sqrt();
            for i in 0..spec.n {
                let a = rng.random::<f64>() < *weight_a;
                let mu = if a { mu_a } else { mu_b };
                for j in 0..spec.d {
                    data[[i, j]] = mu[j] + s * standard_normal(&mut rng);
                }
            }
        }
    }
    Dataset::new(data)
}

/// Corruption adversaries; `eta ≤ 0.01`, the regime the estimator's
/// robustness argument covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AdversaryMode {
    /// Replace rows by points at the given radius from the data mean, in
    /// random directions.
    ReplaceFar { radius: f64 },
    /// Replace rows by a fixed decoy point.
    ClusterDecoy { point: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub eta: f64,
    #[serde(flatten)]
    pub mode: AdversaryMode,
}

/// Replaces exactly `⌊eta·n⌋` rows per the adversary mode; returns the
/// corrupted dataset and the replaced row indices.
pub fn corrupt<R: Rng + ?Sized>(
    x: &Dataset,
    spec: &AdversarySpec,
    rng: &mut R,
) -> Result<(Dataset, Vec<usize>)> {
    if !(spec.eta >= 0.0 && spec.eta <= 0.01) {
        return Err(Error::invalid(format!(
            "corruption fraction must lie in [0, 0.01], got {}",
            spec.eta
        )));
    }
    let count = (spec.eta * x.n() as f64).floor() as usize;
    let mut indices: Vec<usize> = (0..x.n()).collect();
    indices.shuffle(rng);
    indices.truncate(count);
    indices.sort_unstable();

    let mut out = x.clone();
    let mean = x.mean();
    for &i in &indices {
        match &spec.mode {
            AdversaryMode::ReplaceFar { radius } => {
                let mut dir: Vec<f64> = (0..x.d()).map(|_| standard_normal(rng)).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
                for v in dir.iter_mut() {
                    *v /= norm;
                }
                let row: Vec<f64> =
                    mean.iter().zip(&dir).map(|(m, u)| m + radius * u).collect();
                out.set_row(i, &row)?;
            }
            AdversaryMode::ClusterDecoy { point } => {
                out.set_row(i, point)?;
            }
        }
    }
    Ok((out, indices))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_rows_are_constant() {
        let spec = GeneratorSpec {
            kind: GeneratorKind::PointMass { c: vec![1.5, -0.5] },
            n: 10,
            d: 2,
            seed: 1,
        };
        let ds = gen_dataset(&spec).unwrap();
        for i in 0..ds.n() {
            assert_eq!(ds.row(i).to_vec(), vec![1.5, -0.5]);
        }
    }

    #[test]
    fn packing_atom_and_mean_match_the_construction() {
        // alpha = 0.04, k = 2: atom at (1/6)·0.04^{-1}·e1 ≈ 4.1667·e1 with
        // mass 25·0.04² = 0.04; mean (25/6)·0.04·e1.
        let (p, atom) = packing_parameters(0.04, 2.0);
        assert!((p - 0.04).abs() < 1e-12);
        assert!((atom - 1.0 / 6.0 / 0.04).abs() < 1e-12);
        let spec = GeneratorSpec {
            kind: GeneratorKind::PackingHard {
                alpha: 0.04,
                kmoment: 2.0,
                direction: vec![1.0, 0.0],
            },
            n: 200_000,
            d: 2,
            seed: 7,
        };
        let want = spec.true_mean();
        assert!((want[0] - 25.0 / 6.0 * 0.04).abs() < 1e-12);
        let ds = gen_dataset(&spec).unwrap();
        let got = ds.mean();
        assert!((got[0] - want[0]).abs() < 0.02, "empirical mean {got:?} vs {want:?}");
    }

    #[test]
    fn gaussian_covariance_is_bounded() {
        // Empirical covariance spectral norm stays near cov_scale for a
        // reasonably large draw.
        let spec = GeneratorSpec {
            kind: GeneratorKind::Gaussian { mu: vec![0.0, 0.0, 0.0], cov_scale: 1.0 },
            n: 10_000,
            d: 3,
            seed: 3,
        };
        let ds = gen_dataset(&spec).unwrap();
        let mean = ds.mean();
        let mut cov = Array2::<f64>::zeros((3, 3));
        for i in 0..ds.n() {
            for a in 0..3 {
                for b in 0..3 {
                    cov[[a, b]] += (ds.row(i)[a] - mean[a]) * (ds.row(i)[b] - mean[b]);
                }
            }
        }
        cov /= ds.n() as f64;
        use ndarray_linalg::{Eigh, UPLO};
        let (eigs, _) = cov.eigh(UPLO::Lower).unwrap();
        let top = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(top <= 1.0 + 5.0 / (ds.n() as f64).sqrt(), "spectral norm {top}");
    }

    #[test]
    fn corrupt_touches_exactly_the_reported_rows() {
        let spec = GeneratorSpec {
            kind: GeneratorKind::Gaussian { mu: vec![0.0, 0.0], cov_scale: 0.5 },
            n: 500,
            d: 2,
            seed: 11,
        };
        let ds = gen_dataset(&spec).unwrap();
        let adv = AdversarySpec { eta: 0.01, mode: AdversaryMode::ClusterDecoy { point: vec![50.0, 50.0] } };
        let (corrupted, idx) = corrupt(&ds, &adv, &mut RngSeed::new(1).rng()).unwrap();
        assert_eq!(idx.len(), 5);
        for i in 0..ds.n() {
            if idx.contains(&i) {
                assert_eq!(corrupted.row(i).to_vec(), vec![50.0, 50.0]);
            } else {
                assert_eq!(corrupted.row(i), ds.row(i));
            }
        }
    }

    #[test]
    fn corrupt_identity_at_zero_eta() {
        let ds = Dataset::new(Array2::zeros((10, 2)) + 1.0).unwrap();
        let adv = AdversarySpec { eta: 0.0, mode: AdversaryMode::ReplaceFar { radius: 10.0 } };
        let (out, idx) = corrupt(&ds, &adv, &mut RngSeed::new(2).rng()).unwrap();
        assert!(idx.is_empty());
        assert_eq!(out, ds);
    }

    #[test]
    fn corrupt_rejects_total_replacement() {
        let ds = Dataset::new(Array2::zeros((10, 2))).unwrap();
        let adv = AdversarySpec { eta: 1.0, mode: AdversaryMode::ReplaceFar { radius: 1.0 } };
        assert!(corrupt(&ds, &adv, &mut RngSeed::new(3).rng()).is_err());
    }

    #[test]
    fn spherical_cap_mass_lower_bound() {
        // Monte-Carlo sanity for the cap bound: on S², a cap of radius 0.5
        // has measure at least ½(0.5/2)² = 0.03125.
        let mut rng = RngSeed::new(4).rng();
        let trials = 100_000;
        let mut hits = 0usize;
        for _ in 0..trials {
            let v: Vec<f64> = (0..3).map(|_| standard_normal(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let u: Vec<f64> = v.iter().map(|x| x / norm).collect();
            let dist2: f64 =
                (u[0] - 1.0).powi(2) + u[1].powi(2) + u[2].powi(2);
            if dist2 <= 0.25 {
                hits += 1;
            }
        }
        let mass = hits as f64 / trials as f64;
        assert!(mass >= 0.5 * (0.5_f64 / 2.0).powi(2), "cap mass {mass}");
    }
}
