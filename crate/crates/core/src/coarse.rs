//! Phase 1: privately localize the mean from a prior ball of radius `R`
//! down to `O(√d)`.
//!
//! Two routes. The coordinate-wise route runs a one-dimensional
//! exponential mechanism over the grid `{R*·k : ⌊−R/R*⌋ ≤ k ≤ ⌈R/R*⌉}` in
//! each coordinate, scored by how many samples sit within `2R*` of the
//! grid point, with per-coordinate budget `ε/d` and failure share `β/d`.
//! The grid may be astronomically long, so the mechanism is materialized
//! lazily: each sample touches at most 5 bins.
//!
//! The direct route iterates `m = ⌊log₅(R/(1000 R*))⌋` rounds; round `t`
//! samples a shift from a log-concave density over the ball of radius
//! `R_t + R_t/1000` (`R_t = R·0.2^t`) whose exponent is the degree-4
//! relaxation value counting samples within `R_t/100` of the candidate,
//! then recenters the data by the sampled shift. Each round contracts the
//! localization radius by 5×.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::PrivacyBudget;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mech::{lazy_exponential_mechanism, sample_logconcave, ConvexBody, SamplerParams};
use crate::report::{CoordDiag, PhaseDiag, SosRoundDiag};
use crate::rng::RngSeed;
use crate::sdp::{coarse_sdp_value, CoarseLimits, SolveOptions};

/// Which coarse route to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Auto,
    Coordinatewise,
    Sos,
}

/// Coarse-phase configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoarseConfig {
    /// Prior bound `‖μ‖ ≤ R`.
    pub r_prior: f64,
    /// Per-phase radius for the direct route; the coordinate-wise route
    /// derives its own from `alpha_frac`.
    pub r_star: Option<f64>,
    /// Outlier fraction budget; `< 1/3` for the 1-d mechanism, `< 10⁻⁴`
    /// for the direct route.
    pub alpha_frac: f64,
    pub strategy: Strategy,
    pub eps: f64,
    pub beta: f64,
    /// Lifts the dense degree-4 size guard (n ≤ 30, d ≤ 5) to (60, 8).
    pub force: bool,
    /// Walk-step cap for the direct route's sampler.
    pub sampler_max_steps: Option<u64>,
    /// Test hook: run exactly this many direct-route rounds.
    pub rounds_override: Option<usize>,
}

impl CoarseConfig {
    pub fn new(r_prior: f64, eps: f64, beta: f64) -> Self {
        CoarseConfig {
            r_prior,
            r_star: None,
            alpha_frac: 0.01,
            strategy: Strategy::Auto,
            eps,
            beta,
            force: false,
            sampler_max_steps: Some(4000),
            rounds_override: None,
        }
    }

    /// Grid scale of the coordinate-wise route: `R* = √(2/α)`.
    pub fn coordinatewise_r_star(&self) -> f64 {
        (2.0 / self.alpha_frac).sqrt()
    }

    fn validate(&self) -> Result<()> {
        if !(self.r_prior > 0.0) || !self.r_prior.is_finite() {
            return Err(Error::invalid(format!("R must be positive, got {}", self.r_prior)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::invalid("eps must be positive".into()));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid("beta must lie in (0, 1)".into()));
        }
        if !(self.alpha_frac > 0.0 && self.alpha_frac < 1.0 / 3.0) {
            return Err(Error::invalid(format!(
                "alpha_frac must lie in (0, 1/3), got {}",
                self.alpha_frac
            )));
        }
        Ok(())
    }
}

/// `|{i : |X_i − y| ≤ 2R*}|`, the 1-d mechanism score.
pub fn score_1d(y: f64, xs: &[f64], r_star: f64) -> usize {
    xs.iter().filter(|&&x| (x - y).abs() <= 2.0 * r_star).count()
}

fn grid_bounds(r: f64, r_star: f64) -> (i128, i128) {
    ((-r / r_star).floor() as i128, (r / r_star).ceil() as i128)
}

/// One-dimensional coarse estimation: the exponential mechanism over the
/// grid `I = {R*·k}`, materialized lazily (≤ 5 bins per sample). ε-DP;
/// on well-clustered data the output lands within `3R*` of the cluster.
pub fn coarse_1d_estimate(
    xs: &[f64],
    r: f64,
    r_star: f64,
    eps: f64,
    beta: f64,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Result<f64> {
    if !(r_star >= 1.0) || !(r > r_star) {
        return Err(Error::invalid(format!("need R > R* >= 1, got R={r}, R*={r_star}")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid("beta must lie in (0, 1)".into()));
    }
    let (kmin, kmax) = grid_bounds(r, r_star);
    if kmax < kmin {
        return Err(Error::invalid("grid is empty".into()));
    }
    let bins = (kmax - kmin + 1) as u128;

    let bins_of = |x: &f64| -> Result<Vec<u128>> {
        let lo = ((x - 2.0 * r_star) / r_star).ceil() as i128;
        let hi = ((x + 2.0 * r_star) / r_star).floor() as i128;
        let lo = lo.max(kmin);
        let hi = hi.min(kmax);
        let mut out = Vec::with_capacity(5);
        let mut k = lo;
        while k <= hi {
            let offset = k
                .checked_sub(kmin)
                .ok_or_else(|| Error::BinIndexOverflow("grid offset underflow".into()))?;
            out.push(offset as u128);
            k += 1;
        }
        Ok(out)
    };

    let chosen = lazy_exponential_mechanism(bins, xs, bins_of, eps, rng)?;
    Ok((kmin + chosen as i128) as f64 * r_star)
}

/// Runs the 1-d mechanism per coordinate at budget `ε/d` and failure
/// share `β/d`; coordinates run in parallel on disjoint streams.
pub fn coarse_estimate_coordinatewise(
    x: &Dataset,
    cfg: &CoarseConfig,
    budget: &mut PrivacyBudget,
    seed: RngSeed,
) -> Result<(Vec<f64>, PhaseDiag)> {
    cfg.validate()?;
    let d = x.d();
    let r_star = cfg.coordinatewise_r_star();
    let eps_j = cfg.eps / d as f64;
    let beta_j = cfg.beta / d as f64;
    let (kmin, kmax) = grid_bounds(cfg.r_prior, r_star);
    let bins = (kmax - kmin + 1) as u128;

    let results: Vec<Result<f64>> = (0..d)
        .into_par_iter()
        .map(|j| {
            let mut rng = seed.child(j as u64).rng();
            coarse_1d_estimate(&x.column_vec(j), cfg.r_prior, r_star, eps_j, beta_j, &mut rng)
        })
        .collect();

    let mut estimate = Vec::with_capacity(d);
    let mut coords = Vec::with_capacity(d);
    for (j, res) in results.into_iter().enumerate() {
        let y = res?;
        budget.spend(format!("coarse.coord[{j}]"), eps_j)?;
        coords.push(CoordDiag { coordinate: j, chosen: y, grid_bins: bins, epsilon_spent: eps_j });
        estimate.push(y);
    }
    Ok((estimate, PhaseDiag::CoarseCoordinatewise { r_star, coordinates: coords }))
}

/// Round radii of the direct route: `R_t = R · 0.2^t`.
pub fn sos_round_radii(r: f64, rounds: usize) -> Vec<f64> {
    (0..rounds).map(|t| r * 0.2_f64.powi(t as i32)).collect()
}

/// Number of direct-route rounds, `⌊log₅(R / (1000·R*))⌋`.
pub fn sos_round_count(r: f64, r_star: f64) -> usize {
    let ratio = r / (1000.0 * r_star);
    if ratio < 5.0 {
        0
    } else {
        (ratio.ln() / 5.0_f64.ln() + 1e-12).floor() as usize
    }
}

/// The bare auto-dispatch comparison: coordinate-wise wins when
/// `ln R ≥ d`, the regime where its sample complexity is no worse.
pub fn auto_rule(r_prior: f64, d: usize) -> Strategy {
    if r_prior.ln() >= d as f64 {
        Strategy::Coordinatewise
    } else {
        Strategy::Sos
    }
}

/// The recenter-and-sum round loop of the direct route, with the
/// candidate selection injected. The production path passes the
/// log-concave sampler; oracle-mode tests pass an argmax-style chooser.
///
/// `choose(t, R_t, recentered)` returns the round's shift in the
/// recentered frame.
pub fn sos_round_driver<F>(
    x: &Dataset,
    r: f64,
    rounds: usize,
    mut choose: F,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)>
where
    F: FnMut(usize, f64, &Array2<f64>) -> Result<Vec<f64>>,
{
    let d = x.d();
    let mut recentered = x.rows().clone();
    let mut total = vec![0.0; d];
    let mut shifts = Vec::with_capacity(rounds);
    let radii = sos_round_radii(r, rounds);
    for (t, &r_t) in radii.iter().enumerate() {
        let y_t = choose(t, r_t, &recentered)?;
        if y_t.len() != d {
            return Err(Error::dim("round shift has wrong dimension".into()));
        }
        for mut row in recentered.rows_mut() {
            for j in 0..d {
                row[j] -= y_t[j];
            }
        }
        for j in 0..d {
            total[j] += y_t[j];
        }
        shifts.push(y_t);
    }
    Ok((total, shifts))
}

/// Direct coarse estimation via the degree-4-scored exponential mechanism.
pub fn coarse_estimate_sos(
    x: &Dataset,
    cfg: &CoarseConfig,
    budget: &mut PrivacyBudget,
    seed: RngSeed,
) -> Result<(Vec<f64>, PhaseDiag)> {
    cfg.validate()?;
    let r_star = cfg.r_star.ok_or_else(|| Error::invalid("direct route needs r_star".into()))?;
    if !(cfg.r_prior >= 1000.0 * r_star && 1000.0 * r_star > 1.0) {
        return Err(Error::invalid(format!(
            "direct route needs R >= 1000·R* > 1, got R={}, R*={r_star}",
            cfg.r_prior
        )));
    }
    if cfg.rounds_override.is_none() && !(cfg.alpha_frac < 1e-4) {
        return Err(Error::invalid(format!(
            "direct route needs alpha_frac < 1e-4, got {}",
            cfg.alpha_frac
        )));
    }
    let limits = if cfg.force {
        CoarseLimits { max_n: 60, max_d: 8 }
    } else {
        CoarseLimits::default()
    };
    if x.n() > limits.max_n || x.d() > limits.max_d {
        return Err(Error::DeskLimit(format!(
            "direct route refuses n={} d={} (force={})",
            x.n(),
            x.d(),
            cfg.force
        )));
    }

    let rounds = cfg.rounds_override.unwrap_or_else(|| sos_round_count(cfg.r_prior, r_star));
    let (n, d) = (x.n() as f64, x.d() as f64);
    let opts = SolveOptions::default();
    let mut diags: Vec<SosRoundDiag> = Vec::with_capacity(rounds);
    let eps_round = if rounds > 0 { cfg.eps / rounds as f64 } else { 0.0 };

    let seed_base = seed;
    let (total, _shifts) = sos_round_driver(x, cfg.r_prior, rounds, |t, r_t, recentered| {
        let body = ConvexBody::ball(vec![0.0; x.d()], r_t + r_t / 1000.0)?;
        let lipschitz = n * d.sqrt() / r_t;
        let params = SamplerParams::split_evenly(eps_round).with_max_steps(cfg.sampler_max_steps);
        let mut rng = seed_base.child(t as u64).rng();
        let run = sample_logconcave(
            |y| coarse_sdp_value(y, r_t, r_t / 100.0, recentered, &limits, &opts),
            lipschitz,
            &body,
            &params,
            &mut rng,
        )?;
        let score = coarse_sdp_value(&run.point, r_t, r_t / 100.0, recentered, &limits, &opts)?;
        diags.push(SosRoundDiag {
            round: t,
            radius: r_t,
            score_at_output: score,
            epsilon_spent: eps_round,
            sampler: Some(run.clone()),
        });
        Ok(run.point)
    })?;

    for diag in &diags {
        budget.spend(format!("coarse.sos.round[{}]", diag.round), diag.epsilon_spent)?;
    }
    Ok((total, PhaseDiag::CoarseSos { rounds: diags }))
}

/// Strategy dispatch: `auto` picks the coordinate-wise route when
/// `ln R ≥ d` (or when the instance exceeds the degree-4 size guard),
/// otherwise the direct route.
pub fn coarse_estimate(
    x: &Dataset,
    cfg: &CoarseConfig,
    budget: &mut PrivacyBudget,
    seed: RngSeed,
) -> Result<(Vec<f64>, PhaseDiag)> {
    cfg.validate()?;
    let strategy = match cfg.strategy {
        Strategy::Coordinatewise => Strategy::Coordinatewise,
        Strategy::Sos => Strategy::Sos,
        Strategy::Auto => {
            let oversize = (x.n() > 30 || x.d() > 5) && !cfg.force;
            if oversize || cfg.r_star.is_none() {
                Strategy::Coordinatewise
            } else {
                auto_rule(cfg.r_prior, x.d())
            }
        }
    };
    match strategy {
        Strategy::Coordinatewise => coarse_estimate_coordinatewise(x, cfg, budget, seed),
        Strategy::Sos => coarse_estimate_sos(x, cfg, budget, seed),
        Strategy::Auto => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn constant_dataset(value: &[f64], n: usize) -> Dataset {
        let d = value.len();
        let mut m = Array2::zeros((n, d));
        for i in 0..n {
            for j in 0..d {
                m[[i, j]] = value[j];
            }
        }
        Dataset::new(m).unwrap()
    }

    #[test]
    fn score_counts_within_two_rstar() {
        // X = [0, 0.5, 3], R* = 1: points within 2 of y = 0 are {0, 0.5}.
        let xs = [0.0, 0.5, 3.0];
        assert_eq!(score_1d(0.0, &xs, 1.0), 2);
        assert_eq!(score_1d(100.0, &xs, 1.0), 0);
    }

    #[test]
    fn score_matches_independent_recount() {
        let mut rng = RngSeed::new(41).rng();
        use rand::Rng;
        let xs: Vec<f64> = (0..200).map(|_| rng.random::<f64>() * 20.0 - 10.0).collect();
        for y in [-3.0, 0.0, 2.5] {
            // Second implementation: sort and two-pointer window.
            let mut sorted = xs.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let lo = sorted.partition_point(|&v| v < y - 2.0);
            let hi = sorted.partition_point(|&v| v <= y + 2.0);
            assert_eq!(score_1d(y, &xs, 1.0), hi - lo);
        }
    }

    #[test]
    fn one_d_concentrates_near_the_cluster() {
        // 200 copies of 0.3 with eps = ∞: the output is a grid point within
        // 3R* of the cluster.
        let xs = vec![0.3; 200];
        let y = coarse_1d_estimate(&xs, 1e6, 1.0, f64::INFINITY, 0.05, &mut RngSeed::new(5).rng())
            .unwrap();
        assert!((y - 0.3).abs() <= 3.0, "estimate {y}");
        assert!((y - y.round()).abs() < 1e-9, "output must sit on the R* = 1 grid");
    }

    #[test]
    fn one_d_is_deterministic_per_seed() {
        let xs: Vec<f64> = (0..50).map(|i| (i % 7) as f64).collect();
        let a = coarse_1d_estimate(&xs, 100.0, 1.0, 2.0, 0.05, &mut RngSeed::new(6).rng()).unwrap();
        let b = coarse_1d_estimate(&xs, 100.0, 1.0, 2.0, 0.05, &mut RngSeed::new(6).rng()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coordinatewise_budget_is_split_evenly() {
        let ds = constant_dataset(&[2.0, -1.0, 0.5], 100);
        let cfg = CoarseConfig::new(100.0, 1.0, 0.1);
        let mut budget = PrivacyBudget::new(1.0).unwrap();
        let (est, diag) = coarse_estimate_coordinatewise(&ds, &cfg, &mut budget, RngSeed::new(7))
            .unwrap();
        assert_eq!(est.len(), 3);
        assert_eq!(budget.ledger.len(), 3);
        for e in &budget.ledger {
            assert!((e.epsilon - 1.0 / 3.0).abs() < 1e-12);
        }
        // Degenerate data: per-coordinate error bounded by 3·R*.
        let r_star = cfg.coordinatewise_r_star();
        if let PhaseDiag::CoarseCoordinatewise { coordinates, .. } = diag {
            for (j, c) in coordinates.iter().enumerate() {
                assert!((c.chosen - ds.row(0)[j]).abs() <= 3.0 * r_star);
            }
        } else {
            panic!("wrong phase diag");
        }
    }

    #[test]
    fn round_radii_contract_by_five() {
        let radii = sos_round_radii(100.0, 3);
        assert_eq!(radii.len(), 3);
        assert!((radii[0] - 100.0).abs() < 1e-12);
        assert!((radii[1] - 20.0).abs() < 1e-12);
        assert!((radii[2] - 4.0).abs() < 1e-12);
        assert_eq!(sos_round_count(100.0, 0.004), 2); // log5(25) = 2
        assert_eq!(sos_round_count(100.0, 0.1), 0); // ratio 1: zero rounds
    }

    #[test]
    fn driver_recenters_and_telescopes() {
        // Feeding the residual to the driver telescopes exactly onto the
        // planted point.
        let target = vec![3.0, -2.0];
        let ds = constant_dataset(&target, 5);
        let (total, shifts) = sos_round_driver(&ds, 100.0, 3, |_t, _r, recentered| {
            Ok(vec![recentered[[0, 0]], recentered[[0, 1]]])
        })
        .unwrap();
        assert!((total[0] - 3.0).abs() < 1e-12 && (total[1] + 2.0).abs() < 1e-12);
        // After the first round the residual is zero.
        assert!((shifts[1][0]).abs() < 1e-12);
    }

    #[test]
    fn auto_rule_prefers_direct_route_in_high_dimension() {
        // R = 10, d = 50: ln R << d, so the comparison favors the direct
        // route; at R = 1e6, d = 4 it favors coordinate-wise.
        assert_eq!(auto_rule(10.0, 50), Strategy::Sos);
        assert_eq!(auto_rule(1e6, 4), Strategy::Coordinatewise);
    }

    #[test]
    fn sos_rejects_oversize_without_force() {
        let ds = constant_dataset(&[0.0, 0.0], 40);
        let mut cfg = CoarseConfig::new(1e4, 1.0, 0.1);
        cfg.r_star = Some(1.0);
        cfg.strategy = Strategy::Sos;
        cfg.alpha_frac = 5e-5;
        let mut budget = PrivacyBudget::new(1.0).unwrap();
        let err = coarse_estimate_sos(&ds, &cfg, &mut budget, RngSeed::new(1));
        assert!(matches!(err, Err(Error::DeskLimit(_))));
    }
}
