//! Phase 2: bucketed median-of-means gradient descent.
//!
//! Samples are shuffled into `k` buckets of `m`, and only the bucket
//! means `Z_1..Z_k` are touched from here on (`r* = 2√(1/m)` is the
//! centrality scale). Each round of descent:
//!
//! 1. **Halt test** — adds Laplace noise to the relaxation value at
//!    radius `N·r*` and stops when the noisy value drops to `0.91k`;
//!    at that point no direction moves many bucket means far away, so
//!    the current iterate is close.
//! 2. **Distance estimate** — privately binary-searches the radius at
//!    which the relaxation value crosses the band `[0.92k, 0.93k]`; the
//!    crossing radius approximates `‖μ − μ̃‖` within `[0.99, 1.15]×`.
//! 3. **Gradient selection** — samples a direction from the ball of
//!    radius `1 − ζ` with log-density proportional to the pinned
//!    relaxation value at radius `d_t/1.2`, then picks between `±y₀` by
//!    an exponential mechanism on positive-inner-product counts.
//! 4. Steps `μ̃ ← μ̃ + η·d_t·g_t` with `η = 0.075`.
//!
//! All thresholds derive from one slack constant `M`: `ζ = 1/(2M)`,
//! `N = 4M(5M+1) + 10M`. The production profile uses `M = 1000`; the
//! test profile, `M = 5`, evaluated through the same formulas.

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::budget::PrivacyBudget;
use crate::coarse::{coarse_estimate, CoarseConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mech::{
    exponential_mechanism_finite, laplace_mechanism, private_binary_search, sample_logconcave,
    ConvexBody, SamplerParams,
};
use crate::report::{EstimationReport, FineRoundDiag, PhaseDiag};
use crate::rng::RngSeed;
use crate::sdp::{build_sdp_val, sdp_value, solve_sdp, BucketMeans, SolveOptions, TOL_GAP};

/// Sensitivity charged to noise mechanisms: the exact score sensitivity
/// is 1; solver slack is absorbed conservatively.
pub const NOISE_SENSITIVITY: f64 = 1.0 + 4.0 * TOL_GAP;

/// Estimation profile: same formulas, different slack constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `M = 1000`; thresholds like `M(5M+1)r*` are astronomically
    /// conservative and not reachable at desk scale.
    Paper,
    /// `M = 5`, with every derived constant recomputed from the same
    /// formulas.
    Test,
}

impl Profile {
    pub fn m_slack(self) -> f64 {
        match self {
            Profile::Paper => 1000.0,
            Profile::Test => 5.0,
        }
    }
}

/// Fine-phase configuration. Derived constants are methods so that both
/// profiles run the identical code path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FineConfig {
    /// Slack constant `M`.
    pub m_slack: f64,
    /// Step size; the descent arithmetic is tuned to 0.075.
    pub eta: f64,
    /// Round budget `T`.
    pub t_rounds: usize,
    /// Bucket size `m`.
    pub bucket_size: usize,
    /// Bucket count `k`.
    pub bucket_count: usize,
    /// Coarse-to-fine radius constant `C₀`.
    pub c0_dist: f64,
    pub eps: f64,
    pub beta: f64,
    /// Walk-step cap for the gradient sampler.
    pub sampler_max_steps: Option<u64>,
}

impl FineConfig {
    /// Derives `k`, `m`, and `T` for a dataset: `m = max(⌈1/α²⌉, ⌈n/k_max⌉)`
    /// buckets the data finely enough for the target accuracy while
    /// keeping the SDP dimension within `k_max`; `T = ⌈log₂(d·m)⌉`.
    pub fn for_dataset(
        n: usize,
        d: usize,
        alpha: f64,
        eps: f64,
        beta: f64,
        profile: Profile,
        k_max: usize,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if n == 0 || d == 0 || k_max == 0 {
            return Err(Error::invalid("need n, d, k_max >= 1".into()));
        }
        let m_accuracy = (1.0 / (alpha * alpha)).ceil() as usize;
        let m_size = n.div_ceil(k_max);
        let bucket_size = m_accuracy.max(m_size).max(1);
        let bucket_count = (n / bucket_size).max(1);
        let t_rounds = ((d * bucket_size) as f64).log2().ceil().max(1.0) as usize;
        Ok(FineConfig {
            m_slack: profile.m_slack(),
            eta: 0.075,
            t_rounds,
            bucket_size,
            bucket_count,
            c0_dist: 10.0,
            eps,
            beta,
            sampler_max_steps: Some(2000),
        })
    }

    /// `ζ = 1/(2M)`.
    pub fn zeta(&self) -> f64 {
        1.0 / (2.0 * self.m_slack)
    }

    /// `N = 4M(5M+1) + 10M`.
    pub fn n_halt(&self) -> f64 {
        let m = self.m_slack;
        4.0 * m * (5.0 * m + 1.0) + 10.0 * m
    }

    /// `r* = 2√(k/n) = 2√(1/m)`.
    pub fn r_star(&self) -> f64 {
        2.0 / (self.bucket_size as f64).sqrt()
    }

    /// Budget share of one subroutine call: four calls per round, `T`
    /// rounds, totalling exactly `eps`.
    pub fn eps_subcall(&self) -> f64 {
        self.eps / (4.0 * self.t_rounds as f64)
    }

    /// What a subcall records in the ledger; the noiseless diagnostic mode
    /// (`eps = ∞`) records zero.
    fn ledger_share(&self) -> f64 {
        if self.eps.is_finite() {
            self.eps_subcall()
        } else {
            0.0
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if !(self.m_slack >= 1.0) {
            return Err(Error::invalid("M must be >= 1".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::invalid("eta must lie in (0, 1)".into()));
        }
        if self.t_rounds == 0 || self.bucket_count == 0 || self.bucket_size == 0 || d == 0 {
            return Err(Error::invalid("rounds, buckets, and dimension must be >= 1".into()));
        }
        if !(self.eps > 0.0) || !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid("need eps > 0 and beta in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Splits the data into `k` buckets of `m = ⌊n/k⌋` by a seeded shuffle
/// and averages within buckets; leftover samples are dropped.
pub fn bucket_means(
    x: &Dataset,
    k: usize,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Result<BucketMeans> {
    if k == 0 || k > x.n() {
        return Err(Error::invalid(format!("bucket count {k} outside [1, n = {}]", x.n())));
    }
    let m = x.n() / k;
    let mut order: Vec<usize> = (0..x.n()).collect();
    order.shuffle(rng);
    let mut z = Array2::zeros((k, x.d()));
    for b in 0..k {
        for &i in &order[b * m..(b + 1) * m] {
            for j in 0..x.d() {
                z[[b, j]] += x.row(i)[j];
            }
        }
        for j in 0..x.d() {
            z[[b, j]] /= m as f64;
        }
    }
    BucketMeans::new(z)
}

/// Private halt test: `H = 1[SDP(μ̃, N·r*, Z) + Lap ≤ 0.91k]` at budget
/// `eps_subcall`.
pub fn halt_estimation(
    z: &BucketMeans,
    mu_tilde: &[f64],
    cfg: &FineConfig,
    budget: &mut PrivacyBudget,
    label: &str,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Result<(bool, f64)> {
    let eps = cfg.eps_subcall();
    budget.spend(label, cfg.ledger_share())?;
    let radius = cfg.n_halt() * cfg.r_star();
    let value = sdp_value(mu_tilde, radius, z, &SolveOptions::default())?;
    let noisy = laplace_mechanism(value, NOISE_SENSITIVITY, eps, rng)?;
    Ok((noisy <= 0.91 * z.k() as f64, noisy))
}

/// Private distance estimate: noisy binary search for the radius where
/// the relaxation value crosses `[0.92k, 0.93k]`, over `[0, 1.14·C₀√d]`
/// at accuracy `r*`.
pub fn distance_estimation(
    z: &BucketMeans,
    mu_tilde: &[f64],
    cfg: &FineConfig,
    budget: &mut PrivacyBudget,
    label: &str,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Result<f64> {
    let eps = cfg.eps_subcall();
    budget.spend(label, cfg.ledger_share())?;
    let k = z.k() as f64;
    let domain = 1.14 * cfg.c0_dist * (z.d() as f64).sqrt();
    let opts = SolveOptions::default();
    let out = private_binary_search(
        |r| sdp_value(mu_tilde, r, z, &opts),
        domain,
        0.92 * k,
        0.93 * k,
        cfg.r_star(),
        NOISE_SENSITIVITY,
        eps,
        rng,
    )?;
    Ok(out.value)
}

/// Private gradient selection: a log-concave sample over the ball of
/// radius `1 − ζ` scored by the pinned relaxation at `r = d_t/1.2`,
/// followed by a two-candidate exponential mechanism on `±y₀`. Each stage
/// spends one subcall share.
pub fn gradient_estimation(
    z: &BucketMeans,
    mu_tilde: &[f64],
    d_t: f64,
    cfg: &FineConfig,
    budget: &mut PrivacyBudget,
    label_stage1: &str,
    label_stage2: &str,
    rng: &mut rand_chacha::ChaCha12Rng,
) -> Result<(Vec<f64>, bool)> {
    let eps = cfg.eps_subcall();
    budget.spend(label_stage1, cfg.ledger_share())?;
    let (k, d) = (z.k() as f64, z.d() as f64);
    let zeta = cfg.zeta();
    let r = d_t / 1.2;
    let body = ConvexBody::ball(vec![0.0; z.d()], 1.0 - zeta)?;
    let lipschitz = d.sqrt() * k / zeta;
    let opts = SolveOptions::default();
    let params = SamplerParams::split_evenly(eps).with_max_steps(cfg.sampler_max_steps);
    let run = sample_logconcave(
        |y| Ok(solve_sdp(&build_sdp_val(y, mu_tilde, r, z)?, &opts)?.value),
        lipschitz,
        &body,
        &params,
        rng,
    )?;
    let y0 = run.point;

    budget.spend(label_stage2, cfg.ledger_share())?;
    let count_positive = |y: &[f64]| -> f64 {
        (0..z.k())
            .filter(|&i| {
                let dot: f64 =
                    z.row(i).iter().zip(mu_tilde).zip(y).map(|((zi, m), yj)| (zi - m) * yj).sum();
                dot > 0.0
            })
            .count() as f64
    };
    let neg: Vec<f64> = y0.iter().map(|v| -v).collect();
    let scores = [count_positive(&y0), count_positive(&neg)];
    let pick = exponential_mechanism_finite(&scores, NOISE_SENSITIVITY, eps, rng)?;
    let flipped = pick == 1;
    Ok((if flipped { neg } else { y0 }, flipped))
}

/// The exact descent update `μ̃_t = μ̃_{t−1} + η·d_t·g_t`.
pub fn gradient_step(mu_prev: &[f64], eta: f64, d_t: f64, g_t: &[f64]) -> Vec<f64> {
    mu_prev.iter().zip(g_t).map(|(m, g)| m + eta * d_t * g).collect()
}

/// Runs the full fine phase from an initial estimate. ε-DP overall: four
/// subcall shares per round, `T` rounds, totalling `eps`; whatever a
/// halted run leaves unspent is recorded as a reservation so the ledger
/// always sums to the phase budget.
pub fn fine_estimation(
    x: &Dataset,
    mu0: &[f64],
    cfg: &FineConfig,
    budget: &mut PrivacyBudget,
    seed: RngSeed,
) -> Result<(Vec<f64>, PhaseDiag)> {
    cfg.validate(x.d())?;
    if mu0.len() != x.d() {
        return Err(Error::dim("initial estimate has wrong dimension".into()));
    }
    let mut rng = seed.rng();
    let z = bucket_means(x, cfg.bucket_count, &mut rng)?;

    let mut mu = mu0.to_vec();
    let mut rounds: Vec<FineRoundDiag> = Vec::with_capacity(cfg.t_rounds);
    let mut halted = false;
    let spent_before = budget.spent();

    for t in 1..=cfg.t_rounds {
        let (halt, noisy) =
            halt_estimation(&z, &mu, cfg, budget, &format!("fine.halt[{t}]"), &mut rng)?;
        if halt {
            rounds.push(FineRoundDiag {
                round: t,
                halted: true,
                noisy_halt_value: noisy,
                distance: None,
                step_norm: None,
                gradient_flipped: None,
                epsilon_spent: cfg.ledger_share(),
            });
            halted = true;
            break;
        }
        let d_t =
            distance_estimation(&z, &mu, cfg, budget, &format!("fine.distance[{t}]"), &mut rng)?;
        if !d_t.is_finite() || d_t <= 0.0 {
            // Degenerate distance: halt with the current estimate rather
            // than stepping; privacy is unaffected.
            rounds.push(FineRoundDiag {
                round: t,
                halted: true,
                noisy_halt_value: noisy,
                distance: Some(d_t),
                step_norm: None,
                gradient_flipped: None,
                epsilon_spent: 2.0 * cfg.ledger_share(),
            });
            halted = true;
            break;
        }
        let (g, flipped) = gradient_estimation(
            &z,
            &mu,
            d_t,
            cfg,
            budget,
            &format!("fine.gradient1[{t}]"),
            &format!("fine.gradient2[{t}]"),
            &mut rng,
        )?;
        let next = gradient_step(&mu, cfg.eta, d_t, &g);
        let step_norm =
            next.iter().zip(&mu).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        mu = next;
        rounds.push(FineRoundDiag {
            round: t,
            halted: false,
            noisy_halt_value: noisy,
            distance: Some(d_t),
            step_norm: Some(step_norm),
            gradient_flipped: Some(flipped),
            epsilon_spent: 4.0 * cfg.ledger_share(),
        });
    }

    // Reserve the unspent remainder: the phase is charged its full budget
    // whether or not every round ran.
    if cfg.eps.is_finite() {
        let spent = budget.spent() - spent_before;
        let reserve = (cfg.eps - spent).max(0.0);
        if reserve > 1e-15 {
            budget.spend("fine.reserved_unspent", reserve)?;
        }
    }

    Ok((
        mu,
        PhaseDiag::Fine {
            bucket_count: cfg.bucket_count,
            bucket_size: cfg.bucket_size,
            r_star: cfg.r_star(),
            halted,
            rounds,
        },
    ))
}

/// End-to-end private mean estimation: coarse phase at `ε/2`, fine phase
/// at `ε/2`, bucket size from the accuracy target (`m = ⌈1/α²⌉`, grown if
/// needed to respect the bucket-count cap).
#[allow(clippy::too_many_arguments)]
pub fn private_mean_estimate(
    x: &Dataset,
    r_prior: f64,
    alpha: f64,
    eps: f64,
    beta: f64,
    seed: RngSeed,
    profile: Profile,
    k_max: usize,
) -> Result<EstimationReport> {
    let mut budget = PrivacyBudget::new(eps)?;
    let mut phases = Vec::new();

    let coarse_cfg = CoarseConfig::new(r_prior, eps / 2.0, beta / 2.0);
    let (mu0, coarse_diag) = coarse_estimate(x, &coarse_cfg, &mut budget, seed.child(1))?;
    phases.push(coarse_diag);

    let fine_cfg =
        FineConfig::for_dataset(x.n(), x.d(), alpha, eps / 2.0, beta / 2.0, profile, k_max)?;
    let (estimate, fine_diag) = fine_estimation(x, &mu0, &fine_cfg, &mut budget, seed.child(2))?;
    phases.push(fine_diag);

    let config = serde_json::json!({
        "r_prior": r_prior,
        "alpha": alpha,
        "eps": eps,
        "beta": beta,
        "profile": profile,
        "k_max": k_max,
        "coarse": coarse_cfg,
        "fine": fine_cfg,
    });
    Ok(EstimationReport {
        estimate,
        phases,
        ledger: budget.ledger.clone(),
        epsilon_total: eps,
        seed,
        config,
    })
}
