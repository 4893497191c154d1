//! The bucket-mean direction programs.
//!
//! Block layout of the `(1 + k + d) × (1 + k + d)` moment matrix:
//!
//! ```text
//!        ⎡ 1   bᵀ   vᵀ ⎤
//!    X = ⎢ b   B    W  ⎥        row/col 0: constant
//!        ⎣ v   Wᵀ   V  ⎦        rows 1..=k: b, rows k+1..: v
//! ```
//!
//! `build_sdp` maximizes `tr(B)` subject to `X ⪰ 0`, `X₀₀ = 1`,
//! `B_ii = b_i`, `tr(V) = 1`, `B_ii r ≤ ⟨Z_i − μ̃, W_i⟩`. With the extra
//! pinning `v = y` this becomes the mechanism score `sdp_val`.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sdp::solver::SparseRow;
use crate::sdp::{pe_mean_v, solve_sdp, ProgramKind, SdpProblem, SdpSolution, SolveOptions};

/// Per-bucket averages `Z_1..Z_k`, each of dimension `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketMeans {
    /// `k × d`, one bucket mean per row.
    pub z: Array2<f64>,
}

impl BucketMeans {
    pub fn new(z: Array2<f64>) -> Result<Self> {
        if z.nrows() == 0 || z.ncols() == 0 {
            return Err(Error::invalid("bucket means need k >= 1 and d >= 1".into()));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("bucket means must be finite".into()));
        }
        Ok(BucketMeans { z })
    }

    pub fn k(&self) -> usize {
        self.z.nrows()
    }

    pub fn d(&self) -> usize {
        self.z.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.z.row(i)
    }
}

/// Index bookkeeping for the fine moment matrix.
#[derive(Debug, Clone, Copy)]
pub struct FineMomentMatrix {
    pub k: usize,
    pub d: usize,
}

impl FineMomentMatrix {
    pub fn dim(&self) -> usize {
        1 + self.k + self.d
    }

    pub fn b(&self, i: usize) -> usize {
        1 + i
    }

    pub fn v(&self, j: usize) -> usize {
        1 + self.k + j
    }
}

fn check_center(mu_tilde: &[f64], d: usize) -> Result<()> {
    if mu_tilde.len() != d {
        return Err(Error::dim(format!("center has dim {} but data has d={}", mu_tilde.len(), d)));
    }
    if mu_tilde.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("center must be finite".into()));
    }
    Ok(())
}

fn fine_common(mu_tilde: &[f64], r: f64, z: &BucketMeans, kind: ProgramKind) -> Result<SdpProblem> {
    check_center(mu_tilde, z.d())?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("radius must be finite and >= 0, got {r}")));
    }
    let (k, d) = (z.k(), z.d());
    let ix = FineMomentMatrix { k, d };

    let mut objective = SparseRow::default();
    for i in 0..k {
        objective.push(0, ix.b(i), ix.b(i), 1.0);
    }

    let mut eq = Vec::with_capacity(2 + k);
    let mut unit = SparseRow::default();
    unit.push(0, 0, 0, 1.0);
    eq.push((unit, 1.0));
    for i in 0..k {
        // B_ii = b_i  (idempotence row).
        let mut row = SparseRow::default();
        row.push(0, ix.b(i), ix.b(i), 1.0);
        row.push(0, 0, ix.b(i), -1.0);
        eq.push((row, 0.0));
    }
    let mut trace_v = SparseRow::default();
    for j in 0..d {
        trace_v.push(0, ix.v(j), ix.v(j), 1.0);
    }
    eq.push((trace_v, 1.0));

    let mut ineq = Vec::with_capacity(k);
    for i in 0..k {
        // B_ii r − ⟨Z_i − μ̃, W_i⟩ ≤ 0.
        let mut row = SparseRow::default();
        row.push(0, ix.b(i), ix.b(i), r);
        for j in 0..d {
            row.push(0, ix.b(i), ix.v(j), -(z.z[[i, j]] - mu_tilde[j]));
        }
        ineq.push((row, 0.0));
    }

    let v_cells = (0..d).map(|j| (0usize, 0usize, ix.v(j))).collect();
    Ok(SdpProblem {
        kind,
        psd_dims: vec![ix.dim()],
        objective,
        eq,
        ineq,
        v_cells,
        label: format!("fine k={k} d={d} r={r:.6}"),
    })
}

/// Direction program with free direction.
pub fn build_sdp(mu_tilde: &[f64], r: f64, z: &BucketMeans) -> Result<SdpProblem> {
    fine_common(mu_tilde, r, z, ProgramKind::Fine)
}

/// Direction program with the direction pinned to `y`, `‖y‖ ≤ 1`.
///
/// Always feasible for `‖y‖ ≤ 1`: `b = 0`, `V = yyᵀ + ((1 − ‖y‖²)/d) I`
/// satisfies every constraint, which the builder checks in debug builds.
pub fn build_sdp_val(y: &[f64], mu_tilde: &[f64], r: f64, z: &BucketMeans) -> Result<SdpProblem> {
    let d = z.d();
    if y.len() != d {
        return Err(Error::dim(format!("y has dim {} but data has d={d}", y.len())));
    }
    let norm2: f64 = y.iter().map(|v| v * v).sum();
    if norm2 > 1.0 + 1e-12 {
        return Err(Error::invalid(format!("‖y‖ = {} > 1 rejected", norm2.sqrt())));
    }
    let mut p = fine_common(mu_tilde, r, z, ProgramKind::FineVal)?;
    let ix = FineMomentMatrix { k: z.k(), d };
    for (j, &yj) in y.iter().enumerate() {
        let mut row = SparseRow::default();
        row.push(0, 0, ix.v(j), 1.0);
        p.eq.push((row, yj));
    }
    p.label = format!("fine-val k={} d={d} r={r:.6}", z.k());
    debug_assert!(sdp_val_feasible_start(y, d), "pinned start construction must be feasible");
    Ok(p)
}

// The feasible-start construction for the pinned program: b = 0,
// V = yy^T + ((1-|y|^2)/d) I has trace exactly 1 and is PSD.
fn sdp_val_feasible_start(y: &[f64], d: usize) -> bool {
    let norm2: f64 = y.iter().map(|v| v * v).sum();
    let trace = norm2 + (1.0 - norm2) / d as f64 * d as f64;
    (trace - 1.0).abs() < 1e-9 && norm2 <= 1.0 + 1e-9
}

/// Optimal value of the free-direction program.
pub fn sdp_value(mu_tilde: &[f64], r: f64, z: &BucketMeans, opts: &SolveOptions) -> Result<f64> {
    Ok(solve_sdp(&build_sdp(mu_tilde, r, z)?, opts)?.value)
}

/// Optimal value of the pinned program (the mechanism score).
pub fn sdp_val(
    y: &[f64],
    mu_tilde: &[f64],
    r: f64,
    z: &BucketMeans,
    opts: &SolveOptions,
) -> Result<f64> {
    Ok(solve_sdp(&build_sdp_val(y, mu_tilde, r, z)?, opts)?.value)
}

/// Sensitivity witness: zeroing row/column of bucket `i` in the primal
/// must stay PSD, stay feasible, and lose at most 1 of objective. Returns
/// `(objective of the witness, min eigenvalue, max feasibility violation)`.
pub fn fine_nulling_witness(sol: &SdpSolution, z: &BucketMeans, mu_tilde: &[f64], r: f64, bucket: usize) -> Result<(f64, f64, f64)> {
    use ndarray_linalg::{Eigh, UPLO};
    let (k, d) = (z.k(), z.d());
    let ix = FineMomentMatrix { k, d };
    let mut m = sol.primal[0].clone();
    let row = ix.b(bucket);
    for t in 0..m.nrows() {
        m[[row, t]] = 0.0;
        m[[t, row]] = 0.0;
    }
    let (eigs, _) = m.eigh(UPLO::Lower).map_err(|e| Error::SolverFailure {
        status: "numerical",
        detail: format!("witness eig failed: {e}"),
    })?;
    let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut feas = 0.0_f64;
    feas = feas.max((m[[0, 0]] - 1.0).abs());
    for i in 0..k {
        feas = feas.max((m[[ix.b(i), ix.b(i)]] - m[[0, ix.b(i)]]).abs());
        let zi = z.row(i);
        let mut lhs = r * m[[ix.b(i), ix.b(i)]];
        for j in 0..d {
            lhs -= (zi[j] - mu_tilde[j]) * m[[ix.b(i), ix.v(j)]];
        }
        feas = feas.max(lhs.max(0.0));
    }
    let tr_v: f64 = (0..d).map(|j| m[[ix.v(j), ix.v(j)]]).sum();
    feas = feas.max((tr_v - 1.0).abs());

    let obj: f64 = (0..k).map(|i| m[[ix.b(i), ix.b(i)]]).sum();
    Ok((obj, min_eig, feas))
}

/// Integral count `|{i : ⟨Z_i − μ̃, y⟩ ≥ r}|`, the value of the pinned
/// quadratic program for a fixed direction.
pub fn quad_val_count(y: &[f64], mu_tilde: &[f64], r: f64, z: &BucketMeans) -> usize {
    let yv = Array1::from_vec(y.to_vec());
    let mu = Array1::from_vec(mu_tilde.to_vec());
    (0..z.k())
        .filter(|&i| {
            let zi = z.row(i).to_owned() - &mu;
            zi.dot(&yv) >= r
        })
        .count()
}

/// `pE[v]` readout, re-exported here for callers working with fine programs.
pub fn fine_pe_v(sol: &SdpSolution) -> Vec<f64> {
    pe_mean_v(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::TOL_GAP;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    fn cluster_at(offset: &[f64], k: usize) -> BucketMeans {
        let d = offset.len();
        let mut z = Array2::zeros((k, d));
        for i in 0..k {
            for j in 0..d {
                z[[i, j]] = offset[j];
            }
        }
        BucketMeans::new(z).unwrap()
    }

    #[test]
    fn aligned_cluster_attains_k() {
        // Z_i = μ̃ + 2r·e1 for all i  =>  optimum k (v = e1, b = 1).
        let r = 0.8;
        let z = cluster_at(&[2.0 * r, 0.0], 4);
        let v = sdp_value(&[0.0, 0.0], r, &z, &opts()).unwrap();
        assert_abs_diff_eq!(v, 4.0, epsilon = 1e-5);
    }

    #[test]
    fn zero_radius_is_vacuous() {
        // r = 0: W_i = 0 satisfies 0 <= 0, so the optimum is k.
        let z = BucketMeans::new(array![[0.3, -0.2], [-0.5, 0.1], [0.0, 0.4]]).unwrap();
        let v = sdp_value(&[0.0, 0.0], 0.0, &z, &opts()).unwrap();
        assert_abs_diff_eq!(v, 3.0, epsilon = 1e-5);
    }

    #[test]
    fn relaxation_dominates_integral_enumeration() {
        // Oracle: exhaustive max over b in {0,1}^3 and v on a 0.01-grid of
        // the unit circle; the relaxation dominates the integral program.
        let z = BucketMeans::new(array![[1.2, 0.3], [-0.4, 0.9], [0.6, -1.1]]).unwrap();
        let mu = [0.1, -0.2];
        let r = 0.7;
        let mut best = 0usize;
        let steps = (2.0 * std::f64::consts::PI / 0.01).ceil() as usize;
        for t in 0..steps {
            let th = t as f64 * 0.01;
            let v = [th.cos(), th.sin()];
            let count = quad_val_count(&v, &mu, r, &z);
            best = best.max(count);
        }
        let val = sdp_value(&mu, r, &z, &opts()).unwrap();
        assert!(
            val >= best as f64 - TOL_GAP,
            "sdp value {val} must dominate integral oracle {best}"
        );
    }

    #[test]
    fn pinned_value_bounds() {
        // All-aligned data: pinned at the common direction gives k; the
        // value never exceeds k.
        let r = 0.5;
        let z = cluster_at(&[1.0, 0.0], 3);
        let v = sdp_val(&[1.0, 0.0], &[0.0, 0.0], r, &z, &opts()).unwrap();
        assert_abs_diff_eq!(v, 3.0, epsilon = 1e-4);

        // Z = μ̃ and r > 0: the contract is only value ∈ [0, k].
        let z0 = cluster_at(&[0.0, 0.0], 3);
        let v0 = sdp_val(&[0.6, 0.0], &[0.0, 0.0], 0.4, &z0, &opts()).unwrap();
        assert!((-TOL_GAP..=3.0 + TOL_GAP).contains(&v0), "value {v0} outside [0, k]");
    }

    #[test]
    fn pinned_rejects_long_y() {
        let z = cluster_at(&[1.0, 0.0], 2);
        assert!(build_sdp_val(&[1.2, 0.0], &[0.0, 0.0], 0.5, &z).is_err());
    }

    #[test]
    fn pinned_readout_returns_y() {
        let z = BucketMeans::new(array![[0.8, 0.1], [0.2, -0.9], [0.5, 0.5], [-0.3, 0.2]]).unwrap();
        let y = [0.3, -0.4];
        let p = build_sdp_val(&y, &[0.0, 0.0], 0.3, &z).unwrap();
        let sol = solve_sdp(&p, &opts()).unwrap();
        let v = pe_mean_v(&sol);
        assert_abs_diff_eq!(v[0], y[0], epsilon = 1e-6);
        assert_abs_diff_eq!(v[1], y[1], epsilon = 1e-6);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let z = cluster_at(&[1.0, 0.0], 2);
        assert!(build_sdp(&[0.0], 0.5, &z).is_err());
        assert!(build_sdp(&[0.0, 0.0, 0.0], 0.5, &z).is_err());
    }
}
