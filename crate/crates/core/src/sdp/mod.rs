//! Pseudoexpectation SDPs: problem construction, solving, value queries,
//! and the linear rounding `pE[v]`.
//!
//! Three programs are built here:
//!
//! * [`build_sdp`] — given bucket means `Z`, a center `μ̃` and a radius `r`,
//!   maximizes `tr(B)` over PSD block matrices
//!   `[[1, bᵀ, vᵀ], [b, B, W], [v, Wᵀ, V]]` with `B_ii = b_i`, `tr(V) = 1`,
//!   and `B_ii · r ≤ ⟨Z_i − μ̃, W_i⟩`. Its value counts, in relaxation, how
//!   many bucket means sit at projected distance ≥ r from `μ̃` in the best
//!   common direction.
//! * [`build_sdp_val`] — the same program with the direction pinned,
//!   `v = y`; the score function of the gradient-selection mechanism.
//! * [`build_coarse_sdp`] — the degree-4 moment relaxation counting, for a
//!   pinned location `pE v = y`, how many raw samples fit in a ball of
//!   radius `r` around `v`.
//!
//! All three have sensitivity 1 with respect to a single data row, are
//! concave in the pinned vector, and are non-increasing in `r`; the test
//! suites check each of those properties against independent oracles.

pub mod coarse;
pub mod fine;
pub mod solver;

pub use coarse::{build_coarse_sdp, coarse_sdp_value, CoarseLimits, CoarseMomentMatrix};
pub use fine::{
    build_sdp, build_sdp_val, fine_nulling_witness, sdp_val, sdp_value, BucketMeans,
    FineMomentMatrix,
};
pub use solver::{SolveOptions, SolveStatus};

use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use solver::{ConicProblem, LinCell, SparseRow};

/// Absolute duality-gap tolerance on the objective (which lives in
/// `[0, k]` or `[0, n]`).
pub const TOL_GAP: f64 = 1e-6;
/// Absolute feasibility tolerance for returned primals.
pub const TOL_FEAS: f64 = 1e-7;
/// Eigenvalue tolerance when certifying PSD-ness of returned primals.
pub const TOL_PSD: f64 = 1e-7;
pub const MAX_ITER: usize = 200;

/// Which program an [`SdpProblem`] encodes; carried for diagnostics and
/// for the `pE[v]` readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProgramKind {
    /// Bucket-mean direction program, free direction.
    Fine,
    /// Bucket-mean direction program with the direction pinned.
    FineVal,
    /// Degree-4 location program with the location pinned.
    CoarseDeg4,
    /// Anything else assembled by hand (tests, demos).
    Custom,
}

/// A maximization SDP over one or more PSD blocks with sparse equality and
/// `≤` constraints on entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpProblem {
    pub kind: ProgramKind,
    pub psd_dims: Vec<usize>,
    /// Maximized functional.
    pub objective: SparseRow,
    /// `⟨expr, X⟩ = bound`.
    pub eq: Vec<(SparseRow, f64)>,
    /// `⟨expr, X⟩ ≤ bound`.
    pub ineq: Vec<(SparseRow, f64)>,
    /// Cells holding `pE[v_j]`, in coordinate order.
    pub v_cells: Vec<(usize, usize, usize)>,
    /// Human-readable description of the encoded program.
    pub label: String,
}

impl SdpProblem {
    fn validate(&self) -> Result<()> {
        let in_range = |row: &SparseRow| {
            row.psd.iter().all(|c| {
                c.block < self.psd_dims.len()
                    && c.i <= c.j
                    && c.j < self.psd_dims[c.block]
                    && c.coeff.is_finite()
            }) && row.lin.is_empty()
        };
        if !in_range(&self.objective)
            || !self.eq.iter().all(|(r, b)| in_range(r) && b.is_finite())
            || !self.ineq.iter().all(|(r, b)| in_range(r) && b.is_finite())
        {
            return Err(Error::dim("sdp problem references out-of-range entries".into()));
        }
        Ok(())
    }

    /// Debug JSON dump (objective, constraints, dimensions).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Solver output mapped back to the maximization problem.
#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Optimal value of the maximization.
    pub value: f64,
    /// Primal PSD blocks.
    pub primal: Vec<Array2<f64>>,
    pub dual_residual: f64,
    pub gap: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    v_cells: Vec<(usize, usize, usize)>,
}

impl SdpSolution {
    /// Smallest eigenvalue over all primal blocks.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut min = f64::INFINITY;
        for b in &self.primal {
            let (eigs, _) = b.eigh(UPLO::Lower).map_err(|e| Error::SolverFailure {
                status: "numerical",
                detail: format!("eig of primal failed: {e}"),
            })?;
            min = min.min(eigs.iter().cloned().fold(f64::INFINITY, f64::min));
        }
        Ok(min)
    }
}

/// Solves a built problem. `status == Optimal` means the value is within
/// `tol_gap` of the true optimum and the primal is feasible within
/// `tol_feas`.
pub fn solve_sdp(p: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution> {
    p.validate()?;
    if p.eq.is_empty() && p.ineq.is_empty() {
        return Err(Error::invalid("problem has no constraints".into()));
    }

    // Canonicalize: minimize the negated objective; slack per inequality.
    let lin_dim = p.ineq.len();
    let mut rows = Vec::with_capacity(p.eq.len() + p.ineq.len());
    let mut rhs = Vec::with_capacity(rows.capacity());
    for (r, b) in &p.eq {
        rows.push(r.clone());
        rhs.push(*b);
    }
    for (s, (r, b)) in p.ineq.iter().enumerate() {
        let mut row = r.clone();
        row.lin.push(LinCell { idx: s, coeff: 1.0 });
        rows.push(row);
        rhs.push(*b);
    }
    let mut objective = p.objective.clone();
    for c in &mut objective.psd {
        c.coeff = -c.coeff;
    }

    let conic = ConicProblem { psd_dims: p.psd_dims.clone(), lin_dim, rows, rhs, objective };
    let raw = solver::solve_conic(&conic, opts)?;

    let status_str = match raw.status {
        SolveStatus::Optimal => None,
        SolveStatus::MaxIter => Some("max_iter"),
        SolveStatus::Numerical => Some("numerical"),
    };
    if let Some(s) = status_str {
        return Err(Error::SolverFailure {
            status: s,
            detail: format!(
                "{}: gap={:.3e} prim_res={:.3e} dual_res={:.3e} after {} iterations",
                p.label, raw.gap, raw.primal_residual, raw.dual_residual, raw.iterations
            ),
        });
    }

    Ok(SdpSolution {
        value: -raw.pobj,
        primal: raw.primal.mats,
        dual_residual: raw.dual_residual,
        gap: raw.gap,
        status: raw.status,
        iterations: raw.iterations,
        v_cells: p.v_cells.clone(),
    })
}

/// The linear rounding `pE[v]`: reads the `v` moments off the primal.
pub fn pe_mean_v(sol: &SdpSolution) -> Vec<f64> {
    sol.v_cells.iter().map(|&(b, i, j)| sol.primal[b][[i, j]]).collect()
}
