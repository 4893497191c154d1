//! Dense primal-dual interior-point solver for small conic programs.
//!
//! Solves
//!
//! ```text
//!   min ⟨c, x⟩   s.t.   ⟨a_i, x⟩ = b_i  (i = 1..m),   x ∈ K,
//! ```
//!
//! where `K` is a product of dense PSD blocks and a nonnegative orthant.
//! The implementation is a Mehrotra-style predictor-corrector with
//! Nesterov-Todd scaling. Instances in this crate are small (block
//! dimensions in the hundreds, a few thousand rows), so everything is
//! dense and deterministic: no randomized pivoting, no warm starts.
//!
//! Constraint rows are sparse lists of matrix cells. A cell `(i, j, c)`
//! with `i <= j` contributes `c * X[i, j]` to the row's value, reading the
//! symmetric entry once; as a symmetric coefficient matrix this is
//! `c/2 (E_ij + E_ji)` off the diagonal and `c E_ii` on it.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Cholesky, Eigh, SVD, UPLO};

use crate::error::{Error, Result};

/// One addressed cell of a PSD block, `i <= j`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PsdCell {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub coeff: f64,
}

/// One coordinate of the nonnegative (slack) part.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinCell {
    pub idx: usize,
    pub coeff: f64,
}

/// A sparse linear functional on the cone variable.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SparseRow {
    pub psd: Vec<PsdCell>,
    pub lin: Vec<LinCell>,
}

impl SparseRow {
    pub fn psd_cell(block: usize, i: usize, j: usize, coeff: f64) -> PsdCell {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        PsdCell { block, i, j, coeff }
    }

    pub fn push(&mut self, block: usize, i: usize, j: usize, coeff: f64) {
        self.psd.push(Self::psd_cell(block, i, j, coeff));
    }
}

/// Canonical-form problem data.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    pub psd_dims: Vec<usize>,
    pub lin_dim: usize,
    pub rows: Vec<SparseRow>,
    pub rhs: Vec<f64>,
    /// Objective functional, minimized.
    pub objective: SparseRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolveStatus {
    Optimal,
    MaxIter,
    Numerical,
}

/// Solver tolerances; `tol_gap` is absolute on the objective.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub tol_gap: f64,
    pub tol_feas: f64,
    pub max_iter: usize,
    /// Optional deterministic perturbation of the starting point,
    /// `(salt, relative magnitude)`; used by self-consistency checks.
    pub start_perturbation: Option<(u64, f64)>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_gap: crate::sdp::TOL_GAP,
            tol_feas: crate::sdp::TOL_FEAS,
            max_iter: crate::sdp::MAX_ITER,
            start_perturbation: None,
        }
    }
}

/// Primal/dual iterate over the product cone.
#[derive(Debug, Clone)]
pub struct BlockVec {
    pub mats: Vec<Array2<f64>>,
    pub lin: Array1<f64>,
}

impl BlockVec {
    fn zeros_like(p: &ConicProblem) -> Self {
        BlockVec {
            mats: p.psd_dims.iter().map(|&d| Array2::zeros((d, d))).collect(),
            lin: Array1::zeros(p.lin_dim),
        }
    }

    fn identity_scaled(p: &ConicProblem, tau: f64) -> Self {
        BlockVec {
            mats: p.psd_dims.iter().map(|&d| Array2::eye(d) * tau).collect(),
            lin: Array1::from_elem(p.lin_dim, tau),
        }
    }

    fn inner(&self, other: &Self) -> f64 {
        let mut acc = self.lin.dot(&other.lin);
        for (a, b) in self.mats.iter().zip(&other.mats) {
            acc += (a * b).sum();
        }
        acc
    }

    fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.mats.iter_mut().zip(&other.mats) {
            a.scaled_add(alpha, b);
        }
        self.lin.scaled_add(alpha, &other.lin);
    }
}

/// Raw solver output; interpretation (labels, maximization sign) is layered
/// on by [`crate::sdp::solve_sdp`].
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub primal: BlockVec,
    pub dual_y: Vec<f64>,
    pub pobj: f64,
    pub dobj: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
}

fn row_dot(row: &SparseRow, x: &BlockVec) -> f64 {
    let mut acc = 0.0;
    for c in &row.psd {
        acc += c.coeff * x.mats[c.block][[c.i, c.j]];
    }
    for c in &row.lin {
        acc += c.coeff * x.lin[c.idx];
    }
    acc
}

/// Accumulates `scale * A_i` (as a symmetric matrix) into dense blocks.
fn add_row_dense(row: &SparseRow, scale: f64, out: &mut BlockVec) {
    for c in &row.psd {
        if c.i == c.j {
            out.mats[c.block][[c.i, c.i]] += scale * c.coeff;
        } else {
            out.mats[c.block][[c.i, c.j]] += 0.5 * scale * c.coeff;
            out.mats[c.block][[c.j, c.i]] += 0.5 * scale * c.coeff;
        }
    }
    for c in &row.lin {
        out.lin[c.idx] += scale * c.coeff;
    }
}

/// `tr(Sym(p,q) W Sym(r,s) W) = (W_pr W_qs + W_ps W_qr) / 2`, valid for all
/// diagonal/off-diagonal combinations under the single-count cell
/// convention.
fn schur_pair(a: &SparseRow, b: &SparseRow, w_mats: &[Array2<f64>], w_lin: &Array1<f64>) -> f64 {
    let mut acc = 0.0;
    for ca in &a.psd {
        let w = &w_mats[ca.block];
        for cb in &b.psd {
            if ca.block != cb.block {
                continue;
            }
            let (p, q, r, s) = (ca.i, ca.j, cb.i, cb.j);
            acc += 0.5 * ca.coeff * cb.coeff * (w[[p, r]] * w[[q, s]] + w[[p, s]] * w[[q, r]]);
        }
    }
    for ca in &a.lin {
        for cb in &b.lin {
            if ca.idx == cb.idx {
                let w = w_lin[ca.idx];
                acc += ca.coeff * cb.coeff * w * w;
            }
        }
    }
    acc
}

fn lower_tri_solve(l: &Array2<f64>, b: &mut Array2<f64>) {
    // Solves L * Y = B in place (L lower triangular).
    let n = l.nrows();
    for col in 0..b.ncols() {
        for i in 0..n {
            let mut v = b[[i, col]];
            for k in 0..i {
                v -= l[[i, k]] * b[[k, col]];
            }
            b[[i, col]] = v / l[[i, i]];
        }
    }
}

/// NT scaling data for one PSD block.
struct NtBlock {
    g: Array2<f64>,
    g_inv: Array2<f64>,
    w: Array2<f64>,
    lambda: Array1<f64>,
}

fn nt_block(x: &Array2<f64>, z: &Array2<f64>) -> Result<NtBlock> {
    let lx = x.cholesky(UPLO::Lower).map_err(|e| Error::SolverFailure {
        status: "numerical",
        detail: format!("primal block lost positive definiteness: {e}"),
    })?;
    let lz = z.cholesky(UPLO::Lower).map_err(|e| Error::SolverFailure {
        status: "numerical",
        detail: format!("dual block lost positive definiteness: {e}"),
    })?;
    let m0 = lz.t().dot(&lx);
    let (u, s, vt) = m0.svd(true, true).map_err(|e| Error::SolverFailure {
        status: "numerical",
        detail: format!("NT svd failed: {e}"),
    })?;
    let u = u.expect("svd requested u");
    let vt = vt.expect("svd requested vt");
    let s_clamped: Array1<f64> = s.mapv(|v| v.max(1e-300));
    let inv_sqrt = s_clamped.mapv(|v| 1.0 / v.sqrt());
    // G = Lx V S^{-1/2},  G^{-1} = S^{-1/2} U^T Lz^T,  W = G G^T.
    let mut v = vt.t().to_owned();
    for (mut col, f) in v.columns_mut().into_iter().zip(inv_sqrt.iter()) {
        col *= *f;
    }
    let g = lx.dot(&v);
    let mut ut = u.t().to_owned();
    for (mut rowv, f) in ut.rows_mut().into_iter().zip(inv_sqrt.iter()) {
        rowv *= *f;
    }
    let g_inv = ut.dot(&lz.t());
    let w = g.dot(&g.t());
    Ok(NtBlock { g, g_inv, w, lambda: s_clamped })
}

/// Largest step `alpha` with `X + alpha D` staying PSD, given `X = L L^T`.
fn max_step_psd(l: &Array2<f64>, d: &Array2<f64>) -> Result<f64> {
    let mut s1 = d.clone();
    lower_tri_solve(l, &mut s1); // L^{-1} D
    let mut s2 = s1.t().to_owned();
    lower_tri_solve(l, &mut s2); // L^{-1} D L^{-T} (transposed halves)
    let sym = (&s2 + &s2.t()) * 0.5;
    let (eigs, _) = sym.eigh(UPLO::Lower).map_err(|e| Error::SolverFailure {
        status: "numerical",
        detail: format!("step eig failed: {e}"),
    })?;
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min >= 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(-1.0 / min)
    }
}

fn max_step_lin(x: &Array1<f64>, d: &Array1<f64>) -> f64 {
    let mut alpha = f64::INFINITY;
    for (&xi, &di) in x.iter().zip(d.iter()) {
        if di < 0.0 {
            alpha = alpha.min(-xi / di);
        }
    }
    alpha
}

fn symmetrize(m: &mut Array2<f64>) {
    let s = (&*m + &m.t()) * 0.5;
    m.assign(&s);
}

pub fn solve_conic(p: &ConicProblem, opts: &SolveOptions) -> Result<ConicSolution> {
    let m = p.rows.len();
    if p.rhs.len() != m {
        return Err(Error::dim(format!("{} rows but {} rhs entries", m, p.rhs.len())));
    }
    let nu_tot: f64 = p.psd_dims.iter().sum::<usize>() as f64 + p.lin_dim as f64;
    if nu_tot == 0.0 {
        return Err(Error::invalid("empty cone".into()));
    }

    let bmax = p.rhs.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    let cmax = p
        .objective
        .psd
        .iter()
        .map(|c| c.coeff.abs())
        .chain(p.objective.lin.iter().map(|c| c.coeff.abs()))
        .fold(0.0_f64, f64::max);

    let mut tau_p = 1.0 + bmax;
    let tau_d = 1.0 + cmax;
    if let Some((salt, mag)) = opts.start_perturbation {
        // Deterministic multiplicative jitter keeps the start interior.
        let f = 1.0 + mag * ((salt.wrapping_mul(0x9e3779b97f4a7c15) >> 11) as f64
            / (1u64 << 53) as f64
            - 0.5);
        tau_p *= f.max(0.1);
    }

    let mut x = BlockVec::identity_scaled(p, tau_p);
    let mut z = BlockVec::identity_scaled(p, tau_d);
    let mut y = vec![0.0; m];

    let b_arr = Array1::from_vec(p.rhs.clone());
    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let mut stall = 0usize;

    let mut cached = None;

    for iter in 0..opts.max_iter {
        iterations = iter;
        // Residuals.
        let ax: Array1<f64> = p.rows.iter().map(|r| row_dot(r, &x)).collect();
        let rp = &b_arr - &ax;
        let mut rd = BlockVec::zeros_like(p);
        add_row_dense(&p.objective, 1.0, &mut rd);
        for (yi, row) in y.iter().zip(&p.rows) {
            add_row_dense(row, -*yi, &mut rd);
        }
        rd.axpy(-1.0, &z);

        let gap = x.inner(&z);
        let prim_res = rp.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
        let dual_res = rd
            .mats
            .iter()
            .flat_map(|mb| mb.iter())
            .chain(rd.lin.iter())
            .fold(0.0_f64, |a, &v| a.max(v.abs()));

        let pobj = row_dot(&p.objective, &x);
        let dobj = b_arr.dot(&Array1::from_vec(y.clone()));

        if gap.abs() <= opts.tol_gap
            && prim_res <= opts.tol_feas * (1.0 + bmax)
            && dual_res <= opts.tol_feas * (1.0 + cmax) * 10.0
        {
            status = SolveStatus::Optimal;
            cached = Some((pobj, dobj, gap, prim_res, dual_res));
            break;
        }
        cached = Some((pobj, dobj, gap, prim_res, dual_res));

        let mu = gap / nu_tot;

        // NT scaling.
        let mut nt = Vec::with_capacity(p.psd_dims.len());
        for (xb, zb) in x.mats.iter().zip(&z.mats) {
            nt.push(nt_block(xb, zb)?);
        }
        let w_mats: Vec<Array2<f64>> = nt.iter().map(|n| n.w.clone()).collect();
        let w_lin: Array1<f64> = x
            .lin
            .iter()
            .zip(z.lin.iter())
            .map(|(&xi, &zi)| (xi.max(1e-300) / zi.max(1e-300)).sqrt())
            .collect();

        // Schur complement and factorization.
        let mut schur = Array2::zeros((m, m));
        for i in 0..m {
            for j in i..m {
                let v = schur_pair(&p.rows[i], &p.rows[j], &w_mats, &w_lin);
                schur[[i, j]] = v;
                schur[[j, i]] = v;
            }
        }
        let schur_scale = schur.diag().iter().fold(1e-300_f64, |a, &v| a.max(v.abs()));
        let mut chol = None;
        for k in 0..6 {
            let jitter = if k == 0 { 0.0 } else { schur_scale * 1e-13 * 10f64.powi(k as i32) };
            let mut s = schur.clone();
            for i in 0..m {
                s[[i, i]] += jitter;
            }
            if let Ok(l) = s.cholesky(UPLO::Lower) {
                chol = Some(l);
                break;
            }
        }
        let Some(schur_l) = chol else {
            status = SolveStatus::Numerical;
            break;
        };

        // W Rd W per block (and w^2 rd on the orthant).
        let mut wrdw = BlockVec::zeros_like(p);
        for (bi, n) in nt.iter().enumerate() {
            wrdw.mats[bi] = n.w.dot(&rd.mats[bi]).dot(&n.w);
        }
        for i in 0..p.lin_dim {
            wrdw.lin[i] = w_lin[i] * w_lin[i] * rd.lin[i];
        }

        let solve_dirs = |d: &BlockVec| -> Result<(BlockVec, Vec<f64>, BlockVec)> {
            let mut rhs = Array1::zeros(m);
            for (i, row) in p.rows.iter().enumerate() {
                rhs[i] = rp[i] - row_dot(row, d) + row_dot(row, &wrdw);
            }
            // Two triangular solves against the cached Cholesky factor.
            let mut col = rhs.insert_axis(ndarray::Axis(1));
            lower_tri_solve(&schur_l, &mut col);
            let mut colt = col;
            // Back substitution with L^T: solve L^T dy = t.
            let n = schur_l.nrows();
            for i in (0..n).rev() {
                let mut v = colt[[i, 0]];
                for k in i + 1..n {
                    v -= schur_l[[k, i]] * colt[[k, 0]];
                }
                colt[[i, 0]] = v / schur_l[[i, i]];
            }
            let dy: Vec<f64> = colt.column(0).to_vec();

            let mut dz = rd.clone();
            for (yi, row) in dy.iter().zip(&p.rows) {
                add_row_dense(row, -*yi, &mut dz);
            }
            let mut dx = d.clone();
            for (bi, n) in nt.iter().enumerate() {
                let wdw = n.w.dot(&dz.mats[bi]).dot(&n.w);
                dx.mats[bi] -= &wdw;
                symmetrize(&mut dx.mats[bi]);
                symmetrize(&mut dz.mats[bi]);
            }
            for i in 0..p.lin_dim {
                dx.lin[i] -= w_lin[i] * w_lin[i] * dz.lin[i];
            }
            Ok((dx, dy, dz))
        };

        // Predictor.
        let mut d_aff = BlockVec::zeros_like(p);
        d_aff.axpy(-1.0, &x);
        let (dx_aff, _dy_aff, dz_aff) = solve_dirs(&d_aff)?;

        let lx: Vec<Array2<f64>> = x
            .mats
            .iter()
            .map(|xb| xb.cholesky(UPLO::Lower))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::SolverFailure {
                status: "numerical",
                detail: format!("iterate chol failed: {e}"),
            })?;
        let lz: Vec<Array2<f64>> = z
            .mats
            .iter()
            .map(|zb| zb.cholesky(UPLO::Lower))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::SolverFailure {
                status: "numerical",
                detail: format!("iterate chol failed: {e}"),
            })?;

        let mut ap = max_step_lin(&x.lin, &dx_aff.lin);
        let mut ad = max_step_lin(&z.lin, &dz_aff.lin);
        for bi in 0..nt.len() {
            ap = ap.min(max_step_psd(&lx[bi], &dx_aff.mats[bi])?);
            ad = ad.min(max_step_psd(&lz[bi], &dz_aff.mats[bi])?);
        }
        let a_aff = ap.min(ad).min(1.0);

        let mut x_trial = x.clone();
        x_trial.axpy(a_aff, &dx_aff);
        let mut z_trial = z.clone();
        z_trial.axpy(a_aff, &dz_aff);
        let gap_aff = x_trial.inner(&z_trial).max(0.0);
        let sigma = ((gap_aff / gap).powi(3)).clamp(1e-10, 0.9999);

        // Corrector.
        let mut d_cor = BlockVec::zeros_like(p);
        for (bi, n) in nt.iter().enumerate() {
            let dxt = n.g_inv.dot(&dx_aff.mats[bi]).dot(&n.g_inv.t());
            let dzt = n.g.t().dot(&dz_aff.mats[bi]).dot(&n.g);
            let h = (dxt.dot(&dzt) + dzt.dot(&dxt)) * 0.5;
            let dim = n.lambda.len();
            let mut dt = Array2::zeros((dim, dim));
            for i in 0..dim {
                for j in 0..dim {
                    let target = if i == j {
                        sigma * mu - n.lambda[i] * n.lambda[j] - h[[i, j]]
                    } else {
                        -h[[i, j]]
                    };
                    dt[[i, j]] = 2.0 * target / (n.lambda[i] + n.lambda[j]);
                }
            }
            d_cor.mats[bi] = n.g.dot(&dt).dot(&n.g.t());
            symmetrize(&mut d_cor.mats[bi]);
        }
        for i in 0..p.lin_dim {
            d_cor.lin[i] =
                (sigma * mu - x.lin[i] * z.lin[i] - dx_aff.lin[i] * dz_aff.lin[i]) / z.lin[i];
        }
        let (dx, dy, dz) = solve_dirs(&d_cor)?;

        let mut ap = max_step_lin(&x.lin, &dx.lin);
        let mut ad = max_step_lin(&z.lin, &dz.lin);
        for bi in 0..nt.len() {
            ap = ap.min(max_step_psd(&lx[bi], &dx.mats[bi])?);
            ad = ad.min(max_step_psd(&lz[bi], &dz.mats[bi])?);
        }
        let step_p = (0.99 * ap).min(1.0);
        let step_d = (0.99 * ad).min(1.0);
        if step_p < 1e-12 && step_d < 1e-12 {
            stall += 1;
            if stall >= 3 {
                status = SolveStatus::Numerical;
                break;
            }
        } else {
            stall = 0;
        }

        x.axpy(step_p, &dx);
        for (yi, di) in y.iter_mut().zip(&dy) {
            *yi += step_d * di;
        }
        z.axpy(step_d, &dz);
    }

    let (pobj, dobj, gap, prim_res, dual_res) = cached.unwrap_or((0.0, 0.0, f64::INFINITY, f64::INFINITY, f64::INFINITY));
    Ok(ConicSolution {
        status,
        primal: x,
        dual_y: y,
        pobj,
        dobj,
        gap,
        primal_residual: prim_res,
        dual_residual: dual_res,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lp_only(c: Vec<f64>, rows: Vec<Vec<(usize, f64)>>, rhs: Vec<f64>, dim: usize) -> ConicProblem {
        ConicProblem {
            psd_dims: vec![],
            lin_dim: dim,
            rows: rows
                .into_iter()
                .map(|cells| SparseRow {
                    psd: vec![],
                    lin: cells.into_iter().map(|(idx, coeff)| LinCell { idx, coeff }).collect(),
                })
                .collect(),
            rhs,
            objective: SparseRow {
                psd: vec![],
                lin: c.into_iter().enumerate().map(|(idx, coeff)| LinCell { idx, coeff }).collect(),
            },
        }
    }

    #[test]
    fn tiny_lp() {
        // min -x1 - x2 s.t. x1 + x2 + s = 1  =>  optimum -1.
        let p = lp_only(
            vec![-1.0, -1.0, 0.0],
            vec![vec![(0, 1.0), (1, 1.0), (2, 1.0)]],
            vec![1.0],
            3,
        );
        let sol = solve_conic(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(sol.pobj, -1.0, epsilon = 1e-6);
    }

    #[test]
    fn psd_bound_by_trace() {
        // max X_01 s.t. X_00 = X_11 = 1, X psd  =>  X_01 <= 1.
        let mut r0 = SparseRow::default();
        r0.push(0, 0, 0, 1.0);
        let mut r1 = SparseRow::default();
        r1.push(0, 1, 1, 1.0);
        let mut obj = SparseRow::default();
        obj.push(0, 0, 1, -1.0);
        let p = ConicProblem {
            psd_dims: vec![2],
            lin_dim: 0,
            rows: vec![r0, r1],
            rhs: vec![1.0, 1.0],
            objective: obj,
        };
        let sol = solve_conic(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(-sol.pobj, 1.0, epsilon = 1e-5);
    }

    #[test]
    fn schur_pair_matches_dense() {
        // Cross-check the sparse Schur formula against an explicit dense
        // computation tr(A W B W) on a random-ish instance.
        let dim = 4;
        let mut a = SparseRow::default();
        a.push(0, 0, 2, 1.5);
        a.push(0, 1, 1, -2.0);
        let mut b = SparseRow::default();
        b.push(0, 0, 0, 0.7);
        b.push(0, 2, 3, 1.1);

        let mut w = Array2::zeros((dim, dim));
        for i in 0..dim {
            for j in 0..dim {
                w[[i, j]] = 1.0 / (1.0 + (i + 2 * j) as f64);
            }
        }
        let w = (&w + &w.t()) * 0.5 + Array2::eye(dim) * 2.0;

        let dense = |row: &SparseRow| {
            let mut m = Array2::zeros((dim, dim));
            for c in &row.psd {
                if c.i == c.j {
                    m[[c.i, c.i]] += c.coeff;
                } else {
                    m[[c.i, c.j]] += 0.5 * c.coeff;
                    m[[c.j, c.i]] += 0.5 * c.coeff;
                }
            }
            m
        };
        let am = dense(&a);
        let bm = dense(&b);
        let exact = (am.dot(&w).dot(&bm).dot(&w)).diag().sum();
        let fast = schur_pair(&a, &b, &[w.clone()], &Array1::zeros(0));
        assert_abs_diff_eq!(exact, fast, epsilon = 1e-12);
    }

    #[test]
    fn mixed_cone() {
        // max tr(X) s.t. tr(X) + s = 5, X in S^2_+, s >= 0  =>  5.
        let mut row = SparseRow::default();
        row.push(0, 0, 0, 1.0);
        row.push(0, 1, 1, 1.0);
        row.lin.push(LinCell { idx: 0, coeff: 1.0 });
        let mut obj = SparseRow::default();
        obj.push(0, 0, 0, -1.0);
        obj.push(0, 1, 1, -1.0);
        let p = ConicProblem {
            psd_dims: vec![2],
            lin_dim: 1,
            rows: vec![row],
            rhs: vec![5.0],
            objective: obj,
        };
        let sol = solve_conic(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_abs_diff_eq!(-sol.pobj, 5.0, epsilon = 1e-6);
    }
}
