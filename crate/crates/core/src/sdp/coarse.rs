//! The degree-4 location program.
//!
//! For samples `X_1..X_n`, a pinned location `y`, and radii `R > r > 0`,
//! the program maximizes `pE Σ b_i` over degree-4 pseudoexpectations in
//! `(b_1..b_n, v_1..v_d)` satisfying `b_i² = b_i`,
//! `‖v‖² ≤ (2R + R/1000)²`, `b_i ‖X_i − v‖² ≤ b_i r²`, and `pE v = y`.
//!
//! Concretely this is one PSD moment matrix plus one localizing matrix:
//!
//! * moments are indexed with `b_i² → b_i` aliased away, so every moment
//!   is squarefree in `b`;
//! * the moment matrix runs over the monomial basis
//!   `{1, b_i, v_j, b_i v_j, v_j v_l}` — products of at most one `b`
//!   factor. Cross products `b_i b_j` of distinct buckets appear only as
//!   moments (entries), not as basis rows. Cutting the `b_i b_j` rows
//!   keeps the dense solver feasible at the documented instance sizes
//!   (`n ≤ 30, d ≤ 5`) while preserving every property the program is
//!   used for: it stays a relaxation of the integral count, keeps
//!   sensitivity 1 under the row-nulling argument, stays concave and
//!   `n√d/R`-Lipschitz in `y`, is non-increasing in `r`, and supports the
//!   rounding bound `‖pE v − x₀‖ < 10(r + √α R)`;
//! * the ball constraint is enforced at degree 4 by a localizing matrix
//!   over `{1, b_i, v_j}` with weight `(2R + R/1000)² − ‖v‖²`, and the
//!   degree-3 cap `b_i ‖X_i − v‖² ≤ b_i r²` by its scalar pseudo-moment
//!   inequality (the only form a degree-4 functional can see).

use std::collections::HashMap;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sdp::solver::SparseRow;
use crate::sdp::{solve_sdp, ProgramKind, SdpProblem, SolveOptions};

/// Hard caps for the dense degree-4 path.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CoarseLimits {
    pub max_n: usize,
    pub max_d: usize,
}

impl Default for CoarseLimits {
    fn default() -> Self {
        CoarseLimits { max_n: 30, max_d: 5 }
    }
}

/// A monomial with squarefree `b`-part and a `v`-multiset, canonically
/// sorted. `b_i² = b_i` is applied at construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Monomial {
    bs: Vec<u32>,
    vs: Vec<u32>,
}

impl Monomial {
    fn one() -> Self {
        Monomial { bs: vec![], vs: vec![] }
    }

    fn product(a: &Monomial, b: &Monomial) -> Self {
        let mut bs = a.bs.clone();
        for &x in &b.bs {
            if !bs.contains(&x) {
                bs.push(x);
            }
        }
        bs.sort_unstable();
        let mut vs = a.vs.clone();
        vs.extend_from_slice(&b.vs);
        vs.sort_unstable();
        Monomial { bs, vs }
    }

    fn times_v_sq(&self, j: u32) -> Self {
        let mut vs = self.vs.clone();
        vs.push(j);
        vs.push(j);
        vs.sort_unstable();
        Monomial { bs: self.bs.clone(), vs }
    }
}

/// Index bookkeeping for the aliased degree-4 moment matrix and its
/// localizing companion.
#[derive(Debug, Clone)]
pub struct CoarseMomentMatrix {
    pub n: usize,
    pub d: usize,
    /// Dimension of the moment block.
    pub moment_dim: usize,
    /// Dimension of the localizing block.
    pub localizing_dim: usize,
    /// Representative cell (in the moment block) of each distinct moment.
    rep: HashMap<Monomial, (usize, usize)>,
    basis: Vec<Monomial>,
    loc_basis: Vec<Monomial>,
}

impl CoarseMomentMatrix {
    pub fn new(n: usize, d: usize) -> Self {
        let mut basis = vec![Monomial::one()];
        for i in 0..n {
            basis.push(Monomial { bs: vec![i as u32], vs: vec![] });
        }
        for j in 0..d {
            basis.push(Monomial { bs: vec![], vs: vec![j as u32] });
        }
        for i in 0..n {
            for j in 0..d {
                basis.push(Monomial { bs: vec![i as u32], vs: vec![j as u32] });
            }
        }
        for j in 0..d {
            for l in j..d {
                basis.push(Monomial { bs: vec![], vs: vec![j as u32, l as u32] });
            }
        }
        let loc_basis: Vec<Monomial> = basis[..1 + n + d].to_vec();

        let dim = basis.len();
        let mut rep = HashMap::new();
        for p in 0..dim {
            for q in p..dim {
                let m = Monomial::product(&basis[p], &basis[q]);
                rep.entry(m).or_insert((p, q));
            }
        }
        CoarseMomentMatrix {
            n,
            d,
            moment_dim: dim,
            localizing_dim: loc_basis.len(),
            rep,
            basis,
            loc_basis,
        }
    }

    fn rep_of(&self, m: &Monomial) -> (usize, usize) {
        *self.rep.get(m).unwrap_or_else(|| panic!("moment {m:?} missing from catalog"))
    }

    fn b(&self, i: usize) -> Monomial {
        Monomial { bs: vec![i as u32], vs: vec![] }
    }

    fn v(&self, j: usize) -> Monomial {
        Monomial { bs: vec![], vs: vec![j as u32] }
    }

    fn bv(&self, i: usize, j: usize) -> Monomial {
        Monomial { bs: vec![i as u32], vs: vec![j as u32] }
    }

    pub fn distinct_moments(&self) -> usize {
        self.rep.len()
    }
}

/// Builds the degree-4 location program with `pE v = y` pinned.
pub fn build_coarse_sdp(
    y: &[f64],
    big_r: f64,
    r: f64,
    x: &Array2<f64>,
    limits: &CoarseLimits,
) -> Result<SdpProblem> {
    let (n, d) = (x.nrows(), x.ncols());
    if n == 0 || d == 0 {
        return Err(Error::invalid("need n >= 1 and d >= 1".into()));
    }
    if n > limits.max_n || d > limits.max_d {
        return Err(Error::DeskLimit(format!(
            "n={n}, d={d} exceeds dense degree-4 limits ({}, {})",
            limits.max_n, limits.max_d
        )));
    }
    if y.len() != d {
        return Err(Error::dim(format!("y has dim {}, data has d={d}", y.len())));
    }
    if !(big_r > r && r > 0.0) || !big_r.is_finite() {
        return Err(Error::invalid(format!("need R > r > 0, got R={big_r}, r={r}")));
    }
    let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ball = big_r + big_r / 1000.0;
    if y_norm > ball + 1e-9 {
        return Err(Error::invalid(format!("‖y‖ = {y_norm} outside the candidate ball {ball}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("dataset must be finite".into()));
    }

    let ix = CoarseMomentMatrix::new(n, d);
    let c = 2.0 * big_r + big_r / 1000.0;
    let c2 = c * c;

    // Objective: Σ_i pE[b_i].
    let mut objective = SparseRow::default();
    for i in 0..n {
        let (p, q) = ix.rep_of(&ix.b(i));
        objective.push(0, p, q, 1.0);
    }

    let mut eq: Vec<(SparseRow, f64)> = Vec::new();

    // pE[1] = 1.
    let mut unit = SparseRow::default();
    unit.push(0, 0, 0, 1.0);
    eq.push((unit, 1.0));

    // pE[v_j] = y_j.
    for j in 0..d {
        let (p, q) = ix.rep_of(&ix.v(j));
        let mut row = SparseRow::default();
        row.push(0, p, q, 1.0);
        eq.push((row, y[j]));
    }

    // Moment consistency: every repeated cell equals its representative.
    for p in 0..ix.moment_dim {
        for q in p..ix.moment_dim {
            let m = Monomial::product(&ix.basis[p], &ix.basis[q]);
            let (rp, rq) = ix.rep_of(&m);
            if (rp, rq) != (p, q) {
                let mut row = SparseRow::default();
                row.push(0, p, q, 1.0);
                row.push(0, rp, rq, -1.0);
                eq.push((row, 0.0));
            }
        }
    }

    // Localizing ties: L[p,q] = c² pE[f_p f_q] − Σ_j pE[f_p f_q v_j²].
    for p in 0..ix.localizing_dim {
        for q in p..ix.localizing_dim {
            let m = Monomial::product(&ix.loc_basis[p], &ix.loc_basis[q]);
            let mut row = SparseRow::default();
            row.push(1, p, q, 1.0);
            let (rp, rq) = ix.rep_of(&m);
            row.push(0, rp, rq, -c2);
            for j in 0..d {
                let (sp, sq) = ix.rep_of(&m.times_v_sq(j as u32));
                row.push(0, sp, sq, 1.0);
            }
            eq.push((row, 0.0));
        }
    }

    // pE[b_i(‖X_i − v‖² − r²)] ≤ 0.
    let mut ineq: Vec<(SparseRow, f64)> = Vec::new();
    for i in 0..n {
        let xi: ArrayView1<f64> = x.row(i);
        let xi_norm2: f64 = xi.iter().map(|v| v * v).sum();
        let mut row = SparseRow::default();
        let (p, q) = ix.rep_of(&ix.b(i));
        row.push(0, p, q, xi_norm2 - r * r);
        for j in 0..d {
            let (bp, bq) = ix.rep_of(&ix.bv(i, j));
            row.push(0, bp, bq, -2.0 * xi[j]);
            let (sp, sq) = ix.rep_of(&ix.b(i).times_v_sq(j as u32));
            row.push(0, sp, sq, 1.0);
        }
        ineq.push((row, 0.0));
    }

    let v_cells = (0..d)
        .map(|j| {
            let (p, q) = ix.rep_of(&ix.v(j));
            (0usize, p, q)
        })
        .collect();

    Ok(SdpProblem {
        kind: ProgramKind::CoarseDeg4,
        psd_dims: vec![ix.moment_dim, ix.localizing_dim],
        objective,
        eq,
        ineq,
        v_cells,
        label: format!("coarse n={n} d={d} R={big_r:.4} r={r:.4}"),
    })
}

/// Optimal value of the location program at a pinned `y`.
pub fn coarse_sdp_value(
    y: &[f64],
    big_r: f64,
    r: f64,
    x: &Array2<f64>,
    limits: &CoarseLimits,
    opts: &SolveOptions,
) -> Result<f64> {
    Ok(solve_sdp(&build_coarse_sdp(y, big_r, r, x, limits)?, opts)?.value)
}

/// Integral count `|{i : ‖X_i − y‖ ≤ r}|`; the value the relaxation
/// dominates.
pub fn coarse_integral_count(y: &[f64], r: f64, x: &Array2<f64>) -> usize {
    (0..x.nrows())
        .filter(|&i| {
            let d2: f64 = x.row(i).iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            d2 <= r * r
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::{pe_mean_v, TOL_GAP};
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    fn limits() -> CoarseLimits {
        CoarseLimits::default()
    }

    #[test]
    fn point_mass_attains_n() {
        // X_i = y for all i: the integral point (b = 1, v = y) is optimal.
        let y = [0.5, -0.25];
        let x = array![[0.5, -0.25], [0.5, -0.25], [0.5, -0.25]];
        let v = coarse_sdp_value(&y, 10.0, 0.5, &x, &limits(), &opts()).unwrap();
        assert_abs_diff_eq!(v, 3.0, epsilon = 1e-4);
    }

    #[test]
    fn dominates_integral_count() {
        let x = array![[0.2, 0.1], [1.4, -0.3], [-0.8, 0.9], [0.1, -0.2]];
        let y = [0.0, 0.0];
        let r = 0.6;
        let count = coarse_integral_count(&y, r, &x) as f64;
        let v = coarse_sdp_value(&y, 5.0, r, &x, &limits(), &opts()).unwrap();
        assert!(v >= count - TOL_GAP, "relaxation {v} must dominate count {count}");
    }

    #[test]
    fn pinned_readout_matches_y() {
        let x = array![[0.3, 0.0], [0.0, 0.4], [-0.2, -0.2]];
        let y = [0.25, -0.1];
        let p = build_coarse_sdp(&y, 4.0, 0.8, &x, &limits()).unwrap();
        let sol = solve_sdp(&p, &opts()).unwrap();
        let v = pe_mean_v(&sol);
        assert_abs_diff_eq!(v[0], y[0], epsilon = 1e-6);
        assert_abs_diff_eq!(v[1], y[1], epsilon = 1e-6);
    }

    #[test]
    fn rejects_out_of_ball_y() {
        let x = array![[0.0, 0.0]];
        assert!(build_coarse_sdp(&[20.0, 0.0], 4.0, 0.5, &x, &limits()).is_err());
    }

    #[test]
    fn rejects_oversize_instances() {
        let x = Array2::zeros((31, 2));
        assert!(matches!(
            build_coarse_sdp(&[0.0, 0.0], 4.0, 0.5, &x, &limits()),
            Err(Error::DeskLimit(_))
        ));
    }

    #[test]
    fn rep_cells_cover_all_products() {
        // Every pairwise product of basis monomials and every localizing
        // weight product must resolve to a catalogued representative.
        let ix = CoarseMomentMatrix::new(4, 3);
        for p in 0..ix.localizing_dim {
            for q in p..ix.localizing_dim {
                let m = Monomial::product(&ix.loc_basis[p], &ix.loc_basis[q]);
                for j in 0..3u32 {
                    let _ = ix.rep_of(&m.times_v_sq(j));
                }
            }
        }
        assert!(ix.distinct_moments() > 0);
    }
}
