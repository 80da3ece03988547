//! The level-ℓ program and its first-order solver.
//!
//! Super vertices never enter the solver: `P(X_s = 1 | ·) = 0` forces `x_s ≡ −1`, so every
//! moment touching `s` is `±` a moment of the kept vertices and the moment matrix is a
//! congruence of the kept-vertex one. The solver works on kept vertices and expands.
//!
//! ADMM on `max ⟨c, y⟩` s.t. `y ∈ A`, `Bᵀ M(y) B = W ⪰ 0`. `A` holds `y_∅ = 1` and every
//! cardinality constraint `E[x_T g_j] = 0` with `|T| <= 2ℓ − 1` (all implied by PSD plus
//! the shallow ones, but enforced exactly so iterates stay on the right face). `B` spans
//! the complement of the vectors `x_I g_j`, which every feasible moment matrix annihilates;
//! projecting the PSD variable on that face avoids the slow convergence of a solver that
//! has no interior to work with.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{count_up_to, subsets_up_to, MomentVector};
use crate::error::{Error, Result};
use crate::graph::{ConstrainedInstance, VertexSet, WeightedGraph};
use crate::kernel::KernelResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramLimits {
    pub n_max: usize,
    /// Deepest conditioning set listed explicitly in the program.
    pub depth_cap: usize,
    pub max_moments: usize,
    pub max_rows: usize,
}

impl Default for ProgramLimits {
    fn default() -> Self {
        ProgramLimits { n_max: 14, depth_cap: 2, max_moments: 40_000, max_rows: 600 }
    }
}

/// `Σ_{i∈V_j} P(X_i = 1 | X_given = ·) = k_j` for every assignment of `given`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CardinalityConstraint {
    pub part: usize,
    pub given: VertexSet,
}

/// `P(X_vertex = 1 | X_given = ·) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSelection {
    pub vertex: usize,
    pub given: VertexSet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpProgram {
    pub graph: WeightedGraph,
    pub parts: Vec<VertexSet>,
    pub budgets: Vec<usize>,
    pub forbidden: VertexSet,
    pub level: usize,
    /// `(u, v, w)`: contributes `w · P(X_u ≠ X_v)`.
    pub objective: Vec<(usize, usize, f64)>,
    pub cardinality: Vec<CardinalityConstraint>,
    pub zero_selection: Vec<ZeroSelection>,
}

pub fn build_program(kernel: &KernelResult, level: usize) -> Result<SdpProgram> {
    build_program_for(&kernel.reduced_instance()?, &kernel.forbidden, level, &ProgramLimits::default())
}

pub fn build_program_for(
    inst: &ConstrainedInstance,
    forbidden: &VertexSet,
    level: usize,
    limits: &ProgramLimits,
) -> Result<SdpProgram> {
    let g = inst.graph();
    let n = g.n();
    if level < 2 {
        return Err(Error::Level(format!("program level must be >= 2, got {level}")));
    }
    forbidden.check_range(n)?;
    if n > limits.n_max {
        return Err(Error::Capacity(format!("{n} vertices exceed the configured cap {}", limits.n_max)));
    }
    let kept = n - forbidden.len();
    let moments = count_up_to(kept, 2 * level);
    let rows = count_up_to(kept, level);
    if moments > limits.max_moments || rows > limits.max_rows {
        return Err(Error::Capacity(format!(
            "level {level} on {kept} free vertices needs {moments} moments and {rows} matrix rows"
        )));
    }
    let depth = (level - 1).min(limits.depth_cap);
    let given: Vec<VertexSet> = subsets_up_to(n, depth).into_iter().map(VertexSet::from_bits).collect();
    let cardinality = (0..inst.num_parts())
        .flat_map(|part| given.iter().map(move |t| CardinalityConstraint { part, given: t.clone() }))
        .collect();
    let zero_selection = forbidden
        .iter()
        .flat_map(|s| {
            given
                .iter()
                .filter(move |t| !t.contains(s))
                .map(move |t| ZeroSelection { vertex: s, given: t.clone() })
        })
        .collect();
    Ok(SdpProgram {
        graph: g.clone(),
        parts: inst.parts().to_vec(),
        budgets: inst.budgets().to_vec(),
        forbidden: forbidden.clone(),
        level,
        objective: g.edges().iter().map(|e| (e.u, e.v, e.w)).collect(),
        cardinality,
        zero_selection,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Target for both primal and dual residuals (Frobenius norm).
    pub tol: f64,
    pub max_iter: usize,
    pub rho: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-8, max_iter: 20_000, rho: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub moments: MomentVector,
    pub objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Smallest eigenvalue of the (face-reduced) moment matrix.
    pub min_eigenvalue: f64,
}

pub fn solve(program: &SdpProgram, tol: f64) -> Result<SdpSolution> {
    solve_with(program, &SolveOptions { tol, ..SolveOptions::default() })
}

struct Layout {
    vars: Vec<u64>,
    index: HashMap<u64, usize>,
    m: usize,
    /// `pair_var[a * m + b]` is the moment index of `rows[a] △ rows[b]`.
    pair_var: Vec<usize>,
    /// Number of ordered row pairs landing on each moment.
    weight: Vec<f64>,
    rows: Vec<u64>,
}

impl Layout {
    fn new(nk: usize, lk: usize) -> Layout {
        let vars = subsets_up_to(nk, 2 * lk);
        let index: HashMap<u64, usize> = vars.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let rows = subsets_up_to(nk, lk);
        let m = rows.len();
        let mut pair_var = Vec::with_capacity(m * m);
        let mut weight = vec![0.0; vars.len()];
        for &a in &rows {
            for &b in &rows {
                let v = index[&(a ^ b)];
                pair_var.push(v);
                weight[v] += 1.0;
            }
        }
        Layout { vars, index, m, pair_var, weight, rows }
    }

    fn matrix(&self, y: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.m, self.m, |a, b| y[self.pair_var[a * self.m + b]])
    }

    /// `Σ_{(I,J): I△J = S} Z[I, J]` per moment.
    fn aggregate(&self, z: &DMatrix<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.vars.len()];
        for a in 0..self.m {
            for b in 0..self.m {
                out[self.pair_var[a * self.m + b]] += z[(a, b)];
            }
        }
        out
    }
}

/// Euclidean projection onto `{ŷ : Â ŷ = b}` via a row-space basis of `Â`.
struct AffineProjector {
    row_basis: DMatrix<f64>,
    offset: DVector<f64>,
}

impl AffineProjector {
    fn new(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<AffineProjector> {
        let svd = a.clone().svd(true, true);
        let u = svd.u.as_ref().expect("requested U");
        let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
        let s_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&k| svd.singular_values[k] > 1e-10 * s_max.max(1.0))
            .collect();
        let q = a.ncols();
        let mut row_basis = DMatrix::zeros(keep.len(), q);
        let mut offset = DVector::zeros(q);
        for (r, &k) in keep.iter().enumerate() {
            let row = v_t.row(k);
            row_basis.row_mut(r).copy_from(&row);
            let coef = u.column(k).dot(b) / svd.singular_values[k];
            offset += row.transpose() * coef;
        }
        let residual = (a * &offset - b).norm();
        if residual > 1e-6 * (1.0 + b.norm()) {
            return Err(Error::Infeasible(format!("cardinality system inconsistent (residual {residual:.2e})")));
        }
        Ok(AffineProjector { row_basis, offset })
    }

    fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        let coords = &self.row_basis * v;
        v - self.row_basis.tr_mul(&coords) + &self.offset
    }
}

fn psd_projection(x: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(x.clone());
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda > 0.0 {
            let v = eig.eigenvectors.column(k);
            out += lambda * &v * v.transpose();
        }
    }
    out
}

fn min_eigen(x: &DMatrix<f64>) -> f64 {
    if x.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(x.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn solve_with(p: &SdpProgram, opts: &SolveOptions) -> Result<SdpSolution> {
    let n = p.graph.n();
    if n >= 64 {
        return Err(Error::Capacity("programs are limited to 63 vertices".into()));
    }
    let kept: Vec<usize> = (0..n).filter(|&v| !p.forbidden.contains(v)).collect();
    let mut local = vec![None; n];
    for (t, &v) in kept.iter().enumerate() {
        local[v] = Some(t);
    }
    let kept_parts: Vec<Vec<usize>> = p
        .parts
        .iter()
        .map(|part| part.iter().filter_map(|v| local[v]).collect())
        .collect();
    for (j, (members, &k)) in kept_parts.iter().zip(&p.budgets).enumerate() {
        if k > members.len() {
            return Err(Error::Infeasible(format!(
                "part {j} needs {k} vertices but only {} are selectable",
                members.len()
            )));
        }
    }

    let nk = kept.len();
    let lk = p.level.min(nk);
    let lay = Layout::new(nk, lk);
    let q = lay.vars.len();
    let sqrt_d: Vec<f64> = lay.weight.iter().map(|w| w.sqrt()).collect();

    // Affine constraints in ŷ = D^{1/2} y coordinates.
    let closure: Vec<u64> = lay
        .vars
        .iter()
        .copied()
        .filter(|t| (t.count_ones() as usize) < 2 * lk.max(1))
        .collect();
    let live: Vec<(usize, &Vec<usize>)> = kept_parts
        .iter()
        .enumerate()
        .filter(|(_, members)| !members.is_empty())
        .collect();
    let n_rows = 1 + live.len() * closure.len();
    let mut a = DMatrix::zeros(n_rows, q);
    let mut b = DVector::zeros(n_rows);
    a[(0, 0)] = 1.0 / sqrt_d[0];
    b[0] = 1.0;
    let mut r = 1;
    for &(j, members) in &live {
        let diag = members.len() as f64 / 2.0 - p.budgets[j] as f64;
        for &t in &closure {
            let ti = lay.index[&t];
            a[(r, ti)] += diag / sqrt_d[ti];
            for &i in members {
                let s = lay.index[&(t ^ 1 << i)];
                a[(r, s)] += 0.5 / sqrt_d[s];
            }
            r += 1;
        }
    }
    let projector = AffineProjector::new(&a, &b)?;

    // Face of the PSD cone: complement of span{x_I g_j : |I| <= ℓ − 1}.
    let row_index: HashMap<u64, usize> = lay.rows.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let shallow: Vec<u64> = lay.rows.iter().copied().filter(|s| (s.count_ones() as usize) < lk).collect();
    let mut kmat: DMatrix<f64> = DMatrix::zeros(lay.m, live.len() * shallow.len());
    let mut col = 0;
    for &(j, members) in &live {
        let diag = members.len() as f64 / 2.0 - p.budgets[j] as f64;
        for &s in &shallow {
            kmat[(row_index[&s], col)] += diag;
            for &i in members {
                kmat[(row_index[&(s ^ 1 << i)], col)] += 0.5;
            }
            col += 1;
        }
    }
    let basis = if kmat.ncols() == 0 {
        DMatrix::identity(lay.m, lay.m)
    } else {
        let eig = SymmetricEigen::new(&kmat * kmat.transpose());
        let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let cols: Vec<usize> = (0..lay.m).filter(|&k| eig.eigenvalues[k] <= 1e-9 * top.max(1.0)).collect();
        let mut basis = DMatrix::zeros(lay.m, cols.len());
        for (c, &k) in cols.iter().enumerate() {
            basis.column_mut(c).copy_from(&eig.eigenvectors.column(k));
        }
        basis
    };
    if basis.ncols() == 0 {
        return Err(Error::Infeasible("constraints leave no positive semidefinite room".into()));
    }

    // Objective Σ w P(X_u ≠ X_v) = constant + ⟨c, y⟩.
    let mut c = vec![0.0; q];
    let mut constant = 0.0;
    for &(u, v, w) in &p.objective {
        match (local[u], local[v]) {
            (Some(a), Some(b)) => {
                c[lay.index[&(1 << a | 1 << b)]] -= w / 2.0;
                constant += w / 2.0;
            }
            (Some(a), None) | (None, Some(a)) => {
                c[lay.index[&(1 << a)]] += w / 2.0;
                constant += w / 2.0;
            }
            (None, None) => {}
        }
    }

    let rb = basis.ncols();
    let mut rho = opts.rho;
    let mut w_mat = DMatrix::zeros(rb, rb);
    let mut u_mat = DMatrix::zeros(rb, rb);
    let mut y = vec![0.0; q];
    let (mut rp, mut rd) = (f64::INFINITY, f64::INFINITY);
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=opts.max_iter {
        iterations = it;
        let z = &basis * (&w_mat - &u_mat) * basis.transpose();
        let agg = lay.aggregate(&z);
        let target = DVector::from_fn(q, |s, _| sqrt_d[s] * (agg[s] + c[s] / rho) / lay.weight[s]);
        let y_hat = projector.project(&target);
        for s in 0..q {
            y[s] = y_hat[s] / sqrt_d[s];
        }
        let mb = basis.transpose() * lay.matrix(&y) * &basis;
        let w_next = psd_projection(&(&mb + &u_mat));
        u_mat += &mb - &w_next;
        rp = (&mb - &w_next).norm();
        rd = rho * (&w_next - &w_mat).norm();
        w_mat = w_next;
        if rp < opts.tol && rd < opts.tol {
            converged = true;
            break;
        }
        if it % 20 == 0 {
            if rp > 10.0 * rd {
                rho *= 2.0;
                u_mat /= 2.0;
            } else if rd > 10.0 * rp {
                rho /= 2.0;
                u_mat *= 2.0;
            }
        }
    }
    if !converged {
        return Err(Error::Convergence { iterations, primal: rp, dual: rd });
    }

    // y_∅ is pinned by the constraints; store it exactly.
    y[0] = 1.0;
    let objective = constant + c.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
    let min_eigenvalue = min_eigen(&(basis.transpose() * lay.matrix(&y) * &basis));

    let level = p.level.min(n);
    let fmask = p.forbidden.iter().fold(0u64, |acc, v| acc | 1 << v);
    let full = subsets_up_to(n, 2 * level)
        .into_iter()
        .map(|s| {
            let mut bits = 0u64;
            for (t, &v) in kept.iter().enumerate() {
                if s >> v & 1 == 1 {
                    bits |= 1 << t;
                }
            }
            let sign = if (s & fmask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            (s, sign * y[lay.index[&bits]])
        })
        .collect();
    let moments = MomentVector::new(n, level, full)?;
    Ok(SdpSolution { moments, objective, iterations, primal_residual: rp, dual_residual: rd, min_eigenvalue })
}
